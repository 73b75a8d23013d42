//! Certified root isolation by exact bisection.
//!
//! The bracket endpoints are evaluated in exact rational arithmetic, so the
//! sign information driving the bisection is proof, not approximation. The
//! returned ball is an outward rounding of the final exact bracket.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::dyadic::{Dyadic, Round};
use super::{CertReal, CertRealError};

/// Exact polynomial value at a rational point (degree-descending
/// coefficients), cleared of denominators internally.
pub fn eval_poly_rational(coeffs: &[BigInt], x: &BigRational) -> BigRational {
    assert!(!coeffs.is_empty(), "empty coefficient list");
    let mut acc = BigRational::from_integer(coeffs[0].clone());
    for c in &coeffs[1..] {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    acc
}

/// Exact sign of a polynomial at a rational point. Avoids rational
/// normalization by evaluating `sum c_i a^i b^(n-i)` over integers.
pub fn poly_sign_at(coeffs: &[BigInt], x: &BigRational) -> Ordering {
    assert!(!coeffs.is_empty(), "empty coefficient list");
    let a = x.numer();
    let b = x.denom();
    // after step j: acc = sum_{i<=j} c_i a^(j-i) b^i  (the value scaled by b^j)
    let mut acc = coeffs[0].clone();
    let mut b_pow = BigInt::from(1u8);
    for c in &coeffs[1..] {
        b_pow *= b;
        acc = acc * a + c * &b_pow;
    }
    // b > 0, so the scaled sign equals the value's sign
    match acc.sign() {
        num_bigint::Sign::Minus => Ordering::Less,
        num_bigint::Sign::NoSign => Ordering::Equal,
        num_bigint::Sign::Plus => Ordering::Greater,
    }
}

/// Bisect `sign_at` over `[lo, hi]` down to a bracket of width at most
/// `target_width`. Requires provably opposite signs at the endpoints; an
/// exact zero hit collapses the bracket to a point.
pub fn bisect_root(
    sign_at: &dyn Fn(&BigRational) -> Ordering,
    lo: &BigRational,
    hi: &BigRational,
    target_width: &BigRational,
) -> Result<(BigRational, BigRational), CertRealError> {
    if lo >= hi || !target_width.is_positive() {
        return Err(CertRealError::InvalidInput(
            "bracket endpoints out of order or non-positive target".into(),
        ));
    }
    let s_lo = sign_at(lo);
    let s_hi = sign_at(hi);
    if s_lo == Ordering::Equal {
        return Ok((lo.clone(), lo.clone()));
    }
    if s_hi == Ordering::Equal {
        return Ok((hi.clone(), hi.clone()));
    }
    if s_lo == s_hi {
        return Err(CertRealError::NoSignChange);
    }
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let two = BigRational::from_integer(BigInt::from(2));
    while &hi - &lo > *target_width {
        let mid = (&lo + &hi) / &two;
        match sign_at(&mid) {
            Ordering::Equal => return Ok((mid.clone(), mid)),
            s if s == s_lo => lo = mid,
            _ => hi = mid,
        }
    }
    Ok((lo, hi))
}

/// Enclose the unique root of a polynomial inside `[lo, hi]` by exact
/// bisection, to a ball of radius at most `target_radius`.
pub fn find_root(
    coeffs: &[BigInt],
    lo: &BigRational,
    hi: &BigRational,
    target_radius: &BigRational,
) -> Result<CertReal, CertRealError> {
    if coeffs.is_empty() || coeffs[0].is_zero() {
        return Err(CertRealError::InvalidInput(
            "polynomial needs a non-zero leading coefficient".into(),
        ));
    }
    if !target_radius.is_positive() {
        return Err(CertRealError::InvalidInput("target radius must be positive".into()));
    }
    let sign_at = |x: &BigRational| poly_sign_at(coeffs, x);
    enclose_root_from_sign(&sign_at, lo, hi, target_radius)
}

/// Root isolation driven by an arbitrary exact sign oracle: bisect to the
/// target width, then round the bracket outward into a ball whose radius
/// still meets the target.
pub fn enclose_root_from_sign(
    sign_at: &dyn Fn(&BigRational) -> Ordering,
    lo: &BigRational,
    hi: &BigRational,
    target_radius: &BigRational,
) -> Result<CertReal, CertRealError> {
    let width = target_radius.clone(); // bracket width w gives radius w/2
    let (blo, bhi) = bisect_root(sign_at, lo, hi, &width)?;
    // precision such that outward rounding adds at most target/4
    let prec = rational_bits(target_radius) + 16;
    let dlo = Dyadic::from_rational(&blo, prec as u64 + 16, Round::Down);
    let dhi = Dyadic::from_rational(&bhi, prec as u64 + 16, Round::Up);
    let ball = CertReal::from_interval(&dlo, &dhi, prec);
    debug_assert!(
        ball.radius().to_rational() <= *target_radius,
        "root enclosure exceeded target radius"
    );
    Ok(ball)
}

/// Bits needed so that 2^-bits is below `q` (for positive `q < 1`); small
/// positive result for q >= 1.
fn rational_bits(q: &BigRational) -> u32 {
    let mut bits: i64 = q.denom().bits() as i64 - q.numer().bits() as i64 + 2;
    if bits < 8 {
        bits = 8;
    }
    bits as u32
}
