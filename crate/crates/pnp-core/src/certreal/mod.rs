//! Certified arbitrary-precision real arithmetic with ball semantics.
//!
//! A [`CertReal`] is a midpoint-radius pair: the represented exact value `x`
//! always satisfies `|x - midpoint| <= radius`. Every operation propagates
//! the radius soundly, so a comparison that the ball can decide is a proof.
//! Signs are reported only when the ball excludes zero; everything else is
//! `Indeterminate` and the caller escalates precision.

mod dyadic;
mod roots;
mod series;

pub use dyadic::{Dyadic, Round};
pub use roots::{
    bisect_root, enclose_root_from_sign, eval_poly_rational, find_root, poly_sign_at,
};

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

/// Mantissa bits kept for radii; radii only ever need a sound upper bound.
const RADIUS_BITS: u64 = 48;
/// Extra working bits for directed internal computations.
const GUARD_BITS: u32 = 16;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CertRealError {
    #[error("logarithm requires a certified strictly positive input")]
    NonPositiveInput,
    #[error("division requires a divisor ball that excludes zero")]
    DivisorContainsZero,
    #[error("square root requires a certified non-negative input")]
    NegativeSqrtInput,
    #[error("ball too wide or too close to a half-integer to pick a nearest integer")]
    AmbiguousNearestInteger,
    #[error("ball straddles an integer; floor is ambiguous at this precision")]
    AmbiguousFloor,
    #[error("precision escalation exceeded the configured cap of {cap} bits")]
    PrecisionCapExceeded { cap: u32 },
    #[error("polynomial endpoint signs are not provably opposite")]
    NoSignChange,
    #[error("invalid operand: {0}")]
    InvalidInput(String),
}

/// Certified sign of a ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Negative,
    /// Only produced for the exact zero ball (midpoint 0, radius 0).
    ZeroCandidate,
    Positive,
    /// The ball straddles zero; escalate precision to decide.
    Indeterminate,
}

/// Precision escalation policy: start at `start` bits, double on demand,
/// fail hard at `cap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub start: u32,
    pub cap: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { start: 256, cap: 1 << 20 }
    }
}

impl PrecisionPolicy {
    pub fn new(start: u32, cap: u32) -> Self {
        assert!(start > 0 && start <= cap, "invalid precision policy");
        PrecisionPolicy { start, cap }
    }

    /// Next precision after `current`, or an error once the cap is hit.
    pub fn escalate(&self, current: u32) -> Result<u32, CertRealError> {
        let next = current.saturating_mul(2);
        if next > self.cap {
            Err(CertRealError::PrecisionCapExceeded { cap: self.cap })
        } else {
            Ok(next)
        }
    }

    /// Run `attempt` at increasing precision until it produces a value.
    /// `attempt` returns `Ok(None)` to request escalation.
    pub fn run<T>(
        &self,
        mut attempt: impl FnMut(u32) -> Result<Option<T>, CertRealError>,
    ) -> Result<T, CertRealError> {
        let mut prec = self.start;
        loop {
            if let Some(v) = attempt(prec)? {
                return Ok(v);
            }
            prec = self.escalate(prec)?;
        }
    }
}

/// An arbitrary-precision real with a rigorous error radius.
#[derive(Clone, PartialEq, Eq)]
pub struct CertReal {
    mid: Dyadic,
    rad: Dyadic,
    prec: u32,
}

impl fmt::Debug for CertReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CertReal({} ± {} @{})",
            self.mid.to_f64(),
            self.rad.to_f64(),
            self.prec
        )
    }
}

impl CertReal {
    pub fn new(mid: Dyadic, rad: Dyadic, prec: u32) -> Self {
        assert!(!rad.is_negative(), "radius must be non-negative");
        CertReal { mid, rad, prec }.rounded()
    }

    pub fn exact_dyadic(d: Dyadic, prec: u32) -> Self {
        CertReal { mid: d, rad: Dyadic::zero(), prec }.rounded()
    }

    pub fn from_bigint(n: &BigInt, prec: u32) -> Self {
        CertReal::exact_dyadic(Dyadic::from_bigint(n.clone()), prec)
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        CertReal::exact_dyadic(Dyadic::from_i64(n), prec)
    }

    pub fn zero(prec: u32) -> Self {
        CertReal { mid: Dyadic::zero(), rad: Dyadic::zero(), prec }
    }

    pub fn one(prec: u32) -> Self {
        CertReal { mid: Dyadic::one(), rad: Dyadic::zero(), prec }
    }

    /// Tight enclosure of a rational at the working precision.
    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let mid = Dyadic::from_rational(q, prec as u64, Round::Nearest);
        // |q - mid| bounded via exact comparison of the difference
        let diff = {
            let mq = mid.to_rational();
            let d = q - mq;
            Dyadic::from_rational(&d.abs(), RADIUS_BITS, Round::Up)
        };
        CertReal { mid, rad: diff, prec }.rounded()
    }

    /// Ball from exact interval endpoints.
    pub fn from_interval(lo: &Dyadic, hi: &Dyadic, prec: u32) -> Self {
        assert!(lo.cmp(hi) != Ordering::Greater, "interval endpoints out of order");
        let mid = lo.add(hi).mul_pow2(-1);
        let rad = hi.sub(lo).mul_pow2(-1);
        CertReal { mid, rad, prec }.rounded()
    }

    fn rounded(mut self) -> Self {
        let (m, err) = self.mid.round_with_err(self.prec as u64, Round::Nearest);
        self.mid = m;
        self.rad = self.rad.add(&err).round_dir(RADIUS_BITS, Round::Up);
        self
    }

    pub fn midpoint(&self) -> &Dyadic {
        &self.mid
    }

    pub fn radius(&self) -> &Dyadic {
        &self.rad
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Exact lower edge `mid - rad`.
    pub fn lo(&self) -> Dyadic {
        self.mid.sub(&self.rad)
    }

    /// Exact upper edge `mid + rad`.
    pub fn hi(&self) -> Dyadic {
        self.mid.add(&self.rad)
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        CertReal { mid: self.mid.clone(), rad: self.rad.clone(), prec }.rounded()
    }

    fn join_prec(&self, other: &CertReal) -> u32 {
        self.prec.max(other.prec)
    }

    pub fn neg(&self) -> Self {
        CertReal { mid: self.mid.neg(), rad: self.rad.clone(), prec: self.prec }
    }

    pub fn abs(&self) -> Self {
        let lo = self.lo();
        let hi = self.hi();
        if !lo.is_negative() {
            self.clone()
        } else if !hi.is_positive() {
            self.neg()
        } else {
            // straddles zero: |x| in [0, max(|lo|, hi)]
            let top = lo.abs().max(&hi);
            CertReal::from_interval(&Dyadic::zero(), &top, self.prec)
        }
    }

    pub fn add(&self, other: &CertReal) -> Self {
        CertReal {
            mid: self.mid.add(&other.mid),
            rad: self.rad.add(&other.rad),
            prec: self.join_prec(other),
        }
        .rounded()
    }

    pub fn sub(&self, other: &CertReal) -> Self {
        self.add(&other.neg())
    }

    pub fn add_int(&self, n: &BigInt) -> Self {
        CertReal {
            mid: self.mid.add(&Dyadic::from_bigint(n.clone())),
            rad: self.rad.clone(),
            prec: self.prec,
        }
        .rounded()
    }

    pub fn mul(&self, other: &CertReal) -> Self {
        let mid = self.mid.mul(&other.mid);
        // |x*y - xm*ym| <= |xm| ry + |ym| rx + rx ry
        let am = self.mid.abs().round_dir(RADIUS_BITS, Round::Up);
        let bm = other.mid.abs().round_dir(RADIUS_BITS, Round::Up);
        let rad = am
            .mul(&other.rad)
            .add(&bm.mul(&self.rad))
            .add(&self.rad.mul(&other.rad));
        CertReal { mid, rad, prec: self.join_prec(other) }.rounded()
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        CertReal {
            mid: self.mid.mul_int(n),
            rad: self.rad.mul_int(&n.abs()),
            prec: self.prec,
        }
        .rounded()
    }

    /// Reciprocal; the ball must exclude zero.
    pub fn recip(&self) -> Result<Self, CertRealError> {
        let lo = self.lo();
        let hi = self.hi();
        let work = self.prec as u64 + GUARD_BITS as u64;
        if lo.is_positive() || hi.is_negative() {
            let inv_lo = Dyadic::one().div(&hi, work, Round::Down);
            let inv_hi = Dyadic::one().div(&lo, work, Round::Up);
            Ok(CertReal::from_interval(&inv_lo, &inv_hi, self.prec))
        } else {
            Err(CertRealError::DivisorContainsZero)
        }
    }

    pub fn div(&self, other: &CertReal) -> Result<Self, CertRealError> {
        Ok(self.mul(&other.recip()?))
    }

    /// Integer power; negative exponents go through the reciprocal.
    pub fn powi(&self, e: i64) -> Result<Self, CertRealError> {
        if e < 0 {
            return self.powi(-e)?.recip();
        }
        let mut result = CertReal::one(self.prec);
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    /// Certified natural logarithm; the ball must be strictly positive.
    pub fn log(&self) -> Result<Self, CertRealError> {
        let lo = self.lo();
        if !lo.is_positive() {
            return Err(CertRealError::NonPositiveInput);
        }
        let hi = self.hi();
        let work = self.prec as u64 + GUARD_BITS as u64;
        let llo = series::log_dyadic(&lo, work, Round::Down);
        let lhi = series::log_dyadic(&hi, work, Round::Up);
        Ok(CertReal::from_interval(&llo, &lhi, self.prec))
    }

    /// Certified exponential for arguments within `|x| <= 4`.
    pub(crate) fn exp(&self) -> Result<Self, CertRealError> {
        let lo = self.lo();
        let hi = self.hi();
        if hi.abs().cmp(&Dyadic::from_i64(4)) == Ordering::Greater
            || lo.abs().cmp(&Dyadic::from_i64(4)) == Ordering::Greater
        {
            return Err(CertRealError::InvalidInput(
                "exp argument outside supported range".into(),
            ));
        }
        let work = self.prec as u64 + GUARD_BITS as u64;
        let elo = series::exp_dyadic(&lo, work, Round::Down);
        let ehi = series::exp_dyadic(&hi, work, Round::Up);
        Ok(CertReal::from_interval(&elo, &ehi, self.prec))
    }

    /// Certified square root; the ball must be non-negative.
    pub fn sqrt(&self) -> Result<Self, CertRealError> {
        let lo = self.lo();
        if lo.is_negative() {
            return Err(CertRealError::NegativeSqrtInput);
        }
        let hi = self.hi();
        let work = self.prec as u64 + GUARD_BITS as u64;
        let slo = lo.sqrt(work, Round::Down);
        let shi = hi.sqrt(work, Round::Up);
        Ok(CertReal::from_interval(&slo, &shi, self.prec))
    }

    /// Certified sign. `Positive`/`Negative` prove the ball excludes zero.
    pub fn sign_of(&self) -> Sign {
        if self.rad.is_zero() && self.mid.is_zero() {
            return Sign::ZeroCandidate;
        }
        if self.lo().is_positive() {
            Sign::Positive
        } else if self.hi().is_negative() {
            Sign::Negative
        } else {
            Sign::Indeterminate
        }
    }

    /// Certified floor; fails when the ball straddles an integer.
    pub fn certified_floor(&self) -> Result<BigInt, CertRealError> {
        let f_lo = self.lo().floor_int();
        let f_hi = self.hi().floor_int();
        if f_lo == f_hi {
            Ok(f_lo)
        } else {
            Err(CertRealError::AmbiguousFloor)
        }
    }

    /// Distance to the nearest integer along with the achieving integer.
    ///
    /// The ball radius must be below 1/4. An exact half-integer reports
    /// distance exactly 1/2 with the smaller neighbor; a fuzzy ball touching
    /// a half-integer is ambiguous and the caller escalates.
    pub fn dist_to_nearest_int(&self) -> Result<(CertReal, BigInt), CertRealError> {
        let quarter = Dyadic::pow2(-2);
        if self.rad.cmp(&quarter) != Ordering::Less {
            return Err(CertRealError::AmbiguousNearestInteger);
        }
        let half = Dyadic::pow2(-1);
        if self.rad.is_zero() {
            let fl = self.mid.floor_int();
            let frac = self.mid.sub(&Dyadic::from_bigint(fl.clone()));
            if frac.cmp(&half) == Ordering::Equal {
                // exact tie: distance 1/2, smaller integer
                return Ok((CertReal::exact_dyadic(half, self.prec), fl));
            }
            let z = if frac.cmp(&half) == Ordering::Less { fl.clone() } else { fl + 1u8 };
            let d = self.mid.sub(&Dyadic::from_bigint(z.clone())).abs();
            return Ok((CertReal::exact_dyadic(d, self.prec), z));
        }
        // nearest integer to the midpoint, ties resolved to the smaller
        let z = self.mid.sub(&half).ceil_int();
        let zd = Dyadic::from_bigint(z.clone());
        // whole ball must live strictly inside (z - 1/2, z + 1/2)
        let lo_ok = self.lo().cmp(&zd.sub(&half)) == Ordering::Greater;
        let hi_ok = self.hi().cmp(&zd.add(&half)) == Ordering::Less;
        if !(lo_ok && hi_ok) {
            return Err(CertRealError::AmbiguousNearestInteger);
        }
        let shifted = CertReal {
            mid: self.mid.sub(&zd),
            rad: self.rad.clone(),
            prec: self.prec,
        };
        Ok((shifted.abs(), z))
    }

    /// Certified comparison against an exact rational.
    pub fn cmp_rational(&self, q: &BigRational) -> Option<Ordering> {
        if self.rad.is_zero() {
            return Some(self.mid.cmp_rational(q));
        }
        if self.hi().cmp_rational(q) == Ordering::Less {
            Some(Ordering::Less)
        } else if self.lo().cmp_rational(q) == Ordering::Greater {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// True when the ball proves `self < other`.
    pub fn certainly_lt(&self, other: &CertReal) -> bool {
        self.hi().cmp(&other.lo()) == Ordering::Less
    }

    /// True when the ball proves `self <= other` (sufficient condition).
    pub fn certainly_le(&self, other: &CertReal) -> bool {
        self.hi().cmp(&other.lo()) != Ordering::Greater
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        self.lo().cmp_rational(q) != Ordering::Greater
            && self.hi().cmp_rational(q) != Ordering::Less
    }

    pub fn contains_dyadic(&self, d: &Dyadic) -> bool {
        self.lo().cmp(d) != Ordering::Greater && self.hi().cmp(d) != Ordering::Less
    }

    /// True when the two balls share at least one point.
    pub fn overlaps(&self, other: &CertReal) -> bool {
        self.lo().cmp(&other.hi()) != Ordering::Greater
            && other.lo().cmp(&self.hi()) != Ordering::Greater
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }
}

/// Polynomial evaluation over balls (Horner form). Coefficients are
/// degree-descending exact integers.
pub fn eval_poly(coeffs: &[BigInt], x: &CertReal) -> CertReal {
    assert!(!coeffs.is_empty(), "empty coefficient list");
    let mut acc = CertReal::from_bigint(&coeffs[0], x.precision());
    for c in &coeffs[1..] {
        acc = acc.mul(x).add_int(c);
    }
    acc
}

/// A value that can be re-evaluated at any requested precision, producing a
/// certified enclosure. This is how irrational constants are threaded through
/// continued fractions and reductions, which escalate precision on demand.
#[derive(Clone)]
pub struct LazyReal {
    f: Arc<dyn Fn(u32) -> Result<CertReal, CertRealError> + Send + Sync>,
}

impl fmt::Debug for LazyReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LazyReal")
    }
}

impl LazyReal {
    pub fn new(f: impl Fn(u32) -> Result<CertReal, CertRealError> + Send + Sync + 'static) -> Self {
        LazyReal { f: Arc::new(f) }
    }

    pub fn from_rational(q: BigRational) -> Self {
        LazyReal::new(move |prec| Ok(CertReal::from_rational(&q, prec)))
    }

    /// Quadratic irrational `r + s * sqrt(d)` with rational `r`, `s` and a
    /// non-square positive integer `d`.
    pub fn quadratic(r: BigRational, s: BigRational, d: BigInt) -> Self {
        LazyReal::new(move |prec| {
            let root = CertReal::from_bigint(&d, prec + GUARD_BITS).sqrt()?;
            let rr = CertReal::from_rational(&r, prec);
            let ss = CertReal::from_rational(&s, prec);
            Ok(rr.add(&ss.mul(&root)).with_precision(prec))
        })
    }

    pub fn eval(&self, prec: u32) -> Result<CertReal, CertRealError> {
        (self.f)(prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ball(q: &BigRational, prec: u32) -> CertReal {
        CertReal::from_rational(q, prec)
    }

    #[test]
    fn sign_classification() {
        let pos = CertReal::new(Dyadic::one(), Dyadic::new(BigInt::from(1), -4), 64);
        assert_eq!(pos.sign_of(), Sign::Positive);
        let amb = CertReal::new(Dyadic::zero(), Dyadic::new(BigInt::from(1), -4), 64);
        assert_eq!(amb.sign_of(), Sign::Indeterminate);
        let neg = CertReal::from_rational(&rat(-3, 10_000_000_000), 64);
        assert_eq!(neg.sign_of(), Sign::Negative);
        assert_eq!(CertReal::zero(64).sign_of(), Sign::ZeroCandidate);
    }

    #[test]
    fn nearest_int_basics() {
        let (d, z) = ball(&rat(24, 10), 128).dist_to_nearest_int().unwrap();
        assert_eq!(z, BigInt::from(2));
        assert!(d.contains_rational(&rat(4, 10)));

        // exact tie at -1.5 resolves to the smaller integer
        let x = CertReal::exact_dyadic(Dyadic::new(BigInt::from(-3), -1), 64);
        let (d, z) = x.dist_to_nearest_int().unwrap();
        assert_eq!(z, BigInt::from(-2));
        assert!(d.contains_rational(&rat(1, 2)));
        assert!(d.is_exact());
    }

    #[test]
    fn nearest_int_29_sqrt2() {
        // 29 * sqrt(2) = 41.012193308819754...
        let two = CertReal::from_i64(2, 256);
        let x = two.sqrt().unwrap().mul_int(&BigInt::from(29));
        let (d, z) = x.dist_to_nearest_int().unwrap();
        assert_eq!(z, BigInt::from(41));
        // 0.0121933088 < d < 0.0121933089
        let below = BigRational::new("121933088".parse().unwrap(), "10000000000".parse().unwrap());
        let above = BigRational::new("121933089".parse().unwrap(), "10000000000".parse().unwrap());
        assert_eq!(d.cmp_rational(&below), Some(Ordering::Greater));
        assert_eq!(d.cmp_rational(&above), Some(Ordering::Less));
        // brute confirmation over the neighbor integers
        for cand in 40i64..=42 {
            let dist = x.sub(&CertReal::from_i64(cand, 256)).abs();
            if cand == 41 {
                assert!(dist.overlaps(&d));
            } else {
                assert!(d.certainly_lt(&dist));
            }
        }
    }

    #[test]
    fn ambiguous_nearest_int() {
        let wide = CertReal::new(Dyadic::one(), Dyadic::new(BigInt::from(1), -1), 64);
        assert_eq!(
            wide.dist_to_nearest_int().unwrap_err(),
            CertRealError::AmbiguousNearestInteger
        );
        // fuzzy ball centered on a half-integer
        let fuzzy = CertReal::new(
            Dyadic::new(BigInt::from(3), -1),
            Dyadic::pow2(-20),
            64,
        );
        assert_eq!(
            fuzzy.dist_to_nearest_int().unwrap_err(),
            CertRealError::AmbiguousNearestInteger
        );
    }

    #[test]
    fn division_rejects_zero_straddle() {
        let z = CertReal::new(Dyadic::zero(), Dyadic::one(), 64);
        assert_eq!(z.recip().unwrap_err(), CertRealError::DivisorContainsZero);
        let x = CertReal::from_i64(1, 64);
        assert_eq!(x.div(&z).unwrap_err(), CertRealError::DivisorContainsZero);
    }

    #[test]
    fn log_rejects_nonpositive() {
        let z = CertReal::new(Dyadic::one(), Dyadic::from_i64(2), 64);
        assert_eq!(z.log().unwrap_err(), CertRealError::NonPositiveInput);
    }

    #[test]
    fn log_phi_value() {
        // log((1+sqrt 5)/2) = 0.481211825059603447...
        let five = CertReal::from_i64(5, 256);
        let phi = five
            .sqrt()
            .unwrap()
            .add(&CertReal::one(256))
            .mul(&CertReal::from_rational(&rat(1, 2), 256));
        let l = phi.log().unwrap();
        // 0.481211825059603447 < log(phi) < 0.481211825059603448
        let below = BigRational::new(
            "481211825059603447".parse().unwrap(),
            BigInt::from(10u64.pow(18)),
        );
        let above = BigRational::new(
            "481211825059603448".parse().unwrap(),
            BigInt::from(10u64.pow(18)),
        );
        assert_eq!(l.cmp_rational(&below), Some(Ordering::Greater));
        assert_eq!(l.cmp_rational(&above), Some(Ordering::Less));
        assert!(l.radius().cmp(&Dyadic::pow2(-200)) == Ordering::Less);
    }

    /// Randomized soundness: exact rational arithmetic always lands inside
    /// the result ball. Run a large deterministic sample per operation.
    #[test]
    fn soundness_random_rationals() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
        let cases = 10_000;
        for _ in 0..cases {
            let n1 = rng.gen_range(-1_000_000i64..1_000_000);
            let d1 = rng.gen_range(1i64..1_000_000);
            let n2 = rng.gen_range(-1_000_000i64..1_000_000);
            let d2 = rng.gen_range(1i64..1_000_000);
            let qa = rat(n1, d1);
            let qb = rat(n2, d2);
            let a = ball(&qa, 64);
            let b = ball(&qb, 64);

            assert!(a.add(&b).contains_rational(&(&qa + &qb)));
            assert!(a.sub(&b).contains_rational(&(&qa - &qb)));
            assert!(a.mul(&b).contains_rational(&(&qa * &qb)));
            assert!(a.abs().contains_rational(&qa.abs()));
            if !qb.is_zero() {
                if let Ok(q) = a.div(&b) {
                    assert!(q.contains_rational(&(&qa / &qb)));
                }
            }
            let e = rng.gen_range(0i64..6);
            let powed = a.powi(e).unwrap();
            let mut expect = BigRational::one();
            for _ in 0..e {
                expect *= &qa;
            }
            assert!(powed.contains_rational(&expect));
        }
    }

    /// Sign soundness: a certified sign matches the exact rational sign.
    #[test]
    fn soundness_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xdead_beef);
        for _ in 0..10_000 {
            let n = rng.gen_range(-100i64..100);
            let d = rng.gen_range(1i64..1000);
            let q = rat(n, d);
            let x = ball(&q, 64);
            match x.sign_of() {
                Sign::Positive => assert!(q.is_positive()),
                Sign::Negative => assert!(q.is_negative()),
                Sign::ZeroCandidate => assert!(q.is_zero()),
                Sign::Indeterminate => {}
            }
        }
    }

    /// Monotone refinement: doubling the working precision keeps the result
    /// inside (or overlapping with no larger radius than) the coarse ball.
    #[test]
    fn monotone_refinement() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..2_000 {
            let n1 = rng.gen_range(1i64..1_000_000);
            let d1 = rng.gen_range(1i64..1_000_000);
            let q = rat(n1, d1);
            let coarse = ball(&q, 64);
            let fine = ball(&q, 128);
            assert!(coarse.overlaps(&fine));
            assert!(fine.radius().cmp(coarse.radius()) != Ordering::Greater);

            let lc = coarse.log().unwrap();
            let lf = fine.log().unwrap();
            assert!(lc.overlaps(&lf));
            assert!(lf.radius().cmp(lc.radius()) != Ordering::Greater);
        }
    }

    /// Determinism: identical inputs and precision give bit-identical output.
    #[test]
    fn determinism() {
        let q = rat(355, 113);
        let a = ball(&q, 128).log().unwrap();
        let b = ball(&q, 128).log().unwrap();
        assert_eq!(a.midpoint(), b.midpoint());
        assert_eq!(a.radius(), b.radius());
        let c = ball(&q, 128).sqrt().unwrap().powi(7).unwrap();
        let d = ball(&q, 128).sqrt().unwrap().powi(7).unwrap();
        assert_eq!(c.midpoint(), d.midpoint());
        assert_eq!(c.radius(), d.radius());
    }

    #[test]
    fn precision_policy_cap() {
        let p = PrecisionPolicy::new(256, 512);
        assert_eq!(p.escalate(256).unwrap(), 512);
        assert_eq!(
            p.escalate(512).unwrap_err(),
            CertRealError::PrecisionCapExceeded { cap: 512 }
        );
    }
}
