//! Evaluators for the bound machinery: the lower-bound theorem for linear
//! forms in logarithms, the logarithm-linearization constants, the
//! `x / (log x)^m` inversion, and the assembled per-k search bounds.
//!
//! These right-hand sides are trusted inequalities; this module only
//! evaluates them as certified enclosures. Comparisons against recorded
//! constants always use the enclosure's upper edge, so a certificate can
//! never under-report a bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use thiserror::Error;

use crate::certreal::{CertReal, CertRealError, Dyadic};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LinformError {
    #[error("argument outside the open unit interval")]
    OutOfDomain,
    #[error("S must be certifiably at least (4 m^2)^m")]
    PreconditionSViolated,
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Real(#[from] CertRealError),
}

/// Parameters of the linear-forms lower bound with `s` logarithms over a
/// field of degree `degree`; `coeff_bound` dominates every |a_i| and each
/// `b_values[j]` dominates `max(degree * h(eta_j), |log eta_j|, 0.16)`.
#[derive(Clone, Debug)]
pub struct MatveevParams {
    pub s: u32,
    pub degree: u32,
    pub coeff_bound: CertReal,
    pub b_values: Vec<CertReal>,
}

impl MatveevParams {
    pub fn validate(&self) -> Result<(), LinformError> {
        if self.s == 0 || self.degree == 0 {
            return Err(LinformError::BadParams("s and degree must be positive".into()));
        }
        if self.b_values.len() != self.s as usize {
            return Err(LinformError::BadParams(format!(
                "expected {} B values, got {}",
                self.s,
                self.b_values.len()
            )));
        }
        let floor = BigRational::new(BigInt::from(4), BigInt::from(25)); // 0.16
        for (j, b) in self.b_values.iter().enumerate() {
            if b.cmp_rational(&floor) == Some(std::cmp::Ordering::Less) {
                return Err(LinformError::BadParams(format!("B_{} below the 0.16 floor", j + 1)));
            }
        }
        if self.coeff_bound.cmp_rational(&BigRational::one()) == Some(std::cmp::Ordering::Less) {
            return Err(LinformError::BadParams("coefficient bound below 1".into()));
        }
        Ok(())
    }
}

/// The s-dependent leading factor `1.4 * 30^(s+3) * s^4.5`.
pub fn matveev_leading_factor(s: u32, prec: u32) -> Result<CertReal, CertRealError> {
    let c = BigRational::new(BigInt::from(7) * BigInt::from(30u8).pow(s + 3), BigInt::from(5));
    let s_ball = CertReal::from_i64(s as i64, prec);
    let s45 = s_ball.powi(4)?.mul(&s_ball.sqrt()?);
    Ok(CertReal::from_rational(&c, prec).mul(&s45))
}

/// Enclosure of the full right-hand side
/// `1.4 * 30^(s+3) * s^4.5 * d^2 (1 + log d)(1 + log D) * B_1 ... B_s`,
/// an upper bound on `-log |Lambda|`.
pub fn matveev_rhs(p: &MatveevParams) -> Result<CertReal, LinformError> {
    p.validate()?;
    let prec = p.coeff_bound.precision().max(64);
    let one = CertReal::one(prec);
    let lead = matveev_leading_factor(p.s, prec)?;
    let d = CertReal::from_i64(p.degree as i64, prec);
    let d_part = d.powi(2)?.mul(&one.add(&d.log()?));
    let coeff_part = one.add(&p.coeff_bound.log()?);
    let mut acc = lead.mul(&d_part).mul(&coeff_part);
    for b in &p.b_values {
        acc = acc.mul(b);
    }
    Ok(acc)
}

/// First linearization constant `-log(1 - a) / a` for `0 < a < 1`:
/// `|log(1+x)| < (-log(1-a)/a) |x|` whenever `|x| < a`.
pub fn deweger_factor(a: &CertReal) -> Result<CertReal, LinformError> {
    check_unit_interval(a)?;
    let prec = a.precision();
    let one = CertReal::one(prec);
    let f = one.sub(a).recip()?.log()?.div(a)?;
    Ok(f)
}

/// Second linearization constant `a / (1 - e^{-a})` for `0 < a < 1`:
/// `|x| < (a / (1 - e^{-a})) |e^x - 1|` whenever `|x| < a`.
pub fn deweger_factor_second(a: &CertReal) -> Result<CertReal, LinformError> {
    check_unit_interval(a)?;
    let prec = a.precision();
    let one = CertReal::one(prec);
    let denom = one.sub(&a.neg().exp()?);
    Ok(a.div(&denom)?)
}

fn check_unit_interval(a: &CertReal) -> Result<(), LinformError> {
    let lo_ok = a.lo().is_positive();
    let hi_ok = a.hi().cmp(&Dyadic::one()) == std::cmp::Ordering::Less;
    if lo_ok && hi_ok {
        Ok(())
    } else {
        Err(LinformError::OutOfDomain)
    }
}

/// Inversion bound: if `x / (log x)^m < S` with `S >= (4 m^2)^m`, then
/// `x < 2^m S (log S)^m`. Returns the enclosure of that upper bound.
pub fn sanchez_luca_invert(m: u32, s_value: &CertReal) -> Result<CertReal, LinformError> {
    if m == 0 {
        return Err(LinformError::BadParams("m must be at least 1".into()));
    }
    let threshold = BigRational::from_integer(BigInt::from(4u32 * m * m).pow(m));
    match s_value.cmp_rational(&threshold) {
        Some(std::cmp::Ordering::Greater) | Some(std::cmp::Ordering::Equal) => {}
        _ => return Err(LinformError::PreconditionSViolated),
    }
    let prec = s_value.precision();
    let two_m = CertReal::from_bigint(&(BigInt::one() << m), prec);
    Ok(two_m.mul(s_value).mul(&s_value.log()?.powi(m as i64)?))
}

/// Greatest integer strictly below the rational `q`.
pub fn strict_int_below(q: &BigRational) -> BigInt {
    q.ceil().to_integer() - 1
}

/// The per-k bounds `n <= n_max = floor(5.28e16 k^5 log^3 k)` and
/// `m <= m_max = floor(n_max / 0.39)`, computed from the enclosure's upper
/// edge so they can only be sound over-approximations.
pub fn lemma31_bounds(k: u32, prec: u32) -> Result<(BigInt, BigInt), LinformError> {
    lemma31_bounds_big(&BigInt::from(k), prec)
}

/// Same bounds for multiplier values beyond the u32 range (the initial
/// large-k bound feeds back into this).
pub fn lemma31_bounds_big(k: &BigInt, prec: u32) -> Result<(BigInt, BigInt), LinformError> {
    assert!(k >= &BigInt::from(2));
    let c = BigInt::from(528u32) * BigInt::from(10u64).pow(14u32);
    let k_ball = CertReal::from_bigint(k, prec);
    let bound = k_ball
        .powi(5)?
        .mul(&k_ball.log()?.powi(3)?)
        .mul_int(&c);
    let n_max = bound.hi().floor_int();
    // m < n_max / 0.39 = n_max * 100 / 39
    let m_hi = BigRational::new(&n_max * BigInt::from(100), BigInt::from(39));
    let m_max = m_hi.floor().to_integer();
    Ok((n_max, m_max))
}

/// Eq-style sandwich filter between n and m: `1.25 n - 1.5 < m < 2.52 n - 0.52`.
pub fn nm_sandwich_holds(n: i64, m: i64) -> bool {
    // 1.25n - 1.5 < m  <=>  5n - 6 < 4m ; m < 2.52n - 0.52  <=>  25m < 63n - 13
    (5 * n - 6) < 4 * m && 25 * m < 63 * n - 13
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ball_of(n: i64, d: i64) -> CertReal {
        CertReal::from_rational(&rat(n, d), 128)
    }

    #[test]
    fn leading_factor_three_logs() {
        // 1.4 * 30^6 * 3^4.5 = 1.4318...e11, within 0.1% of 1.432e11
        let lead = matveev_leading_factor(3, 128).unwrap();
        let center = rat(1432, 1) * rat(10i64.pow(8), 1);
        let tol = &center * rat(1, 1000);
        assert_eq!(lead.cmp_rational(&(&center - &tol)), Some(Ordering::Greater));
        assert_eq!(lead.cmp_rational(&(&center + &tol)), Some(Ordering::Less));
    }

    #[test]
    fn trivial_substitution() {
        // s=1, d=1, D=1, B=0.16 -> 1.4 * 30^4 * 0.16 = 181440
        let p = MatveevParams {
            s: 1,
            degree: 1,
            coeff_bound: CertReal::one(128),
            b_values: vec![ball_of(16, 100)],
        };
        let v = matveev_rhs(&p).unwrap();
        assert!(v.contains_rational(&rat(181_440, 1)));
    }

    #[test]
    fn d_independent_product_matches_recorded_value() {
        // s=3, d=6, B = (16.8, 1.45, 0.77); the D-independent part is the rhs
        // divided by (1 + log D), i.e. evaluated with D = 1.
        let p = MatveevParams {
            s: 3,
            degree: 6,
            coeff_bound: CertReal::one(192),
            b_values: vec![ball_of(168, 10), ball_of(145, 100), ball_of(77, 100)],
        };
        let v = matveev_rhs(&p).unwrap();
        // encloses 2.7e14 within 1%
        let center = rat(27, 10) * rat(10i64.pow(14), 1);
        let tol = &center * rat(1, 100);
        assert_eq!(v.cmp_rational(&(&center - &tol)), Some(Ordering::Greater));
        assert_eq!(v.cmp_rational(&(&center + &tol)), Some(Ordering::Less));
    }

    #[test]
    fn rhs_monotone_in_d_and_b() {
        let base = MatveevParams {
            s: 2,
            degree: 4,
            coeff_bound: ball_of(10, 1),
            b_values: vec![ball_of(3, 1), ball_of(5, 1)],
        };
        let v0 = matveev_rhs(&base).unwrap();
        let mut bigger_d = base.clone();
        bigger_d.coeff_bound = ball_of(11, 1);
        assert!(v0.certainly_lt(&matveev_rhs(&bigger_d).unwrap()));
        let mut bigger_b = base.clone();
        bigger_b.b_values[1] = ball_of(6, 1);
        assert!(v0.certainly_lt(&matveev_rhs(&bigger_b).unwrap()));
    }

    #[test]
    fn rhs_rejects_bad_params() {
        let p = MatveevParams {
            s: 1,
            degree: 1,
            coeff_bound: CertReal::one(64),
            b_values: vec![ball_of(1, 10)],
        };
        assert!(matches!(matveev_rhs(&p), Err(LinformError::BadParams(_))));
        let p2 = MatveevParams {
            s: 2,
            degree: 1,
            coeff_bound: CertReal::one(64),
            b_values: vec![ball_of(1, 1)],
        };
        assert!(matches!(matveev_rhs(&p2), Err(LinformError::BadParams(_))));
    }

    #[test]
    fn deweger_recorded_constants() {
        // a = 0.77: factor = 1.9086...; times 2.4 stays below 4.59
        let f = deweger_factor(&ball_of(77, 100)).unwrap();
        let prod = f.mul(&ball_of(24, 10));
        assert_eq!(prod.cmp_rational(&rat(459, 100)), Some(Ordering::Less));
        // a = 0.1: factor = 1.0536; times 7.62 stays below 8.1
        let f = deweger_factor(&ball_of(1, 10)).unwrap();
        let prod = f.mul(&ball_of(762, 100));
        assert_eq!(prod.cmp_rational(&rat(81, 10)), Some(Ordering::Less));
        // a -> 0+: factor -> 1
        let f = deweger_factor(&ball_of(1, 1_000_000)).unwrap();
        assert_eq!(f.cmp_rational(&rat(1, 1)), Some(Ordering::Greater));
        assert_eq!(
            f.cmp_rational(&rat(1_000_001, 1_000_000)),
            Some(Ordering::Less)
        );
    }

    #[test]
    fn deweger_factors_exceed_one() {
        for (n, d) in [(1i64, 100i64), (1, 10), (1, 2), (77, 100), (99, 100)] {
            let a = ball_of(n, d);
            let f1 = deweger_factor(&a).unwrap();
            let f2 = deweger_factor_second(&a).unwrap();
            assert_eq!(f1.cmp_rational(&rat(1, 1)), Some(Ordering::Greater), "first {n}/{d}");
            assert_eq!(f2.cmp_rational(&rat(1, 1)), Some(Ordering::Greater), "second {n}/{d}");
        }
        assert_eq!(deweger_factor(&ball_of(3, 2)).unwrap_err(), LinformError::OutOfDomain);
        assert_eq!(deweger_factor(&ball_of(-1, 2)).unwrap_err(), LinformError::OutOfDomain);
    }

    #[test]
    fn sanchez_luca_small_case_with_exhaustive_oracle() {
        // m=1, S=16: bound = 32 log 16 = 88.72...; the true maximum integer
        // with x / log x < 16 is 67 (exhaustive scan below).
        let s = CertReal::from_i64(16, 128);
        let bound = sanchez_luca_invert(1, &s).unwrap();
        assert_eq!(bound.cmp_rational(&rat(88, 1)), Some(Ordering::Greater));
        assert_eq!(bound.cmp_rational(&rat(89, 1)), Some(Ordering::Less));
        let mut max_x = 0i64;
        for x in 2..=200i64 {
            // x / log x < 16 <=> x < 16 log x; compare with certified balls
            let xb = CertReal::from_i64(x, 128);
            let rhs = xb.log().unwrap().mul(&CertReal::from_i64(16, 128));
            if xb.certainly_lt(&rhs) {
                max_x = x;
            }
        }
        assert_eq!(max_x, 67);
        assert_eq!(bound.cmp_rational(&rat(max_x, 1)), Some(Ordering::Greater));
    }

    #[test]
    fn sanchez_luca_boundary_and_violation() {
        // m=2 at the minimum allowed S = 256: 4 * 256 * (log 256)^2 = 31486.97...
        let s = CertReal::from_i64(256, 128);
        let bound = sanchez_luca_invert(2, &s).unwrap();
        assert_eq!(bound.cmp_rational(&rat(31_480, 1)), Some(Ordering::Greater));
        assert_eq!(bound.cmp_rational(&rat(31_490, 1)), Some(Ordering::Less));
        let too_small = CertReal::from_i64(255, 128);
        assert_eq!(
            sanchez_luca_invert(2, &too_small).unwrap_err(),
            LinformError::PreconditionSViolated
        );
    }

    /// Soundness of the inversion against exhaustive search for small S.
    #[test]
    fn sanchez_luca_exhaustive_soundness() {
        for m in [1u32, 2] {
            let mut s_val = BigInt::from(4u32 * m * m).pow(m);
            while s_val <= BigInt::from(10_000) {
                let s = CertReal::from_bigint(&s_val, 128);
                let bound = sanchez_luca_invert(m, &s).unwrap();
                let limit = bound.hi().ceil_int();
                // no integer x beyond the bound satisfies x/(log x)^m < S;
                // scan a window past the bound
                let limit_i: i64 = limit.to_string().parse().unwrap_or(i64::MAX);
                for x in (limit_i + 1)..(limit_i + 50) {
                    let xb = CertReal::from_i64(x, 128);
                    let rhs = xb.log().unwrap().powi(m as i64).unwrap().mul(&s);
                    assert!(
                        rhs.certainly_lt(&xb),
                        "m={m} S={s_val} violated at x={x}"
                    );
                }
                s_val *= BigInt::from(7);
            }
        }
    }

    #[test]
    fn lemma31_reference_points() {
        // k=2: 5.28e16 * 32 * (log 2)^3 = 5.6268...e17
        let (n2, m2) = lemma31_bounds(2, 128).unwrap();
        let n2s = n2.to_string();
        assert!(n2s.starts_with("5626") && n2s.len() == 18, "{n2s}");
        assert_eq!(&m2, &(&n2 * BigInt::from(100) / BigInt::from(39)));
        // k=360: about 6.5e31
        let (n360, _) = lemma31_bounds(360, 128).unwrap();
        let s = n360.to_string();
        assert_eq!(s.len(), 32);
        assert!(s.starts_with("65") || s.starts_with("64") || s.starts_with("66"), "{s}");
    }

    #[test]
    fn sandwich_filter() {
        assert!(nm_sandwich_holds(6, 13));
        assert!(!nm_sandwich_holds(6, 6));
        assert!(!nm_sandwich_holds(6, 15));
        assert!(nm_sandwich_holds(4, 8));
    }

    #[test]
    fn strict_int_below_cases() {
        assert_eq!(strict_int_below(&rat(7, 1)), BigInt::from(6));
        assert_eq!(strict_int_below(&rat(29, 4)), BigInt::from(7));
        assert_eq!(strict_int_below(&rat(-3, 2)), BigInt::from(-2));
    }
}
