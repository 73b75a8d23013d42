//! Certified constants of the proof: the dominant root gamma(k) of the
//! k-Pell characteristic polynomial, the Narayana root alpha with its
//! conjugate modulus, the golden ratio, the Binet coefficients, and
//! logarithmic heights.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use thiserror::Error;

use crate::certreal::{
    enclose_root_from_sign, find_root, CertReal, CertRealError, Dyadic, LazyReal,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AlgebraicError {
    #[error("denominator enclosure cannot exclude zero; escalate precision")]
    DenominatorIndeterminate,
    #[error("certified inequality failed: {0}")]
    BoundViolated(String),
    #[error(transparent)]
    Real(#[from] CertRealError),
}

/// `x^3 - x^2 - 1`, the Narayana characteristic polynomial.
pub fn narayana_char_poly() -> Vec<BigInt> {
    [1, -1, 0, -1].map(BigInt::from).to_vec()
}

/// `x^k - 2x^(k-1) - x^(k-2) - ... - x - 1`, degree-descending.
pub fn kpell_char_poly(k: u32) -> Vec<BigInt> {
    assert!(k >= 2);
    let mut coeffs = Vec::with_capacity(k as usize + 1);
    coeffs.push(BigInt::one());
    coeffs.push(BigInt::from(-2));
    for _ in 2..=k {
        coeffs.push(BigInt::from(-1));
    }
    coeffs
}

/// Exact sign of the k-Pell characteristic polynomial at a rational `x > 1`,
/// through the identity `(x-1) Phi_k(x) = x^(k+1) - 3x^k + x^(k-1) + 1`.
/// This needs one big power instead of k Horner steps.
fn kpell_poly_sign(k: u32, x: &BigRational) -> Ordering {
    let a = x.numer();
    let b = x.denom();
    debug_assert!(x > &BigRational::one());
    // sign of a^(k+1) - 3 a^k b + a^(k-1) b^2 + b^(k+1)
    let a_km1: BigInt = Pow::pow(a, k - 1);
    let a_k = &a_km1 * a;
    let a_kp1 = &a_k * a;
    let b_kp1: BigInt = Pow::pow(b, k + 1);
    let value = a_kp1 - BigInt::from(3) * a_k * b + a_km1 * b * b + b_kp1;
    match value.sign() {
        num_bigint::Sign::Minus => Ordering::Less,
        num_bigint::Sign::NoSign => Ordering::Equal,
        num_bigint::Sign::Plus => Ordering::Greater,
    }
}

/// Enclosure of the golden ratio at the given precision.
pub fn phi_ball(prec: u32) -> Result<CertReal, CertRealError> {
    let five = CertReal::from_i64(5, prec + 32);
    let half = CertReal::exact_dyadic(Dyadic::pow2(-1), prec + 32);
    Ok(five
        .sqrt()?
        .add(&CertReal::one(prec + 32))
        .mul(&half)
        .with_precision(prec))
}

/// Localization interval `(phi^2 (1 - phi^-k), phi^2)` for gamma(k), as a
/// pair of exact dyadic bracket endpoints (outward rounded).
fn gamma_bracket(k: u32, bits: u32) -> Result<(Dyadic, Dyadic), CertRealError> {
    let work = bits + 64 + (32 - k.leading_zeros());
    let phi = phi_ball(work)?;
    let phi_sq = phi.powi(2)?;
    let lower = {
        let dec = CertReal::one(work).sub(&phi.powi(k as i64)?.recip()?);
        phi_sq.mul(&dec)
    };
    Ok((lower.lo(), phi_sq.hi()))
}

/// Enclosure of gamma(k), the unique root of the k-Pell characteristic
/// polynomial outside the unit circle, to radius at most `target_radius`.
pub fn gamma_of(k: u32, target_radius: &BigRational) -> Result<CertReal, CertRealError> {
    assert!(k >= 2);
    if k == 2 {
        // classical Pell: gamma = 1 + sqrt(2); keep the generic path honest
        // but seed it with the tight integer bracket [2, 3].
        return find_root(
            &kpell_char_poly(2),
            &BigRational::from_integer(BigInt::from(2)),
            &BigRational::from_integer(BigInt::from(3)),
            target_radius,
        );
    }
    let bits = radius_bits(target_radius);
    let (lo_d, hi_d) = gamma_bracket(k, bits)?;
    let sign = move |x: &BigRational| kpell_poly_sign(k, x);
    enclose_root_from_sign(&sign, &lo_d.to_rational(), &hi_d.to_rational(), target_radius)
}

fn radius_bits(target: &BigRational) -> u32 {
    let mut bits = target.denom().bits() as i64 - target.numer().bits() as i64 + 2;
    if bits < 16 {
        bits = 16;
    }
    bits as u32
}

/// Enclosures of the Narayana dominant root alpha and of the shared modulus
/// of its complex conjugate pair. The modulus comes from the root product
/// `alpha |beta|^2 = 1`, so no complex arithmetic is needed.
pub fn alpha_root(target_radius: &BigRational) -> Result<(CertReal, CertReal), CertRealError> {
    let tight = target_radius / BigRational::from_integer(BigInt::from(16));
    let alpha = find_root(
        &narayana_char_poly(),
        &BigRational::from_integer(BigInt::one()),
        &BigRational::from_integer(BigInt::from(2)),
        &tight,
    )?;
    let beta_modulus = alpha.recip()?.sqrt()?;
    debug_assert!(beta_modulus.radius().to_rational() <= *target_radius);
    Ok((alpha, beta_modulus))
}

/// `g_k(z) = (z-1) / ((k+1) z^2 - 3k z + k - 1)` evaluated on a ball.
pub fn g_k_at(k: u32, gamma: &CertReal) -> Result<CertReal, AlgebraicError> {
    let prec = gamma.precision();
    let kk = BigInt::from(k);
    let num = gamma.sub(&CertReal::one(prec));
    let den = gamma
        .powi(2)?
        .mul_int(&(&kk + 1))
        .sub(&gamma.mul_int(&(&kk * 3)))
        .add(&CertReal::from_bigint(&(&kk - 1), prec));
    num.div(&den).map_err(|e| match e {
        CertRealError::DivisorContainsZero => AlgebraicError::DenominatorIndeterminate,
        other => AlgebraicError::Real(other),
    })
}

/// `C_alpha = 1 / (alpha^3 + 2)`, the dominant Binet coefficient of the
/// Narayana sequence.
pub fn c_alpha_of(alpha: &CertReal) -> Result<CertReal, CertRealError> {
    alpha
        .powi(3)?
        .add(&CertReal::from_i64(2, alpha.precision()))
        .recip()
}

/// Certified constants shared by one value of k. Immutable once built.
#[derive(Clone, Debug)]
pub struct AlgebraicContext {
    k: u32,
    prec: u32,
    gamma: CertReal,
    g_k_gamma: CertReal,
    alpha: CertReal,
    beta_modulus: CertReal,
    phi: CertReal,
    c_alpha: CertReal,
}

impl AlgebraicContext {
    pub fn new(k: u32, prec: u32) -> Result<Self, AlgebraicError> {
        let target = BigRational::new(BigInt::one(), BigInt::one() << prec as u64);
        let gamma = gamma_of(k, &target)?;
        let g_k_gamma = g_k_at(k, &gamma)?;
        let (alpha, beta_modulus) = alpha_root(&target)?;
        let phi = phi_ball(prec)?;
        let c_alpha = c_alpha_of(&alpha)?;
        Ok(AlgebraicContext { k, prec, gamma, g_k_gamma, alpha, beta_modulus, phi, c_alpha })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn gamma(&self) -> &CertReal {
        &self.gamma
    }

    pub fn g_k_gamma(&self) -> &CertReal {
        &self.g_k_gamma
    }

    pub fn alpha(&self) -> &CertReal {
        &self.alpha
    }

    pub fn beta_modulus(&self) -> &CertReal {
        &self.beta_modulus
    }

    pub fn phi(&self) -> &CertReal {
        &self.phi
    }

    pub fn c_alpha(&self) -> &CertReal {
        &self.c_alpha
    }

    /// `h(gamma) = log(gamma) / k`; the only conjugate outside the unit
    /// circle is gamma itself.
    pub fn gamma_height(&self) -> Result<HeightValue, CertRealError> {
        let log_g = self.gamma.log()?;
        let v = log_g.mul(&CertReal::from_rational(
            &BigRational::new(BigInt::one(), BigInt::from(self.k)),
            self.prec,
        ));
        Ok(HeightValue { value: v })
    }
}

/// A logarithmic height (natural-log units, non-negative).
#[derive(Clone, Debug)]
pub struct HeightValue {
    pub value: CertReal,
}

/// Height from the minimal polynomial data: leading coefficient and the
/// moduli of all conjugates (degree = moduli count).
pub fn height_from_minpoly(
    leading: &BigInt,
    conjugate_moduli: &[CertReal],
) -> Result<HeightValue, CertRealError> {
    assert!(!conjugate_moduli.is_empty(), "need at least one conjugate");
    assert!(leading >= &BigInt::one(), "leading coefficient must be positive");
    let d = conjugate_moduli.len() as i64;
    let prec = conjugate_moduli.iter().map(|c| c.precision()).max().unwrap();
    let mut acc = CertReal::from_bigint(leading, prec).log()?;
    for modulus in conjugate_moduli {
        let lo = modulus.lo();
        let hi = modulus.hi();
        if hi.cmp(&Dyadic::one()) != Ordering::Greater {
            continue; // max(|c|, 1) = 1 contributes log 1 = 0
        }
        let clamped_lo = lo.max(&Dyadic::one());
        let clamped = CertReal::from_interval(&clamped_lo, &hi, prec);
        acc = acc.add(&clamped.log()?);
    }
    let v = acc.mul(&CertReal::from_rational(
        &BigRational::new(BigInt::one(), BigInt::from(d)),
        prec,
    ));
    Ok(HeightValue { value: v })
}

/// Upper bound `log(31)/3 + 4k log(phi) + k log(k+1)` on the height of
/// `c_alpha^{-1} g_k(gamma)`, with the certified domination check against
/// `5.2 k log k`.
pub fn height_eta1_bound(k: u32, prec: u32) -> Result<CertReal, AlgebraicError> {
    assert!(k >= 2);
    let work = prec + 32;
    let log31 = CertReal::from_i64(31, work).log()?;
    let third = CertReal::from_rational(&BigRational::new(BigInt::one(), BigInt::from(3)), work);
    let phi = phi_ball(work)?;
    let log_phi = phi.log()?;
    let kk = BigInt::from(k);
    let log_kp1 = CertReal::from_bigint(&(&kk + 1), work).log()?;
    let bound = log31
        .mul(&third)
        .add(&log_phi.mul_int(&(&kk * 4)))
        .add(&log_kp1.mul_int(&kk));
    // majorant used downstream: 5.2 k log k
    let log_k = CertReal::from_bigint(&kk, work).log()?;
    let majorant = log_k
        .mul_int(&kk)
        .mul(&CertReal::from_rational(&BigRational::new(BigInt::from(26), BigInt::from(5)), work));
    if !bound.certainly_lt(&majorant) {
        return Err(AlgebraicError::BoundViolated(format!(
            "height bound for k = {k} is not certifiably below 5.2 k log k"
        )));
    }
    Ok(bound.with_precision(prec))
}

/// Certified check of the dominant-root approximation quality for large k:
/// with `xi` defined by `g_k(gamma) gamma^n = phi^(2n) / (phi + 2) (1 + xi)`,
/// verify `|xi| < 4 / phi^(k/2)` (valid for k >= 30 and n < phi^(k/2)).
pub fn xi_within_bound(k: u32, n: i64, prec: u32) -> Result<bool, AlgebraicError> {
    assert!(k >= 30);
    let work = prec + 64;
    let target = BigRational::new(BigInt::one(), BigInt::one() << (work as u64));
    let gamma = gamma_of(k, &target)?;
    let g = g_k_at(k, &gamma)?;
    let phi = phi_ball(work)?;
    let phi_plus_2 = phi.add(&CertReal::from_i64(2, work));
    let lead = phi.powi(2 * n)?.div(&phi_plus_2)?;
    let xi = g.mul(&gamma.powi(n)?).div(&lead)?.sub(&CertReal::one(work));
    // 4 / phi^(k/2) with phi^(k/2) = sqrt(phi^k)
    let bound = CertReal::from_i64(4, work).div(&phi.powi(k as i64)?.sqrt()?)?;
    Ok(xi.abs().certainly_lt(&bound))
}

/// Shared per-k context cache so the paired tau/mu providers evaluate the
/// roots once per requested precision instead of twice.
fn context_cache(k: u32) -> impl Fn(u32) -> Result<AlgebraicContext, CertRealError> + Send + Sync {
    let cache: std::sync::Mutex<std::collections::HashMap<u32, AlgebraicContext>> =
        std::sync::Mutex::new(std::collections::HashMap::new());
    move |prec: u32| {
        if let Some(ctx) = cache.lock().unwrap().get(&prec) {
            return Ok(ctx.clone());
        }
        let ctx = AlgebraicContext::new(k, prec + 32).map_err(flatten_algebraic)?;
        cache.lock().unwrap().insert(prec, ctx.clone());
        Ok(ctx)
    }
}

/// The paired reduction inputs for one k:
/// `tau(k) = log(gamma) / log(alpha)` and
/// `mu(k) = log(c_alpha^{-1} g_k(gamma)) / log(alpha) - 2`.
pub fn small_k_pair(k: u32) -> (LazyReal, LazyReal) {
    let ctx_of = std::sync::Arc::new(context_cache(k));
    let tau = {
        let ctx_of = ctx_of.clone();
        LazyReal::new(move |prec| {
            let ctx = ctx_of(prec)?;
            Ok(ctx.gamma().log()?.div(&ctx.alpha().log()?)?.with_precision(prec))
        })
    };
    let mu = LazyReal::new(move |prec| {
        let ctx = ctx_of(prec)?;
        let arg = ctx.g_k_gamma().div(ctx.c_alpha())?;
        let two = CertReal::from_i64(2, prec + 32);
        Ok(arg.log()?.div(&ctx.alpha().log()?)?.sub(&two).with_precision(prec))
    });
    (tau, mu)
}

/// `tau(k) = log(gamma) / log(alpha)` as a reusable precision-driven value.
pub fn small_k_tau(k: u32) -> LazyReal {
    small_k_pair(k).0
}

/// `mu(k) = log(c_alpha^{-1} g_k(gamma)) / log(alpha) - 2`.
pub fn small_k_mu(k: u32) -> LazyReal {
    small_k_pair(k).1
}

/// `tau = log(alpha) / log(phi)` for the k-independent reduction.
pub fn large_k_tau() -> LazyReal {
    LazyReal::new(move |prec| {
        let work = prec + 32;
        let target = BigRational::new(BigInt::one(), BigInt::one() << (work as u64));
        let (alpha, _) = alpha_root(&target)?;
        let phi = phi_ball(work)?;
        Ok(alpha.log()?.div(&phi.log()?)?.with_precision(prec))
    })
}

/// `mu = log(alpha^2 c_alpha (phi + 2)) / log(phi)` for the k-independent
/// reduction.
pub fn large_k_mu() -> LazyReal {
    LazyReal::new(move |prec| {
        let work = prec + 32;
        let target = BigRational::new(BigInt::one(), BigInt::one() << (work as u64));
        let (alpha, _) = alpha_root(&target)?;
        let phi = phi_ball(work)?;
        let c_a = c_alpha_of(&alpha)?;
        let arg = alpha.powi(2)?.mul(&c_a).mul(&phi.add(&CertReal::from_i64(2, work)));
        Ok(arg.log()?.div(&phi.log()?)?.with_precision(prec))
    })
}

/// The golden ratio as a lazy constant (used as the reduction base C).
pub fn phi_lazy() -> LazyReal {
    LazyReal::new(|prec| phi_ball(prec))
}

/// The Narayana dominant root as a lazy constant.
pub fn alpha_lazy() -> LazyReal {
    LazyReal::new(|prec| {
        let target = BigRational::new(BigInt::one(), BigInt::one() << (prec as u64 + 16));
        Ok(alpha_root(&target)?.0.with_precision(prec))
    })
}

fn flatten_algebraic(e: AlgebraicError) -> CertRealError {
    match e {
        AlgebraicError::DenominatorIndeterminate => CertRealError::DivisorContainsZero,
        AlgebraicError::BoundViolated(msg) => CertRealError::InvalidInput(msg),
        AlgebraicError::Real(r) => r,
    }
}

// re-exported here so callers evaluate characteristic polynomials without
// digging into certreal
pub use crate::certreal::eval_poly;
