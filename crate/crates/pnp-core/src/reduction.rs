//! The reduction engine and the two reduction campaigns.
//!
//! Given an irrational coefficient tau, a shift mu, constants A > 0, C > 1
//! and a multiplier bound M, the engine walks the convergents p/q of tau with
//! q > 6M, looking for one where `epsilon = ||mu q|| - M ||tau q||` is
//! certifiably positive. Such a convergent proves that the inequality
//! `0 < |r tau - s + mu| < A C^{-t}` has no solution with `r <= M` and
//! `t >= log(A q / epsilon) / log C`.
//!
//! Everything epsilon-related is decided on ball enclosures only: an
//! indeterminate sign escalates precision, it is never guessed.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed};
use thiserror::Error;

use crate::algebraic::{large_k_mu, large_k_tau, phi_lazy, small_k_pair, AlgebraicError};
use crate::certreal::{CertReal, CertRealError, Dyadic, LazyReal, PrecisionPolicy};
use crate::contfrac::{CfError, CfExpander};
use crate::linforms::{lemma31_bounds, strict_int_below, LinformError};

/// Convergents examined per precision stage before concluding failure.
const ATTEMPT_BUDGET: u32 = 200;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("no convergent with q > 6M yielded a certifiably positive epsilon")]
    EpsilonNeverPositive,
    #[error("reduction chain did not close: final k-bound {final_bound} is not below 361")]
    ChainDidNotClose { final_bound: BigInt },
    #[error("invalid reduction instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error(transparent)]
    Real(#[from] CertRealError),
    #[error(transparent)]
    Linform(#[from] LinformError),
    #[error(transparent)]
    Algebraic(#[from] AlgebraicError),
}

/// Inputs of one reduction: the linear form `r tau - s + mu` bounded by
/// `A C^{-t}`, with the multiplier `r` capped by `m_bound`.
#[derive(Clone, Debug)]
pub struct ReductionInstance {
    pub tau: LazyReal,
    pub mu: LazyReal,
    pub a_const: BigRational,
    pub c_base: LazyReal,
    pub m_bound: BigInt,
}

/// Result of a successful reduction.
#[derive(Clone, Debug)]
pub struct ReductionOutcome {
    /// Chosen convergent denominator, always above 6M.
    pub q: BigInt,
    /// 0-based index of the convergent in our expansion.
    pub convergent_index: usize,
    /// Certified positive `||mu q|| - M ||tau q||`.
    pub epsilon: CertReal,
    /// Enclosure of `log(A q / epsilon) / log C`.
    pub t_bound: CertReal,
    /// Convergents examined, including the successful one.
    pub attempts: u32,
}

impl ReductionOutcome {
    /// Sound integer bound: the greatest integer below the t-bound's upper
    /// edge. Any integer t of a solution satisfies `t < t_bound`.
    pub fn t_bound_int(&self) -> BigInt {
        strict_int_below_dyadic(&self.t_bound.hi())
    }
}

/// Greatest integer strictly below an exact dyadic.
pub fn strict_int_below_dyadic(d: &Dyadic) -> BigInt {
    d.ceil_int() - 1
}

enum EpsilonVerdict {
    Positive(CertReal),
    NonPositive,
    NeedsPrecision,
}

fn epsilon_at(
    tau: &CertReal,
    mu: &CertReal,
    q: &BigInt,
    m_bound: &BigInt,
) -> Result<EpsilonVerdict, CertRealError> {
    let mu_q = mu.mul_int(q);
    let tau_q = tau.mul_int(q);
    let d_mu = match mu_q.dist_to_nearest_int() {
        Ok((d, _)) => d,
        Err(CertRealError::AmbiguousNearestInteger) => return Ok(EpsilonVerdict::NeedsPrecision),
        Err(e) => return Err(e),
    };
    let d_tau = match tau_q.dist_to_nearest_int() {
        Ok((d, _)) => d,
        Err(CertRealError::AmbiguousNearestInteger) => return Ok(EpsilonVerdict::NeedsPrecision),
        Err(e) => return Err(e),
    };
    let eps = d_mu.sub(&d_tau.mul_int(m_bound));
    match eps.sign_of() {
        crate::certreal::Sign::Positive => Ok(EpsilonVerdict::Positive(eps)),
        crate::certreal::Sign::Negative | crate::certreal::Sign::ZeroCandidate => {
            Ok(EpsilonVerdict::NonPositive)
        }
        crate::certreal::Sign::Indeterminate => Ok(EpsilonVerdict::NeedsPrecision),
    }
}

/// Run the reduction on one instance.
pub fn dujella_petho(
    inst: &ReductionInstance,
    policy: PrecisionPolicy,
) -> Result<ReductionOutcome, ReductionError> {
    if !inst.a_const.is_positive() {
        return Err(ReductionError::InvalidInstance("A must be positive".into()));
    }
    if inst.m_bound < BigInt::one() {
        return Err(ReductionError::InvalidInstance("M must be at least 1".into()));
    }
    let six_m = &inst.m_bound * BigInt::from(6);
    let mut expander = CfExpander::new(inst.tau.clone(), policy);
    let first_idx = expander.ensure_denominator_exceeds(&six_m)?;

    let mut prec = policy.start.max(expander.source_precision());
    let mut cached: Option<(u32, CertReal, CertReal)> = None;
    let mut attempts = 0u32;
    let mut doublings_after_budget = 0u32;
    let mut idx = first_idx;
    loop {
        expander.ensure_len(idx + 1)?;
        let q = expander.convergent(idx).expect("expanded above").1.clone();
        // evaluate epsilon for this convergent, escalating as needed
        let eps = loop {
            let (tau_ball, mu_ball) = match &cached {
                Some((p, t, m)) if *p == prec => (t.clone(), m.clone()),
                _ => {
                    let t = inst.tau.eval(prec)?;
                    let m = inst.mu.eval(prec)?;
                    cached = Some((prec, t.clone(), m.clone()));
                    (t, m)
                }
            };
            match epsilon_at(&tau_ball, &mu_ball, &q, &inst.m_bound)? {
                EpsilonVerdict::Positive(e) => break Some(e),
                EpsilonVerdict::NonPositive => break None,
                EpsilonVerdict::NeedsPrecision => prec = policy.escalate(prec)?,
            }
        };
        attempts += 1;
        if let Some(eps) = eps {
            let a_ball = CertReal::from_rational(&inst.a_const, prec);
            let c_ball = inst.c_base.eval(prec)?;
            if c_ball.cmp_rational(&BigRational::one()) != Some(std::cmp::Ordering::Greater) {
                return Err(ReductionError::InvalidInstance(
                    "C must be certifiably above 1".into(),
                ));
            }
            let ratio = a_ball.mul_int(&q).div(&eps)?;
            let t_bound = ratio.log()?.div(&c_ball.log()?)?;
            return Ok(ReductionOutcome {
                q,
                convergent_index: idx,
                epsilon: eps,
                t_bound,
                attempts,
            });
        }
        if attempts >= ATTEMPT_BUDGET * (doublings_after_budget + 1) {
            // the lemma permits any convergent above 6M; after the budget,
            // allow one precision doubling before giving up
            if doublings_after_budget >= 1 {
                return Err(ReductionError::EpsilonNeverPositive);
            }
            doublings_after_budget += 1;
            prec = policy.escalate(prec)?;
        }
        idx += 1;
    }
}

/// One entry of the small-k campaign.
#[derive(Clone, Debug)]
pub struct SmallKReduction {
    pub k: u32,
    /// Multiplier bound `M_k = floor(5.28e16 k^5 log^3 k)` fed to the lemma.
    pub m_k: BigInt,
    pub outcome: ReductionOutcome,
    /// Sound integer bound on m for this k.
    pub m_bound: BigInt,
}

/// `A = 12.1` for the per-k reduction.
pub fn small_k_a_const() -> BigRational {
    BigRational::new(BigInt::from(121), BigInt::from(10))
}

/// Reduce one k in [2, 360]: tau = log(gamma)/log(alpha),
/// mu = log(c_alpha^{-1} g_k(gamma))/log(alpha) - 2, A = 12.1, C = alpha,
/// M = the Lemma-style n-bound for this k.
pub fn small_k_reduce(k: u32, policy: PrecisionPolicy) -> Result<SmallKReduction, ReductionError> {
    assert!((2..=360).contains(&k), "small-k campaign covers k in [2, 360]");
    let (m_k, _) = lemma31_bounds(k, 192)?;
    let (tau, mu) = small_k_pair(k);
    let inst = ReductionInstance {
        tau,
        mu,
        a_const: small_k_a_const(),
        c_base: crate::algebraic::alpha_lazy(),
        m_bound: m_k.clone(),
    };
    let outcome = dujella_petho(&inst, policy)?;
    let m_bound = outcome.t_bound_int();
    Ok(SmallKReduction { k, m_k, outcome, m_bound })
}

/// One stage of the large-k chain.
#[derive(Clone, Debug)]
pub struct ChainStage {
    /// Multiplier bound used by this stage.
    pub m_used: BigInt,
    pub outcome: ReductionOutcome,
    /// `k < 2 t` turned into a sound integer bound.
    pub k_bound: BigInt,
}

/// `A = 16.84` for the k-independent reduction.
pub fn large_k_a_const() -> BigRational {
    BigRational::new(BigInt::from(421), BigInt::from(25))
}

/// Initial multiplier bound of the chain (the recorded bound on m).
pub fn large_k_m1() -> BigInt {
    BigInt::from(795) * BigInt::from(10u8).pow(110u32)
}

/// Next-stage multiplier bound from a k-bound: the m-range compatible with
/// `n <= n_max(k)` and the n-m sandwich, plus one unit of slack so the
/// multiplier stays covered under either dominant-term normalization of the
/// Narayana Binet form.
pub fn next_chain_m(k_bound: &BigInt) -> Result<BigInt, ReductionError> {
    let k_u32: u32 = k_bound
        .to_string()
        .parse()
        .map_err(|_| ReductionError::ChainDidNotClose { final_bound: k_bound.clone() })?;
    let (n_max, _) = lemma31_bounds(k_u32, 192)?;
    // m < 2.52 n_max - 0.52 = (63 n_max - 13)/25
    let m_strict = strict_int_below(&BigRational::new(
        BigInt::from(63) * &n_max - BigInt::from(13),
        BigInt::from(25),
    ));
    Ok(m_strict + BigInt::one())
}

/// The three-stage k-independent reduction chain: tau = log(alpha)/log(phi),
/// mu = log(alpha^2 c_alpha (phi+2))/log(phi), A = 16.84, C = phi. Each
/// stage's t-bound caps k/2; the final bound must fall below 361.
pub fn large_k_chain(policy: PrecisionPolicy) -> Result<Vec<ChainStage>, ReductionError> {
    let tau = large_k_tau();
    let mu = large_k_mu();
    let mut m_current = large_k_m1();
    let mut stages = Vec::with_capacity(3);
    for _stage in 0..3 {
        let inst = ReductionInstance {
            tau: tau.clone(),
            mu: mu.clone(),
            a_const: large_k_a_const(),
            c_base: phi_lazy(),
            m_bound: m_current.clone(),
        };
        let outcome = dujella_petho(&inst, policy)?;
        // k/2 < t  =>  k < 2t
        let k_bound = strict_int_below_dyadic(&outcome.t_bound.hi().mul_pow2(1));
        let stage = ChainStage { m_used: m_current.clone(), outcome, k_bound };
        let last = stages.len() == 2;
        if !last {
            m_current = next_chain_m(&stage.k_bound)?;
        }
        stages.push(stage);
    }
    let final_bound = stages.last().expect("three stages").k_bound.clone();
    if final_bound >= BigInt::from(361) {
        return Err(ReductionError::ChainDidNotClose { final_bound });
    }
    Ok(stages)
}
