//! Certified continued-fraction expansion of irrational values and exact
//! convergent computation.
//!
//! A partial quotient is accepted only when the ball enclosure of the
//! current complete quotient certifies its floor: the enclosure must not
//! straddle an integer, and the fractional part must stay certifiably
//! positive so the next reciprocal is well defined. Anything else escalates
//! the source precision and restarts the expansion from scratch; certified
//! quotients are canonical, so the replayed prefix is bit-identical.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::certreal::{CertReal, CertRealError, LazyReal, PrecisionPolicy};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CfError {
    #[error("source enclosure too wide to certify a partial quotient")]
    QuotientUnstable,
    #[error("convergent index {index} outside the expanded range {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Real(#[from] CertRealError),
}

/// A certified continued-fraction prefix with its exact convergents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    quotients: Vec<BigInt>,
    convergents: Vec<(BigInt, BigInt)>,
}

impl ContinuedFraction {
    pub fn quotients(&self) -> &[BigInt] {
        &self.quotients
    }

    pub fn convergents(&self) -> &[(BigInt, BigInt)] {
        &self.convergents
    }

    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    /// Exact reduced convergent p_i / q_i (0-based, p_0/q_0 = a_0/1).
    pub fn convergent_at(&self, index: usize) -> Result<(BigInt, BigInt), CfError> {
        self.convergents
            .get(index)
            .cloned()
            .ok_or(CfError::IndexOutOfRange { index, len: self.convergents.len() })
    }

    /// Smallest index whose denominator exceeds the threshold, if expanded.
    pub fn first_index_with_denominator_above(&self, threshold: &BigInt) -> Option<usize> {
        self.convergents.iter().position(|(_, q)| q > threshold)
    }
}

struct ExpandState {
    /// ball of the current complete quotient
    t: CertReal,
    quotients: Vec<BigInt>,
    convergents: Vec<(BigInt, BigInt)>,
}

/// Incremental certified expander over a precision-driven source value.
pub struct CfExpander {
    source: LazyReal,
    policy: PrecisionPolicy,
    prec: u32,
    state: Option<ExpandState>,
}

impl CfExpander {
    pub fn new(source: LazyReal, policy: PrecisionPolicy) -> Self {
        CfExpander { source, policy, prec: policy.start, state: None }
    }

    /// Precision of the source value currently backing the expansion.
    pub fn source_precision(&self) -> u32 {
        self.prec
    }

    pub fn len(&self) -> usize {
        self.state.as_ref().map_or(0, |s| s.quotients.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> ContinuedFraction {
        match &self.state {
            Some(s) => ContinuedFraction {
                quotients: s.quotients.clone(),
                convergents: s.convergents.clone(),
            },
            None => ContinuedFraction { quotients: Vec::new(), convergents: Vec::new() },
        }
    }

    fn restart(&mut self) -> Result<(), CfError> {
        let t = self.source.eval(self.prec)?;
        self.state = Some(ExpandState { t, quotients: Vec::new(), convergents: Vec::new() });
        Ok(())
    }

    fn escalate(&mut self) -> Result<(), CfError> {
        self.prec = self.policy.escalate(self.prec)?;
        self.restart()
    }

    /// Certify one more partial quotient at the current precision.
    fn step(state: &mut ExpandState) -> Result<(), CfError> {
        let a = match state.t.certified_floor() {
            Ok(a) => a,
            Err(CertRealError::AmbiguousFloor) => return Err(CfError::QuotientUnstable),
            Err(e) => return Err(e.into()),
        };
        let frac = state.t.sub(&CertReal::from_bigint(&a, state.t.precision()));
        if !frac.lo().is_positive() {
            // the fractional part cannot be certified away from zero
            return Err(CfError::QuotientUnstable);
        }
        debug_assert!(state.quotients.is_empty() || a >= BigInt::one());
        let (pm1, qm1, pm2, qm2) = match state.convergents.len() {
            0 => (BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()),
            1 => {
                let (p0, q0) = state.convergents[0].clone();
                (p0, q0, BigInt::one(), BigInt::zero())
            }
            n => {
                let (p1, q1) = state.convergents[n - 1].clone();
                let (p2, q2) = state.convergents[n - 2].clone();
                (p1, q1, p2, q2)
            }
        };
        let p = &a * &pm1 + &pm2;
        let q = &a * &qm1 + &qm2;
        state.quotients.push(a);
        state.convergents.push((p, q));
        state.t = frac.recip()?;
        Ok(())
    }

    /// Extend until `predicate` of the expansion holds, restarting at higher
    /// precision whenever a quotient cannot be certified.
    fn expand_while(
        &mut self,
        mut needs_more: impl FnMut(&ExpandState) -> bool,
    ) -> Result<(), CfError> {
        if self.state.is_none() {
            self.restart()?;
        }
        loop {
            let state = self.state.as_mut().expect("state initialized above");
            if !needs_more(state) {
                return Ok(());
            }
            match Self::step(state) {
                Ok(()) => {}
                Err(CfError::QuotientUnstable) => self.escalate()?,
                Err(e) => return Err(e),
            }
        }
    }

    /// Make sure at least `n` quotients are certified.
    pub fn ensure_len(&mut self, n: usize) -> Result<(), CfError> {
        self.expand_while(|s| s.quotients.len() < n)
    }

    /// Expand until some convergent denominator exceeds `threshold`; returns
    /// the smallest such index.
    pub fn ensure_denominator_exceeds(&mut self, threshold: &BigInt) -> Result<usize, CfError> {
        self.expand_while(|s| match s.convergents.last() {
            Some((_, q)) => q <= threshold,
            None => true,
        })?;
        let cf = self.state.as_ref().expect("expanded");
        Ok(cf
            .convergents
            .iter()
            .position(|(_, q)| q > threshold)
            .expect("expansion stopped after exceeding the threshold"))
    }

    pub fn quotient(&self, i: usize) -> Option<&BigInt> {
        self.state.as_ref().and_then(|s| s.quotients.get(i))
    }

    pub fn convergent(&self, i: usize) -> Option<&(BigInt, BigInt)> {
        self.state.as_ref().and_then(|s| s.convergents.get(i))
    }
}

/// Expand `x` until the last convergent denominator exceeds `min_q`.
pub fn expand_until(
    x: &LazyReal,
    min_q: &BigInt,
    policy: PrecisionPolicy,
) -> Result<ContinuedFraction, CfError> {
    let mut ex = CfExpander::new(x.clone(), policy);
    ex.ensure_denominator_exceeds(min_q)?;
    Ok(ex.snapshot())
}

/// Expand `x` to a fixed number of certified partial quotients.
pub fn expand_quotients(
    x: &LazyReal,
    count: usize,
    policy: PrecisionPolicy,
) -> Result<ContinuedFraction, CfError> {
    let mut ex = CfExpander::new(x.clone(), policy);
    ex.ensure_len(count)?;
    Ok(ex.snapshot())
}

/// Smallest-index convergent with denominator above `threshold`, expanding
/// on demand: returns `(index, denominator)` plus the expansion.
pub fn first_denominator_exceeding(
    x: &LazyReal,
    threshold: &BigInt,
    policy: PrecisionPolicy,
) -> Result<(usize, BigInt, ContinuedFraction), CfError> {
    let mut ex = CfExpander::new(x.clone(), policy);
    let idx = ex.ensure_denominator_exceeds(threshold)?;
    let cf = ex.snapshot();
    let q = cf.convergents()[idx].1.clone();
    Ok((idx, q, cf))
}
