//! Exact big-integer generation of k-generalized Pell, Narayana and
//! Fibonacci numbers, with dominant-root (Binet form) cross-checks.
//!
//! The k-Pell sequence of order `k >= 2` starts with `k-1` zeros followed by
//! one, indexed from `n = -(k-2)`, and afterwards satisfies
//! `P_n = 2 P_{n-1} + P_{n-2} + ... + P_{n-k}`. The Narayana sequence starts
//! `1, 1, 1` with `N_{m+3} = N_{m+2} + N_m`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::algebraic::AlgebraicContext;
use crate::certreal::{CertReal, CertRealError, Dyadic};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SequenceError {
    #[error("index {n} is below the initial window of the order-{k} Pell sequence")]
    IndexBelowInitialWindow { k: u32, n: i64 },
    #[error("identity window for k = {k} ends at n = {max}, got {got}")]
    RangeExceedsIdentityWindow { k: u32, max: i64, got: i64 },
    #[error("rounding of the dominant-root term is ambiguous at this precision")]
    RoundingAmbiguous,
    #[error(transparent)]
    Real(#[from] CertRealError),
}

/// Cached k-generalized Pell sequence with random access.
///
/// The cache is single-writer: share across threads only behind external
/// synchronization, or give each worker its own instance.
#[derive(Clone, Debug)]
pub struct KPellSequence {
    k: u32,
    /// terms[i] = P_{i - (k-2)}
    terms: Vec<BigInt>,
    /// running sum of the last k cached terms
    window_sum: BigInt,
}

impl KPellSequence {
    pub fn new(k: u32) -> Self {
        assert!(k >= 2, "order must be at least 2");
        // initial window P_{-(k-2)} = ... = P_0 = 0, P_1 = 1
        let mut terms = vec![BigInt::zero(); (k - 1) as usize];
        terms.push(BigInt::one());
        let window_sum = BigInt::one();
        KPellSequence { k, terms, window_sum }
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    fn offset(&self, n: i64) -> Result<usize, SequenceError> {
        let min = -((self.k as i64) - 2);
        if n < min {
            return Err(SequenceError::IndexBelowInitialWindow { k: self.k, n });
        }
        Ok((n - min) as usize)
    }

    /// The n-th term, extending the cache as needed.
    pub fn term(&mut self, n: i64) -> Result<BigInt, SequenceError> {
        let idx = self.offset(n)?;
        while self.terms.len() <= idx {
            self.extend_one();
        }
        Ok(self.terms[idx].clone())
    }

    fn extend_one(&mut self) {
        // P_next = P_last + (P_last + ... + P_{last-k+1}) = P_last + window_sum
        let last = self.terms.last().expect("cache never empty");
        let next = last + &self.window_sum;
        let len = self.terms.len();
        self.window_sum += &next;
        if len >= self.k as usize {
            self.window_sum -= &self.terms[len - self.k as usize];
        }
        self.terms.push(next);
    }
}

/// Streaming k-Pell terms from `n = 1` upward with O(k) memory.
#[derive(Clone, Debug)]
pub struct KPellIter {
    k: usize,
    window: std::collections::VecDeque<BigInt>,
    window_sum: BigInt,
    next_n: i64,
}

impl KPellIter {
    pub fn new(k: u32) -> Self {
        assert!(k >= 2);
        let k = k as usize;
        let mut window = std::collections::VecDeque::with_capacity(k);
        for _ in 0..k - 1 {
            window.push_back(BigInt::zero());
        }
        window.push_back(BigInt::one());
        KPellIter { k, window, window_sum: BigInt::one(), next_n: 1 }
    }
}

impl Iterator for KPellIter {
    type Item = (i64, BigInt);

    fn next(&mut self) -> Option<(i64, BigInt)> {
        let n = self.next_n;
        let current = self.window.back().expect("window never empty").clone();
        // advance the recurrence window
        let next = &current + &self.window_sum;
        self.window_sum += &next;
        if self.window.len() == self.k {
            let dropped = self.window.pop_front().expect("window full");
            self.window_sum -= dropped;
        }
        self.window.push_back(next);
        self.next_n += 1;
        Some((n, current))
    }
}

/// Cached Narayana's cows sequence (1, 1, 1, 2, 3, 4, 6, 9, ...).
#[derive(Clone, Debug)]
pub struct NarayanaSequence {
    terms: Vec<BigInt>,
}

impl NarayanaSequence {
    pub fn new() -> Self {
        NarayanaSequence { terms: vec![BigInt::one(), BigInt::one(), BigInt::one()] }
    }

    pub fn term(&mut self, m: u64) -> BigInt {
        let m = m as usize;
        while self.terms.len() <= m {
            let len = self.terms.len();
            let next = &self.terms[len - 1] + &self.terms[len - 3];
            self.terms.push(next);
        }
        self.terms[m].clone()
    }

    /// Indices m with N_m equal to `value`, using strict growth for m >= 2
    /// as the stopping rule; the result is complete over all m.
    pub fn indices_of_value(&mut self, value: &BigInt) -> Vec<u64> {
        if !value.is_positive() {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut m = 0u64;
        loop {
            let t = self.term(m);
            if &t == value {
                out.push(m);
            }
            // strictly increasing from m = 2 onwards
            if m >= 2 && t > *value {
                break;
            }
            m += 1;
        }
        out
    }
}

impl Default for NarayanaSequence {
    fn default() -> Self {
        Self::new()
    }
}

/// The n-th k-Pell number.
pub fn kpell(k: u32, n: i64) -> Result<BigInt, SequenceError> {
    KPellSequence::new(k).term(n)
}

/// The m-th Narayana number.
pub fn narayana(m: u64) -> BigInt {
    NarayanaSequence::new().term(m)
}

/// The n-th Fibonacci number (F_0 = 0, F_1 = 1).
pub fn fibonacci(n: u64) -> BigInt {
    let mut a = BigInt::zero();
    let mut b = BigInt::one();
    for _ in 0..n {
        let next = &a + &b;
        a = b;
        b = next;
    }
    a
}

/// Check `P_n^{(k)} = F_{2n-1}` for all `1 <= n <= n_hi`; the identity is
/// only valid while the recurrence window still covers the whole history,
/// i.e. for `n <= k + 1`.
pub fn check_fib_identity(k: u32, n_hi: i64) -> Result<bool, SequenceError> {
    let max = k as i64 + 1;
    if n_hi > max {
        return Err(SequenceError::RangeExceedsIdentityWindow { k, max, got: n_hi });
    }
    let mut seq = KPellSequence::new(k);
    for n in 1..=n_hi {
        if seq.term(n)? != fibonacci((2 * n - 1) as u64) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Enclosure of `|P_n^{(k)} - g_k(gamma) gamma^n|`, the residual of the
/// dominant-root approximation. Its upper edge stays below 1/2.
pub fn kpell_binet_error(
    k: u32,
    n: i64,
    ctx: &AlgebraicContext,
) -> Result<CertReal, SequenceError> {
    assert!(n >= 1, "residual evaluated for n >= 1");
    let p = kpell(k, n)?;
    let approx = ctx.g_k_gamma().mul(&ctx.gamma().powi(n)?);
    let exact = CertReal::from_bigint(&p, approx.precision());
    Ok(exact.sub(&approx).abs())
}

/// Narayana number via the dominant root: the nearest integer to
/// `C_alpha * alpha^(m+3)`, valid for `m >= 1` (the conjugate-pair residual
/// stays below 1/2 there). Must agree with the exact recurrence; rounding
/// ambiguity signals insufficient precision.
pub fn narayana_binet(m: u64, ctx: &AlgebraicContext) -> Result<BigInt, SequenceError> {
    assert!(m >= 1, "dominant-root rounding starts at m = 1");
    let value = ctx.c_alpha().mul(&ctx.alpha().powi(m as i64 + 3)?);
    // the ball must fit strictly between two half-integers
    match value.dist_to_nearest_int() {
        Ok((_, z)) => Ok(z),
        Err(CertRealError::AmbiguousNearestInteger) => Err(SequenceError::RoundingAmbiguous),
        Err(e) => Err(e.into()),
    }
}

/// Certified check of the growth sandwich `gamma^(n-2) <= P_n <= gamma^(n-1)`.
pub fn kpell_growth_sandwich(
    seq: &mut KPellSequence,
    n: i64,
    ctx: &AlgebraicContext,
) -> Result<bool, SequenceError> {
    let p = CertReal::from_bigint(&seq.term(n)?, ctx.gamma().precision());
    let lower = ctx.gamma().powi(n - 2)?;
    let upper = ctx.gamma().powi(n - 1)?;
    Ok(lower.certainly_le(&p) && p.certainly_le(&upper))
}

/// Certified check of `alpha^(m-2) <= N_m <= alpha^(m-1)` (m >= 1).
pub fn narayana_growth_sandwich(
    seq: &mut NarayanaSequence,
    m: u64,
    ctx: &AlgebraicContext,
) -> Result<bool, SequenceError> {
    let v = CertReal::from_bigint(&seq.term(m), ctx.alpha().precision());
    let lower = ctx.alpha().powi(m as i64 - 2)?;
    let upper = ctx.alpha().powi(m as i64 - 1)?;
    Ok(lower.certainly_le(&v) && v.certainly_le(&upper))
}

/// Upper bound for half the unit interval, used by residual checks.
pub fn one_half() -> Dyadic {
    Dyadic::pow2(-1)
}
