//! Exhaustive intersection of k-Pell values against Narayana values inside
//! proved boxes, plus an independent two-pointer merge used as an oracle.

use std::collections::HashMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::linforms::nm_sandwich_holds;
use crate::sequences::{fibonacci, KPellIter, NarayanaSequence};

/// One common value of the two sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub n: i64,
    pub k: u32,
    pub m: i64,
    /// decimal digits of the shared value
    pub value: String,
    pub kind: SolutionKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionKind {
    /// One of the families that hold for whole ranges of k.
    TrivialFamily,
    /// The sporadic coincidence.
    Exceptional,
}

/// Families holding for all admissible k: (n, m) in {(1,0), (1,1), (1,2),
/// (2,3)}, and (4, 8) once the order is at least 3.
pub fn classify(n: i64, k: u32, m: i64) -> SolutionKind {
    match (n, m) {
        (1, 0) | (1, 1) | (1, 2) | (2, 3) => SolutionKind::TrivialFamily,
        (4, 8) if k >= 3 => SolutionKind::TrivialFamily,
        _ => SolutionKind::Exceptional,
    }
}

/// Search box with optional regime filters.
#[derive(Clone, Debug)]
pub struct BoxQuery {
    pub k_lo: u32,
    pub k_hi: u32,
    pub n_lo: i64,
    pub n_hi: i64,
    pub m_lo: i64,
    pub m_hi: i64,
    /// Apply the deep-regime filters: `n >= k + 2`, `m < n / 0.39`, and the
    /// n-m growth sandwich.
    pub filters: bool,
}

impl BoxQuery {
    fn admits(&self, n: i64, k: u32, m: i64) -> bool {
        if m < self.m_lo || m > self.m_hi {
            return false;
        }
        if !self.filters {
            return true;
        }
        // n >= k+2 (the regime where both growth laws apply),
        // m < n/0.39 <=> 39 m < 100 n, and the sandwich
        n >= k as i64 + 2 && 39 * m < 100 * n && nm_sandwich_holds(n, m)
    }
}

/// All (n, k, m) in the box with equal sequence values, by streaming k-Pell
/// terms against a Narayana value table. Deterministic (k, n, m) order.
pub fn intersect_box(query: &BoxQuery) -> Vec<SolutionRecord> {
    assert!(query.k_lo >= 2 && query.k_lo <= query.k_hi);
    assert!(query.n_lo >= 1 && query.m_lo >= 0);
    let mut narayana = NarayanaSequence::new();
    let mut by_value: HashMap<BigInt, Vec<i64>> = HashMap::new();
    for m in query.m_lo..=query.m_hi {
        by_value.entry(narayana.term(m as u64)).or_default().push(m);
    }
    let mut out = Vec::new();
    for k in query.k_lo..=query.k_hi {
        for (n, value) in KPellIter::new(k) {
            if n > query.n_hi {
                break;
            }
            if n < query.n_lo {
                continue;
            }
            if let Some(ms) = by_value.get(&value) {
                for &m in ms {
                    if query.admits(n, k, m) {
                        out.push(SolutionRecord {
                            n,
                            k,
                            m,
                            value: value.to_string(),
                            kind: classify(n, k, m),
                        });
                    }
                }
            }
        }
    }
    out.sort_by_key(|r| (r.k, r.n, r.m));
    out
}

/// Independent oracle for a single order: advance both strictly monotone
/// streams with two pointers and report every value collision. Result set
/// matches the unfiltered box restricted to this k.
pub fn intersect_merge(k: u32, n_max: i64, m_max: i64) -> Vec<SolutionRecord> {
    assert!(n_max >= 1 && m_max >= 0);
    let mut out = Vec::new();
    let mut narayana = NarayanaSequence::new();
    let mut m = 0i64;
    let mut pell = KPellIter::new(k);
    let mut current = pell.next().expect("stream is infinite");
    loop {
        if current.0 > n_max {
            break;
        }
        if m > m_max {
            break;
        }
        let nar = narayana.term(m as u64);
        match nar.cmp(&current.1) {
            std::cmp::Ordering::Less => m += 1,
            std::cmp::Ordering::Greater => current = pell.next().expect("stream is infinite"),
            std::cmp::Ordering::Equal => {
                // collect every m with this value (duplicates only at 1)
                let mut mm = m;
                while mm <= m_max && narayana.term(mm as u64) == nar {
                    out.push(SolutionRecord {
                        n: current.0,
                        k,
                        m: mm,
                        value: nar.to_string(),
                        kind: classify(current.0, k, mm),
                    });
                    mm += 1;
                    if nar > BigInt::from(1) {
                        break;
                    }
                }
                current = pell.next().expect("stream is infinite");
            }
        }
    }
    out.sort_by_key(|r| (r.k, r.n, r.m));
    out
}

/// Window check: `F_{2n-1}` is never a Narayana number over the scanned
/// window `5 <= n <= n_hi`, `m <= m_hi`. Returns every offending pair, so an
/// empty result is the pass verdict.
pub fn fibonacci_window_collisions(n_hi: i64, m_hi: i64) -> Vec<(i64, i64)> {
    let mut narayana = NarayanaSequence::new();
    let mut values: HashMap<BigInt, i64> = HashMap::new();
    for m in 0..=m_hi {
        values.entry(narayana.term(m as u64)).or_insert(m);
    }
    let mut bad = Vec::new();
    for n in 5..=n_hi {
        let f = fibonacci((2 * n - 1) as u64);
        if let Some(&m) = values.get(&f) {
            bad.push((n, m));
        }
    }
    bad
}

/// Fully certified variant for the proof pipeline: for each `5 <= n <= n_hi`
/// decide membership of `F_{2n-1}` against the unbounded Narayana stream
/// using strict growth as the stopping rule.
pub fn fibonacci_window_empty_certified(n_hi: i64) -> bool {
    let mut narayana = NarayanaSequence::new();
    (5..=n_hi).all(|n| {
        let f = fibonacci((2 * n - 1) as u64);
        narayana.indices_of_value(&f).is_empty()
    })
}
