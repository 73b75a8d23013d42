//! Orchestration of the full replay and the machine-readable certificate.
//!
//! A full run walks four stages: the exact small-index analysis, the per-k
//! reduction sweep over k in [2, 360], the k-independent bound derivation
//! with the three-stage reduction chain for k > 360, and the exhaustive
//! searches inside the proved boxes. Every numeric claim lands in the
//! certificate as either an exact integer, a certified ball, or a named
//! check; the verdict is true only when every stage closed.

use std::cmp::Ordering;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebraic::{alpha_root, phi_ball, AlgebraicContext};
use crate::certreal::{CertReal, Dyadic, PrecisionPolicy, Round};
use crate::linforms::{
    lemma31_bounds_big, matveev_leading_factor, matveev_rhs, strict_int_below, MatveevParams,
};
use crate::reduction::{large_k_chain, large_k_m1, small_k_reduce, strict_int_below_dyadic};
use crate::search::{
    classify, fibonacci_window_empty_certified, intersect_box, BoxQuery, SolutionKind,
    SolutionRecord,
};
use crate::sequences::{check_fib_identity, kpell, NarayanaSequence};

pub const CERT_SCHEMA: &str = "pnp-cert/1";
/// Precision at which balls are outward-rounded before landing in the
/// certificate.
const CERT_BALL_BITS: u64 = 192;

#[derive(Clone, Debug, Error)]
pub enum PipelineError {
    #[error("certificate violates its schema: {0}")]
    BadCertificate(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Full,
    SmallK,
    LargeK,
    SearchOnly,
}

/// Search box actually executed; recorded for the coverage audit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBox {
    pub k_lo: u32,
    pub k_hi: u32,
    pub n_lo: i64,
    pub n_hi: i64,
    pub m_lo: i64,
    pub m_hi: i64,
}

impl SearchBox {
    pub fn paper_default() -> Self {
        SearchBox { k_lo: 2, k_hi: 360, n_lo: 4, n_hi: 265, m_lo: 3, m_hi: 329 }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub policy: PrecisionPolicy,
    pub threads: Option<usize>,
    pub mode: RunMode,
    /// Sweep range for small-k partial runs; the full mode always covers
    /// [2, 360].
    pub k_lo: u32,
    pub k_hi: u32,
    /// Box override for coverage experiments; `None` uses the recorded
    /// default.
    pub search_box: Option<SearchBox>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            policy: PrecisionPolicy::default(),
            threads: None,
            mode: RunMode::Full,
            k_lo: 2,
            k_hi: 360,
            search_box: None,
        }
    }
}

/// A ball as stored in the certificate: exact decimal midpoint and radius.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallJson {
    pub mid: String,
    pub rad: String,
}

impl BallJson {
    pub fn from_ball(x: &CertReal) -> Self {
        // outward rounding keeps the enclosure sound and the strings short
        let mid = x.midpoint().round_dir(CERT_BALL_BITS, Round::Nearest);
        let slack = x.midpoint().sub(&mid).abs();
        let rad = x.radius().add(&slack).round_dir(64, Round::Up);
        BallJson { mid: mid.to_decimal_string(), rad: rad.to_decimal_string() }
    }

    pub fn to_ball(&self) -> Result<CertReal, PipelineError> {
        let mid = Dyadic::from_decimal_string(&self.mid)
            .map_err(PipelineError::BadCertificate)?;
        let rad = Dyadic::from_decimal_string(&self.rad)
            .map_err(PipelineError::BadCertificate)?;
        if rad.is_negative() {
            return Err(PipelineError::BadCertificate("negative radius".into()));
        }
        Ok(CertReal::new(mid, rad, CERT_BALL_BITS as u32 + 16))
    }
}

/// One named certified comparison in the bound replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> CheckRecord {
    CheckRecord { name: name.to_string(), passed, detail: detail.into() }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallKRecord {
    pub k: u32,
    pub gamma: BallJson,
    pub g_k_gamma: BallJson,
    /// multiplier bound fed to the reduction
    pub m_k: String,
    pub q: String,
    pub convergent_index: usize,
    pub epsilon: BallJson,
    pub t_bound: BallJson,
    /// greatest integer below the t-bound's upper edge
    pub m_bound: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub m_used: String,
    pub q: String,
    pub convergent_index: usize,
    pub epsilon: BallJson,
    pub t_bound: BallJson,
    pub k_bound: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatveevStage {
    pub checks: Vec<CheckRecord>,
    pub k_bound_initial: String,
    pub n_bound: String,
    pub m_bound: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargeKSection {
    pub matveev_stage: MatveevStage,
    pub chain: Vec<ChainRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibWindowRecord {
    pub identity_checked_k_hi: u32,
    pub n_hi: i64,
    pub empty: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub n: i64,
    pub m: Vec<i64>,
    pub k_range: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SporadicRecord {
    pub n: i64,
    pub k: u32,
    pub m: i64,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub families: Vec<FamilyRecord>,
    pub exceptional: Vec<SporadicRecord>,
}

impl SolutionSet {
    /// The complete solution set of the equation.
    pub fn expected() -> Self {
        SolutionSet {
            families: vec![
                FamilyRecord { n: 1, m: vec![0, 1, 2], k_range: "k>=2".into() },
                FamilyRecord { n: 2, m: vec![3], k_range: "k>=2".into() },
                FamilyRecord { n: 4, m: vec![8], k_range: "k>=3".into() },
            ],
            exceptional: vec![SporadicRecord { n: 6, k: 4, m: 13, value: "88".into() }],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub theorem_holds: bool,
    pub solution_set: SolutionSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub precision_start: u32,
    pub precision_cap: u32,
    pub threads: usize,
    pub timestamp_unix: u64,
    pub mode: RunMode,
    pub search_box: SearchBox,
}

/// The machine-readable record of the whole replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub metadata: Metadata,
    /// Named theorems this replay trusts rather than proves.
    pub assumptions: Vec<String>,
    /// Certified comparisons backing the global n-bound constant.
    pub bound_derivation: Vec<CheckRecord>,
    /// Exact small-index analysis (complete over all m by monotonicity).
    pub trivial_ranges: Vec<CheckRecord>,
    pub small_k: Vec<SmallKRecord>,
    pub small_k_max_bound: Option<i64>,
    pub derived_n_bound: Option<i64>,
    pub large_k: Option<LargeKSection>,
    /// Unfiltered box search results (the full evidence list).
    pub search: Vec<SolutionRecord>,
    /// Deep-regime filtered search results.
    pub search_filtered: Vec<SolutionRecord>,
    pub fibonacci_window: Option<FibWindowRecord>,
    pub diagnostics: Vec<String>,
    pub verdict: Verdict,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow10(digits: u32) -> BigInt {
    BigInt::from(10u8).pow(digits)
}

/// Certified inequalities behind the global bound
/// `n < 5.28e16 k^5 log^3 k`. Each log-domination inequality is verified at
/// its binding point; the difference of the two sides is increasing beyond
/// it, which the detail field records.
pub fn derive_global_bound_checks(prec: u32) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let run = || -> Result<Vec<CheckRecord>, crate::certreal::CertRealError> {
        let mut checks = Vec::new();
        let one = CertReal::one(prec);

        // 1 + log(3k) < 4.1 log k at k = 2; difference increases with k
        let lhs = one.add(&CertReal::from_i64(6, prec).log()?);
        let rhs = CertReal::from_i64(2, prec).log()?.mul(&CertReal::from_rational(&rat(41, 10), prec));
        checks.push(check(
            "one-plus-log-3k-dominated",
            lhs.certainly_lt(&rhs),
            "1+log(3k) < 4.1 log k at the binding point k=2; the gap 3.1 log k - log 3 - 1 increases in k",
        ));

        // 1 + log(2.52 n + 3) < 2.6 log n at n = 4; difference increases
        let lhs = one.add(&CertReal::from_rational(&rat(1308, 100), prec).log()?);
        let rhs = CertReal::from_i64(4, prec).log()?.mul(&CertReal::from_rational(&rat(13, 5), prec));
        checks.push(check(
            "one-plus-log-coeff-bound-dominated",
            lhs.certainly_lt(&rhs),
            "1+log(2.52n+3) < 2.6 log n at the binding point n=4; the gap increases in n",
        ));

        // assembled linear-form constant: (L * 9 * 15.6 * 6 log phi * log alpha / log alpha)
        // * 4.1 * 2.6 <= 6.22e14, leaving absolute slack for the +log(2.4)
        let lead = matveev_leading_factor(3, prec)?;
        let phi = phi_ball(prec)?;
        let log_phi = phi.log()?;
        let c2 = lead
            .mul_int(&BigInt::from(9))
            .mul(&CertReal::from_rational(&rat(78, 5), prec))
            .mul(&log_phi.mul_int(&BigInt::from(6)))
            .mul(&CertReal::from_rational(&(rat(41, 10) * rat(13, 5)), prec));
        let cap = CertReal::from_bigint(&(BigInt::from(622) * pow10(12)), prec);
        checks.push(check(
            "m-bound-constant-dominated",
            c2.certainly_lt(&cap),
            "1.4*30^6*3^4.5 * 9 * 15.6 * 6 log(phi) * 4.1 * 2.6 <= 6.22e14 (log(alpha) from the B3 factor cancels against the division by log(alpha))",
        ));
        // slack absorbs log(2.4)/log(alpha) < 2.3 because 0.01e14 * min(k^5 log^2 k log n) >> 2.3
        let (alpha, _) = alpha_root(&BigRational::new(BigInt::one(), BigInt::one() << 200u32))?;
        let slack_ok = {
            let margin = CertReal::from_bigint(&pow10(12), prec); // 6.23e14 - 6.22e14
            let min_x = CertReal::from_i64(32, prec)
                .mul(&CertReal::from_i64(2, prec).log()?.powi(2)?)
                .mul(&CertReal::from_i64(4, prec).log()?);
            let need = CertReal::from_rational(&rat(24, 10), prec)
                .log()?
                .div(&alpha.log()?)?;
            need.certainly_lt(&margin.mul(&min_x))
        };
        checks.push(check(
            "m-bound-additive-slack",
            slack_ok,
            "log(2.4)/log(alpha) is absorbed by the 1e12 margin times the minimum of k^5 log^2 k log n",
        ));

        // n-step: 0.8 * 6.23e14 <= 5e14 minus margin absorbing the +1.2
        let lhs = rat(4, 5) * BigRational::from_integer(BigInt::from(623) * pow10(12));
        let cap_rat = BigRational::from_integer(BigInt::from(5) * pow10(14));
        let margin = &cap_rat - &lhs; // 1.6e12
        let margin_ok = {
            let min_x = CertReal::from_i64(32, prec)
                .mul(&CertReal::from_i64(2, prec).log()?.powi(2)?)
                .mul(&CertReal::from_i64(4, prec).log()?);
            let absorbed = CertReal::from_rational(&margin, prec).mul(&min_x);
            CertReal::from_rational(&rat(12, 10), prec).certainly_lt(&absorbed)
        };
        checks.push(check(
            "n-over-logn-constant",
            lhs < cap_rat && margin_ok,
            "0.8 * 6.23e14 = 4.984e14 <= 5e14 with the +1.2 offset absorbed by the margin",
        ));

        // inversion applicability: S = 5e14 k^5 log^2 k >= 4 = (4 m^2)^m at m=1
        checks.push(check(
            "inversion-precondition",
            true,
            "S = 5e14 k^5 log^2 k >= 5e14 * 32 * log^2(2) >= 4, the m=1 threshold",
        ));

        // log S = log(5e14) + 5 log k + 2 log log k < 52.8 log k at k = 2
        let log_s = CertReal::from_bigint(&(BigInt::from(5) * pow10(14)), prec)
            .log()?
            .add(&CertReal::from_i64(2, prec).log()?.mul_int(&BigInt::from(5)))
            .add(&CertReal::from_i64(2, prec).log()?.log()?.mul_int(&BigInt::from(2)));
        let rhs = CertReal::from_i64(2, prec).log()?.mul(&CertReal::from_rational(&rat(264, 5), prec));
        checks.push(check(
            "log-s-dominated",
            log_s.certainly_lt(&rhs),
            "log(5e14)+5 log k+2 log log k < 52.8 log k at the binding point k=2; the gap increases in k",
        ));

        // final constant is the exact product 2 * 5e14 * 52.8 = 5.28e16
        let final_ok = rat(2, 1)
            * BigRational::from_integer(BigInt::from(5) * pow10(14))
            * rat(264, 5)
            == BigRational::from_integer(BigInt::from(528) * pow10(14));
        checks.push(check(
            "final-bound-constant",
            final_ok,
            "2 * 5e14 * 52.8 = 5.28e16 exactly",
        ));
        Ok(checks)
    };
    match run() {
        Ok(checks) => out.extend(checks),
        Err(e) => out.push(check("bound-derivation-evaluation", false, format!("{e}"))),
    }
    out
}

/// Exact small-index analysis: every n in {1, 2, 3, 4} is resolved against
/// the whole Narayana sequence by strict monotonicity.
pub fn trivial_range_checks() -> Vec<CheckRecord> {
    let mut nar = NarayanaSequence::new();
    let mut out = Vec::new();
    // first k-Pell terms do not depend on k in this window (the recurrence
    // still sees the whole history); spot-verify across representative k
    let same_terms = [2u32, 3, 7, 360].iter().all(|&k| {
        kpell(k, 1).unwrap() == BigInt::one()
            && kpell(k, 2).unwrap() == BigInt::from(2)
            && kpell(k, 3).unwrap() == BigInt::from(5)
    });
    out.push(check(
        "window-independence",
        same_terms,
        "P_1 = 1, P_2 = 2, P_3 = 5 for every order; P_4 = 12 only for order 2, else 13",
    ));
    out.push(check(
        "n1-matches",
        nar.indices_of_value(&BigInt::one()) == vec![0, 1, 2],
        "value 1 appears exactly at m in {0, 1, 2}",
    ));
    out.push(check(
        "n2-matches",
        nar.indices_of_value(&BigInt::from(2)) == vec![3],
        "value 2 appears exactly at m = 3",
    ));
    out.push(check(
        "n3-empty",
        nar.indices_of_value(&BigInt::from(5)).is_empty(),
        "value 5 is skipped by the sequence",
    ));
    out.push(check(
        "n4-order2-empty",
        kpell(2, 4).unwrap() == BigInt::from(12)
            && nar.indices_of_value(&BigInt::from(12)).is_empty(),
        "P_4 = 12 for order 2 and 12 is not a sequence value",
    ));
    out.push(check(
        "n4-matches",
        kpell(3, 4).unwrap() == BigInt::from(13)
            && kpell(360, 4).unwrap() == BigInt::from(13)
            && nar.indices_of_value(&BigInt::from(13)) == vec![8],
        "P_4 = 13 for every order >= 3 and 13 = N_8 uniquely",
    ));
    out.push(check(
        "n5-exceeds-small-values",
        [2u32, 3, 4, 360].iter().all(|&k| kpell(k, 5).unwrap() >= BigInt::from(29)),
        "P_5 >= 29 > 2 for every order, so m <= 3 cannot occur for n >= 5",
    ));
    out
}

/// Sweep result plus diagnostics.
struct SmallKOutcomes {
    records: Vec<SmallKRecord>,
    max_bound: Option<BigInt>,
    failures: Vec<String>,
}

fn run_small_k_sweep(k_lo: u32, k_hi: u32, policy: PrecisionPolicy) -> SmallKOutcomes {
    let results: Vec<(u32, Result<SmallKRecord, String>)> = (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| {
            let rec = small_k_reduce(k, policy)
                .map_err(|e| format!("k={k}: {e}"))
                .and_then(|red| {
                    let ctx = AlgebraicContext::new(k, 192)
                        .map_err(|e| format!("k={k}: {e}"))?;
                    Ok(SmallKRecord {
                        k,
                        gamma: BallJson::from_ball(ctx.gamma()),
                        g_k_gamma: BallJson::from_ball(ctx.g_k_gamma()),
                        m_k: red.m_k.to_string(),
                        q: red.outcome.q.to_string(),
                        convergent_index: red.outcome.convergent_index,
                        epsilon: BallJson::from_ball(&red.outcome.epsilon),
                        t_bound: BallJson::from_ball(&red.outcome.t_bound),
                        m_bound: red.m_bound.to_string(),
                    })
                });
            (k, rec)
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut max_bound: Option<BigInt> = None;
    for (_, r) in results {
        match r {
            Ok(rec) => {
                let b: BigInt = rec.m_bound.parse().expect("formatted above");
                max_bound = Some(match max_bound {
                    Some(cur) => cur.max(b),
                    None => b,
                });
                records.push(rec);
            }
            Err(e) => failures.push(format!("small-k: {e}")),
        }
    }
    records.sort_by_key(|r| r.k);
    SmallKOutcomes { records, max_bound, failures }
}

/// The k-independent branch: certified replay of the initial bound
/// derivation, then the three-stage reduction chain.
fn run_large_k_branch(policy: PrecisionPolicy) -> (Option<LargeKSection>, Vec<String>) {
    let mut failures = Vec::new();
    let prec = 256u32;
    let mut checks = Vec::new();

    let computed = (|| -> Result<(BigInt, BigInt, BigInt), String> {
        let one = CertReal::one(prec);
        let target = BigRational::new(BigInt::one(), BigInt::one() << 300u32);
        let (alpha, _) = alpha_root(&target).map_err(|e| e.to_string())?;
        let phi = phi_ball(prec).map_err(|e| e.to_string())?;
        let log_phi = phi.log().map_err(|e| e.to_string())?;
        let log_alpha = alpha.log().map_err(|e| e.to_string())?;
        let c_a = crate::algebraic::c_alpha_of(&alpha).map_err(|e| e.to_string())?;

        // B-value domination for the degree-6 field
        let h_eta1 = CertReal::from_i64(31, prec)
            .log()
            .map_err(|e| e.to_string())?
            .mul(&CertReal::from_rational(&rat(1, 3), prec))
            .add(&log_phi.mul(&CertReal::from_rational(&rat(1, 2), prec)))
            .add(&CertReal::from_i64(2, prec).log().map_err(|e| e.to_string())?.mul_int(&BigInt::from(2)));
        checks.push(check(
            "b1-height-bound",
            h_eta1.cmp_rational(&rat(14, 5)) == Some(Ordering::Less),
            "h(c_alpha (phi+2)) <= log(31)/3 + log(phi)/2 + 2 log 2 < 2.8, so B1 = 6*2.8 = 16.8",
        ));
        checks.push(check(
            "b2-bound",
            log_phi.mul_int(&BigInt::from(3)).cmp_rational(&rat(29, 20)) == Some(Ordering::Less),
            "6 h(phi) = 3 log phi < 1.45 = B2",
        ));
        checks.push(check(
            "b3-bound",
            log_alpha.mul_int(&BigInt::from(2)).cmp_rational(&rat(77, 100)) == Some(Ordering::Less),
            "6 h(alpha) = 2 log alpha < 0.77 = B3",
        ));

        // c_alpha is annihilated by its degree-3 minimal polynomial
        let minpoly = [31, -31, 10, -1].map(BigInt::from);
        let residual = crate::certreal::eval_poly(&minpoly, &c_a);
        checks.push(check(
            "c-alpha-minpoly",
            residual.contains_rational(&BigRational::zero()),
            "31 c^3 - 31 c^2 + 10 c - 1 encloses zero at c = c_alpha",
        ));

        // the D-independent product of the bound
        let params = MatveevParams {
            s: 3,
            degree: 6,
            coeff_bound: one.clone(),
            b_values: vec![
                CertReal::from_rational(&rat(84, 5), prec),
                CertReal::from_rational(&rat(29, 20), prec),
                CertReal::from_rational(&rat(77, 100), prec),
            ],
        };
        let product = matveev_rhs(&params).map_err(|e| e.to_string())?;
        let center = BigRational::from_integer(BigInt::from(27) * pow10(13));
        let tol = &center * rat(1, 100);
        checks.push(check(
            "d-independent-product",
            product.cmp_rational(&(&center - &tol)) == Some(Ordering::Greater)
                && product.cmp_rational(&(&center + &tol)) == Some(Ordering::Less),
            "1.4*30^6*3^4.5*36*(1+log 6)*16.8*1.45*0.77 encloses 2.7e14 within 1%",
        ));

        // leading s = 3 factor against its recorded value, within 0.1%
        let lead = matveev_leading_factor(3, prec).map_err(|e| e.to_string())?;
        let lead_center = BigRational::from_integer(BigInt::from(1432) * pow10(8));
        let lead_tol = &lead_center * rat(1, 1000);
        checks.push(check(
            "leading-factor-s3",
            lead.cmp_rational(&(&lead_center - &lead_tol)) == Some(Ordering::Greater)
                && lead.cmp_rational(&(&lead_center + &lead_tol)) == Some(Ordering::Less),
            "1.4*30^6*3^4.5 encloses 1.432e11 within 0.1%",
        ));

        // 1 + log(2.52 n + 3) < 1.4 log n at n = 362 (increasing gap beyond)
        let lhs = one
            .add(&CertReal::from_rational(&rat(91524, 100), prec).log().map_err(|e| e.to_string())?);
        let rhs = CertReal::from_i64(362, prec)
            .log()
            .map_err(|e| e.to_string())?
            .mul(&CertReal::from_rational(&rat(7, 5), prec));
        checks.push(check(
            "coeff-log-dominated-large",
            lhs.certainly_lt(&rhs),
            "1+log(2.52n+3) < 1.4 log n at the binding point n=362; the gap increases in n",
        ));

        // k < (2/log phi)(1.4 P log n + log 7.62) <= 1.58e15 log n for n >= 362
        let c_val = {
            let p14 = product.mul(&CertReal::from_rational(&rat(7, 5), prec));
            let log762_over = CertReal::from_rational(&rat(381, 50), prec)
                .log()
                .map_err(|e| e.to_string())?
                .div(&CertReal::from_i64(362, prec).log().map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            p14.add(&log762_over)
                .mul(&CertReal::from_i64(2, prec))
                .div(&log_phi)
                .map_err(|e| e.to_string())?
        };
        let c_cap = BigRational::from_integer(BigInt::from(158) * pow10(13));
        checks.push(check(
            "k-linear-in-logn",
            c_val.cmp_rational(&c_cap) == Some(Ordering::Less),
            "(2/log phi)(1.4 * product + log(7.62)/log(362)) < 1.58e15",
        ));

        // log n < 38.51 + 5 log k + 3 log log k < 12.5 log k at k = 361
        let lhs = CertReal::from_bigint(&(BigInt::from(528) * pow10(14)), prec)
            .log()
            .map_err(|e| e.to_string())?
            .add(&CertReal::from_i64(361, prec).log().map_err(|e| e.to_string())?.mul_int(&BigInt::from(5)))
            .add(
                &CertReal::from_i64(361, prec)
                    .log()
                    .map_err(|e| e.to_string())?
                    .log()
                    .map_err(|e| e.to_string())?
                    .mul_int(&BigInt::from(3)),
            );
        let rhs = CertReal::from_i64(361, prec)
            .log()
            .map_err(|e| e.to_string())?
            .mul(&CertReal::from_rational(&rat(25, 2), prec));
        checks.push(check(
            "logn-of-bound-dominated",
            lhs.certainly_lt(&rhs),
            "log(5.28e16)+5 log k+3 log log k < 12.5 log k at the binding point k=361; the gap increases in k",
        ));
        checks.push(check(
            "combined-constant",
            rat(158, 100) * rat(125, 10) <= rat(20, 1),
            "1.58e15 * 12.5 = 1.975e16 <= 2e16 exactly",
        ));

        // fixed point of x = 2e16 log x, approached from above
        let c2e16 = BigInt::from(2) * pow10(16);
        let mut x = Dyadic::from_bigint(pow10(40));
        for _ in 0..200 {
            let ball = CertReal::exact_dyadic(x.clone(), prec)
                .log()
                .map_err(|e| e.to_string())?
                .mul_int(&c2e16);
            let next = ball.hi();
            if next.cmp(&x) != Ordering::Less {
                break;
            }
            x = next;
        }
        let k_init = x.ceil_int();
        checks.push(check(
            "initial-k-bound",
            k_init <= BigInt::from(151) * pow10(16),
            format!("iterated upper bound {k_init} for the fixed point stays at or below 1.51e18"),
        ));

        // Lemma-style n and m bounds at the initial k-bound
        let (n_init, _) = lemma31_bounds_big(&k_init, prec).map_err(|e| e.to_string())?;
        checks.push(check(
            "initial-n-bound",
            n_init <= BigInt::from(31) * pow10(111),
            "n stays at or below 3.1e112 at the initial k-bound",
        ));
        let m_init = strict_int_below(&BigRational::new(
            BigInt::from(63) * &n_init - BigInt::from(13),
            BigInt::from(25),
        ));
        // one unit of slack keeps the multiplier covered under either
        // dominant-term normalization of the ternary Binet form
        checks.push(check(
            "initial-m-bound-within-m1",
            (&m_init + BigInt::one()) <= large_k_m1(),
            "m-bound plus multiplier slack stays within the recorded 7.95e112",
        ));
        Ok((k_init, n_init, m_init))
    })();

    let (k_init, n_init, m_init) = match computed {
        Ok(v) => v,
        Err(e) => {
            failures.push(format!("large-k: {e}"));
            checks.push(check("matveev-stage-evaluation", false, e.clone()));
            return (
                Some(LargeKSection {
                    matveev_stage: MatveevStage {
                        checks,
                        k_bound_initial: String::new(),
                        n_bound: String::new(),
                        m_bound: String::new(),
                    },
                    chain: Vec::new(),
                }),
                failures,
            );
        }
    };

    for c in &checks {
        if !c.passed {
            failures.push(format!("large-k check failed: {}", c.name));
        }
    }

    let chain = match large_k_chain(policy) {
        Ok(stages) => stages
            .iter()
            .map(|s| ChainRecord {
                m_used: s.m_used.to_string(),
                q: s.outcome.q.to_string(),
                convergent_index: s.outcome.convergent_index,
                epsilon: BallJson::from_ball(&s.outcome.epsilon),
                t_bound: BallJson::from_ball(&s.outcome.t_bound),
                k_bound: s.k_bound.to_string(),
            })
            .collect(),
        Err(e) => {
            failures.push(format!("large-k chain: {e}"));
            Vec::new()
        }
    };

    (
        Some(LargeKSection {
            matveev_stage: MatveevStage {
                checks,
                k_bound_initial: k_init.to_string(),
                n_bound: n_init.to_string(),
                m_bound: m_init.to_string(),
            },
            chain,
        }),
        failures,
    )
}

/// Full replay (or a partial stage, per the config mode).
pub fn verify_theorem(cfg: &RunConfig) -> Certificate {
    let threads = cfg.threads.unwrap_or_else(|| rayon::current_num_threads());
    let run = move || run_pipeline(cfg);
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(run),
        None => {
            let _ = threads;
            run()
        }
    }
}

fn run_pipeline(cfg: &RunConfig) -> Certificate {
    let mut diagnostics = Vec::new();
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let full = cfg.mode == RunMode::Full;
    let (k_lo, k_hi) = if full { (2, 360) } else { (cfg.k_lo.max(2), cfg.k_hi.min(360)) };
    let search_box = cfg.search_box.clone().unwrap_or_else(SearchBox::paper_default);

    // stage: global bound derivation (needed by both branches)
    let bound_derivation = if full || cfg.mode == RunMode::SmallK || cfg.mode == RunMode::LargeK {
        derive_global_bound_checks(192)
    } else {
        Vec::new()
    };
    for c in &bound_derivation {
        if !c.passed {
            diagnostics.push(format!("bound-derivation: {} failed", c.name));
        }
    }

    // stage: exact small-index analysis
    let trivial_ranges = if full || cfg.mode == RunMode::SearchOnly {
        trivial_range_checks()
    } else {
        Vec::new()
    };
    for c in &trivial_ranges {
        if !c.passed {
            diagnostics.push(format!("trivial-ranges: {} failed", c.name));
        }
    }

    // stage: small-k sweep
    let (small_k, small_k_max_bound, derived_n_bound) =
        if full || cfg.mode == RunMode::SmallK {
            let sweep = run_small_k_sweep(k_lo, k_hi, cfg.policy);
            diagnostics.extend(sweep.failures);
            let max_bound = sweep.max_bound.clone();
            let derived_n = max_bound.as_ref().map(|m| {
                // n < (m + 1.5)/1.25 = (4m + 6)/5
                (BigInt::from(4) * m + BigInt::from(6)) / BigInt::from(5)
            });
            (sweep.records, max_bound, derived_n)
        } else {
            (Vec::new(), None, None)
        };

    // stage: large-k branch
    let (large_k, lk_failures) = if full || cfg.mode == RunMode::LargeK {
        run_large_k_branch(cfg.policy)
    } else {
        (None, Vec::new())
    };
    diagnostics.extend(lk_failures);

    // stage: the k-Pell/Fibonacci identity window and its emptiness
    let fibonacci_window = if full || cfg.mode == RunMode::SearchOnly {
        let ident_ok = (2..=k_hi).all(|k| check_fib_identity(k, k as i64 + 1).unwrap_or(false));
        if !ident_ok {
            diagnostics.push("fibonacci-window: identity check failed".into());
        }
        let empty = fibonacci_window_empty_certified(k_hi as i64 + 1);
        if !empty {
            diagnostics.push("fibonacci-window: collision found".into());
        }
        Some(FibWindowRecord { identity_checked_k_hi: k_hi, n_hi: k_hi as i64 + 1, empty: ident_ok && empty })
    } else {
        None
    };

    // stage: searches
    let (search, search_filtered) = if full || cfg.mode == RunMode::SearchOnly {
        let unfiltered = intersect_box(&BoxQuery {
            k_lo: search_box.k_lo,
            k_hi: search_box.k_hi,
            n_lo: 1,
            n_hi: search_box.n_hi,
            m_lo: 0,
            m_hi: search_box.m_hi,
            filters: false,
        });
        let filtered = intersect_box(&BoxQuery {
            k_lo: search_box.k_lo,
            k_hi: search_box.k_hi,
            n_lo: search_box.n_lo,
            n_hi: search_box.n_hi,
            m_lo: search_box.m_lo,
            m_hi: search_box.m_hi,
            filters: true,
        });
        (unfiltered, filtered)
    } else {
        (Vec::new(), Vec::new())
    };

    // verdict assembly (full mode only)
    let mut holds = full;
    if full {
        if !diagnostics.is_empty() {
            holds = false;
        }
        if small_k.len() != 359 {
            holds = false;
            diagnostics.push(format!("small-k: expected 359 records, got {}", small_k.len()));
        }
        // coverage audit: the executed box must cover the derived bounds
        match (&small_k_max_bound, &derived_n_bound) {
            (Some(m), Some(n)) => {
                let covers = search_box.k_lo <= 2
                    && search_box.k_hi >= 360
                    && search_box.n_lo <= 4
                    && search_box.m_lo <= 3
                    && BigInt::from(search_box.n_hi) >= *n
                    && BigInt::from(search_box.m_hi) >= *m;
                if !covers {
                    holds = false;
                    diagnostics.push("search-coverage: executed box does not cover the derived bounds".into());
                }
            }
            _ => {
                holds = false;
                diagnostics.push("search-coverage: derived bounds unavailable".into());
            }
        }
        if let Some(lk) = &large_k {
            if lk.chain.len() != 3 {
                holds = false;
                diagnostics.push("large-k: chain incomplete".into());
            } else {
                let final_bound: BigInt = lk.chain[2].k_bound.parse().unwrap_or_else(|_| BigInt::from(i64::MAX));
                if final_bound >= BigInt::from(361) {
                    holds = false;
                    diagnostics.push(format!("large-k: final bound {final_bound} does not close the chain"));
                }
            }
        } else {
            holds = false;
            diagnostics.push("large-k: section missing".into());
        }
        if let Some(fw) = &fibonacci_window {
            if !fw.empty {
                holds = false;
            }
        } else {
            holds = false;
            diagnostics.push("fibonacci-window: section missing".into());
        }
        // the deep-regime search must find exactly the sporadic solution
        let expected_sporadic =
            search_filtered.len() == 1 && {
                let r = &search_filtered[0];
                (r.n, r.k, r.m, r.value.as_str(), r.kind)
                    == (6, 4, 13, "88", SolutionKind::Exceptional)
            };
        if !expected_sporadic {
            holds = false;
            diagnostics.push("search: deep-regime results differ from the expected sporadic solution".into());
        }
        // the unfiltered search must reproduce the families exactly
        if !unfiltered_matches_families(&search, search_box.k_lo, search_box.k_hi) {
            holds = false;
            diagnostics.push("search: unfiltered results differ from the expected families".into());
        }
    }

    Certificate {
        schema: CERT_SCHEMA.to_string(),
        metadata: Metadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            precision_start: cfg.policy.start,
            precision_cap: cfg.policy.cap,
            threads: cfg.threads.unwrap_or_else(rayon::current_num_threads),
            timestamp_unix: started,
            mode: cfg.mode,
            search_box,
        },
        assumptions: vec![
            "matveev-linear-forms-lower-bound".into(),
            "dujella-petho-reduction-lemma".into(),
            "kpell-binet-truncation".into(),
            "kpell-root-localization".into(),
            "fibonacci-narayana-disjoint-beyond-checked-window".into(),
        ],
        bound_derivation,
        trivial_ranges,
        small_k,
        small_k_max_bound: small_k_max_bound.and_then(|b| b.to_string().parse().ok()),
        derived_n_bound: derived_n_bound.and_then(|b| b.to_string().parse().ok()),
        large_k,
        search,
        search_filtered,
        fibonacci_window,
        diagnostics,
        verdict: Verdict { theorem_holds: holds, solution_set: SolutionSet::expected() },
    }
}

/// The unfiltered box must contain exactly the family records plus the
/// sporadic solution.
fn unfiltered_matches_families(records: &[SolutionRecord], k_lo: u32, k_hi: u32) -> bool {
    let mut expected = Vec::new();
    for k in k_lo..=k_hi {
        for (n, m, v) in [(1i64, 0i64, "1"), (1, 1, "1"), (1, 2, "1"), (2, 3, "2")] {
            expected.push((n, k, m, v.to_string()));
        }
        if k >= 3 {
            expected.push((4, k, 8, "13".to_string()));
        }
        if k == 4 {
            expected.push((6, k, 13, "88".to_string()));
        }
    }
    expected.sort();
    let mut got: Vec<(i64, u32, i64, String)> =
        records.iter().map(|r| (r.n, r.k, r.m, r.value.clone())).collect();
    got.sort();
    if got != expected {
        return false;
    }
    records.iter().all(|r| r.kind == classify(r.n, r.k, r.m))
}

/// Canonical JSON: object keys sorted, all numerics either integers or
/// decimal strings. Serialization is deterministic, so
/// serialize-parse-serialize is byte-identical.
pub fn certificate_to_canonical_json(cert: &Certificate) -> String {
    let value = serde_json::to_value(cert).expect("certificate serializes");
    serde_json::to_string(&value).expect("value serializes")
}

pub fn emit_certificate(cert: &Certificate, mut out: impl Write) -> Result<(), PipelineError> {
    let json = certificate_to_canonical_json(cert);
    out.write_all(json.as_bytes()).map_err(|e| PipelineError::Io(e.to_string()))?;
    out.write_all(b"\n").map_err(|e| PipelineError::Io(e.to_string()))
}

pub fn load_certificate(json: &str) -> Result<Certificate, PipelineError> {
    let cert: Certificate =
        serde_json::from_str(json).map_err(|e| PipelineError::BadCertificate(e.to_string()))?;
    if cert.schema != CERT_SCHEMA {
        return Err(PipelineError::BadCertificate(format!(
            "unsupported schema {:?}",
            cert.schema
        )));
    }
    Ok(cert)
}

/// Re-validate a loaded certificate: recompute the exact facts and check the
/// recorded invariants. Returns the list of violations.
pub fn validate_certificate(cert: &Certificate) -> Vec<String> {
    let mut bad = Vec::new();
    if cert.schema != CERT_SCHEMA {
        bad.push("schema mismatch".into());
    }
    for rec in &cert.small_k {
        let m_k: BigInt = match rec.m_k.parse() {
            Ok(v) => v,
            Err(_) => {
                bad.push(format!("k={}: unparsable m_k", rec.k));
                continue;
            }
        };
        let q: BigInt = match rec.q.parse() {
            Ok(v) => v,
            Err(_) => {
                bad.push(format!("k={}: unparsable q", rec.k));
                continue;
            }
        };
        if q <= &m_k * BigInt::from(6) {
            bad.push(format!("k={}: q does not exceed 6M", rec.k));
        }
        match rec.epsilon.to_ball() {
            Ok(eps) => {
                if eps.sign_of() != crate::certreal::Sign::Positive {
                    bad.push(format!("k={}: recorded epsilon not certifiably positive", rec.k));
                }
            }
            Err(e) => bad.push(format!("k={}: {e}", rec.k)),
        }
        match (rec.t_bound.to_ball(), rec.m_bound.parse::<BigInt>()) {
            (Ok(t), Ok(mb)) => {
                if strict_int_below_dyadic(&t.hi()) != mb {
                    bad.push(format!("k={}: m_bound inconsistent with t_bound", rec.k));
                }
            }
            _ => bad.push(format!("k={}: unparsable t_bound/m_bound", rec.k)),
        }
    }
    if let Some(max) = &cert.small_k_max_bound {
        let recomputed = cert
            .small_k
            .iter()
            .filter_map(|r| r.m_bound.parse::<i64>().ok())
            .max();
        if recomputed != Some(*max) {
            bad.push("small_k_max_bound does not match the records".into());
        }
    }
    if let Some(lk) = &cert.large_k {
        for (i, st) in lk.chain.iter().enumerate() {
            let m: BigInt = match st.m_used.parse() {
                Ok(v) => v,
                Err(_) => {
                    bad.push(format!("chain {i}: unparsable m_used"));
                    continue;
                }
            };
            let q: BigInt = match st.q.parse() {
                Ok(v) => v,
                Err(_) => {
                    bad.push(format!("chain {i}: unparsable q"));
                    continue;
                }
            };
            if q <= &m * BigInt::from(6) {
                bad.push(format!("chain {i}: q does not exceed 6M"));
            }
            if let Ok(eps) = st.epsilon.to_ball() {
                if eps.sign_of() != crate::certreal::Sign::Positive {
                    bad.push(format!("chain {i}: epsilon not certifiably positive"));
                }
            }
            if let (Ok(t), Ok(kb)) = (st.t_bound.to_ball(), st.k_bound.parse::<BigInt>()) {
                if strict_int_below_dyadic(&t.hi().mul_pow2(1)) != kb {
                    bad.push(format!("chain {i}: k_bound inconsistent with t_bound"));
                }
            }
        }
    }
    // recompute every search record exactly
    let mut narayana = NarayanaSequence::new();
    for r in cert.search.iter().chain(cert.search_filtered.iter()) {
        let p = match kpell(r.k, r.n) {
            Ok(v) => v,
            Err(e) => {
                bad.push(format!("search record ({}, {}, {}): {e}", r.n, r.k, r.m));
                continue;
            }
        };
        let nv = narayana.term(r.m as u64);
        if p != nv || p.to_string() != r.value {
            bad.push(format!("search record ({}, {}, {}) does not re-verify", r.n, r.k, r.m));
        }
        if classify(r.n, r.k, r.m) != r.kind {
            bad.push(format!("search record ({}, {}, {}) misclassified", r.n, r.k, r.m));
        }
    }
    if cert.verdict.theorem_holds {
        if !cert.diagnostics.is_empty() {
            bad.push("verdict true with non-empty diagnostics".into());
        }
        for c in cert.bound_derivation.iter().chain(cert.trivial_ranges.iter()) {
            if !c.passed {
                bad.push(format!("verdict true but check {} failed", c.name));
            }
        }
        if cert.verdict.solution_set != SolutionSet::expected() {
            bad.push("verdict true with unexpected solution set".into());
        }
        if cert.small_k.len() != 359 {
            bad.push("verdict true without full small-k coverage".into());
        }
        match &cert.large_k {
            Some(lk) if lk.chain.len() == 3 => {
                if lk.chain[2].k_bound.parse::<BigInt>().map(|b| b >= BigInt::from(361)).unwrap_or(true) {
                    bad.push("verdict true but the chain does not close".into());
                }
            }
            _ => bad.push("verdict true without a complete chain".into()),
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certreal::PrecisionPolicy;

    #[test]
    fn bound_derivation_all_pass() {
        let checks = derive_global_bound_checks(192);
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.passed, "{} failed: {}", c.name, c.detail);
        }
    }

    #[test]
    fn trivial_ranges_all_pass() {
        for c in trivial_range_checks() {
            assert!(c.passed, "{} failed", c.name);
        }
    }

    #[test]
    fn search_only_run_is_consistent() {
        let cfg = RunConfig { mode: RunMode::SearchOnly, ..Default::default() };
        let cert = verify_theorem(&cfg);
        assert!(!cert.verdict.theorem_holds); // partial mode cannot establish it
        assert_eq!(cert.search_filtered.len(), 1);
        assert_eq!(cert.search_filtered[0].value, "88");
        assert!(cert.fibonacci_window.as_ref().unwrap().empty);
        assert!(cert.diagnostics.is_empty());
        assert!(validate_certificate(&cert).is_empty());
    }

    #[test]
    fn small_k_partial_run() {
        let cfg = RunConfig {
            mode: RunMode::SmallK,
            k_lo: 2,
            k_hi: 6,
            ..Default::default()
        };
        let cert = verify_theorem(&cfg);
        assert_eq!(cert.small_k.len(), 5);
        assert!(cert.small_k_max_bound.unwrap() <= 329);
        assert!(cert.diagnostics.is_empty());
        assert!(validate_certificate(&cert).is_empty());
    }

    #[test]
    fn round_trip_bytes_identical() {
        let cfg = RunConfig {
            mode: RunMode::SmallK,
            k_lo: 2,
            k_hi: 3,
            ..Default::default()
        };
        let cert = verify_theorem(&cfg);
        let json = certificate_to_canonical_json(&cert);
        let back = load_certificate(&json).unwrap();
        let json2 = certificate_to_canonical_json(&back);
        assert_eq!(json, json2);
        assert_eq!(cert, back);
    }

    #[test]
    fn determinism_modulo_timestamp() {
        let cfg = RunConfig {
            mode: RunMode::SmallK,
            k_lo: 2,
            k_hi: 4,
            ..Default::default()
        };
        let mut a = verify_theorem(&cfg);
        let mut b = verify_theorem(&cfg);
        a.metadata.timestamp_unix = 0;
        b.metadata.timestamp_unix = 0;
        assert_eq!(certificate_to_canonical_json(&a), certificate_to_canonical_json(&b));
    }

    #[test]
    fn tiny_precision_cap_surfaces_in_diagnostics() {
        let cfg = RunConfig {
            mode: RunMode::LargeK,
            policy: PrecisionPolicy::new(256, 256),
            ..Default::default()
        };
        let cert = verify_theorem(&cfg);
        assert!(cert
            .diagnostics
            .iter()
            .any(|d| d.contains("precision escalation exceeded")));
    }
}
