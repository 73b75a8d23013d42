//! Forced-failure paths of the full replay: a search box too small for the
//! derived bounds and a precision cap too low for the k-independent chain
//! must both surface in the diagnostics and flip the verdict.

use pnp_core::certreal::PrecisionPolicy;
use pnp_core::pipeline::{validate_certificate, verify_theorem, RunConfig, RunMode, SearchBox};

#[test]
fn shrunk_box_and_low_cap_flip_the_verdict() {
    let cfg = RunConfig {
        policy: PrecisionPolicy::new(256, 512),
        mode: RunMode::Full,
        search_box: Some(SearchBox { k_lo: 2, k_hi: 360, n_lo: 4, n_hi: 5, m_lo: 3, m_hi: 329 }),
        ..Default::default()
    };
    let cert = verify_theorem(&cfg);
    assert!(!cert.verdict.theorem_holds);
    assert!(
        cert.diagnostics.iter().any(|d| d.contains("search-coverage")),
        "coverage audit must name the failing stage: {:?}",
        cert.diagnostics
    );
    assert!(
        cert.diagnostics.iter().any(|d| d.contains("precision escalation exceeded")),
        "the capped chain must surface the precision failure: {:?}",
        cert.diagnostics
    );
    // structural invariants still hold for the failed certificate
    let violations = validate_certificate(&cert);
    assert!(violations.is_empty(), "{violations:?}");
}
