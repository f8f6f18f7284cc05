mod common;

use proptest::prelude::*;
use relay_dof::dof::{dof, SchemeId, SchemeKind, StaticLayout};
use relay_dof::plan::{accounting_dof, build_frame_plan, validate_plan};
use relay_dof::sim::{run_end_to_end, sample_channels, Noise, Payload, SymbolKind};
use relay_dof::{Coherence, Rational, Scenario};

/// Decodes every symbol of a noiseless run and checks the count per
/// super-interval against the plan's own accounting.
fn noiseless_round_trip(s: &Scenario, scheme: &SchemeId, seed: u64) -> Result<(), String> {
    let plan = build_frame_plan(s, scheme).map_err(|e| e.to_string())?;
    let violations = validate_plan(&plan);
    if !violations.is_empty() {
        return Err(format!("{violations:?}"));
    }
    let intervals = 3;
    let ch = sample_channels(s, seed, plan.super_interval * intervals as u64);
    let payload = Payload::random(&plan, intervals, seed, SymbolKind::ConstantModulus);
    let out = run_end_to_end(s, &plan, &payload, Noise::Off, &ch).map_err(|e| e.to_string())?;
    let err = out.max_relative_error();
    if err > 1e-9 || out.singular != 0 {
        return Err(format!("error {err:e}, {} singular", out.singular));
    }
    let expected = accounting_dof(&plan) * Rational::from_int(plan.super_interval as i128);
    let got = Rational::from_int(out.intervals[intervals - 1].delivered as i128);
    if got != expected {
        return Err(format!("delivered {got}, accounting says {expected}"));
    }
    Ok(())
}

#[test]
fn json_to_symbols() {
    let text = r#"{
        "antennas": {"n_s": 2, "n_r_rx": 2, "n_d": 3},
        "coherence": {"t_sd": 8, "t_sr": "inf", "t_rd": 8, "offset_rd": 4}
    }"#;
    let s = Scenario::from_json(text).unwrap();
    let scheme = SchemeKind::StaticEqual.resolve(&s).unwrap();
    assert_eq!(dof(&s, &scheme).unwrap().total, Rational::new(7, 4));
    noiseless_round_trip(&s, &scheme, 3).unwrap();
}

#[test]
fn every_grid_scheme_decodes_noiselessly() {
    let mut checked = 0;
    for (i, (s, scheme)) in common::scheme_grid().into_iter().enumerate().step_by(3) {
        // Long super-intervals only repeat what the short ones cover, slowly.
        if build_frame_plan(&s, &scheme).map_or(true, |p| p.super_interval > 400) {
            continue;
        }
        checked += 1;
        if let Err(e) = noiseless_round_trip(&s, &scheme, i as u64) {
            panic!("{scheme} on {}: {e}", s.to_json());
        }
    }
    assert!(checked >= 50, "only {checked} schemes ran");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_static_scenarios_decode(
        n_s in 1u32..4,
        extra in 1u32..4,
        n_r in 1u32..4,
        t in 4u64..16,
        offset in 0u64..16,
        seed in any::<u64>(),
    ) {
        let mut s = Scenario::simple(n_s, n_r, n_s + extra, Coherence::Finite(t), Coherence::Infinite, Coherence::Finite(t));
        s.relays[0].offset_rd = offset % t;
        let scheme = SchemeId::StaticRelay(StaticLayout::EqualTsdTrd);
        prop_assume!(dof(&s, &scheme).is_ok());
        prop_assert_eq!(noiseless_round_trip(&s, &scheme, seed), Ok(()));
    }
}
