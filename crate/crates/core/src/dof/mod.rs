//! Exact achievable-DoF evaluation with optimization over relay activation.

mod accounting;
mod printed;
mod scheme;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::scenario::{validate_scenario, Coherence, Scenario};

pub use accounting::{direct_value, Evaluation, ScheduleTerms};
pub(crate) use accounting::chain_order;
pub use printed::{crosscheck_printed, printed_value, CrosscheckRow};
pub use scheme::{ScheduleMode, SchemeId, SchemeKind, SlowLayout, StaticLayout};

/// Optimized DoF of one scheme together with what achieved it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DofBreakdown {
    pub total: Rational,
    pub source_part: Rational,
    /// One entry per relay of the scenario.
    pub relay_parts: Vec<Rational>,
    /// Activated transmit antennas per relay; 0 means silent.
    pub n_r_opt: Vec<u32>,
    /// 1-based indices of the relays that transmit.
    pub selected_relays: Vec<usize>,
    pub scheme_id: SchemeId,
    pub consistency_notes: Vec<String>,
}

/// Largest useful activation of relay `i`: `min(N_S, N_D − N_S, n_R)`.
pub fn max_activation(s: &Scenario, i: usize) -> u32 {
    s.n_s.min(s.n_d.saturating_sub(s.n_s)).min(s.relays[i].tx_max())
}

/// Every activation the optimizer considers, in tie-break order.
pub fn activations(s: &Scenario, scheme: &SchemeId) -> Vec<Vec<u32>> {
    let k = s.relays.len();
    match scheme {
        SchemeId::DirectLink => vec![vec![0; k]],
        SchemeId::TwoRelay { .. } | SchemeId::MultiRelay => subset_activations(s),
        _ if k == 0 => vec![Vec::new()],
        _ => (0..=max_activation(s, 0))
            .map(|n| {
                let mut v = vec![0; k];
                v[0] = n;
                v
            })
            .collect(),
    }
}

/// Empty set first, then by subset size, subsets lexicographically, counts ascending.
fn subset_activations(s: &Scenario) -> Vec<Vec<u32>> {
    let k = s.relays.len();
    let budget = s.n_d.saturating_sub(s.n_s);
    let mut out = vec![vec![0; k]];
    for size in 1..=k {
        for subset in combinations(k, size) {
            let limits: Vec<u32> = subset.iter().map(|&i| s.n_s.min(s.relays[i].tx_max())).collect();
            if limits.contains(&0) {
                continue;
            }
            let mut counts = vec![1u32; size];
            'odometer: loop {
                if counts.iter().sum::<u32>() <= budget {
                    let mut v = vec![0; k];
                    for (&i, &c) in subset.iter().zip(&counts) {
                        v[i] = c;
                    }
                    out.push(v);
                }
                // Last position turns fastest.
                let mut pos = size;
                loop {
                    if pos == 0 {
                        break 'odometer;
                    }
                    pos -= 1;
                    if counts[pos] < limits[pos] {
                        counts[pos] += 1;
                        counts[pos + 1..].iter_mut().for_each(|c| *c = 1);
                        break;
                    }
                }
            }
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// DoF of `scheme` at a fixed activation; `Ok(None)` when the activation is infeasible.
pub fn evaluate(s: &Scenario, scheme: &SchemeId, n_r: &[u32]) -> Result<Option<Evaluation>> {
    validate_scenario(s)?;
    scheme.check(s)?;
    if n_r.len() != s.relays.len() {
        return Err(Error::SchemeMismatch(format!(
            "activation lists {} relays, scenario has {}",
            n_r.len(),
            s.relays.len()
        )));
    }
    Ok(accounting::evaluate_unchecked(s, scheme, n_r))
}

/// Maximizes `scheme` over relay activations and annotates the result.
pub fn dof(s: &Scenario, scheme: &SchemeId) -> Result<DofBreakdown> {
    let violations = validate_scenario(s)?;
    scheme.check(s)?;
    let candidates = activations(s, scheme);
    let static_family = matches!(scheme, SchemeId::StaticRelay(_));

    let mut best: Option<(Vec<u32>, Evaluation)> = None;
    let mut relay_off: Option<Evaluation> = None;
    for n in candidates {
        let Some(e) = accounting::evaluate_unchecked(s, scheme, &n) else {
            continue;
        };
        // With a static source–relay link the relay is assumed active; relay-off
        // is only kept as a fallback.
        if static_family && n.iter().all(|&k| k == 0) {
            relay_off = Some(e);
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| e.total > b.total) {
            best = Some((n, e));
        }
    }

    let mut notes = Vec::new();
    if static_family {
        match (&best, relay_off) {
            (None, Some(off)) => {
                notes.push("no relay activation fits the blocks; relay left silent".to_string());
                best = Some((vec![0; s.relays.len()], off));
            }
            (Some((_, b)), Some(off)) if off.total > b.total => notes.push(format!(
                "relay silent would give {} > {}; the scheme keeps the relay active",
                off.total, b.total
            )),
            _ => {}
        }
    }
    let (n_opt, e) = best.ok_or_else(|| Error::Infeasible(scheme.to_string()))?;

    notes.extend(scheme_notes(s, scheme, &n_opt, &e)?);
    for v in violations {
        notes.push(format!("scenario constraint not met: {}", v.text));
    }

    Ok(DofBreakdown {
        total: e.total,
        source_part: e.source_part,
        relay_parts: e.relay_parts,
        selected_relays: (0..n_opt.len()).filter(|&i| n_opt[i] > 0).map(|i| i + 1).collect(),
        n_r_opt: n_opt,
        scheme_id: *scheme,
        consistency_notes: notes,
    })
}

fn scheme_notes(s: &Scenario, scheme: &SchemeId, n: &[u32], e: &Evaluation) -> Result<Vec<String>> {
    let mut notes = Vec::new();
    let m = s.direct_streams() as u64;
    if s.t_sd.finite().is_some_and(|t| t < m) {
        notes.push(format!("t_sd shorter than the {m} training slots; source-only DoF clamped to 0"));
    }
    match scheme {
        SchemeId::Identical => notes.push("relay provides no gain".to_string()),
        SchemeId::Scheduled(mode) => {
            if let Some(t) = accounting::schedule_terms(s, *mode, n[0]) {
                if n[0] > 0 && t.d2 > t.d3 {
                    notes.push(format!(
                        "relay silent for (d2-d3)/d2 = {} and active for d3/d2 = {} of the coherence intervals",
                        (t.d2 - t.d3) / t.d2,
                        t.d3 / t.d2
                    ));
                } else {
                    notes.push("d2 <= d3: relay active in every interval".to_string());
                }
            }
            if *mode == ScheduleMode::General {
                if let Some(alt) = printed::general_schedule_with_rd_surplus(s, n[0]) {
                    notes.push(format!(
                        "decodable surplus taken as N_S*·N_S(1/t_sd - 1/t_sr); the 1/t_rd variant gives {alt}"
                    ));
                }
            }
        }
        SchemeId::TwoRelay { .. } => {
            for i in 0..2 {
                let mut best: Option<(u32, Rational)> = None;
                for k in 1..=s.n_s.min(s.relays[i].tx_max()) {
                    let mut act = vec![0; 2];
                    act[i] = k;
                    if let Some(v) = accounting::evaluate_unchecked(s, scheme, &act) {
                        if best.is_none_or(|(_, b)| v.total > b) {
                            best = Some((k, v.total));
                        }
                    }
                }
                if let Some((k, v)) = best {
                    notes.push(format!("relay {} alone: {v} with n_R({})={k}", i + 1, i + 1));
                }
            }
        }
        _ => {}
    }
    let general = matches!(scheme, SchemeId::Scheduled(ScheduleMode::General));
    let printed = match general {
        true => None,
        false => printed::printed_value(s, scheme, n.first().copied().unwrap_or(0))?,
    };
    if let Some(p) = printed {
        if p != e.total {
            notes.push(format!(
                "printed closed form gives {p} at n_r={}, accounting gives {}",
                n[0], e.total
            ));
        }
    }
    Ok(notes)
}

pub fn dof_direct_link(s: &Scenario) -> Result<DofBreakdown> {
    dof(s, &SchemeId::DirectLink)
}

pub fn dof_identical(s: &Scenario) -> Result<DofBreakdown> {
    dof(s, &SchemeId::Identical)
}

/// Static source–relay link (`T_SR = ∞`).
pub fn dof_static_relay(s: &Scenario, layout: StaticLayout) -> Result<DofBreakdown> {
    dof(s, &SchemeId::StaticRelay(layout))
}

/// Source–relay link with `T_SR = K·T_SD`.
pub fn dof_slow_relay(s: &Scenario, layout: SlowLayout) -> Result<DofBreakdown> {
    dof(s, &SchemeId::SlowRelay(layout))
}

pub fn dof_scheduling(s: &Scenario, mode: ScheduleMode) -> Result<DofBreakdown> {
    dof(s, &SchemeId::Scheduled(mode))
}

pub fn dof_arbitrary(s: &Scenario) -> Result<DofBreakdown> {
    dof(s, &SchemeId::Arbitrary)
}

pub fn dof_two_relay(s: &Scenario, k1: u64, k2: u64) -> Result<DofBreakdown> {
    dof(s, &SchemeId::TwoRelay { k1, k2 })
}

/// Best relay subset and activation; the empty subset is the direct link.
pub fn dof_multi_relay(s: &Scenario) -> Result<DofBreakdown> {
    dof(s, &SchemeId::MultiRelay)
}

/// Whether the static-link scheme meets the `min(N_S + n_R, N_D)`-stream
/// bound, and that bound's value `N_D*(1 − N_D*/T_SD)`.
pub fn check_optimality(s: &Scenario) -> Result<(bool, Rational)> {
    validate_scenario(s)?;
    let r = s
        .relays
        .first()
        .ok_or_else(|| Error::precondition("check_optimality", "one relay"))?;
    let t = match (s.t_sd, r.t_sr, r.t_rd) {
        (Coherence::Finite(a), Coherence::Infinite, Coherence::Finite(b)) if a == b => a as i128,
        _ => return Err(Error::precondition("check_optimality", "t_sr = inf and finite t_sd = t_rd")),
    };
    let nd_star = s.n_d_star(0) as i128;
    let ns = s.n_s as i128;
    let holds = (nd_star - ns) * (t - nd_star) <= s.n_s_star(0) as i128 * ns;
    Ok((holds, Rational::new(nd_star * (t - nd_star), t)))
}
