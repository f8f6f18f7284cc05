use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::scenario::Coherence;

use super::{FramePlan, Link, SlotRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PlanInvariant {
    PilotExclusivity,
    Estimation,
    Causality,
    StreamCount,
    PilotBudget,
}

impl fmt::Display for PlanInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanInvariant::PilotExclusivity => "pilot exclusivity",
            PlanInvariant::Estimation => "estimation",
            PlanInvariant::Causality => "causality",
            PlanInvariant::StreamCount => "stream count",
            PlanInvariant::PilotBudget => "pilot budget",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanViolation {
    pub slot: Option<u64>,
    pub invariant: PlanInvariant,
    pub detail: String,
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slot {
            Some(t) => write!(f, "slot {t}: {}: {}", self.invariant, self.detail),
            None => write!(f, "{}: {}", self.invariant, self.detail),
        }
    }
}

/// Every broken plan invariant; empty for a consistent plan.
pub fn validate_plan(p: &FramePlan) -> Vec<PlanViolation> {
    let mut out = Vec::new();
    let mut push = |slot, invariant, detail: String| {
        out.push(PlanViolation {
            slot,
            invariant,
            detail,
        })
    };
    let len = p.super_interval as usize;
    let k = p.activation.len();
    if p.roles.len() != len || p.roles.iter().any(|r| r.len() != k + 1) {
        push(None, PlanInvariant::StreamCount, "role table does not match the plan size".into());
        return out;
    }

    for (t, row) in p.roles.iter().enumerate() {
        if let Some(tx) = row.iter().position(|r| r.is_pilot()) {
            for (other, role) in row.iter().enumerate() {
                if other != tx && *role != SlotRole::Silent {
                    push(
                        Some(t as u64),
                        PlanInvariant::PilotExclusivity,
                        format!("{} transmits {} next to a pilot", tx_name(other), role.name()),
                    );
                }
            }
        }
        for i in 0..k {
            let q = p.relay_streams[t][i];
            let sends = row[i + 1] == SlotRole::Data;
            if sends != (q > 0) {
                push(
                    Some(t as u64),
                    PlanInvariant::StreamCount,
                    format!("relay {} role {} with {q} streams", i + 1, row[i + 1].name()),
                );
            }
            if q > p.activation[i] {
                push(
                    Some(t as u64),
                    PlanInvariant::StreamCount,
                    format!("relay {} sends {q} streams on {} antennas", i + 1, p.activation[i]),
                );
            }
            if q > 0 && !p.relay_active[t][i] {
                push(
                    Some(t as u64),
                    PlanInvariant::Causality,
                    format!("relay {} sends data outside its active phase", i + 1),
                );
            }
        }
        let source = if row[0] == SlotRole::Data { p.source_streams } else { 0 };
        let expected = source + p.relay_streams[t].iter().sum::<u32>();
        if p.stream_counts[t] != expected {
            push(
                Some(t as u64),
                PlanInvariant::StreamCount,
                format!("{} streams recorded, {expected} scheduled", p.stream_counts[t]),
            );
        }
    }

    for (i, b) in p.relay_budget.iter().enumerate() {
        let sent: u64 = p.relay_streams.iter().map(|r| r[i] as u64).sum();
        if b.forwarded > b.decodable || sent > b.decodable {
            push(
                None,
                PlanInvariant::Causality,
                format!(
                    "relay {} forwards {} symbols but decoded only {} in the previous super-interval",
                    i + 1,
                    sent.max(b.forwarded),
                    b.decodable
                ),
            );
        }
        if b.forwarded > b.transmittable || sent != b.forwarded {
            push(
                None,
                PlanInvariant::Causality,
                format!("relay {} budget {} does not match {sent} sent symbols", i + 1, b.forwarded),
            );
        }
        if let Some(j) = p.chain.iter().position(|&c| c == i) {
            let carriers = p.carriers(j).count() as u64;
            let expected = p.symbols_per_carrier[i] as u64 * carriers;
            if b.decodable != expected {
                push(
                    None,
                    PlanInvariant::Causality,
                    format!(
                        "relay {} claims {} decodable symbols from {carriers} carriers",
                        i + 1,
                        b.decodable
                    ),
                );
            }
        }
    }

    check_estimation(p, &mut out);
    check_pilot_budget(p, &mut out);
    out
}

fn tx_name(tx: usize) -> String {
    if tx == 0 {
        "source".into()
    } else {
        format!("relay {tx}")
    }
}

/// Slots whose payload depends on the channel of `link`.
fn uses(p: &FramePlan, link: Link, t: usize) -> bool {
    match link {
        Link::SourceDestination => p.roles[t][0] == SlotRole::Data,
        Link::RelayDestination(i) => p.relay_streams[t][i] > 0,
        Link::SourceRelay(i) => match p.chain.iter().position(|&c| c == i) {
            Some(j) => p.source_pilot[t].is_some_and(|c| c.level == j),
            None => false,
        },
    }
}

fn check_estimation(p: &FramePlan, out: &mut Vec<PlanViolation>) {
    let len = p.super_interval;
    for timing in &p.links {
        if timing.coherence.is_infinite() {
            continue;
        }
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for e in p.estimation_events.iter().filter(|e| e.link == timing.link) {
            *counts.entry(e.block).or_default() += 1;
            if let Some(&bad) = e.slots.iter().find(|&&t| timing.cyclic_block(t, len) != e.block) {
                out.push(PlanViolation {
                    slot: Some(bad),
                    invariant: PlanInvariant::Estimation,
                    detail: format!("{:?} estimate for block {} lies outside it", timing.link, e.block),
                });
            }
        }
        let mut first_use: BTreeMap<u64, u64> = BTreeMap::new();
        for t in 0..len {
            if uses(p, timing.link, t as usize) {
                first_use.entry(timing.cyclic_block(t, len)).or_insert(t);
            }
        }
        for (&block, &t) in &first_use {
            let n = counts.get(&block).copied().unwrap_or(0);
            if n != 1 {
                out.push(PlanViolation {
                    slot: Some(t),
                    invariant: PlanInvariant::Estimation,
                    detail: format!("{:?} block {block} carries data and is estimated {n} times", timing.link),
                });
            }
        }
        for (&block, &n) in &counts {
            if n > 1 && !first_use.contains_key(&block) {
                out.push(PlanViolation {
                    slot: None,
                    invariant: PlanInvariant::Estimation,
                    detail: format!("{:?} block {block} is estimated {n} times", timing.link),
                });
            }
        }
    }
}

fn check_pilot_budget(p: &FramePlan, out: &mut Vec<PlanViolation>) {
    let len = p.super_interval;
    let source_pilots = p
        .roles
        .iter()
        .filter(|r| matches!(r[0], SlotRole::SourcePilot | SlotRole::SuperposedPilot))
        .count() as u64;
    let blocks = match p.link(Link::SourceDestination).map(|l| l.coherence) {
        Some(Coherence::Finite(t)) => len / t,
        _ => 0,
    };
    let expected = p.source_streams as u64 * blocks;
    if source_pilots != expected {
        out.push(PlanViolation {
            slot: None,
            invariant: PlanInvariant::PilotBudget,
            detail: format!("{source_pilots} source training slots, expected {expected}"),
        });
    }
    for (i, &n) in p.activation.iter().enumerate() {
        let Some(timing) = p.link(Link::RelayDestination(i)) else {
            continue;
        };
        let overlapping = match timing.coherence {
            Coherence::Infinite => 0,
            Coherence::Finite(_) => {
                let mut seen: Vec<u64> = (0..len)
                    .filter(|&t| p.relay_active[t as usize][i])
                    .map(|t| timing.cyclic_block(t, len))
                    .collect();
                seen.sort_unstable();
                seen.dedup();
                seen.len() as u64
            }
        };
        let pilots = p
            .roles
            .iter()
            .filter(|r| r[i + 1] == SlotRole::RelayPilot(i))
            .count() as u64;
        let expected = n as u64 * overlapping;
        if pilots != expected {
            out.push(PlanViolation {
                slot: None,
                invariant: PlanInvariant::PilotBudget,
                detail: format!("relay {} sends {pilots} training slots, expected {expected}", i + 1),
            });
        }
    }
}
