use num_integer::Integer;

use crate::dof::{self, chain_order, ScheduleMode, SchemeId};
use crate::error::{Error, Result};
use crate::scenario::{validate_scenario, Coherence, Scenario};

use super::{
    EstimationEvent, FramePlan, Link, LinkTiming, PilotColumn, RelayBudget, SlotRole,
};

pub const DEFAULT_MAX_SLOTS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanOptions {
    /// Use the product of the coherence times instead of their lcm.
    pub product_form: bool,
    pub max_slots: u64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            product_form: false,
            max_slots: DEFAULT_MAX_SLOTS,
        }
    }
}

/// Plan for the activation the DoF optimizer picks.
pub fn build_frame_plan(s: &Scenario, scheme: &SchemeId) -> Result<FramePlan> {
    let best = dof::dof(s, scheme)?;
    build_frame_plan_with(s, scheme, &best.n_r_opt, &PlanOptions::default())
}

/// Plan for a fixed per-relay activation.
pub fn build_frame_plan_with(
    s: &Scenario,
    scheme: &SchemeId,
    activation: &[u32],
    opts: &PlanOptions,
) -> Result<FramePlan> {
    validate_scenario(s)?;
    scheme.check(s)?;
    if activation.len() != s.relays.len() {
        return Err(Error::SchemeMismatch(format!(
            "activation lists {} relays, scenario has {}",
            activation.len(),
            s.relays.len()
        )));
    }
    let active: Vec<u32> = match scheme {
        SchemeId::DirectLink => vec![0; s.relays.len()],
        _ => activation.to_vec(),
    };
    if !scheme.is_multi_relay() && active.iter().skip(1).any(|&n| n > 0) {
        return Err(Error::SchemeMismatch(format!("{scheme} activates relay 1 only")));
    }
    let selected: Vec<usize> = (0..active.len()).filter(|&i| active[i] > 0).collect();
    if !selected.is_empty() && s.n_s + active.iter().sum::<u32>() > s.n_d {
        return Err(Error::Infeasible(format!("{scheme} with activation {active:?}")));
    }

    let mut links = vec![LinkTiming {
        link: Link::SourceDestination,
        coherence: s.t_sd,
        offset: 0,
    }];
    for &i in &selected {
        let r = &s.relays[i];
        links.push(LinkTiming {
            link: Link::SourceRelay(i),
            coherence: r.t_sr,
            offset: r.offset_sr,
        });
        links.push(LinkTiming {
            link: Link::RelayDestination(i),
            coherence: r.t_rd,
            offset: r.offset_rd,
        });
    }
    let period = super_interval(&links, opts)?;

    let layout = Layout {
        s,
        scheme,
        active: &active,
        chain: chain_order(s, &selected),
        links,
    };
    let mut plan = layout.build(period, &|_| true)?;

    if let (SchemeId::Scheduled(_), [n, ..]) = (scheme, active.as_slice()) {
        if *n > 0 {
            let d2 = plan.relay_budget[0].transmittable;
            let d3 = plan.relay_budget[0].decodable;
            if d2 > d3 {
                let g = d2.gcd(&d3).max(1);
                let (off, on) = ((d2 - d3) / g, d3 / g);
                let length = period as u128 * (off + on) as u128;
                if length > opts.max_slots as u128 {
                    return Err(Error::SuperIntervalTooLong {
                        length,
                        cap: opts.max_slots,
                    });
                }
                let is_on = move |t: u64| t / period >= off;
                plan = layout.build(length as u64, &is_on)?;
                plan.notes.push(format!(
                    "relay silent for {off} and active for {on} periods of {period} slots"
                ));
                if matches!(scheme, SchemeId::Scheduled(ScheduleMode::General))
                    && s.relays[0].offset_rd != 0
                {
                    plan.notes.push("relay-destination blocks straddle phase boundaries".into());
                }
            }
        }
    }
    Ok(plan)
}

fn super_interval(links: &[LinkTiming], opts: &PlanOptions) -> Result<u64> {
    let mut acc: u128 = 1;
    for l in links {
        if let Coherence::Finite(t) = l.coherence {
            let t = t as u128;
            acc = if opts.product_form {
                acc.saturating_mul(t)
            } else {
                acc.lcm(&t)
            };
            if acc > opts.max_slots as u128 {
                return Err(Error::SuperIntervalTooLong {
                    length: acc,
                    cap: opts.max_slots,
                });
            }
        }
    }
    Ok(acc as u64)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Occupant {
    Free,
    SourcePilot(usize),
    RelayPilot(usize, usize),
}

struct Layout<'a> {
    s: &'a Scenario,
    scheme: &'a SchemeId,
    active: &'a [u32],
    chain: Vec<usize>,
    links: Vec<LinkTiming>,
}

impl Layout<'_> {
    fn timing(&self, link: Link) -> LinkTiming {
        *self.links.iter().find(|l| l.link == link).expect("link of a selected relay")
    }

    /// Slots of cyclic block `b` of `link`, in time order from the block start.
    fn block_slots(&self, link: &LinkTiming, b: u64, len: u64) -> impl Iterator<Item = u64> {
        let t = link.coherence.finite().expect("finite link");
        let start = link.offset + b * t;
        (0..t).map(move |k| (start + k) % len)
    }

    fn build(&self, len: u64, is_on: &dyn Fn(u64) -> bool) -> Result<FramePlan> {
        let s = self.s;
        let k = s.relays.len();
        let mut m = if self.chain.is_empty() { s.direct_streams() } else { s.n_s } as usize;
        let mut occ = vec![Occupant::Free; len as usize];
        let mut events = Vec::new();
        let mut notes = Vec::new();
        if self.chain.is_empty() && !s.t_sd.at_least(m as u64) {
            notes.push(format!("t_sd = {} cannot hold {m} training slots; source stays silent", s.t_sd));
            m = 0;
        }

        // Source training at the start of every source–destination block.
        if let (Coherence::Finite(t), true) = (s.t_sd, m > 0) {
            if (t as usize) < m {
                return Err(Error::Infeasible(format!(
                    "{}: t_sd = {t} cannot hold {m} training slots",
                    self.scheme
                )));
            }
            for b in 0..len / t {
                let slots: Vec<u64> = (0..m as u64).map(|c| b * t + c).collect();
                for (c, &slot) in slots.iter().enumerate() {
                    occ[slot as usize] = Occupant::SourcePilot(c);
                }
                events.push(EstimationEvent {
                    link: Link::SourceDestination,
                    block: b,
                    slots,
                });
            }
        }

        // Relay training in every relay–destination block that overlaps the
        // relay's active phase.
        let mut relocated = 0usize;
        let mut selected: Vec<usize> = self.chain.clone();
        selected.sort_unstable();
        for &i in &selected {
            let n = self.active[i] as usize;
            let rd = self.timing(Link::RelayDestination(i));
            let Coherence::Finite(t) = rd.coherence else {
                continue;
            };
            for b in 0..len / t {
                let slots: Vec<u64> = self.block_slots(&rd, b, len).collect();
                if !slots.iter().any(|&x| is_on(x)) {
                    continue;
                }
                let chosen = match preferred_relay_slots(&occ, &slots, m, n) {
                    Some(c) => c,
                    None => {
                        let free: Vec<u64> = slots
                            .iter()
                            .copied()
                            .filter(|&x| occ[x as usize] == Occupant::Free)
                            .take(n)
                            .collect();
                        if free.len() < n {
                            return Err(Error::Infeasible(format!(
                                "{}: relay {} block {b} has no room for {n} training slots",
                                self.scheme,
                                i + 1
                            )));
                        }
                        if slots.iter().any(|&x| matches!(occ[x as usize], Occupant::SourcePilot(_))) {
                            relocated += 1;
                        }
                        free
                    }
                };
                for (a, &slot) in chosen.iter().enumerate() {
                    occ[slot as usize] = Occupant::RelayPilot(i, a);
                }
                events.push(EstimationEvent {
                    link: Link::RelayDestination(i),
                    block: b,
                    slots: chosen,
                });
            }
        }
        if relocated > 0 {
            notes.push(format!(
                "{relocated} relay training group(s) could not follow the source training inside their block and use the first free slots after the block boundary"
            ));
        }

        // Superposition levels: a pilot column is a plain pilot for the
        // leading relays whose source–relay block it opens.
        let depth = self.chain.len();
        let mut anchor = vec![vec![false; len as usize]; depth];
        for (j, &i) in self.chain.iter().enumerate() {
            let sr = self.timing(Link::SourceRelay(i));
            let Coherence::Finite(t) = sr.coherence else {
                continue;
            };
            for b in 0..len / t {
                let mut seen = vec![false; m];
                let mut slots = Vec::new();
                for x in self.block_slots(&sr, b, len) {
                    if let Occupant::SourcePilot(c) = occ[x as usize] {
                        if !seen[c] {
                            seen[c] = true;
                            anchor[j][x as usize] = true;
                            slots.push(x);
                        }
                    }
                }
                if !slots.is_empty() {
                    events.push(EstimationEvent {
                        link: Link::SourceRelay(i),
                        block: b,
                        slots,
                    });
                }
            }
        }
        let mut source_pilot = vec![None; len as usize];
        for x in 0..len as usize {
            if let Occupant::SourcePilot(c) = occ[x] {
                let level = (0..depth).take_while(|&j| anchor[j][x]).count();
                if (level..depth).any(|j| anchor[j][x]) {
                    return Err(Error::SchemeMismatch(format!(
                        "source–relay blocks of relays {:?} do not nest",
                        self.chain.iter().map(|i| i + 1).collect::<Vec<_>>()
                    )));
                }
                source_pilot[x] = Some(PilotColumn { column: c, level });
            }
        }

        // Relay budgets and per-slot relay streams.
        let mut relay_streams = vec![vec![0u32; k]; len as usize];
        let mut relay_active = vec![vec![false; k]; len as usize];
        let mut budget = vec![RelayBudget::default(); k];
        let mut symbols_per_carrier = vec![0u32; k];
        for (j, &i) in self.chain.iter().enumerate() {
            let n = self.active[i] as u64;
            symbols_per_carrier[i] = s.n_s_star(i);
            let carriers = source_pilot.iter().filter(|p| p.is_some_and(|p| p.level == j)).count();
            let data: Vec<usize> = (0..len as usize)
                .filter(|&x| occ[x] == Occupant::Free && is_on(x as u64))
                .collect();
            for (x, row) in relay_active.iter_mut().enumerate() {
                row[i] = is_on(x as u64);
            }
            let decodable = s.n_s_star(i) as u64 * carriers as u64;
            let transmittable = n * data.len() as u64;
            let forwarded = decodable.min(transmittable);
            let mut left = forwarded;
            for &x in &data {
                let q = n.min(left);
                relay_streams[x][i] = q as u32;
                left -= q;
            }
            budget[i] = RelayBudget {
                decodable,
                transmittable,
                forwarded,
            };
        }

        let mut roles = vec![vec![SlotRole::Silent; k + 1]; len as usize];
        let mut relay_pilot_antenna = vec![None; len as usize];
        let mut stream_counts = vec![0u32; len as usize];
        for x in 0..len as usize {
            match occ[x] {
                Occupant::SourcePilot(_) => {
                    let level = source_pilot[x].map_or(depth, |p| p.level);
                    roles[x][0] = if level == depth {
                        SlotRole::SourcePilot
                    } else {
                        SlotRole::SuperposedPilot
                    };
                }
                Occupant::RelayPilot(i, a) => {
                    roles[x][i + 1] = SlotRole::RelayPilot(i);
                    relay_pilot_antenna[x] = Some(a);
                }
                Occupant::Free if m == 0 => {}
                Occupant::Free => {
                    roles[x][0] = SlotRole::Data;
                    let mut streams = m as u32;
                    for i in 0..k {
                        if relay_streams[x][i] > 0 {
                            roles[x][i + 1] = SlotRole::Data;
                            streams += relay_streams[x][i];
                        }
                    }
                    stream_counts[x] = streams;
                }
            }
        }

        Ok(FramePlan {
            scheme: *self.scheme,
            activation: self.active.to_vec(),
            chain: self.chain.clone(),
            source_streams: m as u32,
            symbols_per_carrier,
            super_interval: len,
            roles,
            source_pilot,
            relay_pilot_antenna,
            relay_streams,
            relay_active,
            stream_counts,
            relay_budget: budget,
            estimation_events: events,
            links: self.links.clone(),
            notes,
        })
    }
}

/// Slots right after the source training group inside this block, past any
/// training already placed there by other relays.
fn preferred_relay_slots(occ: &[Occupant], block: &[u64], m: usize, n: usize) -> Option<Vec<u64>> {
    let at = |k: usize| occ[block[k] as usize];
    let start = (0..block.len()).find(|&k| {
        k + m <= block.len() && (0..m).all(|c| at(k + c) == Occupant::SourcePilot(c))
    })?;
    let mut pos = start + m;
    while pos < block.len() && matches!(at(pos), Occupant::RelayPilot(..)) {
        pos += 1;
    }
    if pos + n > block.len() || (pos..pos + n).any(|k| at(k) != Occupant::Free) {
        return None;
    }
    Some(block[pos..pos + n].to_vec())
}
