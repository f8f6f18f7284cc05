use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::plan::{FramePlan, Link, SlotRole};
use crate::scenario::Scenario;

use super::channel::{cn01, rng_for, ChannelRealization};
use super::linalg::{zf_decode, CMatrix, C64};
use super::{CVector, Payload};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// No noise, unit amplitudes.
    Off,
    /// Total transmit power per slot at each terminal, linear scale, with
    /// unit-variance receiver noise.
    Snr(f64),
}

/// Destination view of one data slot.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSlot {
    pub interval: usize,
    pub slot: u64,
    pub received: CVector,
    /// Estimated equivalent channel, source columns first, then the
    /// transmitting relays in index order.
    pub channel: CMatrix,
    pub source_cols: usize,
    /// `(relay, streams)` for every relay transmitting in this slot.
    pub relay_cols: Vec<(usize, usize)>,
}

/// Relay view of one superposed pilot carrying data for it.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierSlot {
    pub interval: usize,
    pub relay: usize,
    /// Estimated channel seen by the relay-bound symbols.
    pub channel: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalOutput {
    /// Estimates per source data slot; `None` where the slot was singular.
    pub source: Vec<Option<CVector>>,
    /// Per relay, estimates of the symbols it forwarded in this interval,
    /// which the source sent in the previous one.
    pub relay: Vec<Vec<Option<C64>>>,
    /// Symbols decoded at the destination in this interval.
    pub delivered: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEnd {
    pub intervals: Vec<IntervalOutput>,
    /// Relative error of every decoded symbol against what the source sent.
    pub errors: Vec<f64>,
    /// Slots or carriers whose channel was rank deficient; their symbols are
    /// excluded from `errors`.
    pub singular: usize,
    /// Blocks whose training fell outside the run and used the true channel.
    pub genie_estimates: usize,
    pub data_slots: Vec<DataSlot>,
    pub carriers: Vec<CarrierSlot>,
}

impl EndToEnd {
    pub fn max_relative_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

fn unit(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = C64::new(1.0, 0.0);
    v
}

/// Known entries filling the superposed column `c` below the relay-bound symbols.
fn pattern(ns: usize, decodable: usize, c: usize) -> CVector {
    CVector::from_fn(ns - decodable, |r, _| {
        C64::from_polar(1.0, std::f64::consts::TAU * ((r + 1) * c) as f64 / ns as f64)
    })
}

fn columns(cols: &[CVector], rows: usize) -> CMatrix {
    if cols.is_empty() {
        return CMatrix::zeros(rows, 0);
    }
    CMatrix::from_columns(cols)
}

struct Run<'a> {
    s: &'a Scenario,
    plan: &'a FramePlan,
    ch: &'a ChannelRealization,
    /// Source antennas in use.
    m: usize,
    depth: usize,
    a_s: f64,
    a_r: Vec<f64>,
    /// Index of each source data slot among the interval's data slots.
    data_index: Vec<Option<usize>>,
    /// Index of each carrying pilot among its relay's carriers.
    carrier_index: Vec<Option<usize>>,
    /// Relay symbols sent before each slot, per relay.
    sent_before: Vec<Vec<usize>>,
}

impl Run<'_> {
    fn sr_block(&self, i: usize, tau: u64) -> u64 {
        self.ch.link(Link::SourceRelay(i)).timing.global_block(tau)
    }
}

/// Runs `payload` through `plan` over `ch` and decodes at the destination.
///
/// Relays are silent in the first interval and forward in interval `k` the
/// symbols they decoded in interval `k − 1`.
pub fn run_end_to_end(
    s: &Scenario,
    plan: &FramePlan,
    payload: &Payload,
    noise: Noise,
    ch: &ChannelRealization,
) -> Result<EndToEnd> {
    payload.check(plan)?;
    let len = plan.super_interval;
    let intervals = payload.intervals.len();
    let horizon = len * intervals as u64;
    if ch.slots < horizon {
        return Err(Error::PayloadMismatch(format!(
            "channels cover {} slots, the run needs {horizon}",
            ch.slots
        )));
    }
    let k = plan.activation.len();
    let m = plan.source_streams as usize;
    let (a_s, a_r) = match noise {
        Noise::Off => (1.0, vec![1.0; k]),
        Noise::Snr(rho) => (
            (rho / m.max(1) as f64).sqrt(),
            plan.activation.iter().map(|&n| (rho / n.max(1) as f64).sqrt()).collect(),
        ),
    };
    let mut data_index = vec![None; len as usize];
    for (idx, t) in plan.source_data_slots().enumerate() {
        data_index[t as usize] = Some(idx);
    }
    let mut carrier_index = vec![None; len as usize];
    for j in 0..plan.chain.len() {
        for (idx, t) in plan.carriers(j).enumerate() {
            carrier_index[t as usize] = Some(idx);
        }
    }
    let sent_before = (0..k)
        .map(|i| {
            let mut acc = 0usize;
            (0..len as usize)
                .map(|t| {
                    let before = acc;
                    acc += plan.relay_streams[t][i] as usize;
                    before
                })
                .collect()
        })
        .collect();
    let run = Run {
        s,
        plan,
        ch,
        m,
        depth: plan.chain.len(),
        a_s,
        a_r,
        data_index,
        carrier_index,
        sent_before,
    };
    run.execute(payload, noise)
}

impl Run<'_> {
    fn execute(&self, payload: &Payload, noise: Noise) -> Result<EndToEnd> {
        let plan = self.plan;
        let s = self.s;
        let len = plan.super_interval;
        let k = plan.activation.len();
        let m = self.m;
        let ns = s.n_s as usize;
        let nd = s.n_d as usize;
        let intervals = payload.intervals.len();
        let mut noise_rng = rng_for(self.ch.seed, 1 << 32);
        let mut draw_noise = |n: usize| match noise {
            Noise::Off => CVector::zeros(n),
            Noise::Snr(_) => CVector::from_fn(n, |_, _| cn01(&mut noise_rng)),
        };

        // Source precoders at anchors, per (relay, source–relay block).
        let mut anchor_precoder: HashMap<(usize, u64), Vec<Option<CVector>>> = HashMap::new();
        // Relay observations at anchors.
        let mut anchor_seen: HashMap<(usize, u64), Vec<Option<CVector>>> = HashMap::new();
        // Source training precoders and destination observations per SD block.
        let mut sd_precoder: HashMap<u64, Vec<Option<CVector>>> = HashMap::new();
        let mut sd_seen: HashMap<u64, Vec<Option<CVector>>> = HashMap::new();
        let mut rd_seen: HashMap<(usize, u64), Vec<Option<CVector>>> = HashMap::new();
        // Relay decisions per interval: (estimate, sent) per symbol.
        let mut decoded: Vec<Vec<Vec<(C64, C64)>>> = vec![vec![Vec::new(); k]; intervals];
        let mut received: Vec<Option<CVector>> = vec![None; (len as usize) * intervals];
        let mut relay_sent: Vec<Vec<Vec<(C64, C64)>>> = vec![vec![Vec::new(); k]; intervals];

        let mut singular = 0usize;
        let mut genie = 0usize;
        let mut carriers_out = Vec::new();
        let sd_timing = self.ch.link(Link::SourceDestination).timing;

        for iv in 0..intervals {
            let pay = &payload.intervals[iv];
            for t in 0..len {
                let tau = iv as u64 * len + t;
                let tu = t as usize;
                let role = plan.roles[tu][0];
                let sd_block = sd_timing.global_block(tau);

                // Source transmission.
                let mut x_s: Option<CVector> = None;
                if let (true, Some(pc)) = (role.is_pilot(), plan.source_pilot[tu]) {
                    let c = pc.column;
                    let w = if pc.level == self.depth {
                        unit(m, c)
                    } else {
                        let i = plan.chain[pc.level];
                        let a = self.anchor_matrix(i, tau, &anchor_precoder);
                        let idx = self.carrier_index[tu].expect("carrier slot");
                        let dec = s.n_s_star(i) as usize;
                        let mut u = CVector::zeros(ns);
                        u.rows_mut(0, dec).copy_from(&pay.relay[i][idx]);
                        u.rows_mut(dec, ns - dec).copy_from(&pattern(ns, dec, c));
                        a * u * C64::from(1.0 / (ns as f64).sqrt())
                    };
                    for jj in 0..pc.level.min(self.depth) {
                        let i = plan.chain[jj];
                        let b = self.sr_block(i, tau);
                        anchor_precoder.entry((i, b)).or_insert_with(|| vec![None; m])[c] = Some(w.clone());
                    }
                    sd_precoder.entry(sd_block).or_insert_with(|| vec![None; m])[c] = Some(w.clone());
                    x_s = Some(w * C64::from(self.a_s));
                } else if role == SlotRole::Data {
                    let idx = self.data_index[tu].expect("data slot");
                    let mix = self.sd_mixing(sd_block, &sd_precoder);
                    x_s = Some(mix * &pay.source[idx] * C64::from(self.a_s));
                }

                // Relay transmissions.
                let mut y_d = CVector::zeros(nd);
                if let Some(x) = &x_s {
                    let h = self.ch.link(Link::SourceDestination).at(tau);
                    y_d += h.columns(0, m) * x;
                }
                for i in 0..k {
                    let n = plan.activation[i] as usize;
                    let h = || self.ch.link(Link::RelayDestination(i)).at(tau).columns(0, n).into_owned();
                    match plan.roles[tu][i + 1] {
                        SlotRole::RelayPilot(_) => {
                            let a = plan.relay_pilot_antenna[tu].expect("relay pilot antenna");
                            y_d += h().column(a) * C64::from(self.a_r[i]);
                        }
                        SlotRole::Data if iv > 0 => {
                            let q = plan.relay_streams[tu][i] as usize;
                            let start = self.sent_before[i][tu];
                            let syms = &decoded[iv - 1][i][start..start + q];
                            let x = CVector::from_iterator(q, syms.iter().map(|p| p.0));
                            y_d += h().columns(0, q) * x * C64::from(self.a_r[i]);
                            relay_sent[iv][i].extend_from_slice(syms);
                        }
                        _ => {}
                    }
                }
                y_d += draw_noise(nd);

                // Destination training observations.
                if let Some(pc) = plan.source_pilot[tu].filter(|_| role.is_pilot()) {
                    sd_seen.entry(sd_block).or_insert_with(|| vec![None; m])[pc.column] = Some(y_d.clone());
                }
                for i in 0..k {
                    if let SlotRole::RelayPilot(_) = plan.roles[tu][i + 1] {
                        let a = plan.relay_pilot_antenna[tu].expect("relay pilot antenna");
                        let b = self.ch.link(Link::RelayDestination(i)).timing.global_block(tau);
                        let n = plan.activation[i] as usize;
                        rd_seen.entry((i, b)).or_insert_with(|| vec![None; n])[a] = Some(y_d.clone());
                    }
                }
                received[iv * len as usize + tu] = Some(y_d);

                // Relay reception of source training.
                let (Some(x), Some(pc)) = (&x_s, plan.source_pilot[tu].filter(|_| role.is_pilot())) else {
                    continue;
                };
                for (j, &i) in plan.chain.iter().enumerate() {
                    if pc.level < j {
                        break;
                    }
                    let h = self.ch.link(Link::SourceRelay(i)).at(tau);
                    let rows = h.nrows();
                    let y_r = h * x + draw_noise(rows);
                    let b = self.sr_block(i, tau);
                    if pc.level > j {
                        anchor_seen.entry((i, b)).or_insert_with(|| vec![None; m])[pc.column] = Some(y_r);
                        continue;
                    }
                    // Carrier for relay i: estimate its equivalent channel, strip the known part.
                    let a = self.anchor_matrix(i, tau, &anchor_precoder);
                    let truth = h * &a * C64::from(self.a_s);
                    let seen = anchor_seen.get(&(i, b));
                    let finite = !self.ch.link(Link::SourceRelay(i)).timing.coherence.is_infinite();
                    let mut cols = Vec::with_capacity(ns);
                    for c in 0..ns {
                        match seen.and_then(|v| v[c].clone()).filter(|_| finite) {
                            Some(col) => cols.push(col),
                            None => {
                                if finite {
                                    genie += 1;
                                }
                                cols.push(truth.column(c).into_owned());
                            }
                        }
                    }
                    let est = columns(&cols, rows);
                    let dec = s.n_s_star(i) as usize;
                    let scale = C64::from(1.0 / (ns as f64).sqrt());
                    let known = est.columns(dec, ns - dec) * pattern(ns, dec, pc.column) * scale;
                    let g = est.columns(0, dec) * scale;
                    let idx = self.carrier_index[tu].expect("carrier slot");
                    let sent = &payload.intervals[iv].relay[i][idx];
                    match zf_decode(&CMatrix::from_columns(&[y_r - known]), &g) {
                        Ok(a_hat) => {
                            for r in 0..dec {
                                decoded[iv][i].push((a_hat[(r, 0)], sent[r]));
                            }
                        }
                        Err(_) => {
                            singular += 1;
                            for r in 0..dec {
                                decoded[iv][i].push((C64::new(0.0, 0.0), sent[r]));
                            }
                        }
                    }
                    carriers_out.push(CarrierSlot {
                        interval: iv,
                        relay: i,
                        channel: g,
                    });
                }
            }
        }

        // Destination decoding.
        let mut outputs = Vec::with_capacity(intervals);
        let mut errors = Vec::new();
        let mut data_slots = Vec::new();
        for iv in 0..intervals {
            let pay = &payload.intervals[iv];
            let mut out = IntervalOutput {
                source: vec![None; pay.source.len()],
                relay: (0..k).map(|i| vec![None; relay_sent[iv][i].len()]).collect(),
                delivered: 0,
            };
            let mut relay_pos = vec![0usize; k];
            for t in 0..len {
                let tu = t as usize;
                let tau = iv as u64 * len + t;
                let source = plan.roles[tu][0] == SlotRole::Data;
                let relays: Vec<(usize, usize)> = (0..k)
                    .filter(|_| iv > 0)
                    .map(|i| (i, plan.relay_streams[tu][i] as usize))
                    .filter(|&(_, q)| q > 0)
                    .collect();
                if !source && relays.is_empty() {
                    continue;
                }
                let mut cols: Vec<CVector> = Vec::new();
                if source {
                    let b = sd_timing.global_block(tau);
                    let seen = sd_seen.get(&b);
                    if sd_timing.coherence.is_infinite() || seen.is_none_or(|v| v.iter().any(|c| c.is_none())) {
                        if !sd_timing.coherence.is_infinite() {
                            genie += 1;
                        }
                        let h = self.ch.link(Link::SourceDestination).at(tau).columns(0, m).into_owned();
                        let g = h * self.sd_mixing(b, &sd_precoder) * C64::from(self.a_s);
                        cols.extend(g.column_iter().map(|c| c.into_owned()));
                    } else {
                        cols.extend(seen.unwrap().iter().map(|c| c.clone().unwrap()));
                    }
                }
                for &(i, q) in &relays {
                    let link = self.ch.link(Link::RelayDestination(i));
                    let b = link.timing.global_block(tau);
                    let n = plan.activation[i] as usize;
                    match rd_seen.get(&(i, b)).filter(|v| v.iter().all(|c| c.is_some())) {
                        Some(v) if !link.timing.coherence.is_infinite() => {
                            cols.extend(v[..q].iter().map(|c| c.clone().unwrap()));
                        }
                        _ => {
                            if !link.timing.coherence.is_infinite() {
                                genie += 1;
                            }
                            let h = link.at(tau).columns(0, n).into_owned() * C64::from(self.a_r[i]);
                            cols.extend((0..q).map(|c| h.column(c).into_owned()));
                        }
                    }
                }
                let channel = columns(&cols, nd);
                let y = received[iv * len as usize + tu].clone().expect("slot simulated");
                let decision = zf_decode(&CMatrix::from_columns(std::slice::from_ref(&y)), &channel);
                match &decision {
                    Err(_) => singular += 1,
                    Ok(est) => {
                        let mut row = 0;
                        if source {
                            let idx = self.data_index[tu].expect("data slot");
                            let v = CVector::from_iterator(m, (0..m).map(|r| est[(r, 0)]));
                            for r in 0..m {
                                errors.push(relative(v[r], pay.source[idx][r]));
                            }
                            out.source[idx] = Some(v);
                            out.delivered += m as u64;
                            row = m;
                        }
                        for &(i, q) in &relays {
                            for r in 0..q {
                                let p = relay_pos[i] + r;
                                let truth = relay_sent[iv][i][p].1;
                                errors.push(relative(est[(row + r, 0)], truth));
                                out.relay[i][p] = Some(est[(row + r, 0)]);
                            }
                            out.delivered += q as u64;
                            row += q;
                        }
                    }
                }
                for &(i, q) in &relays {
                    relay_pos[i] += q;
                }
                data_slots.push(DataSlot {
                    interval: iv,
                    slot: t,
                    received: y,
                    channel,
                    source_cols: if source { m } else { 0 },
                    relay_cols: relays,
                });
            }
            outputs.push(out);
        }

        Ok(EndToEnd {
            intervals: outputs,
            errors,
            singular,
            genie_estimates: genie,
            data_slots,
            carriers: carriers_out,
        })
    }

    /// Precoders the source used at relay `i`'s anchors in the current
    /// source–relay block; unit vectors for anchors before the run or an
    /// unchanging link.
    fn anchor_matrix(&self, i: usize, tau: u64, store: &HashMap<(usize, u64), Vec<Option<CVector>>>) -> CMatrix {
        let ns = self.s.n_s as usize;
        let b = self.sr_block(i, tau);
        let known = store.get(&(i, b));
        let cols: Vec<CVector> = (0..ns)
            .map(|c| known.and_then(|v| v[c].clone()).unwrap_or_else(|| unit(ns, c)))
            .collect();
        CMatrix::from_columns(&cols)
    }

    /// Matrix the source data of an SD block is premultiplied with: the
    /// block's training precoders side by side.
    fn sd_mixing(&self, block: u64, store: &HashMap<u64, Vec<Option<CVector>>>) -> CMatrix {
        let m = self.m;
        let known = store.get(&block);
        let cols: Vec<CVector> = (0..m)
            .map(|c| known.and_then(|v| v[c].clone()).unwrap_or_else(|| unit(m, c)))
            .collect();
        columns(&cols, m)
    }
}

fn relative(est: C64, truth: C64) -> f64 {
    (est - truth).norm() / truth.norm().max(1e-12)
}
