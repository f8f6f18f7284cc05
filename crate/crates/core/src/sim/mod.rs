//! Signal-level Monte Carlo of a frame plan: block-fading channels, product
//! superposition, block-Markov decode-and-forward at the relays, and LS
//! estimation with zero-forcing at the destination.

mod channel;
mod engine;
mod linalg;

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::plan::FramePlan;

pub use channel::{sample_channels, ChannelRealization, LinkChannel};
pub use engine::{run_end_to_end, CarrierSlot, DataSlot, EndToEnd, IntervalOutput, Noise};
pub use linalg::{log2_det_gram, ls_estimate_equivalent_channel, zf_decode, CMatrix, C64};

pub type CVector = DVector<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymbolKind {
    /// Unit modulus, uniform phase.
    #[default]
    ConstantModulus,
    /// CN(0,1).
    Gaussian,
}

impl SymbolKind {
    fn draw(self, rng: &mut impl Rng) -> C64 {
        match self {
            SymbolKind::ConstantModulus => {
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                C64::from_polar(1.0, phase)
            }
            SymbolKind::Gaussian => channel::cn01(rng),
        }
    }
}

/// Data of one super-interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPayload {
    /// One vector of `source_streams` symbols per source data slot, in slot order.
    pub source: Vec<CVector>,
    /// Per relay, one vector of relay-decodable symbols per superposed pilot
    /// carrying data for it, in slot order.
    pub relay: Vec<Vec<CVector>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Payload {
    pub intervals: Vec<IntervalPayload>,
}

impl Payload {
    /// Random payload shaped by `plan` for `intervals` super-intervals.
    pub fn random(plan: &FramePlan, intervals: usize, seed: u64, kind: SymbolKind) -> Payload {
        let mut rng = channel::rng_for(seed, 1 << 33);
        let m = plan.source_streams as usize;
        let data = plan.source_data_slots().count();
        let shape = relay_shape(plan);
        let mut draw = |n: usize| CVector::from_fn(n, |_, _| kind.draw(&mut rng));
        let intervals = (0..intervals)
            .map(|_| IntervalPayload {
                source: (0..data).map(|_| draw(m)).collect(),
                relay: shape
                    .iter()
                    .map(|&(count, len)| (0..count).map(|_| draw(len)).collect())
                    .collect(),
            })
            .collect();
        Payload { intervals }
    }

    pub fn check(&self, plan: &FramePlan) -> Result<()> {
        let m = plan.source_streams as usize;
        let data = plan.source_data_slots().count();
        let shape = relay_shape(plan);
        for (k, iv) in self.intervals.iter().enumerate() {
            let fail = |what: String| Err(Error::PayloadMismatch(format!("interval {k}: {what}")));
            if iv.source.len() != data || iv.source.iter().any(|v| v.len() != m) {
                return fail(format!("expected {data} source vectors of length {m}"));
            }
            if iv.relay.len() != shape.len() {
                return fail(format!("expected {} relay lists", shape.len()));
            }
            for (i, (&(count, len), list)) in shape.iter().zip(&iv.relay).enumerate() {
                if list.len() != count || list.iter().any(|v| v.len() != len) {
                    return fail(format!("relay {} expects {count} vectors of length {len}", i + 1));
                }
            }
        }
        Ok(())
    }
}

/// Per relay, (number of carrying pilots, symbols per pilot).
fn relay_shape(plan: &FramePlan) -> Vec<(usize, usize)> {
    (0..plan.activation.len())
        .map(|i| match plan.chain.iter().position(|&c| c == i) {
            Some(j) => (plan.carriers(j).count(), plan.symbols_per_carrier[i] as usize),
            None => (0, 0),
        })
        .collect()
}
