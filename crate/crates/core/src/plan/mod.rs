//! Slot-level frame plans: who transmits what in every slot of one
//! super-interval, and the DoF recomputed by counting those slots.

mod build;
mod export;
mod validate;

use serde::Serialize;

use crate::rational::Rational;
use crate::scenario::Coherence;
use crate::dof::SchemeId;

pub use build::{build_frame_plan, build_frame_plan_with, PlanOptions, DEFAULT_MAX_SLOTS};
pub use export::plan_csv;
pub use validate::{validate_plan, PlanInvariant, PlanViolation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SlotRole {
    /// Identity training column.
    SourcePilot,
    /// Training column premultiplied by a data vector for a relay.
    SuperposedPilot,
    /// Relay training column; the index is the relay's position in the scenario.
    RelayPilot(usize),
    Data,
    Silent,
}

impl SlotRole {
    pub fn is_pilot(self) -> bool {
        matches!(self, SlotRole::SourcePilot | SlotRole::SuperposedPilot | SlotRole::RelayPilot(_))
    }

    pub fn name(self) -> &'static str {
        match self {
            SlotRole::SourcePilot => "source_pilot",
            SlotRole::SuperposedPilot => "superposed_pilot",
            SlotRole::RelayPilot(_) => "relay_pilot",
            SlotRole::Data => "data",
            SlotRole::Silent => "silent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Link {
    SourceDestination,
    SourceRelay(usize),
    RelayDestination(usize),
}

/// Block structure of one link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinkTiming {
    pub link: Link,
    pub coherence: Coherence,
    pub offset: u64,
}

impl LinkTiming {
    /// Index of the block holding absolute slot `tau`; blocks are numbered
    /// from the one containing slot 0. Infinite links have a single block.
    pub fn global_block(&self, tau: u64) -> u64 {
        match self.coherence {
            Coherence::Infinite => 0,
            Coherence::Finite(t) => (tau + t - self.offset) / t,
        }
    }

    /// First absolute slot of the block holding `tau`; negative for the block
    /// that started before slot 0.
    pub fn block_start(&self, tau: u64) -> i64 {
        match self.coherence {
            Coherence::Infinite => i64::MIN,
            Coherence::Finite(t) => {
                let b = self.global_block(tau) as i64;
                (b - 1) * t as i64 + self.offset as i64
            }
        }
    }

    /// Block index of slot `t` within a super-interval of `period` slots,
    /// counting blocks cyclically.
    pub fn cyclic_block(&self, t: u64, period: u64) -> u64 {
        match self.coherence {
            Coherence::Infinite => 0,
            Coherence::Finite(len) => {
                let shifted = (t + period - self.offset % period) % period;
                (shifted / len) % (period / len).max(1)
            }
        }
    }
}

/// Source training column and its superposition level.
///
/// With `k` relays in the superposition chain, level `k` is a plain pilot and
/// level `l < k` carries data for `chain[l]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PilotColumn {
    pub column: usize,
    pub level: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RelayBudget {
    /// Symbols the relay decodes from superposed pilots.
    pub decodable: u64,
    /// Symbols its active antennas can carry in relay-active data slots.
    pub transmittable: u64,
    /// Symbols actually forwarded: the lesser of the two.
    pub forwarded: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EstimationEvent {
    pub link: Link,
    /// Cyclic block index.
    pub block: u64,
    pub slots: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FramePlan {
    pub scheme: SchemeId,
    /// Activated transmit antennas per relay.
    pub activation: Vec<u32>,
    /// Transmitting relays ordered by source–relay coherence, shortest first.
    pub chain: Vec<usize>,
    /// Source antennas used.
    pub source_streams: u32,
    /// Relay-decodable symbols per superposed column, per relay.
    pub symbols_per_carrier: Vec<u32>,
    pub super_interval: u64,
    /// `roles[slot][tx]`, transmitter 0 is the source and `i + 1` is relay `i`.
    pub roles: Vec<Vec<SlotRole>>,
    pub source_pilot: Vec<Option<PilotColumn>>,
    /// Antenna sending the relay pilot in each relay-pilot slot.
    pub relay_pilot_antenna: Vec<Option<usize>>,
    /// Relay data streams per slot, `relay_streams[slot][relay]`.
    pub relay_streams: Vec<Vec<u32>>,
    /// Whether each relay is in its active phase, `relay_active[slot][relay]`.
    pub relay_active: Vec<Vec<bool>>,
    /// Simultaneously decodable data streams per slot.
    pub stream_counts: Vec<u32>,
    pub relay_budget: Vec<RelayBudget>,
    pub estimation_events: Vec<EstimationEvent>,
    pub links: Vec<LinkTiming>,
    pub notes: Vec<String>,
}

impl FramePlan {
    pub fn transmitters(&self) -> usize {
        self.activation.len() + 1
    }

    pub fn link(&self, link: Link) -> Option<&LinkTiming> {
        self.links.iter().find(|l| l.link == link)
    }

    pub fn source_data_slots(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.super_interval).filter(|&t| self.roles[t as usize][0] == SlotRole::Data)
    }

    /// Pilot slots that carry data for chain position `level`.
    pub fn carriers(&self, level: usize) -> impl Iterator<Item = u64> + '_ {
        (0..self.super_interval).filter(move |&t| {
            self.source_pilot[t as usize].is_some_and(|p| p.level == level)
        })
    }

    pub fn source_data_symbols(&self) -> u64 {
        self.source_data_slots().count() as u64 * self.source_streams as u64
    }

    /// Data symbols delivered per super-interval.
    pub fn delivered_symbols(&self) -> u64 {
        self.source_data_symbols() + self.relay_budget.iter().map(|b| b.forwarded).sum::<u64>()
    }
}

/// DoF of a plan by direct slot counting.
pub fn accounting_dof(p: &FramePlan) -> Rational {
    Rational::new(p.delivered_symbols() as i128, p.super_interval as i128)
}
