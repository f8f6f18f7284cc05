//! Scenario description: antenna counts, per-link coherence times and SNR.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Length of a coherence interval in slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coherence {
    Finite(u64),
    Infinite,
}

impl Coherence {
    pub fn finite(self) -> Option<u64> {
        match self {
            Coherence::Finite(t) => Some(t),
            Coherence::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Coherence::Infinite)
    }

    /// `1/T`, zero when infinite.
    pub fn reciprocal(self) -> Rational {
        match self {
            Coherence::Finite(t) => Rational::new(1, t as i128),
            Coherence::Infinite => Rational::ZERO,
        }
    }

    /// True when this length is at least `bound` (always true when infinite).
    pub fn at_least(self, bound: u64) -> bool {
        self.finite().is_none_or(|t| t >= bound)
    }
}

impl fmt::Display for Coherence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coherence::Finite(t) => write!(f, "{t}"),
            Coherence::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Coherence {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Coherence::Finite(t) => serializer.serialize_u64(*t),
            Coherence::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Coherence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(t) => Ok(Coherence::Finite(t)),
            Raw::Text(s) if s.eq_ignore_ascii_case("inf") => Ok(Coherence::Infinite),
            Raw::Text(s) => s
                .parse()
                .map(Coherence::Finite)
                .map_err(|_| serde::de::Error::custom(format!("bad coherence time {s:?}"))),
        }
    }
}

/// Antenna counts of a single-relay channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AntennaConfig {
    pub n_s: u32,
    /// Relay receive antennas.
    pub n_r_rx: u32,
    /// Relay transmit antennas available for activation.
    pub n_r_tx_max: u32,
    pub n_d: u32,
}

/// Coherence times of the three links of a single-relay channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoherenceConfig {
    pub t_sd: Coherence,
    pub t_sr: Coherence,
    pub t_rd: Coherence,
    pub offset_sr: u64,
    pub offset_rd: u64,
}

/// One relay: its antennas and the coherence of its two links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayConfig {
    pub n_r_rx: u32,
    #[serde(default)]
    pub n_r_tx_max: Option<u32>,
    pub t_sr: Coherence,
    pub t_rd: Coherence,
    #[serde(default)]
    pub offset_sr: u64,
    #[serde(default)]
    pub offset_rd: u64,
}

impl RelayConfig {
    pub fn new(n_r_rx: u32, n_r_tx_max: u32, t_sr: Coherence, t_rd: Coherence) -> Self {
        RelayConfig {
            n_r_rx,
            n_r_tx_max: Some(n_r_tx_max),
            t_sr,
            t_rd,
            offset_sr: 0,
            offset_rd: 0,
        }
    }

    /// Transmit antennas; defaults to the receive count.
    pub fn tx_max(&self) -> u32 {
        self.n_r_tx_max.unwrap_or(self.n_r_rx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n_s: u32,
    pub n_d: u32,
    pub t_sd: Coherence,
    pub relays: Vec<RelayConfig>,
    /// Linear SNR.
    pub snr: f64,
}

impl Scenario {
    pub fn single(antennas: AntennaConfig, coherence: CoherenceConfig) -> Self {
        Scenario {
            n_s: antennas.n_s,
            n_d: antennas.n_d,
            t_sd: coherence.t_sd,
            relays: vec![RelayConfig {
                n_r_rx: antennas.n_r_rx,
                n_r_tx_max: Some(antennas.n_r_tx_max),
                t_sr: coherence.t_sr,
                t_rd: coherence.t_rd,
                offset_sr: coherence.offset_sr,
                offset_rd: coherence.offset_rd,
            }],
            snr: 1.0,
        }
    }

    /// Shorthand for a single relay with `n_r_tx_max = n_r` and aligned blocks.
    pub fn simple(
        n_s: u32,
        n_r: u32,
        n_d: u32,
        t_sd: Coherence,
        t_sr: Coherence,
        t_rd: Coherence,
    ) -> Self {
        Scenario {
            n_s,
            n_d,
            t_sd,
            relays: vec![RelayConfig::new(n_r, n_r, t_sr, t_rd)],
            snr: 1.0,
        }
    }

    pub fn antennas(&self) -> Option<AntennaConfig> {
        let r = self.relays.first()?;
        Some(AntennaConfig {
            n_s: self.n_s,
            n_r_rx: r.n_r_rx,
            n_r_tx_max: r.tx_max(),
            n_d: self.n_d,
        })
    }

    pub fn coherence(&self) -> Option<CoherenceConfig> {
        let r = self.relays.first()?;
        Some(CoherenceConfig {
            t_sd: self.t_sd,
            t_sr: r.t_sr,
            t_rd: r.t_rd,
            offset_sr: r.offset_sr,
            offset_rd: r.offset_rd,
        })
    }

    /// `min(N_S, N_R)` for relay `i`.
    pub fn n_s_star(&self, i: usize) -> u32 {
        self.n_s.min(self.relays[i].n_r_rx)
    }

    /// `min(N_S + n_R, N_D)` for relay `i`.
    pub fn n_d_star(&self, i: usize) -> u32 {
        (self.n_s + self.relays[i].tx_max()).min(self.n_d)
    }

    /// Streams the source can send to the destination on its own.
    pub fn direct_streams(&self) -> u32 {
        self.n_s.min(self.n_d)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)
            .map_err(|e| Error::MalformedScenario(e.to_string()))?;
        check_well_formed(&s)?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireAntennas {
    n_s: u32,
    n_d: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_r_rx: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_r_tx_max: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCoherence {
    t_sd: Coherence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_sr: Option<Coherence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_rd: Option<Coherence>,
    #[serde(default)]
    offset_sr: u64,
    #[serde(default)]
    offset_rd: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireScenario {
    antennas: WireAntennas,
    coherence: WireCoherence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relays: Option<Vec<RelayConfig>>,
    #[serde(default = "default_snr")]
    snr: f64,
}

fn default_snr() -> f64 {
    1.0
}

impl Serialize for Scenario {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut wire = WireScenario {
            antennas: WireAntennas {
                n_s: self.n_s,
                n_d: self.n_d,
                n_r_rx: None,
                n_r_tx_max: None,
            },
            coherence: WireCoherence {
                t_sd: self.t_sd,
                t_sr: None,
                t_rd: None,
                offset_sr: 0,
                offset_rd: 0,
            },
            relays: None,
            snr: self.snr,
        };
        if let [r] = self.relays.as_slice() {
            wire.antennas.n_r_rx = Some(r.n_r_rx);
            wire.antennas.n_r_tx_max = r.n_r_tx_max;
            wire.coherence.t_sr = Some(r.t_sr);
            wire.coherence.t_rd = Some(r.t_rd);
            wire.coherence.offset_sr = r.offset_sr;
            wire.coherence.offset_rd = r.offset_rd;
        } else {
            wire.relays = Some(self.relays.clone());
        }
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = WireScenario::deserialize(deserializer)?;
        let relays = match w.relays {
            Some(list) => list,
            None => match (w.antennas.n_r_rx, w.coherence.t_sr, w.coherence.t_rd) {
                (Some(n_r_rx), Some(t_sr), Some(t_rd)) => vec![RelayConfig {
                    n_r_rx,
                    n_r_tx_max: w.antennas.n_r_tx_max,
                    t_sr,
                    t_rd,
                    offset_sr: w.coherence.offset_sr,
                    offset_rd: w.coherence.offset_rd,
                }],
                (None, None, None) => Vec::new(),
                _ => {
                    return Err(D::Error::custom(
                        "a relay needs antennas.n_r_rx, coherence.t_sr and coherence.t_rd",
                    ))
                }
            },
        };
        Ok(Scenario {
            n_s: w.antennas.n_s,
            n_d: w.antennas.n_d,
            t_sd: w.coherence.t_sd,
            relays,
            snr: w.snr,
        })
    }
}

/// A soft constraint that does not hold; evaluation proceeds regardless.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub constraint: String,
    pub text: String,
}

/// Rejects scenarios no scheme can be evaluated on.
pub fn check_well_formed(s: &Scenario) -> Result<()> {
    let bad = |m: String| Err(Error::MalformedScenario(m));
    if s.n_s == 0 || s.n_d == 0 {
        return bad("source and destination need at least one antenna".into());
    }
    if s.t_sd == Coherence::Finite(0) {
        return bad("t_sd must be positive".into());
    }
    if s.snr.is_nan() || s.snr < 0.0 {
        return bad("snr must be a non-negative number".into());
    }
    for (i, r) in s.relays.iter().enumerate() {
        let k = i + 1;
        if r.n_r_rx == 0 || r.tx_max() == 0 {
            return bad(format!("relay {k} needs at least one antenna"));
        }
        for (name, t, offset) in [("t_sr", r.t_sr, r.offset_sr), ("t_rd", r.t_rd, r.offset_rd)] {
            if let Coherence::Finite(t) = t {
                if t == 0 {
                    return bad(format!("relay {k}: {name} must be positive"));
                }
                if offset >= t {
                    return bad(format!("relay {k}: offset {offset} not below {name} = {t}"));
                }
            }
        }
    }
    Ok(())
}

/// Lists the coherence-length constraints that training-based schemes assume.
pub fn validate_scenario(s: &Scenario) -> Result<Vec<Violation>> {
    check_well_formed(s)?;
    let mut out = Vec::new();
    let mut push = |constraint: &str, text: String| {
        out.push(Violation {
            constraint: constraint.to_string(),
            text,
        })
    };
    let sd_bound = 2 * s.n_s.max(s.n_d) as u64;
    if !s.t_sd.at_least(sd_bound) {
        push("t_sd", format!("t_sd ≥ 2·max(N_S,N_D) = {sd_bound} fails (t_sd = {})", s.t_sd));
    }
    let multi = s.relays.len() > 1;
    for (i, r) in s.relays.iter().enumerate() {
        let suffix = if multi { format!(" (relay {})", i + 1) } else { String::new() };
        let sr_bound = 2 * s.n_s.max(r.n_r_rx) as u64;
        if !r.t_sr.at_least(sr_bound) {
            push(
                "t_sr",
                format!("t_sr ≥ 2·max(N_S,N_R) = {sr_bound} fails (t_sr = {}){suffix}", r.t_sr),
            );
        }
        let rd_bound = 2 * r.tx_max().max(s.n_d) as u64;
        if !r.t_rd.at_least(rd_bound) {
            push(
                "t_rd",
                format!("t_rd ≥ 2·max(n_R,N_D) = {rd_bound} fails (t_rd = {}){suffix}", r.t_rd),
            );
        }
    }
    Ok(out)
}
