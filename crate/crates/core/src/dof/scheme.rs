//! Scheme identifiers and the scenario shapes each scheme accepts.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scenario::{Coherence, Scenario};

/// Block layout when the source–relay channel never changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StaticLayout {
    /// `T_SD = T_RD`.
    EqualTsdTrd,
    /// `T_RD = K·T_SD`.
    TrdMultiple(u64),
    /// `T_SD = K·T_RD`.
    TsdMultiple(u64),
}

/// Block layout when `T_SR = K·T_SD` is finite. `K` comes first, `K'` second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlowLayout {
    /// `T_SD = T_RD`.
    EqualTsdTrd(u64),
    /// `T_RD = K'·T_SD`.
    TrdMultiple(u64, u64),
    /// `T_SD = K'·T_RD`.
    TsdMultiple(u64, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleMode {
    /// Static source–relay link, `T_SD = T_RD`, aligned blocks.
    Aligned,
    /// Any `T_SD` shorter than both relay links.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    DirectLink,
    Identical,
    StaticRelay(StaticLayout),
    SlowRelay(SlowLayout),
    Scheduled(ScheduleMode),
    Arbitrary,
    TwoRelay { k1: u64, k2: u64 },
    MultiRelay,
}

/// Scheme family as named on the command line; ratios are read off the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Direct,
    Identical,
    StaticEqual,
    StaticTrdMultiple,
    StaticTsdMultiple,
    SlowEqual,
    SlowTrdMultiple,
    SlowTsdMultiple,
    SchedulingAligned,
    SchedulingGeneral,
    Arbitrary,
    TwoRelay,
    MultiRelay,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 13] = [
        SchemeKind::Direct,
        SchemeKind::Identical,
        SchemeKind::StaticEqual,
        SchemeKind::StaticTrdMultiple,
        SchemeKind::StaticTsdMultiple,
        SchemeKind::SlowEqual,
        SchemeKind::SlowTrdMultiple,
        SchemeKind::SlowTsdMultiple,
        SchemeKind::SchedulingAligned,
        SchemeKind::SchedulingGeneral,
        SchemeKind::Arbitrary,
        SchemeKind::TwoRelay,
        SchemeKind::MultiRelay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Direct => "direct",
            SchemeKind::Identical => "identical",
            SchemeKind::StaticEqual => "thm1-equal",
            SchemeKind::StaticTrdMultiple => "thm1-trd-multiple",
            SchemeKind::StaticTsdMultiple => "thm1-tsd-multiple",
            SchemeKind::SlowEqual => "thm2-equal",
            SchemeKind::SlowTrdMultiple => "thm2-trd-multiple",
            SchemeKind::SlowTsdMultiple => "thm2-tsd-multiple",
            SchemeKind::SchedulingAligned => "scheduling-aligned",
            SchemeKind::SchedulingGeneral => "scheduling-general",
            SchemeKind::Arbitrary => "arbitrary",
            SchemeKind::TwoRelay => "two-relay",
            SchemeKind::MultiRelay => "multi-relay",
        }
    }

    /// Fills in the coherence ratios from relay 1 (and relay 2 for two-relay).
    pub fn resolve(self, s: &Scenario) -> Result<SchemeId> {
        let name = self.name();
        let relay = |i: usize| {
            s.relays.get(i).ok_or_else(|| {
                Error::precondition(name, format!("at least {} relay(s)", i + 1))
            })
        };
        let ratio = |num: Coherence, den: Coherence, what: &str| -> Result<u64> {
            match (num, den) {
                (Coherence::Finite(a), Coherence::Finite(b)) if a % b == 0 => Ok(a / b),
                _ => Err(Error::precondition(name, format!("{what} to be a positive integer"))),
            }
        };
        Ok(match self {
            SchemeKind::Direct => SchemeId::DirectLink,
            SchemeKind::Identical => SchemeId::Identical,
            SchemeKind::StaticEqual => SchemeId::StaticRelay(StaticLayout::EqualTsdTrd),
            SchemeKind::StaticTrdMultiple => {
                let r = relay(0)?;
                SchemeId::StaticRelay(StaticLayout::TrdMultiple(ratio(r.t_rd, s.t_sd, "t_rd/t_sd")?))
            }
            SchemeKind::StaticTsdMultiple => {
                let r = relay(0)?;
                SchemeId::StaticRelay(StaticLayout::TsdMultiple(ratio(s.t_sd, r.t_rd, "t_sd/t_rd")?))
            }
            SchemeKind::SlowEqual => {
                let r = relay(0)?;
                SchemeId::SlowRelay(SlowLayout::EqualTsdTrd(ratio(r.t_sr, s.t_sd, "t_sr/t_sd")?))
            }
            SchemeKind::SlowTrdMultiple => {
                let r = relay(0)?;
                SchemeId::SlowRelay(SlowLayout::TrdMultiple(
                    ratio(r.t_sr, s.t_sd, "t_sr/t_sd")?,
                    ratio(r.t_rd, s.t_sd, "t_rd/t_sd")?,
                ))
            }
            SchemeKind::SlowTsdMultiple => {
                let r = relay(0)?;
                SchemeId::SlowRelay(SlowLayout::TsdMultiple(
                    ratio(r.t_sr, s.t_sd, "t_sr/t_sd")?,
                    ratio(s.t_sd, r.t_rd, "t_sd/t_rd")?,
                ))
            }
            SchemeKind::SchedulingAligned => SchemeId::Scheduled(ScheduleMode::Aligned),
            SchemeKind::SchedulingGeneral => SchemeId::Scheduled(ScheduleMode::General),
            SchemeKind::Arbitrary => SchemeId::Arbitrary,
            SchemeKind::TwoRelay => {
                let (r1, r2) = (relay(0)?, relay(1)?);
                SchemeId::TwoRelay {
                    k1: ratio(r1.t_sr, s.t_sd, "t_sr(1)/t_sd")?,
                    k2: ratio(r2.t_sr, r1.t_sr, "t_sr(2)/t_sr(1)")?,
                }
            }
            SchemeKind::MultiRelay => SchemeId::MultiRelay,
        })
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let alias = match s {
            "direct-link" => "direct",
            "static-equal" => "thm1-equal",
            "static-trd-multiple" => "thm1-trd-multiple",
            "static-tsd-multiple" => "thm1-tsd-multiple",
            "slow-equal" => "thm2-equal",
            "slow-trd-multiple" => "thm2-trd-multiple",
            "slow-tsd-multiple" => "thm2-tsd-multiple",
            other => other,
        };
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == alias)
            .ok_or_else(|| {
                let names: Vec<_> = SchemeKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown scheme {s:?}; expected one of {}", names.join(", "))
            })
    }
}

impl SchemeId {
    pub fn kind(&self) -> SchemeKind {
        match self {
            SchemeId::DirectLink => SchemeKind::Direct,
            SchemeId::Identical => SchemeKind::Identical,
            SchemeId::StaticRelay(StaticLayout::EqualTsdTrd) => SchemeKind::StaticEqual,
            SchemeId::StaticRelay(StaticLayout::TrdMultiple(_)) => SchemeKind::StaticTrdMultiple,
            SchemeId::StaticRelay(StaticLayout::TsdMultiple(_)) => SchemeKind::StaticTsdMultiple,
            SchemeId::SlowRelay(SlowLayout::EqualTsdTrd(_)) => SchemeKind::SlowEqual,
            SchemeId::SlowRelay(SlowLayout::TrdMultiple(..)) => SchemeKind::SlowTrdMultiple,
            SchemeId::SlowRelay(SlowLayout::TsdMultiple(..)) => SchemeKind::SlowTsdMultiple,
            SchemeId::Scheduled(ScheduleMode::Aligned) => SchemeKind::SchedulingAligned,
            SchemeId::Scheduled(ScheduleMode::General) => SchemeKind::SchedulingGeneral,
            SchemeId::Arbitrary => SchemeKind::Arbitrary,
            SchemeId::TwoRelay { .. } => SchemeKind::TwoRelay,
            SchemeId::MultiRelay => SchemeKind::MultiRelay,
        }
    }

    /// True for schemes that activate every relay of the scenario independently.
    pub fn is_multi_relay(&self) -> bool {
        matches!(self, SchemeId::TwoRelay { .. } | SchemeId::MultiRelay)
    }

    /// Checks that the scenario has the coherence structure this scheme assumes.
    pub fn check(&self, s: &Scenario) -> Result<()> {
        let fail = |req: &str| Err(Error::precondition(self, req));
        let first = s.relays.first();
        let need_relay = || first.ok_or_else(|| Error::precondition(self, "one relay"));
        let need_fewer_source = || {
            if s.n_s < s.n_d {
                Ok(())
            } else {
                Err(Error::precondition(self, "N_S < N_D"))
            }
        };
        use Coherence::{Finite, Infinite};
        match *self {
            SchemeId::DirectLink => Ok(()),
            SchemeId::Identical => {
                let r = need_relay()?;
                match (s.t_sd, r.t_sr, r.t_rd) {
                    (Finite(a), Finite(b), Finite(c)) if a == b && b == c => Ok(()),
                    _ => fail("t_sd = t_sr = t_rd, finite"),
                }
            }
            SchemeId::StaticRelay(layout) => {
                let r = need_relay()?;
                need_fewer_source()?;
                if r.t_sr != Infinite {
                    return fail("t_sr = inf");
                }
                let (Finite(sd), Finite(rd)) = (s.t_sd, r.t_rd) else {
                    return fail("finite t_sd and t_rd");
                };
                match layout {
                    StaticLayout::EqualTsdTrd if sd == rd => Ok(()),
                    StaticLayout::EqualTsdTrd => fail("t_sd = t_rd"),
                    StaticLayout::TrdMultiple(k) if k >= 1 && rd == k * sd => Ok(()),
                    StaticLayout::TrdMultiple(_) => fail("t_rd = K·t_sd with integer K ≥ 1"),
                    StaticLayout::TsdMultiple(k) if k >= 1 && sd == k * rd => Ok(()),
                    StaticLayout::TsdMultiple(_) => fail("t_sd = K·t_rd with integer K ≥ 1"),
                }
            }
            SchemeId::SlowRelay(layout) => {
                let r = need_relay()?;
                need_fewer_source()?;
                let (Finite(sd), Finite(sr), Finite(rd)) = (s.t_sd, r.t_sr, r.t_rd) else {
                    return fail("finite t_sd, t_sr and t_rd");
                };
                let k = match layout {
                    SlowLayout::EqualTsdTrd(k)
                    | SlowLayout::TrdMultiple(k, _)
                    | SlowLayout::TsdMultiple(k, _) => k,
                };
                if k == 0 || sr != k * sd {
                    return fail("t_sr = K·t_sd with integer K ≥ 1");
                }
                match layout {
                    SlowLayout::EqualTsdTrd(_) if sd == rd => Ok(()),
                    SlowLayout::EqualTsdTrd(_) => fail("t_sd = t_rd"),
                    SlowLayout::TrdMultiple(k, k2) => {
                        if k2 == 0 || rd != k2 * sd {
                            fail("t_rd = K'·t_sd with integer K' ≥ 1")
                        } else if k2 % k != 0 && k % k2 != 0 {
                            fail("max(K,K')/min(K,K') to be an integer")
                        } else {
                            Ok(())
                        }
                    }
                    SlowLayout::TsdMultiple(_, k2) if k2 >= 1 && sd == k2 * rd => Ok(()),
                    SlowLayout::TsdMultiple(..) => fail("t_sd = K'·t_rd with integer K' ≥ 1"),
                }
            }
            SchemeId::Scheduled(ScheduleMode::Aligned) => {
                let r = need_relay()?;
                need_fewer_source()?;
                match (s.t_sd, r.t_sr, r.t_rd) {
                    (Finite(a), Infinite, Finite(b)) if a == b => Ok(()),
                    _ => fail("t_sr = inf and finite t_sd = t_rd"),
                }
            }
            SchemeId::Scheduled(ScheduleMode::General) => {
                let r = need_relay()?;
                need_fewer_source()?;
                let (Finite(sd), Finite(rd)) = (s.t_sd, r.t_rd) else {
                    return fail("finite t_sd and t_rd");
                };
                let sr_longer = r.t_sr.finite().is_none_or(|sr| sr > sd);
                if rd > sd && sr_longer {
                    Ok(())
                } else {
                    fail("t_sd < t_rd and t_sd < t_sr")
                }
            }
            SchemeId::Arbitrary => {
                let r = need_relay()?;
                need_fewer_source()?;
                if r.n_r_rx >= s.n_d {
                    return fail("N_R < N_D");
                }
                match (s.t_sd, r.t_sr, r.t_rd) {
                    (Finite(sd), Finite(sr), Finite(rd)) if sr > sd && rd > sd => Ok(()),
                    _ => fail("finite t_sr > t_sd and t_rd > t_sd"),
                }
            }
            SchemeId::TwoRelay { k1, k2 } => {
                if s.relays.len() != 2 {
                    return fail("exactly two relays");
                }
                let (r1, r2) = (&s.relays[0], &s.relays[1]);
                let Finite(sd) = s.t_sd else {
                    return fail("finite t_sd");
                };
                if k1 == 0 || k2 == 0 {
                    return fail("K1, K2 ≥ 1");
                }
                if r1.t_sr != Finite(k1 * sd) || r2.t_sr != Finite(k2 * k1 * sd) {
                    return fail("t_sr(1) = K1·t_sd and t_sr(2) = K2·t_sr(1)");
                }
                if !(r1.t_rd.is_infinite() && r2.t_rd.is_infinite()) {
                    return fail("t_rd(1) = t_rd(2) = inf");
                }
                Ok(())
            }
            SchemeId::MultiRelay => {
                if s.relays.len() > 16 {
                    Err(Error::SearchBoundExceeded(s.relays.len()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind().name())?;
        match *self {
            SchemeId::StaticRelay(StaticLayout::TrdMultiple(k) | StaticLayout::TsdMultiple(k))
            | SchemeId::SlowRelay(SlowLayout::EqualTsdTrd(k)) => write!(f, "(K={k})"),
            SchemeId::SlowRelay(SlowLayout::TrdMultiple(k, k2) | SlowLayout::TsdMultiple(k, k2)) => {
                write!(f, "(K={k},K'={k2})")
            }
            SchemeId::TwoRelay { k1, k2 } => write!(f, "(K1={k1},K2={k2})"),
            _ => Ok(()),
        }
    }
}

impl Serialize for SchemeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
