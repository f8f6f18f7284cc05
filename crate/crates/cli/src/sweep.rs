//! Parameter sweeps over a scenario template.

use std::fmt::{self, Write};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use relay_dof::dof::{dof, dof_direct_link, DofBreakdown, SchemeKind};
use relay_dof::scenario::check_well_formed;
use relay_dof::{Coherence, Scenario};

use crate::values::{format_value, whole};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    TSd,
    TSr,
    TRd,
    /// `T_SR = K·T_SD`.
    K,
    /// `T_RD = K'·T_SD`.
    KPrime,
    NS,
    NR,
    ND,
    SnrDb,
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "T_SD" | "T" => Param::TSd,
            "T_SR" => Param::TSr,
            "T_RD" => Param::TRd,
            "K" => Param::K,
            "K'" | "K_PRIME" | "KP" => Param::KPrime,
            "N_S" => Param::NS,
            "N_R" => Param::NR,
            "N_D" => Param::ND,
            "SNR_DB" => Param::SnrDb,
            _ => {
                return Err(format!(
                    "unknown parameter {s:?}; expected T_SD, T_SR, T_RD, K, K', N_S, N_R, N_D or snr_db"
                ))
            }
        })
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Param::TSd => "T_SD",
            Param::TSr => "T_SR",
            Param::TRd => "T_RD",
            Param::K => "K",
            Param::KPrime => "K'",
            Param::NS => "N_S",
            Param::NR => "N_R",
            Param::ND => "N_D",
            Param::SnrDb => "snr_db",
        })
    }
}

pub struct SweepSpec {
    pub template: Scenario,
    pub param: Param,
    pub values: Vec<f64>,
    pub schemes: Vec<SchemeKind>,
    /// 0-based relay the relay parameters apply to; all relays when `None`.
    pub relay: Option<usize>,
    /// Change only the named parameter instead of carrying the template's
    /// coherence ratios along with `T_SD`.
    pub independent: bool,
}

pub struct SweepRow {
    pub value: f64,
    pub dof: DofBreakdown,
    pub baseline: f64,
}

fn coherence(v: f64, what: &str) -> Result<Coherence> {
    Ok(match whole(v, what)? {
        Some(0) => bail!("{what} must be positive"),
        Some(t) => Coherence::Finite(t),
        None => Coherence::Infinite,
    })
}

fn count(v: f64, what: &str) -> Result<u32> {
    match whole(v, what)? {
        Some(n) if n >= 1 && n <= u32::MAX as u64 => Ok(n as u32),
        _ => bail!("{what} must be a positive integer, got {}", format_value(v)),
    }
}

fn scale(t: Coherence, old: u64, new: u64, what: &str) -> Result<Coherence> {
    match t {
        Coherence::Infinite => Ok(t),
        Coherence::Finite(x) if (x as u128 * new as u128).is_multiple_of(old as u128) => {
            Ok(Coherence::Finite((x as u128 * new as u128 / old as u128) as u64))
        }
        Coherence::Finite(x) => bail!("{what} = {x} cannot keep its ratio to T_SD = {new}; use --independent"),
    }
}

impl SweepSpec {
    /// The template with the swept parameter set to `v`.
    pub fn scenario_at(&self, v: f64) -> Result<Scenario> {
        let mut s = self.template.clone();
        let picked: Vec<usize> = match self.relay {
            Some(i) if i < s.relays.len() => vec![i],
            Some(i) => bail!("--relay {} but the scenario has {} relay(s)", i + 1, s.relays.len()),
            None => (0..s.relays.len()).collect(),
        };
        let need_relay = matches!(self.param, Param::TSr | Param::TRd | Param::K | Param::KPrime | Param::NR);
        if need_relay && picked.is_empty() {
            bail!("sweeping {} needs a relay in the scenario", self.param);
        }
        let t_sd = |s: &Scenario| {
            s.t_sd
                .finite()
                .ok_or_else(|| anyhow!("sweeping {} needs a finite T_SD", self.param))
        };
        match self.param {
            Param::TSd => {
                let new = coherence(v, "T_SD")?;
                if let (false, Coherence::Finite(old), Coherence::Finite(n)) = (self.independent, s.t_sd, new) {
                    for r in &mut s.relays {
                        r.t_sr = scale(r.t_sr, old, n, "T_SR")?;
                        r.t_rd = scale(r.t_rd, old, n, "T_RD")?;
                    }
                }
                s.t_sd = new;
            }
            Param::TSr => {
                let t = coherence(v, "T_SR")?;
                picked.iter().for_each(|&i| s.relays[i].t_sr = t);
            }
            Param::TRd => {
                let t = coherence(v, "T_RD")?;
                picked.iter().for_each(|&i| s.relays[i].t_rd = t);
            }
            Param::K | Param::KPrime => {
                let base = t_sd(&s)?;
                let k = count(v, &self.param.to_string())? as u64;
                let t = Coherence::Finite(base.checked_mul(k).context("coherence time overflows")?);
                for &i in &picked {
                    if self.param == Param::K {
                        s.relays[i].t_sr = t;
                    } else {
                        s.relays[i].t_rd = t;
                    }
                }
            }
            Param::NS => s.n_s = count(v, "N_S")?,
            Param::ND => s.n_d = count(v, "N_D")?,
            Param::NR => {
                let n = count(v, "N_R")?;
                for &i in &picked {
                    s.relays[i].n_r_rx = n;
                    s.relays[i].n_r_tx_max = Some(n);
                }
            }
            Param::SnrDb => s.snr = 10f64.powf(v / 10.0),
        }
        check_well_formed(&s).with_context(|| format!("{} = {}", self.param, format_value(v)))?;
        Ok(s)
    }

    /// Every (value, scheme) point, evaluated in parallel and returned in
    /// value order, then scheme order.
    pub fn run(&self) -> Result<Vec<SweepRow>> {
        let points: Vec<(f64, SchemeKind)> = self
            .values
            .iter()
            .flat_map(|&v| self.schemes.iter().map(move |&k| (v, k)))
            .collect();
        points
            .into_par_iter()
            .map(|(value, scheme)| {
                let at = || format!("{} = {}, scheme {}", self.param, format_value(value), scheme.name());
                let s = self.scenario_at(value)?;
                let id = scheme.resolve(&s).with_context(at)?;
                let d = dof(&s, &id).with_context(at)?;
                let baseline = dof_direct_link(&s).with_context(at)?.total.to_f64();
                Ok(SweepRow {
                    value,
                    dof: d,
                    baseline,
                })
            })
            .collect()
    }
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("swept_value,scheme,dof_numerator,dof_denominator,dof_float,n_r_opt,baseline_dof_float,notes\n");
    for r in rows {
        let n_r: Vec<String> = r.dof.n_r_opt.iter().map(u32::to_string).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            format_value(r.value),
            csv_field(&r.dof.scheme_id.to_string()),
            r.dof.total.numerator(),
            r.dof.total.denominator(),
            r.dof.total.to_f64(),
            n_r.join(";"),
            r.baseline,
            csv_field(&r.dof.consistency_notes.join("; ")),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use relay_dof::Coherence::{Finite, Infinite};

    fn spec(param: Param, values: &[f64]) -> SweepSpec {
        SweepSpec {
            template: Scenario::simple(3, 3, 5, Finite(10), Infinite, Finite(10)),
            param,
            values: values.to_vec(),
            schemes: vec![SchemeKind::StaticEqual],
            relay: None,
            independent: false,
        }
    }

    #[test]
    fn t_sd_keeps_the_template_ratios() {
        let s = spec(Param::TSd, &[]).scenario_at(20.0).unwrap();
        assert_eq!((s.t_sd, s.relays[0].t_rd, s.relays[0].t_sr), (Finite(20), Finite(20), Infinite));
        let mut independent = spec(Param::TSd, &[]);
        independent.independent = true;
        assert_eq!(independent.scenario_at(20.0).unwrap().relays[0].t_rd, Finite(10));
    }

    #[test]
    fn k_is_a_multiple_of_t_sd() {
        let s = spec(Param::K, &[]).scenario_at(3.0).unwrap();
        assert_eq!(s.relays[0].t_sr, Finite(30));
        let s = spec(Param::KPrime, &[]).scenario_at(2.0).unwrap();
        assert_eq!(s.relays[0].t_rd, Finite(20));
        assert!(spec(Param::K, &[]).scenario_at(0.0).is_err());
    }

    #[test]
    fn rows_come_back_in_value_order() {
        let values: Vec<f64> = (10..60).rev().map(f64::from).collect();
        let rows = spec(Param::TSd, &values).run().unwrap();
        let got: Vec<f64> = rows.iter().map(|r| r.value).collect();
        assert_eq!(got, values);
    }

    #[test]
    fn csv_fractions_parse_back() {
        let rows = spec(Param::TSd, &[10.0, 11.0, 13.0]).run().unwrap();
        let csv = sweep_csv(&rows);
        for (line, row) in csv.lines().skip(1).zip(&rows) {
            let f: Vec<&str> = line.split(',').collect();
            let back = relay_dof::Rational::new(f[2].parse().unwrap(), f[3].parse().unwrap());
            assert_eq!(back, row.dof.total);
        }
        assert!(csv.lines().nth(1).unwrap().starts_with("10,thm1-equal,12,5,2.4,1,2.1,"));
    }

    #[test]
    fn parameter_names() {
        assert_eq!("t_sd".parse::<Param>().unwrap(), Param::TSd);
        assert_eq!("K'".parse::<Param>().unwrap(), Param::KPrime);
        assert!("T_XY".parse::<Param>().is_err());
    }
}
