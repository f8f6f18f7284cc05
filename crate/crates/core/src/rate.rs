//! Achievable-rate Monte Carlo and the high-SNR slope that estimates the DoF.

use rayon::prelude::*;
use serde::Serialize;

use crate::dof::SchemeId;
use crate::error::{Error, Result};
use crate::plan::{build_frame_plan, FramePlan};
use crate::scenario::Scenario;
use crate::sim::{log2_det_gram, run_end_to_end, sample_channels, EndToEnd, Noise, Payload, SymbolKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub snr_db: f64,
    /// Bits per slot, averaged over the super-interval.
    pub rate: f64,
    pub trials: usize,
    pub std_err: f64,
}

/// Rate of `scheme` at `snr_db`, averaged over `trials` independent channel draws.
pub fn estimate_rate(s: &Scenario, scheme: &SchemeId, snr_db: f64, trials: usize, seed: u64) -> Result<RatePoint> {
    let plan = build_frame_plan(s, scheme)?;
    estimate_plan_rate(s, &plan, snr_db, trials, seed, SymbolKind::Gaussian)
}

/// Same as [`estimate_rate`] for a prepared plan.
pub fn estimate_plan_rate(
    s: &Scenario,
    plan: &FramePlan,
    snr_db: f64,
    trials: usize,
    seed: u64,
    symbols: SymbolKind,
) -> Result<RatePoint> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    let rho = 10f64.powf(snr_db / 10.0);
    if rho == 0.0 {
        return Ok(RatePoint {
            snr_db,
            rate: 0.0,
            trials,
            std_err: 0.0,
        });
    }
    let rates: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|k| trial_rate(s, plan, rho, trial_seed(seed, k), symbols))
        .collect::<Result<_>>()?;
    let n = trials as f64;
    let mean = pairwise_sum(&rates) / n;
    let std_err = if trials > 1 {
        let dev: Vec<f64> = rates.iter().map(|r| (r - mean).powi(2)).collect();
        (pairwise_sum(&dev) / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(RatePoint {
        snr_db,
        rate: mean,
        trials,
        std_err,
    })
}

fn trial_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Summation by halves; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Rate of one channel draw, measured in the second super-interval where the
/// relays forward.
fn trial_rate(s: &Scenario, plan: &FramePlan, rho: f64, seed: u64, symbols: SymbolKind) -> Result<f64> {
    let ch = sample_channels(s, seed, plan.super_interval * 2);
    let payload = Payload::random(plan, 2, seed ^ 0xA5A5_A5A5, symbols);
    let out = run_end_to_end(s, plan, &payload, Noise::Snr(rho), &ch)?;
    Ok(interval_rate(plan, &out, 1))
}

/// Gaussian-input log-det rate of one super-interval with the estimated
/// channels taken as exact; each relay contributes the lesser of what it
/// delivers to the destination and what it decodes from the source.
pub fn interval_rate(plan: &FramePlan, out: &EndToEnd, interval: usize) -> f64 {
    let k = plan.activation.len();
    let mut source = Vec::new();
    let mut relay_dest: Vec<Vec<f64>> = vec![Vec::new(); k];
    for d in out.data_slots.iter().filter(|d| d.interval == interval) {
        let mut cols = d.source_cols;
        let mut prev = log2_det_gram(&d.channel.columns(0, cols).into_owned());
        source.push(prev);
        for &(i, q) in &d.relay_cols {
            cols += q;
            let now = log2_det_gram(&d.channel.columns(0, cols).into_owned());
            relay_dest[i].push(now - prev);
            prev = now;
        }
    }
    let mut decode: Vec<Vec<f64>> = vec![Vec::new(); k];
    for c in out.carriers.iter().filter(|c| c.interval == interval) {
        decode[c.relay].push(log2_det_gram(&c.channel));
    }
    let relay: f64 = (0..k)
        .map(|i| pairwise_sum(&relay_dest[i]).min(pairwise_sum(&decode[i])))
        .sum();
    (pairwise_sum(&source) + relay) / plan.super_interval as f64
}

/// Least-squares slope of rate against `log₂ ρ` and the RMS fit residual.
pub fn estimate_dof_slope(points: &[RatePoint]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::TooFewRatePoints);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.snr_db / 10.0 * std::f64::consts::LOG2_10).collect();
    let n = points.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|p| p.rate).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx.is_nan() || sxx <= 0.0 {
        return Err(Error::TooFewRatePoints);
    }
    let sxy: f64 = xs.iter().zip(points).map(|(x, p)| (x - mx) * (p.rate - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(points)
        .map(|(x, p)| (p.rate - intercept - slope * x).powi(2))
        .sum();
    Ok((slope, (rss / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dof::StaticLayout;
    use crate::scenario::Coherence::{Finite, Infinite};

    fn point(snr_db: f64, rate: f64) -> RatePoint {
        RatePoint {
            snr_db,
            rate,
            trials: 1,
            std_err: 0.0,
        }
    }

    fn toy() -> Scenario {
        Scenario::simple(2, 2, 3, Finite(8), Infinite, Finite(8))
    }

    #[test]
    fn exact_line_has_zero_residual() {
        let pts: Vec<RatePoint> = [0.0, 10.0, 20.0, 30.0]
            .iter()
            .map(|&db| point(db, 2.0 * (db / 10.0 * std::f64::consts::LOG2_10) + 3.0))
            .collect();
        let (slope, res) = estimate_dof_slope(&pts).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn one_point_is_not_enough() {
        assert_eq!(estimate_dof_slope(&[point(10.0, 1.0)]), Err(Error::TooFewRatePoints));
        assert_eq!(
            estimate_dof_slope(&[point(10.0, 1.0), point(10.0, 2.0)]),
            Err(Error::TooFewRatePoints)
        );
    }

    #[test]
    fn zero_power_gives_zero_rate() {
        let p = estimate_rate(&toy(), &SchemeId::DirectLink, f64::NEG_INFINITY, 4, 1).unwrap();
        assert_eq!(p.rate, 0.0);
    }

    #[test]
    fn same_seed_same_point() {
        let scheme = SchemeId::StaticRelay(StaticLayout::EqualTsdTrd);
        let a = estimate_rate(&toy(), &scheme, 20.0, 16, 5).unwrap();
        let b = estimate_rate(&toy(), &scheme, 20.0, 16, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.rate > 0.0 && a.std_err > 0.0);
    }

    #[test]
    fn zero_trials_is_an_error() {
        assert!(estimate_rate(&toy(), &SchemeId::DirectLink, 10.0, 0, 1).is_err());
    }

    #[test]
    fn scalar_direct_link_has_unit_slope() {
        let s = Scenario::simple(1, 1, 1, Infinite, Infinite, Infinite);
        let pts: Vec<RatePoint> = [30.0, 40.0, 50.0]
            .iter()
            .map(|&db| estimate_rate(&s, &SchemeId::DirectLink, db, 200, 3).unwrap())
            .collect();
        let (slope, _) = estimate_dof_slope(&pts).unwrap();
        assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
        let last = pts.last().unwrap();
        let log_rho = 50.0 / 10.0 * std::f64::consts::LOG2_10;
        assert!((last.rate / log_rho - 1.0).abs() < 0.1);
    }

    #[test]
    fn rate_grows_with_snr() {
        let scheme = SchemeId::StaticRelay(StaticLayout::EqualTsdTrd);
        let pts: Vec<RatePoint> = [10.0, 20.0, 30.0]
            .iter()
            .map(|&db| estimate_rate(&toy(), &scheme, db, 64, 9).unwrap())
            .collect();
        for w in pts.windows(2) {
            assert!(w[1].rate + 2.0 * w[1].std_err >= w[0].rate);
        }
    }

    #[test]
    fn std_err_shrinks_with_trials() {
        let few = estimate_rate(&toy(), &SchemeId::DirectLink, 20.0, 50, 2).unwrap();
        let many = estimate_rate(&toy(), &SchemeId::DirectLink, 20.0, 800, 2).unwrap();
        let ratio = few.std_err / many.std_err;
        assert!((2.5..6.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn pairwise_sum_matches_plain_sum() {
        let xs: Vec<f64> = (0..1000).map(|k| k as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&xs), xs.iter().sum::<f64>());
    }
}
