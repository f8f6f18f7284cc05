//! Closed-form DoF expressions in their published min{…}-product shape,
//! evaluated term by term next to the slot accounting.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::scenario::{validate_scenario, Scenario};

use super::accounting::{evaluate_unchecked, schedule_terms};
use super::scheme::{ScheduleMode, SchemeId, SlowLayout, StaticLayout};
use super::max_activation;

/// One activation of the crosscheck report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrosscheckRow {
    pub n_r: u32,
    /// `None` where the closed form divides by zero.
    pub printed: Option<Rational>,
    /// `None` where the activation leaves a negative data-slot count.
    pub canonical: Option<Rational>,
    /// `None` when either side is undefined.
    pub equal: Option<bool>,
}

fn int(v: impl Into<i128>) -> Rational {
    Rational::from_int(v.into())
}

fn fin(t: crate::scenario::Coherence) -> Rational {
    int(t.finite().expect("finite coherence checked by the scheme precondition") as i128)
}

/// Value of the published expression for `scheme` at activation `n_r`.
///
/// `Ok(None)` when the scheme has no such expression or the expression is
/// undefined at this point.
pub fn printed_value(s: &Scenario, scheme: &SchemeId, n_r: u32) -> Result<Option<Rational>> {
    scheme.check(s)?;
    let Some(r) = s.relays.first() else {
        return Ok(None);
    };
    let ns = int(s.n_s);
    let nss = int(s.n_s_star(0));
    let n = int(n_r);
    let one = Rational::ONE;
    let d = |t: Rational| t - n - ns;
    let out = match *scheme {
        SchemeId::StaticRelay(layout) => {
            let sd = fin(s.t_sd);
            match layout {
                StaticLayout::EqualTsdTrd => (!d(sd).is_zero()).then(|| {
                    (one - (ns + n) / sd) * (ns + n).min(ns + nss * ns / d(sd))
                }),
                StaticLayout::TrdMultiple(k) => {
                    let k = int(k as i128);
                    (!d(sd).is_zero()).then(|| {
                        let kd = k * d(sd);
                        let a = (ns + n) * (one + (k - one) * n / kd);
                        let b = ns * (one + (k * nss + (k - one) * n) / kd);
                        (one - (ns + n) / sd) * a.min(b)
                    })
                }
                StaticLayout::TsdMultiple(k) => {
                    let k = int(k as i128);
                    let rd = fin(r.t_rd);
                    let gap = rd - n;
                    (!gap.is_zero()).then(|| {
                        let a = (ns + n) * (one + ns / (k * gap));
                        let b = ns * (one + (k * nss - ns) / (k * gap));
                        (one - n / rd) * a.min(b)
                    })
                }
            }
        }
        SchemeId::SlowRelay(layout) => {
            let sd = fin(s.t_sd);
            match layout {
                SlowLayout::EqualTsdTrd(k) => {
                    let k = int(k as i128);
                    (!d(sd).is_zero()).then(|| {
                        let b = ns + (k - one) * nss * ns / (k * d(sd));
                        (one - (ns + n) / sd) * (ns + n).min(b)
                    })
                }
                SlowLayout::TrdMultiple(k, k2) => {
                    let (k, k2) = (int(k as i128), int(k2 as i128));
                    (!d(sd).is_zero()).then(|| {
                        let a = (ns + n) * (one + (k2 - one) * n / (k2 * d(sd)));
                        let b = ns
                            * (one
                                + (k2 * (k - one) * nss + k * (k2 - one) * n) / (k * k2 * d(sd)));
                        (one - (ns + n) / sd) * a.min(b)
                    })
                }
                SlowLayout::TsdMultiple(k, k2) => {
                    let (k, k2) = (int(k as i128), int(k2 as i128));
                    let rd = fin(r.t_rd);
                    let gap = rd - n;
                    (!gap.is_zero()).then(|| {
                        let a = (ns + n) * (one - ns / (k2 * gap));
                        let b = ns * (one + ((k - one) * nss - k * ns) / (k * k2 * gap));
                        (one - n / rd) * a.min(b)
                    })
                }
            }
        }
        SchemeId::Scheduled(ScheduleMode::Aligned) => {
            let sd = fin(s.t_sd);
            let d1 = ns * d(sd);
            let d2 = n * d(sd);
            let d3 = ns * nss;
            if d2 <= d3 {
                Some((d1 + d2) / sd)
            } else {
                Some(((d2 - d3) / d2 * ns * (sd - ns) + d3 / d2 * (d1 + d2)) / sd)
            }
        }
        SchemeId::Scheduled(ScheduleMode::General) => general_schedule_with_rd_surplus(s, n_r),
        _ => None,
    };
    Ok(out)
}

/// General-mode scheduling with the decodable surplus taken against `T_RD`
/// instead of `T_SR`.
pub(crate) fn general_schedule_with_rd_surplus(s: &Scenario, n_r: u32) -> Option<Rational> {
    let t = schedule_terms(s, ScheduleMode::General, n_r)?;
    let r = &s.relays[0];
    let d3 = int(s.n_s_star(0)) * int(s.n_s) * (s.t_sd.reciprocal() - r.t_rd.reciprocal());
    if t.d2 <= d3 {
        Some(t.d1 + t.d2)
    } else {
        Some((t.d2 - d3) / t.d2 * t.direct + d3 / t.d2 * (t.d1 + t.d2))
    }
}

/// Published expression against slot accounting for every activation
/// `0..=min(N_S, N_D − N_S, n_R)`.
pub fn crosscheck_printed(s: &Scenario, scheme: &SchemeId) -> Result<Vec<CrosscheckRow>> {
    validate_scenario(s)?;
    scheme.check(s)?;
    if !matches!(
        scheme,
        SchemeId::StaticRelay(_) | SchemeId::SlowRelay(_) | SchemeId::Scheduled(_)
    ) {
        return Err(Error::precondition(scheme, "a scheme with a published closed form"));
    }
    let k = s.relays.len();
    (0..=max_activation(s, 0))
        .map(|n| {
            let mut act = vec![0; k];
            act[0] = n;
            let canonical = evaluate_unchecked(s, scheme, &act).map(|e| e.total);
            let printed = printed_value(s, scheme, n)?;
            let equal = match (printed, canonical) {
                (Some(p), Some(c)) => Some(p == c),
                _ => None,
            };
            Ok(CrosscheckRow {
                n_r: n,
                printed,
                canonical,
                equal,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Coherence::{Finite, Infinite};

    fn row(rows: &[CrosscheckRow], n: u32) -> &CrosscheckRow {
        rows.iter().find(|r| r.n_r == n).unwrap()
    }

    #[test]
    fn toy_agrees() {
        let s = Scenario::simple(2, 2, 3, Finite(8), Infinite, Finite(8));
        let rows = crosscheck_printed(&s, &SchemeId::StaticRelay(StaticLayout::EqualTsdTrd)).unwrap();
        let r1 = row(&rows, 1);
        assert_eq!(r1.printed, Some(Rational::new(7, 4)));
        assert_eq!(r1.equal, Some(true));
    }

    #[test]
    fn rd_multiple_agrees() {
        let s = Scenario::simple(3, 3, 5, Finite(10), Infinite, Finite(20));
        let rows = crosscheck_printed(&s, &SchemeId::StaticRelay(StaticLayout::TrdMultiple(2))).unwrap();
        let r2 = row(&rows, 2);
        assert_eq!(r2.printed, Some(Rational::new(27, 10)));
        assert_eq!(r2.equal, Some(true));
    }

    #[test]
    fn sd_multiple_disagrees_on_short_rd_blocks() {
        let s = Scenario::simple(3, 3, 5, Finite(12), Infinite, Finite(4));
        let rows = crosscheck_printed(&s, &SchemeId::StaticRelay(StaticLayout::TsdMultiple(3))).unwrap();
        let r1 = row(&rows, 1);
        assert_eq!(r1.printed, Some(Rational::new(15, 4)));
        assert_eq!(r1.canonical, Some(Rational::new(2, 1)));
        assert_eq!(r1.equal, Some(false));
    }

    #[test]
    fn zero_data_gap_is_undefined() {
        // T - N_S - n_r = 0 at n_r = 2.
        let s = Scenario::simple(2, 2, 4, Finite(4), Infinite, Finite(4));
        let rows = crosscheck_printed(&s, &SchemeId::StaticRelay(StaticLayout::EqualTsdTrd)).unwrap();
        assert_eq!(row(&rows, 2).printed, None);
        assert_eq!(row(&rows, 2).equal, None);
    }

    #[test]
    fn schemes_without_closed_form_are_rejected() {
        let s = Scenario::simple(2, 2, 3, Finite(8), Finite(16), Finite(12));
        assert!(crosscheck_printed(&s, &SchemeId::Arbitrary).is_err());
    }
}
