//! Per-activation symbol accounting for every scheme.
//!
//! Each function counts, over one super-block, the source data symbols and the
//! relay symbols (the lesser of what the relay can decode from superposed
//! pilots and what its activated antennas can carry), then divides by the
//! super-block length. `None` marks an activation with a negative data-slot
//! count.

use crate::rational::Rational;
use crate::scenario::{Coherence, Scenario};

use super::scheme::{ScheduleMode, SchemeId, SlowLayout, StaticLayout};

/// DoF of one fixed activation, split by origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub total: Rational,
    pub source_part: Rational,
    pub relay_parts: Vec<Rational>,
}

impl Evaluation {
    fn new(source: Rational, relay: Vec<Rational>) -> Self {
        Evaluation {
            total: source + relay.iter().copied().sum(),
            source_part: source,
            relay_parts: relay,
        }
    }

    /// Counts over a super-block of length `len`, relay contribution on relay 0.
    fn single(s: &Scenario, source: i128, relay: i128, len: i128) -> Self {
        let mut parts = vec![Rational::ZERO; s.relays.len().max(1)];
        parts[0] = Rational::new(relay, len);
        Evaluation::new(Rational::new(source, len), parts)
    }
}

fn fin(t: Coherence) -> i128 {
    t.finite().expect("finite coherence checked by the scheme precondition") as i128
}

/// Source-only DoF `m(1 − m/T_SD)` with `m = min(N_S, N_D)`, clamped at zero.
pub fn direct_value(s: &Scenario) -> Rational {
    let m = s.direct_streams() as i128;
    match s.t_sd {
        Coherence::Infinite => Rational::from_int(m),
        Coherence::Finite(t) => {
            let t = t as i128;
            Rational::new(m * (t - m).max(0), t)
        }
    }
}

pub(crate) fn direct_evaluation(s: &Scenario) -> Evaluation {
    Evaluation::new(direct_value(s), vec![Rational::ZERO; s.relays.len()])
}

/// Evaluates `scheme` at the given per-relay activation without re-checking
/// the scheme's preconditions.
pub(crate) fn evaluate_unchecked(s: &Scenario, scheme: &SchemeId, n: &[u32]) -> Option<Evaluation> {
    let active: u32 = n.iter().sum();
    if active == 0 {
        return Some(direct_evaluation(s));
    }
    if s.n_s >= s.n_d || active > s.n_d - s.n_s {
        return None;
    }
    for (i, &k) in n.iter().enumerate() {
        if k > s.n_s || k > s.relays[i].tx_max() {
            return None;
        }
    }
    if !scheme.is_multi_relay() && n.iter().skip(1).any(|&k| k > 0) {
        return None;
    }
    let ns = s.n_s as i128;
    let nss = s.n_s_star(0) as i128;
    let nr = n[0] as i128;
    match *scheme {
        SchemeId::DirectLink => None,
        SchemeId::Identical => {
            // Every source pilot is also the relay's pilot, so nothing rides on it.
            let t = fin(s.t_sd);
            let data = t - ns - nr;
            (data >= 0).then(|| Evaluation::single(s, ns * data, 0, t))
        }
        SchemeId::StaticRelay(layout) => static_relay(s, layout, ns, nss, nr),
        SchemeId::SlowRelay(layout) => slow_relay(s, layout, ns, nss, nr),
        SchemeId::Scheduled(mode) => scheduled(s, mode, nr),
        SchemeId::Arbitrary => arbitrary(s, ns, nss, nr),
        SchemeId::TwoRelay { .. } | SchemeId::MultiRelay => relay_chain(s, n),
    }
}

fn static_relay(s: &Scenario, layout: StaticLayout, ns: i128, nss: i128, nr: i128) -> Option<Evaluation> {
    let sd = fin(s.t_sd);
    let rd = fin(s.relays[0].t_rd);
    match layout {
        StaticLayout::EqualTsdTrd => {
            let data = sd - ns - nr;
            (data >= 0).then(|| Evaluation::single(s, ns * data, (nss * ns).min(nr * data), sd))
        }
        StaticLayout::TrdMultiple(k) => {
            let k = k as i128;
            let first = sd - ns - nr;
            if first < 0 {
                return None;
            }
            let data = first + (k - 1) * (sd - ns);
            Some(Evaluation::single(s, ns * data, (k * nss * ns).min(nr * data), k * sd))
        }
        StaticLayout::TsdMultiple(k) => {
            let k = k as i128;
            let first = rd - nr - ns;
            if first < 0 {
                return None;
            }
            let data = first + (k - 1) * (rd - nr);
            Some(Evaluation::single(s, ns * data, (nss * ns).min(nr * data), k * rd))
        }
    }
}

fn slow_relay(s: &Scenario, layout: SlowLayout, ns: i128, nss: i128, nr: i128) -> Option<Evaluation> {
    let sd = fin(s.t_sd);
    let rd = fin(s.relays[0].t_rd);
    match layout {
        SlowLayout::EqualTsdTrd(k) => {
            let k = k as i128;
            let data = sd - ns - nr;
            (data >= 0).then(|| {
                Evaluation::single(s, k * ns * data, ((k - 1) * nss * ns).min(k * nr * data), k * sd)
            })
        }
        SlowLayout::TrdMultiple(k, k2) => {
            let (k, k2) = (k as i128, k2 as i128);
            if sd - ns - nr < 0 {
                return None;
            }
            if k2 % k == 0 {
                let data = k2 * sd - nr - k2 * ns;
                let decodable = (k2 / k) * (k - 1) * nss * ns;
                Some(Evaluation::single(s, ns * data, decodable.min(nr * data), k2 * sd))
            } else {
                let data = k * sd - (k / k2) * nr - k * ns;
                let decodable = (k - 1) * nss * ns;
                Some(Evaluation::single(s, ns * data, decodable.min(nr * data), k * sd))
            }
        }
        SlowLayout::TsdMultiple(k, k2) => {
            let (k, k2) = (k as i128, k2 as i128);
            if rd - nr - ns < 0 {
                return None;
            }
            let data = k2 * rd - k2 * nr - ns;
            let decodable = (k - 1) * nss * ns;
            Some(Evaluation::single(s, k * ns * data, decodable.min(k * nr * data), k * k2 * rd))
        }
    }
}

/// The three quantities the scheduling rule trades off, normalized per slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleTerms {
    /// Source data per slot with the relay active.
    pub d1: Rational,
    /// Relay-transmittable symbols per slot.
    pub d2: Rational,
    /// Relay-decodable symbols per slot.
    pub d3: Rational,
    /// Source data per slot with the relay silent.
    pub direct: Rational,
}

pub(crate) fn schedule_terms(s: &Scenario, mode: ScheduleMode, nr: u32) -> Option<ScheduleTerms> {
    let ns = s.n_s as i128;
    let nss = s.n_s_star(0) as i128;
    let nr = nr as i128;
    let sd = fin(s.t_sd);
    let r = &s.relays[0];
    let (frac, d3) = match mode {
        ScheduleMode::Aligned => (
            Rational::new(sd - nr - ns, sd),
            Rational::new(ns * nss, sd),
        ),
        ScheduleMode::General => {
            let frac = Rational::ONE - Rational::new(ns, sd) - Rational::new(nr, fin(r.t_rd));
            let d3 = Rational::from_int(nss * ns) * (Rational::new(1, sd) - r.t_sr.reciprocal());
            (frac, d3)
        }
    };
    if frac.is_negative() || sd < ns {
        return None;
    }
    Some(ScheduleTerms {
        d1: Rational::from_int(ns) * frac,
        d2: Rational::from_int(nr) * frac,
        d3,
        direct: Rational::new(ns * (sd - ns), sd),
    })
}

fn scheduled(s: &Scenario, mode: ScheduleMode, nr: i128) -> Option<Evaluation> {
    let t = schedule_terms(s, mode, nr as u32)?;
    let mut parts = vec![Rational::ZERO; s.relays.len()];
    if t.d2 <= t.d3 {
        parts[0] = t.d2;
        return Some(Evaluation::new(t.d1, parts));
    }
    let off = (t.d2 - t.d3) / t.d2;
    let on = t.d3 / t.d2;
    parts[0] = on * t.d2;
    Some(Evaluation::new(off * t.direct + on * t.d1, parts))
}

fn arbitrary(s: &Scenario, ns: i128, nss: i128, nr: i128) -> Option<Evaluation> {
    let r = &s.relays[0];
    let (sd, sr, rd) = (fin(s.t_sd), fin(r.t_sr), fin(r.t_rd));
    let a = sr * sd * rd - ns * sr * rd - nr * sr * sd;
    if a < 0 {
        return None;
    }
    let decodable = nss * ns * (sr * rd - sd * rd);
    Some(Evaluation::single(s, ns * a, decodable.min(nr * a), sr * sd * rd))
}

/// Relays sorted by source–relay coherence, shortest first; ties keep index order.
pub(crate) fn chain_order(s: &Scenario, selected: &[usize]) -> Vec<usize> {
    let mut order = selected.to_vec();
    order.sort_by_key(|&i| (s.relays[i].t_sr.finite().unwrap_or(u64::MAX), i));
    order
}

fn relay_chain(s: &Scenario, n: &[u32]) -> Option<Evaluation> {
    let selected: Vec<usize> = (0..n.len()).filter(|&i| n[i] > 0).collect();
    let ns = Rational::from(s.n_s);
    let mut frac = Rational::ONE - ns * s.t_sd.reciprocal();
    for &i in &selected {
        frac = frac - Rational::from(n[i]) * s.relays[i].t_rd.reciprocal();
    }
    if frac.is_negative() || !s.t_sd.at_least(s.n_s as u64) {
        return None;
    }
    let mut parts = vec![Rational::ZERO; s.relays.len()];
    let mut previous = s.t_sd.reciprocal();
    for i in chain_order(s, &selected) {
        let current = s.relays[i].t_sr.reciprocal();
        let surplus = previous - current;
        if surplus.is_negative() {
            return None;
        }
        let decodable = Rational::from(s.n_s_star(i)) * ns * surplus;
        parts[i] = decodable.min(Rational::from(n[i]) * frac);
        previous = current;
    }
    Some(Evaluation::new(ns * frac, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Coherence::{Finite, Infinite};

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    fn eval(s: &Scenario, scheme: SchemeId, n: &[u32]) -> Option<Rational> {
        evaluate_unchecked(s, &scheme, n).map(|e| e.total)
    }

    #[test]
    fn direct_link_values() {
        assert_eq!(direct_value(&Scenario::simple(2, 2, 3, Finite(8), Infinite, Finite(8))), r(3, 2));
        assert_eq!(direct_value(&Scenario::simple(3, 3, 5, Finite(10), Infinite, Finite(10))), r(21, 10));
        assert_eq!(direct_value(&Scenario::simple(3, 3, 5, Infinite, Infinite, Finite(10))), r(3, 1));
        assert_eq!(direct_value(&Scenario::simple(5, 3, 3, Finite(12), Finite(12), Finite(12))), r(9, 4));
        assert_eq!(direct_value(&Scenario::simple(2, 2, 2, Finite(4), Finite(4), Finite(4))), r(1, 1));
        assert_eq!(direct_value(&Scenario::simple(3, 1, 4, Finite(2), Infinite, Finite(2))), Rational::ZERO);
    }

    #[test]
    fn static_relay_counts() {
        let toy = Scenario::simple(2, 2, 3, Finite(8), Infinite, Finite(8));
        let eq = SchemeId::StaticRelay(StaticLayout::EqualTsdTrd);
        assert_eq!(eq_values(&toy, eq, 2), vec![Some(r(3, 2)), Some(r(7, 4))]);

        let s = Scenario::simple(3, 3, 5, Finite(10), Infinite, Finite(10));
        assert_eq!(eq_values(&s, eq, 3), vec![Some(r(21, 10)), Some(r(12, 5)), Some(r(12, 5))]);

        let short_rd = Scenario::simple(3, 3, 5, Finite(12), Infinite, Finite(4));
        let tsd = SchemeId::StaticRelay(StaticLayout::TsdMultiple(3));
        assert_eq!(eq_values(&short_rd, tsd, 3), vec![Some(r(9, 4)), Some(r(2, 1)), None]);

        let s = Scenario::simple(3, 3, 5, Finite(10), Infinite, Finite(20));
        let trd = SchemeId::StaticRelay(StaticLayout::TrdMultiple(2));
        assert_eq!(eq_values(&s, trd, 3), vec![Some(r(21, 10)), Some(r(13, 5)), Some(r(27, 10))]);
    }

    fn eq_values(s: &Scenario, scheme: SchemeId, upto: u32) -> Vec<Option<Rational>> {
        (0..upto).map(|n| eval(s, scheme, &[n])).collect()
    }

    #[test]
    fn slow_relay_counts() {
        let s = Scenario::simple(3, 3, 5, Finite(10), Finite(20), Finite(10));
        let eq = SchemeId::SlowRelay(SlowLayout::EqualTsdTrd(2));
        assert_eq!(eq_values(&s, eq, 3), vec![Some(r(21, 10)), Some(r(9, 4)), Some(r(39, 20))]);
        let s = Scenario::simple(3, 3, 5, Finite(10), Finite(80), Finite(10));
        let eq = SchemeId::SlowRelay(SlowLayout::EqualTsdTrd(8));
        assert_eq!(eval(&s, eq, &[1]), Some(r(12, 5)));
    }

    #[test]
    fn scheduling_blend() {
        let s = Scenario::simple(3, 3, 5, Finite(10), Infinite, Finite(10));
        let sch = SchemeId::Scheduled(ScheduleMode::Aligned);
        assert_eq!(eval(&s, sch, &[2]), Some(r(123, 50)));
        assert_eq!(eval(&s, sch, &[1]), Some(r(12, 5)));
        let e = evaluate_unchecked(&s, &sch, &[2]).unwrap();
        assert_eq!(e.relay_parts[0], r(9, 10));
    }

    #[test]
    fn arbitrary_counts() {
        let s = Scenario::simple(2, 2, 3, Finite(8), Finite(16), Finite(12));
        assert_eq!(eval(&s, SchemeId::Arbitrary, &[1]), Some(r(19, 12)));
        assert_eq!(eval(&s, SchemeId::Arbitrary, &[0]), Some(r(3, 2)));
    }

    #[test]
    fn relay_chain_counts() {
        let mut s = Scenario::simple(3, 1, 6, Finite(5), Finite(10), Infinite);
        s.relays.push(crate::scenario::RelayConfig::new(1, 1, Finite(20), Infinite));
        let two = SchemeId::TwoRelay { k1: 2, k2: 2 };
        assert_eq!(eval(&s, two, &[1, 1]), Some(r(33, 20)));
        assert_eq!(eval(&s, two, &[0, 1]), Some(r(8, 5)));
        assert_eq!(eval(&s, two, &[0, 0]), Some(r(6, 5)));
    }
}
