use relay_dof::dof::{ScheduleMode, SchemeId, SlowLayout, StaticLayout};
use relay_dof::{Coherence, RelayConfig, Scenario};

use Coherence::{Finite, Infinite};

/// Small scenarios paired with every scheme whose coherence structure they
/// satisfy, including staggered relay links.
pub fn scheme_grid() -> Vec<(Scenario, SchemeId)> {
    let mut out = Vec::new();
    let antennas = [(1, 1, 2), (2, 2, 3), (2, 1, 4), (3, 3, 5), (2, 3, 5), (3, 2, 6)];
    for &(ns, nr, nd) in &antennas {
        let sim = |sd, sr, rd| Scenario::simple(ns, nr, nd, sd, sr, rd);
        for t in [3u64, 5, 8, 12] {
            out.push((sim(Finite(t), Finite(t), Finite(t)), SchemeId::Identical));
            out.push((sim(Finite(t), Infinite, Finite(t)), SchemeId::DirectLink));
            let equal = SchemeId::StaticRelay(StaticLayout::EqualTsdTrd);
            out.push((sim(Finite(t), Infinite, Finite(t)), equal));
            let mut staggered = sim(Finite(t), Infinite, Finite(t));
            staggered.relays[0].offset_rd = t / 2;
            out.push((staggered, equal));
            out.push((sim(Finite(t), Infinite, Finite(t)), SchemeId::Scheduled(ScheduleMode::Aligned)));
            for k in [2u64, 3] {
                out.push((sim(Finite(t), Infinite, Finite(k * t)), SchemeId::StaticRelay(StaticLayout::TrdMultiple(k))));
                out.push((sim(Finite(k * t), Infinite, Finite(t)), SchemeId::StaticRelay(StaticLayout::TsdMultiple(k))));
                out.push((sim(Finite(t), Finite(k * t), Finite(t)), SchemeId::SlowRelay(SlowLayout::EqualTsdTrd(k))));
                for k2 in [1u64, 2, 4] {
                    if k2 % k == 0 || k % k2 == 0 {
                        out.push((
                            sim(Finite(t), Finite(k * t), Finite(k2 * t)),
                            SchemeId::SlowRelay(SlowLayout::TrdMultiple(k, k2)),
                        ));
                    }
                    out.push((
                        sim(Finite(k2 * t), Finite(k * k2 * t), Finite(t)),
                        SchemeId::SlowRelay(SlowLayout::TsdMultiple(k, k2)),
                    ));
                }
            }
            for (sr, rd) in [(Infinite, Finite(2 * t)), (Finite(3 * t), Finite(2 * t)), (Finite(t + 1), Finite(t + 2))] {
                out.push((sim(Finite(t), sr, rd), SchemeId::Scheduled(ScheduleMode::General)));
            }
            if nr < nd {
                for (sr, rd) in [(2 * t, 3 * t), (t + 1, t + 3), (4 * t, 2 * t)] {
                    out.push((sim(Finite(t), Finite(sr), Finite(rd)), SchemeId::Arbitrary));
                }
            }
        }
    }
    for t in [2u64, 4, 5] {
        for (k1, k2) in [(1u64, 2u64), (2, 2), (3, 1)] {
            let mut s = Scenario::simple(3, 1, 6, Finite(t), Finite(k1 * t), Infinite);
            s.relays.push(RelayConfig::new(1, 1, Finite(k1 * k2 * t), Infinite));
            out.push((s.clone(), SchemeId::TwoRelay { k1, k2 }));
            out.push((s, SchemeId::MultiRelay));
        }
        let mut s = Scenario::simple(2, 1, 6, Finite(t), Finite(2 * t), Finite(3 * t));
        s.relays.push(RelayConfig::new(2, 2, Finite(4 * t), Finite(2 * t)));
        s.relays.push(RelayConfig::new(1, 1, Infinite, Finite(6 * t)));
        out.push((s, SchemeId::MultiRelay));
    }
    out
}
