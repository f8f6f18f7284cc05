use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::plan::{Link, LinkTiming};
use crate::scenario::Scenario;

use super::linalg::{CMatrix, C64};

/// Block-fading matrices of one link, one per coherence block overlapping the
/// run, starting with the block that holds slot 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannel {
    pub timing: LinkTiming,
    pub blocks: Vec<CMatrix>,
}

impl LinkChannel {
    pub fn at(&self, tau: u64) -> &CMatrix {
        let b = (self.timing.global_block(tau) - self.timing.global_block(0)) as usize;
        &self.blocks[b.min(self.blocks.len() - 1)]
    }
}

/// Channel draws for every link of a scenario over `slots` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub seed: u64,
    pub slots: u64,
    pub links: Vec<LinkChannel>,
}

impl ChannelRealization {
    pub fn link(&self, link: Link) -> &LinkChannel {
        self.links
            .iter()
            .find(|l| l.timing.link == link)
            .expect("realization covers every link of its scenario")
    }

    pub fn link_mut(&mut self, link: Link) -> &mut LinkChannel {
        self.links
            .iter_mut()
            .find(|l| l.timing.link == link)
            .expect("realization covers every link of its scenario")
    }
}

/// Stream id of each link's generator, so links draw independently of each other.
fn stream_of(link: Link) -> u64 {
    match link {
        Link::SourceDestination => 0,
        Link::SourceRelay(i) => 1 + 2 * i as u64,
        Link::RelayDestination(i) => 2 + 2 * i as u64,
    }
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub(crate) fn cn01(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub(crate) fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    // Column-major fill keeps draws independent of how nalgebra iterates.
    let data: Vec<C64> = (0..rows * cols).map(|_| cn01(rng)).collect();
    CMatrix::from_vec(rows, cols, data)
}

/// Independent i.i.d. CN(0,1) matrices per coherence block of every link.
///
/// Infinite coherence yields a single matrix. The draws of a link depend only
/// on the seed and the link, never on other links or on `slots` beyond the
/// number of blocks.
pub fn sample_channels(s: &Scenario, seed: u64, slots: u64) -> ChannelRealization {
    let mut links = vec![(
        LinkTiming {
            link: Link::SourceDestination,
            coherence: s.t_sd,
            offset: 0,
        },
        s.n_d,
        s.n_s,
    )];
    for (i, r) in s.relays.iter().enumerate() {
        links.push((
            LinkTiming {
                link: Link::SourceRelay(i),
                coherence: r.t_sr,
                offset: r.offset_sr,
            },
            r.n_r_rx,
            s.n_s,
        ));
        links.push((
            LinkTiming {
                link: Link::RelayDestination(i),
                coherence: r.t_rd,
                offset: r.offset_rd,
            },
            s.n_d,
            r.tx_max(),
        ));
    }
    let links = links
        .into_iter()
        .map(|(timing, rows, cols)| {
            let mut rng = rng_for(seed, stream_of(timing.link));
            let count = timing.global_block(slots.max(1) - 1) - timing.global_block(0) + 1;
            let blocks = (0..count)
                .map(|_| gaussian_matrix(&mut rng, rows as usize, cols as usize))
                .collect();
            LinkChannel { timing, blocks }
        })
        .collect();
    ChannelRealization { seed, slots, links }
}
