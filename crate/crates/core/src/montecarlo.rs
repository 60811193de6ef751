//! Monte Carlo outage estimation.
//!
//! Trial `i` draws from its own ChaCha8 stream: the generator seeded with
//! `seed`, switched to stream `i` and rewound to word 0. Trials are split
//! into fixed chunks and only integer outage counts are reduced, so the
//! estimate does not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::GainSampler;
use crate::link::{GainMode, OutageEvaluator, SystemConfig};
use crate::selection::{select_ranked_into, ChannelRealization};

const CHUNK: u64 = 1 << 16;

/// Normal quantile of the reported two-sided 95% intervals.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Below this many expected outages the Wilson interval replaces the
/// normal approximation.
const WILSON_BELOW: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    /// Outage frequency per user rank.
    pub op_hat: Vec<f64>,
    pub outages: Vec<u64>,
    pub trials: u64,
    /// Half-width of the 95% interval per user rank.
    pub ci_halfwidth: Vec<f64>,
    pub seed: u64,
}

impl McEstimate {
    /// Interval `(lo, hi)` for rank `k` at normal quantile `z`.
    pub fn interval(&self, k: usize, z: f64) -> (f64, f64) {
        binomial_interval(self.outages[k - 1], self.trials, z)
    }
}

/// Two-sided binomial interval: normal approximation, or Wilson score
/// interval when `successes < 30`.
pub fn binomial_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    if p * n < WILSON_BELOW {
        let z2 = z * z;
        let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        ((center - half).max(0.0), (center + half).min(1.0))
    } else {
        let half = z * (p * (1.0 - p) / n).sqrt();
        (p - half, p + half)
    }
}

pub fn estimate_op(config: &SystemConfig, trials: u64, seed: u64, workers: usize) -> Result<McEstimate> {
    estimate_op_with_mode(config, trials, seed, workers, GainMode::Approx)
}

pub fn estimate_op_with_mode(
    config: &SystemConfig,
    trials: u64,
    seed: u64,
    workers: usize,
    mode: GainMode,
) -> Result<McEstimate> {
    config.validate()?;
    config.check_feasible_all()?;
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if workers == 0 {
        return Err(Error::Domain("at least one worker is required".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    let users = config.users();
    let chunks = trials.div_ceil(CHUNK);
    let base = ChaCha8Rng::seed_from_u64(seed);
    let s = samplers(config)?;
    let counts = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let end = ((c + 1) * CHUNK).min(trials);
                run_chunk(config, mode, &s, &base, c * CHUNK..end)
            })
            .reduce(
                || vec![0u64; users],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    });
    let op_hat: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    let ci_halfwidth = counts
        .iter()
        .map(|&c| {
            let (lo, hi) = binomial_interval(c, trials, Z_95);
            0.5 * (hi - lo)
        })
        .collect();
    Ok(McEstimate { op_hat, outages: counts, trials, ci_halfwidth, seed })
}

/// Generator for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.set_word_pos(0);
    rng
}

/// Draws every gain of one realization: the first hop row-major, then each
/// user's second-hop matrix row-major.
pub fn draw_realization<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Result<ChannelRealization> {
    config.validate()?;
    let mut r = empty_realization(config);
    fill(&mut r, &samplers(config)?, rng);
    Ok(r)
}

fn empty_realization(config: &SystemConfig) -> ChannelRealization {
    ChannelRealization::zeros(
        config.n_s as usize,
        config.n_rr as usize,
        config.n_rt as usize,
        config.n_u as usize,
        config.users(),
    )
}

fn samplers(config: &SystemConfig) -> Result<(GainSampler, GainSampler)> {
    Ok((GainSampler::new(config.first_hop()?), GainSampler::new(config.second_hop()?)))
}

fn fill<R: Rng + ?Sized>(r: &mut ChannelRealization, s: &(GainSampler, GainSampler), rng: &mut R) {
    for g in r.first_hop.as_mut_slice() {
        *g = s.0.sample(rng);
    }
    for m in &mut r.second_hop {
        for g in m.as_mut_slice() {
            *g = s.1.sample(rng);
        }
    }
}

fn run_chunk(
    config: &SystemConfig,
    mode: GainMode,
    s: &(GainSampler, GainSampler),
    base: &ChaCha8Rng,
    range: std::ops::Range<u64>,
) -> Vec<u64> {
    let users = config.users();
    let eval = OutageEvaluator::new(config, mode);
    let mut r = empty_realization(config);
    let mut votes = vec![0usize; config.n_rt as usize];
    let mut weight = vec![0.0; config.n_rt as usize];
    let mut ranked = vec![0.0; users];
    let mut out = vec![false; users];
    let mut counts = vec![0u64; users];
    for i in range {
        let mut rng = base.clone();
        rng.set_stream(i);
        rng.set_word_pos(0);
        fill(&mut r, s, &mut rng);
        let g_sr = select_ranked_into(&r, &mut votes, &mut weight, &mut ranked);
        eval.evaluate(g_sr, &ranked, &mut out);
        for (c, o) in counts.iter_mut().zip(&out) {
            *c += *o as u64;
        }
    }
    counts
}
