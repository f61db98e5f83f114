//! Exact simulation of the rumour chain and Monte Carlo estimation.
//!
//! Every replication owns two ChaCha8 streams keyed by the master seed: one
//! picks transitions, the other draws holding times. A replication is
//! therefore a pure function of `(master_seed, rep)`, whatever the number of
//! worker threads, and jump-chain and exact-time runs of the same replication
//! visit the same states.

mod oracle;
mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::solve_x_infinity;
use crate::model::{jump_weights, ModelParams, PopulationState, Transition};

pub use oracle::{
    exact_final_distribution, exact_final_distribution_with_limit, FinalDistribution, DEFAULT_ORACLE_MAX_N,
};
pub use stats::{chi_square_gof, verify, Check, GofResult, McStats, Moments, VerificationReport, VerifyConfig};

/// Replications handled sequentially by one task. Fixed so that the order
/// of floating-point accumulation does not depend on the worker count.
pub const BLOCK_SIZE: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Gillespie: holding times are drawn and the absorption time reported.
    ExactTime,
    /// Embedded jump chain only.
    #[default]
    JumpChain,
}

/// Seed material for one replication.
#[derive(Debug, Clone)]
pub struct StreamSeed {
    base: ChaCha8Rng,
    rep: u64,
}

impl StreamSeed {
    pub fn new(master_seed: u64, rep: u64) -> Self {
        StreamSeed { base: ChaCha8Rng::seed_from_u64(master_seed), rep }
    }

    fn with_base(base: &ChaCha8Rng, rep: u64) -> Self {
        StreamSeed { base: base.clone(), rep }
    }

    fn stream(&self, sub: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(self.rep.wrapping_mul(2).wrapping_add(sub));
        rng.set_word_pos(0);
        rng
    }

    pub fn selection(&self) -> ChaCha8Rng {
        self.stream(0)
    }

    pub fn holding(&self) -> ChaCha8Rng {
        self.stream(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub final_state: PopulationState,
    /// Only set in [`Mode::ExactTime`].
    pub absorption_time: Option<f64>,
    pub jump_count: u64,
}

/// Picks a transition with probability proportional to its weight.
#[inline]
fn select(weights: [f64; 4], total: f64, draw: f64) -> Transition {
    let target = draw * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if target < acc {
                return Transition::ALL[i];
            }
        }
    }
    // rounding left target at or above the accumulated total
    Transition::ALL[last_positive]
}

/// Runs one replication from `(N, 0, 1, 0)` until no spreaders are left.
pub fn run_one(n: u64, p: &ModelParams, seed: &StreamSeed, mode: Mode) -> Result<SimulationOutcome> {
    if n < 1 {
        return Err(Error::InvalidArgument("population parameter n must be >= 1".into()));
    }
    Ok(run_unchecked(n, p, seed, mode))
}

fn run_unchecked(n: u64, p: &ModelParams, seed: &StreamSeed, mode: Mode) -> SimulationOutcome {
    let mut state = PopulationState::initial(n);
    let mut select_rng = seed.selection();
    let mut hold_rng = match mode {
        Mode::ExactTime => Some(seed.holding()),
        Mode::JumpChain => None,
    };
    let mut time = 0.0;
    let mut jumps = 0u64;
    while state.y > 0 {
        let w = jump_weights(&state, p);
        let total = w.total();
        if let Some(rng) = hold_rng.as_mut() {
            let e: f64 = rng.sample(Exp1);
            time += e / (p.lambda() * total);
        }
        let draw: f64 = select_rng.random();
        state.apply(select(w.as_array(), total, draw));
        jumps += 1;
    }
    SimulationOutcome { final_state: state, absorption_time: hold_rng.map(|_| time), jump_count: jumps }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))
}

/// Runs replications `reps` (an index range) and returns their outcomes in order.
pub fn run_replications(
    n: u64,
    p: &ModelParams,
    master_seed: u64,
    reps: std::ops::Range<u64>,
    mode: Mode,
    workers: usize,
) -> Result<Vec<SimulationOutcome>> {
    if n < 1 {
        return Err(Error::InvalidArgument("population parameter n must be >= 1".into()));
    }
    let base = ChaCha8Rng::seed_from_u64(master_seed);
    pool(workers)?.install(|| {
        Ok(reps.into_par_iter().map(|rep| run_unchecked(n, p, &StreamSeed::with_base(&base, rep), mode)).collect())
    })
}

/// Sufficient statistics of `reps` replications, merged in replication order.
pub fn monte_carlo(
    n: u64,
    reps: u64,
    p: &ModelParams,
    master_seed: u64,
    workers: usize,
    mode: Mode,
) -> Result<McStats> {
    monte_carlo_range(n, 0..reps, p, master_seed, workers, mode)
}

/// Like [`monte_carlo`] for an arbitrary replication index range; disjoint
/// ranges merge into the statistics of their union.
pub fn monte_carlo_range(
    n: u64,
    reps: std::ops::Range<u64>,
    p: &ModelParams,
    master_seed: u64,
    workers: usize,
    mode: Mode,
) -> Result<McStats> {
    if n < 1 {
        return Err(Error::InvalidArgument("population parameter n must be >= 1".into()));
    }
    let lim = solve_x_infinity(p)?;
    let cutoff = McStats::minor_cutoff_for(n, lim.x_inf);
    let empty = McStats::empty(n, master_seed, cutoff);
    let base = ChaCha8Rng::seed_from_u64(master_seed);
    let (start, end) = (reps.start, reps.end.max(reps.start));
    let blocks: Vec<u64> = (start..end).step_by(BLOCK_SIZE as usize).collect();
    let partials: Vec<McStats> = pool(workers)?.install(|| {
        blocks
            .par_iter()
            .map(|&b| {
                let mut s = empty.clone();
                for rep in b..(b + BLOCK_SIZE).min(end) {
                    s.record(&run_unchecked(n, p, &StreamSeed::with_base(&base, rep), mode));
                }
                s
            })
            .collect()
    });
    partials.into_iter().try_fold(empty, |acc, s| acc.merge(&s))
}

/// Histogram of final `(X, U)` over `reps` replications, ordered by key.
pub fn final_state_counts(
    n: u64,
    reps: u64,
    p: &ModelParams,
    master_seed: u64,
    workers: usize,
    mode: Mode,
) -> Result<std::collections::BTreeMap<(u64, u64), u64>> {
    let outcomes = run_replications(n, p, master_seed, 0..reps, mode, workers)?;
    let mut counts = std::collections::BTreeMap::new();
    for o in outcomes {
        *counts.entry((o.final_state.x, o.final_state.u)).or_insert(0) += 1;
    }
    Ok(counts)
}
