//! Observation sampling from full plans.
//!
//! Each plan action is kept independently with probability `pct / 100`.
//!
//! Random streams: a sampling call is keyed by a 64-bit seed. The generator
//! is ChaCha8 seeded with `seed_from_u64(seed)`; draw `d` (0..3) of attempt
//! `r` (0..=32) reads stream `(d << 6) | r` from word position 0. Each kept
//! or dropped decision consumes one `u64`, mapped to `[0, 100)` by
//! `(x * 100) >> 64`. Problem seeds are derived from the run seed with
//! [`problem_seed`].

use std::collections::BTreeSet;
use std::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::pddl::ActionLabel;

pub const MAX_RESAMPLES: u64 = 32;
pub const DRAWS_PER_PLAN: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Observability(u8);

impl Observability {
    pub const ALL: [Observability; 5] = [
        Observability(10),
        Observability(30),
        Observability(50),
        Observability(70),
        Observability(100),
    ];
    pub const FULL: Observability = Observability(100);

    pub fn new(pct: u8) -> Result<Self, String> {
        if [10, 30, 50, 70, 100].contains(&pct) {
            Ok(Observability(pct))
        } else {
            Err(format!("observability must be one of 10, 30, 50, 70, 100 (got {pct})"))
        }
    }

    pub fn pct(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Observability {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        Observability::new(v)
    }
}

impl From<Observability> for u8 {
    fn from(o: Observability) -> u8 {
        o.0
    }
}

impl fmt::Display for Observability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::str::FromStr for Observability {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v: u8 = s
            .trim()
            .trim_end_matches('%')
            .parse()
            .map_err(|_| format!("invalid observability `{s}`"))?;
        Observability::new(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationSequence {
    pub labels: Vec<ActionLabel>,
    /// Strictly increasing plan positions; `labels[i] = plan[source_indices[i]]`.
    pub source_indices: Vec<usize>,
    pub observability: Observability,
    pub seed: u64,
}

fn keep_mask(len: usize, pct: u8, seed: u64, stream: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(0);
    (0..len)
        .filter(|_| ((rng.next_u64() as u128 * 100) >> 64) < pct as u128)
        .collect()
}

fn draw(plan: &[ActionLabel], pct: Observability, seed: u64, draw: u64) -> ObservationSequence {
    let indices = if pct == Observability::FULL {
        (0..plan.len()).collect()
    } else {
        let mut picked = Vec::new();
        for attempt in 0..=MAX_RESAMPLES {
            picked = keep_mask(plan.len(), pct.pct(), seed, (draw << 6) | attempt);
            if !picked.is_empty() {
                break;
            }
        }
        if picked.is_empty() && !plan.is_empty() {
            picked.push(0);
        }
        picked
    };
    ObservationSequence {
        labels: indices.iter().map(|&i| plan[i].clone()).collect(),
        source_indices: indices,
        observability: pct,
        seed,
    }
}

/// One observation sequence. At 100% the full plan is returned.
pub fn sample_observations(plan: &[ActionLabel], pct: Observability, seed: u64) -> ObservationSequence {
    draw(plan, pct, seed, 0)
}

/// Up to three draws with duplicate index sets removed; exactly one sequence
/// at 100%.
pub fn generate_benchmark_obs(plan: &[ActionLabel], pct: Observability, seed: u64) -> Vec<ObservationSequence> {
    if pct == Observability::FULL {
        return vec![draw(plan, pct, seed, 0)];
    }
    let mut seen = BTreeSet::new();
    (0..DRAWS_PER_PLAN)
        .map(|d| draw(plan, pct, seed, d))
        .filter(|o| seen.insert(o.source_indices.clone()))
        .collect()
}

/// Seed for one problem, derived from the run seed and a stable problem id.
pub fn problem_seed(run_seed: u64, problem_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(run_seed.to_le_bytes());
    h.update(problem_id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 yields 32 bytes"))
}
