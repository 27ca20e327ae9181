//! Seeded random paths and time changes for law tests and fuzz probes.
//!
//! Everything is driven by a caller-provided RNG so test suites stay
//! deterministic; `rng_for` builds the per-stream generator used across the
//! crate (one ChaCha stream per path index).

use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;

use crate::path::{CadlagPath, TimeChange};

/// Counter-mode generator for `(seed, stream)`: same pair, same draws, on
/// any worker layout.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in `[0,1)`.
pub fn u01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `(0,1]`.
pub fn u01_open_closed(rng: &mut impl RngCore) -> f64 {
    1.0 - u01(rng)
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * u01(rng)
}

/// Standard exponential draw.
pub fn exp1(rng: &mut impl RngCore) -> f64 {
    -crate::math::ln(u01_open_closed(rng))
}

fn sorted_distinct_times(rng: &mut impl RngCore, n: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..n).map(|_| uniform(rng, 0.01, 0.999)).collect();
    ts.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    ts
}

/// Random path with at most `max_jumps` jumps and a random piecewise-linear
/// skeleton (constant for roughly a third of draws, so step-function cases
/// stay covered).
pub fn random_path(rng: &mut impl RngCore, max_jumps: usize) -> CadlagPath {
    let n_jumps = (rng.next_u64() % (max_jumps as u64 + 1)) as usize;
    let times = sorted_distinct_times(rng, n_jumps);
    let jumps: Vec<(f64, f64)> = times
        .into_iter()
        .map(|t| {
            let mut s = uniform(rng, -2.0, 2.0);
            if s.abs() < 0.05 {
                s = if s >= 0.0 { 0.05 } else { -0.05 };
            }
            (t, s)
        })
        .collect();

    let kind = rng.next_u64() % 3;
    let skeleton: Vec<(f64, f64)> = match kind {
        0 => {
            let v = uniform(rng, -1.0, 1.0);
            alloc::vec![(0.0, v), (1.0, v)]
        }
        1 => alloc::vec![(0.0, uniform(rng, -1.0, 1.0)), (1.0, uniform(rng, -1.0, 1.0))],
        _ => {
            let inner = 1 + (rng.next_u64() % 3) as usize;
            let mut knots = alloc::vec![(0.0, uniform(rng, -1.0, 1.0))];
            let mut ts = sorted_distinct_times(rng, inner);
            ts.retain(|t| *t > 0.0 && *t < 1.0);
            for t in ts {
                knots.push((t, uniform(rng, -1.5, 1.5)));
            }
            knots.push((1.0, uniform(rng, -1.0, 1.0)));
            knots
        }
    };
    CadlagPath::new(skeleton, jumps).expect("generated path is valid")
}

/// Random pure step path (constant skeleton) with at most `max_jumps` jumps.
pub fn random_step_path(rng: &mut impl RngCore, max_jumps: usize) -> CadlagPath {
    let n_jumps = (rng.next_u64() % (max_jumps as u64 + 1)) as usize;
    let times = sorted_distinct_times(rng, n_jumps);
    let jumps: Vec<(f64, f64)> = times
        .into_iter()
        .map(|t| {
            let mut s = uniform(rng, -2.0, 2.0);
            if s.abs() < 0.05 {
                s = if s >= 0.0 { 0.05 } else { -0.05 };
            }
            (t, s)
        })
        .collect();
    CadlagPath::step(uniform(rng, -1.0, 1.0), &jumps).expect("generated step path is valid")
}

/// Random piecewise-linear time change with at most `max_knots` interior
/// knots.
pub fn random_time_change(rng: &mut impl RngCore, max_knots: usize) -> TimeChange {
    let n = (rng.next_u64() % (max_knots as u64 + 1)) as usize;
    let mut us = sorted_distinct_times(rng, n);
    let mut vs = sorted_distinct_times(rng, n);
    let k = us.len().min(vs.len());
    us.truncate(k);
    vs.truncate(k);
    let mut knots = alloc::vec![(0.0, 0.0)];
    knots.extend(us.into_iter().zip(vs));
    knots.push((1.0, 1.0));
    TimeChange::new(knots).expect("generated time change is valid")
}
