//! Monte Carlo experiments over trimmed paths: marginal-law comparison
//! against the trimmed stable reference, tie scanning, continuity probes,
//! and ruin (first passage) estimation.
//!
//! Experiments fan path simulation out across workers keyed by the stream
//! index; every aggregate is keyed by path index before reduction, so a
//! report depends only on the configuration, never on the worker count.
//! Model paths at horizon index `h` use streams `h * n_paths + i`; the
//! stable reference uses streams offset by `2^32`.

use cadlag::j1;
use cadlag::levy::{self, LevyError, LevyModel, RngSeed};
use cadlag::trim::{self, Certificate, TrimError, TrimSpec};
use cadlag::CadlagPath;
use rayon::prelude::*;

/// Stream offset separating reference draws from model draws.
const REF_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug)]
pub enum HarnessError {
    BadConfig(&'static str),
    Levy(LevyError),
    Trim(TrimError),
    /// Ruin level must be strictly positive.
    BadLevel(f64),
    /// A perturbation family whose inputs do not J1-converge.
    FamilyDoesNotConverge,
}

impl core::fmt::Display for HarnessError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            HarnessError::BadConfig(m) => write!(f, "invalid experiment config: {m}"),
            HarnessError::Levy(e) => write!(f, "{e}"),
            HarnessError::Trim(e) => write!(f, "{e}"),
            HarnessError::BadLevel(u) => write!(f, "ruin level must be positive, got {u}"),
            HarnessError::FamilyDoesNotConverge => {
                write!(f, "perturbation family does not converge to the base path")
            }
        }
    }
}

impl From<LevyError> for HarnessError {
    fn from(e: LevyError) -> Self {
        HarnessError::Levy(e)
    }
}

impl From<TrimError> for HarnessError {
    fn from(e: TrimError) -> Self {
        HarnessError::Trim(e)
    }
}

impl std::error::Error for HarnessError {}

/// Grid experiment description shared by the marginal and ruin experiments.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: LevyModel,
    /// Increasing horizons.
    pub horizons: Vec<f64>,
    pub spec: TrimSpec,
    pub n_paths: usize,
    /// Evaluation times in (0, 1].
    pub tau_grid: Vec<f64>,
    pub base_seed: u64,
    /// Pass threshold for the KS statistic at the largest horizon.
    pub ks_threshold: f64,
    /// Series terms used for the trimmed-stable reference sample.
    pub ref_n_terms: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.model.validate().map_err(HarnessError::Levy)?;
        if self.horizons.is_empty() || self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarnessError::BadConfig("horizons must be increasing and nonempty"));
        }
        if self.horizons[0] <= 0.0 {
            return Err(HarnessError::BadConfig("horizons must be positive"));
        }
        if self.n_paths == 0 {
            return Err(HarnessError::BadConfig("n_paths must be positive"));
        }
        if self.tau_grid.is_empty() || self.tau_grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(HarnessError::BadConfig("tau grid must lie in (0,1]"));
        }
        if self.tau_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarnessError::BadConfig("tau grid must be increasing"));
        }
        if !(self.ks_threshold > 0.0 && self.ks_threshold < 1.0) {
            return Err(HarnessError::BadConfig("ks threshold must be in (0,1)"));
        }
        if self.ref_n_terms == 0 {
            return Err(HarnessError::BadConfig("ref_n_terms must be positive"));
        }
        Ok(())
    }

    /// Stable digest of the resolved configuration (FNV-1a over the debug
    /// rendering), recorded in reports for reproducibility checks.
    pub fn digest(&self) -> u64 {
        fnv1a(format!("{self:?}").as_bytes())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1_0000_01b3);
    }
    h
}

/// Two-sample Kolmogorov-Smirnov statistic (sup distance between empirical
/// CDFs); invariant under reordering of either sample.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(!xs.is_empty() && !ys.is_empty(), "KS needs nonempty samples");
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    b.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.min(*y),
            (Some(x), None) => *x,
            (None, Some(y)) => *y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// One `(horizon, tau)` cell of a marginal comparison.
#[derive(Debug, Clone)]
pub struct MarginalCell {
    pub horizon: f64,
    pub tau: f64,
    pub n: usize,
    pub ks: f64,
    pub model_mean: f64,
    pub model_var: f64,
    pub model_ci_radius: f64,
    pub ref_mean: f64,
    pub ref_var: f64,
    pub ref_ci_radius: f64,
}

/// Marginal-law comparison for one trim spec across horizons.
#[derive(Debug, Clone)]
pub struct MarginalReport {
    pub spec: TrimSpec,
    /// Horizon-major, tau-minor.
    pub cells: Vec<MarginalCell>,
    /// Per tau: the KS sequence across horizons is nonincreasing.
    pub nonincreasing_per_tau: Vec<(f64, bool)>,
    /// All taus below the threshold at the largest horizon.
    pub below_threshold_at_largest: bool,
    pub ks_threshold: f64,
    pub base_seed: u64,
    pub config_digest: u64,
}

fn mean_var(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

/// Bounded running top-k tracker (descending), with the current sum.
struct TopK {
    k: usize,
    vals: Vec<f64>,
    sum: f64,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK { k, vals: Vec::with_capacity(k + 1), sum: 0.0 }
    }

    fn push(&mut self, v: f64) {
        if self.k == 0 {
            return;
        }
        if self.vals.len() == self.k {
            if v <= self.vals[self.k - 1] {
                return;
            }
            self.sum -= self.vals.pop().unwrap();
        }
        let pos = self.vals.partition_point(|&w| w >= v);
        self.vals.insert(pos, v);
        self.sum += v;
    }
}

/// One-scan evaluation strategy per spec; `Generic` falls back to the
/// literal operator pipeline.
enum Kernel {
    /// Value identity of the trim-as-you-go trimmers: the order-r positive
    /// (order-s negative) trimmed value is the path value, minus the sum of
    /// the running top-r positive jumps, plus the running top-s
    /// negative-jump magnitudes.
    TopPosNeg { r: usize, s: usize },
    /// Order-1 signed-modulus: subtract the signed value held by the last
    /// modulus record achiever.
    SignedMod1,
    /// Order-1 literal modulus: subtract the running max jump modulus.
    Mod1,
    /// Lookback of order r: the iteration removes, round by round, the
    /// earliest achiever of the current record, i.e. exactly the overall
    /// top-r jumps ordered by (value desc, time asc), each from its own
    /// arrival time on.
    Lookback { r: usize, modulus: bool },
    Generic,
}

const KERNEL_ORDER_CAP: u32 = 64;

fn classify(spec: &TrimSpec) -> Kernel {
    match *spec {
        TrimSpec::GlobalPos(r) if r <= KERNEL_ORDER_CAP => Kernel::TopPosNeg { r: r as usize, s: 0 },
        TrimSpec::GlobalNeg(s) if s <= KERNEL_ORDER_CAP => Kernel::TopPosNeg { r: 0, s: s as usize },
        TrimSpec::GlobalBoth(r, s) if r <= KERNEL_ORDER_CAP && s <= KERNEL_ORDER_CAP => {
            Kernel::TopPosNeg { r: r as usize, s: s as usize }
        }
        TrimSpec::GlobalModulus(1) => Kernel::Mod1,
        TrimSpec::SignedModulus(0) => Kernel::TopPosNeg { r: 0, s: 0 },
        TrimSpec::SignedModulus(1) => Kernel::SignedMod1,
        TrimSpec::LookbackPos(r) if r <= KERNEL_ORDER_CAP => {
            Kernel::Lookback { r: r as usize, modulus: false }
        }
        TrimSpec::LookbackModulus(r) if r <= KERNEL_ORDER_CAP => {
            Kernel::Lookback { r: r as usize, modulus: true }
        }
        _ => Kernel::Generic,
    }
}

/// Trimmed path values at ascending times, one jump scan per spec, without
/// materializing the trimmed path. Falls back to the operator pipeline for
/// deep modulus orders. Agrees with `trim::apply` + `eval` (validated by
/// the cross-check test below); record selection under exact ties follows
/// the first-achiever rule the iterated operators use.
fn trimmed_values_at(x: &CadlagPath, spec: &TrimSpec, taus: &[f64], out: &mut Vec<f64>) {
    debug_assert!(taus.windows(2).all(|w| w[0] <= w[1]));
    let jumps = x.jumps();
    match classify(spec) {
        Kernel::TopPosNeg { r, s } => {
            let mut top_pos = TopK::new(r);
            let mut top_neg = TopK::new(s);
            let mut ji = 0usize;
            for &tau in taus {
                while ji < jumps.len() && jumps[ji].time <= tau {
                    let sz = jumps[ji].size;
                    if sz > 0.0 {
                        top_pos.push(sz);
                    } else {
                        top_neg.push(-sz);
                    }
                    ji += 1;
                }
                out.push(x.eval(tau).expect("tau in range") - top_pos.sum + top_neg.sum);
            }
        }
        Kernel::SignedMod1 => {
            let mut record = 0.0f64;
            let mut held = 0.0f64;
            let mut ji = 0usize;
            for &tau in taus {
                while ji < jumps.len() && jumps[ji].time <= tau {
                    let a = jumps[ji].size.abs();
                    if a >= record {
                        record = a;
                        held = jumps[ji].size;
                    }
                    ji += 1;
                }
                out.push(x.eval(tau).expect("tau in range") - held);
            }
        }
        Kernel::Mod1 => {
            let mut record = 0.0f64;
            let mut ji = 0usize;
            for &tau in taus {
                while ji < jumps.len() && jumps[ji].time <= tau {
                    record = record.max(jumps[ji].size.abs());
                    ji += 1;
                }
                out.push(x.eval(tau).expect("tau in range") - record);
            }
        }
        Kernel::Lookback { r, modulus } => {
            // top-r jumps by (key desc, time asc); selection by repeated max
            // keeps this O(J r) with tiny r
            let key = |sz: f64| if modulus { sz.abs() } else { sz };
            let mut chosen: Vec<usize> = Vec::with_capacity(r);
            for _ in 0..r {
                let mut best: Option<(f64, usize)> = None;
                for (idx, j) in jumps.iter().enumerate() {
                    if chosen.contains(&idx) {
                        continue;
                    }
                    let k = key(j.size);
                    if k <= 0.0 && !modulus {
                        continue;
                    }
                    if best.is_none_or(|(bk, _)| k > bk) {
                        best = Some((k, idx));
                    }
                }
                match best {
                    Some((_, idx)) => chosen.push(idx),
                    None => break,
                }
            }
            let mut removals: Vec<(f64, f64)> =
                chosen.iter().map(|&i| (jumps[i].time, jumps[i].size)).collect();
            removals.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut ri = 0usize;
            let mut removed = 0.0f64;
            for &tau in taus {
                while ri < removals.len() && removals[ri].0 <= tau {
                    removed += removals[ri].1;
                    ri += 1;
                }
                out.push(x.eval(tau).expect("tau in range") - removed);
            }
        }
        Kernel::Generic => {
            let y = trim::apply(x, spec);
            for &tau in taus {
                out.push(y.eval(tau).expect("tau in range"));
            }
        }
    }
}

/// Evaluate several trimmers at several times on one path, rescaled.
fn trimmed_values(
    x: &CadlagPath,
    specs: &[TrimSpec],
    taus: &[f64],
    center: f64,
    scale: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(specs.len() * taus.len());
    for spec in specs {
        let start = out.len();
        trimmed_values_at(x, spec, taus, &mut out);
        for (k, v) in out[start..].iter_mut().enumerate() {
            *v = (*v - taus[k] * center) / scale;
        }
    }
    out
}

/// Marginal-law experiment for a batch of trim specs sharing the sampled
/// paths (`config.spec` is ignored here; `marginal_convergence` passes its
/// single spec through). For each horizon `t` and each `tau`, the scaled
/// trimmed model marginal is compared by two-sample KS against the same
/// trimmer applied to the truncated stable series.
pub fn marginal_convergence_multi(
    config: &ExperimentConfig,
    specs: &[TrimSpec],
) -> Result<Vec<MarginalReport>, HarnessError> {
    config.validate()?;
    if specs.is_empty() {
        return Err(HarnessError::BadConfig("need at least one spec"));
    }
    let norm0 = levy::norming(&config.model, config.horizons[0])?;
    let taus = &config.tau_grid;
    let n = config.n_paths;
    let digest = config.digest();

    // Reference sample: one raw stable series per stream, every spec applied
    // to the same path.
    let ref_model = LevyModel::StableSeries {
        alpha: norm0.alpha,
        c_pos: norm0.c_pos,
        c_neg: norm0.c_neg,
        n_terms: config.ref_n_terms,
    };
    let ref_rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let seed = RngSeed::new(config.base_seed, REF_STREAM_BASE + i as u64);
            let z = levy::sample_path(&ref_model, 1.0, seed);
            trimmed_values(&z, specs, taus, 0.0, 1.0)
        })
        .collect();

    // Model samples per horizon.
    let mut horizon_rows: Vec<Vec<Vec<f64>>> = Vec::with_capacity(config.horizons.len());
    for (hi, &t) in config.horizons.iter().enumerate() {
        let norm = levy::norming(&config.model, t)?;
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let seed = RngSeed::new(config.base_seed, (hi * n + i) as u64);
                let x = levy::sample_path(&config.model, t, seed);
                trimmed_values(&x, specs, taus, norm.center, norm.scale)
            })
            .collect();
        horizon_rows.push(rows);
    }

    let mut reports = Vec::with_capacity(specs.len());
    for (si, spec) in specs.iter().enumerate() {
        let mut cells = Vec::with_capacity(config.horizons.len() * taus.len());
        for (hi, &t) in config.horizons.iter().enumerate() {
            for (ti, &tau) in taus.iter().enumerate() {
                let col = si * taus.len() + ti;
                let model_vals: Vec<f64> =
                    horizon_rows[hi].iter().map(|row| row[col]).collect();
                let ref_vals: Vec<f64> = ref_rows.iter().map(|row| row[col]).collect();
                let ks = ks_two_sample(&model_vals, &ref_vals);
                let (mm, mv) = mean_var(&model_vals);
                let (rm, rv) = mean_var(&ref_vals);
                cells.push(MarginalCell {
                    horizon: t,
                    tau,
                    n,
                    ks,
                    model_mean: mm,
                    model_var: mv,
                    model_ci_radius: 1.96 * (mv / n as f64).sqrt(),
                    ref_mean: rm,
                    ref_var: rv,
                    ref_ci_radius: 1.96 * (rv / n as f64).sqrt(),
                });
            }
        }
        let nh = config.horizons.len();
        let nonincreasing_per_tau: Vec<(f64, bool)> = taus
            .iter()
            .enumerate()
            .map(|(ti, &tau)| {
                let seq: Vec<f64> = (0..nh).map(|hi| cells[hi * taus.len() + ti].ks).collect();
                (tau, seq.windows(2).all(|w| w[1] <= w[0]))
            })
            .collect();
        let below = (0..taus.len())
            .all(|ti| cells[(nh - 1) * taus.len() + ti].ks < config.ks_threshold);
        reports.push(MarginalReport {
            spec: *spec,
            cells,
            nonincreasing_per_tau,
            below_threshold_at_largest: below,
            ks_threshold: config.ks_threshold,
            base_seed: config.base_seed,
            config_digest: digest,
        });
    }
    Ok(reports)
}

/// Single-spec marginal experiment (see `marginal_convergence_multi`).
pub fn marginal_convergence(config: &ExperimentConfig) -> Result<MarginalReport, HarnessError> {
    Ok(marginal_convergence_multi(config, &[config.spec])?.remove(0))
}

/// Tie scan report: `events` counts jump arrivals after which some pair of
/// adjacent running modulus order statistics (orders 1..=depth+1) lies
/// within `tol`; `min_gaps` records each path's smallest such gap (infinity
/// when a path never has two jumps).
#[derive(Debug, Clone)]
pub struct TieScan {
    pub events: u64,
    pub min_gaps: Vec<f64>,
}

pub fn tie_scan(paths: &[CadlagPath], depth: u32, tol: f64) -> TieScan {
    assert!(tol >= 0.0, "tolerance must be nonnegative");
    let depth = depth.max(1) as usize;
    let mut events = 0u64;
    let mut min_gaps = Vec::with_capacity(paths.len());
    for x in paths {
        let mut top: Vec<f64> = Vec::with_capacity(depth + 2);
        let mut min_gap = f64::INFINITY;
        for j in x.jumps() {
            let a = j.size.abs();
            let pos = top.partition_point(|&v| v > a);
            if pos <= depth {
                top.insert(pos, a);
                if top.len() > depth + 1 {
                    top.pop();
                }
            }
            let mut tied = false;
            for w in top.windows(2) {
                let gap = w[0] - w[1];
                min_gap = min_gap.min(gap);
                if gap <= tol {
                    tied = true;
                }
            }
            if tied {
                events += 1;
            }
        }
        min_gaps.push(min_gap);
    }
    TieScan { events, min_gaps }
}

/// Infimum of the times at which the path strictly exceeds `level`, or
/// `None` when it never does within `[0,1]`. A path already above the level
/// at the origin yields 0.
pub fn ruin_time(x: &CadlagPath, level: f64) -> Result<Option<f64>, HarnessError> {
    if !(level > 0.0) {
        return Err(HarnessError::BadLevel(level));
    }
    let mut last_after = f64::NEG_INFINITY;
    for p in x.pieces() {
        if p.v0 > level {
            return Ok(Some(p.t0));
        }
        if p.v1_left > level {
            // linear piece crosses strictly inside
            let slope = (p.v1_left - p.v0) / (p.t1 - p.t0);
            return Ok(Some(p.t0 + (level - p.v0) / slope));
        }
        last_after = p.v1_left + p.jump;
    }
    if last_after > level {
        return Ok(Some(1.0));
    }
    Ok(None)
}

/// Survival bits (bit k set = never strictly above `levels[k]`) of the
/// order-r positive trimmed path, in one pass over the path's linear pieces:
/// the subtracted running top-r jump sum is constant inside each piece, so
/// the trimmed path is linear there and its piece supremum is an endpoint.
/// Agrees with trimming then `ruin_time` (cross-checked in the tests).
fn pos_trimmed_survival(x: &CadlagPath, r: usize, levels: &[f64]) -> u64 {
    debug_assert!(levels.len() <= 64);
    let all = if levels.len() == 64 { u64::MAX } else { (1u64 << levels.len()) - 1 };
    let mut top = TopK::new(r);
    let mut ruined = 0u64;
    let mark = |ruined: &mut u64, v: f64| {
        for (k, &u) in levels.iter().enumerate() {
            if *ruined & (1 << k) == 0 && v > u {
                *ruined |= 1 << k;
            }
        }
    };
    mark(&mut ruined, x.skeleton()[0].1);
    for p in x.pieces() {
        let hi = (p.v0 - top.sum).max(p.v1_left - top.sum);
        mark(&mut ruined, hi);
        if p.jump > 0.0 {
            top.push(p.jump);
        }
        mark(&mut ruined, p.v1_left + p.jump - top.sum);
        if ruined == all {
            break;
        }
    }
    !ruined & all
}

/// One `(horizon, level)` cell of a ruin comparison: survival probability of
/// the trimmed model process over level `u * b_t` by real time `t`, against
/// the trimmed stable's survival over level `u` on the unit horizon.
#[derive(Debug, Clone)]
pub struct RuinCell {
    pub horizon: f64,
    pub u: f64,
    pub n: usize,
    pub p_model: f64,
    pub p_ref: f64,
    pub se_model: f64,
    pub se_ref: f64,
    pub combined_se: f64,
    pub within_3se: bool,
}

#[derive(Debug, Clone)]
pub struct RuinReport {
    pub order: u32,
    pub cells: Vec<RuinCell>,
    pub base_seed: u64,
    pub config_digest: u64,
}

/// Multi-order ruin experiment sharing the sampled paths: survival bits are
/// computed per `(order, u)` on each path. Needs a zero-centering model
/// (tail index below 1), the regime where survival of level `u b_t` by time
/// `t` converges to the trimmed stable's survival of level `u` on the unit
/// horizon.
pub fn ruin_experiment_multi(
    config: &ExperimentConfig,
    u_grid: &[f64],
    orders: &[u32],
) -> Result<Vec<RuinReport>, HarnessError> {
    config.validate()?;
    if u_grid.is_empty() || u_grid.iter().any(|u| !(*u > 0.0)) {
        return Err(HarnessError::BadConfig("u grid must be positive"));
    }
    if orders.is_empty() || orders.len() * u_grid.len() > 64 {
        return Err(HarnessError::BadConfig("need 1..=64 (order, u) combinations"));
    }
    let norm0 = levy::norming(&config.model, config.horizons[0])?;
    if norm0.center != 0.0 {
        return Err(HarnessError::BadConfig("ruin limit needs a zero-centering model"));
    }
    let n = config.n_paths;

    let survival_bits = |path: &CadlagPath, levels: &[f64]| -> u64 {
        let mut bits = 0u64;
        for (oi, &r) in orders.iter().enumerate() {
            bits |= pos_trimmed_survival(path, r as usize, levels) << (oi * levels.len());
        }
        bits
    };

    // Reference survival per (order, u).
    let ref_model = LevyModel::StableSeries {
        alpha: norm0.alpha,
        c_pos: norm0.c_pos,
        c_neg: norm0.c_neg,
        n_terms: config.ref_n_terms,
    };
    let ref_survive: Vec<u64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let seed = RngSeed::new(config.base_seed, REF_STREAM_BASE + i as u64);
            let z = levy::sample_path(&ref_model, 1.0, seed);
            survival_bits(&z, u_grid)
        })
        .collect();

    let mut per_order_cells: Vec<Vec<RuinCell>> = vec![Vec::new(); orders.len()];
    for (hi, &t) in config.horizons.iter().enumerate() {
        let norm = levy::norming(&config.model, t)?;
        let scaled_levels: Vec<f64> = u_grid.iter().map(|u| u * norm.scale).collect();
        let model_survive: Vec<u64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let seed = RngSeed::new(config.base_seed, (hi * n + i) as u64);
                let x = levy::sample_path(&config.model, t, seed);
                survival_bits(&x, &scaled_levels)
            })
            .collect();
        for (oi, _) in orders.iter().enumerate() {
            for (k, &u) in u_grid.iter().enumerate() {
                let bit = 1u64 << (oi * u_grid.len() + k);
                let pm = model_survive.iter().filter(|b| *b & bit != 0).count() as f64 / n as f64;
                let pr = ref_survive.iter().filter(|b| *b & bit != 0).count() as f64 / n as f64;
                let se_m = (pm * (1.0 - pm) / n as f64).sqrt();
                let se_r = (pr * (1.0 - pr) / n as f64).sqrt();
                let combined = (se_m * se_m + se_r * se_r).sqrt();
                per_order_cells[oi].push(RuinCell {
                    horizon: t,
                    u,
                    n,
                    p_model: pm,
                    p_ref: pr,
                    se_model: se_m,
                    se_ref: se_r,
                    combined_se: combined,
                    within_3se: (pm - pr).abs() <= 3.0 * combined,
                });
            }
        }
    }
    let digest = config.digest();
    Ok(orders
        .iter()
        .zip(per_order_cells)
        .map(|(&order, cells)| RuinReport {
            order,
            cells,
            base_seed: config.base_seed,
            config_digest: digest,
        })
        .collect())
}

/// Single-spec ruin experiment; the spec must be a one-sided positive trim.
pub fn ruin_experiment(
    config: &ExperimentConfig,
    u_grid: &[f64],
) -> Result<RuinReport, HarnessError> {
    let order = match config.spec {
        TrimSpec::GlobalPos(r) => r,
        TrimSpec::GlobalBoth(r, 0) => r,
        _ => return Err(HarnessError::BadConfig("ruin experiment needs a pos:r spec")),
    };
    Ok(ruin_experiment_multi(config, u_grid, &[order])?.remove(0))
}

/// Family of perturbed inputs indexed by `n >= 1`.
#[derive(Debug, Clone, Copy)]
pub enum PerturbationFamily {
    /// `x_n = x + (amplitude / n) * 1_[time, 1]`.
    FadingStep { time: f64, amplitude: f64 },
    /// `x_n = x + amplitude * 1_[time, 1]`; does not converge, used to check
    /// the probe's configuration guard.
    ConstantStep { time: f64, amplitude: f64 },
}

impl PerturbationFamily {
    pub fn apply(&self, x: &CadlagPath, n: usize) -> CadlagPath {
        match *self {
            PerturbationFamily::FadingStep { time, amplitude } => {
                x.add(&CadlagPath::indicator(time).scalar_affine(0.0, amplitude / n as f64))
            }
            PerturbationFamily::ConstantStep { time, amplitude } => {
                x.add(&CadlagPath::indicator(time).scalar_affine(0.0, amplitude))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeRow {
    pub n: usize,
    /// Distance between perturbed and base inputs.
    pub input_distance: f64,
    /// Joint alignment defect of (input, image) pairs under a common time
    /// change; stays large exactly when the trimmer breaks at `x`.
    pub image_distance: f64,
    pub time_term: f64,
    pub value_term: f64,
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    pub certificate: Certificate,
    pub images_converge: bool,
    /// False only when a certified-continuous trimmer failed to converge.
    pub agreement: bool,
    pub image_tol: f64,
}

/// Apply the trimmer along a perturbation family and measure the joint
/// J1 defect per step. The family itself must converge to `x`.
pub fn continuity_probe(
    x: &CadlagPath,
    spec: &TrimSpec,
    family: &PerturbationFamily,
    n_steps: usize,
    image_tol: f64,
) -> Result<ProbeReport, HarnessError> {
    if n_steps == 0 {
        return Err(HarnessError::BadConfig("need at least one probe step"));
    }
    let fx = trim::apply(x, spec);
    let rows: Vec<ProbeRow> = (1..=n_steps)
        .into_par_iter()
        .map(|n| {
            let xn = family.apply(x, n);
            let fxn = trim::apply(&xn, spec);
            let input = j1::j1_distance(&xn, x).distance;
            let joint = j1::j1_joint_distance(&xn, &fxn, x, &fx);
            ProbeRow {
                n,
                input_distance: input,
                image_distance: joint.distance,
                time_term: joint.time_term,
                value_term: joint.value_term,
            }
        })
        .collect();
    let first_in = rows.first().unwrap().input_distance;
    let last_in = rows.last().unwrap().input_distance;
    if !(last_in <= 0.5 * first_in + 1e-12 || last_in <= 1e-12) {
        return Err(HarnessError::FamilyDoesNotConverge);
    }
    let certificate = trim::continuity_certificate(x, spec);
    let images_converge = rows.last().unwrap().image_distance <= image_tol;
    let agreement =
        !(certificate == Certificate::GuaranteedContinuous && !images_converge);
    Ok(ProbeReport { rows, certificate, images_converge, agreement, image_tol })
}

/// Data behind the side-by-side illustration of the two trimming styles on
/// a compound Poisson risk path: per grid time, the original path value,
/// the order-1 positive trim-as-you-go value, and the lookback value. The
/// columns are computed in one shared sweep so the defining identities hold
/// bit-exactly: lookback equals the original strictly before the record
/// time and equals the trim-as-you-go column from the record time on.
#[derive(Debug, Clone)]
pub struct FigureSeries {
    pub rows: Vec<FigureRow>,
    /// First record time of the overall largest jump, if any jump exists.
    pub record_time: Option<f64>,
    pub record_jump: f64,
    pub seed: RngSeed,
}

#[derive(Debug, Clone, Copy)]
pub struct FigureRow {
    pub tau: f64,
    pub original: f64,
    pub trim_as_you_go: f64,
    pub lookback: f64,
}

/// The illustration model: claims at rate 100 with Pareto(1,2) sizes and
/// premium drift -110, on horizon 1.
pub fn figure_model() -> LevyModel {
    LevyModel::CompoundPoissonDrift {
        intensity: 100.0,
        jump_dist: cadlag::levy::JumpDist::Pareto { scale: 1.0, shape: 2.0 },
        drift: -110.0,
    }
}

pub fn figure_series(seed: RngSeed, grid_points: usize) -> FigureSeries {
    let model = figure_model();
    let x = levy::sample_path(&model, 1.0, seed);
    figure_series_for(&x, seed, grid_points)
}

fn figure_series_for(x: &CadlagPath, seed: RngSeed, grid_points: usize) -> FigureSeries {
    let jumps = x.jumps();
    let record = trim::first_record_time(x, 1.0, trim::RecordFlavor::Positive);
    let record_jump = record.map(|t| x.jump_at(t)).unwrap_or(0.0);
    let mut taus: Vec<f64> = (0..=grid_points).map(|k| k as f64 / grid_points as f64).collect();
    taus.extend(jumps.iter().map(|j| j.time));
    if let Some(r) = record {
        taus.push(r);
    }
    taus.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    taus.dedup();

    let (t0, v0) = x.skeleton()[0];
    let (t1, v1) = *x.skeleton().last().unwrap();
    let mut rows = Vec::with_capacity(taus.len());
    let mut ji = 0usize;
    let mut jump_sum = 0.0f64;
    let mut running_max = 0.0f64;
    for &tau in &taus {
        while ji < jumps.len() && jumps[ji].time <= tau {
            jump_sum += jumps[ji].size;
            running_max = running_max.max(jumps[ji].size);
            ji += 1;
        }
        // same interpolation expression the path evaluator uses, so the
        // columns agree bit-for-bit with the operator pipeline
        let skel = v0 + (v1 - v0) * ((tau - t0) / (t1 - t0));
        let original = skel + jump_sum;
        let trim_col = original - running_max;
        let lookback = match record {
            Some(r) if tau >= r => original - record_jump,
            _ => original,
        };
        rows.push(FigureRow { tau, original, trim_as_you_go: trim_col, lookback });
    }
    FigureSeries { rows, record_time: record, record_jump, seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cadlag::levy::JumpDist;
    use cadlag::random;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            model: LevyModel::CompoundPoissonDrift {
                intensity: 100.0,
                jump_dist: JumpDist::Pareto { scale: 1.0, shape: 0.8 },
                drift: 0.0,
            },
            horizons: vec![5.0, 50.0],
            spec: TrimSpec::GlobalPos(1),
            n_paths: 200,
            tau_grid: vec![0.5, 1.0],
            base_seed: 9,
            ks_threshold: 0.5,
            ref_n_terms: 400,
        }
    }

    #[test]
    fn ks_statistic_basics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.0, 1.0, 4.0, 3.0];
        assert_eq!(ks_two_sample(&xs, &ys), 0.0);
        let xs = [1.0, 1.0, 4.0, 4.0];
        let ys = [1.0, 1.0, 1.0, 4.0];
        assert!((ks_two_sample(&xs, &ys) - 0.25).abs() < 1e-12);
        // invariance under reordering
        let mut rng = random::rng_for(3, 0);
        let a: Vec<f64> = (0..50).map(|_| random::u01(&mut rng)).collect();
        let b: Vec<f64> = (0..70).map(|_| random::u01(&mut rng)).collect();
        let mut a2 = a.clone();
        a2.reverse();
        let mut b2 = b.clone();
        b2.rotate_left(13);
        assert_eq!(ks_two_sample(&a, &b), ks_two_sample(&a2, &b2));
    }

    #[test]
    fn marginal_runs_and_is_deterministic() {
        let cfg = small_config();
        let r1 = marginal_convergence(&cfg).unwrap();
        let r2 = marginal_convergence(&cfg).unwrap();
        assert_eq!(r1.cells.len(), 4);
        for (a, b) in r1.cells.iter().zip(&r2.cells) {
            assert_eq!(a.ks, b.ks);
            assert_eq!(a.model_mean, b.model_mean);
        }
        // single-thread pool gives the identical report
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let r3 = pool.install(|| marginal_convergence(&cfg)).unwrap();
        for (a, b) in r1.cells.iter().zip(&r3.cells) {
            assert_eq!(a.ks, b.ks);
            assert_eq!(a.ref_mean, b.ref_mean);
        }
    }

    #[test]
    fn stable_against_itself_is_null() {
        // the reference model compared to its own law: KS near the two-sample
        // null, far below any loose threshold
        let cfg = ExperimentConfig {
            model: LevyModel::StableSeries { alpha: 0.8, c_pos: 1.0, c_neg: 0.0, n_terms: 400 },
            horizons: vec![1.0],
            spec: TrimSpec::GlobalBoth(0, 0),
            n_paths: 500,
            tau_grid: vec![1.0],
            base_seed: 11,
            ks_threshold: 0.2,
            ref_n_terms: 400,
        };
        let r = marginal_convergence(&cfg).unwrap();
        assert!(r.below_threshold_at_largest, "ks = {}", r.cells[0].ks);
    }

    #[test]
    fn tie_scan_counts_constructed_ties() {
        let tied = CadlagPath::step(0.0, &[(1.0 / 3.0, 1.0), (2.0 / 3.0, -1.0)]).unwrap();
        let scan = tie_scan(std::slice::from_ref(&tied), 1, 0.0);
        assert_eq!(scan.events, 1);
        assert_eq!(scan.min_gaps, vec![0.0]);

        // huge tolerance: every path with at least two jumps counts
        let mut rng = random::rng_for(4, 0);
        let paths: Vec<CadlagPath> = (0..20).map(|_| random::random_step_path(&mut rng, 6)).collect();
        let scan = tie_scan(&paths, 1, f64::INFINITY);
        let with_two = paths.iter().filter(|p| p.jumps().len() >= 2).count() as u64;
        assert!(scan.events >= with_two);

        // continuous sizes: no exact ties
        let scan0 = tie_scan(&paths, 3, 0.0);
        assert_eq!(scan0.events, 0);
    }

    #[test]
    fn ruin_time_golden() {
        let x = CadlagPath::new(vec![(0.0, 0.0), (1.0, -1.0)], vec![(0.5, 2.0)]).unwrap();
        assert_eq!(ruin_time(&x, 0.5).unwrap(), Some(0.5));
        let trimmed = trim::apply(&x, &TrimSpec::GlobalPos(1));
        assert_eq!(ruin_time(&trimmed, 0.5).unwrap(), None);
        assert!(ruin_time(&x, 0.0).is_err());
        // crossing strictly inside a rising segment
        let y = CadlagPath::linear(0.0, 2.0);
        assert_eq!(ruin_time(&y, 1.0).unwrap(), Some(0.5));
        // exceeds only via the endpoint jump
        let z = CadlagPath::step(0.0, &[(1.0, 3.0)]).unwrap();
        assert_eq!(ruin_time(&z, 1.0).unwrap(), Some(1.0));
    }

    #[test]
    fn ruin_scaling_equivariance_dyadic() {
        let mut rng = random::rng_for(5, 0);
        for _ in 0..50 {
            let x = random::random_path(&mut rng, 10);
            let u = 0.25 + random::u01(&mut rng);
            for b in [2.0, 4.0, 0.5] {
                let scaled = x.scalar_affine(0.0, 1.0 / b);
                let a = ruin_time(&x, u).unwrap();
                let c = ruin_time(&scaled, u / b).unwrap();
                match (a, c) {
                    (None, None) => {}
                    (Some(p), Some(q)) => assert_eq!(p, q),
                    other => panic!("mismatch {other:?}"),
                }
            }
        }
    }

    #[test]
    fn trimming_delays_ruin() {
        let m = figure_model();
        for i in 0..30 {
            let x = levy::sample_path(&m, 1.0, RngSeed::new(17, i));
            let t0 = ruin_time(&x, 5.0).unwrap();
            let t1 = ruin_time(&trim::apply(&x, &TrimSpec::GlobalPos(1)), 5.0).unwrap();
            match (t0, t1) {
                (None, Some(_)) => panic!("trimming must not advance ruin"),
                (Some(a), Some(b)) => assert!(b >= a),
                _ => {}
            }
        }
    }

    #[test]
    fn ruin_experiment_smoke() {
        let mut cfg = small_config();
        cfg.horizons = vec![50.0];
        cfg.n_paths = 300;
        let rep = ruin_experiment(&cfg, &[1.0, 1e6]).unwrap();
        assert_eq!(rep.cells.len(), 2);
        // enormous level: survival with probability one on both sides
        let big = &rep.cells[1];
        assert_eq!(big.p_model, 1.0);
        assert_eq!(big.p_ref, 1.0);
        assert!(big.within_3se);
        // spec must be one-sided positive
        cfg.spec = TrimSpec::SignedModulus(1);
        assert!(ruin_experiment(&cfg, &[1.0]).is_err());
    }

    #[test]
    fn probe_agrees_with_certificates() {
        // single record holder: certified and convergent
        let x = CadlagPath::indicator(0.5);
        let fam = PerturbationFamily::FadingStep { time: 0.75, amplitude: 0.05 };
        let rep = continuity_probe(&x, &TrimSpec::LookbackPos(1), &fam, 16, 1e-2).unwrap();
        assert_eq!(rep.certificate, Certificate::GuaranteedContinuous);
        assert!(rep.images_converge);
        assert!(rep.agreement);

        // tied records: not certified, and the joint defect stays near 1
        let tied = CadlagPath::step(0.0, &[(1.0 / 3.0, 1.0), (2.0 / 3.0, 1.0)]).unwrap();
        let fam2 = PerturbationFamily::FadingStep { time: 2.0 / 3.0, amplitude: 1.0 };
        let rep2 = continuity_probe(&tied, &TrimSpec::LookbackPos(1), &fam2, 16, 1e-2).unwrap();
        assert_eq!(rep2.certificate, Certificate::NotGuaranteed);
        assert!(!rep2.images_converge);
        assert!(rep2.rows.last().unwrap().image_distance > 0.9);
        assert!(rep2.agreement);

        // a family that does not converge is a configuration error
        let bad = PerturbationFamily::ConstantStep { time: 0.4, amplitude: 0.3 };
        assert!(matches!(
            continuity_probe(&x, &TrimSpec::GlobalPos(1), &bad, 8, 1e-2),
            Err(HarnessError::FamilyDoesNotConverge)
        ));
    }

    #[test]
    fn ruin_kernel_matches_trim_then_scan() {
        let mut rng = random::rng_for(32, 0);
        for _ in 0..200 {
            let x = random::random_path(&mut rng, 12);
            let levels = [0.2, 0.7, 1.5];
            for r in [0usize, 1, 2] {
                let bits = pos_trimmed_survival(&x, r, &levels);
                let y = trim::apply(&x, &TrimSpec::GlobalPos(r as u32));
                for (k, &u) in levels.iter().enumerate() {
                    let survived = ruin_time(&y, u).unwrap().is_none();
                    assert_eq!(
                        bits & (1 << k) != 0,
                        survived,
                        "r={r} u={u} path jumps {:?}",
                        x.jumps().len()
                    );
                }
            }
        }
    }

    #[test]
    fn marginal_kernel_matches_literal_operators() {
        // the one-scan kernel must agree with trim::apply + eval, including
        // on paths with exact ties and mixed signs
        let mut rng = random::rng_for(31, 0);
        let taus = [0.2, 0.55, 1.0];
        let specs = [
            TrimSpec::GlobalPos(1),
            TrimSpec::GlobalPos(3),
            TrimSpec::GlobalNeg(2),
            TrimSpec::GlobalBoth(2, 2),
            TrimSpec::GlobalBoth(0, 0),
            TrimSpec::GlobalModulus(1),
            TrimSpec::SignedModulus(1),
            TrimSpec::LookbackPos(1),
            TrimSpec::LookbackPos(3),
            TrimSpec::LookbackModulus(2),
        ];
        let mut paths: Vec<CadlagPath> =
            (0..300).map(|_| random::random_path(&mut rng, 12)).collect();
        // hand-made tie cases
        paths.push(CadlagPath::step(0.0, &[(0.2, 1.0), (0.5, -1.0), (0.8, 1.0)]).unwrap());
        paths.push(
            CadlagPath::new(vec![(0.0, 0.0), (1.0, -0.5)], vec![(0.3, 2.0), (0.7, 2.0)]).unwrap(),
        );
        for x in &paths {
            for spec in &specs {
                let mut fast = Vec::new();
                trimmed_values_at(x, spec, &taus, &mut fast);
                let y = trim::apply(x, spec);
                for (k, &tau) in taus.iter().enumerate() {
                    let slow = y.eval(tau).unwrap();
                    assert!(
                        (fast[k] - slow).abs() <= 1e-12,
                        "spec {spec} tau {tau}: {} vs {}",
                        fast[k],
                        slow
                    );
                }
            }
        }
    }

    #[test]
    fn figure_series_identities() {
        let seed = RngSeed::new(7, 0);
        let fig = figure_series(seed, 512);
        let r1 = fig.record_time.unwrap();
        for row in &fig.rows {
            if row.tau < r1 {
                assert_eq!(row.lookback, row.original);
            } else {
                assert_eq!(row.lookback, row.trim_as_you_go);
            }
        }
        // columns match the operator pipeline
        let x = levy::sample_path(&figure_model(), 1.0, seed);
        let trimmed = trim::apply(&x, &TrimSpec::GlobalPos(1));
        let look = trim::trim_lookback(&x, 1, trim::RecordFlavor::Positive);
        for row in fig.rows.iter().step_by(17) {
            assert!((row.original - x.eval(row.tau).unwrap()).abs() <= 1e-12);
            assert!((row.trim_as_you_go - trimmed.eval(row.tau).unwrap()).abs() <= 1e-12);
            assert!((row.lookback - look.eval(row.tau).unwrap()).abs() <= 1e-12);
        }
    }
}
