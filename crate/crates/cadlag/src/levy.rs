//! Lévy path samplers on the rescaled horizon: a model over real time
//! `[0, t]` is sampled as the path `tau -> X_{tau t}` on `[0,1]`.
//!
//! Two models are supported. Compound Poisson with drift draws jump arrivals
//! by exponential gaps (already time-sorted) and i.i.d. sizes. The stable
//! series builds the path from its ordered jumps: term `i` has magnitude
//! `((c⁺+c⁻) t / Γ_i)^{1/alpha}` with `Γ_i` the partial sums of unit
//! exponentials, an independent uniform arrival time, and an independent
//! sign with weights `c⁺/(c⁺+c⁻)`, `c⁻/(c⁺+c⁻)`. For `alpha > 1` a linear
//! compensation equal to minus the expected truncated jump sum keeps every
//! truncation zero-mean (`E[Γ_i^{-1/alpha}] = Γ(i - 1/alpha)/Γ(i)`); for
//! `alpha <= 1` the raw series is used. Increasing `n_terms` with a fixed
//! seed only appends terms: the first `n` draws never change.
//!
//! Truncation error: the omitted tail `Σ_{i>N} ((c t)/Γ_i)^{1/alpha}` has
//! expectation about `(c t)^{1/alpha} · alpha/|1-alpha| · N^{(alpha-1)/alpha}`
//! which is the bound the truncation tests check against.
//!
//! Norming follows the tail quantile: `b_t` solves `tail(b_t) = 1/t` for the
//! two-sided Lévy tail, `a_t = 0` below index 1 and `a_t = t E[X_1]` above;
//! index exactly 1 is unsupported. With this choice the matched stable limit
//! always has total tail constant 1, split by the model's positive/negative
//! jump weights.
//!
//! Sampling is a pure function of `(model, t, seed)`; every path gets its
//! own counter-based stream, so worker layout cannot change results.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::math;
use crate::path::CadlagPath;
use crate::random::{exp1, rng_for, u01, u01_open_closed};
use crate::trim::{self, TrimSpec};

/// Jump size distribution of the compound Poisson model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpDist {
    /// Pareto(scale, shape): support `[scale, inf)`, tail `(scale/x)^shape`.
    Pareto { scale: f64, shape: f64 },
    Exponential { rate: f64 },
    /// Pareto magnitude with random sign; `p_positive` is the probability of
    /// a positive jump.
    SignedPareto { scale: f64, shape: f64, p_positive: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevyModel {
    CompoundPoissonDrift { intensity: f64, jump_dist: JumpDist, drift: f64 },
    StableSeries { alpha: f64, c_pos: f64, c_neg: f64, n_terms: usize },
}

/// Seed plus stream index; the pair fully determines a sampled path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSeed { seed, stream }
    }
}

/// Centering and scaling `(a_t, b_t)` with the matched stable limit
/// parameters: the limit has two-sided tail `x^{-alpha}` split into
/// `c_pos + c_neg = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norming {
    pub center: f64,
    pub scale: f64,
    pub alpha: f64,
    pub c_pos: f64,
    pub c_neg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LevyError {
    BadModel(&'static str),
    UnsupportedNorming(&'static str),
    BadTailQuery(&'static str),
}

impl core::fmt::Display for LevyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LevyError::BadModel(m) => write!(f, "invalid model: {m}"),
            LevyError::UnsupportedNorming(m) => write!(f, "norming unsupported: {m}"),
            LevyError::BadTailQuery(m) => write!(f, "invalid tail inverse query: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LevyError {}

impl LevyModel {
    pub fn validate(&self) -> Result<(), LevyError> {
        match *self {
            LevyModel::CompoundPoissonDrift { intensity, jump_dist, drift } => {
                if !(intensity > 0.0) || !intensity.is_finite() {
                    return Err(LevyError::BadModel("intensity must be positive"));
                }
                if !drift.is_finite() {
                    return Err(LevyError::BadModel("drift must be finite"));
                }
                match jump_dist {
                    JumpDist::Pareto { scale, shape } => {
                        if !(scale > 0.0) || !(shape > 0.0) {
                            return Err(LevyError::BadModel("pareto needs positive scale/shape"));
                        }
                    }
                    JumpDist::Exponential { rate } => {
                        if !(rate > 0.0) {
                            return Err(LevyError::BadModel("exponential needs positive rate"));
                        }
                    }
                    JumpDist::SignedPareto { scale, shape, p_positive } => {
                        if !(scale > 0.0) || !(shape > 0.0) {
                            return Err(LevyError::BadModel("pareto needs positive scale/shape"));
                        }
                        if !(0.0..=1.0).contains(&p_positive) {
                            return Err(LevyError::BadModel("p_positive must be in [0,1]"));
                        }
                    }
                }
                Ok(())
            }
            LevyModel::StableSeries { alpha, c_pos, c_neg, n_terms } => {
                if !(alpha > 0.0 && alpha < 2.0) {
                    return Err(LevyError::BadModel("alpha must be in (0,2)"));
                }
                if !(c_pos >= 0.0 && c_neg >= 0.0 && c_pos + c_neg > 0.0) {
                    return Err(LevyError::BadModel(
                        "tail constants must be nonnegative, not both 0",
                    ));
                }
                if n_terms == 0 {
                    return Err(LevyError::BadModel("n_terms must be positive"));
                }
                Ok(())
            }
        }
    }
}

/// Right-continuous inverse of the pure power tail `c x^{-alpha}`.
pub fn tail_inverse(c: f64, alpha: f64, y: f64) -> Result<f64, LevyError> {
    if !(y > 0.0) {
        return Err(LevyError::BadTailQuery("level must be positive"));
    }
    if !(c > 0.0) || !(alpha > 0.0 && alpha < 2.0) {
        return Err(LevyError::BadTailQuery("need c > 0 and alpha in (0,2)"));
    }
    Ok(math::powf(c / y, 1.0 / alpha))
}

/// Right-continuous inverse of the two-sided Lévy tail of a model. Bounded
/// tails are capped: a level at or above the total mass has no jump that
/// large, giving 0.
pub fn model_tail_inverse(model: &LevyModel, y: f64) -> Result<f64, LevyError> {
    if !(y > 0.0) {
        return Err(LevyError::BadTailQuery("level must be positive"));
    }
    model.validate()?;
    match *model {
        LevyModel::CompoundPoissonDrift { intensity, jump_dist, .. } => match jump_dist {
            JumpDist::Pareto { scale, shape } | JumpDist::SignedPareto { scale, shape, .. } => {
                if y >= intensity {
                    Ok(0.0)
                } else {
                    Ok(scale * math::powf(intensity / y, 1.0 / shape))
                }
            }
            JumpDist::Exponential { rate } => {
                if y >= intensity {
                    Ok(0.0)
                } else {
                    Ok(math::ln(intensity / y) / rate)
                }
            }
        },
        LevyModel::StableSeries { alpha, c_pos, c_neg, .. } => {
            tail_inverse(c_pos + c_neg, alpha, y)
        }
    }
}

/// Tail-quantile norming: `b_t` solves the two-sided tail at level `1/t`,
/// `a_t` is 0 for tail index below 1 and `t E[X_1]` above. Index exactly 1
/// and non-power jump tails are refused.
pub fn norming(model: &LevyModel, t: f64) -> Result<Norming, LevyError> {
    model.validate()?;
    if !(t > 0.0) {
        return Err(LevyError::UnsupportedNorming("horizon must be positive"));
    }
    match *model {
        LevyModel::CompoundPoissonDrift { intensity, jump_dist, drift } => {
            let (scale, shape, p_pos) = match jump_dist {
                JumpDist::Pareto { scale, shape } => (scale, shape, 1.0),
                JumpDist::SignedPareto { scale, shape, p_positive } => (scale, shape, p_positive),
                JumpDist::Exponential { .. } => {
                    return Err(LevyError::UnsupportedNorming("exponential tail is not power-law"))
                }
            };
            if !(0.0..2.0).contains(&shape) {
                return Err(LevyError::UnsupportedNorming("tail index must be in (0,2)"));
            }
            if shape == 1.0 {
                return Err(LevyError::UnsupportedNorming("tail index 1 is excluded"));
            }
            let b = scale * math::powf(intensity * t, 1.0 / shape);
            let a = if shape < 1.0 {
                0.0
            } else {
                // mean of the signed Pareto jump: (p+ - p-) * shape*scale/(shape-1)
                let mean_jump = (2.0 * p_pos - 1.0) * shape * scale / (shape - 1.0);
                t * (drift + intensity * mean_jump)
            };
            Ok(Norming { center: a, scale: b, alpha: shape, c_pos: p_pos, c_neg: 1.0 - p_pos })
        }
        LevyModel::StableSeries { alpha, c_pos, c_neg, .. } => {
            if alpha == 1.0 {
                return Err(LevyError::UnsupportedNorming("tail index 1 is excluded"));
            }
            let c = c_pos + c_neg;
            let b = math::powf(c * t, 1.0 / alpha);
            // The series is raw below index 1 and compensated to zero mean
            // above it, so no centering is needed either way.
            Ok(Norming { center: 0.0, scale: b, alpha, c_pos: c_pos / c, c_neg: c_neg / c })
        }
    }
}

/// One term of the stable jump series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    /// Partial sum of unit exponentials (strictly increasing in the series).
    pub gamma: f64,
    /// Arrival time in `(0,1]`.
    pub time: f64,
    pub positive: bool,
}

/// `Σ_{i=1..n} E[Γ_i^{-1/alpha}]` for `alpha > 1`, via the gamma-ratio
/// recurrence `r_1 = Γ(1 - 1/alpha)`, `r_{i+1} = r_i (i - 1/alpha)/i`.
fn expected_inverse_gamma_sum(alpha: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let inv = 1.0 / alpha;
    let mut r = math::gamma(1.0 - inv);
    let mut sum = r;
    for i in 1..n {
        r *= (i as f64 - inv) / i as f64;
        sum += r;
    }
    sum
}

/// Deterministic series-to-path assembly: jump `i` has magnitude
/// `((c_pos+c_neg) t / gamma_i)^{1/alpha}` and the term's sign, at the
/// term's arrival time. Exposed so tests can pin the `gamma` sequence.
pub fn stable_series_path(
    alpha: f64,
    c_pos: f64,
    c_neg: f64,
    t: f64,
    terms: &[SeriesTerm],
) -> CadlagPath {
    let c = c_pos + c_neg;
    let inv = 1.0 / alpha;
    let scale = math::powf(c * t, inv);
    let mut jumps: Vec<(f64, f64)> = terms
        .iter()
        .map(|term| {
            let mag = scale * math::powf(term.gamma, -inv);
            (term.time, if term.positive { mag } else { -mag })
        })
        .collect();
    jumps.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // merge any arrival times that collide after rounding
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(jumps.len());
    for (time, size) in jumps {
        if let Some(last) = merged.last_mut() {
            if last.0 == time {
                last.1 += size;
                if last.1 == 0.0 {
                    merged.pop();
                }
                continue;
            }
        }
        merged.push((time, size));
    }
    let compensation = if alpha > 1.0 {
        let p_pos = c_pos / c;
        (2.0 * p_pos - 1.0) * scale * expected_inverse_gamma_sum(alpha, terms.len())
    } else {
        0.0
    };
    let skeleton = alloc::vec![(0.0, 0.0), (1.0, -compensation)];
    CadlagPath::new(skeleton, merged).expect("series path is valid")
}

fn sample_jump_size(dist: &JumpDist, rng: &mut impl RngCore) -> f64 {
    match *dist {
        JumpDist::Pareto { scale, shape } => scale * math::powf(u01_open_closed(rng), -1.0 / shape),
        JumpDist::Exponential { rate } => exp1(rng) / rate,
        JumpDist::SignedPareto { scale, shape, p_positive } => {
            let mag = scale * math::powf(u01_open_closed(rng), -1.0 / shape);
            if u01(rng) < p_positive {
                mag
            } else {
                -mag
            }
        }
    }
}

/// Sample the path `tau -> X_{tau t}` on `[0,1]`.
pub fn sample_path(model: &LevyModel, t: f64, seed: RngSeed) -> CadlagPath {
    assert!(t > 0.0, "horizon must be positive");
    model.validate().expect("valid model");
    let mut rng = rng_for(seed.seed, seed.stream);
    match *model {
        LevyModel::CompoundPoissonDrift { intensity, jump_dist, drift } => {
            let mut jumps: Vec<(f64, f64)> = Vec::new();
            let mut s = 0.0f64;
            loop {
                s += exp1(&mut rng) / intensity;
                if s > t {
                    break;
                }
                let size = sample_jump_size(&jump_dist, &mut rng);
                let tau = s / t;
                // exponential gaps keep times sorted; merge rounding ties
                if let Some(last) = jumps.last_mut() {
                    if last.0 == tau {
                        last.1 += size;
                        continue;
                    }
                }
                jumps.push((tau, size));
            }
            let skeleton = alloc::vec![(0.0, 0.0), (1.0, drift * t)];
            CadlagPath::new(skeleton, jumps).expect("compound Poisson path is valid")
        }
        LevyModel::StableSeries { alpha, c_pos, c_neg, n_terms } => {
            let p_pos = c_pos / (c_pos + c_neg);
            let mut terms = Vec::with_capacity(n_terms);
            let mut gamma = 0.0f64;
            for _ in 0..n_terms {
                gamma += exp1(&mut rng);
                let time = u01_open_closed(&mut rng);
                let positive = u01(&mut rng) < p_pos;
                terms.push(SeriesTerm { gamma, time, positive });
            }
            stable_series_path(alpha, c_pos, c_neg, t, &terms)
        }
    }
}

/// Sample, trim, then rescale: `tau -> (trimmed(tau) - tau a_t) / b_t`.
/// Trimming commutes with this affine map (trimmers act on jumps, which the
/// centering drift does not touch), so this equals rescaling first and
/// trimming after.
pub fn scaled_trimmed_path(
    model: &LevyModel,
    t: f64,
    spec: &TrimSpec,
    seed: RngSeed,
) -> Result<CadlagPath, LevyError> {
    let norm = norming(model, t)?;
    let x = sample_path(model, t, seed);
    let trimmed = trim::apply(&x, spec);
    Ok(rescale(&trimmed, &norm))
}

/// `tau -> (x(tau) - tau a_t) / b_t` for a norming pair.
pub fn rescale(x: &CadlagPath, norm: &Norming) -> CadlagPath {
    x.sub(&CadlagPath::linear(0.0, norm.center)).scalar_affine(0.0, 1.0 / norm.scale)
}

/// Sample a trimmed stable path on `[0,1]` directly from the truncated
/// ordered-jump series.
pub fn sample_trimmed_stable(
    alpha: f64,
    c_pos: f64,
    c_neg: f64,
    spec: &TrimSpec,
    n_terms: usize,
    seed: RngSeed,
) -> CadlagPath {
    let model = LevyModel::StableSeries { alpha, c_pos, c_neg, n_terms };
    let x = sample_path(&model, 1.0, seed);
    trim::apply(&x, spec)
}
