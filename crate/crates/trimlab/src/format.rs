//! File formats: path JSON, run configuration, and CSV report rendering.
//!
//! Binary64 values in CSV are printed with 17 significant digits, which
//! round-trips exactly; path JSON uses serde_json's shortest round-trip
//! float rendering. Every emitted file embeds the resolved configuration in
//! leading `#` comment lines and contains nothing volatile, so re-running a
//! command reproduces the bytes.

use cadlag::j1::J1Result;
use cadlag::levy::{JumpDist, LevyModel};
use cadlag::trim::TrimSpec;
use cadlag::{CadlagPath, PathError};
use serde::{Deserialize, Serialize};

use crate::harness::{FigureSeries, MarginalReport, ProbeReport, RuinReport};

/// 17-significant-digit rendering (`{:.16e}`): exact binary64 round-trip.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Wire form of a path: knots of the continuous part and the jump list,
/// both as `[time, value]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathJson {
    pub skeleton: Vec<(f64, f64)>,
    pub jumps: Vec<(f64, f64)>,
}

impl From<&CadlagPath> for PathJson {
    fn from(x: &CadlagPath) -> Self {
        PathJson {
            skeleton: x.skeleton().to_vec(),
            jumps: x.jumps().iter().map(|j| (j.time, j.size)).collect(),
        }
    }
}

impl TryFrom<PathJson> for CadlagPath {
    type Error = PathError;

    fn try_from(p: PathJson) -> Result<CadlagPath, PathError> {
        CadlagPath::new(p.skeleton, p.jumps)
    }
}

/// On-disk document for simulate/trim outputs: the resolved configuration
/// plus the path payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathDocument {
    pub config: serde_json::Value,
    pub path: PathJson,
}

/// Parse a path file: either a [`PathDocument`] or a bare [`PathJson`].
pub fn parse_path_file(text: &str) -> Result<CadlagPath, String> {
    if let Ok(doc) = serde_json::from_str::<PathDocument>(text) {
        return CadlagPath::try_from(doc.path).map_err(|e| e.to_string());
    }
    let bare: PathJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    CadlagPath::try_from(bare).map_err(|e| e.to_string())
}

/// Jump distribution in config files.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "dist", rename_all = "kebab-case")]
pub enum JumpConfig {
    Pareto { scale: f64, shape: f64 },
    Exp { rate: f64 },
    SignedPareto { scale: f64, shape: f64, p_positive: f64 },
}

impl From<JumpConfig> for JumpDist {
    fn from(j: JumpConfig) -> JumpDist {
        match j {
            JumpConfig::Pareto { scale, shape } => JumpDist::Pareto { scale, shape },
            JumpConfig::Exp { rate } => JumpDist::Exponential { rate },
            JumpConfig::SignedPareto { scale, shape, p_positive } => {
                JumpDist::SignedPareto { scale, shape, p_positive }
            }
        }
    }
}

/// Model section of a config file.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Cpp { intensity: f64, drift: f64, jump: JumpConfig },
    Stable { alpha: f64, c_pos: f64, c_neg: f64, n_terms: usize },
}

impl From<ModelConfig> for LevyModel {
    fn from(m: ModelConfig) -> LevyModel {
        match m {
            ModelConfig::Cpp { intensity, drift, jump } => LevyModel::CompoundPoissonDrift {
                intensity,
                jump_dist: jump.into(),
                drift,
            },
            ModelConfig::Stable { alpha, c_pos, c_neg, n_terms } => {
                LevyModel::StableSeries { alpha, c_pos, c_neg, n_terms }
            }
        }
    }
}

/// Resolved run configuration: the key-value schema of `--config` files.
/// Flags override individual keys; outputs embed the resolved value.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub horizons: Vec<f64>,
    /// Trim spec in the short grammar (`pos:r`, `neg:s`, `both:r,s`,
    /// `mod:r`, `smod:r`, `lb-pos:r`, `lb-mod:r`).
    pub spec: String,
    pub n_paths: usize,
    pub tau_grid: Vec<f64>,
    pub u_grid: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
    pub ks_threshold: f64,
    pub ref_n_terms: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::Cpp {
                intensity: 100.0,
                drift: -110.0,
                jump: JumpConfig::Pareto { scale: 1.0, shape: 2.0 },
            },
            horizons: vec![1.0],
            spec: "both:0,0".to_string(),
            n_paths: 1000,
            tau_grid: vec![0.25, 0.5, 1.0],
            u_grid: vec![0.5, 1.0, 2.0],
            seed: 1,
            stream: 0,
            ks_threshold: 0.05,
            ref_n_terms: 100_000,
        }
    }
}

impl RunConfig {
    pub fn model(&self) -> LevyModel {
        self.model.into()
    }

    pub fn trim_spec(&self) -> Result<TrimSpec, String> {
        self.spec.parse().map_err(|e| format!("{e}: {:?}", self.spec))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

fn meta_lines(command: &str, config: &RunConfig, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# trimlab {command}\n"));
    out.push_str(&format!(
        "# config: {}\n",
        serde_json::to_string(config).expect("config serializes")
    ));
    out.push_str(&format!("# seed: {}\n", config.seed));
    for (k, v) in extra {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out
}

pub fn dist_csv(command: &str, config: &RunConfig, r: &J1Result) -> String {
    let witness = r
        .witness
        .knots()
        .iter()
        .map(|(u, v)| format!("{}@{}", g17(*u), g17(*v)))
        .collect::<Vec<_>>()
        .join("|");
    let mut out = meta_lines(command, config, &[]);
    out.push_str("distance,time_term,value_term,exact,witness\n");
    out.push_str(&format!(
        "{},{},{},{},{}\n",
        g17(r.distance),
        g17(r.time_term),
        g17(r.value_term),
        r.exact,
        csv_field(&witness)
    ));
    out
}

pub fn probe_csv(command: &str, config: &RunConfig, rep: &ProbeReport) -> String {
    let mut out = meta_lines(
        command,
        config,
        &[
            ("certificate", format!("{:?}", rep.certificate)),
            ("images_converge", rep.images_converge.to_string()),
            ("agreement", rep.agreement.to_string()),
            ("image_tol", g17(rep.image_tol)),
        ],
    );
    out.push_str("n,input_distance,distance,time_term,value_term\n");
    for row in &rep.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.n,
            g17(row.input_distance),
            g17(row.image_distance),
            g17(row.time_term),
            g17(row.value_term)
        ));
    }
    out
}

pub fn marginal_csv(command: &str, config: &RunConfig, rep: &MarginalReport) -> String {
    let noninc = rep
        .nonincreasing_per_tau
        .iter()
        .map(|(tau, ok)| format!("{}:{}", g17(*tau), ok))
        .collect::<Vec<_>>()
        .join(" ");
    let mut out = meta_lines(
        command,
        config,
        &[
            ("config_digest", format!("{:016x}", rep.config_digest)),
            ("ks_nonincreasing_per_tau", noninc),
            ("below_threshold_at_largest", rep.below_threshold_at_largest.to_string()),
        ],
    );
    out.push_str(
        "spec,horizon,tau,n,ks,model_mean,model_var,model_ci_radius,ref_mean,ref_var,ref_ci_radius\n",
    );
    for c in &rep.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_field(&rep.spec.to_string()),
            g17(c.horizon),
            g17(c.tau),
            c.n,
            g17(c.ks),
            g17(c.model_mean),
            g17(c.model_var),
            g17(c.model_ci_radius),
            g17(c.ref_mean),
            g17(c.ref_var),
            g17(c.ref_ci_radius)
        ));
    }
    out
}

pub fn ruin_csv(command: &str, config: &RunConfig, rep: &RuinReport) -> String {
    let mut out = meta_lines(
        command,
        config,
        &[
            ("config_digest", format!("{:016x}", rep.config_digest)),
            ("order", rep.order.to_string()),
        ],
    );
    out.push_str("order,horizon,u,n,p_model,p_ref,se_model,se_ref,combined_se,within_3se\n");
    for c in &rep.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            rep.order,
            g17(c.horizon),
            g17(c.u),
            c.n,
            g17(c.p_model),
            g17(c.p_ref),
            g17(c.se_model),
            g17(c.se_ref),
            g17(c.combined_se),
            c.within_3se
        ));
    }
    out
}

pub fn figure_csv(command: &str, config: &RunConfig, fig: &FigureSeries) -> String {
    let mut extra = vec![("stream", fig.seed.stream.to_string())];
    if let Some(r) = fig.record_time {
        extra.push(("record_time", g17(r)));
        extra.push(("record_jump", g17(fig.record_jump)));
    }
    let mut out = meta_lines(command, config, &extra);
    out.push_str("tau,original,trim_as_you_go,lookback\n");
    for row in &fig.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            g17(row.tau),
            g17(row.original),
            g17(row.trim_as_you_go),
            g17(row.lookback)
        ));
    }
    out
}

/// JSON form of a marginal report (same content as the CSV).
pub fn marginal_json(config: &RunConfig, rep: &MarginalReport) -> String {
    let cells: Vec<serde_json::Value> = rep
        .cells
        .iter()
        .map(|c| {
            serde_json::json!({
                "horizon": c.horizon, "tau": c.tau, "n": c.n, "ks": c.ks,
                "model_mean": c.model_mean, "model_var": c.model_var,
                "model_ci_radius": c.model_ci_radius,
                "ref_mean": c.ref_mean, "ref_var": c.ref_var,
                "ref_ci_radius": c.ref_ci_radius,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "config": config,
        "spec": rep.spec.to_string(),
        "base_seed": rep.base_seed,
        "config_digest": format!("{:016x}", rep.config_digest),
        "ks_threshold": rep.ks_threshold,
        "nonincreasing_per_tau": rep.nonincreasing_per_tau,
        "below_threshold_at_largest": rep.below_threshold_at_largest,
        "cells": cells,
    });
    serde_json::to_string_pretty(&doc).expect("report serializes")
}

/// JSON form of a ruin report (same content as the CSV).
pub fn ruin_json(config: &RunConfig, rep: &RuinReport) -> String {
    let cells: Vec<serde_json::Value> = rep
        .cells
        .iter()
        .map(|c| {
            serde_json::json!({
                "horizon": c.horizon, "u": c.u, "n": c.n,
                "p_model": c.p_model, "p_ref": c.p_ref,
                "se_model": c.se_model, "se_ref": c.se_ref,
                "combined_se": c.combined_se, "within_3se": c.within_3se,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "config": config,
        "order": rep.order,
        "base_seed": rep.base_seed,
        "config_digest": format!("{:016x}", rep.config_digest),
        "cells": cells,
    });
    serde_json::to_string_pretty(&doc).expect("report serializes")
}

/// Diagnostics rows for a convergence check: `(n, distance, time_term,
/// value_term)` per sequence index.
pub fn convergence_csv(command: &str, config: &RunConfig, c: &cadlag::j1::Convergence) -> String {
    let mut out = meta_lines(command, config, &[("passed", c.passed.to_string())]);
    out.push_str("n,distance,time_term,value_term\n");
    for row in &c.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.index,
            g17(row.result.distance),
            g17(row.result.time_term),
            g17(row.result.value_term)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789e250, -7.25e-9] {
            let s = g17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn path_json_round_trip() {
        let x = CadlagPath::new(
            vec![(0.0, 0.5), (0.25, -1.0), (1.0, 2.0)],
            vec![(0.1, 1.0 / 3.0), (0.75, -2.5)],
        )
        .unwrap();
        let json = serde_json::to_string(&PathJson::from(&x)).unwrap();
        let back = parse_path_file(&json).unwrap();
        assert_eq!(back, x);

        // wrapped form parses too
        let doc = PathDocument { config: serde_json::json!({"k": 1}), path: PathJson::from(&x) };
        let wrapped = serde_json::to_string(&doc).unwrap();
        assert_eq!(parse_path_file(&wrapped).unwrap(), x);
    }

    #[test]
    fn config_schema_round_trip() {
        let cfg = RunConfig::default();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        // partial configs pick up defaults
        let partial: RunConfig =
            serde_json::from_str(r#"{"spec":"pos:1","n_paths":7}"#).unwrap();
        assert_eq!(partial.n_paths, 7);
        assert_eq!(partial.spec, "pos:1");
        assert_eq!(partial.horizons, vec![1.0]);
        // unknown keys are rejected
        assert!(serde_json::from_str::<RunConfig>(r#"{"spek":"pos:1"}"#).is_err());
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(csv_field("both:1,1"), "\"both:1,1\"");
        assert_eq!(csv_field("pos:1"), "pos:1");
    }
}
