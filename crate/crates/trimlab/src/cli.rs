//! Command-line front end.
//!
//! Subcommands: `simulate`, `trim`, `dist`, `probe`, `converge`, `ruin`,
//! `figure1`. Configuration comes from an optional `--config FILE` (JSON,
//! see [`RunConfig`]) with individual flags overriding single keys; every
//! output file embeds the fully resolved configuration and seed, and
//! re-running a command reproduces the file byte for byte.

use std::fs;
use std::path::PathBuf;

use cadlag::j1;
use cadlag::levy::{self, RngSeed};
use cadlag::trim::TrimSpec;
use cadlag::CadlagPath;

use crate::format::{self, JumpConfig, ModelConfig, PathDocument, PathJson, RunConfig};
use crate::harness::{self, ExperimentConfig, PerturbationFamily};

const USAGE: &str = "\
trimlab - trimmed cadlag path laboratory

USAGE:
  trimlab <COMMAND> [FLAGS]

COMMANDS:
  simulate   Sample one model path and write it as JSON
  trim       Apply a trimmer to a path file
  dist       J1 distance between two path files (CSV with witness)
  probe      Continuity probe along a perturbation family (CSV)
  converge   Marginal-law comparison against the trimmed stable reference
  ruin       Ruin-time survival comparison (model vs trimmed stable)
  figure1    Risk-path illustration series: original, trim-as-you-go,
             lookback columns on a shared grid (CSV)

COMMON FLAGS:
  --config FILE      JSON config (documented in the README); flags override
  --out DIR          Output directory (default: $TRIMLAB_OUT or '.')
  --name FILE        Output file name override
  --seed N           Base seed          --stream N        Stream index
  --spec S           Trim spec: pos:r neg:s both:r,s mod:r smod:r
                     lb-pos:r lb-mod:r
  --model KIND       cpp | stable
  --intensity X --drift X --jump pareto:scale,shape|exp:rate|
                     spareto:scale,shape,p   (cpp model)
  --alpha X --c-pos X --c-neg X --n-terms N  (stable model; --alpha also
                     sets the cpp Pareto shape)
  --horizon T | --horizons T1,T2,...
  --paths N          Monte Carlo paths per horizon
  --tau-grid A,B,... --u-grid A,B,...
  --ks-threshold X   --ref-n-terms N

COMMAND FLAGS:
  trim      --in FILE
  dist      --a FILE --b FILE
  probe     --case tied-records|single-jump|smod-flip, or --in FILE with
            --family step:time,amp; --steps N; --image-tol X
  figure1   --grid N (grid points, default 512)
";

struct Flags {
    pairs: Vec<(String, String)>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Flags, String> {
        let mut pairs = Vec::new();
        let mut it = args.iter();
        while let Some(a) = it.next() {
            let Some(key) = a.strip_prefix("--") else {
                return Err(format!("unexpected argument '{a}'"));
            };
            let val = it.next().ok_or_else(|| format!("missing value for --{key}"))?;
            pairs.push((key.to_string(), val.clone()));
        }
        Ok(Flags { pairs })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, String> {
        self.get(key)
            .map(|v| v.parse::<f64>().map_err(|_| format!("--{key}: bad number '{v}'")))
            .transpose()
    }

    fn u64(&self, key: &str) -> Result<Option<u64>, String> {
        self.get(key)
            .map(|v| v.parse::<u64>().map_err(|_| format!("--{key}: bad integer '{v}'")))
            .transpose()
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, String> {
        self.get(key)
            .map(|v| v.parse::<usize>().map_err(|_| format!("--{key}: bad integer '{v}'")))
            .transpose()
    }

    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, String> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|p| p.trim().parse::<f64>().map_err(|_| format!("--{key}: bad list '{v}'")))
                    .collect::<Result<Vec<f64>, String>>()
            })
            .transpose()
    }
}

fn parse_jump(s: &str) -> Result<JumpConfig, String> {
    let (kind, args) = s.split_once(':').ok_or_else(|| format!("bad jump spec '{s}'"))?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad jump spec '{s}'")))
        .collect::<Result<_, _>>()?;
    match (kind, nums.as_slice()) {
        ("pareto", [scale, shape]) => Ok(JumpConfig::Pareto { scale: *scale, shape: *shape }),
        ("exp", [rate]) => Ok(JumpConfig::Exp { rate: *rate }),
        ("spareto", [scale, shape, p]) => {
            Ok(JumpConfig::SignedPareto { scale: *scale, shape: *shape, p_positive: *p })
        }
        _ => Err(format!("bad jump spec '{s}'")),
    }
}

fn parse_family(s: &str) -> Result<PerturbationFamily, String> {
    let (kind, args) = s.split_once(':').ok_or_else(|| format!("bad family '{s}'"))?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad family '{s}'")))
        .collect::<Result<_, _>>()?;
    match (kind, nums.as_slice()) {
        ("step", [time, amplitude]) => {
            Ok(PerturbationFamily::FadingStep { time: *time, amplitude: *amplitude })
        }
        ("const", [time, amplitude]) => {
            Ok(PerturbationFamily::ConstantStep { time: *time, amplitude: *amplitude })
        }
        _ => Err(format!("bad family '{s}'")),
    }
}

fn resolve_config(flags: &Flags) -> Result<RunConfig, String> {
    let mut cfg = match flags.get("config") {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("cannot read {p}: {e}"))?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| format!("bad config {p}: {e}"))?
        }
        None => RunConfig::default(),
    };
    if let Some(kind) = flags.get("model") {
        cfg.model = match kind {
            "cpp" => ModelConfig::Cpp {
                intensity: 100.0,
                drift: 0.0,
                jump: JumpConfig::Pareto { scale: 1.0, shape: 0.8 },
            },
            "stable" => {
                ModelConfig::Stable { alpha: 0.8, c_pos: 1.0, c_neg: 0.0, n_terms: 100_000 }
            }
            other => return Err(format!("--model: expected cpp|stable, got '{other}'")),
        };
    }
    match &mut cfg.model {
        ModelConfig::Cpp { intensity, drift, jump } => {
            if let Some(v) = flags.f64("intensity")? {
                *intensity = v;
            }
            if let Some(v) = flags.f64("drift")? {
                *drift = v;
            }
            if let Some(s) = flags.get("jump") {
                *jump = parse_jump(s)?;
            }
            if let Some(v) = flags.f64("alpha")? {
                match jump {
                    JumpConfig::Pareto { shape, .. } | JumpConfig::SignedPareto { shape, .. } => {
                        *shape = v;
                    }
                    JumpConfig::Exp { .. } => {
                        return Err("--alpha needs a Pareto jump distribution".to_string())
                    }
                }
            }
        }
        ModelConfig::Stable { alpha, c_pos, c_neg, n_terms } => {
            if let Some(v) = flags.f64("alpha")? {
                *alpha = v;
            }
            if let Some(v) = flags.f64("c-pos")? {
                *c_pos = v;
            }
            if let Some(v) = flags.f64("c-neg")? {
                *c_neg = v;
            }
            if let Some(v) = flags.usize("n-terms")? {
                *n_terms = v;
            }
        }
    }
    if let Some(s) = flags.get("spec") {
        s.parse::<TrimSpec>().map_err(|e| format!("--spec: {e}"))?;
        cfg.spec = s.to_string();
    }
    if let Some(v) = flags.u64("seed")? {
        cfg.seed = v;
    }
    if let Some(v) = flags.u64("stream")? {
        cfg.stream = v;
    }
    if let Some(v) = flags.usize("paths")? {
        cfg.n_paths = v;
    }
    if let Some(t) = flags.f64("horizon")? {
        cfg.horizons = vec![t];
    }
    if let Some(ts) = flags.f64_list("horizons")? {
        cfg.horizons = ts;
    }
    if let Some(g) = flags.f64_list("tau-grid")? {
        cfg.tau_grid = g;
    }
    if let Some(g) = flags.f64_list("u-grid")? {
        cfg.u_grid = g;
    }
    if let Some(v) = flags.f64("ks-threshold")? {
        cfg.ks_threshold = v;
    }
    if let Some(v) = flags.usize("ref-n-terms")? {
        cfg.ref_n_terms = v;
    }
    Ok(cfg)
}

fn out_dir(flags: &Flags) -> PathBuf {
    flags
        .get("out")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("TRIMLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_output(dir: &PathBuf, name: &str, contents: &str) -> Result<PathBuf, String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

fn experiment_config(cfg: &RunConfig) -> Result<ExperimentConfig, String> {
    Ok(ExperimentConfig {
        model: cfg.model(),
        horizons: cfg.horizons.clone(),
        spec: cfg.trim_spec()?,
        n_paths: cfg.n_paths,
        tau_grid: cfg.tau_grid.clone(),
        base_seed: cfg.seed,
        ks_threshold: cfg.ks_threshold,
        ref_n_terms: cfg.ref_n_terms,
    })
}

fn read_path_file(p: &str) -> Result<CadlagPath, String> {
    let text = fs::read_to_string(p).map_err(|e| format!("cannot read {p}: {e}"))?;
    format::parse_path_file(&text).map_err(|e| format!("bad path file {p}: {e}"))
}

/// Run the CLI on an argument list (program name already stripped).
/// Returns the process exit code.
pub fn run<I>(argv: I) -> i32
where
    I: IntoIterator,
    I::Item: Into<String>,
{
    let args: Vec<String> = argv.into_iter().map(Into::into).collect();
    match run_inner(&args) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{USAGE}");
            2
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

fn run_inner(args: &[String]) -> Result<(), CliError> {
    let Some(command) = args.first() else {
        return Err(CliError::Usage("missing command".to_string()));
    };
    if command == "--help" || command == "help" || command == "-h" {
        println!("{USAGE}");
        return Ok(());
    }
    let flags = Flags::parse(&args[1..]).map_err(CliError::Usage)?;
    let cfg = resolve_config(&flags).map_err(CliError::Usage)?;
    let dir = out_dir(&flags);
    match command.as_str() {
        "simulate" => {
            let model = cfg.model();
            model.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let t = cfg.horizons[0];
            let x = levy::sample_path(&model, t, RngSeed::new(cfg.seed, cfg.stream));
            let doc = PathDocument { config: cfg.to_json(), path: PathJson::from(&x) };
            let name = flags.get("name").unwrap_or("path.json");
            let body = serde_json::to_string_pretty(&doc).expect("document serializes");
            let path = write_output(&dir, name, &body).map_err(CliError::Runtime)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        "trim" => {
            let input = flags.get("in").ok_or(CliError::Usage("trim needs --in FILE".into()))?;
            let x = read_path_file(input).map_err(CliError::Runtime)?;
            let spec = cfg.trim_spec().map_err(CliError::Usage)?;
            let y = cadlag::trim::apply(&x, &spec);
            let doc = PathDocument { config: cfg.to_json(), path: PathJson::from(&y) };
            let name = flags.get("name").unwrap_or("trimmed.json");
            let body = serde_json::to_string_pretty(&doc).expect("document serializes");
            let path = write_output(&dir, name, &body).map_err(CliError::Runtime)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        "dist" => {
            let a = flags.get("a").ok_or(CliError::Usage("dist needs --a FILE".into()))?;
            let b = flags.get("b").ok_or(CliError::Usage("dist needs --b FILE".into()))?;
            let xa = read_path_file(a).map_err(CliError::Runtime)?;
            let xb = read_path_file(b).map_err(CliError::Runtime)?;
            let r = j1::j1_distance(&xa, &xb);
            let name = flags.get("name").unwrap_or("dist.csv");
            let body = format::dist_csv("dist", &cfg, &r);
            let path = write_output(&dir, name, &body).map_err(CliError::Runtime)?;
            println!("wrote {} (distance {})", path.display(), r.distance);
            Ok(())
        }
        "probe" => {
            let steps = flags.usize("steps").map_err(CliError::Usage)?.unwrap_or(64);
            let image_tol = flags.f64("image-tol").map_err(CliError::Usage)?.unwrap_or(1e-3);
            let (x, family, default_spec, case) = match flags.get("case") {
                Some("tied-records") => (
                    CadlagPath::step(0.0, &[(1.0 / 3.0, 1.0), (2.0 / 3.0, 1.0)]).unwrap(),
                    PerturbationFamily::FadingStep { time: 2.0 / 3.0, amplitude: 1.0 },
                    TrimSpec::LookbackPos(1),
                    "tied-records",
                ),
                Some("single-jump") => (
                    CadlagPath::indicator(0.5),
                    PerturbationFamily::FadingStep { time: 0.75, amplitude: 0.05 },
                    TrimSpec::LookbackPos(1),
                    "single-jump",
                ),
                Some("smod-flip") => (
                    CadlagPath::step(0.0, &[(1.0 / 3.0, 1.0), (2.0 / 3.0, -1.0)]).unwrap(),
                    PerturbationFamily::FadingStep { time: 1.0 / 3.0, amplitude: 1.0 },
                    TrimSpec::SignedModulus(1),
                    "smod-flip",
                ),
                Some(other) => {
                    return Err(CliError::Usage(format!("unknown probe case '{other}'")))
                }
                None => {
                    let input =
                        flags.get("in").ok_or(CliError::Usage("probe needs --case or --in".into()))?;
                    let x = read_path_file(input).map_err(CliError::Runtime)?;
                    let fam = flags
                        .get("family")
                        .ok_or(CliError::Usage("probe --in needs --family".into()))
                        .and_then(|s| parse_family(s).map_err(CliError::Usage))?;
                    let spec = cfg.trim_spec().map_err(CliError::Usage)?;
                    (x, fam, spec, "custom")
                }
            };
            // an explicit --spec overrides the preset's default trimmer
            let spec = match flags.get("spec") {
                Some(s) => s.parse::<TrimSpec>().map_err(|e| CliError::Usage(e.to_string()))?,
                None => default_spec,
            };
            let rep = harness::continuity_probe(&x, &spec, &family, steps, image_tol)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut cfg = cfg.clone();
            cfg.spec = spec.to_string();
            let name = flags.get("name").unwrap_or("probe.csv");
            let body = format::probe_csv(&format!("probe case={case}"), &cfg, &rep);
            let path = write_output(&dir, name, &body).map_err(CliError::Runtime)?;
            println!(
                "wrote {} (certificate {:?}, images_converge {})",
                path.display(),
                rep.certificate,
                rep.images_converge
            );
            Ok(())
        }
        "converge" => {
            let exp = experiment_config(&cfg).map_err(CliError::Usage)?;
            let rep = harness::marginal_convergence(&exp)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let name = flags.get("name").unwrap_or("converge.csv");
            let body = format::marginal_csv("converge", &cfg, &rep);
            let path = write_output(&dir, name, &body).map_err(CliError::Runtime)?;
            let json_name = name.strip_suffix(".csv").unwrap_or(name).to_string() + ".json";
            let json = format::marginal_json(&cfg, &rep);
            write_output(&dir, &json_name, &json).map_err(CliError::Runtime)?;
            println!(
                "wrote {} (below threshold at largest horizon: {})",
                path.display(),
                rep.below_threshold_at_largest
            );
            Ok(())
        }
        "ruin" => {
            let exp = experiment_config(&cfg).map_err(CliError::Usage)?;
            let rep = harness::ruin_experiment(&exp, &cfg.u_grid)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let name = flags.get("name").unwrap_or("ruin.csv");
            let body = format::ruin_csv("ruin", &cfg, &rep);
            let path = write_output(&dir, name, &body).map_err(CliError::Runtime)?;
            let json_name = name.strip_suffix(".csv").unwrap_or(name).to_string() + ".json";
            let json = format::ruin_json(&cfg, &rep);
            write_output(&dir, &json_name, &json).map_err(CliError::Runtime)?;
            let all = rep.cells.iter().all(|c| c.within_3se);
            println!("wrote {} (all cells within 3 SE: {all})", path.display());
            Ok(())
        }
        "figure1" => {
            let grid = flags.usize("grid").map_err(CliError::Usage)?.unwrap_or(512);
            if grid == 0 {
                return Err(CliError::Usage("--grid must be positive".into()));
            }
            // the illustration model is fixed; seed and grid come from flags
            let mut cfg = cfg.clone();
            cfg.model = ModelConfig::Cpp {
                intensity: 100.0,
                drift: -110.0,
                jump: JumpConfig::Pareto { scale: 1.0, shape: 2.0 },
            };
            cfg.horizons = vec![1.0];
            let fig = harness::figure_series(RngSeed::new(cfg.seed, cfg.stream), grid);
            let name = flags.get("name").unwrap_or("figure1.csv");
            let body = format::figure_csv("figure1", &cfg, &fig);
            let path = write_output(&dir, name, &body).map_err(CliError::Runtime)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown command '{other}'"))),
    }
}
