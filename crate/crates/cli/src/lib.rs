//! Batch experiment harness: simulate a scheme, hand the public view to the
//! attack, compare with the honest key, and collect a JSON report.
//!
//! # Config file
//!
//! ```json
//! {"protocol": "stickel", "trials": 50, "seed": 1, "params": {"p": 5, "n": 3}}
//! ```
//!
//! Every key is optional. Parameters are applied on top of the scheme's
//! defaults, and `--param key=value` flags are applied on top of the file.
//!
//! # Algebra descriptions
//!
//! The `algebra` parameter selects the coefficient algebra; its field is the
//! `p` parameter.
//!
//! ```json
//! {"kind": "trivial"}
//! {"kind": "group_algebra", "generators": ["(1 2 3 4 5)", "(1 2 3)"], "degree": 5}
//! {"kind": "polynomial_quotient", "modulus": [6, 6]}
//! {"kind": "explicit", "dim": 2, "structure_constants": [[[1,0],[0,1]],[[0,1],[1,0]]], "unit": [1,0]}
//! ```
//!
//! Cycle strings are 1-based. `polynomial_quotient` lists the non-leading
//! coefficients of a monic modulus, low degree first. In `explicit`,
//! `structure_constants[i][j]` is the coefficient vector of `e_i e_j`.

use std::path::PathBuf;

use lindecomp::actions::Action;
use lindecomp::attacks::attack_with;
use lindecomp::linalg::{FMatrix, FVector};
use lindecomp::protocols::{Params, ProtocolInstance, ProtocolTag};
use lindecomp::spanclosure::{span_closure, ClosureOptions};
use lindecomp::PrimeField;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] lindecomp::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Contents of a `--config` file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub protocol: Option<ProtocolTag>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl ConfigFile {
    pub fn load(path: &std::path::Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Values taken from the command line; `None` defers to the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub protocol: Option<ProtocolTag>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub params: Vec<(String, String)>,
    pub large: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub protocol: ProtocolTag,
    pub params: Params,
    pub trials: usize,
    pub seed: u64,
    pub trace: bool,
    pub emit_private: bool,
    pub emit_transcripts: bool,
    /// Record wall time per trial. Off by default so reports stay reproducible.
    pub timing: bool,
}

/// Splits `key=value`.
pub fn parse_param(s: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(CliError::Config(format!("expected key=value, got {s:?}"))),
    }
}

impl ExperimentConfig {
    pub fn new(protocol: ProtocolTag) -> Self {
        ExperimentConfig {
            protocol,
            params: Params::defaults(protocol),
            trials: 1,
            seed: 0,
            trace: false,
            emit_private: false,
            emit_transcripts: false,
            timing: false,
        }
    }

    /// Merges scheme defaults, then the file, then the command line.
    pub fn resolve(file: Option<ConfigFile>, cli: Overrides) -> Result<ExperimentConfig> {
        let file = file.unwrap_or_default();
        let protocol = cli
            .protocol
            .or(file.protocol)
            .ok_or_else(|| CliError::Config("no protocol given".into()))?;
        let mut cfg = ExperimentConfig::new(protocol);
        if cli.large {
            if protocol != ProtocolTag::Hkks {
                return Err(CliError::Config(format!("--large applies to hkks only, not {protocol}")));
            }
            cfg.params = Params::hkks_large();
        }
        for (k, v) in &file.params {
            cfg.params.set(k, &v.to_string())?;
        }
        for (k, v) in &cli.params {
            cfg.params.set(k, v)?;
        }
        cfg.trials = cli.trials.or(file.trials).unwrap_or(1);
        cfg.seed = cli.seed.or(file.seed).unwrap_or(0);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        self.params.validate(self.protocol)?;
        Ok(())
    }
}

/// Seed of trial `index`: the first word of stream `index` of a ChaCha8
/// generator keyed by the batch seed.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    /// Exact equality of the recovered key (and the cross-check, if any)
    /// with the honest key.
    pub success: bool,
    pub basis_dim: usize,
    pub passes: usize,
    pub field_ops: u64,
    pub generation_ops: u64,
    pub recovered_key: Option<Vec<u32>>,
    pub honest_key: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check_key: Option<Vec<u32>>,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Environment {
    pub crate_version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub protocol: ProtocolTag,
    pub params: Params,
    pub seed: u64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub records: Vec<TrialRecord>,
    pub environment: Environment,
}

impl Report {
    pub fn all_succeeded(&self) -> bool {
        self.successes == self.trials
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn entries(v: &FVector) -> Vec<u32> {
    v.entries().to_vec()
}

fn run_trial(cfg: &ExperimentConfig, index: u64) -> TrialRecord {
    let seed = trial_seed(cfg.seed, index);
    let mut rec = TrialRecord {
        trial: index,
        seed,
        success: false,
        basis_dim: 0,
        passes: 0,
        field_ops: 0,
        generation_ops: 0,
        recovered_key: None,
        honest_key: None,
        cross_check_key: None,
        error: None,
        wall_ms: None,
        transcript: None,
    };
    if cfg.trace {
        eprintln!("== trial {index} seed {seed}");
    }
    let start = std::time::Instant::now();
    let instance = ProtocolInstance::with_params(cfg.protocol, cfg.params.clone(), seed);
    let transcript = match instance.simulate() {
        Ok(t) => t,
        Err(e) => {
            rec.error = Some(format!("simulation: {e}"));
            return rec;
        }
    };
    rec.generation_ops = transcript.generation_ops;
    rec.honest_key = Some(entries(&transcript.honest_key));
    if cfg.emit_transcripts || cfg.emit_private {
        rec.transcript = Some(transcript.to_json(cfg.emit_private));
    }
    let opts = ClosureOptions {
        trace: cfg.trace,
        ..ClosureOptions::default()
    };
    match attack_with(&transcript.public, opts) {
        Ok(out) => {
            rec.basis_dim = out.stats.basis_dim;
            rec.passes = out.stats.passes;
            rec.field_ops = out.stats.ops;
            let cross_ok = out
                .cross_check
                .as_ref()
                .is_none_or(|c| *c == transcript.honest_key);
            rec.success = out.key == transcript.honest_key && cross_ok;
            rec.recovered_key = Some(entries(&out.key));
            rec.cross_check_key = out.cross_check.as_ref().map(entries);
        }
        Err(e) => rec.error = Some(format!("attack: {e}")),
    }
    if cfg.timing {
        rec.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    if cfg.trace {
        eprintln!("== trial {index}: {}", if rec.success { "recovered" } else { "FAILED" });
    }
    rec
}

/// Runs every trial. Per-trial failures are recorded, not returned.
/// Trials run in parallel unless tracing, where output order matters.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let n = cfg.trials as u64;
    let records: Vec<TrialRecord> = if cfg.trace {
        (0..n).map(|i| run_trial(cfg, i)).collect()
    } else {
        (0..n).into_par_iter().map(|i| run_trial(cfg, i)).collect()
    };
    let successes = records.iter().filter(|r| r.success).count();
    Ok(Report {
        protocol: cfg.protocol,
        params: cfg.params.clone(),
        seed: cfg.seed,
        trials: cfg.trials,
        successes,
        success_rate: successes as f64 / cfg.trials as f64,
        records,
        environment: Environment::current(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub tag: ProtocolTag,
    pub description: &'static str,
    pub exponents: Vec<&'static str>,
    pub defaults: Params,
}

/// One entry per scheme, in a fixed order.
pub fn list_protocols() -> Vec<CatalogEntry> {
    ProtocolTag::ALL
        .iter()
        .map(|&tag| CatalogEntry {
            tag,
            description: tag.description(),
            exponents: tag.exponent_names().to_vec(),
            defaults: Params::defaults(tag),
        })
        .collect()
}

pub fn render_catalog(entries: &[CatalogEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&format!("{:<18} {}\n", e.tag.as_str(), e.description));
        if !e.exponents.is_empty() {
            out.push_str(&format!("{:<18} fixed exponents: [{}]\n", "", e.exponents.join(", ")));
        }
        let defaults = serde_json::to_string(&e.defaults).expect("params serialize");
        out.push_str(&format!("{:<18} defaults: {defaults}\n", ""));
    }
    out.push_str(
        "\nparameters: p, algebra, n, m, generators, word_length, exponent_bound, style, \
         poly_degree, exponents\nstyles: polynomial_in_matrix, center_scalars, block_diagonal_split\n",
    );
    out
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub dims: Vec<usize>,
    pub generators: usize,
    pub p: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub dim: usize,
    pub rank: usize,
    pub passes: usize,
    pub ops: u64,
    pub ops_per_cube: f64,
}

fn random_fmatrix<R: Rng>(field: PrimeField, d: usize, rng: &mut R) -> Result<FMatrix> {
    let p = field.modulus() as i64;
    let rows: Vec<Vec<i64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.gen_range(0..p)).collect())
        .collect();
    Ok(FMatrix::from_rows(field, &rows)?)
}

/// Span closure of one random seed under random dense maps, per dimension.
pub fn bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let field = PrimeField::new(cfg.p)?;
    if cfg.generators == 0 {
        return Err(CliError::Config("bench needs at least one generator".into()));
    }
    cfg.dims
        .iter()
        .map(|&d| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ d as u64);
            let gens = (0..cfg.generators)
                .map(|_| Ok(Action::explicit(random_fmatrix(field, d, &mut rng)?)?))
                .collect::<Result<Vec<_>>>()?;
            let seed = lindecomp::actions::random_vector(field, d, &mut rng);
            let basis = span_closure(field, d, &[seed], &gens)?;
            let stats = basis.stats();
            Ok(BenchRow {
                dim: d,
                rank: basis.rank(),
                passes: stats.passes,
                ops: stats.ops,
                ops_per_cube: stats.ops as f64 / (d as f64).powi(3),
            })
        })
        .collect()
}
