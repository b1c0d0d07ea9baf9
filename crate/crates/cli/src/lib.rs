//! Command-line front end: reads a bin01 matrix, runs one pipeline and
//! emits a JSON report.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use blr_core::baseline::{baseline_binary_kmeans, CoresetConfig};
use blr_core::bitrow::DEFAULT_MAX_WIDTH;
use blr_core::relations::DEFAULT_MAX_RANK;
use blr_core::{
    constrained_kmeans, default_params, exact_binary_kmeans, exact_constrained_kmeans, exact_lowrank, lowrank_approx,
    parse_relations, BitRow, CenterSet, InnerProduct, OracleLimits, PointStream, RelationSet, StreamConfig,
};
use clap::{Parser, ValueEnum};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_D_ENV: &str = "BLR_MAX_D";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Constrained binary k-means, three passes.
    Solve,
    /// Binary rank-r factorization, four passes.
    Lowrank,
    /// One-pass baseline clustering only.
    Baseline,
    /// Exhaustive search on tiny inputs.
    Oracle,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "blr",
    version,
    about = "Streaming binary k-means and binary low-rank approximation"
)]
pub struct RunConfig {
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Matrix file: one row of '0'/'1' characters per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Allowed center tuples per coordinate.
    #[arg(long)]
    pub relations: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// gf2, boolean or table:<path>.
    #[arg(long, default_value = "gf2")]
    pub field: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub tau: Option<usize>,
    #[arg(long)]
    pub eta: Option<usize>,
    #[arg(long)]
    pub zeta: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Cap on candidate combinations per repetition.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 8.0)]
    pub coreset_constant: f64,
    /// Report path; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("{0}")]
    Limits(String),
    #[error("cannot write report: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Invalid(_) | CliError::Output(_) => 4,
            CliError::Limits(_) => 5,
        }
    }
}

impl From<blr_core::Error> for CliError {
    fn from(e: blr_core::Error) -> Self {
        use blr_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Parse { .. } | E::Io(_) | E::EmptyDataset | E::EmptyInput => CliError::Parse(msg),
            E::WidthMismatch { .. } => CliError::Parse(msg),
            E::EmptyRelation { .. } => CliError::Infeasible(msg),
            E::LimitsExceeded(_) => CliError::Limits(msg),
            _ => CliError::Invalid(msg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamEcho {
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<usize>,
    pub alpha: f64,
    pub budget: Option<u64>,
    pub coreset_constant: f64,
    pub max_width: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relations: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub mode: Mode,
    pub seed: u64,
    pub n: u64,
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<String>>,
    pub passes: u64,
    pub peak_stored_points: usize,
    pub candidates_evaluated: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_truncated: Option<bool>,
    pub wall_time_ms: u64,
    pub params: ParamEcho,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn strings(rows: &[BitRow]) -> Vec<String> {
    rows.iter().map(ToString::to_string).collect()
}

fn max_width_from_env() -> Result<usize, CliError> {
    match std::env::var(MAX_D_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| CliError::Invalid(format!("{MAX_D_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_MAX_WIDTH),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Parses `--field` given the requested rank.
pub fn parse_field(spec: &str, r: usize) -> Result<InnerProduct, CliError> {
    match spec {
        "gf2" => Ok(InnerProduct::gf2(r)),
        "boolean" => Ok(InnerProduct::boolean(r)),
        other => {
            let path = other
                .strip_prefix("table:")
                .ok_or_else(|| CliError::Invalid(format!("unknown field {other:?}")))?;
            let f = InnerProduct::parse_table(&read_text(Path::new(path))?)?;
            if f.rank() != r {
                return Err(CliError::Invalid(format!("table has rank {}, --r is {r}", f.rank())));
            }
            Ok(f)
        }
    }
}

fn load_relations(config: &RunConfig, d: usize) -> Result<Option<RelationSet>, CliError> {
    let Some(path) = &config.relations else {
        return Ok(None);
    };
    let rel = parse_relations(&read_text(path)?)?;
    if rel.d() != d {
        return Err(CliError::Invalid(format!(
            "relations cover {} coordinates, input has width {d}",
            rel.d()
        )));
    }
    if let Some(k) = config.k {
        if k != rel.k() {
            return Err(CliError::Invalid(format!(
                "--k {k} disagrees with relations k = {}",
                rel.k()
            )));
        }
    }
    Ok(Some(rel))
}

fn require_k(config: &RunConfig) -> Result<usize, CliError> {
    match config.k {
        Some(0) => Err(CliError::Invalid("--k must be at least 1".into())),
        Some(k) => Ok(k),
        None => Err(CliError::Invalid(format!("--k is required for mode {:?}", config.mode))),
    }
}

fn require_r(config: &RunConfig) -> Result<usize, CliError> {
    match config.r {
        Some(0) => Err(CliError::Invalid("--r must be at least 1".into())),
        Some(r) => Ok(r),
        None => Err(CliError::Invalid(format!("--r is required for mode {:?}", config.mode))),
    }
}

fn ptas_params(config: &RunConfig, k: usize) -> Result<blr_core::PtasParams, CliError> {
    let mut p = default_params(k, config.epsilon, config.alpha)?;
    if let Some(t) = config.tau {
        p.tau = t;
    }
    if let Some(e) = config.eta {
        p.eta = e;
    }
    if let Some(z) = config.zeta {
        p.zeta = z;
    }
    p.candidate_budget = config.budget;
    p.validate()?;
    Ok(p)
}

/// Runs one configuration. The report's `wall_time_ms` is the only field
/// that varies between runs with the same input, config and seed.
pub fn run(config: &RunConfig) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let max_width = max_width_from_env()?;
    if !(config.epsilon > 0.0 && config.epsilon <= 0.5) {
        return Err(CliError::Invalid(format!(
            "epsilon must lie in (0, 1/2], got {}",
            config.epsilon
        )));
    }
    let coreset = CoresetConfig {
        coreset_constant: config.coreset_constant,
        ..CoresetConfig::default()
    };
    let mut stream = PointStream::open(&config.input, StreamConfig { max_width })?;
    let d = stream.width();
    let relations = load_relations(config, d)?;

    let mut params = ParamEcho {
        epsilon: config.epsilon,
        tau: None,
        eta: None,
        zeta: None,
        alpha: config.alpha,
        budget: config.budget,
        coreset_constant: config.coreset_constant,
        max_width,
        relations: config.relations.as_ref().map(|p| p.display().to_string()),
    };
    let mut report = RunReport {
        schema: SCHEMA_VERSION,
        mode: config.mode,
        seed: config.seed,
        n: 0,
        d,
        k: None,
        field: None,
        r: None,
        cost: None,
        error: None,
        centers: None,
        u: None,
        v: None,
        passes: 0,
        peak_stored_points: 0,
        candidates_evaluated: 0,
        budget_truncated: None,
        wall_time_ms: 0,
        params: params.clone(),
    };

    match config.mode {
        Mode::Solve => {
            let rel = match relations {
                Some(rel) => rel,
                None => RelationSet::unconstrained(require_k(config)?, d)?,
            };
            let p = ptas_params(config, rel.k())?;
            (params.tau, params.eta, params.zeta) = (Some(p.tau), Some(p.eta), Some(p.zeta));
            let sol = constrained_kmeans(&mut stream, &rel, &p, coreset, config.seed)?;
            report.k = Some(rel.k());
            report.cost = Some(sol.cost);
            report.centers = Some(strings(sol.centers.centers()));
            report.peak_stored_points = sol.peak_stored;
            report.candidates_evaluated = sol.diagnostics.candidates_after_dedup;
            report.budget_truncated = Some(sol.diagnostics.budget_truncated);
        }
        Mode::Lowrank => {
            let r = require_r(config)?;
            if relations.is_some() {
                return Err(CliError::Invalid("--relations does not apply to lowrank".into()));
            }
            let f = parse_field(&config.field, r)?;
            let p = ptas_params(config, 1 << r.min(DEFAULT_MAX_RANK))?;
            (params.tau, params.eta, params.zeta) = (Some(p.tau), Some(p.eta), Some(p.zeta));
            let sol = lowrank_approx(&mut stream, &f, &p, coreset, config.seed, DEFAULT_MAX_RANK)?;
            report.k = Some(1 << r);
            report.field = Some(f.name().to_string());
            report.r = Some(r);
            report.error = Some(sol.factorization.error);
            report.u = Some(strings(&sol.factorization.factors.u));
            report.v = Some(strings(&sol.factorization.factors.v));
            report.peak_stored_points = sol.peak_stored;
            report.candidates_evaluated = sol.diagnostics.candidates_after_dedup;
            report.budget_truncated = Some(sol.diagnostics.budget_truncated);
        }
        Mode::Baseline => {
            let k = require_k(config)?;
            let mut rng = blr_core::SeededRng::new(config.seed, 1);
            let sol = baseline_binary_kmeans(&mut stream, k, coreset, &mut rng)?;
            let cost = blr_core::cost_phi(&sol.centers, &mut stream)?;
            report.k = Some(k);
            report.cost = Some(cost);
            report.centers = Some(strings(sol.centers.centers()));
            report.peak_stored_points = sol.peak_stored;
        }
        Mode::Oracle => {
            let rows = stream.collect_rows()?;
            report.peak_stored_points = rows.len();
            let limits = OracleLimits::default();
            if let Some(r) = config.r {
                if r == 0 {
                    return Err(CliError::Invalid("--r must be at least 1".into()));
                }
                let f = parse_field(&config.field, r)?;
                let fac = exact_lowrank(&rows, &f, &limits)?;
                report.field = Some(f.name().to_string());
                report.r = Some(r);
                report.error = Some(fac.error);
                report.u = Some(strings(&fac.factors.u));
                report.v = Some(strings(&fac.factors.v));
            } else {
                let sol = match &relations {
                    Some(rel) => exact_constrained_kmeans(&rows, rel, &limits)?,
                    None => exact_binary_kmeans(&rows, require_k(config)?, &limits)?,
                };
                report.k = Some(sol.centers.k());
                report.cost = Some(sol.cost);
                report.centers = Some(strings(sol.centers.centers()));
            }
        }
    }

    report.n = stream.len().unwrap_or(0);
    report.passes = stream.pass_count();
    report.params = params;
    report.wall_time_ms = started.elapsed().as_millis() as u64;
    Ok(report)
}

/// Writes `text` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(text.as_bytes()).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// Runs and emits the report; the returned value is the process exit code.
pub fn main_with(config: &RunConfig) -> i32 {
    let result = run(config).and_then(|report| {
        let json = report.to_json();
        match &config.out {
            Some(path) => write_atomic(path, &json),
            None => {
                print!("{json}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("blr: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

/// Centers of a report, parsed back.
pub fn report_centers(report: &RunReport) -> Option<CenterSet> {
    let rows = report
        .centers
        .as_ref()?
        .iter()
        .map(|s| s.parse().ok())
        .collect::<Option<Vec<BitRow>>>()?;
    CenterSet::new(rows).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let cases = [
            (
                blr_core::Error::Parse {
                    line: 3,
                    message: "bad".into(),
                },
                2,
            ),
            (blr_core::Error::EmptyRelation { coordinate: 2 }, 3),
            (blr_core::Error::EpsilonOutOfRange(0.9), 4),
            (blr_core::Error::LimitsExceeded("n".into()), 5),
        ];
        for (e, code) in cases {
            assert_eq!(CliError::from(e).exit_code(), code);
        }
    }

    #[test]
    fn field_names() {
        assert_eq!(parse_field("gf2", 2).unwrap(), InnerProduct::gf2(2));
        assert_eq!(parse_field("boolean", 1).unwrap(), InnerProduct::boolean(1));
        assert_eq!(parse_field("xor", 1).unwrap_err().exit_code(), 4);
        assert_eq!(parse_field("table:/nonexistent/t.txt", 1).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
