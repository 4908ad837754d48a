//! Command-line front end: JSON configs in, CSV and JSON reports out.
//!
//! Exit codes: 0 on success, 1 on any error, 2 when a fitted exponent or
//! family trend falls outside its acceptance band.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use num_bigint::BigInt;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bergman::{
    bell_pullback_check, project_weighted_indicator, CounterexampleSpec, EngineError,
    DEFAULT_TRUNCATION,
};
use crate::estimator::{
    blowup_experiment, dyadic_family, dyadic_grid, polydisc_inequality_suite,
    restricted_ratio_suite, volume_scan, EstimatorError, FamilyMember, SuiteMode, SuiteReport,
};
use crate::exact::{rational_to_f64, ExactInt, ExactRational};
use crate::exponent::ExponentVector;
use crate::lattice::{analyze_domain, DomainAnalysis, IntegerMatrix, LatticeError};
use crate::measure::{MeasureError, ReinhardtAngularSet};
use crate::report::{fmt_f64, CsvTable};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "BERGMAN_LAB_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Exact invariants of a monomial polyhedron.
    Analyze,
    /// Sublevel volumes of ρ_α and their asymptotic exponents.
    Volume,
    /// Truncated Bergman projections as coefficient tables.
    Project,
    /// Inequality suites over families of sets.
    Verify,
    /// Growth of the weak-type ratio for the counterexample family.
    Blowup,
}

#[derive(Debug, Parser)]
#[command(name = "bergman-lab", version, about = "Bergman projection experiments on monomial polyhedra")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to the config's "output", then $BERGMAN_LAB_OUT, then ".".
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config's sample count.
    #[arg(long)]
    pub samples: Option<u64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    OutOfBand(String),
}

/// A matrix given inline or by preset name: `"hartogs"`,
/// `"hartogs-generalized(a,b)"` or `"example-3d"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    Preset(String),
    Matrix(Vec<Vec<ExactInt>>),
}

impl DomainSpec {
    pub fn matrix(&self) -> Result<IntegerMatrix, CliError> {
        match self {
            DomainSpec::Matrix(rows) => Ok(IntegerMatrix::new(
                rows.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect(),
            )?),
            DomainSpec::Preset(name) => preset(name),
        }
    }

    pub fn analyze(&self) -> Result<DomainAnalysis, CliError> {
        Ok(analyze_domain(&self.matrix()?)?)
    }
}

/// Built-in matrices by name.
pub fn preset(name: &str) -> Result<IntegerMatrix, CliError> {
    let name = name.trim();
    let rows: Vec<Vec<BigInt>> = match name {
        "hartogs" => int_rows(&[&[1, -1], &[0, 1]]),
        "example-3d" => int_rows(&[&[1, 0, 0], &[-1, 1, 0], &[1, -1, 1]]),
        _ => {
            let inner = name
                .strip_prefix("hartogs-generalized(")
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| {
                    CliError::Config(format!(
                        "unknown preset {name:?}; expected \"hartogs\", \"hartogs-generalized(a,b)\" or \"example-3d\""
                    ))
                })?;
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            let parse = |s: &str| {
                s.parse::<BigInt>()
                    .map_err(|_| CliError::Config(format!("invalid integer {s:?} in preset {name:?}")))
            };
            match parts.as_slice() {
                [a, b] => vec![
                    vec![parse(a)?, -parse(b)?],
                    vec![BigInt::from(0), BigInt::from(1)],
                ],
                _ => {
                    return Err(CliError::Config(format!(
                        "preset {name:?} needs two arguments"
                    )))
                }
            }
        }
    };
    Ok(IntegerMatrix::new(rows)?)
}

fn int_rows(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

fn exponent(v: &[ExactRational]) -> ExponentVector {
    ExponentVector::new(v.iter().map(|q| q.0.clone()).collect())
}

/// A dyadic range `2^{-from} … 2^{-to}` or explicit exact points.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Dyadic { from: u32, to: u32 },
    Points(Vec<ExactRational>),
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GridSpec::Dyadic { from, to } => dyadic_grid(*from, *to),
            GridSpec::Points(p) => p.iter().map(|q| rational_to_f64(&q.0)).collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalyzeConfig {
    #[serde(alias = "B")]
    domain: DomainSpec,
    output: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VolumeConfig {
    alpha: Vec<ExactRational>,
    grid: GridSpec,
    output: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ProjectConfig {
    /// `P(ρ_α·1_F)`.
    Weighted {
        alpha: Vec<ExactRational>,
        set: ReinhardtAngularSet,
        truncation: u32,
        output: Option<PathBuf>,
    },
    /// The counterexample series `h_s`.
    Counterexample {
        #[serde(alias = "B")]
        domain: DomainSpec,
        b: Vec<ExactRational>,
        s: ExactRational,
        truncation: Option<u32>,
        output: Option<PathBuf>,
    },
    /// Both sides of the pullback identity at each point.
    Bell {
        #[serde(alias = "B")]
        domain: DomainSpec,
        set: ReinhardtAngularSet,
        points: Vec<Vec<[f64; 2]>>,
        truncation: u32,
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetEntry {
    label: Option<String>,
    k: Option<f64>,
    set: ReinhardtAngularSet,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyConfig {
    #[serde(default = "default_mode")]
    mode: SuiteMode,
    #[serde(alias = "B")]
    domain: Option<DomainSpec>,
    alpha: Option<Vec<ExactRational>>,
    p: Option<ExactRational>,
    #[serde(default)]
    sets: Vec<SetEntry>,
    /// Dyadic sublevel family `k = from..=to` of `w` (restricted) or `ρ_α`.
    family: Option<FamilyRange>,
    #[serde(default = "default_suite_samples")]
    samples: u64,
    #[serde(default)]
    seed: u64,
    output: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyRange {
    from: u32,
    to: u32,
}

fn default_mode() -> SuiteMode {
    SuiteMode::Restricted
}

fn default_suite_samples() -> u64 {
    40_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlowupConfig {
    #[serde(alias = "B")]
    domain: DomainSpec,
    b: Vec<ExactRational>,
    #[serde(default = "default_blowup_grid")]
    grid: GridSpec,
    #[serde(default = "default_truncation")]
    truncation: u32,
    #[serde(default = "default_blowup_samples")]
    samples: u64,
    #[serde(default)]
    seed: u64,
    output: Option<PathBuf>,
}

fn default_blowup_grid() -> GridSpec {
    GridSpec::Dyadic { from: 4, to: 16 }
}

fn default_truncation() -> u32 {
    DEFAULT_TRUNCATION
}

fn default_blowup_samples() -> u64 {
    1_000_000
}

/// Reads a JSON config, reporting the field path, line and column of any error.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.inner();
        CliError::Config(format!(
            "{}: invalid config at `{}` (line {}, column {}): {}",
            path.display(),
            field,
            inner.line(),
            inner.column(),
            inner
        ))
    })?;
    de.end().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(value)
}

fn out_dir(cli: &Cli, from_config: Option<&PathBuf>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| from_config.cloned())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn write_csv(dir: &Path, name: &str, table: &CsvTable) -> Result<PathBuf, CliError> {
    let path = write_text(dir, name, &table.to_csv_string())?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    let path = write_text(dir, name, &text)?;
    println!("wrote {}", path.display());
    Ok(path)
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Analyze => cmd_analyze(cli),
        Command::Volume => cmd_volume(cli),
        Command::Project => cmd_project(cli),
        Command::Verify => cmd_verify(cli),
        Command::Blowup => cmd_blowup(cli),
    }
}

fn cmd_analyze(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg: AnalyzeConfig = load_config(&cli.config)?;
    let analysis = cfg.domain.analyze()?;
    let summary = analysis.summary();
    #[derive(Serialize)]
    struct Report<'a> {
        summary: &'a str,
        analysis: &'a DomainAnalysis,
    }
    write_json(
        &out_dir(cli, cfg.output.as_ref()),
        "analysis.json",
        &Report {
            summary: &summary,
            analysis: &analysis,
        },
    )?;
    println!("{summary}");
    Ok(Outcome::Pass)
}

fn cmd_volume(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg: VolumeConfig = load_config(&cli.config)?;
    let scan = volume_scan(&exponent(&cfg.alpha), &cfg.grid.points())?;
    write_csv(&out_dir(cli, cfg.output.as_ref()), "volume.csv", &scan.to_csv())?;
    println!(
        "s-exponent {} (expected {}), log-exponent {} (expected {})",
        fmt_f64(scan.s_exponent),
        fmt_f64(scan.expected_s_exponent),
        fmt_f64(scan.log_exponent),
        fmt_f64(scan.expected_log_exponent)
    );
    Ok(if scan.within_band() {
        Outcome::Pass
    } else {
        Outcome::OutOfBand("fitted volume exponents are outside the expected band".into())
    })
}

fn cmd_project(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg: ProjectConfig = load_config(&cli.config)?;
    match cfg {
        ProjectConfig::Weighted {
            alpha,
            set,
            truncation,
            output,
        } => {
            let series = project_weighted_indicator(&exponent(&alpha), &set, truncation)?;
            let dir = out_dir(cli, output.as_ref());
            write_csv(&dir, "coefficients.csv", &series.to_csv())?;
            write_json(&dir, "series.json", &series)?;
        }
        ProjectConfig::Counterexample {
            domain,
            b,
            s,
            truncation,
            output,
        } => {
            let analysis = domain.analyze()?;
            let spec = CounterexampleSpec::new(&analysis, &exponent(&b))?;
            let series = spec.series(rational_to_f64(&s.0), truncation.unwrap_or(DEFAULT_TRUNCATION))?;
            let dir = out_dir(cli, output.as_ref());
            write_csv(&dir, "coefficients.csv", &series.to_csv())?;
            write_json(&dir, "series.json", &series)?;
        }
        ProjectConfig::Bell {
            domain,
            set,
            points,
            truncation,
            output,
        } => {
            let analysis = domain.analyze()?;
            let mut t = CsvTable::new(
                "point: index; lhs, rhs: both sides of the pullback identity (re, im); abs_diff: |lhs - rhs|",
                &["point", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_diff"],
            );
            for (i, p) in points.iter().enumerate() {
                let z: Vec<Complex64> = p.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                let chk = bell_pullback_check(&analysis, &set, &z, truncation)?;
                t.push(vec![
                    i.to_string(),
                    fmt_f64(chk.lhs.re),
                    fmt_f64(chk.lhs.im),
                    fmt_f64(chk.rhs.re),
                    fmt_f64(chk.rhs.im),
                    fmt_f64((chk.lhs - chk.rhs).norm()),
                ]);
            }
            write_csv(&out_dir(cli, output.as_ref()), "bell.csv", &t)?;
        }
    }
    Ok(Outcome::Pass)
}

/// Subcritical ratios are allowed to decay; every other mode must be flat.
pub fn suite_within_band(report: &SuiteReport) -> bool {
    match (&report.fit, report.mode) {
        (None, _) => true,
        (Some(f), SuiteMode::Subcritical) => f.slope <= 0.1,
        (Some(f), _) => f.is_bounded(),
    }
}

fn cmd_verify(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg: VerifyConfig = load_config(&cli.config)?;
    let samples = cli.samples.unwrap_or(cfg.samples);
    let seed = cli.seed.unwrap_or(cfg.seed);
    let mut members: Vec<FamilyMember> = cfg
        .sets
        .into_iter()
        .enumerate()
        .map(|(i, e)| FamilyMember {
            label: e.label.unwrap_or_else(|| format!("set{i}")),
            k: e.k.unwrap_or(i as f64),
            set: e.set,
        })
        .collect();
    let report = if cfg.mode == SuiteMode::Restricted {
        let domain = cfg
            .domain
            .ok_or_else(|| CliError::Config("the restricted mode needs \"domain\"".into()))?;
        let analysis = domain.analyze()?;
        if let Some(f) = &cfg.family {
            let ks: Vec<u32> = (f.from..=f.to).collect();
            members.extend(dyadic_family(&analysis.weight_exponent, &ks));
        }
        restricted_ratio_suite(&analysis, &members, samples, seed)?
    } else {
        let alpha = exponent(
            cfg.alpha
                .as_deref()
                .ok_or_else(|| CliError::Config(format!("mode {:?} needs \"alpha\"", cfg.mode)))?,
        );
        if let Some(f) = &cfg.family {
            let ks: Vec<u32> = (f.from..=f.to).collect();
            members.extend(dyadic_family(&alpha, &ks));
        }
        let p = cfg.p.as_ref().map(|q| rational_to_f64(&q.0));
        polydisc_inequality_suite(&alpha, &members, cfg.mode, p, samples, seed)?
    };
    write_csv(&out_dir(cli, cfg.output.as_ref()), "verify.csv", &report.to_csv())?;
    if let Some(f) = &report.fit {
        println!(
            "trend slope {}, median ratio {}, max ratio {}",
            fmt_f64(f.slope),
            fmt_f64(f.median_ratio),
            fmt_f64(f.max_ratio)
        );
    }
    Ok(if suite_within_band(&report) {
        Outcome::Pass
    } else {
        Outcome::OutOfBand("family ratios show a trend or exceed 3x the median".into())
    })
}

fn cmd_blowup(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg: BlowupConfig = load_config(&cli.config)?;
    let analysis = cfg.domain.analyze()?;
    let report = blowup_experiment(
        &analysis,
        &exponent(&cfg.b),
        &cfg.grid.points(),
        cfg.truncation,
        cli.samples.unwrap_or(cfg.samples),
        cli.seed.unwrap_or(cfg.seed),
    )?;
    write_csv(&out_dir(cli, cfg.output.as_ref()), "blowup.csv", &report.to_csv())?;
    println!(
        "slope {} (predicted {}), growth {}",
        fmt_f64(report.slope),
        fmt_f64(report.p_star - 1.0),
        fmt_f64(report.growth)
    );
    Ok(if report.within_band() {
        Outcome::Pass
    } else {
        Outcome::OutOfBand("fitted blow-up slope is outside p* - 1 ± 0.15".into())
    })
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::OutOfBand(msg)) => {
            eprintln!("out of band: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let a = DomainSpec::Preset("hartogs-generalized(2, 1)".into()).analyze().unwrap();
        assert_eq!(a.summary(), "p* = 3/2, q* = 3, m = 1");
        assert_eq!(
            preset("example-3d").unwrap(),
            IntegerMatrix::from_i64(&[vec![1, 0, 0], vec![-1, 1, 0], vec![1, -1, 1]]).unwrap()
        );
        assert!(matches!(preset("disc"), Err(CliError::Config(_))));
    }

    #[test]
    fn config_errors_name_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, "{\n  \"alpha\": [1, 0.5],\n  \"grid\": {\"from\": 8, \"to\": 20}\n}").unwrap();
        let err = load_config::<VolumeConfig>(&path).unwrap_err().to_string();
        assert!(err.contains("alpha[1]") && err.contains("line 2"), "{err}");
    }
}
