//! The `salem` command line: each subcommand reads an optional JSON config,
//! applies flag overrides (flags win), and writes JSON/CSV artifacts.
//!
//! Exit codes: 0 clean, 1 some verdict is `violated`, 2 usage or config error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    badness, borel_cantelli_scan, non_salem_witness, reports_to_csv, run_battery, tail_bound_t,
    verify_parseval, BatteryConfig, BoundReport, ScanMode, TailBound, Verdict,
};
use crate::error::{invalid, Error, Result};
use crate::fourier::{decay_profile, transform, FourierTable, Spectrum, SyntheticSpectrum, DEFAULT_SHELL_BASE};
use crate::lattice::LinearFormSpec;
use crate::measure::{
    approximant_measure, random_measure, ApproximantSpec, AtomicMeasure, BumpProfile, GridMeasure,
    Measure, ProfileKind, RandomProfile,
};

#[derive(Debug, Parser)]
#[command(name = "salem", version, about = "Fourier-decay and counting-bound experiments on the torus")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Promote coverage warnings to errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Upper-bound budget factor.
    #[arg(long, global = true)]
    pub budget: Option<f64>,
    /// Table box radius.
    #[arg(long = "box", global = true)]
    pub box_radius: Option<usize>,
    /// Grid resolution.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Fourier table and decay profile of a measure.
    Transform,
    /// Theorem 3/5 inequality battery.
    Verify,
    /// Both sides of the Parseval identity for a mollified slab density.
    Parseval,
    /// Partial sums of the Borel-Cantelli series.
    BorelCantelli,
    /// Badness scores `min q^{1/n} ||q x||`.
    Badness,
    /// Decay exponents of approximant measures against the dimension ceiling.
    Witness,
}

/// How a run ended when it did not fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Clean,
    Violations,
}

impl Status {
    fn from_reports<'a>(reports: impl IntoIterator<Item = &'a BoundReport>) -> Self {
        if reports.into_iter().any(|r| r.verdict == Verdict::Violated) {
            Status::Violations
        } else {
            Status::Clean
        }
    }

    pub fn code(&self) -> i32 {
        match self {
            Status::Clean => 0,
            Status::Violations => 1,
        }
    }
}

/// Measures the CLI can build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureSpec {
    Uniform { dim: usize, resolution: usize },
    PointMass { point: Vec<f64> },
    Random {
        dim: usize,
        resolution: usize,
        seed: u64,
        profile: RandomProfile,
    },
    Approximant(ApproximantSpec),
    /// A measure document on disk.
    File { path: PathBuf },
}

impl MeasureSpec {
    fn apply(&mut self, g: &GlobalArgs) {
        match self {
            MeasureSpec::Uniform { resolution, .. } => {
                if let Some(r) = g.grid {
                    *resolution = r;
                }
            }
            MeasureSpec::Random { resolution, seed, .. } => {
                if let Some(r) = g.grid {
                    *resolution = r;
                }
                if let Some(s) = g.seed {
                    *seed = s;
                }
            }
            MeasureSpec::Approximant(spec) => {
                if let Some(r) = g.grid {
                    spec.resolution = r;
                }
            }
            MeasureSpec::PointMass { .. } | MeasureSpec::File { .. } => {}
        }
    }

    pub fn build(&self) -> Result<Measure> {
        Ok(match self {
            MeasureSpec::Uniform { dim, resolution } => GridMeasure::uniform(*dim, *resolution)?.into(),
            MeasureSpec::PointMass { point } => AtomicMeasure::point_mass(point)?.into(),
            MeasureSpec::Random {
                dim,
                resolution,
                seed,
                profile,
            } => random_measure(*dim, *resolution, *seed, *profile)?.into(),
            MeasureSpec::Approximant(spec) => approximant_measure(spec)?.measure.into(),
            MeasureSpec::File { path } => Measure::from_json(&read(path)?)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransformConfig {
    pub measure: MeasureSpec,
    pub box_radius: usize,
    pub shell_base: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            measure: MeasureSpec::Random {
                dim: 1,
                resolution: 1024,
                seed: 0,
                profile: RandomProfile::RoughDensity,
            },
            box_radius: 256,
            shell_base: DEFAULT_SHELL_BASE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRequest {
    pub k: f64,
    pub order: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParsevalConfig {
    pub measure: MeasureSpec,
    pub q: Vec<i64>,
    pub delta: f64,
    pub folds: usize,
    pub profile: ProfileKind,
    pub trunc: Option<usize>,
    pub tail: Option<TailRequest>,
}

impl Default for ParsevalConfig {
    fn default() -> Self {
        Self {
            measure: MeasureSpec::Random {
                dim: 2,
                resolution: 64,
                seed: 0,
                profile: RandomProfile::SmoothDensity,
            },
            q: vec![2, 1],
            delta: 0.1,
            folds: 1,
            profile: ProfileKind::BAND_LIMITED,
            trunc: None,
            tail: None,
        }
    }
}

/// Where the series reads `hat mu` from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum SpectrumSource {
    Synthetic { spectrum: SyntheticSpectrum },
    /// A Fourier table JSON written by `transform`.
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeriesConfig {
    pub spectrum: SpectrumSource,
    pub tau_prime: f64,
    pub q_max: u64,
    pub mode: ScanMode,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            spectrum: SpectrumSource::Synthetic {
                spectrum: SyntheticSpectrum::Lebesgue { dim: 1 },
            },
            tau_prime: 2.0,
            q_max: 10_000,
            mode: ScanMode::Lattice { n: 1 },
        }
    }
}

/// Random points to score besides the listed ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointGenerator {
    pub count: usize,
    pub dim: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BadnessConfig {
    pub points: Vec<Vec<f64>>,
    pub generator: Option<PointGenerator>,
    pub q_max: Vec<u64>,
}

impl Default for BadnessConfig {
    fn default() -> Self {
        Self {
            points: vec![vec![(5f64.sqrt() - 1.0) / 2.0], vec![2f64.sqrt() - 1.0]],
            generator: None,
            q_max: vec![100_000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WitnessConfig {
    pub approximants: Vec<ApproximantSpec>,
    pub box_radius: usize,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        let q_set: Vec<Vec<i64>> = (3..=12).map(|q| vec![q]).collect();
        Self {
            approximants: vec![ApproximantSpec::new(1.0, 1, 2, q_set, 576).with_depth(2)],
            box_radius: 64,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load<T: DeserializeOwned + Default>(g: &GlobalArgs) -> Result<T> {
    match &g.config {
        Some(p) => Ok(serde_json::from_str(&read(p)?)?),
        None => Ok(T::default()),
    }
}

fn write(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write(dir, name, s.as_bytes())
}

fn write_reports_csv(dir: &Path, name: &str, reports: &[BoundReport]) -> Result<()> {
    let mut buf = Vec::new();
    reports_to_csv(reports, &mut buf)?;
    write(dir, name, &buf)
}

fn write_reports(dir: &Path, stem: &str, reports: &[BoundReport]) -> Result<()> {
    write_json(dir, &format!("{stem}.json"), &reports)?;
    write_reports_csv(dir, &format!("{stem}.csv"), reports)
}

fn cmd_transform(g: &GlobalArgs) -> Result<Status> {
    let mut cfg: TransformConfig = load(g)?;
    cfg.measure.apply(g);
    if let Some(b) = g.box_radius {
        cfg.box_radius = b;
    }
    let mu = cfg.measure.build()?;
    let table = transform(&mu, cfg.box_radius)?;
    write(&g.out, "table.json", table.to_json()?.as_bytes())?;
    let decay = decay_profile(&table, cfg.shell_base)?;
    write(&g.out, "decay.csv", decay.to_csv_string()?.as_bytes())?;
    write_json(&g.out, "decay.json", &decay)?;
    Ok(Status::Clean)
}

fn cmd_verify(g: &GlobalArgs) -> Result<Status> {
    let mut cfg: BatteryConfig = load(g)?;
    if let Some(s) = g.seed {
        cfg.seeds = vec![s];
    }
    if let Some(b) = g.budget {
        cfg.budget.upper = b;
    }
    if g.box_radius.is_some() {
        cfg.box_radius = g.box_radius;
    }
    if g.grid.is_some() {
        cfg.grid = g.grid;
    }
    cfg.strict |= g.strict;
    let outcome = run_battery(&cfg)?;
    write_reports(&g.out, "reports", &outcome.reports)?;
    write_json(
        &g.out,
        "summary.json",
        &serde_json::json!({
            "reports": outcome.reports.len(),
            "violations": outcome.violations,
            "skipped": outcome.skipped,
            "worst_ratio": outcome.worst_ratio,
        }),
    )?;
    Ok(Status::from_reports(&outcome.reports))
}

#[derive(Serialize)]
struct ParsevalOutput<'a> {
    report: &'a BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail: Option<TailBound>,
}

fn cmd_parseval(g: &GlobalArgs) -> Result<Status> {
    let mut cfg: ParsevalConfig = load(g)?;
    cfg.measure.apply(g);
    if g.box_radius.is_some() {
        cfg.trunc = g.box_radius;
    }
    let mu = cfg.measure.build()?;
    let spec = LinearFormSpec::new(cfg.q.clone(), cfg.delta, cfg.folds)?;
    let profile = BumpProfile::new(cfg.profile, spec.delta_star(), spec.d())?;
    let report = verify_parseval(&mu, &spec, &profile, cfg.trunc)?;
    let tail = cfg
        .tail
        .map(|t| tail_bound_t(&profile, &spec, t.k, t.order))
        .transpose()?;
    write_json(&g.out, "parseval.json", &ParsevalOutput { report: &report, tail })?;
    write_reports_csv(&g.out, "parseval.csv", std::slice::from_ref(&report))?;
    let tail_ok = tail.is_none_or(|t| t.holds());
    Ok(if tail_ok {
        Status::from_reports([&report])
    } else {
        Status::Violations
    })
}

fn cmd_borel_cantelli(g: &GlobalArgs) -> Result<Status> {
    let cfg: SeriesConfig = load(g)?;
    let table;
    let spectrum: &dyn Spectrum = match &cfg.spectrum {
        SpectrumSource::Synthetic { spectrum } => spectrum,
        SpectrumSource::Table { path } => {
            table = FourierTable::from_json(&read(path)?)?;
            &table
        }
    };
    let report = borel_cantelli_scan(spectrum, cfg.tau_prime, cfg.q_max, cfg.mode)?;
    if g.strict {
        if let Some(w) = report.coverage_warnings.first() {
            return Err(Error::InvariantViolated(w.clone()));
        }
    }
    write_json(&g.out, "series.json", &report)?;
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["q_max", "partial_sum"])?;
    for (q, v) in &report.partial_sums {
        wr.write_record([q.to_string(), v.to_string()])?;
    }
    let buf = wr.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    write(&g.out, "series.csv", &buf)?;
    Ok(Status::Clean)
}

fn cmd_badness(g: &GlobalArgs) -> Result<Status> {
    let mut cfg: BadnessConfig = load(g)?;
    if let (Some(s), Some(gen)) = (g.seed, cfg.generator.as_mut()) {
        gen.seed = s;
    }
    let mut points = cfg.points.clone();
    if let Some(gen) = cfg.generator {
        let mut rng = ChaCha8Rng::seed_from_u64(gen.seed);
        for _ in 0..gen.count {
            points.push((0..gen.dim).map(|_| rng.random::<f64>()).collect());
        }
    }
    if cfg.q_max.is_empty() {
        return Err(invalid("q_max", "list is empty"));
    }
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["x", "q_max", "score"])?;
    for x in &points {
        let label = serde_json::to_string(x)?;
        for &q in &cfg.q_max {
            wr.write_record([label.clone(), q.to_string(), badness(x, q)?.to_string()])?;
        }
    }
    let buf = wr.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    write(&g.out, "badness.csv", &buf)?;
    Ok(Status::Clean)
}

fn cmd_witness(g: &GlobalArgs) -> Result<Status> {
    let mut cfg: WitnessConfig = load(g)?;
    if let Some(b) = g.box_radius {
        cfg.box_radius = b;
    }
    if cfg.approximants.is_empty() {
        return Err(Error::EmptyInput("approximants"));
    }
    let mut reports = Vec::new();
    for (i, spec) in cfg.approximants.iter_mut().enumerate() {
        if let Some(r) = g.grid {
            spec.resolution = r;
        }
        let approx = approximant_measure(spec)?;
        let mu: Measure = approx.measure.into();
        let table = transform(&mu, cfg.box_radius)?;
        let report = non_salem_witness(spec.tau, spec.d, spec.n, &mu, &table)?
            .param("config", i)
            .param("resolution", spec.resolution)
            .param("tower_depth", spec.tower_depth)
            .param("covered_fraction", approx.covered_fraction);
        reports.push(report);
    }
    write_reports(&g.out, "witness", &reports)?;
    Ok(Status::from_reports(&reports))
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Status> {
    let g = &cli.global;
    match cli.command {
        Command::Transform => cmd_transform(g),
        Command::Verify => cmd_verify(g),
        Command::Parseval => cmd_parseval(g),
        Command::BorelCantelli => cmd_borel_cantelli(g),
        Command::Badness => cmd_badness(g),
        Command::Witness => cmd_witness(g),
    }
}

/// Parses `args` and runs, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_in(dir: &Path, args: &[&str]) -> i32 {
        let mut full = vec!["salem".to_string()];
        full.extend(args.iter().map(|s| s.to_string()));
        full.push("--out".into());
        full.push(dir.display().to_string());
        main_with_args(full)
    }

    fn config(dir: &Path, name: &str, value: serde_json::Value) -> String {
        let p = dir.join(name);
        fs::write(&p, value.to_string()).unwrap();
        p.display().to_string()
    }

    #[test]
    fn transform_uniform_and_point_mass() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            dir.path(),
            "u.json",
            serde_json::json!({"measure": {"kind": "uniform", "dim": 1, "resolution": 64}, "box_radius": 32}),
        );
        assert_eq!(run_in(dir.path(), &["transform", "--config", &cfg]), 0);
        let table = FourierTable::from_json(&fs::read_to_string(dir.path().join("table.json")).unwrap()).unwrap();
        table.for_each(|xi, c| {
            let expected = if xi[0] == 0 { 1.0 } else { 0.0 };
            assert!((c.norm() - expected).abs() < 1e-12);
        });

        let cfg = config(
            dir.path(),
            "p.json",
            serde_json::json!({"measure": {"kind": "point-mass", "point": [0.25, 0.5]}, "box_radius": 8}),
        );
        assert_eq!(run_in(dir.path(), &["transform", "--config", &cfg]), 0);
        let table = FourierTable::from_json(&fs::read_to_string(dir.path().join("table.json")).unwrap()).unwrap();
        table.for_each(|_, c| assert!((c.norm() - 1.0).abs() < 1e-12));
        let csv = fs::read_to_string(dir.path().join("decay.csv")).unwrap();
        assert!(csv.starts_with("radius,peak\n"));
    }

    #[test]
    fn seeded_transform_is_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for d in [&a, &b] {
            assert_eq!(run_in(d.path(), &["transform", "--seed", "7", "--grid", "256", "--box", "64"]), 0);
        }
        for f in ["table.json", "decay.csv", "decay.json"] {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
        }
    }

    fn small_battery(dir: &Path) -> String {
        config(
            dir,
            "battery.json",
            serde_json::json!({
                "seeds": [0], "deltas": [0.2, 0.1], "moduli": [2, 3],
                "lattice_resolution": [256, 128], "linear_resolution": [32, 8],
                "q_sup": 3, "q_per_measure": 1, "parseval": false
            }),
        )
    }

    #[test]
    fn verify_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_battery(dir.path());
        assert_eq!(run_in(dir.path(), &["verify", "--config", &cfg]), 0);
        let csv = fs::read_to_string(dir.path().join("reports.csv")).unwrap();
        assert!(csv.starts_with("name,params,lhs,rhs_main,tail,ratio,verdict\n"));
        let reports: Vec<BoundReport> =
            serde_json::from_str(&fs::read_to_string(dir.path().join("reports.json")).unwrap()).unwrap();
        assert!(reports.iter().all(|r| r.verdict == Verdict::Consistent));

        assert_eq!(run_in(dir.path(), &["verify", "--config", &cfg, "--budget", "0.01"]), 1);
        let csv = fs::read_to_string(dir.path().join("reports.csv")).unwrap();
        assert!(csv.contains("violated"));
    }

    #[test]
    fn strict_names_missing_frequency() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_battery(dir.path());
        assert_eq!(run_in(dir.path(), &["verify", "--config", &cfg, "--box", "4"]), 0);
        let cli = Cli::try_parse_from(["salem", "verify", "--config", &cfg, "--box", "4", "--strict"]).unwrap();
        let err = run(&cli).unwrap_err();
        assert!(matches!(err, Error::FrequencyOutsideBox { .. }), "{err}");
        assert!(err.to_string().contains('['));
        assert_eq!(run_in(dir.path(), &["verify", "--config", &cfg, "--box", "4", "--strict"]), 2);
    }

    #[test]
    fn usage_errors_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(run_in(dir.path(), &["frobnicate"]), 2);
        let bad = config(dir.path(), "bad.json", serde_json::json!({"q_max": "many"}));
        assert_eq!(run_in(dir.path(), &["badness", "--config", &bad]), 2);
    }

    #[test]
    fn badness_and_series_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            dir.path(),
            "b.json",
            serde_json::json!({"points": [[0.3333333333333333]], "q_max": [2, 3]}),
        );
        assert_eq!(run_in(dir.path(), &["badness", "--config", &cfg]), 0);
        let csv = fs::read_to_string(dir.path().join("badness.csv")).unwrap();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], "x,q_max,score");
        assert!(rows[2].ends_with(",3,0"), "{csv}");

        let cfg = config(
            dir.path(),
            "s.json",
            serde_json::json!({"tau_prime": 2.0, "q_max": 1000}),
        );
        assert_eq!(run_in(dir.path(), &["borel-cantelli", "--config", &cfg]), 0);
        let report: crate::bounds::SeriesReport =
            serde_json::from_str(&fs::read_to_string(dir.path().join("series.json")).unwrap()).unwrap();
        assert_eq!(report.classified, crate::bounds::Classification::Converging);
    }

    #[test]
    fn parseval_command_reports_gap() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            dir.path(),
            "p.json",
            serde_json::json!({
                "measure": {"kind": "random", "dim": 2, "resolution": 32, "seed": 1, "profile": "rough-density"},
                "q": [1, 2], "delta": 0.2, "folds": 1,
                "tail": {"k": 1.5, "order": 3}
            }),
        );
        assert_eq!(run_in(dir.path(), &["parseval", "--config", &cfg]), 0);
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("parseval.json")).unwrap()).unwrap();
        assert!(v["report"]["params"]["rel_gap"].as_f64().unwrap() < 1e-6);
        assert!(v["tail"]["computed"].as_f64().unwrap() <= v["tail"]["envelope"].as_f64().unwrap());
    }
}
