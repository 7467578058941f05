mod config;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use aq_core::aq::quantile_slice_init;
use aq_core::experiments::{compare_lloyd, suite, CompareConfig};
use aq_core::lloyd::LloydConfig;
use aq_core::sensitivity::{analyze, synthetic_benchmark, RankedDataset};
use aq_core::testgen::{generate, random_scenarios, s_g, s_hyb, s_u, MixtureScenario, Scheme};
use aq_core::{fit, AqError, Family, Mixture};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use config::{Common, Settings};
use io::{write_json, write_rows, write_sample, Table};

#[derive(Parser)]
#[command(name = "aq", version, about = "Augmented quantization of samples by mixtures of general distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NamedScenario {
    #[value(name = "s_u")]
    SU,
    #[value(name = "s_g")]
    SG,
    #[value(name = "s_hyb")]
    SHyb,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    MidpointGrid,
    VanDerCorput,
    PseudoRandom,
}

impl From<SchemeArg> for Scheme {
    fn from(value: SchemeArg) -> Self {
        match value {
            SchemeArg::MidpointGrid => Scheme::MidpointGrid,
            SchemeArg::VanDerCorput => Scheme::VanDerCorput,
            SchemeArg::PseudoRandom => Scheme::PseudoRandom,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit a mixture to a CSV sample.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Starting mixture as JSON; quantile slices of the sample by default.
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Paired comparison of AQ and Lloyd's algorithm on random point clouds.
    CompareLloyd {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        starts: usize,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Fit a randomized scenario suite and compare with the true mixtures.
    Suite {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 15)]
        count: usize,
    },
    /// Conditional input distributions of an output regime.
    Sensitivity {
        #[command(flatten)]
        common: Common,
        /// CSV of inputs; the bundled synthetic benchmark is used when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Rows of the synthetic benchmark.
        #[arg(long, default_value_t = 300_000)]
        rows: usize,
        /// 0/1 or true/false column marking the regime rows.
        #[arg(long, conflicts_with = "threshold_column")]
        regime_column: Option<String>,
        /// Column compared with `--threshold`; rows above it form the regime.
        #[arg(long, requires = "threshold")]
        threshold_column: Option<String>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Write generated test samples as CSV.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, conflicts_with = "scenario_file")]
        scenario: Option<NamedScenario>,
        /// Scenario as JSON.
        #[arg(long)]
        scenario_file: Option<PathBuf>,
        /// Number of randomized scenarios of `--family` when no scenario is named.
        #[arg(long, default_value_t = 15)]
        count: usize,
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        /// Overrides the scenario size.
        #[arg(long)]
        n: Option<usize>,
        /// Adds the generating component of every point.
        #[arg(long)]
        labels: bool,
    },
}

/// Failure with its exit code: 2 for configuration, 3 for data, 1 otherwise.
enum Failure {
    Config(anyhow::Error),
    Data(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::Runtime(_) => 1,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Data(e) | Failure::Runtime(e) => e,
        }
    }
}

impl From<AqError> for Failure {
    fn from(e: AqError) -> Self {
        match e {
            AqError::TooFewPoints { .. }
            | AqError::InvalidParameter(_)
            | AqError::InvalidWeights(_)
            | AqError::MergeExplosion { .. }
            | AqError::FamilyMismatch(_) => Failure::Config(e.into()),
            AqError::EmptySample
            | AqError::NonFinite
            | AqError::UnrankedInput(_)
            | AqError::DimensionMismatch { .. } => Failure::Data(e.into()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn config<T>(r: anyhow::Result<T>) -> Outcome<T> {
    r.map_err(|e| match e.downcast::<AqError>() {
        Ok(aq) => Failure::from(aq),
        Err(e) => Failure::Config(e),
    })
}

fn data<T>(r: anyhow::Result<T>) -> Outcome<T> {
    r.map_err(|e| match e.downcast::<AqError>() {
        Ok(aq) => Failure::from(aq),
        Err(e) => Failure::Data(e),
    })
}

fn runtime<T>(r: anyhow::Result<T>) -> Outcome<T> {
    r.map_err(Failure::Runtime)
}

fn prepare_out_dir(dir: &Path) -> Outcome<()> {
    runtime(std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display())))
}

#[derive(Serialize)]
struct TraceRow {
    epoch: usize,
    iteration: usize,
    p_bin: f64,
    quantization_error: f64,
    global_error: f64,
    best_quantization_error: f64,
    distance: f64,
}

fn cmd_fit(common: &Common, input: &Path, init: Option<&Path>) -> Outcome<()> {
    let settings = config(Settings::resolve(common))?;
    let table = data(Table::read(input))?;
    let sample = data(table.sample_without(&[]))?;
    let family = settings.family_or(Family::Uniform);
    let l = settings.l.unwrap_or(2);
    if l > sample.len() {
        return Err(AqError::TooFewPoints { clusters: l, points: sample.len() }.into());
    }
    let aq_config = config(settings.aq_config(l, family))?;
    let initial = match init {
        Some(path) => {
            let text = data(std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())))?;
            config(serde_json::from_str::<Mixture>(&text).with_context(|| format!("invalid mixture {}", path.display())))?
        }
        None => quantile_slice_init(&sample, l, family)?,
    };
    let report = fit(&sample, &initial, &aq_config)?;
    prepare_out_dir(&settings.out_dir)?;
    let trace: Vec<TraceRow> = report
        .iterations
        .iter()
        .map(|it| TraceRow {
            epoch: it.epoch,
            iteration: it.iteration,
            p_bin: it.p_bin,
            quantization_error: it.quantization_error,
            global_error: it.global_error,
            best_quantization_error: it.best_quantization_error,
            distance: it.distance,
        })
        .collect();
    runtime(write_json(&settings.out_dir.join("fit_report.json"), &report))?;
    runtime(write_json(&settings.out_dir.join("mixture.json"), &report.best.mixture))?;
    runtime(write_rows(&settings.out_dir.join("trace.csv"), &trace))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "quantization error {:.6e}, global error {:.6e}, {} iterations ({:?})",
        report.best.quantization_error,
        report.best.global_error,
        report.iterations.len(),
        report.termination
    );
    Ok(())
}

#[derive(Serialize)]
struct CompareRow {
    sample: usize,
    start: usize,
    lloyd_error: f64,
    aq_error: f64,
    relative_difference: f64,
}

fn cmd_compare(common: &Common, samples: usize, starts: usize, points: usize, dim: usize) -> Outcome<()> {
    let settings = config(Settings::resolve(common))?;
    if let Some(f) = settings.family {
        if f != Family::Dirac {
            return Err(Failure::Config(anyhow!("the comparison with Lloyd uses the dirac family, not {f}")));
        }
    }
    let l = settings.l.unwrap_or(2);
    let aq = config(settings.aq_config(l, Family::Dirac))?;
    let cfg = CompareConfig {
        samples,
        starts,
        points,
        dim,
        l,
        seed: settings.seed,
        lloyd: LloydConfig::default(),
        aq,
    };
    let (runs, summary) = compare_lloyd(&cfg)?;
    prepare_out_dir(&settings.out_dir)?;
    let rows: Vec<CompareRow> = runs
        .iter()
        .map(|r| CompareRow {
            sample: r.sample,
            start: r.start,
            lloyd_error: r.lloyd_error,
            aq_error: r.aq_error,
            relative_difference: r.relative_difference,
        })
        .collect();
    runtime(write_rows(&settings.out_dir.join("compare_runs.csv"), &rows))?;
    runtime(write_json(&settings.out_dir.join("compare_summary.json"), &summary))?;
    runtime(write_json(&settings.out_dir.join("compare_reports.json"), &runs))?;
    println!(
        "{} runs: equal {:.1}%, AQ better {:.1}%, Lloyd better {:.1}%, median improvement {:.3}%",
        summary.runs,
        100.0 * summary.fraction_equal,
        100.0 * summary.fraction_aq_better,
        100.0 * summary.fraction_lloyd_better,
        summary.median_improvement
    );
    Ok(())
}

fn cmd_suite(common: &Common, count: usize) -> Outcome<()> {
    let settings = config(Settings::resolve(common))?;
    let family = settings.family_or(Family::Uniform);
    let aq = config(settings.aq_config(2, family))?;
    let rows = suite(family, count, settings.seed, &aq)?;
    prepare_out_dir(&settings.out_dir)?;
    runtime(write_rows(&settings.out_dir.join(format!("suite_{family}.csv")), &rows))?;
    let mut fitted: Vec<f64> = rows.iter().map(|r| r.fitted_quantization_error).collect();
    fitted.sort_by(f64::total_cmp);
    println!("{} scenarios, median fitted quantization error {:.4e}", rows.len(), fitted[fitted.len() / 2]);
    Ok(())
}

#[derive(Serialize)]
struct SensitivityRow {
    representative: usize,
    weight: f64,
    variable: String,
    kind: String,
    center: f64,
    width: f64,
    lower: f64,
    upper: f64,
    influential: bool,
}

fn cmd_sensitivity(
    common: &Common,
    input: Option<&Path>,
    rows: usize,
    regime_column: Option<&str>,
    threshold_column: Option<&str>,
    threshold: Option<f64>,
) -> Outcome<()> {
    let settings = config(Settings::resolve(common))?;
    if let Some(f) = settings.family {
        if f != Family::FloodHybrid {
            return Err(Failure::Config(anyhow!("sensitivity analysis uses the flood family, not {f}")));
        }
    }
    let l = settings.l.unwrap_or(3);
    let aq = config(settings.aq_config(l, Family::FloodHybrid))?;
    let (sample, mask) = match input {
        Some(path) => {
            let table = data(Table::read(path))?;
            let (mask, excluded): (Vec<bool>, Vec<&str>) = match (regime_column, threshold_column, threshold) {
                (Some(name), _, _) => {
                    let col = data(table.column(name))?;
                    (col.iter().map(|&v| v != 0.0).collect(), vec![name])
                }
                (None, Some(name), Some(t)) => {
                    let col = data(table.column(name))?;
                    (col.iter().map(|&v| v > t).collect(), vec![name])
                }
                _ => {
                    return Err(Failure::Config(anyhow!(
                        "give --regime-column or --threshold-column with --threshold"
                    )))
                }
            };
            (data(table.sample_without(&excluded))?, mask)
        }
        None => synthetic_benchmark(rows, settings.seed)?,
    };
    let dataset = RankedDataset::new(sample, mask)?;
    let report = analyze(&dataset, &aq)?;
    prepare_out_dir(&settings.out_dir)?;
    let table: Vec<SensitivityRow> = report
        .representatives
        .iter()
        .flat_map(|r| {
            r.variables.iter().map(move |v| SensitivityRow {
                representative: r.index,
                weight: r.weight,
                variable: v.variable.clone(),
                kind: v.kind.clone(),
                center: v.center,
                width: v.width,
                lower: v.center - v.width / 2.0,
                upper: v.center + v.width / 2.0,
                influential: v.influential,
            })
        })
        .collect();
    runtime(write_json(&settings.out_dir.join("sensitivity_report.json"), &report))?;
    runtime(write_rows(&settings.out_dir.join("sensitivity_table.csv"), &table))?;
    println!("{} of {} rows in the regime", report.regime_rows, report.rows);
    for r in &report.representatives {
        let flagged: Vec<&str> = r
            .variables
            .iter()
            .filter(|v| v.influential)
            .map(|v| v.variable.as_str())
            .collect();
        println!("representative {} (weight {:.3}): influential {:?}", r.index, r.weight, flagged);
    }
    Ok(())
}

fn cmd_gen(
    common: &Common,
    scenario: Option<NamedScenario>,
    scenario_file: Option<&Path>,
    count: usize,
    scheme: Option<SchemeArg>,
    n: Option<usize>,
    labels: bool,
) -> Outcome<()> {
    let settings = config(Settings::resolve(common))?;
    let mut scenarios: Vec<MixtureScenario> = match (scenario, scenario_file) {
        (Some(NamedScenario::SU), _) => vec![s_u()],
        (Some(NamedScenario::SG), _) => vec![s_g()],
        (Some(NamedScenario::SHyb), _) => vec![s_hyb()],
        (None, Some(path)) => {
            let text = data(std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())))?;
            vec![config(
                serde_json::from_str(&text).with_context(|| format!("invalid scenario {}", path.display())),
            )?]
        }
        (None, None) => random_scenarios(settings.family_or(Family::Uniform), count, settings.seed)?,
    };
    for s in &mut scenarios {
        if let Some(scheme) = scheme {
            s.scheme = scheme.into();
        }
        if let Some(n) = n {
            s.n = n;
        }
        if common.seed.is_some() && scenario.is_some() {
            s.seed = settings.seed;
        }
    }
    prepare_out_dir(&settings.out_dir)?;
    for s in &scenarios {
        let g = generate(s)?;
        let names: Vec<String> = (1..=g.sample.dim()).map(|k| format!("x{k}")).collect();
        let sample = g.sample.with_names(names)?;
        runtime(write_sample(
            &settings.out_dir.join(format!("{}.csv", s.name)),
            &sample,
            labels.then_some(g.labels.as_slice()),
        ))?;
        runtime(write_json(&settings.out_dir.join(format!("{}.json", s.name)), s))?;
    }
    println!("{} scenarios written to {}", scenarios.len(), settings.out_dir.display());
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    match &cli.command {
        Command::Fit { common, input, init } => cmd_fit(common, input, init.as_deref()),
        Command::CompareLloyd {
            common,
            samples,
            starts,
            points,
            dim,
        } => cmd_compare(common, *samples, *starts, *points, *dim),
        Command::Suite { common, count } => cmd_suite(common, *count),
        Command::Sensitivity {
            common,
            input,
            rows,
            regime_column,
            threshold_column,
            threshold,
        } => cmd_sensitivity(
            common,
            input.as_deref(),
            *rows,
            regime_column.as_deref(),
            threshold_column.as_deref(),
            *threshold,
        ),
        Command::Gen {
            common,
            scenario,
            scenario_file,
            count,
            scheme,
            n,
            labels,
        } => cmd_gen(common, *scenario, scenario_file.as_deref(), *count, *scheme, *n, *labels),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}
