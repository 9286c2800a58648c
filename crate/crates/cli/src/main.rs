//! `copfit` — Archimedean copula selection for censored bivariate data.

use clap::{Args, Parser, Subcommand, ValueEnum};
use copfit::{io, report, scenario, studies, svg, CliError, CliResult};
use copfit_core::kendall::EstimatorChoice;
use copfit_core::{
    generator_estimate, graphical_curves, select, simulate_censored, wang_gof, CombineRule,
    CopulaFamily, DependenceParam, KernelShape, Margin, MassConvention, PipelineOptions,
};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "copfit",
    about = "Selects and validates Archimedean copula models for bivariate data under flexible right-censoring",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full selection run: omnibus, L² distances, bootstrap pseudo p-values,
    /// and the goodness-of-fit test; writes report.json and curves.csv.
    Select(SelectArgs),
    /// Omnibus-only fit (no bootstrap, no imputation test).
    Fit(FitArgs),
    /// Curve table (and optional SVG) for the graphical comparison.
    Curves(CurvesArgs),
    /// Simulate censored samples from a scenario file.
    Simulate(SimulateArgs),
    /// Goodness-of-fit test for one hypothesized family.
    Gof(GofArgs),
    /// Regenerate a simulation study table at a configurable scale.
    ReproduceTable(ReproduceArgs),
}

#[derive(Args, Clone)]
struct PipelineArgs {
    /// Kernel shape for the conditional estimator.
    #[arg(long, value_enum, default_value_t = KernelArg::Epanechnikov)]
    kernel: KernelArg,
    /// Explicit bandwidth; omit for the rule-of-thumb c·sigma·n^{-1/5}.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Scale constant of the bandwidth rule.
    #[arg(long, default_value_t = 1.0)]
    bandwidth_c: f64,
    /// Weight between the two conditional branches of the joint estimator.
    #[arg(long, default_value_t = 0.5)]
    w: f64,
    /// Joint estimator choice.
    #[arg(long, value_enum, default_value_t = EstimatorArg::Flexible)]
    estimator: EstimatorArg,
    /// How sub-stochastic joint mass maps onto the Kendall curve.
    #[arg(long, value_enum, default_value_t = MassArg::Renormalized)]
    mass: MassArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MassArg {
    Renormalized,
    PlugIn,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Epanechnikov,
    Gaussian,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    /// Always the flexible-censoring joint estimator.
    Flexible,
    /// Counting (complete), single-censoring estimator, or flexible, by scenario.
    ScenarioMatched,
}

#[derive(Clone, Copy, ValueEnum)]
enum CombineArg {
    MeanZ,
    Rubin,
}

impl PipelineArgs {
    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            kernel_shape: match self.kernel {
                KernelArg::Epanechnikov => KernelShape::Epanechnikov,
                KernelArg::Gaussian => KernelShape::Gaussian,
                KernelArg::Uniform => KernelShape::Uniform,
            },
            bandwidth: self.bandwidth,
            bandwidth_c: self.bandwidth_c,
            w: self.w,
            estimator: match self.estimator {
                EstimatorArg::Flexible => EstimatorChoice::Flexible,
                EstimatorArg::ScenarioMatched => EstimatorChoice::ScenarioMatched,
            },
            mass_convention: match self.mass {
                MassArg::Renormalized => MassConvention::Renormalized,
                MassArg::PlugIn => MassConvention::PlugIn,
            },
        }
    }
}

fn parse_candidates(raw: &str) -> CliResult<Vec<CopulaFamily>> {
    let mut out = Vec::new();
    for part in raw.split(',') {
        let name = part.trim().to_ascii_lowercase();
        let family = CopulaFamily::parse(&name)
            .ok_or_else(|| CliError::Arg(format!("unknown candidate family `{part}`")))?;
        if !out.contains(&family) {
            out.push(family);
        }
    }
    if out.is_empty() {
        return Err(CliError::Arg("candidate list is empty".into()));
    }
    Ok(out)
}

#[derive(Args)]
struct SelectArgs {
    /// Input CSV with header y1,y2,delta1,delta2.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated candidate families.
    #[arg(long, default_value = "clayton,frank,gumbel,joe")]
    candidates: String,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Normalization point of the generator estimate.
    #[arg(long, default_value_t = 0.5)]
    nu0: f64,
    /// Bootstrap replicates for the pseudo p-values (0 disables).
    #[arg(long, default_value_t = 1000)]
    b: usize,
    /// Imputed datasets for the goodness-of-fit test (0 disables).
    #[arg(long, default_value_t = 5)]
    m: usize,
    /// RNG seed (mandatory: the bootstrap and imputations are stochastic).
    #[arg(long)]
    seed: u64,
    /// How per-imputation statistics combine.
    #[arg(long, value_enum, default_value_t = CombineArg::MeanZ)]
    combine: CombineArg,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also render curves.svg.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "clayton,frank,gumbel,joe")]
    candidates: String,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, default_value_t = 0.5)]
    nu0: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "clayton,frank,gumbel,joe")]
    candidates: String,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, default_value_t = 0.5)]
    nu0: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (key = value lines).
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GofArgs {
    #[arg(long)]
    input: PathBuf,
    /// Hypothesized family.
    #[arg(long)]
    family: String,
    /// Dependence parameter; omitted means the τ̂-inverted estimate.
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, default_value_t = 5)]
    m: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = CombineArg::MeanZ)]
    combine: CombineArg,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Paper table id: 4 (independence), 5 (omnibus single run),
    /// 6 (omnibus selection rates), 7 (L² pseudo p-values), 8 (GOF rates).
    #[arg(long)]
    table: u8,
    /// Replicates (tables 4, 6, 8).
    #[arg(long)]
    reps: Option<usize>,
    /// Sample size per replicate.
    #[arg(long)]
    n: Option<usize>,
    /// Bootstrap replicates (table 7).
    #[arg(long)]
    b: Option<usize>,
    /// Imputations (table 8).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn combine_rule(arg: CombineArg) -> CombineRule {
    match arg {
        CombineArg::MeanZ => CombineRule::MeanZ,
        CombineArg::Rubin => CombineRule::Rubin,
    }
}

fn ensure_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_selection(
    input: &Path,
    candidates_raw: &str,
    pipeline: &PipelineArgs,
    nu0: f64,
    b: usize,
    m: usize,
    seed: u64,
    combine: CombineArg,
    out: &Path,
    render_svg: bool,
) -> CliResult<()> {
    let sample = io::load_csv(input)?;
    let candidates = parse_candidates(candidates_raw)?;
    let options = pipeline.options();
    let combine = combine_rule(combine);
    let outcome = select(&sample, &candidates, b, m, seed, &options, combine)?;
    ensure_dir(out)?;

    let bandwidth_used = options.kernel_for(&sample, Margin::Second)?.bandwidth();
    let json = report::build_report(
        &outcome,
        &candidates,
        &options,
        bandwidth_used,
        nu0,
        b,
        m,
        seed,
        combine,
    );
    io::write_string(&out.join("report.json"), &report::to_json_string(&json))?;

    let curve = copfit_core::estimate_curve(&sample, &options)?;
    let table = graphical_curves(&curve, &candidates)?;
    io::write_curves_csv(&out.join("curves.csv"), &table)?;
    let gen = generator_estimate(&curve, nu0)?;
    io::write_generator_csv(&out.join("generator.csv"), &gen)?;
    if render_svg {
        io::write_string(&out.join("curves.svg"), &svg::lambda_overlay_svg(&table))?;
    }
    println!("{}", report::to_json_string(&json));
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Select(a) => run_selection(
            &a.input,
            &a.candidates,
            &a.pipeline,
            a.nu0,
            a.b,
            a.m,
            a.seed,
            a.combine,
            &a.out,
            a.svg,
        ),
        Command::Fit(a) => run_selection(
            &a.input,
            &a.candidates,
            &a.pipeline,
            a.nu0,
            0,
            0,
            0,
            CombineArg::MeanZ,
            &a.out,
            a.svg,
        ),
        Command::Curves(a) => {
            let sample = io::load_csv(&a.input)?;
            let candidates = parse_candidates(&a.candidates)?;
            let options = a.pipeline.options();
            let curve = copfit_core::estimate_curve(&sample, &options)?;
            let table = graphical_curves(&curve, &candidates)?;
            ensure_dir(&a.out)?;
            io::write_curves_csv(&a.out.join("curves.csv"), &table)?;
            let gen = generator_estimate(&curve, a.nu0)?;
            io::write_generator_csv(&a.out.join("generator.csv"), &gen)?;
            if a.svg {
                io::write_string(&a.out.join("curves.svg"), &svg::lambda_overlay_svg(&table))?;
            }
            println!(
                "{}",
                serde_json::json!({
                    "tau_hat": table.tau_hat,
                    "skipped": table.skipped.iter().map(|(f, note)| {
                        serde_json::json!({"family": f.name(), "note": note})
                    }).collect::<Vec<_>>(),
                })
            );
            Ok(())
        }
        Command::Simulate(a) => {
            let scn = scenario::load_scenario(&a.scenario)?;
            let censors = scn.resolve_censoring()?;
            ensure_dir(&a.out)?;
            for r in 0..scn.replicates {
                let config = scn.config_for_replicate(&censors, r as u64);
                let sample = simulate_censored(&config)?;
                let name = if scn.replicates == 1 {
                    "sample.csv".to_string()
                } else {
                    format!("sample_{r:04}.csv")
                };
                io::save_csv(&a.out.join(name), &sample)?;
            }
            println!(
                "{}",
                serde_json::json!({"written": scn.replicates, "n": scn.n, "out": a.out})
            );
            Ok(())
        }
        Command::Gof(a) => {
            let sample = io::load_csv(&a.input)?;
            let family = CopulaFamily::parse(&a.family.to_ascii_lowercase())
                .ok_or_else(|| CliError::Arg(format!("unknown family `{}`", a.family)))?;
            let options = a.pipeline.options();
            let alpha = match a.alpha {
                Some(v) => v,
                None => {
                    let curve = copfit_core::estimate_curve(&sample, &options)?;
                    let (param, _) = DependenceParam::from_tau_clamped(family, curve.tau_hat());
                    param.alpha()
                }
            };
            let gof = wang_gof(&sample, family, alpha, a.m, a.seed, combine_rule(a.combine))?;
            println!(
                "{}",
                serde_json::json!({
                    "family": family.name(),
                    "alpha": alpha,
                    "statistic": gof.statistic,
                    "p_value": gof.p_value,
                    "z_per_imputation": gof.z_per_imputation,
                    "degenerate": gof.degenerate,
                    "m_imputations": a.m,
                    "seed": a.seed,
                })
            );
            Ok(())
        }
        Command::ReproduceTable(a) => {
            let defaults = match a.table {
                4 => (200, 1000, 0, 0),
                5 => (1, 1000, 0, 0),
                6 => (200, 1000, 0, 0),
                7 => (1, 500, 200, 0),
                8 => (200, 200, 0, 5),
                other => {
                    return Err(CliError::Arg(format!(
                        "unknown table id {other}; valid ids are 4..=8"
                    )))
                }
            };
            let opts = studies::StudyOptions {
                replicates: a.reps.unwrap_or(defaults.0),
                n: a.n.unwrap_or(defaults.1),
                b_replicates: a.b.unwrap_or(defaults.2),
                m_imputations: a.m.unwrap_or(defaults.3),
                seed: a.seed,
            };
            let table = studies::reproduce_table(a.table, &opts)?;
            ensure_dir(&a.out)?;
            let path = a.out.join(format!("table{}.csv", a.table));
            io::write_table_csv(&path, &table.header, &table.rows)?;
            println!(
                "{}",
                serde_json::json!({"table": a.table, "rows": table.rows.len(), "out": path})
            );
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            println!("{}", e.to_json());
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
