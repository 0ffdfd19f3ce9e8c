//! Command-line entry point: simulate scans, analyze count files, run the
//! end-to-end Bell demonstration, and run the local-hidden-variable
//! baseline.
//!
//! All angles are degrees, all stage positions µm. Every command is
//! deterministic for a fixed seed.

use clap::{Args, Parser, Subcommand};
use hybrid_bell::analysis::{self, ChshResult, ExtractionMode, Report};
use hybrid_bell::config::RunConfig;
use hybrid_bell::lhv::{self, LhvModel};
use hybrid_bell::trials;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hybrid-bell",
    about = "Simulator and analysis pipeline for a path-polarization hybrid entanglement CHSH experiment",
    long_about = "Simulates a two-photon hybrid entanglement experiment (photon A's \
interferometer path entangled with photon B's polarization), analyzes the resulting \
count files, and compares against local-hidden-variable baselines.\n\n\
Units: angles in degrees, stage positions in µm, wavelengths in nm.\n\
Seed precedence: --seed flag, then HYBRID_BELL_SEED, then the config file."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the three-step scan and write counts.csv plus a config echo.
    Simulate(SimulateArgs),
    /// Analyze a counts CSV into report.json with fits, E values and S.
    Analyze(AnalyzeArgs),
    /// Simulate and analyze in one go; exit 0 only on a >3σ Bell violation.
    Bell(BellArgs),
    /// Run a local-hidden-variable model through the same pipeline.
    Lhv(LhvArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// RNG seed (overrides HYBRID_BELL_SEED and the config file).
    #[arg(long, env = "HYBRID_BELL_SEED", value_name = "N")]
    seed: Option<u64>,
    /// Interferometric visibility override, 0..=1.
    #[arg(long, value_name = "F")]
    visibility: Option<f64>,
    /// Output directory for counts.csv / report.json / config.json.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Counts CSV produced by `simulate` (or compatible).
    input: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
    /// Bell-point extraction: evaluate region fits or take nearest raw points.
    #[arg(long, value_enum, default_value = "fit")]
    mode: CliMode,
}

#[derive(Args)]
struct BellArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value = "fit")]
    mode: CliMode,
}

#[derive(Args)]
struct LhvArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// "uniform", "optimal", or a path to a JSON strategy mixture.
    #[arg(long, default_value = "uniform", value_name = "MODEL")]
    model: String,
    /// Pairs sampled per counting cell (overrides the config value).
    #[arg(long, value_name = "N")]
    pairs: Option<u64>,
    /// Print the CHSH value of all 16 deterministic strategies and exit.
    #[arg(long)]
    enumerate: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CliMode {
    Fit,
    Raw,
}

impl From<CliMode> for ExtractionMode {
    fn from(m: CliMode) -> Self {
        match m {
            CliMode::Fit => ExtractionMode::Fit,
            CliMode::Raw => ExtractionMode::Raw,
        }
    }
}

type CliResult<T> = Result<T, String>;

fn load_config(common: &CommonArgs) -> CliResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            RunConfig::from_json(&text).map_err(|e| e.to_string())?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(v) = common.visibility {
        cfg.visibility = v;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir)
        .map_err(|e| format!("cannot create output directory {}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    write_out(dir, name, &text)
}

fn print_chsh_table(title: &str, chsh: &ChshResult) {
    println!("{title}");
    println!("  {:<10} {:>10} {:>10}", "setting", "E", "sigma");
    for (label, e) in [
        ("E(a1,b1)", &chsh.e11),
        ("E(a1,b2)", &chsh.e12),
        ("E(a2,b1)", &chsh.e21),
        ("E(a2,b2)", &chsh.e22),
    ] {
        println!("  {:<10} {:>10.4} {:>10.4}", label, e.e, e.sigma);
    }
    println!("  S = {:.4} ± {:.4}", chsh.s, chsh.sigma_s);
    if chsh.violation_sigmas > 0.0 {
        println!("  CHSH bound |S| ≤ 2 violated by {:.1}σ", chsh.violation_sigmas);
    } else {
        println!("  no CHSH violation (|S| ≤ 2)");
    }
}

fn print_report_table(report: &Report) {
    println!("analysis report");
    println!("  x origin: {:.4} µm", report.x_origin_um);
    println!("  {:<10} {:>10} {:>10}", "setting", "E", "sigma");
    for ev in &report.e_values {
        println!(
            "  {:<10} {:>10.4} {:>10.4}",
            ev.label, ev.result.e, ev.result.sigma
        );
    }
    println!("  S = {:.4} ± {:.4}", report.s, report.sigma_s);
    if report.violation_sigmas > 0.0 {
        println!(
            "  CHSH bound |S| ≤ 2 violated by {:.1}σ",
            report.violation_sigmas
        );
    } else {
        println!("  no CHSH violation (|S| ≤ 2)");
    }
    let vis: Vec<String> = report.visibilities.iter().map(|v| format!("{v:.3}")).collect();
    println!("  coincidence visibilities: [{}]", vis.join(", "));
    let jumps: Vec<String> = report.phase_jumps.iter().map(|v| format!("{v:.1}°")).collect();
    println!("  phase jumps: [{}]", jumps.join(", "));
    match report.drift_deg {
        Some(d) => println!("  phase drift I→III: {d:.2}°"),
        None => println!("  phase drift I→III: n/a (no step III data)"),
    }
}

fn simulate_to_csv(cfg: &RunConfig, out: &Path) -> CliResult<Vec<trials::CountsRecord>> {
    let plan = cfg.scan_plan(cfg.seed);
    let records = trials::run_scan(&plan, &cfg.noise_model()).map_err(|e| e.to_string())?;
    let csv_path = write_out(out, "counts.csv", &trials::write_csv(&records))?;
    write_json(out, "config.json", cfg)?;
    println!(
        "simulated {} points in {} regions -> {}",
        records.len(),
        plan.regions.len(),
        csv_path.display()
    );
    Ok(records)
}

fn analyze_to_report(
    records: &[trials::CountsRecord],
    cfg: &RunConfig,
    mode: ExtractionMode,
    out: &Path,
) -> CliResult<Report> {
    let report = analysis::analyze_records(records, cfg.wavelength_nm, mode)
        .map_err(|e| e.to_string())?;
    let path = write_json(out, "report.json", &report)?;
    print_report_table(&report);
    println!("report written to {}", path.display());
    Ok(report)
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<ExitCode> {
    let cfg = load_config(&args.common)?;
    simulate_to_csv(&cfg, &args.common.out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<ExitCode> {
    let cfg = load_config(&args.common)?;
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| format!("cannot read {}: {e}", args.input.display()))?;
    let records = trials::read_csv(&text).map_err(|e| e.to_string())?;
    analyze_to_report(&records, &cfg, args.mode.into(), &args.common.out)?;
    Ok(ExitCode::SUCCESS)
}

fn violation_exit(s: f64, violation_sigmas: f64) -> ExitCode {
    if s.abs() > 2.0 && violation_sigmas > 3.0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_bell(args: &BellArgs) -> CliResult<ExitCode> {
    let cfg = load_config(&args.common)?;
    let records = simulate_to_csv(&cfg, &args.common.out)?;
    let report = analyze_to_report(&records, &cfg, args.mode.into(), &args.common.out)?;
    Ok(violation_exit(report.s, report.violation_sigmas))
}

#[derive(Serialize)]
struct LhvReport {
    model: LhvModel,
    expectation_s: f64,
    chsh: ChshResult,
}

fn load_model(spec: &str) -> CliResult<LhvModel> {
    let model = match spec {
        "uniform" => LhvModel::uniform(),
        "optimal" => LhvModel::optimal(),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read model {path}: {e}"))?;
            serde_json::from_str(&text).map_err(|e| format!("model {path}: {e}"))?
        }
    };
    model.validate().map_err(|e| e.to_string())?;
    Ok(model)
}

fn cmd_lhv(args: &LhvArgs) -> CliResult<ExitCode> {
    if args.enumerate {
        println!("{:>3} {:>3} {:>3} {:>3} {:>3} {:>6}", "#", "a1", "a2", "b1", "b2", "S");
        for (k, s) in lhv::enumerate_strategies().iter().enumerate() {
            println!(
                "{:>3} {:>3} {:>3} {:>3} {:>3} {:>6.1}",
                k,
                s.a1,
                s.a2,
                s.b1,
                s.b2,
                lhv::strategy_chsh(s)
            );
        }
        return Ok(ExitCode::SUCCESS);
    }
    let cfg = load_config(&args.common)?;
    let model = load_model(&args.model)?;
    let pairs = args.pairs.unwrap_or(cfg.pairs_per_cell as u64);
    let records =
        lhv::run_lhv_points(&model, cfg.wavelength_nm, pairs, cfg.seed).map_err(|e| e.to_string())?;
    write_out(&args.common.out, "counts.csv", &trials::write_csv(&records))?;
    let chsh = analysis::chsh_from_bell_records(&records).map_err(|e| e.to_string())?;
    print_chsh_table(
        &format!("LHV run: model {}, {} pairs/cell, seed {}", args.model, pairs, cfg.seed),
        &chsh,
    );
    println!("  exact model expectation S = {:.4}", model.expectation_s());
    write_json(
        &args.common.out,
        "report.json",
        &LhvReport {
            expectation_s: model.expectation_s(),
            model,
            chsh,
        },
    )?;
    Ok(violation_exit(chsh.s, chsh.violation_sigmas))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Analyze(args) => cmd_analyze(args),
        Cmd::Bell(args) => cmd_bell(args),
        Cmd::Lhv(args) => cmd_lhv(args),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
