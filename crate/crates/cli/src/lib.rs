//! Command-line driver: config parsing, experiment commands and artifact writers.

pub mod config;
pub mod error;
pub mod manifest;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use irsdm_core::experiments::{
    flops_gao, flops_zf, improvement_ratios, presets, run_scheme, run_sweep, Scheme, SchemeOptions, SweepSpec,
    SweepVariable,
};
use irsdm_core::metrics::EveStrategy;
use irsdm_core::opt_gao::GaoSettings;
use irsdm_core::opt_zf::ZfSettings;
use log::{info, warn};

pub use config::{parse_config, parse_config_str, RunConfig};
pub use error::CliError;
use manifest::RunManifest;
use output::PlotSpec;

#[derive(Debug, Parser)]
#[command(
    name = "irsdm",
    version,
    about = "IRS-aided directional modulation: beamforming and phase-shift design"
)]
pub struct Cli {
    /// Flat TOML config; missing keys take the built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Base seed of the random-phase baseline (overrides the config).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads for sweeps [default: available cores].
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Directory for CSV, scripts, dumps and manifests.
    #[arg(long, global = true, value_name = "DIR", default_value = "results")]
    pub out: PathBuf,
    /// Drop the stream-separation projections from the ZF receive update.
    #[arg(long, global = true)]
    pub literal_zf: bool,
    /// Take the raw stationary θ update in GAO even when it lowers the RPS.
    #[arg(long, global = true)]
    pub no_safeguard: bool,
    /// Eve receive model for every IRS scheme [default: per scheme].
    #[arg(long, global = true, value_enum)]
    pub eve: Option<EveArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EveArg {
    WorstCase,
    ZeroForcing,
}

impl From<EveArg> for EveStrategy {
    fn from(e: EveArg) -> Self {
        match e {
            EveArg::WorstCase => EveStrategy::WorstCase,
            EveArg::ZeroForcing => EveStrategy::ZeroForcing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl FigureId {
    fn stem(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scheme on the configured scenario and print its rates.
    Solve {
        /// GAO, ZF, RandomPhase or NoIRS.
        #[arg(long, default_value = "GAO")]
        scheme: String,
        /// Also write the phase shifts and beamformers to OUT/solution_<scheme>.txt.
        #[arg(long)]
        dump: bool,
    },
    /// Run a figure preset and write its CSV and plot script.
    Figure {
        #[arg(value_enum)]
        id: FigureId,
    },
    /// Sweep one scenario variable over a list of values.
    Sweep {
        /// ps_dbm, m, snr_db or theta_ae.
        #[arg(long)]
        variable: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Comma-separated schemes [default: all four].
        #[arg(long = "scheme", value_delimiter = ',')]
        schemes: Vec<String>,
        /// Trials of the randomized baseline (overrides the config).
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Tabulate the FLOP models of both optimizers.
    Complexity {
        /// Comma-separated IRS sizes.
        #[arg(long = "m", value_delimiter = ',', default_value = "40,80,120,160,200")]
        m_values: Vec<usize>,
        /// GAO iteration count.
        #[arg(long, default_value_t = 6)]
        d: usize,
        /// ZF iteration count.
        #[arg(long, default_value_t = 3)]
        l: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Figure { .. } => "figure",
            Command::Sweep { .. } => "sweep",
            Command::Complexity { .. } => "complexity",
        }
    }
}

/// Loads the config, applies flag overrides and returns it with the scheme options.
pub fn resolve(cli: &Cli) -> Result<(RunConfig, SchemeOptions), CliError> {
    let mut run = match &cli.config {
        Some(path) => parse_config(path)?,
        None => {
            info!("no config file given, using the default scenario");
            RunConfig::default()
        }
    };
    if let Some(seed) = cli.seed {
        run.seed = seed;
    }
    let options = SchemeOptions {
        gao: GaoSettings {
            epsilon: run.epsilon,
            max_iter: run.max_iter,
            safeguard: !cli.no_safeguard,
            ..GaoSettings::default()
        },
        zf: ZfSettings {
            epsilon: run.epsilon,
            max_iter: run.max_iter,
            enforce_zf_in_subproblem: !cli.literal_zf,
            ..ZfSettings::default()
        },
        seed: run.seed,
        eve: cli.eve.map(Into::into),
    };
    Ok((run, options))
}

/// Executes a parsed command line. Output paths go to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let (cfg, options) = resolve(&cli)?;
    let pool = match cli.jobs {
        Some(0) => return Err(CliError::validation("jobs", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(&cli, &cfg, options))
}

fn dispatch(cli: &Cli, cfg: &RunConfig, options: SchemeOptions) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(cfg, cli.command.name());
    match &cli.command {
        Command::Solve { scheme, dump } => {
            let scheme: Scheme = scheme.parse()?;
            let out = run_scheme(&cfg.scenario, scheme, &options, 0)?;
            let r = &out.report;
            println!("scheme = {}", scheme.name());
            println!("eve = {}", out.eve.name());
            println!("r_b = {}", output::fmt_num(r.r_b));
            println!("r_e = {}", output::fmt_num(r.r_e));
            println!("r_s = {}", output::fmt_num(r.r_s));
            println!("rps = {}", output::fmt_num(r.rps));
            println!("iterations = {}", out.iterations_used);
            if let Some(trace) = &out.trace {
                println!("converged = {}", trace.converged);
            }
            if *dump {
                let stem = format!("solution_{}", scheme.name());
                let path = out_path(&cli.out, &format!("{stem}.txt"))?;
                std::fs::write(&path, output::solution_dump(&out, &manifest.config_digest))?;
                manifest.outputs.push(path);
                finish(&cli.out, &stem, manifest)?;
            }
        }
        Command::Figure { id } => figure(cli, cfg, options, *id, &mut manifest)?,
        Command::Sweep {
            variable,
            values,
            schemes,
            trials,
        } => {
            let variable: SweepVariable = variable.parse()?;
            let schemes = if schemes.is_empty() {
                Scheme::ALL.to_vec()
            } else {
                schemes.iter().map(|s| s.parse()).collect::<Result<Vec<Scheme>, _>>()?
            };
            let spec = SweepSpec {
                trials: trials.unwrap_or(cfg.trials),
                options,
                ..SweepSpec::new(variable, values.clone(), schemes)
            };
            let rows = run_sweep(&cfg.scenario, &spec)?;
            report_failures(rows.iter().filter(|r| !r.is_ok()).count());
            let path = out_path(&cli.out, "sweep.csv")?;
            output::write_sweep_csv(&path, &rows)?;
            let script = write_script(
                &cli.out,
                "sweep",
                &PlotSpec {
                    csv_name: "sweep.csv",
                    png_name: "sweep.png",
                    x: "value",
                    ys: &["r_s"],
                    group_by: &["scheme"],
                    log_y: false,
                },
            )?;
            manifest.outputs.extend([path, script]);
            finish(&cli.out, "sweep", manifest)?;
        }
        Command::Complexity { m_values, d, l } => {
            if m_values.is_empty() || m_values.contains(&0) {
                return Err(CliError::validation("m", "IRS sizes must be positive"));
            }
            let s = &cfg.scenario;
            let rows: Vec<(usize, f64, f64)> = m_values
                .iter()
                .map(|&m| (m, flops_gao(*d, m, s.n_a, s.n_b), flops_zf(*l, m, s.n_b)))
                .collect();
            for &(m, g, z) in &rows {
                println!("M = {m}: GAO {g:.4e} flops, ZF {z:.4e} flops");
            }
            let path = out_path(&cli.out, "complexity.csv")?;
            output::write_complexity_csv(&path, &rows)?;
            let script = write_script(
                &cli.out,
                "complexity",
                &PlotSpec {
                    csv_name: "complexity.csv",
                    png_name: "complexity.png",
                    x: "M",
                    ys: &["flops_gao", "flops_zf"],
                    group_by: &[],
                    log_y: true,
                },
            )?;
            manifest.outputs.extend([path, script]);
            finish(&cli.out, "complexity", manifest)?;
        }
    }
    Ok(())
}

fn figure(
    cli: &Cli,
    cfg: &RunConfig,
    options: SchemeOptions,
    id: FigureId,
    manifest: &mut RunManifest,
) -> Result<(), CliError> {
    let stem = id.stem();
    let csv_name = format!("{stem}.csv");
    let png_name = format!("{stem}.png");
    let path = out_path(&cli.out, &csv_name)?;
    let base = &cfg.scenario;
    let with_trials = |spec: SweepSpec| SweepSpec {
        trials: cfg.trials,
        ..spec
    };
    let (x, group_by): (&str, &[&str]) = match id {
        FigureId::Fig2 => {
            let points = presets::fig2_traces(base, options)?;
            output::write_trace_csv(&path, &points)?;
            ("iteration", &["scheme", "M"])
        }
        FigureId::Fig5 => {
            let rows = presets::fig5_rows(base, options)?;
            report_failures(rows.iter().filter(|(_, r)| !r.is_ok()).count());
            output::write_snr_sweep_csv(&path, &rows)?;
            ("value", &["scheme", "snr_db"])
        }
        FigureId::Fig3 | FigureId::Fig4 | FigureId::Fig6 => {
            let (scenario, spec) = match id {
                FigureId::Fig3 => (base.clone(), presets::fig3(options)),
                FigureId::Fig4 => (base.clone(), presets::fig4(options)),
                _ => (presets::fig6_base(base), presets::fig6(options)),
            };
            let spec = with_trials(spec);
            let rows = run_sweep(&scenario, &spec)?;
            report_failures(rows.iter().filter(|r| !r.is_ok()).count());
            if id != FigureId::Fig6 {
                for (a, b) in [(Scheme::Gao, Scheme::RandomPhase), (Scheme::Zf, Scheme::RandomPhase)] {
                    for (v, ratio) in improvement_ratios(&rows, &spec.values, a, b) {
                        if let Some(ratio) = ratio {
                            println!("{}={v}: {}/{} = {ratio:.4}", spec.variable, a.name(), b.name());
                        }
                    }
                }
            }
            output::write_sweep_csv(&path, &rows)?;
            ("value", &["scheme"])
        }
    };
    let ys: &[&str] = if id == FigureId::Fig2 { &["rps"] } else { &["r_s"] };
    let script = write_script(
        &cli.out,
        stem,
        &PlotSpec {
            csv_name: &csv_name,
            png_name: &png_name,
            x,
            ys,
            group_by,
            log_y: false,
        },
    )?;
    manifest.outputs.extend([path, script]);
    finish(&cli.out, stem, manifest.clone())
}

fn report_failures(n: usize) {
    if n > 0 {
        warn!("{n} sweep point(s) failed; see the error column");
    }
}

fn out_path(dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

fn write_script(dir: &Path, stem: &str, spec: &PlotSpec) -> Result<PathBuf, CliError> {
    let path = out_path(dir, &format!("plot_{stem}.py"))?;
    std::fs::write(&path, output::plot_script(spec))?;
    Ok(path)
}

fn finish(dir: &Path, stem: &str, manifest: RunManifest) -> Result<(), CliError> {
    for p in &manifest.outputs {
        println!("wrote {}", p.display());
    }
    let path = out_path(dir, &format!("{stem}.manifest.json"))?;
    std::fs::write(&path, manifest.to_json())?;
    println!("wrote {}", path.display());
    Ok(())
}
