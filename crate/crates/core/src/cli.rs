//! Command-line front end: `simulate`, `ampute`, `impute` and `benchmark`.
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numeric failure during training.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::chained::gcmi_impute;
use crate::config::{RunConfig, Stage};
use crate::error::{Error, Result};
use crate::eval::{run_benchmark, Method};
use crate::io::{read_csv, write_csv, write_mask_csv};
use crate::lab::{ampute_matrix, gen_synthetic, Mechanism};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gcmi", version, about = "Chained adversarial multiple imputation for tabular data")]
pub struct Cli {
    /// Top-level seed; every stage derives its own seed from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate equicorrelated Gaussian covariates and a linear outcome.
    Simulate(SimulateArgs),
    /// Delete cells from a complete CSV under MCAR, MAR or MNAR.
    Ampute(AmputeArgs),
    /// Multiply impute a CSV with missing cells.
    Impute(ImputeArgs),
    /// Monte Carlo comparison of imputation methods.
    Benchmark(BenchmarkArgs),
    /// Print the effective configuration as JSON.
    Config,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Output CSV (default: `simulated.csv` in the output directory).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MechanismArg {
    Mcar,
    Mar,
    Mnar,
}

#[derive(Debug, Args)]
pub struct AmputeArgs {
    /// Complete input CSV (default: the simulate stage's output).
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mechanism: Option<MechanismArg>,
    /// MCAR deletion probability.
    #[arg(long)]
    pub rate: Option<f64>,
    /// MNAR intercept.
    #[arg(long, allow_hyphen_values = true)]
    pub b0: Option<f64>,
    /// MNAR slope.
    #[arg(long, allow_hyphen_values = true)]
    pub b1: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub mask_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImputeArgs {
    /// CSV with missing cells (default: the ampute stage's output).
    pub input: Option<PathBuf>,
    /// Number of imputations.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// Output file prefix.
    #[arg(long)]
    pub prefix: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Comma-separated built-in methods (`gcmi`, `mean`); replaces the
    /// configured list.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long)]
    pub export_dir: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).try_init();
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        return EXIT_NUMERIC;
    }
    match e {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Loads the config file (if any) and applies the global flags.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = effective_config(&cli)?;
    let threads = cfg
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => simulate(cfg, a),
        Command::Ampute(a) => ampute(cfg, a),
        Command::Impute(a) => impute(cfg, a),
        Command::Benchmark(a) => benchmark(cfg, a),
        Command::Config => {
            println!("{}", cfg.to_json()?);
            Ok(())
        }
    })
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}

fn simulate(cfg: RunConfig, a: SimulateArgs) -> Result<()> {
    let mut spec = cfg.simulate.clone();
    spec.n = a.n.unwrap_or(spec.n);
    spec.p = a.p.unwrap_or(spec.p);
    spec.rho = a.rho.unwrap_or(spec.rho);
    spec.sigma2 = a.sigma2.unwrap_or(spec.sigma2);
    spec.noise_sd = a.noise_sd.unwrap_or(spec.noise_sd);
    spec.seed = cfg.stage_seed(Stage::Simulate);
    let data = gen_synthetic(&spec)?;
    let out = a.output.unwrap_or_else(|| cfg.resolve(&cfg.io.simulated));
    ensure_parent(&out)?;
    write_csv(&data.with_outcome(), &out)?;
    info!("wrote {} × {} to {}", spec.n, spec.p + 1, out.display());
    Ok(())
}

fn ampute(cfg: RunConfig, a: AmputeArgs) -> Result<()> {
    let mut spec = cfg.ampute.clone();
    if let Some(m) = a.mechanism {
        spec.mechanism = match m {
            MechanismArg::Mcar => Mechanism::Mcar {
                p: a.rate.unwrap_or(0.3),
            },
            MechanismArg::Mar => Mechanism::Mar {
                beta: None,
                cond_cols: vec![0, 1, 2, 3],
                target_cols: None,
            },
            MechanismArg::Mnar => Mechanism::Mnar {
                b0: a.b0.unwrap_or(-1.5),
                b1: a.b1.unwrap_or(3.0),
            },
        };
    }
    match &mut spec.mechanism {
        Mechanism::Mcar { p } => *p = a.rate.unwrap_or(*p),
        Mechanism::Mnar { b0, b1 } => {
            *b0 = a.b0.unwrap_or(*b0);
            *b1 = a.b1.unwrap_or(*b1);
        }
        Mechanism::Mar { .. } => {}
    }
    spec.seed = cfg.stage_seed(Stage::Ampute);

    let input = a.input.unwrap_or_else(|| cfg.resolve(&cfg.io.simulated));
    let dm = read_csv(&input, &cfg.schema)?;
    let (amputed, mask) = ampute_matrix(&dm, &spec)?;
    let out = a.output.unwrap_or_else(|| cfg.resolve(&cfg.io.amputed));
    let mask_out = a.mask_output.unwrap_or_else(|| cfg.resolve(&cfg.io.mask));
    ensure_parent(&out)?;
    ensure_parent(&mask_out)?;
    write_csv(&amputed, &out)?;
    write_mask_csv(&mask, &dm.column_names(), &mask_out)?;
    info!(
        "{}: deleted {} of {} cells; wrote {} and {}",
        spec.mechanism.label(),
        mask.iter().filter(|&&m| m).count(),
        mask.len(),
        out.display(),
        mask_out.display()
    );
    Ok(())
}

fn impute(cfg: RunConfig, a: ImputeArgs) -> Result<()> {
    let mut gc = cfg.impute.clone();
    gc.m_imputations = a.m.unwrap_or(gc.m_imputations);
    gc.max_chain_iters = a.max_iters.unwrap_or(gc.max_chain_iters);
    gc.train.max_epochs = a.max_epochs.unwrap_or(gc.train.max_epochs);
    gc.seed = cfg.stage_seed(Stage::Impute);
    let input = a.input.unwrap_or_else(|| cfg.resolve(&cfg.io.amputed));
    let dm = read_csv(&input, &cfg.schema)?;
    let result = gcmi_impute(&dm, &gc)?;
    let prefix = a.prefix.unwrap_or_else(|| cfg.io.imputed_prefix.clone());
    let manifest = result.write_outputs(&cfg.output_dir, &prefix)?;
    info!("wrote {} imputations; manifest {}", gc.m_imputations, manifest.display());
    Ok(())
}

fn benchmark(cfg: RunConfig, a: BenchmarkArgs) -> Result<()> {
    let mut spec = cfg.benchmark.clone();
    spec.mc_repeats = a.repeats.unwrap_or(spec.mc_repeats);
    if let Some(names) = a.methods {
        spec.methods = names
            .iter()
            .map(|n| match n.trim() {
                "gcmi" => Ok(Method::Gcmi),
                "mean" => Ok(Method::Mean),
                other => Err(Error::Config(format!(
                    "unknown method `{other}`; external methods are configured in the config file"
                ))),
            })
            .collect::<Result<_>>()?;
    }
    if a.export_dir.is_some() {
        spec.export_dir = a.export_dir;
    }
    spec.seed = cfg.stage_seed(Stage::Benchmark);
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    let table = run_benchmark(&spec)?;
    let dir = cfg.resolve(&cfg.io.benchmark_dir);
    table.save(&dir)?;
    for r in &table.rows {
        println!(
            "{:<8} {:<24} rate {:.3}  rmse {:.4} ± {:.4} (sd {:.4}, n={})",
            r.method,
            r.mechanism,
            r.realized_rate,
            r.mean_rmse,
            r.se_rmse.unwrap_or(f64::NAN),
            r.sd_rmse.unwrap_or(f64::NAN),
            r.repeats
        );
    }
    info!("wrote benchmark tables to {}", dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_is_a_usage_error() {
        assert_eq!(run(["gcmi", "simulate", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["gcmi"]), EXIT_USAGE);
    }

    #[test]
    fn help_exits_cleanly() {
        assert_eq!(run(["gcmi", "--help"]), EXIT_OK);
    }

    #[test]
    fn simulate_writes_outcome_column() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sim.csv");
        let code = run([
            "gcmi".as_ref(),
            "simulate".as_ref(),
            "--n".as_ref(),
            "50".as_ref(),
            "--p".as_ref(),
            "4".as_ref(),
            "--rho".as_ref(),
            "0.3".as_ref(),
            "--output".as_ref(),
            out.as_os_str(),
        ]);
        assert_eq!(code, EXIT_OK);
        let dm = read_csv(&out, &Default::default()).unwrap();
        assert_eq!((dm.n_rows(), dm.n_cols()), (50, 5));
        assert_eq!(dm.columns()[4].name, "Y");
    }

    #[test]
    fn missing_input_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let code = run([
            "gcmi".as_ref(),
            "impute".as_ref(),
            dir.path().join("absent.csv").as_os_str(),
        ]);
        assert_eq!(code, EXIT_DATA);
    }

    #[test]
    fn bad_config_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"impute": {"m_imputations": 0}}"#).unwrap();
        assert_eq!(run(["gcmi".as_ref(), "--config".as_ref(), path.as_os_str(), "config".as_ref()]), EXIT_USAGE);
    }

    #[test]
    fn numeric_errors_map_to_three() {
        let e = Error::SweepFailed {
            sweep: 2,
            source: Box::new(Error::NonFiniteLoss {
                cycle: 1,
                detail: "nan".into(),
            }),
        };
        assert_eq!(exit_code(&e), EXIT_NUMERIC);
        assert_eq!(exit_code(&Error::EmptyInput), EXIT_DATA);
    }
}
