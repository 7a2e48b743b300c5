//! Command-line front end: runs, convergence studies and post-processing.
//!
//! Exit codes: 0 success, 1 other failure, 2 invalid configuration or
//! arguments, 3 missing input file, 4 numerical divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phasefield::diagnostics::radial_spectrum;
use phasefield::output::{RunDir, RunStatus};
use phasefield::{convergence_study, run, Error, Method, Result, RunConfig, Simulation};

#[derive(Debug, Parser)]
#[command(name = "phasefield", version, about = "Pseudo-spectral solver for stiff semi-linear PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write frames, diagnostics and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `run.output_dir` from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Measure L2 errors of several step sizes and methods against a fine ETD run.
    Study {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated step sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        h: Vec<f64>,
        /// Comma-separated methods (imex, if, etd).
        #[arg(long, value_delimiter = ',', default_value = "imex,if,etd")]
        methods: Vec<String>,
        /// Reference step size; must not exceed the smallest `h`.
        #[arg(long)]
        href: f64,
        /// Evaluation time; defaults to `time.t_final`.
        #[arg(long)]
        t_eval: Option<f64>,
        /// Directory for errors.csv and study.json; defaults to `run.output_dir`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the radially averaged spectrum of a stored frame as CSV.
    Spectrum {
        /// Run directory containing manifest.json.
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        run: Option<PathBuf>,
        /// Config whose `run.output_dir` holds the run.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Frame index (0 is the initial field); defaults to the last frame.
        #[arg(long)]
        frame: Option<u64>,
        #[arg(long, default_value_t = 64)]
        bins: usize,
    },
    /// Print the stored diagnostics of a run, or compute them for a config.
    Diag {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        run: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } => 2,
        Error::MissingFile { .. } => 3,
        Error::Diverged { .. } => 4,
        _ => 1,
    }
}

fn report(err: &Error) {
    match err {
        Error::Config { key, msg } => eprintln!("error kind=config key={key} message=\"{msg}\""),
        other => eprintln!("error kind={} message=\"{other}\"", other.kind()),
    }
}

fn run_dir(run: Option<PathBuf>, config: Option<PathBuf>) -> Result<RunDir> {
    let dir = match (run, config) {
        (Some(dir), _) => dir,
        (None, Some(cfg)) => RunConfig::from_file(cfg)?.output_dir,
        (None, None) => return Err(Error::Unsupported("need --run or --config".into())),
    };
    RunDir::open(dir)
}

fn warn_imex(config: &RunConfig) -> Result<()> {
    if config.method == Method::Imex {
        let sim = Simulation::new(config)?;
        if sim.imex_bound_exceeded() {
            eprintln!(
                "warning: h * max|L| = {:.3e} >= 1; IMEX will be heavily damped at high wavenumbers",
                sim.stepper().tables().stiffness_metric()
            );
        }
    }
    Ok(())
}

fn cmd_run(config: &Path, output: Option<PathBuf>) -> Result<()> {
    let config = RunConfig::from_file(config)?;
    warn_imex(&config)?;
    let dir = output.unwrap_or_else(|| config.output_dir.clone());
    let outcome = run(&config, &dir)?;
    println!(
        "wrote {} frames to {} (t = {})",
        outcome.manifest.frames.len(),
        dir.display(),
        outcome.final_field.time()
    );
    Ok(())
}

fn cmd_study(
    config: &Path,
    h: &[f64],
    methods: &[String],
    href: f64,
    t_eval: Option<f64>,
    output: Option<PathBuf>,
) -> Result<()> {
    let config = RunConfig::from_file(config)?;
    let methods = methods
        .iter()
        .map(|m| {
            m.parse::<Method>().map_err(|e| match e {
                Error::Config { msg, .. } => Error::Config {
                    key: "methods".into(),
                    msg,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let t_eval = t_eval.unwrap_or(config.t_final);
    let table = convergence_study(&config, h, &methods, href, t_eval)?;
    let dir = output.unwrap_or_else(|| config.output_dir.clone());
    table.write(&dir)?;
    print!("{}", table.to_csv());
    Ok(())
}

fn cmd_spectrum(dir: RunDir, frame: Option<u64>, bins: usize) -> Result<()> {
    let field = match frame {
        Some(i) => dir.read_frame(i)?,
        None => dir.read_last_frame()?,
    };
    let s = radial_spectrum(&field, bins)?;
    println!("# t = {} dominant_k = {}", field.time(), s.dominant_k);
    println!("k,power,count");
    for ((k, p), c) in s.bin_centers.iter().zip(&s.power).zip(&s.counts) {
        println!("{k:e},{p:e},{c}");
    }
    Ok(())
}

fn cmd_diag(dir: RunDir) -> Result<()> {
    let status = dir.manifest().status;
    if status != RunStatus::Complete {
        eprintln!("warning: run status is {status:?}");
    }
    println!("{}", phasefield::output::DIAGNOSTICS_HEADER);
    for r in dir.read_diagnostics()? {
        let f = r.free_energy.map(|e| format!("{e:e}")).unwrap_or_default();
        println!("{:e},{f},{:e},{:e}", r.time, r.mean_value, r.max_abs);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output } => cmd_run(&config, output),
        Command::Study {
            config,
            h,
            methods,
            href,
            t_eval,
            output,
        } => cmd_study(&config, &h, &methods, href, t_eval, output),
        Command::Spectrum {
            run,
            config,
            frame,
            bins,
        } => run_dir(run, config).and_then(|d| cmd_spectrum(d, frame, bins)),
        Command::Diag { run, config } => run_dir(run, config).and_then(cmd_diag),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            report(&err);
            ExitCode::from(exit_code(&err))
        }
    }
}
