use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thinflow::runner::{self, Options, Outcome, StudyConfig};
use thinflow::Error;

#[derive(Debug, Parser)]
#[command(
    name = "thinflow",
    version,
    about = "Vortex-thinning studies on the 2D Euler equations",
    after_help = "Modes: simulate, transfer, classify, prescribed, zlatos, stability, gluing, selftest, resume.\n\
                  The default output root is $THINFLOW_OUT, else ./runs."
)]
struct Cli {
    /// Study mode, or `resume`.
    mode: String,

    /// Run directory to resume (alternative to --resume).
    run_dir: Option<PathBuf>,

    /// TOML config; defaults are used for every missing key.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output root under which the run directory is created.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Continue the run in this directory from its last checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,

    /// Member runs executed concurrently by sweep modes.
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    /// Worker threads inside a run; more than one waives bitwise determinism.
    #[arg(long, default_value_t = 1)]
    threads: usize,

    /// Stop at the first checkpoint at or after this time.
    #[arg(long)]
    halt_at: Option<f64>,
}

fn report(e: &Error) -> ExitCode {
    let line = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    eprintln!("{line}");
    ExitCode::from(e.exit_code() as u8)
}

fn run(cli: Cli) -> Result<(), Error> {
    if cli.threads > 1 {
        log::warn!("{} threads inside a run: outputs are not guaranteed bit-identical", cli.threads);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
        .map_err(|e| Error::config(format!("cannot start thread pool: {e}")))?;
    let opts = Options {
        halt_at: cli.halt_at,
        jobs: cli.jobs,
        threads: cli.threads,
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let resume_dir = cli.resume.clone().or(cli.run_dir.clone());
    let (outcome, dir) = if cli.mode == "resume" || cli.resume.is_some() {
        let dir = resume_dir.ok_or_else(|| Error::config("resume needs a run directory"))?;
        let mode = (cli.mode != "resume").then_some(cli.mode.as_str());
        (runner::resume(&dir, mode, &opts, &mut out)?, dir)
    } else {
        if cli.run_dir.is_some() {
            return Err(Error::config("unexpected positional argument; use --resume <dir> to resume"));
        }
        let cfg = match &cli.config {
            Some(p) => StudyConfig::load(p)?,
            None => StudyConfig::default(),
        };
        let root = runner::output_root(cli.out.as_deref());
        runner::execute(&cli.mode, &cfg, &root, &opts, &mut out)?
    };
    let word = match outcome {
        Outcome::Finished => "finished",
        Outcome::Halted => "halted",
        Outcome::AlreadyComplete => "already complete",
    };
    writeln!(out, "{word}: {}", dir.display()).map_err(|e| Error::io("<stdout>", e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return report(&Error::config(first.to_string()));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
