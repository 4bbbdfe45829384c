use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use accel_entangle::scenario::{figure_preset, metadata, run_scenario, Scenario, PRESETS};
use accel_entangle::validation::{run_suite, Suite};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

/// Number of worker threads; results do not depend on it.
const THREADS_VAR: &str = "ACCEL_ENTANGLE_THREADS";

#[derive(Parser)]
#[command(name = "accel-entangle", version, about = "Entanglement dynamics of two accelerated detectors")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file and write the CSV plus a `.meta` sidecar.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in figure preset.
    Preset {
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an acceptance suite; exits nonzero if any criterion fails.
    Validate {
        #[arg(long, value_enum)]
        suite: SuiteArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Oracle,
    Identity,
    Window,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Oracle => Suite::Oracle,
            SuiteArg::Identity => Suite::Identity,
            SuiteArg::Window => Suite::Window,
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().with_context(|| format!("{THREADS_VAR}={raw:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn emit(s: &Scenario, out: &Path) -> Result<()> {
    let table = run_scenario(s).with_context(|| format!("scenario {}", s.name))?;
    fs::write(out, table.to_csv()).with_context(|| format!("writing {}", out.display()))?;
    let meta = meta_path(out);
    fs::write(&meta, metadata(s, &table)).with_context(|| format!("writing {}", meta.display()))?;
    eprintln!("{}: {} rows -> {}", s.name, table.rows.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    match cli.cmd {
        Cmd::Run { scenario, out } => {
            let text = fs::read_to_string(&scenario).with_context(|| format!("reading {}", scenario.display()))?;
            let s = Scenario::parse(&text).with_context(|| format!("parsing {}", scenario.display()))?;
            emit(&s, &out)?;
        }
        Cmd::Preset { name, out } => {
            if !PRESETS.contains(&name.as_str()) {
                bail!("unknown preset {name:?}; known: {}", PRESETS.join(", "));
            }
            emit(&figure_preset(&name)?, &out)?;
        }
        Cmd::Validate { suite } => {
            let results = run_suite(suite.into());
            for c in &results {
                println!("{c}");
            }
            let failed = results.iter().filter(|c| !c.passed).count();
            println!("{} of {} criteria passed", results.len() - failed, results.len());
            return Ok(failed == 0);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
