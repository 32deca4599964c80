//! The `trihex` command line.
//!
//! Exit status: 0 pass, 1 fail, 2 usage, 3 parse.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::characterize::characterize;
use crate::error::{Error, Result};
use crate::field::{FieldSpec, Mode};
use crate::hexagon::{Geometry, Hexagon};
use crate::io::{self, Format, RunMetadata};
use crate::subspaces::{
    supported_census, verify_properties, ClosureConfig, PropertyId, VerifyOptions, MAX_CLOSURE_DIM,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;

/// Frontier cap applied at q >= 3 when `--budget` is absent.
pub const DEFAULT_BUDGET: usize = 2000;

#[derive(Debug, Parser)]
#[command(
    name = "trihex",
    version,
    about = "Twisted triality hexagon T(q^3,q) in PG(7,q^3)"
)]
pub struct Cli {
    /// Worker threads (default: available cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the line set of T(q^3,q), or of H(q) with --mode splitcayley
    Build {
        #[arg(long)]
        q: u32,
        #[arg(long, value_parser = parse_mode, default_value = "twisted")]
        mode: Mode,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check intersection-number properties of a line set
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated ids among pt,pl,sd,4d,4dp,5d,6d,to, or `all`
        #[arg(long, default_value = "all")]
        properties: String,
    },
    /// Enumerate and classify the supported subspaces of a line set
    ClassifySubspaces {
        #[command(flatten)]
        run: RunArgs,
        /// Largest dimension enumerated
        #[arg(long, default_value_t = MAX_CLOSURE_DIM)]
        max_dim: usize,
    },
    /// Decide whether a line set is a naturally embedded T(q^3,q)
    Characterize {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Report file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Must agree with the file header when given
    #[arg(long)]
    pub q: Option<u32>,
    /// Must agree with the file header when given
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    /// Per-dimension frontier cap for the closure; exhaustive when absent at q = 2,
    /// DEFAULT_BUDGET when absent at q >= 3
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random 4-spaces sampled for (4d')
    #[arg(long, default_value_t = VerifyOptions::default().samples_4dp)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

/// Runs the command line and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("trihex: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::UnsupportedField(_) => EXIT_USAGE,
        Error::Parse { .. } | Error::Io(_) => EXIT_PARSE,
        _ => EXIT_FAIL,
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be positive".into()));
        }
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Build { q, mode, out } => cmd_build(q, mode, out),
        Command::Verify { run, properties } => cmd_verify(&run, &properties),
        Command::ClassifySubspaces { run, max_dim } => cmd_classify(&run, max_dim),
        Command::Characterize { run } => cmd_characterize(&run),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_build(q: u32, mode: Mode, out: Option<PathBuf>) -> Result<i32> {
    if mode == Mode::Twisted && !matches!(q, 2 | 3) {
        return Err(Error::Usage(format!(
            "twisted build supports q in {{2, 3}}, got {q}"
        )));
    }
    let spec = FieldSpec::for_mode(mode, q)?;
    let h = Hexagon::build(&spec)?;
    let g = h.geometry();
    emit(&out, &io::write_line_set(g.field(), g.lines()))?;
    Ok(EXIT_PASS)
}

fn load(run: &RunArgs) -> Result<Geometry> {
    let ls = io::load_line_set(&run.input)?;
    if let Some(q) = run.q {
        if q != ls.field.q() {
            return Err(Error::Usage(format!(
                "--q {q} but the file declares q = {}",
                ls.field.q()
            )));
        }
    }
    if let Some(m) = run.mode {
        if m != ls.field.mode() {
            return Err(Error::Usage(format!(
                "--mode {} but the file declares {}",
                m.as_str(),
                ls.field.mode().as_str()
            )));
        }
    }
    Geometry::from_lines(ls.field, ls.lines)
}

// Exhaustive closure and classification are only affordable at q = 2.
fn effective_budget(run: &RunArgs, geom: &Geometry) -> Option<usize> {
    match run.budget {
        Some(b) => Some(b),
        None if geom.field().q() >= 3 => Some(DEFAULT_BUDGET),
        None => None,
    }
}

fn classify_default(geom: &Geometry) -> bool {
    geom.field().q() == 2
}

fn options(run: &RunArgs, geom: &Geometry) -> VerifyOptions {
    VerifyOptions {
        budget: effective_budget(run, geom),
        seed: run.seed,
        samples_4dp: run.samples,
        classify: classify_default(geom),
    }
}

fn metadata(command: &str, run: &RunArgs, geom: &Geometry, classified: bool) -> RunMetadata {
    RunMetadata {
        tool: "trihex",
        version: io::VERSION,
        command: command.into(),
        q: geom.field().q(),
        mode: geom.field().mode(),
        seed: run.seed,
        budget: effective_budget(run, geom),
        classified,
        samples_4dp: run.samples,
        lines: geom.num_lines(),
    }
}

pub fn cmd_verify(run: &RunArgs, properties: &str) -> Result<i32> {
    let pids = PropertyId::parse_list(properties)?;
    let geom = load(run)?;
    let (reports, census) = verify_properties(&geom, &pids, &options(run, &geom))?;
    let report = io::VerifyReport {
        metadata: metadata("verify", run, &geom, classify_default(&geom)),
        all_passed: reports.iter().all(|r| r.passed()),
        properties: reports,
        classes: census.as_ref().map(io::class_histogram),
    };
    let text = match run.format {
        Format::Json => io::to_json(&report)?,
        Format::Csv => io::verify_csv(&report),
    };
    emit(&run.out, &text)?;
    Ok(if report.all_passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

pub fn cmd_classify(run: &RunArgs, max_dim: usize) -> Result<i32> {
    if !(1..=MAX_CLOSURE_DIM).contains(&max_dim) {
        return Err(Error::Usage(format!(
            "--max-dim must lie in 1..={MAX_CLOSURE_DIM}"
        )));
    }
    let geom = load(run)?;
    let cfg = ClosureConfig {
        max_dim,
        budget: effective_budget(run, &geom),
        seed: run.seed,
        classify: true,
    };
    let census = supported_census(&geom, &cfg)?;
    let clean = census.unclassified_total() == 0 && census.isolated_total() == 0;
    let report = io::ClassifyReport {
        metadata: metadata("classify-subspaces", run, &geom, true),
        census,
    };
    let text = match run.format {
        Format::Json => io::to_json(&report)?,
        Format::Csv => io::classify_csv(&report),
    };
    emit(&run.out, &text)?;
    Ok(if clean { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_characterize(run: &RunArgs) -> Result<i32> {
    let geom = load(run)?;
    let verdict = characterize(&geom, &options(run, &geom))?;
    let report = io::CharacterizeReport {
        metadata: metadata("characterize", run, &geom, false),
        label: verdict.label(),
        characterization: verdict,
    };
    let text = match run.format {
        Format::Json => io::to_json(&report)?,
        Format::Csv => io::characterize_csv(&report),
    };
    emit(&run.out, &text)?;
    Ok(if report.characterization.is_natural() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}
