//! Command line front end for the hyperbolic controller form toolkit.
//!
//! Exit codes: 0 success, 1 invalid input, 2 reduction failed (a legitimate
//! mathematical outcome), 3 verification failure in `check`.

use clap::{Args, Parser, Subcommand};
use hcf_core::document::{self, SystemDocument};
use hcf_core::pipeline::{self, FaultSpec, PipelineOptions, ReportFormat};
use hcf_core::scalars::parse_rational;
use hcf_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hcf",
    about = "Compute hyperbolic controller forms for boundary-coupled transport systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Working precision in decimal digits.
    #[arg(long, default_value_t = 50)]
    precision: u32,
    /// Tolerance of the pole-cancellation certificate.
    #[arg(long, default_value = "1e-20")]
    tol_entire: String,
    /// Tolerance of the sampled identity checks.
    #[arg(long, default_value = "1e-20")]
    tol_oracle: String,
    /// Reduction pass budget (0 = twice the matrix size).
    #[arg(long, default_value_t = 0)]
    passes: usize,
    /// Seed for sample points and generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output format: text, json-like or latex.
    #[arg(long, default_value = "text")]
    format: String,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the reduction pipeline and emit the controller form report.
    Reduce {
        /// Input document (JSON); `-` reads stdin.
        input: Option<PathBuf>,
        /// Use a built-in fixture instead of an input file.
        #[arg(long, value_name = "NAME")]
        demo: Option<String>,
        /// Skip the reduction sweep (diagnostic: surfaces the rank failure).
        #[arg(long)]
        no_reduction: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the pipeline and certify every identity numerically.
    Check {
        input: Option<PathBuf>,
        #[arg(long, value_name = "NAME")]
        demo: Option<String>,
        /// Inject a single-coefficient fault before verification.
        #[arg(long)]
        inject_fault: bool,
        /// Seed selecting the fault site.
        #[arg(long, default_value_t = 0)]
        fault_seed: u64,
        /// Relative fault magnitude.
        #[arg(long, default_value = "1e-10")]
        fault_magnitude: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate a random system document within the class bounds.
    Gen {
        /// Number of boundary states (n <= 6).
        #[arg(long, default_value_t = 3)]
        states: usize,
        /// Number of backward channels (m <= 4).
        #[arg(long, default_value_t = 2)]
        channels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named built-in fixture (currently: strings).
    Demo {
        name: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn load_document(
    input: &Option<PathBuf>,
    demo: &Option<String>,
) -> Result<SystemDocument, Error> {
    if let Some(name) = demo {
        return demo_document(name);
    }
    let Some(path) = input else {
        return Err(Error::Schema(
            "no input given: pass a document path, `-` for stdin, or --demo strings".into(),
        ));
    };
    let text = if path.as_os_str() == "-" {
        use std::io::Read;
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Schema(format!("stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?
    };
    SystemDocument::from_json(&text)
}

fn demo_document(name: &str) -> Result<SystemDocument, Error> {
    match name {
        "strings" => Ok(document::strings_demo_document()),
        other => Err(Error::Schema(format!(
            "unknown demo '{other}' (available: strings)"
        ))),
    }
}

fn options_from(common: &CommonOpts, doc: &SystemDocument) -> Result<PipelineOptions, Error> {
    let mut o = PipelineOptions::from_document(doc)?;
    o.digits = common.precision;
    o.tol_entire = parse_rational(&common.tol_entire)
        .ok_or_else(|| Error::Schema(format!("bad --tol-entire '{}'", common.tol_entire)))?;
    o.tol_oracle = parse_rational(&common.tol_oracle)
        .ok_or_else(|| Error::Schema(format!("bad --tol-oracle '{}'", common.tol_oracle)))?;
    if common.passes > 0 {
        o.pass_budget = common.passes;
    }
    o.seed = common.seed;
    Ok(o)
}

fn write_out(common: &CommonOpts, text: &str) -> Result<(), Error> {
    match &common.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display()))),
    }
}

fn exit_for(err: &Error) -> ExitCode {
    let code = match err {
        Error::NotReducible(_) | Error::ReductionDiverged(_) => 2,
        _ => 1,
    };
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn cmd_reduce(
    input: Option<PathBuf>,
    demo: Option<String>,
    no_reduction: bool,
    common: CommonOpts,
) -> ExitCode {
    let run = || -> Result<String, Error> {
        let doc = load_document(&input, &demo)?;
        let mut options = options_from(&common, &doc)?;
        options.no_reduction = no_reduction;
        let format: ReportFormat = common.format.parse()?;
        let out = pipeline::run(&doc, options)?;
        Ok(pipeline::emit_report(&out, None, format))
    };
    match run() {
        Ok(text) => match write_out(&common, &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => exit_for(&e),
        },
        Err(e) => exit_for(&e),
    }
}

fn cmd_check(
    input: Option<PathBuf>,
    demo: Option<String>,
    inject_fault: bool,
    fault_seed: u64,
    fault_magnitude: String,
    common: CommonOpts,
) -> ExitCode {
    let run = || -> Result<(String, bool), Error> {
        let doc = load_document(&input, &demo)?;
        let options = options_from(&common, &doc)?;
        let format: ReportFormat = common.format.parse()?;
        let out = pipeline::run(&doc, options)?;
        let fault = if inject_fault {
            Some(FaultSpec {
                magnitude: parse_rational(&fault_magnitude).ok_or_else(|| {
                    Error::Schema(format!("bad --fault-magnitude '{fault_magnitude}'"))
                })?,
                seed: fault_seed,
            })
        } else {
            None
        };
        let verdict = pipeline::verify(&out, fault.as_ref())?;
        let text = pipeline::emit_report(&out, Some(&verdict), format);
        Ok((text, verdict.pass()))
    };
    match run() {
        Ok((text, pass)) => {
            if let Err(e) = write_out(&common, &text) {
                return exit_for(&e);
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: verification failed");
                ExitCode::from(3)
            }
        }
        Err(e) => exit_for(&e),
    }
}

fn cmd_gen(states: usize, channels: usize, seed: u64, out: Option<PathBuf>) -> ExitCode {
    match document::generate_document(seed, states, channels) {
        Ok(doc) => {
            let text = doc.to_json();
            let res = match out {
                None => {
                    println!("{text}");
                    Ok(())
                }
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| Error::Schema(format!("{}: {e}", path.display()))),
            };
            match res {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => exit_for(&e),
            }
        }
        Err(e) => exit_for(&e),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Reduce { input, demo, no_reduction, common } => {
            cmd_reduce(input, demo, no_reduction, common)
        }
        Command::Check {
            input,
            demo,
            inject_fault,
            fault_seed,
            fault_magnitude,
            common,
        } => cmd_check(input, demo, inject_fault, fault_seed, fault_magnitude, common),
        Command::Gen { states, channels, seed, out } => cmd_gen(states, channels, seed, out),
        Command::Demo { name, common } => cmd_reduce(None, Some(name), false, common),
    }
}
