use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;
use ultradyn_cli::corpus::{self, Corpus};
use ultradyn_cli::request::{AnalysisRequest, Overrides, RequestFile};
use ultradyn_cli::{render_json, report, selftest, CliError, CliResult, EXIT_OK, EXIT_PROPERTY};

const SHIPPED_CORPUS: &str = include_str!("../corpus/examples.json");

#[derive(Parser)]
#[command(name = "ultradyn", version, about = "Exact dynamics of linear maps over Q_p and F_q((t))")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose, classify and measure one matrix
    Analyze {
        /// Request file (JSON); `-` reads standard input
        request: PathBuf,
        /// Field name such as Q_5 or F_2((t))
        #[arg(long)]
        field: Option<String>,
        /// Absolute precision N (at least 4)
        #[arg(long)]
        precision: Option<i64>,
        /// ε = q^e for the adapted norm
        #[arg(long, allow_hyphen_values = true)]
        epsilon_exp: Option<i64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Random vectors and lattice perturbations
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated subset of decompose,classify,norm,scale,tidy,kernel,bigcell,orbit
        #[arg(long, value_delimiter = ',')]
        outputs: Option<Vec<String>>,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an example corpus and compare against its expectations
    Corpus {
        /// Corpus file; the built-in example corpus when omitted
        path: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run cases one after another
        #[arg(long)]
        serial: bool,
    },
    /// Run the seeded property suites
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Matrix sizes, comma separated
        #[arg(long, value_delimiter = ',', default_values_t = selftest::DEFAULT_SIZES)]
        sizes: Vec<usize>,
        /// Fields, comma separated
        #[arg(long = "field", value_delimiter = ',')]
        fields: Option<Vec<String>>,
        #[arg(long, default_value_t = 40)]
        precision: i64,
        /// Planted matrices per field and size
        #[arg(long, default_value_t = 10)]
        matrices: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        epsilon_exp: i64,
        #[arg(long)]
        serial: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_input(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| CliError::Input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

fn emit(v: &Value, out: Option<&Path>) -> CliResult<()> {
    let text = render_json(v);
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn error_report(command: &str, e: &CliError) -> Value {
    serde_json::json!({ "command": command, "status": "error", "error": e.to_json() })
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Analyze {
            request,
            field,
            precision,
            epsilon_exp,
            seed,
            trials,
            outputs,
            out,
        } => {
            let built = read_input(&request).and_then(|text| RequestFile::from_json(&text)).and_then(|file| {
                AnalysisRequest::build(
                    file,
                    Overrides {
                        field,
                        precision,
                        epsilon_exp,
                        seed,
                        trials,
                        outputs,
                    },
                )
            });
            let (doc, code) = match built {
                Ok(req) => report::analyze(&req),
                Err(e) => (error_report("analyze", &e), e.exit_code()),
            };
            emit(&doc, out.as_deref())?;
            Ok(code)
        }
        Command::Corpus { path, out, serial } => {
            let text = match path {
                Some(p) => read_input(&p)?,
                None => SHIPPED_CORPUS.to_string(),
            };
            let c = Corpus::from_json(&text)?;
            let (doc, ok) = corpus::run(&c, !serial);
            eprint!("{}", corpus::table(&doc));
            emit(&doc, out.as_deref())?;
            Ok(if ok { EXIT_OK } else { EXIT_PROPERTY })
        }
        Command::Selftest {
            seed,
            sizes,
            fields,
            precision,
            matrices,
            trials,
            epsilon_exp,
            serial,
            out,
        } => {
            if precision < 4 || trials == 0 || matrices == 0 || sizes.iter().any(|&n| n < 2) {
                return Err(CliError::Input(
                    "need precision >= 4, trials >= 1, matrices >= 1 and sizes >= 2".into(),
                ));
            }
            let mut opts = selftest::Options {
                seed,
                sizes,
                precision,
                matrices,
                trials,
                epsilon_exp,
                concurrent: !serial,
                ..Default::default()
            };
            if let Some(f) = fields {
                opts.fields = f;
            }
            let (doc, ok) = selftest::run(&opts)?;
            emit(&doc, out.as_deref())?;
            Ok(if ok { EXIT_OK } else { EXIT_PROPERTY })
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
