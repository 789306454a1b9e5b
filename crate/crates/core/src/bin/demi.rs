use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use demi::cli::{self, EvalOptions, Format, VerifyOptions};
use demi::Error;

#[derive(Debug, Parser)]
#[command(name = "demi", version, about = "Half-iterates of exp, ln, e^x - 1 and 1 + x^2 to arbitrary precision")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one function at one argument.
    Eval {
        /// psi, ln-half, xi, xi-prime, f, f-prime, f-deriv2, f-deriv4, p, q,
        /// h, h-prime, h-inverse, gh-prime, abel-shift, h-psi, A, A-inverse, A-prime, C
        function: String,
        /// A decimal, e, e-1, e^<decimal>, or a nested call such as xi(1).
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 40)]
        digits: u32,
        /// Number of series terms for the Abel constant.
        #[arg(long)]
        k: Option<usize>,
        /// Orbit depth for the Abel constant.
        #[arg(long = "N")]
        n: Option<u64>,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Print psi-positive, psi-negative, special or ln-half.
    Table {
        which: String,
        #[arg(long, default_value_t = 40)]
        digits: u32,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Recompute the constants corpus and report matched digits as JSON.
    Verify {
        #[arg(long, default_value_t = 30)]
        digits: u32,
        /// Glob over record names or sections, e.g. 'f*' or 'conj'.
        #[arg(long)]
        only: Option<String>,
        /// Corpus file replacing the built-in one.
        #[arg(long)]
        corpus: Option<std::path::PathBuf>,
    },
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("{}: {}", err.name(), err.detail());
    ExitCode::from(cli::exit_code(err) as u8)
}

fn emit(text: &str) -> ExitCode {
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).and_then(|()| out.flush()).is_err() {
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let max_exponent = std::env::var(cli::MAX_EXPONENT_VAR).ok();
    match cli.command {
        Command::Eval {
            function,
            x,
            digits,
            k,
            n,
            format,
        } => {
            let format: Format = format.parse()?;
            let opts = EvalOptions {
                digits,
                k,
                n,
                max_exponent,
            };
            let record = cli::cmd_eval(&function, &x, &opts)?;
            Ok(emit(&record.render(format)))
        }
        Command::Table { which, digits, format } => {
            let format: Format = format.parse()?;
            let rows = cli::cmd_table(&which, digits, max_exponent.as_deref())?;
            Ok(emit(&cli::render_table(&rows, format)))
        }
        Command::Verify { digits, only, corpus } => {
            let corpus = corpus
                .map(|path| {
                    std::fs::read_to_string(&path)
                        .map_err(|e| Error::Corpus(format!("cannot read {}: {e}", path.display())))
                })
                .transpose()?;
            let report = cli::cmd_verify(&VerifyOptions {
                digits,
                only,
                corpus,
                max_exponent,
            })?;
            for r in report.records.iter().filter(|r| !r.pass) {
                match &r.error {
                    Some(e) => eprintln!("mismatch: {} failed ({e})", r.name),
                    None => eprintln!(
                        "mismatch: {} matched {} of {} digits",
                        r.name,
                        r.matched_digits.unwrap_or(0),
                        r.threshold
                    ),
                }
            }
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            let code = emit(&format!("{json}\n"));
            Ok(if report.all_passed() { code } else { ExitCode::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("ParseError: {e}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
