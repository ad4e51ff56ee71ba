use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mor_cli::bench::{self, DEFAULT_GRID};
use mor_cli::commands::{self, MessageSource};
use mor_cli::config::RawConfig;
use mor_cli::selftest::{self, Fault};
use mor_cli::{CliError, CliResult};
use mor_core::Execution;

/// MOR cryptosystem over SL and Sp matrix groups, with the linear
/// decomposition attack.
#[derive(Debug, Parser)]
#[command(name = "mor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GroupArgs {
    /// Platform group family: sl, sp or custom.
    #[arg(long)]
    family: Option<String>,
    /// Matrix degree.
    #[arg(long)]
    d: Option<usize>,
    /// Odd prime field size.
    #[arg(long)]
    p: Option<u64>,
    /// Generator file (kind "group") for the custom family.
    #[arg(long)]
    group: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate public.json and private.json.
    Keygen {
        #[command(flatten)]
        group: GroupArgs,
        /// Private exponent t is drawn from [2, t-cap].
        #[arg(long)]
        t_cap: Option<u64>,
        /// Length of the random word defining the conjugator.
        #[arg(long)]
        word_len: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Encrypt a group element under a public key.
    Encrypt {
        /// Public key file.
        #[arg(long)]
        key: PathBuf,
        /// Message as a word in the generators, 1-based, negative for inverses ("1 -2 3").
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        message: Option<String>,
        /// Message file (kind "message").
        #[arg(long = "in", value_name = "FILE")]
        input: Option<PathBuf>,
        /// Ephemeral exponent r is drawn from [2, r-cap].
        #[arg(long)]
        r_cap: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "ciphertext.json")]
        out: PathBuf,
    },
    /// Decrypt a ciphertext with a private key and print the message.
    Decrypt {
        /// Private key file.
        #[arg(long)]
        key: PathBuf,
        /// Ciphertext file.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Also write the message file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the plaintext from the public key and ciphertext only.
    Attack {
        /// Public key file.
        #[arg(long)]
        key: PathBuf,
        /// Ciphertext file.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Search bound for the discrete logarithm.
        #[arg(long)]
        bound: Option<u64>,
        /// Also write the recovered message file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run keygen, encrypt and attack over a grid and print CSV.
    Bench {
        /// Comma-separated family:d:p cells.
        #[arg(long, default_value = DEFAULT_GRID)]
        grid: String,
        #[arg(long)]
        t_cap: Option<u64>,
        #[arg(long)]
        r_cap: Option<u64>,
        #[arg(long)]
        word_len: Option<usize>,
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant checks.
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Keygen {
            group,
            t_cap,
            word_len,
            seed,
            out,
        } => {
            let config = RawConfig {
                family: group.family,
                d: group.d,
                p: group.p,
                t_cap,
                word_len,
                seed,
                group_file: group.group,
                ..RawConfig::default()
            }
            .resolve()?;
            let (public, private) = commands::cmd_keygen(&config, &out)?;
            writeln!(stdout, "wrote {} and {}", public.display(), private.display()).ok();
        }
        Command::Encrypt {
            key,
            message,
            input,
            r_cap,
            seed,
            out,
        } => {
            let config = RawConfig {
                r_cap,
                seed,
                ..RawConfig::default()
            }
            .resolve()?;
            let source = match (message, input) {
                (Some(word), None) => MessageSource::Word(word),
                (None, Some(path)) => MessageSource::File(path),
                _ => return Err(CliError::Param("give exactly one of --message and --in".into())),
            };
            commands::cmd_encrypt(&config, &key, &source, &out)?;
            writeln!(stdout, "wrote {}", out.display()).ok();
        }
        Command::Decrypt { key, input, out } => {
            commands::cmd_decrypt(&key, &input, out.as_deref(), &mut stdout)?;
        }
        Command::Attack {
            key,
            input,
            bound,
            out,
        } => {
            let config = RawConfig {
                bound,
                ..RawConfig::default()
            }
            .resolve()?;
            commands::cmd_attack(&key, &input, config.bsgs_bound, out.as_deref(), &mut stdout)?;
        }
        Command::Bench {
            grid,
            t_cap,
            r_cap,
            word_len,
            bound,
            seed,
            out,
        } => {
            let config = RawConfig {
                t_cap,
                r_cap,
                word_len,
                bound,
                seed,
                ..RawConfig::default()
            }
            .resolve()?;
            let cells = bench::parse_grid(&grid)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path)
                        .map_err(|e| CliError::Param(format!("{}: {e}", path.display())))?;
                    bench::cmd_bench(&cells, &config, Execution::default(), file)?;
                }
                None => {
                    bench::cmd_bench(&cells, &config, Execution::default(), &mut stdout)?;
                }
            }
        }
        Command::Selftest { seed, inject_fault } => {
            let fault = Fault {
                tamper_ciphertext: inject_fault,
            };
            selftest::cmd_selftest(seed.unwrap_or_default(), fault, &mut stdout)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
