use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use msr_cli::{commands, CliError};

#[derive(Parser)]
#[command(
    name = "msr",
    version,
    about = "Shard files with an optimal-access MSR code"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CodeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    d: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Lines,
}

#[derive(Subcommand)]
enum Command {
    /// Split a file into n shards
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Rebuild the original file from any k shards
    Decode {
        #[arg(long)]
        shards: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild one lost shard from d helpers
    Repair {
        #[arg(long)]
        failed: usize,
        #[arg(long)]
        shards: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the MDS, repair and coefficient properties of a code
    Verify {
        #[command(flatten)]
        code: CodeArgs,
        /// Enumerate every pattern regardless of the budget
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the derived parameters
    Params {
        #[command(flatten)]
        code: CodeArgs,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Encode {
            code,
            input,
            out_dir,
        } => {
            println!(
                "{}",
                commands::encode(code.n, code.k, code.d, &input, &out_dir)?
            );
        }
        Command::Decode { shards, out } => println!("{}", commands::decode(&shards, &out)?),
        Command::Repair {
            failed,
            shards,
            out,
        } => println!("{}", commands::repair(failed, &shards, &out)?),
        Command::Verify {
            code,
            exhaustive,
            trials,
            format,
        } => {
            let report = commands::verify(code.n, code.k, code.d, exhaustive, trials)?;
            match format {
                Format::Text => println!("{report}"),
                Format::Lines => print!("{}", report.to_lines()),
            }
            if !report.passed() {
                let names: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
                return Err(CliError::Verification(names.join(", ")));
            }
        }
        Command::Params { code } => print!("{}", commands::params(code.n, code.k, code.d)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
