//! `smoothfem`: tabulate, export and verify `C^m-P_k^(n)` degree-of-freedom sets.

mod commands;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "smoothfem",
    version,
    about = "Nodal DOF sets of C^m-P_k^(n) simplicial elements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate the DOF groups and print them as a report, JSON or CSV.
    Generate(CommonArgs),
    /// Check the assignment against the closed-form counts and dim P_k.
    Verify(CommonArgs),
    /// Assemble the element and check that its functionals are unisolvent.
    Unisolvency(UnisolvencyArgs),
    /// Two-cell jump test of values and normal derivatives across a facet.
    Continuity(CommonArgs),
    /// Count sweep; -n, -m and -k1 are the upper bounds.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Space dimension n.
    #[arg(short = 'n', long = "dim", allow_negative_numbers = true)]
    pub dim: i64,
    /// Smoothness m.
    #[arg(short = 'm', long = "smoothness", allow_negative_numbers = true)]
    pub smoothness: i64,
    /// Degree excess k1 (also accepted as -k1), k = m 2^n + 1 + k1.
    #[arg(long = "excess", default_value_t = 0, allow_negative_numbers = true)]
    pub excess: i64,
    #[arg(long, value_enum, default_value_t = Format::Paper)]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Prepend the index-study lines for the facet opposite vertex 0.
    #[arg(long)]
    pub debug_face_checks: bool,
}

#[derive(Args, Debug, Clone)]
pub struct UnisolvencyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Residual bound on max|V C - I|.
    #[arg(long, default_value_t = smoothfem_core::verify::UNISOLVENCY_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[arg(
        short = 'n',
        long = "dim",
        default_value_t = 4,
        allow_negative_numbers = true
    )]
    pub dim: i64,
    #[arg(
        short = 'm',
        long = "smoothness",
        default_value_t = 4,
        allow_negative_numbers = true
    )]
    pub smoothness: i64,
    #[arg(long = "excess", default_value_t = 2, allow_negative_numbers = true)]
    pub excess: i64,
    #[arg(long, value_enum, default_value_t = Format::Paper)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Paper,
    Json,
    Csv,
}

/// Rewrites the `-k1` spelling into `--excess`.
fn normalize_args(args: impl IntoIterator<Item = OsString>) -> Vec<OsString> {
    args.into_iter()
        .map(|a| match a.to_str() {
            Some("-k1") => OsString::from("--excess"),
            Some(s) if s.starts_with("-k1=") => OsString::from(format!("--excess={}", &s[4..])),
            _ => a,
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(normalize_args(std::env::args_os())) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    ExitCode::from(commands::run(cli.command))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(normalize_args(args.iter().map(OsString::from)))
    }

    #[test]
    fn k1_spellings() {
        for args in [
            vec!["smoothfem", "generate", "-n", "3", "-m", "3", "-k1", "2"],
            vec!["smoothfem", "generate", "-n", "3", "-m", "3", "-k1=2"],
            vec![
                "smoothfem",
                "generate",
                "--dim",
                "3",
                "--smoothness",
                "3",
                "--excess",
                "2",
            ],
        ] {
            let Command::Generate(a) = parse(&args).unwrap().command else {
                panic!("wrong subcommand");
            };
            assert_eq!((a.dim, a.smoothness, a.excess), (3, 3, 2));
            assert_eq!(a.format, Format::Paper);
        }
    }

    #[test]
    fn negative_values_reach_validation() {
        let Command::Generate(a) =
            parse(&["smoothfem", "generate", "-n", "2", "-m", "1", "-k1", "-1"])
                .unwrap()
                .command
        else {
            panic!("wrong subcommand");
        };
        assert_eq!(a.excess, -1);
    }

    #[test]
    fn usage_errors() {
        assert!(parse(&["smoothfem", "generate", "-m", "1"]).is_err());
        assert!(parse(&[
            "smoothfem",
            "generate",
            "-n",
            "2",
            "-m",
            "1",
            "--format",
            "xml"
        ])
        .is_err());
        assert!(parse(&["smoothfem", "frobnicate"]).is_err());
    }

    #[test]
    fn sweep_defaults() {
        let Command::Sweep(a) = parse(&["smoothfem", "sweep"]).unwrap().command else {
            panic!("wrong subcommand");
        };
        assert_eq!((a.dim, a.smoothness, a.excess), (4, 4, 2));
    }
}
