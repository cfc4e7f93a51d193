use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use eqrw_core::dataset::{self, BuildConfig, PruneRules};
use eqrw_core::{axioms, check, parse, parse_sequence, prove, Expr, GenConfig, SearchConfig, NOT_EQUAL};

#[derive(Parser)]
#[command(
    name = "eqrw",
    version,
    about = "Program-equivalence rewrite engine and dataset generator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corpus of (A, B, sequence) samples.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50_000)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        /// Fraction of raw samples produced as corrupted Not_equal pairs.
        #[arg(long, default_value_t = 0.0)]
        not_equal_frac: f64,
        /// Probability of dropping a sample whose proof has 1 or 2 steps.
        #[arg(long, default_value_t = 0.5)]
        drop_short: f64,
    },
    /// Check that SEQ rewrites program A into program B.
    ///
    /// A and B are files holding one program each, or program text.
    Check { a: String, seq: String, b: String },
    /// Search for a rewrite sequence from A to B.
    Prove {
        a: String,
        b: String,
        #[arg(long, default_value_t = 5)]
        max_steps: usize,
        /// Maximum number of programs expanded.
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
    },
    /// Print category usage and size histograms of a corpus file.
    Stats { file: PathBuf },
    /// Shuffle a corpus file and write FILE.train, FILE.val and FILE.test.
    Split {
        file: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        train: f64,
        #[arg(long, default_value_t = 0.1)]
        val: f64,
        #[arg(long, default_value_t = 0.1)]
        test: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the axiom catalog as a tab-separated table.
    Catalog,
}

fn load_program(arg: &str) -> Result<Expr> {
    let text = if FsPath::new(arg).is_file() {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    } else {
        arg.to_string()
    };
    parse(text.trim()).with_context(|| format!("parsing program `{}`", text.trim()))
}

fn read_corpus(path: &FsPath) -> Result<Vec<eqrw_core::SampleTuple>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    dataset::read(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn write_corpus(path: &FsPath, samples: &[eqrw_core::SampleTuple]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    dataset::write(BufWriter::new(file), samples).with_context(|| format!("writing {}", path.display()))
}

fn with_suffix(path: &FsPath, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            seed,
            count,
            out,
            not_equal_frac,
            drop_short,
        } => {
            let cfg = BuildConfig {
                not_equal_frac,
                prune: PruneRules {
                    drop_short_fraction: drop_short,
                    ..PruneRules::default()
                },
                ..BuildConfig::new(GenConfig::with_seed(seed))
            };
            let corpus = dataset::build(&cfg, count)?;
            write_corpus(&out, &corpus.samples)?;
            println!(
                "wrote {} samples to {} ({} drawn, drop_short {:.1}%)",
                corpus.samples.len(),
                out.display(),
                corpus.attempts,
                100.0 * drop_short
            );
            for (reason, n) in &corpus.rejected {
                println!("  rejected {reason:?}: {n}");
            }
            print!("{}", dataset::stats(&corpus.samples));
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { a, seq, b } => {
            let a = load_program(&a)?;
            let b = load_program(&b)?;
            let seq = parse_sequence(&seq)?;
            let verdict = check(&a, &seq, &b);
            println!("{verdict}");
            Ok(if verdict.is_proven() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Prove {
            a,
            b,
            max_steps,
            budget,
        } => {
            let a = load_program(&a)?;
            let b = load_program(&b)?;
            let cfg = SearchConfig {
                max_steps,
                max_expansions: budget,
                time_budget: None,
            };
            match prove(&a, &b, &cfg) {
                Ok(seq) => {
                    println!("{seq}");
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    println!("{NOT_EQUAL}");
                    eprintln!("{e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Stats { file } => {
            let samples = read_corpus(&file)?;
            print!("{}", dataset::stats(&samples));
            Ok(ExitCode::SUCCESS)
        }
        Command::Split {
            file,
            train,
            val,
            test,
            seed,
        } => {
            let samples = read_corpus(&file)?;
            let parts = dataset::split(&samples, [train, val, test], seed)?;
            for (suffix, part) in [
                ("train", &parts.train),
                ("val", &parts.validation),
                ("test", &parts.test),
            ] {
                let path = with_suffix(&file, suffix);
                write_corpus(&path, part)?;
                println!("{}\t{}", path.display(), part.len());
            }
            println!(
                "test pairs with a program unseen in train: {:.1}%",
                100.0 * dataset::novelty(&parts.train, &parts.test)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Catalog => {
            print!("{}", axioms::catalog_table());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
