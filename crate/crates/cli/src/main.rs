use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use treekernel::{Grid, KernelAlgorithm, TreeMode};
use treekernel_cli::bench::{
    checksum_mismatches, default_scaling_path, grid_datasets, load_datasets, run_bench,
    BenchOptions,
};
use treekernel_cli::{
    cmd_gram, cmd_generate, cmd_kernel, with_threads, CliError, CliResult, GenerateArgs,
    GramArgs, KernelArgs,
};

/// SubTree kernels of tree languages via root-weighted tree automata.
#[derive(Parser, Debug)]
#[command(name = "treekernel", version)]
struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write one dataset file per config of a grid.
    Generate {
        /// DS1, DS2 or DS3.
        #[arg(long)]
        grid: Grid,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = TreeMode::Ordered)]
        mode: TreeMode,
        /// Trees per dataset (default 100).
        #[arg(long)]
        cardinal: Option<usize>,
        /// Maximum nodes per tree.
        #[arg(long)]
        node_budget: Option<usize>,
    },
    /// Print the kernel of two tree files.
    Kernel {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = KernelAlgorithm::Automata)]
        algorithm: KernelAlgorithm,
        /// Run every applicable algorithm and fail on disagreement.
        #[arg(long)]
        verify: bool,
        /// Overrides the mode recorded in the files (default ordered).
        #[arg(long)]
        mode: Option<TreeMode>,
    },
    /// Time all tree pairs of each dataset and write CSV.
    Bench {
        /// Generate the datasets of this grid in memory.
        #[arg(long, required_unless_present = "data", conflicts_with = "data")]
        grid: Option<Grid>,
        /// Directory of .trees files.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Comma-separated algorithms.
        #[arg(long, value_delimiter = ',', default_value = "automata,oracle,moschitti")]
        algorithm: Vec<KernelAlgorithm>,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
        /// Per-size timing CSV (default: <out stem>_scaling.csv).
        #[arg(long)]
        scaling_out: Option<PathBuf>,
        #[arg(long)]
        mode: Option<TreeMode>,
        /// Timed runs per pair; the median is kept.
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
    /// Gram matrix of tree files as CSV.
    Gram {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = KernelAlgorithm::Automata)]
        algorithm: KernelAlgorithm,
        /// One item per tree instead of one per file.
        #[arg(long)]
        per_tree: bool,
        /// Output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        mode: Option<TreeMode>,
    },
}

fn create(path: &PathBuf) -> CliResult<File> {
    File::create(path).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e,
    })
}

fn run(cli: Cli) -> CliResult<()> {
    let threads = cli.threads;
    match cli.command {
        Command::Generate {
            grid,
            seed,
            out,
            mode,
            cardinal,
            node_budget,
        } => {
            let args = GenerateArgs {
                grid,
                seed,
                out,
                mode,
                cardinal,
                node_budget,
            };
            for f in with_threads(threads, || cmd_generate(&args))?? {
                eprintln!(
                    "{}: {} trees, average size {:.1}",
                    f.path.display(),
                    f.trees,
                    f.avg_size
                );
            }
        }
        Command::Kernel {
            x,
            y,
            algorithm,
            verify,
            mode,
        } => {
            let args = KernelArgs {
                x,
                y,
                algorithm,
                verify,
                mode,
            };
            let out = with_threads(threads, || cmd_kernel(&args))??;
            println!("{}", out.value);
            if verify {
                let runs: Vec<String> = out.runs.iter().map(|(a, v)| format!("{a}={v}")).collect();
                eprintln!("verified: {}", runs.join(" "));
            }
        }
        Command::Bench {
            grid,
            data,
            seed,
            algorithm,
            out,
            scaling_out,
            mode,
            repeats,
        } => {
            let datasets = match (grid, data) {
                (Some(g), _) => grid_datasets(g, seed, mode.unwrap_or_default())?,
                (None, Some(dir)) => load_datasets(&dir, mode)?,
                (None, None) => unreachable!("clap requires one of --grid and --data"),
            };
            let scaling_path = scaling_out.unwrap_or_else(|| default_scaling_path(&out));
            let mut records = csv::Writer::from_writer(create(&out)?);
            let mut scaling = csv::Writer::from_writer(create(&scaling_path)?);
            let options = BenchOptions {
                algorithms: algorithm,
                repeats,
            };
            let results = with_threads(threads, || {
                run_bench(&datasets, &options, &mut records, &mut scaling)
            })??;
            for r in &results {
                eprintln!(
                    "{} {}: {} pairs, {:.3e} s/pair, checksum {:016x}",
                    r.config_id, r.algorithm, r.pair_count, r.avg_time_s, r.checksum
                );
            }
            let bad = checksum_mismatches(&results);
            if !bad.is_empty() {
                return Err(CliError::Verification(format!(
                    "algorithms disagree on {}",
                    bad.join(", ")
                )));
            }
        }
        Command::Gram {
            files,
            algorithm,
            per_tree,
            out,
            mode,
        } => {
            let args = GramArgs {
                files,
                algorithm,
                mode,
                per_tree,
            };
            let gram = with_threads(threads, || cmd_gram(&args))??;
            let text = gram.to_csv();
            match out {
                Some(path) => {
                    create(&path)?
                        .write_all(text.as_bytes())
                        .map_err(|e| CliError::Io { path, source: e })?;
                }
                None => {
                    let _ = io::stdout().write_all(text.as_bytes());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("treekernel: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
