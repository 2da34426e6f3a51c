//! All-pairs benchmark over tree datasets.
//!
//! Every tree of a dataset is one item. Items are prepared once per
//! algorithm, then all `n(n-1)/2` distinct pairs are evaluated: one untimed
//! warmup pass records kernel values and product sizes, and a timed pass
//! takes the median of `repeats` runs per pair. Reported times are means of
//! those medians.

use std::fs;
use std::hash::Hasher;
use std::hint::black_box;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fnv::FnvHasher;
use rayon::prelude::*;
use treekernel::datagen::header_mode;
use treekernel::gram::Prepared;
use treekernel::{
    expand_grid, generate_language, parse_language, Grid, KernelAlgorithm, KernelValue,
    StAutomaton, TreeLanguage, TreeMode,
};

use crate::{CliError, CliResult};

pub const DATASET_EXTENSION: &str = "trees";

#[derive(Clone, Debug)]
pub struct Dataset {
    pub id: String,
    pub language: TreeLanguage,
}

/// Every `*.trees` file of `dir`, sorted by name.
pub fn load_datasets(dir: &Path, mode: Option<TreeMode>) -> CliResult<Vec<Dataset>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == DATASET_EXTENSION) {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(CliError::Usage(format!(
            "no .{DATASET_EXTENSION} files in {}",
            dir.display()
        )));
    }
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let mode = mode.or_else(|| header_mode(&text)).unwrap_or_default();
            let language = parse_language(&text, mode).map_err(|source| CliError::Input {
                path: path.clone(),
                source,
            })?;
            let id = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            Ok(Dataset { id, language })
        })
        .collect()
}

/// Generates the datasets of a grid in memory.
pub fn grid_datasets(grid: Grid, seed: u64, mode: TreeMode) -> CliResult<Vec<Dataset>> {
    expand_grid(grid, seed)
        .into_iter()
        .map(|mut cfg| {
            cfg.mode = mode;
            Ok(Dataset {
                language: generate_language(&cfg)?,
                id: cfg.id,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub config_id: String,
    pub algorithm: KernelAlgorithm,
    pub pair_count: usize,
    pub avg_time_s: f64,
    pub avg_product_states: f64,
    pub avg_automaton_states: f64,
    pub avg_tree_size: f64,
    pub reduction_ratio: f64,
    pub checksum: u64,
}

impl BenchRecord {
    pub const CSV_HEADER: [&'static str; 9] = [
        "config_id",
        "algorithm",
        "pair_count",
        "avg_time_s",
        "avg_product_states",
        "avg_automaton_states",
        "avg_tree_size",
        "reduction_ratio",
        "checksum",
    ];

    pub fn csv_fields(&self) -> [String; 9] {
        [
            self.config_id.clone(),
            self.algorithm.to_string(),
            self.pair_count.to_string(),
            format!("{:.9e}", self.avg_time_s),
            format!("{:.3}", self.avg_product_states),
            format!("{:.3}", self.avg_automaton_states),
            format!("{:.3}", self.avg_tree_size),
            format!("{:.6}", self.reduction_ratio),
            format!("{:016x}", self.checksum),
        ]
    }
}

/// Mean timing of the pairs whose summed tree size falls in
/// `[2^size_bin, 2^(size_bin+1))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingPoint {
    pub config_id: String,
    pub algorithm: KernelAlgorithm,
    pub size_bin: u32,
    pub pairs: usize,
    pub avg_total_size: f64,
    pub avg_time_s: f64,
}

impl ScalingPoint {
    pub const CSV_HEADER: [&'static str; 6] = [
        "config_id",
        "algorithm",
        "size_bin",
        "pairs",
        "avg_total_size",
        "avg_time_s",
    ];

    pub fn csv_fields(&self) -> [String; 6] {
        [
            self.config_id.clone(),
            self.algorithm.to_string(),
            self.size_bin.to_string(),
            self.pairs.to_string(),
            format!("{:.3}", self.avg_total_size),
            format!("{:.9e}", self.avg_time_s),
        ]
    }
}

/// FNV-1a over `(i, j, value)` of every pair, in pair order.
pub fn checksum(values: &[((usize, usize), KernelValue)]) -> u64 {
    let mut h = FnvHasher::default();
    for &((i, j), v) in values {
        h.write(&(i as u64).to_le_bytes());
        h.write(&(j as u64).to_le_bytes());
        h.write(&v.to_le_bytes());
    }
    h.finish()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    if n == 0 {
        0.0
    } else {
        xs.sum::<f64>() / n as f64
    }
}

/// Benchmarks one algorithm on one dataset.
pub fn bench_dataset(
    dataset: &Dataset,
    algorithm: KernelAlgorithm,
    repeats: usize,
) -> CliResult<(BenchRecord, Vec<ScalingPoint>)> {
    let trees = dataset.language.trees();
    let mode = dataset.language.mode();
    let n = trees.len();
    let repeats = repeats.max(1);

    let sizes: Vec<usize> = trees.iter().map(|t| t.size()).collect();
    let automaton_states: Vec<usize> = trees
        .par_iter()
        .map(|t| StAutomaton::from_tree(t, mode).num_states())
        .collect();
    let items: Vec<Prepared<'_>> = trees
        .par_iter()
        .map(|t| Prepared::from_tree(t, mode, algorithm))
        .collect();

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();

    let warmup = pairs
        .par_iter()
        .map(|&(i, j)| items[i].kernel_with_product_states(&items[j]))
        .collect::<treekernel::Result<Vec<_>>>()?;

    let times = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut runs = Vec::with_capacity(repeats);
            for _ in 0..repeats {
                let start = Instant::now();
                black_box(items[i].kernel(&items[j]))?;
                runs.push(start.elapsed().as_secs_f64());
            }
            Ok(median(runs))
        })
        .collect::<treekernel::Result<Vec<f64>>>()?;

    let values: Vec<((usize, usize), KernelValue)> = pairs
        .iter()
        .zip(&warmup)
        .map(|(&p, &(v, _))| (p, v))
        .collect();

    let avg_tree_size = mean(sizes.iter().map(|&s| s as f64));
    let avg_automaton_states = mean(automaton_states.iter().map(|&s| s as f64));
    let record = BenchRecord {
        config_id: dataset.id.clone(),
        algorithm,
        pair_count: pairs.len(),
        avg_time_s: mean(times.iter().copied()),
        avg_product_states: mean(warmup.iter().map(|&(_, s)| s as f64)),
        avg_automaton_states,
        avg_tree_size,
        reduction_ratio: if avg_tree_size > 0.0 {
            avg_automaton_states / avg_tree_size
        } else {
            0.0
        },
        checksum: checksum(&values),
    };

    let mut bins: Vec<(usize, usize, f64)> = Vec::new();
    for (&(i, j), &t) in pairs.iter().zip(&times) {
        let total = sizes[i] + sizes[j];
        let bin = total.ilog2() as usize;
        if bins.len() <= bin {
            bins.resize(bin + 1, (0, 0, 0.0));
        }
        let b = &mut bins[bin];
        b.0 += 1;
        b.1 += total;
        b.2 += t;
    }
    let scaling = bins
        .into_iter()
        .enumerate()
        .filter(|(_, b)| b.0 > 0)
        .map(|(bin, (count, total, time))| ScalingPoint {
            config_id: dataset.id.clone(),
            algorithm,
            size_bin: bin as u32,
            pairs: count,
            avg_total_size: total as f64 / count as f64,
            avg_time_s: time / count as f64,
        })
        .collect();
    Ok((record, scaling))
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub algorithms: Vec<KernelAlgorithm>,
    pub repeats: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            algorithms: KernelAlgorithm::ALL.to_vec(),
            repeats: 3,
        }
    }
}

/// Runs every algorithm on every dataset, writing CSV rows to `records`
/// and `scaling` as each dataset completes.
pub fn run_bench<W: Write, S: Write>(
    datasets: &[Dataset],
    options: &BenchOptions,
    records: &mut csv::Writer<W>,
    scaling: &mut csv::Writer<S>,
) -> CliResult<Vec<BenchRecord>> {
    if options.algorithms.is_empty() {
        return Err(CliError::Usage("no algorithm selected".to_string()));
    }
    let csv_err = |e: csv::Error| CliError::Usage(format!("cannot write CSV: {e}"));
    records.write_record(BenchRecord::CSV_HEADER).map_err(csv_err)?;
    scaling.write_record(ScalingPoint::CSV_HEADER).map_err(csv_err)?;
    records.flush().map_err(|e| csv_err(e.into()))?;

    let mut out = Vec::new();
    for dataset in datasets {
        for &algorithm in &options.algorithms {
            let (record, points) = bench_dataset(dataset, algorithm, options.repeats)?;
            records.write_record(record.csv_fields()).map_err(csv_err)?;
            for p in &points {
                scaling.write_record(p.csv_fields()).map_err(csv_err)?;
            }
            out.push(record);
        }
        records.flush().map_err(|e| csv_err(e.into()))?;
        scaling.flush().map_err(|e| csv_err(e.into()))?;
    }
    Ok(out)
}

/// Configs whose algorithms disagree on the kernel values.
pub fn checksum_mismatches(records: &[BenchRecord]) -> Vec<String> {
    let mut bad = Vec::new();
    for r in records {
        let first = records.iter().find(|o| o.config_id == r.config_id).expect("r itself");
        if first.checksum != r.checksum && !bad.contains(&r.config_id) {
            bad.push(r.config_id.clone());
        }
    }
    bad
}

/// `bench.csv` -> `bench_scaling.csv`.
pub fn default_scaling_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}_scaling.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_mean() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0]), 2.5);
        assert_eq!(mean([1.0, 2.0, 6.0].into_iter()), 3.0);
        assert_eq!(mean(std::iter::empty::<f64>().collect::<Vec<_>>().into_iter()), 0.0);
    }

    #[test]
    fn checksum_depends_on_pairs_and_values() {
        let a = checksum(&[((0, 1), 5), ((0, 2), 7)]);
        assert_eq!(a, checksum(&[((0, 1), 5), ((0, 2), 7)]));
        assert_ne!(a, checksum(&[((0, 1), 5), ((0, 2), 8)]));
        assert_ne!(a, checksum(&[((0, 2), 7), ((0, 1), 5)]));
        assert_eq!(checksum(&[]), 0xcbf2_9ce4_8422_2325);
    }

    #[test]
    fn scaling_path() {
        assert_eq!(
            default_scaling_path(Path::new("out/bench.csv")),
            PathBuf::from("out/bench_scaling.csv")
        );
    }
}
