//! Commands behind the `treekernel` binary.

pub mod bench;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;
use treekernel::datagen::{dataset_text, header_mode};
use treekernel::gram::{singleton_tree, Prepared};
use treekernel::{
    expand_grid, generate_language, gram_matrix_labeled, parse_language, GramMatrix, Grid,
    KernelAlgorithm, KernelValue, TreeLanguage, TreeMode,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        source: treekernel::Error,
    },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Kernel(#[from] treekernel::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    /// 1 for a failed verification, 2 for usage and input problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Reads a tree-per-line file. The mode is `mode` if given, else the one
/// recorded in the file header, else ordered.
pub fn read_language(path: &Path, mode: Option<TreeMode>) -> CliResult<TreeLanguage> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mode = mode.or_else(|| header_mode(&text)).unwrap_or_default();
    parse_language(&text, mode).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedFile {
    pub path: PathBuf,
    pub trees: usize,
    pub avg_size: f64,
}

#[derive(Clone, Debug)]
pub struct GenerateArgs {
    pub grid: Grid,
    pub seed: u64,
    pub out: PathBuf,
    pub mode: TreeMode,
    pub cardinal: Option<usize>,
    pub node_budget: Option<usize>,
}

/// Writes one `<config id>.trees` file per grid config.
pub fn cmd_generate(args: &GenerateArgs) -> CliResult<Vec<GeneratedFile>> {
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let mut written = Vec::new();
    for mut cfg in expand_grid(args.grid, args.seed) {
        cfg.mode = args.mode;
        if let Some(c) = args.cardinal {
            cfg.cardinal = c;
        }
        if let Some(b) = args.node_budget {
            cfg.node_budget = b;
        }
        let language = generate_language(&cfg)?;
        let path = args.out.join(format!("{}.trees", cfg.id));
        fs::write(&path, dataset_text(&cfg, &language)).map_err(|e| CliError::io(&path, e))?;
        written.push(GeneratedFile {
            path,
            trees: language.len(),
            avg_size: language.total_size() as f64 / language.len() as f64,
        });
    }
    Ok(written)
}

#[derive(Clone, Debug)]
pub struct KernelArgs {
    pub x: PathBuf,
    pub y: PathBuf,
    pub algorithm: KernelAlgorithm,
    pub verify: bool,
    pub mode: Option<TreeMode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelOutput {
    pub value: KernelValue,
    /// Every algorithm that was run, in order.
    pub runs: Vec<(KernelAlgorithm, KernelValue)>,
}

fn language_kernel(
    x: &TreeLanguage,
    y: &TreeLanguage,
    algorithm: KernelAlgorithm,
) -> treekernel::Result<KernelValue> {
    if x.mode() != y.mode() {
        return Err(treekernel::Error::ModeMismatch {
            left: x.mode(),
            right: y.mode(),
        });
    }
    Prepared::new(x, algorithm)?.kernel(&Prepared::new(y, algorithm)?)
}

/// Kernel of two files. With `verify`, every applicable algorithm runs and
/// any disagreement is an error; the node-pair baseline only applies to
/// single-tree files.
pub fn cmd_kernel(args: &KernelArgs) -> CliResult<KernelOutput> {
    let x = read_language(&args.x, args.mode)?;
    let y = read_language(&args.y, args.mode)?;
    let value = language_kernel(&x, &y, args.algorithm)?;
    let mut runs = vec![(args.algorithm, value)];
    if args.verify {
        let singletons = singleton_tree(&x).is_ok() && singleton_tree(&y).is_ok();
        for alg in KernelAlgorithm::ALL {
            if alg == args.algorithm || (alg == KernelAlgorithm::Moschitti && !singletons) {
                continue;
            }
            runs.push((alg, language_kernel(&x, &y, alg)?));
        }
        if runs.iter().any(|&(_, v)| v != value) {
            let listing: Vec<String> = runs.iter().map(|(a, v)| format!("{a}={v}")).collect();
            return Err(CliError::Verification(listing.join(" ")));
        }
    }
    Ok(KernelOutput { value, runs })
}

#[derive(Clone, Debug)]
pub struct GramArgs {
    pub files: Vec<PathBuf>,
    pub algorithm: KernelAlgorithm,
    pub mode: Option<TreeMode>,
    /// Use every tree of every file as its own item.
    pub per_tree: bool,
}

fn file_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Gram matrix over files (one language each) or, with `per_tree`, over
/// their trees labeled `<file stem>:<index>`.
pub fn cmd_gram(args: &GramArgs) -> CliResult<GramMatrix> {
    if args.files.is_empty() {
        return Err(CliError::Usage("gram needs at least one file".to_string()));
    }
    let mut items = Vec::new();
    let mut labels = Vec::new();
    for path in &args.files {
        let language = read_language(path, args.mode)?;
        if args.per_tree {
            for (i, t) in language.iter().enumerate() {
                items.push(TreeLanguage::singleton(t.clone(), language.mode()));
                labels.push(format!("{}:{i}", file_label(path)));
            }
        } else {
            items.push(language);
            labels.push(file_label(path));
        }
    }
    Ok(gram_matrix_labeled(&items, labels, args.algorithm)?)
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".to_string())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
