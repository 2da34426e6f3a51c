//! Seeded synthetic tree languages over the DS1/DS2/DS3 parameter grids.
//!
//! Trees are grown breadth-first. Each node draws an arity uniformly in
//! `0..=max_arity` and then a name uniformly among `alphabet_size` names.
//! Nodes at depth `max_depth` are leaves (the root has depth 1), and the
//! arity is clamped so that a tree never exceeds `node_budget` nodes.
//! Repeated trees are redrawn.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::parse::serialize_tree;
use crate::tree::{RankedAlphabet, Symbol, Tree, TreeLanguage, TreeMode};

pub const DEFAULT_CARDINAL: usize = 100;
pub const DEFAULT_NODE_BUDGET: usize = 2000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetConfig {
    pub id: String,
    pub alphabet_size: usize,
    pub max_arity: usize,
    pub max_depth: usize,
    pub cardinal: usize,
    pub seed: u64,
    pub mode: TreeMode,
    /// Upper bound on the node count of each tree.
    pub node_budget: usize,
}

impl DatasetConfig {
    pub fn new(alphabet_size: usize, max_arity: usize, max_depth: usize, seed: u64) -> Self {
        DatasetConfig {
            id: format!("f{alphabet_size}-a{max_arity}-d{max_depth}"),
            alphabet_size,
            max_arity,
            max_depth,
            cardinal: DEFAULT_CARDINAL,
            seed,
            mode: TreeMode::Ordered,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("{what} must be at least 1")));
        if self.alphabet_size == 0 {
            return bad("alphabet size");
        }
        if self.max_depth == 0 {
            return bad("maximum depth");
        }
        if self.cardinal == 0 {
            return bad("cardinal");
        }
        if self.node_budget == 0 {
            return bad("node budget");
        }
        Ok(())
    }

    /// Every name at every arity in `0..=max_arity`.
    pub fn alphabet(&self) -> RankedAlphabet {
        let mut alphabet = RankedAlphabet::new();
        for i in 0..self.alphabet_size {
            let name = symbol_name(i);
            for k in 0..=self.max_arity {
                alphabet.insert(Symbol::new(&name, k).expect("generated names are valid"));
            }
        }
        alphabet
    }

    pub fn max_attempts(&self) -> usize {
        (20 * self.cardinal).max(1000)
    }
}

/// `a`..`z`, then `s26`, `s27`, ...
pub fn symbol_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("s{i}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Grid {
    Ds1,
    Ds2,
    Ds3,
}

impl Grid {
    pub const ALL: [Grid; 3] = [Grid::Ds1, Grid::Ds2, Grid::Ds3];

    pub fn name(self) -> &'static str {
        match self {
            Grid::Ds1 => "DS1",
            Grid::Ds2 => "DS2",
            Grid::Ds3 => "DS3",
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown grid `{s}` (expected DS1, DS2 or DS3)"))
    }
}

/// `n` evenly spaced integers from `lo` to `hi`, rounded to nearest.
fn spaced(lo: usize, hi: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|i| (lo as f64 + (hi - lo) as f64 * i as f64 / (n - 1) as f64).round() as usize)
        .collect()
}

/// The configs of a grid. Config `i` uses seed `seed + i`.
pub fn expand_grid(grid: Grid, seed: u64) -> Vec<DatasetConfig> {
    let points: Vec<(usize, usize)> = match grid {
        Grid::Ds1 => spaced(5, 100, 5).into_iter().map(|d| (5, d)).collect(),
        Grid::Ds2 => spaced(5, 20, 4).into_iter().map(|a| (a, 5)).collect(),
        Grid::Ds3 => spaced(2, 15, 7).into_iter().zip(spaced(5, 100, 7)).collect(),
    };
    points
        .into_iter()
        .enumerate()
        .map(|(i, (a, d))| {
            let mut cfg = DatasetConfig::new(2, a, d, seed.wrapping_add(i as u64));
            cfg.id = format!("{}-{i}-f2-a{a}-d{d}", grid.name().to_ascii_lowercase());
            cfg
        })
        .collect()
}

struct Node {
    name: usize,
    arity: usize,
}

/// Turns breadth-first `nodes` into a tree. Children of node `i` are the
/// `arity` nodes that follow those of earlier nodes.
fn assemble(nodes: &[Node], names: &[String]) -> Tree {
    let mut first_child = Vec::with_capacity(nodes.len());
    let mut next = 1;
    for n in nodes {
        first_child.push(next);
        next += n.arity;
    }
    debug_assert_eq!(next, nodes.len());
    let mut built: Vec<Option<Tree>> = (0..nodes.len()).map(|_| None).collect();
    for i in (0..nodes.len()).rev() {
        let n = &nodes[i];
        let start = first_child[i];
        let children = (start..start + n.arity)
            .map(|c| built[c].take().expect("children are built first"))
            .collect();
        let symbol = Symbol::new(&names[n.name], n.arity).expect("generated names are valid");
        built[i] = Some(Tree::new(symbol, children).expect("arity matches"));
    }
    built[0].take().expect("root")
}

/// One random tree as described in the module docs.
pub fn generate_tree<R: Rng>(rng: &mut R, cfg: &DatasetConfig) -> Tree {
    let names: Vec<String> = (0..cfg.alphabet_size).map(symbol_name).collect();
    let mut nodes: Vec<Node> = Vec::new();
    let mut depths: Vec<usize> = vec![1];
    let mut allocated = 1;
    let mut i = 0;
    while i < depths.len() {
        let mut arity = rng.gen_range(0..=cfg.max_arity);
        if depths[i] >= cfg.max_depth {
            arity = 0;
        }
        arity = arity.min(cfg.node_budget - allocated);
        let name = rng.gen_range(0..cfg.alphabet_size);
        nodes.push(Node { name, arity });
        allocated += arity;
        let d = depths[i] + 1;
        depths.resize(depths.len() + arity, d);
        i += 1;
    }
    assemble(&nodes, &names)
}

/// A random tree with exactly `size` nodes over `alphabet_size` names and
/// arities up to `max_arity`. Depth is unconstrained.
pub fn generate_sized_tree<R: Rng>(
    rng: &mut R,
    size: usize,
    alphabet_size: usize,
    max_arity: usize,
) -> Tree {
    assert!(size >= 1 && alphabet_size >= 1);
    assert!(size == 1 || max_arity >= 1, "trees larger than a leaf need arity >= 1");
    let names: Vec<String> = (0..alphabet_size).map(symbol_name).collect();
    let mut nodes: Vec<Node> = Vec::with_capacity(size);
    let mut allocated = 1;
    let mut i = 0;
    while i < allocated {
        let remaining = size - allocated;
        let cap = max_arity.min(remaining);
        // The last open node must keep the tree growing.
        let last_open = i + 1 == allocated;
        let low = usize::from(last_open && remaining > 0);
        let arity = rng.gen_range(low..=cap);
        let name = rng.gen_range(0..alphabet_size);
        nodes.push(Node { name, arity });
        allocated += arity;
        i += 1;
    }
    assemble(&nodes, &names)
}

/// `cfg.cardinal` distinct trees, deterministic in `cfg`.
pub fn generate_language(cfg: &DatasetConfig) -> Result<TreeLanguage> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut language = TreeLanguage::new(cfg.mode);
    let attempts = cfg.max_attempts();
    for _ in 0..attempts {
        if language.len() == cfg.cardinal {
            break;
        }
        language.insert(generate_tree(&mut rng, cfg));
    }
    if language.len() < cfg.cardinal {
        return Err(Error::ExhaustedRetries {
            wanted: cfg.cardinal,
            got: language.len(),
            attempts,
        });
    }
    Ok(language)
}

/// `#` header lines describing `cfg`.
pub fn dataset_header(cfg: &DatasetConfig) -> String {
    format!(
        "# treekernel dataset\n\
         # config_id={}\n\
         # alphabet_size={}\n\
         # max_arity={}\n\
         # max_depth={}\n\
         # cardinal={}\n\
         # seed={}\n\
         # mode={}\n\
         # node_budget={}\n\
         # generator=breadth-first; arity uniform in 0..=max_arity (0 at max_depth, clamped to node_budget), then name uniform; duplicates redrawn\n\
         # arity_distribution=uniform (the reference generator's choice is unknown)\n",
        cfg.id,
        cfg.alphabet_size,
        cfg.max_arity,
        cfg.max_depth,
        cfg.cardinal,
        cfg.seed,
        cfg.mode,
        cfg.node_budget,
    )
}

/// Header followed by one tree per line.
pub fn dataset_text(cfg: &DatasetConfig, language: &TreeLanguage) -> String {
    let mut out = dataset_header(cfg);
    for t in language {
        out.push_str(&serialize_tree(t));
        out.push('\n');
    }
    out
}

/// The mode recorded in a dataset header, if any.
pub fn header_mode(text: &str) -> Option<TreeMode> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.trim_start_matches('#').trim().strip_prefix("mode="))
        .and_then(|m| m.trim().parse().ok())
}
