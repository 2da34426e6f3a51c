#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treekernel::datagen::generate_tree;
use treekernel::{expand_grid, DatasetConfig, Grid, Tree, TreeLanguage, TreeMode};

/// Small trees where names are reused across arities (`a` is both a leaf
/// and a binary symbol) so that sharing and near-misses are common.
pub fn arb_tree(max_nodes: u32) -> impl Strategy<Value = Tree> {
    let leaf = prop::sample::select(vec!["a", "b", "c"]).prop_map(Tree::leaf);
    leaf.prop_recursive(5, max_nodes, 3, |inner| {
        (
            prop::sample::select(vec!["f", "g", "a"]),
            prop::collection::vec(inner, 1..=3),
        )
            .prop_map(|(name, kids)| Tree::node(name, kids))
    })
}

pub fn arb_mode() -> impl Strategy<Value = TreeMode> {
    prop_oneof![Just(TreeMode::Ordered), Just(TreeMode::Unordered)]
}

pub fn language(trees: Vec<Tree>, mode: TreeMode) -> TreeLanguage {
    let mut l = TreeLanguage::new(mode);
    for t in trees {
        l.insert(t);
    }
    l
}

pub fn arb_language(max_trees: usize, max_nodes: u32) -> impl Strategy<Value = TreeLanguage> {
    (prop::collection::vec(arb_tree(max_nodes), 0..=max_trees), arb_mode())
        .prop_map(|(trees, mode)| language(trees, mode))
}

/// Every config of the three grids.
pub fn all_grid_configs() -> Vec<DatasetConfig> {
    Grid::ALL.iter().flat_map(|&g| expand_grid(g, 0)).collect()
}

/// A tree drawn with the parameters of grid config `config`, capped at
/// `max_nodes` nodes.
pub fn grid_tree(config: usize, seed: u64, max_nodes: usize) -> Tree {
    let configs = all_grid_configs();
    let mut cfg = configs[config % configs.len()].clone();
    cfg.node_budget = max_nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_tree(&mut rng, &cfg)
}

/// Brute-force subtree sets, written independently of the library: every
/// node's subtree, deduplicated by value.
pub fn subtrees_naive(t: &Tree, out: &mut BTreeSet<Tree>) {
    out.insert(t.clone());
    for c in t.children() {
        subtrees_naive(c, out);
    }
}

/// Number of nodes of `t` whose subtree equals `s`.
pub fn occurrences_naive(t: &Tree, s: &Tree) -> u64 {
    let here = u64::from(t == s);
    here + t.children().iter().map(|c| occurrences_naive(c, s)).sum::<u64>()
}

/// Kernel by counting equal node pairs directly: `Σ_{n1, n2} [t(n1) = t(n2)]`.
pub fn pair_count_kernel(x: &TreeLanguage, y: &TreeLanguage) -> u128 {
    fn nodes<'a>(t: &'a Tree, out: &mut Vec<&'a Tree>) {
        out.push(t);
        for c in t.children() {
            nodes(c, out);
        }
    }
    let (mut nx, mut ny) = (Vec::new(), Vec::new());
    for t in x {
        nodes(t, &mut nx);
    }
    for t in y {
        nodes(t, &mut ny);
    }
    let mut total = 0u128;
    for a in &nx {
        for b in &ny {
            if a == b {
                total += 1;
            }
        }
    }
    total
}
