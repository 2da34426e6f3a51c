//! Kernel algorithm selection and Gram matrices.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{automata_kernel, KernelValue};
use crate::kernel::product_summary;
use crate::moschitti::{moschitti_kernel, moschitti_kernel_with_stats};
use crate::series::{series_kernel, subtree_series, subtree_series_of_tree, TreeSeries};
use crate::st_automaton::StAutomaton;
use crate::tree::{Tree, TreeLanguage, TreeMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelAlgorithm {
    Automata,
    Oracle,
    Moschitti,
}

impl KernelAlgorithm {
    pub const ALL: [KernelAlgorithm; 3] = [
        KernelAlgorithm::Automata,
        KernelAlgorithm::Oracle,
        KernelAlgorithm::Moschitti,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelAlgorithm::Automata => "automata",
            KernelAlgorithm::Oracle => "oracle",
            KernelAlgorithm::Moschitti => "moschitti",
        }
    }
}

impl fmt::Display for KernelAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected automata, oracle or moschitti)"))
    }
}

/// The single member of `language`, as the node-pair baseline requires.
pub fn singleton_tree(language: &TreeLanguage) -> Result<&Tree> {
    match language.trees() {
        [t] => Ok(t),
        trees => Err(Error::AlgorithmUnsupported {
            algorithm: "moschitti",
            reason: format!("needs singleton languages, got {} trees", trees.len()),
        }),
    }
}

/// One language prepared for repeated kernel evaluations.
pub enum Prepared<'a> {
    Automaton(Box<StAutomaton>),
    Series(TreeSeries),
    Tree(&'a Tree),
}

impl<'a> Prepared<'a> {
    pub fn new(language: &'a TreeLanguage, algorithm: KernelAlgorithm) -> Result<Self> {
        Ok(match algorithm {
            KernelAlgorithm::Automata => Prepared::Automaton(Box::new(StAutomaton::from_language(language)?)),
            KernelAlgorithm::Oracle => Prepared::Series(subtree_series(language)),
            KernelAlgorithm::Moschitti => Prepared::Tree(singleton_tree(language)?),
        })
    }

    /// A single tree as a singleton language. In unordered mode `tree` must
    /// already be canonical for the series and node-pair algorithms.
    pub fn from_tree(tree: &'a Tree, mode: TreeMode, algorithm: KernelAlgorithm) -> Self {
        match algorithm {
            KernelAlgorithm::Automata => Prepared::Automaton(Box::new(StAutomaton::from_tree(tree, mode))),
            KernelAlgorithm::Oracle => Prepared::Series(subtree_series_of_tree(tree)),
            KernelAlgorithm::Moschitti => Prepared::Tree(tree),
        }
    }

    /// Kernel together with the size of the structure the algorithm had to
    /// match: accessible product states, common series terms, or node pairs
    /// with equal productions.
    pub fn kernel_with_product_states(&self, other: &Prepared<'_>) -> Result<(KernelValue, usize)> {
        match (self, other) {
            (Prepared::Automaton(a), Prepared::Automaton(b)) => {
                let s = product_summary(a, b)?;
                Ok((s.kernel_value, s.matched_states))
            }
            (Prepared::Series(a), Prepared::Series(b)) => {
                let common = a.support().filter(|t| b.coefficient(t) != 0).count();
                Ok((series_kernel(a, b)?, common))
            }
            (Prepared::Tree(a), Prepared::Tree(b)) => {
                let s = moschitti_kernel_with_stats(a, b);
                Ok((s.kernel_value, s.node_pairs))
            }
            _ => panic!("kernel called on items prepared for different algorithms"),
        }
    }

    /// Kernel against another item prepared for the same algorithm.
    pub fn kernel(&self, other: &Prepared<'_>) -> Result<KernelValue> {
        match (self, other) {
            (Prepared::Automaton(a), Prepared::Automaton(b)) => automata_kernel(a, b),
            (Prepared::Series(a), Prepared::Series(b)) => series_kernel(a, b),
            (Prepared::Tree(a), Prepared::Tree(b)) => Ok(moschitti_kernel(a, b)),
            _ => panic!("kernel called on items prepared for different algorithms"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<KernelValue>>,
}

impl GramMatrix {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> KernelValue {
        self.values[i][j]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..i).all(|j| self.values[i][j] == self.values[j][i]))
    }

    /// Header `label,<labels...>`, then one `label,v1,...,vn` row per item.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.values) {
            out.push_str(label);
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Gram matrix labeled `0..n`.
pub fn gram_matrix(items: &[TreeLanguage], algorithm: KernelAlgorithm) -> Result<GramMatrix> {
    let labels = (0..items.len()).map(|i| i.to_string()).collect();
    gram_matrix_labeled(items, labels, algorithm)
}

/// Computes the upper triangle in parallel and mirrors it.
pub fn gram_matrix_labeled(
    items: &[TreeLanguage],
    labels: Vec<String>,
    algorithm: KernelAlgorithm,
) -> Result<GramMatrix> {
    let Some(first) = items.first() else {
        return Err(Error::EmptyInput("no languages given".to_string()));
    };
    assert_eq!(labels.len(), items.len(), "one label per item");
    for item in items {
        if item.mode() != first.mode() {
            return Err(Error::ModeMismatch {
                left: first.mode(),
                right: item.mode(),
            });
        }
    }
    let prepared = items
        .par_iter()
        .map(|l| Prepared::new(l, algorithm))
        .collect::<Result<Vec<_>>>()?;

    let n = items.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let computed = pairs
        .par_iter()
        .map(|&(i, j)| prepared[i].kernel(&prepared[j]))
        .collect::<Result<Vec<_>>>()?;

    let mut values = vec![vec![0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(computed) {
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(GramMatrix { labels, values })
}
