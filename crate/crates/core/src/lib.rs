//! SubTree kernels on ranked trees via root-weighted tree automata.
//!
//! A finite tree language is compiled into its ST automaton, a
//! deterministic automaton with one state per distinct subtree weighted by
//! occurrence count. The kernel of two languages is then the total root
//! weight of the accessible part of the product of their automata.
//!
//! ```
//! use treekernel::{parse_language, subtree_kernel, TreeMode};
//!
//! let x = parse_language("f(h(a),f(h(a),b))\nf(h(a),h(b))", TreeMode::Ordered).unwrap();
//! let y = parse_language("f(f(b,h(b)),f(h(a),h(b)))", TreeMode::Ordered).unwrap();
//! assert_eq!(subtree_kernel(&x, &y).unwrap(), 15);
//! ```

pub mod canonical;
pub mod datagen;
pub mod error;
pub mod gram;
pub mod kernel;
pub mod moschitti;
pub mod parse;
pub mod rwta;
pub mod series;
pub mod st_automaton;
pub mod tree;

pub use canonical::canonicalize;
pub use datagen::{expand_grid, generate_language, generate_sized_tree, DatasetConfig, Grid};
pub use error::{Error, Result};
pub use gram::{gram_matrix, gram_matrix_labeled, GramMatrix, KernelAlgorithm};
pub use kernel::{
    automata_kernel, hadamard_accessible, product_summary, subtree_kernel, KernelValue,
    MatchedState, ProductResult, ProductSummary,
};
pub use moschitti::{moschitti_kernel, moschitti_kernel_with_stats, MoschittiStats};
pub use parse::{parse_language, parse_tree, parse_trees, serialize_tree};
pub use rwta::{Rwta, RwtaBuilder, StateId, Transition};
pub use series::{
    brute_force_kernel, subtree_series, subtree_series_of_tree, subtree_set,
    subtree_set_of_language, TreeSeries,
};
pub use st_automaton::{InvariantViolation, StAutomaton};
pub use tree::{RankedAlphabet, Symbol, Tree, TreeLanguage, TreeMode};
