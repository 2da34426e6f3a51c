//! Explicit formal tree series and the brute-force SubTree combinatorics.
//!
//! Everything here works on materialized trees and is deliberately naive; it
//! is the reference the automaton-based code is checked against.

use std::collections::{btree_map, BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::tree::{Tree, TreeLanguage};

/// A finite map from trees to nonzero natural coefficients.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct TreeSeries {
    coefficients: BTreeMap<Tree, u64>,
}

impl TreeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a series from `(tree, coefficient)` terms, summing repeats and
    /// dropping zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (Tree, u64)>) -> Result<Self> {
        let mut series = Self::new();
        for (tree, c) in terms {
            series.add_term(tree, c)?;
        }
        Ok(series)
    }

    pub fn add_term(&mut self, tree: Tree, coefficient: u64) -> Result<()> {
        if coefficient == 0 {
            return Ok(());
        }
        match self.coefficients.entry(tree) {
            btree_map::Entry::Vacant(v) => {
                v.insert(coefficient);
            }
            btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().checked_add(coefficient).ok_or(Error::WeightOverflow)?;
                *o.get_mut() = sum;
            }
        }
        Ok(())
    }

    pub fn coefficient(&self, tree: &Tree) -> u64 {
        self.coefficients.get(tree).copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = &Tree> {
        self.coefficients.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tree, u64)> {
        self.coefficients.iter().map(|(t, &c)| (t, c))
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Sum of all coefficients.
    pub fn total(&self) -> u128 {
        self.coefficients.values().map(|&c| c as u128).sum()
    }

    /// Pointwise sum.
    pub fn sum(&self, other: &TreeSeries) -> Result<TreeSeries> {
        let mut out = self.clone();
        for (t, c) in other.iter() {
            out.add_term(t.clone(), c)?;
        }
        Ok(out)
    }

    /// Pointwise product; the support is the intersection of supports.
    pub fn hadamard(&self, other: &TreeSeries) -> Result<TreeSeries> {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = TreeSeries::new();
        for (t, c) in small.iter() {
            let d = large.coefficient(t);
            if d != 0 {
                let w = c.checked_mul(d).ok_or(Error::WeightOverflow)?;
                out.coefficients.insert(t.clone(), w);
            }
        }
        Ok(out)
    }

    /// Keeps only the terms whose tree has at most `max_size` nodes.
    pub fn truncated(&self, max_size: usize) -> TreeSeries {
        TreeSeries {
            coefficients: self
                .coefficients
                .iter()
                .filter(|(t, _)| t.size() <= max_size)
                .map(|(t, &c)| (t.clone(), c))
                .collect(),
        }
    }
}

impl fmt::Display for TreeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        for (i, (t, c)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if c != 1 {
                write!(f, "{c}*")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TreeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The distinct subtrees rooted at the nodes of `tree`.
pub fn subtree_set(tree: &Tree) -> BTreeSet<Tree> {
    tree.post_order().cloned().collect()
}

/// Union of the subtree sets of every member.
pub fn subtree_set_of_language(language: &TreeLanguage) -> BTreeSet<Tree> {
    language.iter().flat_map(|t| t.post_order().cloned()).collect()
}

/// Occurrence-counting subtree series of one tree.
pub fn subtree_series_of_tree(tree: &Tree) -> TreeSeries {
    let mut series = TreeSeries::new();
    for node in tree.post_order() {
        // A tree has fewer than 2^64 nodes.
        series.add_term(node.clone(), 1).expect("node count fits in u64");
    }
    series
}

/// Sum over members of their subtree series: the coefficient of `s` is the
/// number of nodes, across all members, at which `s` is rooted.
pub fn subtree_series(language: &TreeLanguage) -> TreeSeries {
    let mut series = TreeSeries::new();
    for tree in language {
        for node in tree.post_order() {
            series.add_term(node.clone(), 1).expect("node count fits in u64");
        }
    }
    series
}

/// `Σ_t a(t)·b(t)` over two explicit series.
pub fn series_kernel(a: &TreeSeries, b: &TreeSeries) -> Result<u128> {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut total: u128 = 0;
    for (t, c) in small.iter() {
        let d = large.coefficient(t);
        if d != 0 {
            total = total
                .checked_add(c as u128 * d as u128)
                .ok_or(Error::WeightOverflow)?;
        }
    }
    Ok(total)
}

/// SubTree kernel computed directly from the two materialized series.
pub fn brute_force_kernel(x: &TreeLanguage, y: &TreeLanguage) -> Result<u128> {
    if x.mode() != y.mode() {
        return Err(Error::ModeMismatch {
            left: x.mode(),
            right: y.mode(),
        });
    }
    series_kernel(&subtree_series(x), &subtree_series(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_tree;
    use crate::tree::TreeMode;

    fn p(s: &str) -> Tree {
        parse_tree(s, None).unwrap()
    }

    fn lang(items: &[&str]) -> TreeLanguage {
        TreeLanguage::from_trees(items.iter().map(|s| p(s)), TreeMode::Ordered).unwrap()
    }

    fn series(terms: &[(&str, u64)]) -> TreeSeries {
        TreeSeries::from_terms(terms.iter().map(|&(s, c)| (p(s), c))).unwrap()
    }

    #[test]
    fn subtree_sets() {
        let got: Vec<String> = subtree_set(&p("f(h(a),f(h(a),b))"))
            .iter()
            .map(Tree::to_string)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut want = vec!["a", "b", "h(a)", "f(h(a),b)", "f(h(a),f(h(a),b))"];
        want.sort();
        assert_eq!(got, want);

        assert_eq!(subtree_set(&p("f(a,g(a))")).len(), 3);
        assert_eq!(subtree_set(&p("a")).len(), 1);
    }

    #[test]
    fn series_of_single_tree() {
        let s = subtree_series(&lang(&["f(h(a),f(h(a),b))"]));
        assert_eq!(
            s,
            series(&[
                ("f(h(a),f(h(a),b))", 1),
                ("f(h(a),b)", 1),
                ("h(a)", 2),
                ("a", 2),
                ("b", 1)
            ])
        );
        assert_eq!(s.total(), 7);
        assert_eq!(subtree_series(&lang(&["a"])), series(&[("a", 1)]));
    }

    #[test]
    fn series_of_language_counts_occurrences() {
        let s = subtree_series(&lang(&["f(h(a),f(h(a),b))", "f(h(a),h(b))"]));
        assert_eq!(
            s,
            series(&[
                ("f(h(a),f(h(a),b))", 1),
                ("f(h(a),h(b))", 1),
                ("f(h(a),b)", 1),
                ("h(a)", 3),
                ("h(b)", 1),
                ("a", 3),
                ("b", 2)
            ])
        );
    }

    #[test]
    fn brute_force_values() {
        let x = lang(&["f(h(a),f(h(a),b))", "f(h(a),h(b))"]);
        let y = lang(&["f(f(b,h(b)),f(h(a),h(b)))"]);
        assert_eq!(brute_force_kernel(&x, &y).unwrap(), 15);
        assert_eq!(brute_force_kernel(&y, &x).unwrap(), 15);
        assert_eq!(brute_force_kernel(&lang(&["a"]), &lang(&["b"])).unwrap(), 0);
        let z = lang(&["f(a,g(a))"]);
        assert_eq!(brute_force_kernel(&z, &z).unwrap(), 6);
    }

    #[test]
    fn mode_mismatch() {
        let x = lang(&["a"]);
        let y = TreeLanguage::from_trees([p("a")], TreeMode::Unordered).unwrap();
        assert!(matches!(brute_force_kernel(&x, &y), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn hadamard_and_sum() {
        let a = series(&[("a", 2), ("b", 3)]);
        let b = series(&[("b", 5), ("c", 1)]);
        assert_eq!(a.hadamard(&b).unwrap(), series(&[("b", 15)]));
        assert_eq!(a.sum(&b).unwrap(), series(&[("a", 2), ("b", 8), ("c", 1)]));
        assert_eq!(series_kernel(&a, &b).unwrap(), 15);
    }

    #[test]
    fn overflow_is_reported() {
        let mut s = series(&[("a", u64::MAX)]);
        assert_eq!(s.add_term(p("a"), 1), Err(Error::WeightOverflow));
        let big = series(&[("a", u64::MAX)]);
        assert_eq!(big.hadamard(&series(&[("a", 2)])), Err(Error::WeightOverflow));
        // The kernel itself is accumulated in 128 bits.
        assert_eq!(
            series_kernel(&big, &big).unwrap(),
            u64::MAX as u128 * u64::MAX as u128
        );
    }
}
