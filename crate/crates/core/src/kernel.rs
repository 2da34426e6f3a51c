//! SubTree kernel via the accessible part of the Hadamard product.
//!
//! For ST automata `A_X` and `A_Y`, a pair `(p, q)` is accessible in
//! `A_X ⊙ A_Y` exactly when `p` and `q` stand for the same subtree, and its
//! root weight is `ν_X(p)·ν_Y(q)`. Summing those weights gives the kernel.
//!
//! The accessible pairs are found by walking the smaller automaton in its
//! bottom-up state order while mapping each state to its counterpart in the
//! larger one: a state is matched when all its children are matched and the
//! larger automaton has a transition for the mapped key. Pairs involving the
//! sink state of the full product construction never contribute and are not
//! represented. Neither input is modified.

use crate::error::{Error, Result};
use crate::rwta::StateId;
use crate::series::TreeSeries;
use crate::st_automaton::StAutomaton;
use crate::tree::TreeLanguage;

/// Kernel values are accumulated in 128 bits; see [`ProductResult::exceeds_u64`].
pub type KernelValue = u128;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchedState {
    pub state_x: StateId,
    pub state_y: StateId,
    pub weight: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductResult {
    pub matched: Vec<MatchedState>,
    pub kernel_value: KernelValue,
    /// States of the smaller automaton that were visited.
    pub states_explored: usize,
    /// Set when the kernel value does not fit in 64 bits.
    pub exceeds_u64: bool,
}

impl ProductResult {
    /// The product series `P_X ⊙ P_Y`, with trees read off `ax`.
    pub fn to_series(&self, ax: &StAutomaton) -> Result<TreeSeries> {
        let mut series = TreeSeries::new();
        for m in &self.matched {
            let w = u64::try_from(m.weight).map_err(|_| Error::WeightOverflow)?;
            series.add_term(ax.state_to_tree(m.state_x)?, w)?;
        }
        Ok(series)
    }
}

/// Kernel value and accessible-part size without materializing the pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductSummary {
    pub kernel_value: KernelValue,
    pub matched_states: usize,
    pub states_explored: usize,
}

fn check_compatible(ax: &StAutomaton, ay: &StAutomaton) -> Result<()> {
    if ax.mode() != ay.mode() {
        return Err(Error::ModeMismatch {
            left: ax.mode(),
            right: ay.mode(),
        });
    }
    if let (Some(a), Some(b)) = (ax.declared_alphabet(), ay.declared_alphabet()) {
        if a != b {
            return Err(Error::AlphabetMismatch(
                "declared alphabets differ".to_string(),
            ));
        }
    }
    Ok(())
}

const UNMATCHED: StateId = StateId::new(u32::MAX as usize);

/// Walks the smaller automaton and calls `on_match(small_state, large_state)`
/// for each accessible pair, in bottom-up order. The smaller side is `ax`
/// on ties. Returns the number of visited states.
fn walk_product(
    ax: &StAutomaton,
    ay: &StAutomaton,
    mut on_match: impl FnMut(StateId, StateId) -> Result<()>,
) -> Result<usize> {
    check_compatible(ax, ay)?;
    let x_is_small = ax.num_states() <= ay.num_states();
    let (small, large) = if x_is_small { (ax, ay) } else { (ay, ax) };

    let symbol_map: Vec<Option<u32>> = small
        .interned_symbols()
        .iter()
        .map(|s| large.symbol_index(s))
        .collect();
    let mut phi: Vec<StateId> = Vec::with_capacity(small.num_states());
    let mut key: Vec<StateId> = Vec::new();

    'states: for q in small.ordered_states() {
        let Some(symbol) = symbol_map[small.raw_symbol(q) as usize] else {
            phi.push(UNMATCHED);
            continue;
        };
        key.clear();
        for c in small.raw_children(q) {
            let mapped = phi[c.index()];
            if mapped == UNMATCHED {
                phi.push(UNMATCHED);
                continue 'states;
            }
            key.push(mapped);
        }
        match large.find_interned(symbol, &key) {
            Some(p) => {
                phi.push(p);
                on_match(q, p)?;
            }
            None => phi.push(UNMATCHED),
        }
    }
    Ok(small.num_states())
}

/// The accessible part of `ax ⊙ ay` with its root weights.
pub fn hadamard_accessible(ax: &StAutomaton, ay: &StAutomaton) -> Result<ProductResult> {
    let mut matched = Vec::new();
    let mut total: u128 = 0;
    let x_small = ax.num_states() <= ay.num_states();
    let explored = walk_product(ax, ay, |s, l| {
        let (px, py) = if x_small { (s, l) } else { (l, s) };
        let weight = ax.raw_weight(px) as u128 * ay.raw_weight(py) as u128;
        total = total.checked_add(weight).ok_or(Error::WeightOverflow)?;
        matched.push(MatchedState {
            state_x: px,
            state_y: py,
            weight,
        });
        Ok(())
    })?;
    Ok(ProductResult {
        matched,
        kernel_value: total,
        states_explored: explored,
        exceeds_u64: total > u64::MAX as u128,
    })
}

/// Same walk as [`hadamard_accessible`] without collecting the pairs.
pub fn product_summary(ax: &StAutomaton, ay: &StAutomaton) -> Result<ProductSummary> {
    let (small, large) = if ax.num_states() <= ay.num_states() {
        (ax, ay)
    } else {
        (ay, ax)
    };
    let mut total: u128 = 0;
    let mut count = 0usize;
    let explored = walk_product(ax, ay, |s, l| {
        count += 1;
        let weight = small.raw_weight(s) as u128 * large.raw_weight(l) as u128;
        total = total.checked_add(weight).ok_or(Error::WeightOverflow)?;
        Ok(())
    })?;
    Ok(ProductSummary {
        kernel_value: total,
        matched_states: count,
        states_explored: explored,
    })
}

/// Kernel of two prebuilt ST automata.
pub fn automata_kernel(ax: &StAutomaton, ay: &StAutomaton) -> Result<KernelValue> {
    Ok(product_summary(ax, ay)?.kernel_value)
}

/// `SubTreeKernel(X, Y)`: builds both ST automata and sums the root weights
/// of the accessible product.
pub fn subtree_kernel(x: &TreeLanguage, y: &TreeLanguage) -> Result<KernelValue> {
    if x.mode() != y.mode() {
        return Err(Error::ModeMismatch {
            left: x.mode(),
            right: y.mode(),
        });
    }
    let ax = StAutomaton::from_language(x)?;
    let ay = StAutomaton::from_language(y)?;
    automata_kernel(&ax, &ay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_tree;
    use crate::series::brute_force_kernel;
    use crate::tree::{RankedAlphabet, Tree, TreeMode};

    fn p(s: &str) -> Tree {
        parse_tree(s, None).unwrap()
    }

    fn lang(items: &[&str]) -> TreeLanguage {
        TreeLanguage::from_trees(items.iter().map(|s| p(s)), TreeMode::Ordered).unwrap()
    }

    #[test]
    fn worked_example() {
        let x = lang(&["f(h(a),f(h(a),b))", "f(h(a),h(b))"]);
        let y = lang(&["f(f(b,h(b)),f(h(a),h(b)))"]);
        let ax = StAutomaton::from_language(&x).unwrap();
        let ay = StAutomaton::from_language(&y).unwrap();
        let r = hadamard_accessible(&ax, &ay).unwrap();
        assert_eq!(r.kernel_value, 15);
        assert!(!r.exceeds_u64);
        let want = TreeSeries::from_terms([
            (p("f(h(a),h(b))"), 1),
            (p("h(b)"), 2),
            (p("h(a)"), 3),
            (p("b"), 6),
            (p("a"), 3),
        ])
        .unwrap();
        assert_eq!(r.to_series(&ax).unwrap(), want);
        assert_eq!(subtree_kernel(&x, &y).unwrap(), 15);
        assert_eq!(subtree_kernel(&y, &x).unwrap(), 15);

        let rev = hadamard_accessible(&ay, &ax).unwrap();
        assert_eq!(rev.to_series(&ay).unwrap(), want);
    }

    #[test]
    fn disjoint_and_empty() {
        let r = hadamard_accessible(
            &StAutomaton::from_language(&lang(&["a"])).unwrap(),
            &StAutomaton::from_language(&lang(&["b"])).unwrap(),
        )
        .unwrap();
        assert!(r.matched.is_empty());
        assert_eq!(r.kernel_value, 0);
        assert_eq!(
            subtree_kernel(&TreeLanguage::new(TreeMode::Ordered), &lang(&["f(a,b)"])).unwrap(),
            0
        );
    }

    #[test]
    fn self_products() {
        let z = StAutomaton::from_language(&lang(&["f(a,g(a))"])).unwrap();
        let r = hadamard_accessible(&z, &z).unwrap();
        assert_eq!(r.matched.len(), 3);
        // a occurs twice in f(a,g(a)): weights 4, 1, 1.
        let mut weights: Vec<u128> = r.matched.iter().map(|m| m.weight).collect();
        weights.sort();
        assert_eq!(weights, vec![1, 1, 4]);

        let t1 = lang(&["f(h(a),f(h(a),b))"]);
        assert_eq!(subtree_kernel(&t1, &t1).unwrap(), 11);
        assert_eq!(brute_force_kernel(&t1, &t1).unwrap(), 11);
    }

    #[test]
    fn summary_matches_full_result() {
        let x = StAutomaton::from_language(&lang(&["f(h(a),f(h(a),b))", "f(h(a),h(b))"])).unwrap();
        let y = StAutomaton::from_language(&lang(&["f(f(b,h(b)),f(h(a),h(b)))"])).unwrap();
        for (a, b) in [(&x, &y), (&y, &x)] {
            let full = hadamard_accessible(a, b).unwrap();
            let s = product_summary(a, b).unwrap();
            assert_eq!(s.kernel_value, full.kernel_value);
            assert_eq!(s.matched_states, full.matched.len());
            assert_eq!(s.states_explored, full.states_explored);
            assert_eq!(s.states_explored, a.num_states().min(b.num_states()));
        }
    }

    #[test]
    fn compatibility_checks() {
        let ordered = StAutomaton::from_language(&lang(&["a"])).unwrap();
        let unordered = StAutomaton::new(TreeMode::Unordered);
        assert!(matches!(
            hadamard_accessible(&ordered, &unordered),
            Err(Error::ModeMismatch { .. })
        ));
        let with = |pairs: &[(&str, usize)]| {
            StAutomaton::from_language(
                &lang(&["a"])
                    .with_alphabet(RankedAlphabet::from_pairs(pairs.iter().copied()).unwrap())
                    .unwrap(),
            )
            .unwrap()
        };
        assert!(matches!(
            hadamard_accessible(&with(&[("a", 0)]), &with(&[("a", 0), ("b", 0)])),
            Err(Error::AlphabetMismatch(_))
        ));
        assert_eq!(
            automata_kernel(&with(&[("a", 0)]), &with(&[("a", 0)])).unwrap(),
            1
        );
    }

    #[test]
    fn wide_values_are_flagged() {
        // A chain of 2^33 leaves is out of reach, but root weights can be
        // raised through repeated unions of the same automaton.
        let base = StAutomaton::from_tree(&p("a"), TreeMode::Ordered);
        let mut big = base.clone();
        for _ in 0..33 {
            let copy = big.clone();
            big.union_into(&copy).unwrap();
        }
        assert_eq!(big.root_weight(StateId::new(0)).unwrap(), 1 << 33);
        let r = hadamard_accessible(&big, &big).unwrap();
        assert_eq!(r.kernel_value, 1u128 << 66);
        assert!(r.exceeds_u64);
    }
}
