//! SubTree automata.
//!
//! The ST automaton of a finite language `L` has one state per distinct
//! subtree occurring in `L`. State `q` for `s = f(s1, …, sk)` has the single
//! incoming transition `f(q1, …, qk) → q`, and its root weight is the number
//! of nodes of `L` at which `s` is rooted. Such an automaton is deterministic
//! and homogeneous, and is exactly the maximally shared DAG of the forest.
//!
//! States are numbered in creation order and every state is created after its
//! children, so the id order is a valid bottom-up (topological) order of the
//! transitions. The transition index maps `(symbol, children)` to the target
//! and is keyed on the inverse table (`δ⁻¹`), which holds each state's symbol
//! and child tuple; a lookup hashes and compares `O(arity)` words.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use hashbrown::HashTable;
use rustc_hash::FxHasher;
use thiserror::Error;

use crate::canonical::canonicalize;
use crate::error::{Error, Result};
use crate::rwta::{write_transition_line, Rwta, StateId, Transition};
use crate::series::TreeSeries;
use crate::tree::{RankedAlphabet, Symbol, Tree, TreeLanguage, TreeMode};

/// Index of an interned symbol inside one automaton.
type SymbolIdx = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ST automaton invariant violated: {0}")]
pub struct InvariantViolation(pub String);

#[derive(Clone)]
pub struct StAutomaton {
    mode: TreeMode,
    alphabet: Option<RankedAlphabet>,
    symbols: Vec<Symbol>,
    symbol_ids: HashMap<Symbol, SymbolIdx>,
    // δ⁻¹, one entry per state: symbol and child range into `child_pool`
    state_symbol: Vec<SymbolIdx>,
    child_start: Vec<u32>,
    child_pool: Vec<StateId>,
    weights: Vec<u64>,
    marked: Vec<bool>,
    index: HashTable<StateId>,
    // |L| of everything inserted so far
    source_size: usize,
}

fn key_hash(symbol: SymbolIdx, children: &[StateId]) -> u64 {
    let mut h = FxHasher::default();
    symbol.hash(&mut h);
    children.hash(&mut h);
    h.finish()
}

impl StAutomaton {
    /// The automaton of the empty language.
    pub fn new(mode: TreeMode) -> Self {
        StAutomaton {
            mode,
            alphabet: None,
            symbols: Vec::new(),
            symbol_ids: HashMap::new(),
            state_symbol: Vec::new(),
            child_start: vec![0],
            child_pool: Vec::new(),
            weights: Vec::new(),
            marked: Vec::new(),
            index: HashTable::new(),
            source_size: 0,
        }
    }

    /// The automaton of `{tree}`. In unordered mode the tree is canonicalized
    /// first.
    pub fn from_tree(tree: &Tree, mode: TreeMode) -> Self {
        let mut aut = Self::new(mode);
        aut.insert_tree(tree)
            .expect("single-tree automata cannot overflow");
        aut
    }

    /// The automaton of a whole language, built in one pass over its nodes.
    pub fn from_language(language: &TreeLanguage) -> Result<Self> {
        let mut aut = Self::new(language.mode());
        aut.alphabet = language.declared_alphabet().cloned();
        let capacity = language.total_size();
        aut.reserve(capacity);
        for tree in language {
            aut.insert_canonical(tree)?;
        }
        Ok(aut)
    }

    fn reserve(&mut self, states: usize) {
        self.state_symbol.reserve(states);
        self.child_start.reserve(states);
        self.child_pool.reserve(states);
        self.weights.reserve(states);
        self.marked.reserve(states);
        self.index.reserve(states, |_| 0);
    }

    /// Adds one tree (with multiplicity: its nodes are counted again if
    /// already present) and marks its root state, which is returned.
    pub fn insert_tree(&mut self, tree: &Tree) -> Result<StateId> {
        match self.mode {
            TreeMode::Ordered => self.insert_canonical(tree),
            TreeMode::Unordered => self.insert_canonical(&canonicalize(tree, self.mode)),
        }
    }

    fn insert_canonical(&mut self, tree: &Tree) -> Result<StateId> {
        if let Some(alphabet) = &self.alphabet {
            if let Some(bad) = tree.post_order().find(|n| !alphabet.contains(n.symbol())) {
                return Err(Error::AlphabetMismatch(format!(
                    "symbol {} is not in the declared alphabet",
                    bad.symbol()
                )));
            }
        }
        let mut stack: Vec<StateId> = Vec::new();
        let mut nodes = 0usize;
        for node in tree.post_order() {
            nodes += 1;
            let symbol = self.intern(node.symbol());
            let start = stack.len() - node.children().len();
            let q = self.find_or_add(symbol, start, &mut stack, 1)?;
            stack.truncate(start);
            stack.push(q);
        }
        let root = stack.pop().expect("a tree has a root");
        self.marked[root.index()] = true;
        self.source_size += nodes;
        Ok(root)
    }

    fn intern(&mut self, symbol: &Symbol) -> SymbolIdx {
        if let Some(&i) = self.symbol_ids.get(symbol) {
            return i;
        }
        let i = self.symbols.len() as SymbolIdx;
        self.symbols.push(symbol.clone());
        self.symbol_ids.insert(symbol.clone(), i);
        i
    }

    /// Target of `(symbol, children)` where the children are
    /// `scratch[start..]`; creates the state if absent. Adds `weight` to
    /// `ν` of the result.
    fn find_or_add(
        &mut self,
        symbol: SymbolIdx,
        start: usize,
        scratch: &mut [StateId],
        weight: u64,
    ) -> Result<StateId> {
        let children = &scratch[start..];
        let hash = key_hash(symbol, children);
        if let Some(&q) = self.index.find(hash, |&q| {
            self.state_symbol[q.index()] == symbol && self.children_of(q) == children
        }) {
            let w = &mut self.weights[q.index()];
            *w = w.checked_add(weight).ok_or(Error::WeightOverflow)?;
            return Ok(q);
        }
        let q = StateId::new(self.weights.len());
        self.state_symbol.push(symbol);
        self.child_pool.extend_from_slice(children);
        self.child_start.push(self.child_pool.len() as u32);
        self.weights.push(weight);
        self.marked.push(false);

        let (state_symbol, child_start, child_pool) =
            (&self.state_symbol, &self.child_start, &self.child_pool);
        self.index.insert_unique(hash, q, |&p| {
            let i = p.index();
            let kids = &child_pool[child_start[i] as usize..child_start[i + 1] as usize];
            key_hash(state_symbol[i], kids)
        });
        Ok(q)
    }

    #[inline]
    fn children_of(&self, q: StateId) -> &[StateId] {
        let i = q.index();
        &self.child_pool[self.child_start[i] as usize..self.child_start[i + 1] as usize]
    }

    #[inline]
    pub(crate) fn find_interned(&self, symbol: SymbolIdx, children: &[StateId]) -> Option<StateId> {
        let hash = key_hash(symbol, children);
        self.index
            .find(hash, |&q| {
                self.state_symbol[q.index()] == symbol && self.children_of(q) == children
            })
            .copied()
    }

    pub(crate) fn symbol_index(&self, symbol: &Symbol) -> Option<SymbolIdx> {
        self.symbol_ids.get(symbol).copied()
    }

    pub(crate) fn interned_symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    #[inline]
    pub(crate) fn raw_symbol(&self, q: StateId) -> SymbolIdx {
        self.state_symbol[q.index()]
    }

    #[inline]
    pub(crate) fn raw_children(&self, q: StateId) -> &[StateId] {
        self.children_of(q)
    }

    #[inline]
    pub(crate) fn raw_weight(&self, q: StateId) -> u64 {
        self.weights[q.index()]
    }

    fn check_state(&self, q: StateId) -> Result<()> {
        if q.index() < self.num_states() {
            Ok(())
        } else {
            Err(Error::UnknownState(q.index()))
        }
    }

    /// Extends `self` with `source`: afterwards `self` is the ST automaton of
    /// the union of both languages, with root weights summed. `source` is
    /// walked once in its state order while a map from its states to ours
    /// is maintained.
    pub fn union_into(&mut self, source: &StAutomaton) -> Result<()> {
        if self.mode != source.mode {
            return Err(Error::ModeMismatch {
                left: self.mode,
                right: source.mode,
            });
        }
        self.merge_alphabet(source)?;
        let symbol_map: Vec<SymbolIdx> = source.symbols.iter().map(|s| self.intern(s)).collect();

        let mut phi: Vec<StateId> = Vec::with_capacity(source.num_states());
        let mut scratch: Vec<StateId> = Vec::new();
        for q in source.ordered_states() {
            scratch.clear();
            scratch.extend(source.children_of(q).iter().map(|c| phi[c.index()]));
            let target = self.find_or_add(
                symbol_map[source.state_symbol[q.index()] as usize],
                0,
                &mut scratch,
                source.weights[q.index()],
            )?;
            if source.marked[q.index()] {
                self.marked[target.index()] = true;
            }
            phi.push(target);
        }
        self.source_size += source.source_size;
        Ok(())
    }

    /// Union of two automata, folding the smaller one into the larger.
    pub fn union(a: StAutomaton, b: StAutomaton) -> Result<StAutomaton> {
        let (mut target, source) = if a.num_states() >= b.num_states() {
            (a, b)
        } else {
            (b, a)
        };
        target.union_into(&source)?;
        Ok(target)
    }

    fn merge_alphabet(&mut self, source: &StAutomaton) -> Result<()> {
        match (&self.alphabet, &source.alphabet) {
            (Some(mine), Some(theirs)) if mine != theirs => Err(Error::AlphabetMismatch(
                "declared alphabets differ".to_string(),
            )),
            (Some(mine), None) => match source.symbols.iter().find(|s| !mine.contains(s)) {
                Some(s) => Err(Error::AlphabetMismatch(format!(
                    "symbol {s} is not in the declared alphabet"
                ))),
                None => Ok(()),
            },
            (None, Some(theirs)) => match self.symbols.iter().find(|s| !theirs.contains(s)) {
                Some(s) => Err(Error::AlphabetMismatch(format!(
                    "symbol {s} is not in the declared alphabet"
                ))),
                None => {
                    self.alphabet = Some(theirs.clone());
                    Ok(())
                }
            },
            _ => Ok(()),
        }
    }

    /// `δ(f, q1, …, qk)`, if defined.
    pub fn lookup(&self, symbol: &Symbol, children: &[StateId]) -> Result<Option<StateId>> {
        for &c in children {
            self.check_state(c)?;
        }
        Ok(self
            .symbol_index(symbol)
            .and_then(|s| self.find_interned(s, children)))
    }

    /// `δ⁻¹(q)`: the symbol and child tuple of the unique transition into `q`.
    pub fn delta_inverse(&self, q: StateId) -> Result<(&Symbol, &[StateId])> {
        self.check_state(q)?;
        Ok((
            &self.symbols[self.state_symbol[q.index()] as usize],
            self.children_of(q),
        ))
    }

    /// The subtree that state `q` stands for.
    pub fn state_to_tree(&self, q: StateId) -> Result<Tree> {
        self.check_state(q)?;
        Ok(self.expand(q))
    }

    fn expand(&self, q: StateId) -> Tree {
        let children = self.children_of(q).iter().map(|&c| self.expand(c)).collect();
        Tree::from_valid(
            self.symbols[self.state_symbol[q.index()] as usize].clone(),
            children,
        )
    }

    /// Runs the deterministic automaton on `tree`. `None` when some node has
    /// no transition.
    pub fn run(&self, tree: &Tree) -> Option<StateId> {
        let tree = canonicalize(tree, self.mode);
        let mut stack: Vec<StateId> = Vec::new();
        for node in tree.post_order() {
            let symbol = self.symbol_index(node.symbol())?;
            let start = stack.len() - node.children().len();
            let q = self.find_interned(symbol, &stack[start..])?;
            stack.truncate(start);
            stack.push(q);
        }
        stack.pop()
    }

    /// Occurrence count of `tree` in the language (0 when absent).
    pub fn weight(&self, tree: &Tree) -> u64 {
        self.run(tree).map_or(0, |q| self.weights[q.index()])
    }

    pub fn mode(&self) -> TreeMode {
        self.mode
    }

    pub fn declared_alphabet(&self) -> Option<&RankedAlphabet> {
        self.alphabet.as_ref()
    }

    pub fn used_alphabet(&self) -> RankedAlphabet {
        self.symbols.iter().cloned().collect()
    }

    pub fn num_states(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Total size of the trees inserted so far (with multiplicity).
    pub fn source_size(&self) -> usize {
        self.source_size
    }

    /// States in creation order; every state comes after its children.
    pub fn ordered_states(&self) -> impl DoubleEndedIterator<Item = StateId> + ExactSizeIterator {
        (0..self.num_states()).map(StateId::new)
    }

    pub fn root_weight(&self, q: StateId) -> Result<u64> {
        self.check_state(q)?;
        Ok(self.weights[q.index()])
    }

    /// `h(q)`, the symbol labelling every transition into `q`.
    pub fn symbol_of(&self, q: StateId) -> Result<&Symbol> {
        Ok(self.delta_inverse(q)?.0)
    }

    pub fn is_marked(&self, q: StateId) -> Result<bool> {
        self.check_state(q)?;
        Ok(self.marked[q.index()])
    }

    pub fn marked_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.marked
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| StateId::new(i))
    }

    /// The realized series, one term per state.
    pub fn realized_series(&self) -> TreeSeries {
        TreeSeries::from_terms(
            self.ordered_states()
                .map(|q| (self.expand(q), self.weights[q.index()])),
        )
        .expect("states are distinct trees")
    }

    /// The same automaton as a general [`Rwta`] with identical state ids.
    pub fn to_rwta(&self) -> Rwta {
        let alphabet = self
            .alphabet
            .clone()
            .unwrap_or_else(|| self.used_alphabet());
        let transitions = self
            .ordered_states()
            .map(|q| Transition {
                target: q,
                symbol: self.symbols[self.state_symbol[q.index()] as usize].clone(),
                children: self.children_of(q).to_vec(),
            })
            .collect();
        Rwta::from_parts(
            alphabet,
            (0..self.num_states()).map(|i| i.to_string()).collect(),
            self.weights.clone(),
            transitions,
        )
    }

    /// Verifies determinism, homogeneity, the inverse/index bijection, the
    /// bottom-up state order, positive weights and `|Q| ≤ |L|`.
    pub fn check_invariants(&self) -> std::result::Result<(), InvariantViolation> {
        let fail = |msg: String| Err(InvariantViolation(msg));
        let n = self.num_states();
        if self.index.len() != n {
            return fail(format!("index holds {} keys for {} states", self.index.len(), n));
        }
        if n > self.source_size {
            return fail(format!("{} states for source size {}", n, self.source_size));
        }
        for q in self.ordered_states() {
            let symbol = &self.symbols[self.state_symbol[q.index()] as usize];
            let children = self.children_of(q);
            if symbol.arity() != children.len() {
                return fail(format!("state {q} has {} children under {symbol}", children.len()));
            }
            if let Some(c) = children.iter().find(|c| c.index() >= q.index()) {
                return fail(format!("child {c} of state {q} does not precede it"));
            }
            match self.find_interned(self.state_symbol[q.index()], children) {
                Some(p) if p == q => {}
                Some(p) => return fail(format!("key of state {q} resolves to {p}")),
                None => return fail(format!("key of state {q} is not indexed")),
            }
            if self.weights[q.index()] == 0 {
                return fail(format!("state {q} has zero root weight"));
            }
        }
        Ok(())
    }

    /// Line-oriented dump as in [`Rwta::debug_text`], followed by
    /// `marked <id>` lines.
    pub fn debug_text(&self) -> String {
        let mut out = String::new();
        for q in self.ordered_states() {
            out.push_str(&format!("state {} nu={}\n", q, self.weights[q.index()]));
        }
        for q in self.ordered_states() {
            let symbol = &self.symbols[self.state_symbol[q.index()] as usize];
            write_transition_line(&mut out, q, symbol, self.children_of(q));
        }
        for q in self.marked_states() {
            out.push_str(&format!("marked {}\n", q));
        }
        out
    }
}

impl fmt::Debug for StAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.debug_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_tree;
    use crate::series::subtree_series;

    fn p(s: &str) -> Tree {
        parse_tree(s, None).unwrap()
    }

    fn lang(items: &[&str]) -> TreeLanguage {
        TreeLanguage::from_trees(items.iter().map(|s| p(s)), TreeMode::Ordered).unwrap()
    }

    fn sym(name: &str, arity: usize) -> Symbol {
        Symbol::new(name, arity).unwrap()
    }

    #[test]
    fn single_tree_weights() {
        let aut = StAutomaton::from_tree(&p("f(h(a),f(h(a),b))"), TreeMode::Ordered);
        aut.check_invariants().unwrap();
        assert_eq!(aut.num_states(), 5);
        for (s, w) in [
            ("a", 2),
            ("h(a)", 2),
            ("b", 1),
            ("f(h(a),b)", 1),
            ("f(h(a),f(h(a),b))", 1),
        ] {
            assert_eq!(aut.weight(&p(s)), w, "{s}");
        }
        let marked: Vec<_> = aut.marked_states().collect();
        assert_eq!(marked, vec![aut.run(&p("f(h(a),f(h(a),b))")).unwrap()]);
    }

    #[test]
    fn leaf_and_shared_children() {
        let leaf = StAutomaton::from_tree(&p("a"), TreeMode::Ordered);
        assert_eq!(leaf.num_states(), 1);
        assert_eq!(leaf.root_weight(StateId::new(0)).unwrap(), 1);
        assert!(leaf.is_marked(StateId::new(0)).unwrap());

        let shared = StAutomaton::from_tree(&p("f(a,a)"), TreeMode::Ordered);
        assert_eq!(shared.num_states(), 2);
        assert_eq!(shared.weight(&p("a")), 2);
        assert_eq!(shared.weight(&p("f(a,a)")), 1);
    }

    #[test]
    fn inverse_and_lookup_on_small_tree() {
        // States come out as a=0, g(a)=1, f(a,g(a))=2.
        let aut = StAutomaton::from_tree(&p("f(a,g(a))"), TreeMode::Ordered);
        let (q1, q2, q3) = (StateId::new(0), StateId::new(1), StateId::new(2));
        assert_eq!(aut.lookup(&sym("f", 2), &[q1, q2]).unwrap(), Some(q3));
        assert_eq!(aut.lookup(&sym("g", 1), &[q2]).unwrap(), None);
        assert_eq!(aut.lookup(&sym("a", 0), &[]).unwrap(), Some(q1));
        assert!(matches!(
            aut.lookup(&sym("g", 1), &[StateId::new(7)]),
            Err(Error::UnknownState(7))
        ));

        let (s, kids) = aut.delta_inverse(q2).unwrap();
        assert_eq!((s.to_string(), kids.to_vec()), ("g/1".to_string(), vec![q1]));
        let (s, kids) = aut.delta_inverse(q1).unwrap();
        assert_eq!((s.to_string(), kids.len()), ("a/0".to_string(), 0));
        assert!(matches!(
            aut.delta_inverse(StateId::new(99)),
            Err(Error::UnknownState(99))
        ));

        let names: Vec<String> = aut
            .ordered_states()
            .map(|q| aut.state_to_tree(q).unwrap().to_string())
            .collect();
        assert_eq!(names, ["a", "g(a)", "f(a,g(a))"]);
    }

    #[test]
    fn union_sums_occurrences() {
        let t1 = p("f(h(a),f(h(a),b))");
        let t2 = p("f(h(a),h(b))");
        let mut target = StAutomaton::from_tree(&t2, TreeMode::Ordered);
        let source = StAutomaton::from_tree(&t1, TreeMode::Ordered);
        let before = source.debug_text();
        target.union_into(&source).unwrap();
        target.check_invariants().unwrap();
        assert_eq!(source.debug_text(), before);
        assert_eq!(
            target.realized_series(),
            subtree_series(&lang(&["f(h(a),f(h(a),b))", "f(h(a),h(b))"]))
        );
        assert_eq!(target.marked_states().count(), 2);
    }

    #[test]
    fn union_with_empty_and_self() {
        let a = StAutomaton::from_tree(&p("f(a,g(a))"), TreeMode::Ordered);
        let mut empty = StAutomaton::new(TreeMode::Ordered);
        empty.union_into(&a).unwrap();
        assert_eq!(empty.debug_text(), a.debug_text());

        let mut twice = a.clone();
        twice.union_into(&a).unwrap();
        twice.check_invariants().unwrap();
        assert_eq!(twice.num_states(), a.num_states());
        for q in a.ordered_states() {
            assert_eq!(twice.root_weight(q).unwrap(), 2 * a.root_weight(q).unwrap());
        }
    }

    #[test]
    fn union_rejects_mode_and_alphabet_mismatch() {
        let mut a = StAutomaton::new(TreeMode::Ordered);
        let b = StAutomaton::new(TreeMode::Unordered);
        assert!(matches!(a.union_into(&b), Err(Error::ModeMismatch { .. })));

        let declared = lang(&["h(a)"])
            .with_alphabet(RankedAlphabet::from_pairs([("a", 0), ("h", 1)]).unwrap())
            .unwrap();
        let mut x = StAutomaton::from_language(&declared).unwrap();
        let y = StAutomaton::from_tree(&p("g(a)"), TreeMode::Ordered);
        assert!(matches!(x.union_into(&y), Err(Error::AlphabetMismatch(_))));
        let z = StAutomaton::from_tree(&p("h(h(a))"), TreeMode::Ordered);
        x.union_into(&z).unwrap();
    }

    #[test]
    fn language_automata() {
        let l = lang(&[
            "f(h(a),f(h(a),b))",
            "f(h(a),h(b))",
            "f(f(b,h(b)),f(h(a),h(b)))",
        ]);
        let aut = StAutomaton::from_language(&l).unwrap();
        aut.check_invariants().unwrap();
        assert_eq!(aut.num_states(), 9);
        assert_eq!(aut.marked_states().count(), 3);

        let empty = StAutomaton::from_language(&TreeLanguage::new(TreeMode::Ordered)).unwrap();
        assert_eq!(empty.num_states(), 0);
        empty.check_invariants().unwrap();

        let leaves = StAutomaton::from_language(&lang(&["a", "b"])).unwrap();
        assert_eq!(leaves.num_states(), 2);
        assert!(leaves.ordered_states().all(|q| leaves.root_weight(q).unwrap() == 1));
    }

    #[test]
    fn unordered_mode_shares_permuted_subtrees() {
        let aut = StAutomaton::from_tree(&p("k(f(a,b),f(b,a))"), TreeMode::Unordered);
        aut.check_invariants().unwrap();
        assert_eq!(aut.num_states(), 4);
        assert_eq!(aut.weight(&p("f(b,a)")), 2);
        let ordered = StAutomaton::from_tree(&p("k(f(a,b),f(b,a))"), TreeMode::Ordered);
        assert_eq!(ordered.num_states(), 5);
    }

    #[test]
    fn debug_text_golden() {
        let aut = StAutomaton::from_tree(&p("f(a,g(a))"), TreeMode::Ordered);
        assert_eq!(
            aut.debug_text(),
            "state 0 nu=2\nstate 1 nu=1\nstate 2 nu=1\n\
             trans 0 a/0\ntrans 1 g/1 0\ntrans 2 f/2 0 1\nmarked 2\n"
        );
    }

    #[test]
    fn rwta_view_agrees() {
        let aut = StAutomaton::from_tree(&p("f(a,g(a))"), TreeMode::Ordered);
        let rwta = aut.to_rwta();
        assert_eq!(
            rwta.series_support_up_to(4).unwrap(),
            aut.realized_series()
        );
        assert_eq!(rwta.weight(&p("g(a)")).unwrap(), 1);
    }
}
