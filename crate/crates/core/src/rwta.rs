//! Root-weighted tree automata.
//!
//! An RWTA is a bottom-up tree automaton `(Σ, Q, ν, δ)` without final states:
//! instead every state carries a root weight `ν(q)`, and a tree `t` weighs
//! `ν(Δ(t))`, the sum of the root weights of the states `t` evaluates to
//! (zero when `Δ(t)` is empty). Weights are natural numbers under addition.
//!
//! The automaton may be non-deterministic and cyclic, so the realized series
//! can have infinite support; only size-bounded materialization is offered.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::series::TreeSeries;
use crate::tree::{RankedAlphabet, Symbol, Tree};

/// Dense state index, unique within one automaton.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(u32);

impl StateId {
    pub const fn new(index: usize) -> Self {
        StateId(index as u32)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// One tuple `(target, symbol, children)` of the transition set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub target: StateId,
    pub symbol: Symbol,
    pub children: Vec<StateId>,
}

/// Default cap on candidate trees examined by [`Rwta::series_support_up_to`].
pub const DEFAULT_ENUMERATION_BUDGET: usize = 2_000_000;

#[derive(Clone)]
pub struct Rwta {
    alphabet: RankedAlphabet,
    labels: Vec<String>,
    weights: Vec<u64>,
    transitions: Vec<Transition>,
    // δ(f, q1..qk) as a set of targets.
    by_key: HashMap<(Symbol, Vec<StateId>), Vec<StateId>>,
    // transition indices per symbol
    by_symbol: HashMap<Symbol, Vec<usize>>,
}

/// Incremental construction of an [`Rwta`] from symbolic state labels.
pub struct RwtaBuilder {
    alphabet: RankedAlphabet,
    ids: HashMap<String, StateId>,
    labels: Vec<String>,
    weights: Vec<u64>,
    transitions: BTreeSet<Transition>,
}

impl RwtaBuilder {
    pub fn new(alphabet: RankedAlphabet) -> Self {
        RwtaBuilder {
            alphabet,
            ids: HashMap::new(),
            labels: Vec::new(),
            weights: Vec::new(),
            transitions: BTreeSet::new(),
        }
    }

    /// The state labelled `label`, created with weight 0 on first use.
    pub fn state(&mut self, label: &str) -> StateId {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = StateId::new(self.labels.len());
        self.ids.insert(label.to_string(), id);
        self.labels.push(label.to_string());
        self.weights.push(0);
        id
    }

    pub fn set_weight(&mut self, state: StateId, weight: u64) -> Result<()> {
        let slot = self
            .weights
            .get_mut(state.index())
            .ok_or(Error::UnknownState(state.index()))?;
        *slot = weight;
        Ok(())
    }

    /// Adds `(target, symbol, children)`; returns false if it was present.
    pub fn transition(
        &mut self,
        target: StateId,
        symbol: &Symbol,
        children: &[StateId],
    ) -> Result<bool> {
        if !self.alphabet.contains(symbol) {
            return Err(Error::UnknownSymbol(symbol.clone()));
        }
        if symbol.arity() != children.len() {
            return Err(Error::Arity {
                name: symbol.name().to_string(),
                arity: children.len(),
                offset: 0,
            });
        }
        for q in std::iter::once(&target).chain(children) {
            if q.index() >= self.labels.len() {
                return Err(Error::UnknownState(q.index()));
            }
        }
        Ok(self.transitions.insert(Transition {
            target,
            symbol: symbol.clone(),
            children: children.to_vec(),
        }))
    }

    /// Label-based shorthand for [`RwtaBuilder::transition`].
    pub fn rule(&mut self, target: &str, name: &str, children: &[&str]) -> Result<bool> {
        let symbol = Symbol::new(name, children.len())?;
        let target = self.state(target);
        let children: Vec<StateId> = children.iter().map(|c| self.state(c)).collect();
        self.transition(target, &symbol, &children)
    }

    pub fn build(self) -> Rwta {
        Rwta::from_parts(
            self.alphabet,
            self.labels,
            self.weights,
            self.transitions.into_iter().collect(),
        )
    }
}

impl Rwta {
    pub(crate) fn from_parts(
        alphabet: RankedAlphabet,
        labels: Vec<String>,
        weights: Vec<u64>,
        transitions: Vec<Transition>,
    ) -> Self {
        let mut by_key: HashMap<(Symbol, Vec<StateId>), Vec<StateId>> = HashMap::new();
        let mut by_symbol: HashMap<Symbol, Vec<usize>> = HashMap::new();
        for (i, tr) in transitions.iter().enumerate() {
            by_key
                .entry((tr.symbol.clone(), tr.children.clone()))
                .or_default()
                .push(tr.target);
            by_symbol.entry(tr.symbol.clone()).or_default().push(i);
        }
        Rwta {
            alphabet,
            labels,
            weights,
            transitions,
            by_key,
            by_symbol,
        }
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.weights.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states()).map(StateId::new)
    }

    pub fn label(&self, q: StateId) -> Option<&str> {
        self.labels.get(q.index()).map(String::as_str)
    }

    /// `ν(q)`.
    pub fn root_weight(&self, q: StateId) -> Result<u64> {
        self.weights
            .get(q.index())
            .copied()
            .ok_or(Error::UnknownState(q.index()))
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// `δ(f, Q1, …, Qk)`: the union of `δ(f, q1, …, qk)` over the Cartesian
    /// product of the child sets.
    pub fn delta_step(
        &self,
        symbol: &Symbol,
        child_sets: &[BTreeSet<StateId>],
    ) -> Result<BTreeSet<StateId>> {
        if !self.alphabet.contains(symbol) {
            return Err(Error::UnknownSymbol(symbol.clone()));
        }
        if symbol.arity() != child_sets.len() {
            return Err(Error::Arity {
                name: symbol.name().to_string(),
                arity: child_sets.len(),
                offset: 0,
            });
        }
        let mut out = BTreeSet::new();
        let candidates = match self.by_symbol.get(symbol) {
            Some(c) => c,
            None => return Ok(out),
        };
        // Either walk the product of the child sets through the key index or
        // filter the symbol's transitions, whichever touches fewer tuples.
        let product = child_sets
            .iter()
            .try_fold(1usize, |acc, s| acc.checked_mul(s.len()));
        match product {
            Some(0) => {}
            Some(n) if n <= candidates.len() => {
                let sets: Vec<Vec<StateId>> =
                    child_sets.iter().map(|s| s.iter().copied().collect()).collect();
                let mut tuple = vec![StateId::new(0); sets.len()];
                let mut key = (symbol.clone(), Vec::new());
                for_each_tuple(&sets, &mut tuple, 0, &mut |tuple| {
                    key.1.clear();
                    key.1.extend_from_slice(tuple);
                    if let Some(targets) = self.by_key.get(&key) {
                        out.extend(targets.iter().copied());
                    }
                });
            }
            _ => {
                for &i in candidates {
                    let tr = &self.transitions[i];
                    if tr
                        .children
                        .iter()
                        .zip(child_sets)
                        .all(|(q, set)| set.contains(q))
                    {
                        out.insert(tr.target);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Δ(t)`, computed bottom-up in one pass.
    pub fn evaluate(&self, tree: &Tree) -> Result<BTreeSet<StateId>> {
        let mut values: Vec<BTreeSet<StateId>> = Vec::new();
        for node in tree.post_order() {
            let k = node.children().len();
            let child_sets = values.split_off(values.len() - k);
            values.push(self.delta_step(node.symbol(), &child_sets)?);
        }
        Ok(values.pop().expect("a tree has a root"))
    }

    /// `ν(Δ(t))`.
    pub fn weight(&self, tree: &Tree) -> Result<u64> {
        self.weight_of_states(&self.evaluate(tree)?)
    }

    pub fn weight_of_states(&self, states: &BTreeSet<StateId>) -> Result<u64> {
        states.iter().try_fold(0u64, |acc, q| {
            acc.checked_add(self.weights[q.index()])
                .ok_or(Error::WeightOverflow)
        })
    }

    /// Whether `t` belongs to the down language of `q`, i.e. `q ∈ Δ(t)`.
    pub fn accepts_at(&self, q: StateId, tree: &Tree) -> Result<bool> {
        if q.index() >= self.num_states() {
            return Err(Error::UnknownState(q.index()));
        }
        Ok(self.evaluate(tree)?.contains(&q))
    }

    /// The realized series restricted to trees of at most `max_size` nodes.
    pub fn series_support_up_to(&self, max_size: usize) -> Result<TreeSeries> {
        self.series_support_up_to_with_budget(max_size, DEFAULT_ENUMERATION_BUDGET)
    }

    /// Like [`Rwta::series_support_up_to`] with an explicit cap on the number
    /// of candidate trees examined.
    ///
    /// Trees are enumerated by increasing size. A tree with `Δ(t) = ∅` can
    /// never be the subtree of a tree with nonzero weight, so only trees with
    /// a nonempty evaluation are kept as building blocks.
    pub fn series_support_up_to_with_budget(
        &self,
        max_size: usize,
        budget: usize,
    ) -> Result<TreeSeries> {
        let symbols: Vec<&Symbol> = self.alphabet.iter().collect();
        // live[s]: trees of exactly s nodes with a nonempty evaluation
        let mut live: Vec<Vec<(Tree, BTreeSet<StateId>)>> = vec![Vec::new(); max_size + 1];
        let mut examined = 0usize;

        for size in 1..=max_size {
            let mut found = Vec::new();
            for symbol in &symbols {
                let k = symbol.arity();
                if k == 0 {
                    if size == 1 {
                        examined += 1;
                        let states = self.delta_step(symbol, &[])?;
                        if !states.is_empty() {
                            found.push((Tree::from_valid((*symbol).clone(), Vec::new()), states));
                        }
                    }
                    continue;
                }
                if size < k + 1 {
                    continue;
                }
                let mut parts = vec![0usize; k];
                let mut err = None;
                for_each_composition(size - 1, &mut parts, 0, &mut |parts| {
                    if err.is_some() || parts.iter().any(|&p| live[p].is_empty()) {
                        return;
                    }
                    let lists: Vec<&[(Tree, BTreeSet<StateId>)]> =
                        parts.iter().map(|&p| live[p].as_slice()).collect();
                    let mut picks = vec![0usize; k];
                    loop {
                        examined += 1;
                        if examined > budget {
                            err = Some(Error::BudgetExceeded { budget });
                            return;
                        }
                        let sets: Vec<BTreeSet<StateId>> =
                            (0..k).map(|j| lists[j][picks[j]].1.clone()).collect();
                        match self.delta_step(symbol, &sets) {
                            Ok(states) if !states.is_empty() => {
                                let children =
                                    (0..k).map(|j| lists[j][picks[j]].0.clone()).collect();
                                found.push((
                                    Tree::from_valid((*symbol).clone(), children),
                                    states,
                                ));
                            }
                            Ok(_) => {}
                            Err(e) => {
                                err = Some(e);
                                return;
                            }
                        }
                        // odometer over the Cartesian product
                        let mut j = 0;
                        loop {
                            if j == k {
                                return;
                            }
                            picks[j] += 1;
                            if picks[j] < lists[j].len() {
                                break;
                            }
                            picks[j] = 0;
                            j += 1;
                        }
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
            live[size] = found;
        }

        let mut series = TreeSeries::new();
        for (tree, states) in live.into_iter().flatten() {
            let w = self.weight_of_states(&states)?;
            series.add_term(tree, w)?;
        }
        Ok(series)
    }

    /// Line-oriented dump: `state <id> nu=<w>` per state, then
    /// `trans <target> <name>/<k> <c1> ... <ck>` sorted by target, then
    /// symbol, then children.
    pub fn debug_text(&self) -> String {
        let mut out = String::new();
        for q in self.states() {
            out.push_str(&format!("state {} nu={}\n", q, self.weights[q.index()]));
        }
        let mut sorted: Vec<&Transition> = self.transitions.iter().collect();
        sorted.sort();
        for tr in sorted {
            write_transition_line(&mut out, tr.target, &tr.symbol, &tr.children);
        }
        out
    }
}

pub(crate) fn write_transition_line(
    out: &mut String,
    target: StateId,
    symbol: &Symbol,
    children: &[StateId],
) {
    out.push_str(&format!("trans {} {}", target, symbol));
    for c in children {
        out.push_str(&format!(" {}", c));
    }
    out.push('\n');
}

impl fmt::Debug for Rwta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.debug_text())
    }
}

fn for_each_tuple(
    sets: &[Vec<StateId>],
    tuple: &mut Vec<StateId>,
    at: usize,
    f: &mut impl FnMut(&[StateId]),
) {
    if at == sets.len() {
        f(tuple);
        return;
    }
    for &q in &sets[at] {
        tuple[at] = q;
        for_each_tuple(sets, tuple, at + 1, f);
    }
}

/// Calls `f` with every way of writing `total` as an ordered sum of
/// `parts.len()` positive integers.
fn for_each_composition(total: usize, parts: &mut Vec<usize>, at: usize, f: &mut impl FnMut(&[usize])) {
    let remaining_slots = parts.len() - at;
    if remaining_slots == 1 {
        parts[at] = total;
        f(parts);
        return;
    }
    for first in 1..=total.saturating_sub(remaining_slots - 1) {
        parts[at] = first;
        for_each_composition(total - first, parts, at + 1, f);
    }
}
