//! Ranked trees, ranked alphabets and finite tree languages.
//!
//! A [`Tree`] is an immutable, well-ranked ordered tree: every node carries a
//! [`Symbol`] whose arity equals its number of children. Trees compare and
//! hash structurally. A [`TreeLanguage`] is a finite set of trees stored in
//! canonical form for its [`TreeMode`], so that two members that are equal up
//! to the mode's notion of equivalence can never both be present.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::BuildHasher;
use std::sync::Arc;

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;

use crate::canonical::canonicalize;
use crate::error::{Error, Result};

/// A ranked symbol: a name together with the number of children it takes.
///
/// The same name may occur at several arities; `f/1` and `f/2` are distinct
/// symbols.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    name: Arc<str>,
    arity: usize,
}

impl Symbol {
    pub fn new(name: &str, arity: usize) -> Result<Self> {
        if !is_valid_name(name) {
            return Err(Error::InvalidName(name.to_string()));
        }
        Ok(Symbol {
            name: Arc::from(name),
            arity,
        })
    }

    pub(crate) fn from_parts(name: Arc<str>, arity: usize) -> Self {
        debug_assert!(is_valid_name(&name));
        Symbol { name, arity }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub(crate) fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(is_name_byte)
}

/// A finite ranked alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankedAlphabet {
    symbols: BTreeSet<Symbol>,
}

impl RankedAlphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an alphabet from `(name, arity)` pairs. Repeated pairs collapse.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self> {
        let mut alphabet = Self::new();
        for (name, arity) in pairs {
            alphabet.insert(Symbol::new(name, arity)?);
        }
        Ok(alphabet)
    }

    pub fn insert(&mut self, symbol: Symbol) -> bool {
        self.symbols.insert(symbol)
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        self.symbols.contains(symbol)
    }

    pub fn contains_pair(&self, name: &str, arity: usize) -> bool {
        // BTreeSet lookups need an owned key; alphabets are small.
        self.symbols
            .iter()
            .any(|s| s.arity == arity && &*s.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn max_arity(&self) -> Option<usize> {
        self.symbols.iter().map(Symbol::arity).max()
    }

    pub fn is_subset(&self, other: &RankedAlphabet) -> bool {
        self.symbols.is_subset(&other.symbols)
    }

    pub fn union(&self, other: &RankedAlphabet) -> RankedAlphabet {
        RankedAlphabet {
            symbols: self.symbols.union(&other.symbols).cloned().collect(),
        }
    }
}

impl FromIterator<Symbol> for RankedAlphabet {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        RankedAlphabet {
            symbols: iter.into_iter().collect(),
        }
    }
}

/// Whether sibling order is significant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TreeMode {
    #[default]
    Ordered,
    Unordered,
}

impl fmt::Display for TreeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeMode::Ordered => "ordered",
            TreeMode::Unordered => "unordered",
        })
    }
}

impl std::str::FromStr for TreeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ordered" => Ok(TreeMode::Ordered),
            "unordered" => Ok(TreeMode::Unordered),
            other => Err(format!("unknown tree mode `{other}`")),
        }
    }
}

/// An immutable ranked ordered tree.
///
/// `Display` writes the compact text form, e.g. `f(h(a),b)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    symbol: Symbol,
    children: Vec<Tree>,
}

impl Tree {
    /// Builds `symbol(children...)`, checking that the arity matches.
    pub fn new(symbol: Symbol, children: Vec<Tree>) -> Result<Self> {
        if symbol.arity != children.len() {
            return Err(Error::Arity {
                name: symbol.name.to_string(),
                arity: children.len(),
                offset: 0,
            });
        }
        Ok(Tree { symbol, children })
    }

    /// A leaf labelled `name`.
    ///
    /// Panics if `name` is not a valid symbol name; use [`Tree::new`] for
    /// untrusted input.
    pub fn leaf(name: &str) -> Self {
        Self::node(name, Vec::new())
    }

    /// The node `name(children...)`, with the arity taken from `children`.
    ///
    /// Panics if `name` is not a valid symbol name.
    pub fn node(name: &str, children: Vec<Tree>) -> Self {
        let symbol = Symbol::new(name, children.len()).expect("invalid symbol name");
        Tree { symbol, children }
    }

    pub(crate) fn from_valid(symbol: Symbol, children: Vec<Tree>) -> Self {
        debug_assert_eq!(symbol.arity, children.len());
        Tree { symbol, children }
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        self.post_order().count()
    }

    /// Number of nodes on the longest root-to-leaf path; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self, 1usize)];
        while let Some((node, d)) = stack.pop() {
            best = best.max(d);
            stack.extend(node.children.iter().map(|c| (c, d + 1)));
        }
        best
    }

    /// Largest child count of any node.
    pub fn max_arity(&self) -> usize {
        self.post_order().map(|n| n.children.len()).max().unwrap_or(0)
    }

    /// The symbols occurring in the tree.
    pub fn alphabet(&self) -> RankedAlphabet {
        self.post_order().map(|n| n.symbol.clone()).collect()
    }

    /// Nodes in post-order (children left to right, then the parent).
    ///
    /// Iterative, so arbitrarily deep trees are fine.
    pub fn post_order(&self) -> PostOrder<'_> {
        PostOrder {
            stack: vec![(self, 0)],
        }
    }
}

pub struct PostOrder<'a> {
    stack: Vec<(&'a Tree, usize)>,
}

impl<'a> Iterator for PostOrder<'a> {
    type Item = &'a Tree;

    fn next(&mut self) -> Option<&'a Tree> {
        loop {
            let (node, next_child) = self.stack.last_mut()?;
            let node: &'a Tree = node;
            if *next_child < node.children.len() {
                let child = &node.children[*next_child];
                *next_child += 1;
                self.stack.push((child, 0));
            } else {
                self.stack.pop();
                return Some(node);
            }
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol.name)?;
        if let Some((first, rest)) = self.children.split_first() {
            f.write_str("(")?;
            first.fmt(f)?;
            for child in rest {
                f.write_str(",")?;
                child.fmt(f)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite set of trees, stored canonically for its mode.
#[derive(Clone)]
pub struct TreeLanguage {
    trees: Vec<Tree>,
    mode: TreeMode,
    alphabet: Option<RankedAlphabet>,
    index: HashTable<usize>,
}

impl TreeLanguage {
    pub fn new(mode: TreeMode) -> Self {
        TreeLanguage {
            trees: Vec::new(),
            mode,
            alphabet: None,
            index: HashTable::new(),
        }
    }

    /// Canonicalizes every tree for `mode`; fails on a repeated member.
    pub fn from_trees(trees: impl IntoIterator<Item = Tree>, mode: TreeMode) -> Result<Self> {
        let mut language = Self::new(mode);
        for tree in trees {
            language.push(tree)?;
        }
        Ok(language)
    }

    pub fn singleton(tree: Tree, mode: TreeMode) -> Self {
        let mut language = Self::new(mode);
        language.insert(tree);
        language
    }

    /// Declares an alphabet that every member (present and future) must use.
    pub fn with_alphabet(mut self, alphabet: RankedAlphabet) -> Result<Self> {
        for tree in &self.trees {
            check_alphabet(tree, &alphabet)?;
        }
        self.alphabet = Some(alphabet);
        Ok(self)
    }

    /// Adds a tree, failing with [`Error::DuplicateTree`] if it is already a
    /// member (after canonicalization).
    pub fn push(&mut self, tree: Tree) -> Result<()> {
        let tree = canonicalize(&tree, self.mode);
        if self.insert_canonical(tree.clone())? {
            Ok(())
        } else {
            Err(Error::DuplicateTree(tree.to_string()))
        }
    }

    /// Adds a tree unless already present. Returns whether it was added.
    ///
    /// Panics if the tree violates a declared alphabet.
    pub fn insert(&mut self, tree: Tree) -> bool {
        let tree = canonicalize(&tree, self.mode);
        self.insert_canonical(tree)
            .expect("tree outside the declared alphabet")
    }

    pub(crate) fn insert_canonical(&mut self, tree: Tree) -> Result<bool> {
        if let Some(alphabet) = &self.alphabet {
            check_alphabet(&tree, alphabet)?;
        }
        let hash = FxBuildHasher.hash_one(&tree);
        let trees = &self.trees;
        if self.index.find(hash, |&i| trees[i] == tree).is_some() {
            return Ok(false);
        }
        let i = self.trees.len();
        self.trees.push(tree);
        let trees = &self.trees;
        self.index
            .insert_unique(hash, i, |&j| FxBuildHasher.hash_one(&trees[j]));
        Ok(true)
    }

    pub fn contains(&self, tree: &Tree) -> bool {
        let tree = canonicalize(tree, self.mode);
        let hash = FxBuildHasher.hash_one(&tree);
        self.index.find(hash, |&i| self.trees[i] == tree).is_some()
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tree> {
        self.trees.iter()
    }

    pub fn mode(&self) -> TreeMode {
        self.mode
    }

    /// The declared alphabet, if any.
    pub fn declared_alphabet(&self) -> Option<&RankedAlphabet> {
        self.alphabet.as_ref()
    }

    /// The symbols actually used by the members.
    pub fn used_alphabet(&self) -> RankedAlphabet {
        self.trees
            .iter()
            .flat_map(|t| t.post_order().map(|n| n.symbol().clone()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Sum of member sizes.
    pub fn total_size(&self) -> usize {
        self.trees.iter().map(Tree::size).sum()
    }
}

impl fmt::Debug for TreeLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TreeLanguage")
            .field("mode", &self.mode)
            .field("trees", &self.trees)
            .finish()
    }
}

impl PartialEq for TreeLanguage {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode && self.trees == other.trees
    }
}

impl<'a> IntoIterator for &'a TreeLanguage {
    type Item = &'a Tree;
    type IntoIter = std::slice::Iter<'a, Tree>;

    fn into_iter(self) -> Self::IntoIter {
        self.trees.iter()
    }
}

fn check_alphabet(tree: &Tree, alphabet: &RankedAlphabet) -> Result<()> {
    for node in tree.post_order() {
        if !alphabet.contains(node.symbol()) {
            return Err(Error::Arity {
                name: node.symbol().name().to_string(),
                arity: node.symbol().arity(),
                offset: 0,
            });
        }
    }
    Ok(())
}
