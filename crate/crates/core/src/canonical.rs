//! Canonical forms.
//!
//! In unordered mode the children of every node are sorted by their own
//! canonical serialization, which makes any two trees that differ only by
//! recursive sibling permutations canonicalize to the same tree.
//!
//! The sort key compares serializations as if each were followed by `)`.
//! When one child's text is a proper prefix of another's, the longer one
//! continues with `(` and sorts first. With this order the canonical form is
//! also the lexicographically smallest serialization among all sibling
//! permutations.

use std::cmp::Ordering;

use crate::tree::{Tree, TreeMode};

pub fn canonicalize(tree: &Tree, mode: TreeMode) -> Tree {
    match mode {
        TreeMode::Ordered => tree.clone(),
        TreeMode::Unordered => sort_children(tree).0,
    }
}

/// Ordering used between sibling serializations.
pub fn compare_serialized(a: &str, b: &str) -> Ordering {
    a.bytes()
        .chain(std::iter::once(b')'))
        .cmp(b.bytes().chain(std::iter::once(b')')))
}

fn sort_children(tree: &Tree) -> (Tree, String) {
    if tree.is_leaf() {
        return (tree.clone(), tree.symbol().name().to_string());
    }
    let mut kids: Vec<(Tree, String)> = tree.children().iter().map(sort_children).collect();
    kids.sort_by(|x, y| compare_serialized(&x.1, &y.1));

    let mut text = String::with_capacity(
        tree.symbol().name().len() + 1 + kids.iter().map(|k| k.1.len() + 1).sum::<usize>(),
    );
    text.push_str(tree.symbol().name());
    text.push('(');
    for (i, (_, s)) in kids.iter().enumerate() {
        if i > 0 {
            text.push(',');
        }
        text.push_str(s);
    }
    text.push(')');

    let children = kids.into_iter().map(|k| k.0).collect();
    (Tree::from_valid(tree.symbol().clone(), children), text)
}
