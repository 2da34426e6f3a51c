//! Node-pair dynamic programming baseline for the SubTree kernel.
//!
//! `K(t1, t2) = Σ Δ(n1, n2)` over node pairs, where `Δ(n1, n2)` is 1 when
//! the subtrees rooted at `n1` and `n2` are identical and 0 otherwise:
//!
//! - different productions: `Δ = 0`
//! - same production, leaves: `Δ = 1`
//! - same production, internal: `Δ = Π_j Δ(child_j(n1), child_j(n2))`
//!
//! A node's production is its symbol together with the symbols of its
//! children. Only pairs with equal productions are visited; they are
//! processed with `n1` in post-order, so children pairs are always resolved
//! before their parents and no recursion is needed. Since every factor is 0
//! or 1, so is `Δ`, and the table is kept as one bit per visited pair.

use std::collections::HashMap;

use crate::kernel::KernelValue;
use crate::tree::{Symbol, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoschittiStats {
    pub kernel_value: KernelValue,
    /// Size of the equal-production node-pair set.
    pub node_pairs: usize,
}

/// A tree flattened in post-order.
struct Flat {
    production: Vec<u32>,
    // child indices, as ranges into `pool`
    start: Vec<u32>,
    pool: Vec<u32>,
}

impl Flat {
    fn children(&self, n: usize) -> &[u32] {
        &self.pool[self.start[n] as usize..self.start[n + 1] as usize]
    }
}

#[derive(Default)]
struct Productions {
    symbols: HashMap<Symbol, u32>,
    ids: HashMap<Vec<u32>, u32>,
}

impl Productions {
    fn symbol(&mut self, s: &Symbol) -> u32 {
        let next = self.symbols.len() as u32;
        *self.symbols.entry(s.clone()).or_insert(next)
    }

    fn flatten(&mut self, tree: &Tree) -> Flat {
        let mut flat = Flat {
            production: Vec::new(),
            start: vec![0],
            pool: Vec::new(),
        };
        let mut pending: Vec<u32> = Vec::new();
        let mut key: Vec<u32> = Vec::new();
        for node in tree.post_order() {
            let k = node.children().len();
            key.clear();
            key.push(self.symbol(node.symbol()));
            for c in node.children() {
                key.push(self.symbol(c.symbol()));
            }
            let next = self.ids.len() as u32;
            let id = *self.ids.entry(key.clone()).or_insert(next);

            let idx = flat.production.len() as u32;
            flat.production.push(id);
            let first = pending.len() - k;
            flat.pool.extend_from_slice(&pending[first..]);
            flat.start.push(flat.pool.len() as u32);
            pending.truncate(first);
            pending.push(idx);
        }
        flat
    }
}

/// The SubTree kernel of two single trees by node-pair dynamic programming.
pub fn moschitti_kernel(t1: &Tree, t2: &Tree) -> KernelValue {
    moschitti_kernel_with_stats(t1, t2).kernel_value
}

pub fn moschitti_kernel_with_stats(t1: &Tree, t2: &Tree) -> MoschittiStats {
    let mut productions = Productions::default();
    let a = productions.flatten(t1);
    let b = productions.flatten(t2);

    // Group the nodes of t2 by production and remember each node's position
    // in its group.
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); productions.ids.len()];
    let mut position = Vec::with_capacity(b.production.len());
    for (n, &p) in b.production.iter().enumerate() {
        position.push(groups[p as usize].len());
        groups[p as usize].push(n as u32);
    }

    // Δ is 0 or 1 here, so each row of the table is a bit set over the
    // group of t2 nodes sharing the production of n1.
    let mut row_start = Vec::with_capacity(a.production.len() + 1);
    let mut pairs = 0usize;
    for &p in &a.production {
        row_start.push(pairs);
        pairs += groups[p as usize].len();
    }
    row_start.push(pairs);
    let mut delta = vec![0u64; pairs.div_ceil(64)];
    let get = |delta: &[u64], bit: usize| delta[bit / 64] >> (bit % 64) & 1 == 1;

    let mut total: u128 = 0;
    for n1 in 0..a.production.len() {
        let kids1 = a.children(n1);
        let group = &groups[a.production[n1] as usize];
        for (k, &n2) in group.iter().enumerate() {
            let kids2 = b.children(n2 as usize);
            let matched = kids1.iter().zip(kids2).all(|(&c1, &c2)| {
                let (c1, c2) = (c1 as usize, c2 as usize);
                a.production[c1] == b.production[c2] && get(&delta, row_start[c1] + position[c2])
            });
            if matched {
                let bit = row_start[n1] + k;
                delta[bit / 64] |= 1 << (bit % 64);
                total += 1;
            }
        }
    }
    MoschittiStats {
        kernel_value: total,
        node_pairs: pairs,
    }
}
