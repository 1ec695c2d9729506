//! Iterated tree reductions.
//!
//! A reduction round deletes a set of fringe subtrees (leaves, or hanging
//! paths), never the root. Because whole fringes are removed at once, the
//! survivor set is closed under taking parents and the reduced tree is
//! again a plane tree on the surviving nodes in preorder.
//!
//! The functional of interest is the number of nodes deleted within `r`
//! rounds. Deletions never cross from one sibling subtree into another, so
//! the deletion round of a node inside a branch is the same whether the
//! branch is reduced standalone or in place; the toll of a subtree is
//! therefore just the number of its root's children deleted within `r`
//! rounds.

use alloc::vec::Vec;

use crate::functionals::{AdditiveEvaluation, FunctionalFamily};
use crate::tree::Tree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionKind {
    /// Delete every non-root leaf.
    Leaf,
    /// Delete every non-root leaf that is currently a leftmost child.
    OldLeaf,
    /// Delete every maximal hanging path (fringe subtree with all
    /// outdegrees at most 1).
    Path,
    /// Delete hanging paths whose nodes are currently leftmost children.
    OldPath,
}

impl ReductionKind {
    pub fn label(&self) -> &'static str {
        match self {
            ReductionKind::Leaf => "leaf",
            ReductionKind::OldLeaf => "old-leaf",
            ReductionKind::Path => "path",
            ReductionKind::OldPath => "old-path",
        }
    }

    fn wants_path(&self) -> bool {
        matches!(self, ReductionKind::Path | ReductionKind::OldPath)
    }

    fn wants_old(&self) -> bool {
        matches!(self, ReductionKind::OldLeaf | ReductionKind::OldPath)
    }
}

/// Outcome of reducing a tree for a fixed number of rounds.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub kind: ReductionKind,
    pub rounds: u32,
    /// The tree left after the rounds.
    pub survivors: Tree,
    /// Number of surviving nodes.
    pub x_r: usize,
    /// Number of deleted nodes (original size minus survivors).
    pub f_r: usize,
    /// Round in which each original node was deleted; 0 for survivors.
    pub deletion_round: Vec<u32>,
}

/// Runs `rounds` reduction rounds, tracking per-node deletion rounds.
pub fn reduce_r(t: &Tree, kind: ReductionKind, rounds: u32) -> ReductionResult {
    let n = t.len();
    let mut deletion_round = alloc::vec![0u32; n];
    let mut alive = alloc::vec![true; n];
    let mut alive_outdeg = alloc::vec![0u32; n];
    let mut leftmost = alloc::vec![false; n];
    let mut pathy = alloc::vec![false; n];
    let mut children_pathy = alloc::vec![true; n];

    let mut x_r = n;
    for round in 1..=rounds {
        // alive outdegrees and current leftmost-child flags; preorder
        // visits a parent's alive children in order, so the first one seen
        // is the current leftmost
        for v in 0..n {
            alive_outdeg[v] = 0;
            leftmost[v] = false;
        }
        for v in 1..n {
            if alive[v] {
                let p = t.parent(v).unwrap();
                if alive_outdeg[p] == 0 {
                    leftmost[v] = true;
                }
                alive_outdeg[p] += 1;
            }
        }
        if kind.wants_path() {
            // reverse preorder: children settled before their parent
            for v in 0..n {
                children_pathy[v] = true;
            }
            for v in (0..n).rev() {
                if !alive[v] {
                    continue;
                }
                pathy[v] = alive_outdeg[v] <= 1
                    && (alive_outdeg[v] == 0 || children_pathy[v]);
                if let Some(p) = t.parent(v) {
                    children_pathy[p] &= pathy[v];
                }
            }
        }
        let mut deleted_any = false;
        for v in 1..n {
            if !alive[v] {
                continue;
            }
            let shape_ok = if kind.wants_path() {
                pathy[v]
            } else {
                alive_outdeg[v] == 0
            };
            if shape_ok && (!kind.wants_old() || leftmost[v]) {
                alive[v] = false;
                deletion_round[v] = round;
                deleted_any = true;
                x_r -= 1;
            }
        }
        if !deleted_any {
            break;
        }
    }

    // rebuild survivor outdegrees (deletions may have happened in the last
    // round, so recount)
    for v in 0..n {
        alive_outdeg[v] = 0;
    }
    for v in 1..n {
        if alive[v] {
            alive_outdeg[t.parent(v).unwrap()] += 1;
        }
    }
    let outdegs: Vec<u32> = (0..n).filter(|&v| alive[v]).map(|v| alive_outdeg[v]).collect();
    let survivors = Tree::from_outdegrees(&outdegs).expect("survivor set is a tree");

    ReductionResult {
        kind,
        rounds,
        x_r,
        f_r: n - x_r,
        survivors,
        deletion_round,
    }
}

/// A single round; returns the reduced tree.
pub fn reduce_once(t: &Tree, kind: ReductionKind) -> Tree {
    reduce_r(t, kind, 1).survivors
}

/// f_r(t): the number of root branches whose roots are deleted within the
/// first `rounds` rounds. At most deg(t), and at most `rounds` for the
/// old-leaf and old-path kinds (one leftmost root branch per round).
pub fn reduction_toll(t: &Tree, kind: ReductionKind, rounds: u32) -> usize {
    let res = reduce_r(t, kind, rounds);
    t.children(0)
        .filter(|&c| res.deletion_round[c] > 0)
        .count()
}

/// Number of nodes deleted within `rounds` rounds, as an additive
/// functional; the toll at a node is the count of its children deleted.
pub fn eval_reduction(
    t: &Tree,
    kind: ReductionKind,
    rounds: u32,
    keep_tolls: bool,
) -> AdditiveEvaluation {
    let res = reduce_r(t, kind, rounds);
    let n = t.len();
    let mut tolls = if keep_tolls {
        Some(alloc::vec![0.0f64; n])
    } else {
        None
    };
    let mut root_toll = 0.0;
    for v in 1..n {
        if res.deletion_round[v] > 0 {
            let p = t.parent(v).unwrap();
            if let Some(ts) = tolls.as_mut() {
                ts[p] += 1.0;
            }
            if p == 0 {
                root_toll += 1.0;
            }
        }
    }
    AdditiveEvaluation {
        family: FunctionalFamily::Reduction { kind, rounds },
        value: res.f_r as f64,
        root_toll,
        tolls,
        precision_warning: false,
    }
}
