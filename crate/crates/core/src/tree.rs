//! Immutable preorder arena for finite rooted ordered trees.
//!
//! A tree is stored as three parallel arrays indexed by 0-based preorder
//! node id: outdegree, parent, and fringe subtree size. Node 0 is the root,
//! and the fringe subtree of node `v` occupies the contiguous index range
//! `v .. v + subtree_size[v]`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Sentinel parent index for the root.
pub const NO_PARENT: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeError {
    /// The outdegree sequence is empty or violates the preorder prefix
    /// condition (partial outdegree sum must stay >= nodes seen so far,
    /// with equality exactly at the end).
    MalformedSequence,
    /// A node index was out of range.
    IndexOutOfRange,
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::MalformedSequence => write!(f, "malformed preorder outdegree sequence"),
            TreeError::IndexOutOfRange => write!(f, "node index out of range"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TreeError {}

/// A finite rooted ordered tree in preorder arena form. Immutable after
/// construction; safe to share between threads.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    outdeg: Vec<u32>,
    parent: Vec<usize>,
    subtree_size: Vec<usize>,
}

impl Tree {
    /// Builds a tree from its preorder outdegree sequence.
    pub fn from_outdegrees(outdeg: &[u32]) -> Result<Tree, TreeError> {
        let n = outdeg.len();
        if n == 0 {
            return Err(TreeError::MalformedSequence);
        }
        let mut sum: u64 = 0;
        for (i, &d) in outdeg.iter().enumerate() {
            sum += u64::from(d);
            let seen = (i + 1) as u64;
            if i + 1 < n {
                if sum < seen {
                    return Err(TreeError::MalformedSequence);
                }
            } else if sum != seen - 1 {
                return Err(TreeError::MalformedSequence);
            }
        }
        Ok(Self::from_outdegrees_unchecked(outdeg.to_vec()))
    }

    /// Builds from a sequence already known to be valid.
    pub(crate) fn from_outdegrees_unchecked(outdeg: Vec<u32>) -> Tree {
        let n = outdeg.len();
        let mut parent = Vec::with_capacity(n);
        // stack of (node, children still to attach)
        let mut stack: Vec<(usize, u32)> = Vec::new();
        for (v, &d) in outdeg.iter().enumerate() {
            if v == 0 {
                parent.push(NO_PARENT);
            } else {
                let top = stack.last_mut().expect("valid preorder sequence");
                parent.push(top.0);
                top.1 -= 1;
                if top.1 == 0 {
                    stack.pop();
                }
            }
            if d > 0 {
                stack.push((v, d));
            }
        }
        debug_assert!(stack.is_empty());
        let mut subtree_size = alloc::vec![1usize; n];
        for v in (1..n).rev() {
            let s = subtree_size[v];
            subtree_size[parent[v]] += s;
        }
        debug_assert_eq!(subtree_size[0], n);
        Tree {
            outdeg,
            parent,
            subtree_size,
        }
    }

    /// A single-node tree.
    pub fn singleton() -> Tree {
        Tree::from_outdegrees_unchecked(alloc::vec![0])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.outdeg.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // a tree always has at least the root
    }

    #[inline]
    pub fn outdeg(&self, v: usize) -> u32 {
        self.outdeg[v]
    }

    /// Outdegree of the root.
    #[inline]
    pub fn root_deg(&self) -> u32 {
        self.outdeg[0]
    }

    #[inline]
    pub fn parent(&self, v: usize) -> Option<usize> {
        if v == 0 {
            None
        } else {
            Some(self.parent[v])
        }
    }

    #[inline]
    pub fn subtree_size(&self, v: usize) -> usize {
        self.subtree_size[v]
    }

    #[inline]
    pub fn outdegrees(&self) -> &[u32] {
        &self.outdeg
    }

    /// True if `v` is the leftmost child of its parent.
    #[inline]
    pub fn is_leftmost_child(&self, v: usize) -> bool {
        v != 0 && self.parent[v] + 1 == v
    }

    /// Iterates over the children of `v` in left-to-right order.
    pub fn children(&self, v: usize) -> Children<'_> {
        Children {
            tree: self,
            next: v + 1,
            remaining: self.outdeg[v],
        }
    }

    /// Depth of every node (root has depth 0).
    pub fn depths(&self) -> Vec<u32> {
        let n = self.len();
        let mut depth = alloc::vec![0u32; n];
        for v in 1..n {
            depth[v] = depth[self.parent[v]] + 1;
        }
        depth
    }

    pub fn height(&self) -> u32 {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Number of nodes per depth.
    pub fn level_profile(&self) -> LevelProfile {
        let depths = self.depths();
        let height = depths.iter().copied().max().unwrap_or(0) as usize;
        let mut w = alloc::vec![0usize; height + 1];
        for d in depths {
            w[d as usize] += 1;
        }
        LevelProfile { w }
    }

    /// The restriction of the tree to the first `m` levels: all nodes of
    /// depth at most `m`, preorder preserved.
    pub fn truncate(&self, m: u32) -> Tree {
        let depths = self.depths();
        let mut outdeg = Vec::new();
        for (v, &d) in depths.iter().enumerate() {
            if d < m {
                outdeg.push(self.outdeg[v]);
            } else if d == m {
                outdeg.push(0);
            }
        }
        Tree::from_outdegrees_unchecked(outdeg)
    }

    /// The fringe subtree rooted at `v`, as a standalone tree.
    pub fn fringe_at(&self, v: usize) -> Result<Tree, TreeError> {
        if v >= self.len() {
            return Err(TreeError::IndexOutOfRange);
        }
        let span = &self.outdeg[v..v + self.subtree_size[v]];
        Ok(Tree::from_outdegrees_unchecked(span.to_vec()))
    }

    /// True if the fringe subtree at `v` equals `pattern` as an ordered tree.
    #[inline]
    pub fn fringe_matches(&self, v: usize, pattern: &Tree) -> bool {
        let size = self.subtree_size[v];
        size == pattern.len() && self.outdeg[v..v + size] == *pattern.outdegrees()
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree[{}]", self)
    }
}

impl fmt::Display for Tree {
    /// Space-separated preorder outdegrees, e.g. "2 1 0 0".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.outdeg.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", d)?;
        }
        Ok(())
    }
}

impl FromStr for Tree {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Tree, TreeError> {
        let mut outdeg = Vec::new();
        for tok in s.split_whitespace() {
            let d: u32 = tok.parse().map_err(|_| TreeError::MalformedSequence)?;
            outdeg.push(d);
        }
        Tree::from_outdegrees(&outdeg)
    }
}

pub struct Children<'a> {
    tree: &'a Tree,
    next: usize,
    remaining: u32,
}

impl<'a> Iterator for Children<'a> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.remaining == 0 {
            return None;
        }
        let c = self.next;
        self.next = c + self.tree.subtree_size(c);
        self.remaining -= 1;
        Some(c)
    }
}

/// Node counts per depth: `w[k]` is the number of nodes at depth `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelProfile {
    w: Vec<usize>,
}

impl LevelProfile {
    #[inline]
    pub fn counts(&self) -> &[usize] {
        &self.w
    }

    /// `w_k`, zero beyond the height.
    #[inline]
    pub fn at(&self, k: usize) -> usize {
        self.w.get(k).copied().unwrap_or(0)
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.w.len() - 1
    }
}

/// Parses the one-tree-per-line text format.
pub fn parse_tree_line(line: &str) -> Result<Tree, TreeError> {
    line.parse()
}
