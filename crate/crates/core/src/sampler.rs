//! Samplers for the branching-process tree, its size-conditioned version,
//! and the truncated size-biased tree, plus exact size probabilities.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::offspring::OffspringDistribution;
use crate::rng::Rng;
use crate::tree::Tree;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerError {
    /// The requested tree size has probability zero under the offspring
    /// distribution (e.g. even sizes for binary offspring).
    ImpossibleSize,
    /// The retry budget was exhausted.
    BudgetExhausted,
    /// The requested exact computation exceeds the configured size limit.
    LimitExceeded,
}

impl fmt::Display for SamplerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplerError::ImpossibleSize => write!(f, "tree size has probability zero"),
            SamplerError::BudgetExhausted => write!(f, "sampling budget exhausted"),
            SamplerError::LimitExceeded => write!(f, "size limit for exact computation exceeded"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SamplerError {}

/// Knobs for the samplers. `seed` drives every convenience entry point;
/// the lower-level `*_with` functions take an explicit [`Rng`] stream.
#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Cap on the node count of unconditioned samples.
    pub max_nodes: usize,
    /// Retry cap for conditioned sampling.
    pub rejection_budget: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            max_nodes: 10_000_000,
            rejection_budget: 1_000_000,
        }
    }
}

/// Result of sampling an unconditioned tree: the process is critical, so
/// it terminates almost surely, but individual samples can exceed any cap.
#[derive(Debug, Clone)]
pub enum GwSample {
    Tree(Tree),
    Overflow,
}

impl GwSample {
    pub fn tree(self) -> Option<Tree> {
        match self {
            GwSample::Tree(t) => Some(t),
            GwSample::Overflow => None,
        }
    }
}

/// Samples the unconditioned tree breadth-first.
pub fn sample_gw_with(
    dist: &OffspringDistribution,
    max_nodes: usize,
    rng: &mut Rng,
) -> GwSample {
    sample_gw_depth_capped(dist, max_nodes, u32::MAX, rng)
}

pub fn sample_gw(dist: &OffspringDistribution, cfg: &SamplerConfig) -> GwSample {
    let mut rng = Rng::from_seed(cfg.seed);
    sample_gw_with(dist, cfg.max_nodes, &mut rng)
}

/// Samples the tree restricted to the first `m` levels: nodes at depth `m`
/// produce no children. Always finite.
pub fn sample_gw_truncated(
    dist: &OffspringDistribution,
    m: u32,
    rng: &mut Rng,
) -> Tree {
    match sample_gw_depth_capped(dist, usize::MAX, m, rng) {
        GwSample::Tree(t) => t,
        GwSample::Overflow => unreachable!("no node cap"),
    }
}

fn sample_gw_depth_capped(
    dist: &OffspringDistribution,
    max_nodes: usize,
    max_depth: u32,
    rng: &mut Rng,
) -> GwSample {
    // breadth-first generation; children of node v get consecutive ids
    let mut outdeg_bfs: Vec<u32> = Vec::new();
    let mut first_child: Vec<usize> = Vec::new();
    let mut depth_of: Vec<u32> = Vec::new();
    depth_of.push(0);
    let mut v = 0usize;
    let mut next_id = 1usize;
    while v < next_id {
        let depth = depth_of[v];
        let d = if depth >= max_depth {
            0
        } else {
            dist.draw(rng.uniform())
        };
        outdeg_bfs.push(d);
        first_child.push(next_id);
        next_id += d as usize;
        if next_id > max_nodes {
            return GwSample::Overflow;
        }
        for _ in 0..d {
            depth_of.push(depth + 1);
        }
        v += 1;
    }
    // convert breadth-first ids to preorder outdegrees
    let n = outdeg_bfs.len();
    let mut preorder = Vec::with_capacity(n);
    let mut stack = Vec::new();
    stack.push(0usize);
    while let Some(u) = stack.pop() {
        let d = outdeg_bfs[u];
        preorder.push(d);
        let fc = first_child[u];
        for i in (0..d as usize).rev() {
            stack.push(fc + i);
        }
    }
    GwSample::Tree(Tree::from_outdegrees_unchecked(preorder))
}

/// Exact P(|T| = k) via the cycle-lemma identity pi_k = P(S_k = k-1) / k,
/// where S_k is a sum of k independent offspring draws, computed by
/// truncated convolution powers.
pub const SIZE_PROB_LIMIT: usize = 2000;

pub fn exact_size_prob(dist: &OffspringDistribution, k: usize) -> Result<f64, SamplerError> {
    exact_size_prob_limited(dist, k, SIZE_PROB_LIMIT)
}

pub fn exact_size_prob_limited(
    dist: &OffspringDistribution,
    k: usize,
    limit: usize,
) -> Result<f64, SamplerError> {
    if k == 0 || k > limit {
        return Err(SamplerError::LimitExceeded);
    }
    if k == 1 {
        return Ok(dist.prob(0));
    }
    let len = k; // sums 0..=k-1
    let base: Vec<f64> = dist.pmf().iter().copied().take(len).collect();
    let mut acc: Option<Vec<f64>> = None;
    let mut sq = base;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => sq.clone(),
                Some(a) => convolve_truncated(&a, &sq, len),
            });
        }
        e >>= 1;
        if e > 0 {
            sq = convolve_truncated(&sq, &sq, len);
        }
    }
    let sums = acc.unwrap();
    Ok(sums.get(k - 1).copied().unwrap_or(0.0) / k as f64)
}

fn convolve_truncated(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0f64; len];
    for (j, &aj) in a.iter().enumerate() {
        if aj == 0.0 || j >= len {
            continue;
        }
        let bmax = (len - j).min(b.len());
        for (s, &bs) in b.iter().enumerate().take(bmax) {
            out[j + s] += aj * bs;
        }
    }
    out
}

/// Exact sampler for the tree conditioned to have `n` nodes.
///
/// The preorder outdegree sequence of the conditioned tree is an
/// exchangeable sequence of i.i.d. offspring draws conditioned on summing
/// to n-1, rotated to the unique cyclic shift that forms a valid preorder
/// code. The conditional vector is sampled exactly by divide and conquer:
/// the sum splits between two halves with probabilities proportional to
/// the product of precomputed half-sum distributions.
pub struct ConditionedSampler {
    dist: OffspringDistribution,
    n: usize,
    /// pmf of the sum of `m` draws, truncated to sums < n, for every block
    /// size `m` in the binary split tree of `n`.
    tables: BTreeMap<usize, Vec<f64>>,
}

impl ConditionedSampler {
    pub fn new(dist: &OffspringDistribution, n: usize) -> Result<ConditionedSampler, SamplerError> {
        if n == 0 {
            return Err(SamplerError::ImpossibleSize);
        }
        let mut tables = BTreeMap::new();
        let len = n.max(1);
        build_tables(dist, n, len, &mut tables);
        let root = &tables[&n];
        if root.get(n - 1).copied().unwrap_or(0.0) <= 0.0 {
            return Err(SamplerError::ImpossibleSize);
        }
        Ok(ConditionedSampler {
            dist: dist.clone(),
            n,
            tables,
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn sample(&self, rng: &mut Rng) -> Tree {
        let n = self.n;
        let mut degrees: Vec<u32> = Vec::with_capacity(n);
        self.sample_block(n, n - 1, rng, &mut degrees);
        debug_assert_eq!(degrees.len(), n);
        rotate_to_preorder(&mut degrees);
        Tree::from_outdegrees_unchecked(degrees)
    }

    /// Fills `out` with a draw of `m` offspring values conditioned on
    /// summing to `s`.
    fn sample_block(&self, m: usize, s: usize, rng: &mut Rng, out: &mut Vec<u32>) {
        if m == 1 {
            debug_assert!(self.dist.prob(s) > 0.0);
            out.push(s as u32);
            return;
        }
        let a = m / 2;
        let b = m - a;
        let ta = &self.tables[&a];
        let tb = &self.tables[&b];
        let tm = &self.tables[&m];
        let z = tm[s];
        let jlo = if s + 1 > tb.len() { s + 1 - tb.len() } else { 0 };
        let jhi = s.min(ta.len() - 1);
        let mut target = rng.uniform() * z;
        let mut chosen = None;
        let mut last_positive = None;
        for j in jlo..=jhi {
            let w = ta[j] * tb[s - j];
            if w > 0.0 {
                last_positive = Some(j);
            }
            target -= w;
            if target < 0.0 {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen
            .or(last_positive)
            .expect("conditioned split has positive mass");
        self.sample_block(a, j, rng, out);
        self.sample_block(b, s - j, rng, out);
    }
}

fn build_tables(
    dist: &OffspringDistribution,
    m: usize,
    len: usize,
    tables: &mut BTreeMap<usize, Vec<f64>>,
) {
    if tables.contains_key(&m) {
        return;
    }
    if m == 1 {
        let t: Vec<f64> = dist.pmf().iter().copied().take(len).collect();
        tables.insert(1, t);
        return;
    }
    let a = m / 2;
    let b = m - a;
    build_tables(dist, a, len, tables);
    build_tables(dist, b, len, tables);
    let max_len = len.min(m * dist.max_support() + 1);
    let t = convolve_truncated(&tables[&a], &tables[&b], max_len.max(1));
    tables.insert(m, t);
}

/// Rotates a degree sequence with sum n-1 to the unique cyclic shift that
/// is a valid preorder code (cycle lemma): start right after the first
/// position where the prefix sum of (d_i - 1) attains its minimum.
pub fn rotate_to_preorder(degrees: &mut Vec<u32>) {
    let n = degrees.len();
    let mut sum: i64 = 0;
    let mut min_sum = i64::MAX;
    let mut min_pos = 0usize;
    for (i, &d) in degrees.iter().enumerate() {
        sum += i64::from(d) - 1;
        if sum < min_sum {
            min_sum = sum;
            min_pos = i;
        }
    }
    debug_assert_eq!(sum, -1);
    degrees.rotate_left((min_pos + 1) % n);
}

/// One-shot conditioned sample; builds the split tables each call. Use
/// [`ConditionedSampler`] directly to amortise the table construction.
pub fn sample_conditioned(
    dist: &OffspringDistribution,
    n: usize,
    cfg: &SamplerConfig,
) -> Result<Tree, SamplerError> {
    let sampler = ConditionedSampler::new(dist, n)?;
    let mut rng = Rng::from_seed(cfg.seed);
    Ok(sampler.sample(&mut rng))
}

/// A sample of the size-biased tree truncated at depth `m`, together with
/// its distinguished spine (one node per depth, `spine[0]` is the root).
#[derive(Debug, Clone)]
pub struct SizeBiasedSample {
    pub tree: Tree,
    pub spine: Vec<usize>,
}

/// Kesten spine construction: spine nodes at depths 0..m draw a size-biased
/// outdegree, the spine continues through a uniformly chosen child, and all
/// off-spine subtrees are independent unconditioned trees truncated at the
/// remaining depth.
pub fn sample_size_biased_with(
    dist: &OffspringDistribution,
    m: u32,
    rng: &mut Rng,
) -> SizeBiasedSample {
    let sb = dist.size_biased();
    let mut outdeg: Vec<u32> = Vec::new();
    let mut spine = alloc::vec![0usize; m as usize + 1];
    // pending nodes in preorder; (depth, on_spine)
    let mut stack: Vec<(u32, bool)> = Vec::new();
    stack.push((0, true));
    while let Some((depth, on_spine)) = stack.pop() {
        let idx = outdeg.len();
        if on_spine {
            spine[depth as usize] = idx;
        }
        let d = if depth >= m {
            0
        } else if on_spine {
            sb.draw(rng.uniform())
        } else {
            dist.draw(rng.uniform())
        };
        outdeg.push(d);
        if d == 0 {
            continue;
        }
        let spine_child = if on_spine {
            Some(rng.below(u64::from(d)) as u32)
        } else {
            None
        };
        for i in (0..d).rev() {
            stack.push((depth + 1, spine_child == Some(i)));
        }
    }
    SizeBiasedSample {
        tree: Tree::from_outdegrees_unchecked(outdeg),
        spine,
    }
}

pub fn sample_size_biased(
    dist: &OffspringDistribution,
    m: u32,
    cfg: &SamplerConfig,
) -> SizeBiasedSample {
    let mut rng = Rng::from_seed(cfg.seed);
    sample_size_biased_with(dist, m, &mut rng)
}
