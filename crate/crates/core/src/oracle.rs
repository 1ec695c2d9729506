//! Ground truth: brute-force subset scans, exact big-integer recursions,
//! exhaustive tree enumeration, and exact conditional expectations.
//!
//! Everything here trades speed for certainty; the fast ratio-space
//! evaluators are validated against these engines.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::functionals::{self, FunctionalFamily};
use crate::offspring::OffspringDistribution;
use crate::tree::Tree;

/// Node-subset scans are 2^n; edges are n - 1 so matchings get one more.
pub const IND_SCAN_LIMIT: usize = 26;
pub const MATCH_SCAN_LIMIT: usize = 27;
pub const DOM_SCAN_LIMIT: usize = 22;
/// The big-integer recursions stay exact but slow down beyond this.
pub const DP_LIMIT: usize = 2000;
/// Cross-check the recursion against the scan when trees are this small.
const AGREE_LIMIT: usize = 16;
/// Catalan(11) = 58786 trees; enumeration stops here.
pub const ENUMERATION_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    TooLarge,
    /// The offspring distribution gives the requested size zero mass.
    ImpossibleSize,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge => write!(f, "tree too large for exact computation"),
            OracleError::ImpossibleSize => write!(f, "size has probability zero"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OracleError {}

/// Exact counts for one tree, family-tagged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactCounts {
    Independent { i: BigUint, i0: BigUint },
    Matching { m: BigUint, m0: BigUint },
    Dominating { d: BigUint, d0: BigUint, d_star: BigUint },
}

impl ExactCounts {
    /// The main count (I, m, or d) as a float.
    pub fn total(&self) -> f64 {
        let big = match self {
            ExactCounts::Independent { i, .. } => i,
            ExactCounts::Matching { m, .. } => m,
            ExactCounts::Dominating { d, .. } => d,
        };
        big.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Subset scan over all 2^n vertex sets.
pub fn scan_independent(t: &Tree) -> Result<ExactCounts, OracleError> {
    let n = t.len();
    if n > IND_SCAN_LIMIT {
        return Err(OracleError::TooLarge);
    }
    let mut i = 0u64;
    let mut i0 = 0u64;
    'mask: for mask in 0u32..(1u32 << n) {
        for v in 1..n {
            if mask >> v & 1 == 1 && mask >> t.parent(v).unwrap() & 1 == 1 {
                continue 'mask;
            }
        }
        i += 1;
        if mask & 1 == 0 {
            i0 += 1;
        }
    }
    Ok(ExactCounts::Independent {
        i: BigUint::from(i),
        i0: BigUint::from(i0),
    })
}

/// Subset scan over all 2^(n-1) edge sets.
pub fn scan_matching(t: &Tree) -> Result<ExactCounts, OracleError> {
    let n = t.len();
    if n > MATCH_SCAN_LIMIT {
        return Err(OracleError::TooLarge);
    }
    // edge e joins node e+1 to its parent
    let edges = n - 1;
    let mut m = 0u64;
    let mut m0 = 0u64;
    let mut used = alloc::vec![false; n];
    'mask: for mask in 0u64..(1u64 << edges) {
        for x in used.iter_mut() {
            *x = false;
        }
        for e in 0..edges {
            if mask >> e & 1 == 1 {
                let a = e + 1;
                let b = t.parent(a).unwrap();
                if used[a] || used[b] {
                    continue 'mask;
                }
                used[a] = true;
                used[b] = true;
            }
        }
        m += 1;
        if !used[0] {
            m0 += 1;
        }
    }
    Ok(ExactCounts::Matching {
        m: BigUint::from(m),
        m0: BigUint::from(m0),
    })
}

/// Subset scan over all 2^n candidate dominating sets.
pub fn scan_dominating(t: &Tree) -> Result<ExactCounts, OracleError> {
    let n = t.len();
    if n > DOM_SCAN_LIMIT {
        return Err(OracleError::TooLarge);
    }
    let mut d = 0u64;
    let mut d0 = 0u64;
    let mut d_star = 0u64;
    let mut covered = alloc::vec![false; n];
    for mask in 0u32..(1u32 << n) {
        for v in 0..n {
            covered[v] = mask >> v & 1 == 1;
        }
        // a chosen node covers its parent and children
        for v in 1..n {
            if mask >> v & 1 == 1 {
                covered[t.parent(v).unwrap()] = true;
            } else if mask >> t.parent(v).unwrap() & 1 == 1 {
                covered[v] = true;
            }
        }
        let rest_ok = covered[1..].iter().all(|&c| c);
        if rest_ok && covered[0] {
            d += 1;
            if mask & 1 == 0 {
                d0 += 1;
            }
        }
        if rest_ok && !covered[0] {
            d_star += 1;
        }
    }
    Ok(ExactCounts::Dominating {
        d: BigUint::from(d),
        d0: BigUint::from(d0),
        d_star: BigUint::from(d_star),
    })
}

fn dp_independent(t: &Tree) -> ExactCounts {
    let n = t.len();
    // with[v]: independent sets of the fringe containing v; without[v]: not
    let mut with = alloc::vec![BigUint::one(); n];
    let mut without = alloc::vec![BigUint::one(); n];
    for v in (0..n).rev() {
        if let Some(p) = t.parent(v) {
            let total = &with[v] + &without[v];
            with[p] *= &without[v];
            without[p] *= total;
        }
    }
    let i = &with[0] + &without[0];
    ExactCounts::Independent { i, i0: without.swap_remove(0) }
}

fn dp_matching(t: &Tree) -> ExactCounts {
    let n = t.len();
    // m0[v]: matchings leaving v uncovered; covered[v]: the rest
    let mut m0 = alloc::vec![BigUint::one(); n];
    let mut covered = alloc::vec![BigUint::zero(); n];
    for v in (0..n).rev() {
        let total_v = &m0[v] + &covered[v];
        if let Some(p) = t.parent(v) {
            // either v's edge to p is unused, or it is used and both ends
            // were previously uncovered
            let new_covered = &covered[p] * &total_v + &m0[p] * &m0[v];
            m0[p] *= &total_v;
            covered[p] = new_covered;
        }
    }
    let m = &m0[0] + &covered[0];
    ExactCounts::Matching { m, m0: m0.swap_remove(0) }
}

fn dp_dominating(t: &Tree) -> ExactCounts {
    let n = t.len();
    let mut d = alloc::vec![BigUint::one(); n];
    let mut d0 = alloc::vec![BigUint::one(); n];
    let mut d_star = alloc::vec![BigUint::one(); n];
    // scratch products over children
    let mut prod_d = alloc::vec![BigUint::one(); n];
    let mut prod_d0 = alloc::vec![BigUint::one(); n];
    let mut prod_dstar = alloc::vec![BigUint::one(); n];
    for v in (0..n).rev() {
        d_star[v] = prod_d0[v].clone();
        d0[v] = &prod_d[v] - &prod_d0[v];
        d[v] = &d0[v] + &prod_dstar[v];
        if let Some(p) = t.parent(v) {
            prod_d[p] *= &d[v];
            prod_d0[p] *= &d0[v];
            prod_dstar[p] *= &d[v] + &d_star[v];
        }
    }
    ExactCounts::Dominating {
        d: d.swap_remove(0),
        d0: d0.swap_remove(0),
        d_star: d_star.swap_remove(0),
    }
}

fn checked<F, G>(t: &Tree, dp: F, scan: G) -> Result<ExactCounts, OracleError>
where
    F: Fn(&Tree) -> ExactCounts,
    G: Fn(&Tree) -> Result<ExactCounts, OracleError>,
{
    if t.len() > DP_LIMIT {
        return Err(OracleError::TooLarge);
    }
    let by_dp = dp(t);
    if t.len() <= AGREE_LIMIT {
        let by_scan = scan(t)?;
        assert_eq!(by_dp, by_scan, "recursion disagrees with subset scan");
    }
    Ok(by_dp)
}

/// Exact independent-set counts; recursion cross-checked against the scan
/// on small trees.
pub fn brute_independent(t: &Tree) -> Result<ExactCounts, OracleError> {
    checked(t, dp_independent, scan_independent)
}

pub fn brute_matching(t: &Tree) -> Result<ExactCounts, OracleError> {
    checked(t, dp_matching, scan_matching)
}

pub fn brute_dominating(t: &Tree) -> Result<ExactCounts, OracleError> {
    checked(t, dp_dominating, scan_dominating)
}

/// All ordered trees on n nodes, generated as valid outdegree sequences.
pub fn enumerate_trees(n: usize) -> Result<Vec<Tree>, OracleError> {
    if n == 0 || n > ENUMERATION_LIMIT {
        return Err(OracleError::TooLarge);
    }
    let mut out = Vec::new();
    let mut seq = alloc::vec![0u32; n];
    fn rec(seq: &mut Vec<u32>, pos: usize, open: usize, out: &mut Vec<Tree>) {
        let n = seq.len();
        if pos == n {
            if open == 0 {
                out.push(Tree::from_outdegrees_unchecked(seq.clone()));
            }
            return;
        }
        let remaining = n - pos;
        // after placing this node, open slots must stay positive until the
        // last node and never exceed the nodes left to place
        for d in 0..remaining {
            let new_open = open - 1 + d;
            if new_open == 0 && pos + 1 < n {
                continue;
            }
            if new_open > remaining - 1 {
                break;
            }
            seq[pos] = d as u32;
            rec(seq, pos + 1, new_open, out);
        }
    }
    rec(&mut seq, 0, 1, &mut out);
    Ok(out)
}

/// Product of offspring probabilities over all nodes.
pub fn gw_weight(dist: &OffspringDistribution, t: &Tree) -> f64 {
    let mut w = 1.0;
    for v in 0..t.len() {
        w *= dist.prob(t.outdeg(v) as usize);
    }
    w
}

/// Every ordered tree of size n with its unconditioned probability.
#[derive(Debug, Clone)]
pub struct TreeEnumeration {
    pub n: usize,
    pub trees: Vec<Tree>,
    pub weights: Vec<f64>,
    /// Total probability of hitting size n; equals pi_n.
    pub pi_n: f64,
}

impl TreeEnumeration {
    pub fn new(n: usize, dist: &OffspringDistribution) -> Result<TreeEnumeration, OracleError> {
        let trees = enumerate_trees(n)?;
        let weights: Vec<f64> = trees.iter().map(|t| gw_weight(dist, t)).collect();
        let pi_n = weights.iter().sum();
        Ok(TreeEnumeration {
            n,
            trees,
            weights,
            pi_n,
        })
    }
}

/// Exact conditional expectations of the toll and the functional at size n:
/// (E f(conditioned tree), E F(conditioned tree)).
pub fn exact_expectation(
    family: &FunctionalFamily,
    dist: &OffspringDistribution,
    n: usize,
) -> Result<(f64, f64), OracleError> {
    let en = TreeEnumeration::new(n, dist)?;
    if en.pi_n <= 0.0 {
        return Err(OracleError::ImpossibleSize);
    }
    let mut toll_sum = 0.0;
    let mut value_sum = 0.0;
    for (t, &w) in en.trees.iter().zip(&en.weights) {
        let ev = functionals::evaluate(family, t);
        toll_sum += w * ev.root_toll;
        value_sum += w * ev.value;
    }
    Ok((toll_sum / en.pi_n, value_sum / en.pi_n))
}

/// The two equal-sized trees whose independent-set counts differ, showing
/// the limit variance cannot vanish.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub d: u32,
    pub size: usize,
    pub i_complete: BigUint,
    pub i0_complete: BigUint,
    pub i_caterpillar: BigUint,
    pub i0_caterpillar: BigUint,
    /// min of the two count ratios; > 1 in the non-degenerate cases.
    pub eta: f64,
    /// d = 1 collapses both constructions to the same path.
    pub degenerate: bool,
    pub holds: bool,
}

/// Complete d-ary tree of height `h` (every internal node has d children).
pub fn complete_dary(d: u32, h: u32) -> Tree {
    fn rec(seq: &mut Vec<u32>, d: u32, h: u32) {
        if h == 0 {
            seq.push(0);
        } else {
            seq.push(d);
            for _ in 0..d {
                rec(seq, d, h - 1);
            }
        }
    }
    let mut seq = Vec::new();
    rec(&mut seq, d, h);
    Tree::from_outdegrees_unchecked(seq)
}

/// The caterpillar of the witness construction: a path of d^2 + d + 1
/// internal nodes, each carrying d - 1 leaves except the last with d.
pub fn witness_caterpillar(d: u32) -> Tree {
    let internal = d * d + d + 1;
    let mut seq = Vec::new();
    for i in 0..internal {
        if i + 1 < internal {
            seq.push(d); // d - 1 leaves plus the next path node
            for _ in 0..d - 1 {
                seq.push(0);
            }
        } else {
            seq.push(d);
            for _ in 0..d {
                seq.push(0);
            }
        }
    }
    Tree::from_outdegrees_unchecked(seq)
}

pub fn variance_positivity_witness(d: u32) -> Result<WitnessReport, OracleError> {
    if d == 0 {
        return Err(OracleError::ImpossibleSize);
    }
    let s1 = complete_dary(d, 3);
    let s2 = witness_caterpillar(d);
    assert_eq!(s1.len(), s2.len());
    let (i1, i01) = match brute_independent(&s1)? {
        ExactCounts::Independent { i, i0 } => (i, i0),
        _ => unreachable!(),
    };
    let (i2, i02) = match brute_independent(&s2)? {
        ExactCounts::Independent { i, i0 } => (i, i0),
        _ => unreachable!(),
    };
    let ratio = |a: &BigUint, b: &BigUint| a.to_f64().unwrap() / b.to_f64().unwrap();
    let eta = {
        let r1 = ratio(&i1, &i2);
        let r2 = ratio(&i01, &i02);
        if r1 < r2 {
            r1
        } else {
            r2
        }
    };
    let degenerate = i1 == i2 && i01 == i02;
    let holds = i1 > i2 && i01 > i02;
    Ok(WitnessReport {
        d,
        size: s1.len(),
        i_complete: i1,
        i0_complete: i01,
        i_caterpillar: i2,
        i0_caterpillar: i02,
        eta,
        degenerate,
        holds,
    })
}
