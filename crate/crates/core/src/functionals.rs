//! Single-pass evaluators for additive tree functionals.
//!
//! Counting families (independent sets, matchings, dominating sets) are
//! evaluated in ratio space: the per-node ratios stay in [0, 1] while the
//! counts themselves grow exponentially, and the functional value is the
//! sum of per-node log tolls. Reverse preorder is a valid bottom-up order,
//! so every evaluator is a single backward sweep over the arena.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::float;
use crate::reductions::{self, ReductionKind};
use crate::tree::Tree;

/// Root degree beyond which the dominating-set toll may lose precision in
/// f64 ratio space (rho_0 + rho_* can reach the 2^-deg scale).
pub const DOMSET_PRECISION_DEGREE: u32 = 700;

/// Selector of a toll function and its state recursion.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalFamily {
    /// F = log of the number of independent sets.
    IndSet,
    /// F = log of the number of matchings.
    Matching,
    /// F = log of the number of dominating sets.
    DomSet,
    /// F = number of nodes deleted within `rounds` reduction rounds.
    Reduction { kind: ReductionKind, rounds: u32 },
    /// F = number of fringe subtrees equal to the pattern.
    FringeCount(Tree),
    /// F = number of nodes whose outdegree lies in the set.
    OutdegreeCount(BTreeSet<u32>),
}

impl FunctionalFamily {
    pub fn label(&self) -> &'static str {
        match self {
            FunctionalFamily::IndSet => "indset",
            FunctionalFamily::Matching => "matching",
            FunctionalFamily::DomSet => "domset",
            FunctionalFamily::Reduction { .. } => "reduction",
            FunctionalFamily::FringeCount(_) => "fringe",
            FunctionalFamily::OutdegreeCount(_) => "outdeg",
        }
    }
}

/// Value of an additive functional together with its per-node tolls.
#[derive(Debug, Clone)]
pub struct AdditiveEvaluation {
    pub family: FunctionalFamily,
    /// F(T): sum of the tolls over all fringe subtrees.
    pub value: f64,
    /// Toll of the whole tree (the root's contribution).
    pub root_toll: f64,
    /// Per-node tolls in preorder, when requested.
    pub tolls: Option<Vec<f64>>,
    /// Set when f64 ratio space may be too coarse (huge dominating-set
    /// degrees).
    pub precision_warning: bool,
}

/// Per-node ratio rho = I_0 / I for independent sets.
#[derive(Debug, Clone)]
pub struct IndState {
    pub rho: Vec<f64>,
}

/// Per-node ratio rho = m_0 / m for matchings.
#[derive(Debug, Clone)]
pub struct MatchState {
    pub rho: Vec<f64>,
}

/// Per-node ratios rho_0 = d_0 / d and rho_* = d_* / d for dominating sets.
#[derive(Debug, Clone)]
pub struct DomState {
    pub rho0: Vec<f64>,
    pub rho_star: Vec<f64>,
}

/// rho(T) = 1 / (1 + prod_children rho), f = -log rho, F = log I(T).
pub fn eval_independent(t: &Tree, keep_tolls: bool) -> (AdditiveEvaluation, IndState) {
    let n = t.len();
    let mut prod = alloc::vec![1.0f64; n];
    let mut rho = alloc::vec![0.0f64; n];
    let mut tolls = if keep_tolls {
        Some(alloc::vec![0.0f64; n])
    } else {
        None
    };
    let mut total = 0.0;
    for v in (0..n).rev() {
        let r = 1.0 / (1.0 + prod[v]);
        rho[v] = r;
        let f = -float::ln(r);
        total += f;
        if let Some(ts) = tolls.as_mut() {
            ts[v] = f;
        }
        if let Some(p) = t.parent(v) {
            prod[p] *= r;
        }
    }
    let root_toll = -float::ln(rho[0]);
    (
        AdditiveEvaluation {
            family: FunctionalFamily::IndSet,
            value: total,
            root_toll,
            tolls,
            precision_warning: false,
        },
        IndState { rho },
    )
}

/// rho(T) = 1 / (1 + sum_children rho), f = -log rho, F = log m(T).
pub fn eval_matching(t: &Tree, keep_tolls: bool) -> (AdditiveEvaluation, MatchState) {
    let n = t.len();
    let mut sum = alloc::vec![0.0f64; n];
    let mut rho = alloc::vec![0.0f64; n];
    let mut tolls = if keep_tolls {
        Some(alloc::vec![0.0f64; n])
    } else {
        None
    };
    let mut total = 0.0;
    for v in (0..n).rev() {
        let r = 1.0 / (1.0 + sum[v]);
        rho[v] = r;
        let f = -float::ln(r);
        total += f;
        if let Some(ts) = tolls.as_mut() {
            ts[v] = f;
        }
        if let Some(p) = t.parent(v) {
            sum[p] += r;
        }
    }
    let root_toll = -float::ln(rho[0]);
    (
        AdditiveEvaluation {
            family: FunctionalFamily::Matching,
            value: total,
            root_toll,
            tolls,
            precision_warning: false,
        },
        MatchState { rho },
    )
}

/// rho_* = P0 / (1 - P0 + P1) and rho_0 = (1 - P0) / (1 - P0 + P1), with
/// P0 = prod rho_0(child) and P1 = prod (1 + rho_*(child));
/// f = -log(rho_0 + rho_*), F = log d(T).
pub fn eval_dominating(t: &Tree, keep_tolls: bool) -> (AdditiveEvaluation, DomState) {
    let n = t.len();
    let mut p0 = alloc::vec![1.0f64; n];
    let mut p1 = alloc::vec![1.0f64; n];
    let mut rho0 = alloc::vec![0.0f64; n];
    let mut rho_star = alloc::vec![0.0f64; n];
    let mut tolls = if keep_tolls {
        Some(alloc::vec![0.0f64; n])
    } else {
        None
    };
    let mut total = 0.0;
    let mut warn = false;
    for v in (0..n).rev() {
        if t.outdeg(v) > DOMSET_PRECISION_DEGREE {
            warn = true;
        }
        let denom = 1.0 - p0[v] + p1[v];
        let rs = p0[v] / denom;
        let r0 = (1.0 - p0[v]) / denom;
        rho_star[v] = rs;
        rho0[v] = r0;
        let f = -float::ln(r0 + rs);
        total += f;
        if let Some(ts) = tolls.as_mut() {
            ts[v] = f;
        }
        if let Some(p) = t.parent(v) {
            p0[p] *= r0;
            p1[p] *= 1.0 + rs;
        }
    }
    let root_toll = -float::ln(rho0[0] + rho_star[0]);
    (
        AdditiveEvaluation {
            family: FunctionalFamily::DomSet,
            value: total,
            root_toll,
            tolls,
            precision_warning: warn,
        },
        DomState { rho0, rho_star },
    )
}

/// Counts occurrences of `pattern` as a fringe subtree (ordered equality).
pub fn eval_fringe_count(t: &Tree, pattern: &Tree, keep_tolls: bool) -> AdditiveEvaluation {
    let n = t.len();
    let mut tolls = if keep_tolls {
        Some(alloc::vec![0.0f64; n])
    } else {
        None
    };
    let mut count = 0u64;
    for v in 0..n {
        if t.fringe_matches(v, pattern) {
            count += 1;
            if let Some(ts) = tolls.as_mut() {
                ts[v] = 1.0;
            }
        }
    }
    let root_toll = if t.fringe_matches(0, pattern) { 1.0 } else { 0.0 };
    AdditiveEvaluation {
        family: FunctionalFamily::FringeCount(pattern.clone()),
        value: count as f64,
        root_toll,
        tolls,
        precision_warning: false,
    }
}

/// Counts nodes whose outdegree lies in `r`.
pub fn eval_outdegree_count(
    t: &Tree,
    r: &BTreeSet<u32>,
    keep_tolls: bool,
) -> AdditiveEvaluation {
    let n = t.len();
    let mut tolls = if keep_tolls {
        Some(alloc::vec![0.0f64; n])
    } else {
        None
    };
    let mut count = 0u64;
    for v in 0..n {
        if r.contains(&t.outdeg(v)) {
            count += 1;
            if let Some(ts) = tolls.as_mut() {
                ts[v] = 1.0;
            }
        }
    }
    let root_toll = if r.contains(&t.outdeg(0)) { 1.0 } else { 0.0 };
    AdditiveEvaluation {
        family: FunctionalFamily::OutdegreeCount(r.clone()),
        value: count as f64,
        root_toll,
        tolls,
        precision_warning: false,
    }
}

/// Evaluates any family, without retaining per-node tolls.
pub fn evaluate(family: &FunctionalFamily, t: &Tree) -> AdditiveEvaluation {
    evaluate_opt(family, t, false)
}

pub fn evaluate_opt(family: &FunctionalFamily, t: &Tree, keep_tolls: bool) -> AdditiveEvaluation {
    match family {
        FunctionalFamily::IndSet => eval_independent(t, keep_tolls).0,
        FunctionalFamily::Matching => eval_matching(t, keep_tolls).0,
        FunctionalFamily::DomSet => eval_dominating(t, keep_tolls).0,
        FunctionalFamily::Reduction { kind, rounds } => {
            reductions::eval_reduction(t, *kind, *rounds, keep_tolls)
        }
        FunctionalFamily::FringeCount(pattern) => eval_fringe_count(t, pattern, keep_tolls),
        FunctionalFamily::OutdegreeCount(r) => eval_outdegree_count(t, r, keep_tolls),
    }
}

/// Toll of the whole tree: f(T) = F(T) - sum over branches F(T_i).
pub fn toll_value(family: &FunctionalFamily, t: &Tree) -> f64 {
    evaluate(family, t).root_toll
}
