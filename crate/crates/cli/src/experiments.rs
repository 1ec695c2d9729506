//! Monte Carlo harness: replicated evaluation of a functional over
//! conditioned trees, normality and mean-drift diagnostics, and the
//! cut-off error curves.
//!
//! All randomness descends from one master seed through counter-based
//! splitting, and replicates are aggregated in replicate order, so every
//! result is independent of the worker thread count.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use gw_core::bounds;
use gw_core::functionals::{self, FunctionalFamily};
use gw_core::reductions::ReductionKind;
use gw_core::rng;
use gw_core::sampler::{self, ConditionedSampler, SamplerError};
use gw_core::tree::Tree;
use gw_core::OffspringDistribution;

use crate::stats;

#[derive(Debug)]
pub enum ExperimentError {
    ConfigInvalid(String),
    Sampler(SamplerError),
    SampleTooSmall,
    InsufficientSizes,
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::ConfigInvalid(why) => write!(f, "invalid config: {why}"),
            ExperimentError::Sampler(e) => write!(f, "sampler: {e}"),
            ExperimentError::SampleTooSmall => write!(f, "sample too small for normality stats"),
            ExperimentError::InsufficientSizes => {
                write!(f, "mean-drift check needs at least 3 sizes spanning a decade")
            }
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<SamplerError> for ExperimentError {
    fn from(e: SamplerError) -> Self {
        ExperimentError::Sampler(e)
    }
}

fn invalid(why: impl Into<String>) -> ExperimentError {
    ExperimentError::ConfigInvalid(why.into())
}

/// Offspring distribution descriptor as it appears in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf: Option<Vec<f64>>,
}

impl DistConfig {
    pub fn build(&self) -> Result<OffspringDistribution, ExperimentError> {
        match self.kind.as_str() {
            "geometric" => Ok(OffspringDistribution::geometric_half()),
            "poisson" => Ok(OffspringDistribution::poisson_one()),
            "binary" => Ok(OffspringDistribution::binary_half()),
            "custom" => {
                let pmf = self.pmf.as_ref().ok_or_else(|| invalid("custom dist needs pmf"))?;
                OffspringDistribution::custom(pmf).map_err(|e| invalid(e.to_string()))
            }
            other => Err(invalid(format!("unknown dist kind {other:?}"))),
        }
    }
}

/// Functional descriptor as it appears in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub name: String,
    /// Reduction rule for name = "reduction".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<u32>,
    /// Pattern tree (text format) for name = "fringe".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    /// Outdegree set for name = "outdeg".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<u32>>,
}

pub fn parse_reduction_kind(s: &str) -> Result<ReductionKind, ExperimentError> {
    match s {
        "leaf" => Ok(ReductionKind::Leaf),
        "oldleaf" => Ok(ReductionKind::OldLeaf),
        "path" => Ok(ReductionKind::Path),
        "oldpath" => Ok(ReductionKind::OldPath),
        other => Err(invalid(format!("unknown reduction kind {other:?}"))),
    }
}

impl FamilyConfig {
    pub fn build(&self) -> Result<FunctionalFamily, ExperimentError> {
        match self.name.as_str() {
            "indset" => Ok(FunctionalFamily::IndSet),
            "matching" => Ok(FunctionalFamily::Matching),
            "domset" => Ok(FunctionalFamily::DomSet),
            "reduction" => {
                let kind = parse_reduction_kind(
                    self.kind.as_deref().ok_or_else(|| invalid("reduction needs kind"))?,
                )?;
                let rounds = self.rounds.unwrap_or(1);
                if rounds == 0 {
                    return Err(invalid("reduction rounds must be >= 1"));
                }
                Ok(FunctionalFamily::Reduction { kind, rounds })
            }
            "fringe" => {
                let pattern: Tree = self
                    .pattern
                    .as_deref()
                    .unwrap_or("0")
                    .parse()
                    .map_err(|e| invalid(format!("bad pattern: {e}")))?;
                Ok(FunctionalFamily::FringeCount(pattern))
            }
            "outdeg" => {
                let set: BTreeSet<u32> = self
                    .degrees
                    .as_ref()
                    .ok_or_else(|| invalid("outdeg needs degrees"))?
                    .iter()
                    .copied()
                    .collect();
                Ok(FunctionalFamily::OutdegreeCount(set))
            }
            other => Err(invalid(format!("unknown family {other:?}"))),
        }
    }
}

fn default_alpha() -> u32 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dist: DistConfig,
    pub family: FamilyConfig,
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    /// Cut-off depths for the p_M curve; empty disables it.
    #[serde(default)]
    pub cutoffs: Vec<u32>,
    /// Moment-condition order reported alongside the summary.
    #[serde(default = "default_alpha")]
    pub alpha: u32,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.sizes.is_empty() {
            return Err(invalid("sizes must be nonempty"));
        }
        if self.replicates < 2 {
            return Err(invalid("replicates must be >= 2"));
        }
        self.dist.build()?;
        self.family.build()?;
        Ok(())
    }
}

/// Smallest n' >= n with positive probability under the distribution's
/// support lattice (e.g. the next odd number for binary offspring).
pub fn adjust_size(dist: &OffspringDistribution, n: usize) -> usize {
    let g = dist.support_gcd();
    if g == 0 {
        return 1;
    }
    let mut m = n.max(1);
    while (m - 1) % g != 0 {
        m += 1;
    }
    m
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicateRow {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub value: f64,
    pub root_toll: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalityStats {
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks_distance: f64,
    pub ks_p: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalityReport {
    pub sample_size: usize,
    pub degenerate: bool,
    pub stats: Option<NormalityStats>,
}

/// Moment-based normality diagnostics of a sample, standardized
/// internally. The p-value plumbing is approximate (asymptotic
/// Kolmogorov tail) and documented as such.
pub fn normality_report(sample: &[f64]) -> Result<NormalityReport, ExperimentError> {
    if sample.len() < 100 {
        return Err(ExperimentError::SampleTooSmall);
    }
    let Some(zs) = stats::standardize(sample) else {
        return Ok(NormalityReport {
            sample_size: sample.len(),
            degenerate: true,
            stats: None,
        });
    };
    debug_assert!(stats::mean(&zs).abs() < 1e-9);
    debug_assert!((stats::sample_variance(&zs) - 1.0).abs() < 1e-9);
    let d = stats::ks_distance_normal(&zs);
    Ok(NormalityReport {
        sample_size: sample.len(),
        degenerate: false,
        stats: Some(NormalityStats {
            skewness: stats::skewness(&zs),
            excess_kurtosis: stats::excess_kurtosis(&zs),
            ks_distance: d,
            ks_p: stats::kolmogorov_p(d, zs.len()),
        }),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub replicates: usize,
    pub mean: f64,
    /// mean / n, the per-node mean estimate.
    pub mu_hat: f64,
    pub variance: f64,
    /// var / n, the empirical gamma^2 estimate.
    pub var_over_n: f64,
    pub normality: Option<NormalityReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftResidual {
    pub n: usize,
    /// (mean - mu_hat * n) / sqrt(n)
    pub residual: f64,
    /// Monte Carlo standard error of the residual.
    pub se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    pub mu_hat: f64,
    /// Constant offset absorbed by the fit (the O(1) part of the mean).
    pub intercept: f64,
    pub residuals: Vec<DriftResidual>,
    /// Log-log slope of |residual| (floored at its standard error) vs n;
    /// diagnostic only.
    pub slope: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct DriftPoint {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub replicates: usize,
}

/// Fits mu by weighted regression of the mean on n and checks that the
/// sqrt(n)-scaled residuals shrink: verdict PASS when the log-log trend is
/// negative, or when every residual already sits inside its Monte Carlo
/// error band.
pub fn mean_drift_check(points: &[DriftPoint]) -> Result<DriftReport, ExperimentError> {
    if points.len() < 3 {
        return Err(ExperimentError::InsufficientSizes);
    }
    let min_n = points.iter().map(|p| p.n).min().unwrap();
    let max_n = points.iter().map(|p| p.n).max().unwrap();
    if max_n < min_n * 10 {
        return Err(ExperimentError::InsufficientSizes);
    }
    // weighted fit of mean = mu * n + b; the intercept soaks up the O(1)
    // part of the mean so the residuals isolate anything growing with n.
    // Inverse-variance weights; a degenerate (sd = 0) family pins the fit.
    let mut sw = 0.0;
    let mut swn = 0.0;
    let mut swnn = 0.0;
    let mut swy = 0.0;
    let mut swny = 0.0;
    for p in points {
        let var_mean = (p.sd * p.sd / p.replicates as f64).max(1e-300);
        let w = 1.0 / var_mean;
        let n = p.n as f64;
        sw += w;
        swn += w * n;
        swnn += w * n * n;
        swy += w * p.mean;
        swny += w * n * p.mean;
    }
    let mu_hat = (sw * swny - swn * swy) / (sw * swnn - swn * swn);
    let intercept = (swy - mu_hat * swn) / sw;
    let residuals: Vec<DriftResidual> = points
        .iter()
        .map(|p| {
            let sqrt_n = (p.n as f64).sqrt();
            DriftResidual {
                n: p.n,
                residual: (p.mean - mu_hat * p.n as f64 - intercept) / sqrt_n,
                se: p.sd / (p.replicates as f64).sqrt() / sqrt_n,
            }
        })
        .collect();
    let xs: Vec<f64> = residuals.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = residuals
        .iter()
        .map(|r| r.residual.abs().max(r.se).max(1e-300).ln())
        .collect();
    let slope = least_squares_slope(&xs, &ys);
    let pass = residuals.iter().all(|r| r.residual.abs() <= 3.3 * r.se.max(1e-300));
    Ok(DriftReport {
        mu_hat,
        intercept,
        residuals,
        slope,
        pass,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[derive(Debug, Clone, Serialize)]
pub struct PmPoint {
    pub m: u32,
    /// Mean |f(t) - f(t truncated)| over conditioned samples.
    pub conditioned_mean: f64,
    /// Nested Monte Carlo estimate of E|f(T^(M)) - E(f(T^(N)) | T^(M))|
    /// over the size-biased tree.
    pub size_biased_mean: f64,
    /// Average inner-loop standard error (the O(1/sqrt(K)) bias scale).
    pub inner_se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PmCurve {
    pub points: Vec<PmPoint>,
    /// Base of the fitted geometric decay of the conditioned column.
    pub decay_base: f64,
    pub extension_depth: u32,
    pub inner_replicates: u32,
}

/// Depth margin N - M for the size-biased column.
pub const PM_EXTENSION_DEPTH: u32 = 12;
/// Inner extensions per outer truncation.
pub const PM_INNER_REPLICATES: u32 = 32;

/// Cut-off error curves in M: the conditioned-tree column averages the
/// realized truncation error; the size-biased column estimates the
/// conditional-expectation gap by nested Monte Carlo with fresh
/// extensions spliced below the cut-off.
pub fn pm_curve(cfg: &ExperimentConfig) -> Result<PmCurve, ExperimentError> {
    cfg.validate()?;
    if cfg.cutoffs.is_empty() {
        return Err(invalid("pm curve needs cutoffs"));
    }
    let dist = cfg.dist.build()?;
    let family = cfg.family.build()?;
    match family {
        FunctionalFamily::IndSet
        | FunctionalFamily::Matching
        | FunctionalFamily::DomSet
        | FunctionalFamily::Reduction { .. } => {}
        _ => return Err(invalid("pm curve needs indset, matching, domset, or reduction")),
    }
    let n = adjust_size(&dist, *cfg.sizes.iter().max().unwrap());
    let sampler = ConditionedSampler::new(&dist, n)?;
    let trees: Vec<Tree> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut r = rng::stream(rng::split_seed(cfg.seed, rep as u64), 0);
            sampler.sample(&mut r)
        })
        .collect();
    let mut points = Vec::new();
    for &m in &cfg.cutoffs {
        let conditioned_mean = trees
            .par_iter()
            .map(|t| bounds::cutoff_error(t, m, &family))
            .collect::<Vec<f64>>()
            .iter()
            .sum::<f64>()
            / trees.len() as f64;
        let (size_biased_mean, inner_se) = size_biased_gap(cfg, &dist, &family, m)?;
        points.push(PmPoint {
            m,
            conditioned_mean,
            size_biased_mean,
            inner_se,
        });
    }
    let positive: Vec<&PmPoint> = points.iter().filter(|p| p.conditioned_mean > 0.0).collect();
    let decay_base = if positive.len() >= 2 {
        let xs: Vec<f64> = positive.iter().map(|p| p.m as f64).collect();
        let ys: Vec<f64> = positive.iter().map(|p| p.conditioned_mean.ln()).collect();
        least_squares_slope(&xs, &ys).exp()
    } else {
        0.0
    };
    Ok(PmCurve {
        points,
        decay_base,
        extension_depth: PM_EXTENSION_DEPTH,
        inner_replicates: PM_INNER_REPLICATES,
    })
}

/// Splices a fresh subtree below every depth-M node of the truncated
/// size-biased sample: the spine node continues size-biased, every other
/// boundary node grows an ordinary truncated branching tree.
fn extend_truncation(
    truncated: &Tree,
    depths: &[u32],
    spine_node: usize,
    m: u32,
    extra: u32,
    dist: &OffspringDistribution,
    r: &mut rng::Rng,
) -> Tree {
    let mut out: Vec<u32> = Vec::with_capacity(truncated.len() * 2);
    for v in 0..truncated.len() {
        if depths[v] == m {
            let sub = if v == spine_node {
                sampler::sample_size_biased_with(dist, extra, r).tree
            } else {
                sampler::sample_gw_truncated(dist, extra, r)
            };
            out.extend_from_slice(sub.outdegrees());
        } else {
            out.push(truncated.outdeg(v));
        }
    }
    Tree::from_outdegrees(&out).expect("splice preserves the preorder invariant")
}

fn size_biased_gap(
    cfg: &ExperimentConfig,
    dist: &OffspringDistribution,
    family: &FunctionalFamily,
    m: u32,
) -> Result<(f64, f64), ExperimentError> {
    let outer = cfg.replicates.min(512).max(2);
    let n_depth = m + PM_EXTENSION_DEPTH;
    let results: Vec<(f64, f64)> = (0..outer)
        .into_par_iter()
        .map(|rep| {
            let seed = rng::split_seed(cfg.seed ^ 0x9e3779b97f4a7c15, (u64::from(m) << 32) | rep as u64);
            let mut r = rng::stream(seed, 0);
            let outer_sample = sampler::sample_size_biased_with(dist, n_depth, &mut r);
            let truncated = outer_sample.tree.truncate(m);
            let f_m = functionals::evaluate(family, &truncated).root_toll;
            // index of the depth-m spine node inside the truncated arena:
            // truncation keeps exactly the nodes of depth <= m, in preorder
            let full_depths = outer_sample.tree.depths();
            let spine_full = outer_sample.spine[m as usize];
            let spine_node = (0..spine_full).filter(|&v| full_depths[v] <= m).count();
            let depths = truncated.depths();
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..PM_INNER_REPLICATES {
                let ext = extend_truncation(
                    &truncated,
                    &depths,
                    spine_node,
                    m,
                    PM_EXTENSION_DEPTH,
                    dist,
                    &mut r,
                );
                let f_n = functionals::evaluate(family, &ext).root_toll;
                sum += f_n;
                sumsq += f_n * f_n;
            }
            let k = f64::from(PM_INNER_REPLICATES);
            let inner_mean = sum / k;
            let inner_var = (sumsq / k - inner_mean * inner_mean).max(0.0);
            ((f_m - inner_mean).abs(), (inner_var / k).sqrt())
        })
        .collect();
    let gap = results.iter().map(|r| r.0).sum::<f64>() / outer as f64;
    let se = results.iter().map(|r| r.1).sum::<f64>() / outer as f64;
    Ok((gap, se))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub dist: String,
    pub family: String,
    pub seed: u64,
    pub alpha: u32,
    /// E xi^(2 alpha + 1), the offspring moment that must be finite for
    /// fluctuations at exponent alpha to be Gaussian.
    pub moment_2a1: f64,
    pub sizes: Vec<SizeSummary>,
    pub drift: Option<DriftReport>,
    pub pm: Option<PmCurve>,
}

pub struct ExperimentRun {
    pub rows: Vec<ReplicateRow>,
    pub summary: ExperimentSummary,
}

/// Samples and evaluates every (size, replicate) cell, then aggregates.
/// Replicates are distributed over the rayon pool; each draws from its own
/// split seed and the reduction is ordered, so the output is identical for
/// any thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun, ExperimentError> {
    cfg.validate()?;
    let dist = cfg.dist.build()?;
    let family = cfg.family.build()?;
    let mut rows = Vec::new();
    let mut sizes = Vec::new();
    let mut drift_points = Vec::new();
    for (si, &raw_n) in cfg.sizes.iter().enumerate() {
        let n = adjust_size(&dist, raw_n);
        let sampler = ConditionedSampler::new(&dist, n)?;
        let size_rows: Vec<ReplicateRow> = (0..cfg.replicates)
            .into_par_iter()
            .map(|rep| {
                let seed = rng::split_seed(cfg.seed, ((si as u64) << 40) | rep as u64);
                let mut r = rng::stream(seed, 0);
                let t = sampler.sample(&mut r);
                let ev = functionals::evaluate(&family, &t);
                ReplicateRow {
                    n,
                    replicate: rep,
                    seed,
                    value: ev.value,
                    root_toll: ev.root_toll,
                }
            })
            .collect();
        let values: Vec<f64> = size_rows.iter().map(|r| r.value).collect();
        let mean = stats::mean(&values);
        let variance = sample_variance_or_zero(&values);
        let normality = normality_report(&values).ok();
        drift_points.push(DriftPoint {
            n,
            mean,
            sd: variance.sqrt(),
            replicates: values.len(),
        });
        sizes.push(SizeSummary {
            n,
            replicates: values.len(),
            mean,
            mu_hat: mean / n as f64,
            variance,
            var_over_n: variance / n as f64,
            normality,
        });
        rows.extend(size_rows);
    }
    let drift = mean_drift_check(&drift_points).ok();
    let pm = if cfg.cutoffs.is_empty() {
        None
    } else {
        Some(pm_curve(cfg)?)
    };
    let summary = ExperimentSummary {
        dist: dist.name().to_string(),
        family: family.label().to_string(),
        seed: cfg.seed,
        alpha: cfg.alpha,
        moment_2a1: dist.moment(2 * cfg.alpha + 1),
        sizes,
        drift,
        pm,
    };
    Ok(ExperimentRun { rows, summary })
}

fn sample_variance_or_zero(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        0.0
    } else {
        stats::sample_variance(xs)
    }
}
