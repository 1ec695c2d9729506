//! End-to-end acceptance suite. Each test covers one release criterion and
//! prints a single PASS line with the measured quantities; any failure is a
//! hard assertion.

use std::collections::BTreeMap;
use std::process::Command;

use rayon::prelude::*;

use gw_cli::experiments::{
    self, DistConfig, DriftPoint, ExperimentConfig, FamilyConfig,
};
use gw_cli::stats;
use gw_core::bounds::{self, EtaLemmaOutcome};
use gw_core::functionals::{self, FunctionalFamily};
use gw_core::oracle;
use gw_core::reductions::ReductionKind;
use gw_core::rng;
use gw_core::sampler::{self, ConditionedSampler};
use gw_core::tree::Tree;
use gw_core::OffspringDistribution;

fn geometric() -> OffspringDistribution {
    OffspringDistribution::geometric_half()
}

fn sample_batch(dist: &OffspringDistribution, n: usize, count: usize, seed: u64) -> Vec<Tree> {
    let sampler = ConditionedSampler::new(dist, n).unwrap();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(rng::split_seed(seed, i as u64), 0);
            sampler.sample(&mut r)
        })
        .collect()
}

fn exact_count(family: &FunctionalFamily, t: &Tree) -> f64 {
    match family {
        FunctionalFamily::IndSet => oracle::brute_independent(t).unwrap().total(),
        FunctionalFamily::Matching => oracle::brute_matching(t).unwrap().total(),
        FunctionalFamily::DomSet => oracle::brute_dominating(t).unwrap().total(),
        _ => unreachable!(),
    }
}

#[test]
fn acceptance_oracle_equivalence() {
    let families = [
        FunctionalFamily::IndSet,
        FunctionalFamily::Matching,
        FunctionalFamily::DomSet,
    ];
    let mut checked = 0usize;
    for n in 1..=10 {
        for t in oracle::enumerate_trees(n).unwrap() {
            for family in &families {
                let fast = functionals::evaluate(family, &t).value.exp();
                let exact = exact_count(family, &t);
                assert!(
                    (fast - exact).abs() <= 1e-9 * exact,
                    "count mismatch on {t}: {fast} vs {exact}"
                );
                checked += 1;
            }
        }
    }
    println!("PASS oracle equivalence: {checked} tree/family pairs, n <= 10, within 1e-9");
}

fn six_families() -> Vec<FunctionalFamily> {
    vec![
        FunctionalFamily::IndSet,
        FunctionalFamily::Matching,
        FunctionalFamily::DomSet,
        FunctionalFamily::Reduction { kind: ReductionKind::OldPath, rounds: 2 },
        FunctionalFamily::FringeCount("1 0".parse().unwrap()),
        FunctionalFamily::OutdegreeCount([0u32, 2].into_iter().collect()),
    ]
}

fn assert_branch_additivity(t: &Tree, family: &FunctionalFamily) {
    let ev = functionals::evaluate(family, t);
    let mut sum = ev.root_toll;
    for c in t.children(0) {
        sum += functionals::evaluate(family, &t.fringe_at(c).unwrap()).value;
    }
    assert!(
        (ev.value - sum).abs() <= 1e-9 * (1.0 + ev.value.abs()),
        "additivity broken for {} on n = {}",
        family.label(),
        t.len()
    );
}

#[test]
fn acceptance_additivity() {
    let families = six_families();
    let mut checked = 0usize;
    for n in 1..=10 {
        for t in oracle::enumerate_trees(n).unwrap() {
            for family in &families {
                assert_branch_additivity(&t, family);
                checked += 1;
            }
        }
    }
    for t in sample_batch(&geometric(), 1000, 1000, 20_01) {
        for family in &families {
            assert_branch_additivity(&t, family);
            checked += 1;
        }
    }
    println!("PASS additivity: {checked} decompositions, all six families, within 1e-9");
}

#[test]
fn acceptance_explicit_truncation_bounds() {
    let families = [FunctionalFamily::IndSet, FunctionalFamily::Matching];
    let mut checked = 0usize;
    for n in 1..=9 {
        for t in oracle::enumerate_trees(n).unwrap() {
            for m in 1..=8 {
                for family in &families {
                    let rep = bounds::tau_report(&t, m, family).unwrap();
                    assert!(!rep.violated && rep.certified, "bound broken on {t} at {m}");
                    checked += 1;
                }
            }
        }
    }
    let trees = sample_batch(&geometric(), 2000, 1000, 30_01);
    for t in &trees {
        for m in [4u32, 8, 12] {
            for family in &families {
                let rep = bounds::tau_report(t, m, family).unwrap();
                assert!(!rep.violated && rep.certified, "bound broken at n = 2000, M = {m}");
                checked += 1;
            }
        }
    }
    println!("PASS explicit truncation bounds: {checked} certificates, zero violations");
}

#[test]
fn acceptance_eta_contraction() {
    let mut holds = 0usize;
    let mut skipped = 0usize;
    let mut run = |t: &Tree, m: u32| match bounds::check_eta_lemma(t, m).unwrap().outcome {
        EtaLemmaOutcome::Holds => holds += 1,
        EtaLemmaOutcome::Skipped => skipped += 1,
        EtaLemmaOutcome::Violated => panic!("eta contraction violated on {t} at {m}"),
    };
    for n in 1..=9 {
        for t in oracle::enumerate_trees(n).unwrap() {
            for m in [3u32, 4] {
                run(&t, m);
            }
        }
    }
    for t in sample_batch(&geometric(), 500, 1000, 40_01) {
        for m in [3u32, 5, 8] {
            run(&t, m);
        }
    }
    let total = holds + skipped;
    assert!(skipped * 10 <= total * 3, "skip rate too high: {skipped}/{total}");
    println!("PASS eta contraction: {holds} hold, {skipped} skipped of {total}, zero violations");
}

#[test]
fn acceptance_sampler_exactness() {
    // uniformity over the 14 shapes of size 5
    let dist = geometric();
    let shapes = oracle::enumerate_trees(5).unwrap();
    let index: BTreeMap<String, usize> = shapes
        .iter()
        .enumerate()
        .map(|(i, t)| (t.to_string(), i))
        .collect();
    let total = 100_000usize;
    let sampler = ConditionedSampler::new(&dist, 5).unwrap();
    let mut counts = vec![0f64; shapes.len()];
    let mut r = rng::stream(50_01, 0);
    for _ in 0..total {
        let t = sampler.sample(&mut r);
        counts[index[&t.to_string()]] += 1.0;
    }
    let expected = vec![total as f64 / shapes.len() as f64; shapes.len()];
    let stat = stats::chi_square_stat(&counts, &expected);
    assert!(stat < 34.528, "uniformity chi-square too large: {stat}");

    // size-biased identity at depth 2: P(observed) = w_2 * P(truncated)
    let total_sb = 1_000_000usize;
    let mut observed: BTreeMap<String, f64> = BTreeMap::new();
    let mut r = rng::stream(50_02, 0);
    for _ in 0..total_sb {
        let t = sampler::sample_size_biased_with(&dist, 2, &mut r).tree;
        *observed.entry(t.to_string()).or_insert(0.0) += 1.0;
    }
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    for (line, &count) in &observed {
        let t: Tree = line.parse().unwrap();
        let depths = t.depths();
        let w2 = depths.iter().filter(|&&d| d == 2).count() as f64;
        let mut p = 1.0;
        for v in 0..t.len() {
            if depths[v] <= 1 {
                p *= dist.prob(t.outdeg(v) as usize);
            }
        }
        let e = total_sb as f64 * w2 * p;
        if e >= 10.0 {
            obs.push(count);
            exp.push(e);
        }
    }
    // everything rare lands in one pooled cell
    let kept = obs.len();
    obs.push(total_sb as f64 - obs.iter().sum::<f64>());
    exp.push((total_sb as f64 - exp.iter().sum::<f64>()).max(1e-9));
    let stat = stats::chi_square_stat(&obs, &exp);
    let p = stats::chi_square_p(stat, (obs.len() - 1) as u32);
    assert!(p > 0.001, "size-biased identity rejected: stat {stat}, p {p}, {kept} cells");
    println!(
        "PASS sampler exactness: uniformity chi2 {stat_u:.2} < 34.53; size-biased p = {p:.4} over {cells} cells",
        stat_u = stats::chi_square_stat(&counts, &expected),
        cells = obs.len()
    );
}

#[test]
fn acceptance_truncated_mean_size() {
    let total = 100_000usize;
    for dist in [geometric(), OffspringDistribution::poisson_one()] {
        for m in [1u32, 4, 16] {
            let mut r = rng::stream(60_01 + u64::from(m), 0);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..total {
                let size = sampler::sample_gw_truncated(&dist, m, &mut r).len() as f64;
                sum += size;
                sumsq += size * size;
            }
            let mean = sum / total as f64;
            let var = sumsq / total as f64 - mean * mean;
            let se = (var / total as f64).sqrt();
            let target = m as f64 + 1.0;
            assert!(
                (mean - target).abs() <= 3.0 * se,
                "{}: truncated mean size {mean} vs {target} (se {se})",
                dist.name()
            );
        }
    }
    println!("PASS truncated mean size: E|T^(M)| = M + 1 within 3 se, M in {{1, 4, 16}}, both dists");
}

#[test]
fn acceptance_clt_normality() {
    let dist = geometric();
    let families = [
        FunctionalFamily::IndSet,
        FunctionalFamily::Matching,
        FunctionalFamily::DomSet,
        FunctionalFamily::Reduction { kind: ReductionKind::OldPath, rounds: 2 },
    ];
    let sizes = [2500usize, 10_000, 40_000];
    let reps = 10_000usize;
    // trees are shared across families; each family's marginal law is
    // unaffected
    let mut var_over_n = vec![Vec::new(); families.len()];
    let mut central_values: Vec<Vec<f64>> = Vec::new();
    for (szi, &n) in sizes.iter().enumerate() {
        let sampler = ConditionedSampler::new(&dist, n).unwrap();
        let values: Vec<Vec<f64>> = (0..reps)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(rng::split_seed(70_01, (szi as u64) << 40 | i as u64), 0);
                let t = sampler.sample(&mut r);
                families
                    .iter()
                    .map(|f| functionals::evaluate(f, &t).value)
                    .collect()
            })
            .collect();
        for (fi, _) in families.iter().enumerate() {
            let col: Vec<f64> = values.iter().map(|row| row[fi]).collect();
            var_over_n[fi].push(stats::sample_variance(&col) / n as f64);
            if n == 10_000 {
                central_values.push(col);
            }
        }
    }
    let skew_bound = 0.08 + 3.3 * (6.0f64 / reps as f64).sqrt();
    let kurt_bound = 0.16 + 3.3 * (24.0f64 / reps as f64).sqrt();
    for (fi, family) in families.iter().enumerate() {
        let zs = stats::standardize(&central_values[fi]).unwrap();
        let skew = stats::skewness(&zs);
        let kurt = stats::excess_kurtosis(&zs);
        let ks = stats::ks_distance_normal(&zs);
        assert!(skew.abs() < skew_bound, "{}: skewness {skew}", family.label());
        assert!(kurt.abs() < kurt_bound, "{}: excess kurtosis {kurt}", family.label());
        assert!(ks < 0.02, "{}: KS distance {ks}", family.label());
        let lo = var_over_n[fi].iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = var_over_n[fi].iter().cloned().fold(0.0, f64::max);
        assert!(
            hi <= lo * 1.15,
            "{}: var/n unstable: {:?}",
            family.label(),
            var_over_n[fi]
        );
    }
    println!(
        "PASS normality: 4 families at n = 10^4 pass skew/kurtosis/KS bands; var/n stable within 15% over 16x sizes"
    );
}

#[test]
fn acceptance_mean_drift() {
    let dist = geometric();
    let families = [FunctionalFamily::IndSet, FunctionalFamily::Matching];
    let sizes = [1000usize, 4000, 16_000];
    let reps = 4000usize;
    let mut points = vec![Vec::new(); families.len()];
    for (szi, &n) in sizes.iter().enumerate() {
        let sampler = ConditionedSampler::new(&dist, n).unwrap();
        let values: Vec<Vec<f64>> = (0..reps)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(rng::split_seed(80_01, (szi as u64) << 40 | i as u64), 0);
                let t = sampler.sample(&mut r);
                families
                    .iter()
                    .map(|f| functionals::evaluate(f, &t).value)
                    .collect()
            })
            .collect();
        for (fi, _) in families.iter().enumerate() {
            let col: Vec<f64> = values.iter().map(|row| row[fi]).collect();
            points[fi].push(DriftPoint {
                n,
                mean: stats::mean(&col),
                sd: stats::sample_variance(&col).sqrt(),
                replicates: reps,
            });
        }
    }
    let mut mus = Vec::new();
    for (fi, family) in families.iter().enumerate() {
        let report = experiments::mean_drift_check(&points[fi]).unwrap();
        assert!(report.pass, "{}: drift residuals {:?}", family.label(), report.residuals);
        mus.push(report.mu_hat);
    }

    // small-size cross-check against exact conditional expectations
    for n in [3usize, 5] {
        let sampler = ConditionedSampler::new(&dist, n).unwrap();
        for family in &families {
            let values: Vec<f64> = (0..10_000)
                .map(|i| {
                    let mut r = rng::stream(rng::split_seed(80_02, (n as u64) << 32 | i), 0);
                    functionals::evaluate(family, &sampler.sample(&mut r)).value
                })
                .collect();
            let (_, exact) = oracle::exact_expectation(family, &dist, n).unwrap();
            let mean = stats::mean(&values);
            let se = (stats::sample_variance(&values) / values.len() as f64).sqrt();
            // the absolute floor covers sizes where the functional is
            // constant over all shapes and se collapses to zero
            assert!(
                (mean - exact).abs() <= 3.0 * se + 1e-9,
                "{} at n = {n}: mean {mean} vs exact {exact}",
                family.label()
            );
        }
    }
    println!(
        "PASS mean drift: indset mu = {:.6}, matching mu = {:.6}; residuals inside bands; small-n means match enumeration",
        mus[0], mus[1]
    );
}

#[test]
fn acceptance_degenerate_reduction() {
    let cfg = ExperimentConfig {
        dist: DistConfig { kind: "binary".into(), pmf: None },
        family: FamilyConfig {
            name: "reduction".into(),
            kind: Some("leaf".into()),
            rounds: Some(1),
            pattern: None,
            degrees: None,
        },
        sizes: vec![5, 51, 501],
        replicates: 500,
        seed: 90_01,
        cutoffs: Vec::new(),
        alpha: 1,
    };
    let run = experiments::run_experiment(&cfg).unwrap();
    for size in &run.summary.sizes {
        assert_eq!(size.variance, 0.0, "variance not exactly zero at n = {}", size.n);
        assert_eq!(size.mean, (size.n as f64 + 1.0) / 2.0);
    }
    for row in &run.rows {
        assert_eq!(row.value, (row.n as f64 + 1.0) / 2.0);
    }
    println!("PASS degenerate reduction: one leaf round on binary trees gives (n+1)/2 with zero variance");
}

#[test]
fn acceptance_variance_witness() {
    // archived regression baselines from the first computation
    let baselines: [(u32, usize, &str, &str, &str, &str); 3] = [
        (2, 15, "2306", "1681", "2120", "1552"),
        (3, 40, "2298661010", "1911240521", "1460588544", "1209991168"),
        (
            4,
            85,
            "542300238144346452482",
            "493639046268679584001",
            "165622523964573089792",
            "148891251391873417216",
        ),
    ];
    for (d, size, ic, i0c, icat, i0cat) in baselines {
        let w = oracle::variance_positivity_witness(d).unwrap();
        assert!(w.holds && !w.degenerate);
        assert_eq!(w.size, size);
        assert!(w.eta > 1.0, "d = {d}: eta {}", w.eta);
        assert_eq!(w.i_complete.to_string(), ic);
        assert_eq!(w.i0_complete.to_string(), i0c);
        assert_eq!(w.i_caterpillar.to_string(), icat);
        assert_eq!(w.i0_caterpillar.to_string(), i0cat);
    }
    println!("PASS variance witness: equal-size pairs with strictly larger counts for d in {{2, 3, 4}}, eta > 1");
}

#[test]
fn acceptance_pm_decay() {
    let cfg = ExperimentConfig {
        dist: DistConfig { kind: "geometric".into(), pmf: None },
        family: FamilyConfig {
            name: "indset".into(),
            kind: None,
            rounds: None,
            pattern: None,
            degrees: None,
        },
        sizes: vec![2000],
        replicates: 400,
        seed: 110_01,
        cutoffs: (2..=12).collect(),
        alpha: 1,
    };
    let curve = experiments::pm_curve(&cfg).unwrap();
    assert!(
        curve.decay_base <= 0.75,
        "independent-set cut-off error decay base {}",
        curve.decay_base
    );

    let mut red = cfg.clone();
    red.family = FamilyConfig {
        name: "reduction".into(),
        kind: Some("leaf".into()),
        rounds: Some(1),
        pattern: None,
        degrees: None,
    };
    red.replicates = 200;
    red.cutoffs = (2..=8).collect();
    let red_curve = experiments::pm_curve(&red).unwrap();
    for p in &red_curve.points {
        assert_eq!(p.conditioned_mean, 0.0, "nonzero cut-off error at M = {}", p.m);
        assert_eq!(p.size_biased_mean, 0.0);
    }
    println!(
        "PASS cut-off error decay: indset base {:.3} <= 0.75; one-round leaf reduction identically 0 for M >= 2",
        curve.decay_base
    );
}

fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn acceptance_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_gw");
    let dir = std::env::temp_dir().join(format!("gw-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("exp.json");
    std::fs::write(
        &config,
        r#"{
  "dist": { "kind": "geometric" },
  "family": { "name": "matching" },
  "sizes": [200, 400],
  "replicates": 64,
  "seed": 12001
}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.join(format!("out{threads}"));
        let status = Command::new(bin)
            .args(["experiment", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--threads", threads, "--no-timestamp"])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read_to_string(out.join("replicates.csv")).unwrap());
    }
    assert_eq!(
        csv_body(&outputs[0]),
        csv_body(&outputs[1]),
        "CSV bodies differ between thread counts"
    );

    // identical invocations are byte-identical end to end
    let run = |threads: &str| {
        Command::new(bin)
            .args([
                "sample", "--dist", "geometric", "--n", "50", "--count", "20", "--seed", "9",
                "--no-timestamp", "--threads", threads,
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(csv_body(std::str::from_utf8(&run("1")).unwrap()),
               csv_body(std::str::from_utf8(&run("8")).unwrap()));
    std::fs::remove_dir_all(&dir).ok();
    println!("PASS determinism: experiment and sample outputs byte-identical for 1 vs 8 threads");
}
