//! Sample statistics and the distribution-test helpers used by the
//! experiment harness: moments, a Kolmogorov-Smirnov distance against a
//! fitted normal, and tail probabilities for the chi-square and Kolmogorov
//! distributions (documented approximations, accurate far beyond what the
//! acceptance thresholds need).

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (n - 1) sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    ss / (xs.len() - 1) as f64
}

/// Centers and scales to mean 0, variance 1; `None` when the sample is
/// degenerate (zero spread).
pub fn standardize(xs: &[f64]) -> Option<Vec<f64>> {
    let m = mean(xs);
    let sd = sample_variance(xs).sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return None;
    }
    Some(xs.iter().map(|&x| (x - m) / sd).collect())
}

/// Third standardized moment of an already-standardized sample.
pub fn skewness(zs: &[f64]) -> f64 {
    zs.iter().map(|&z| z * z * z).sum::<f64>() / zs.len() as f64
}

/// Fourth standardized moment minus 3.
pub fn excess_kurtosis(zs: &[f64]) -> f64 {
    zs.iter().map(|&z| z * z * z * z).sum::<f64>() / zs.len() as f64 - 3.0
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / core::f64::consts::SQRT_2))
}

pub fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * core::f64::consts::PI).sqrt()
}

/// Kolmogorov-Smirnov distance sup |F_emp - F| against the standard normal.
/// The sample is sorted internally.
pub fn ks_distance_normal(zs: &[f64]) -> f64 {
    let mut sorted = zs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &z) in sorted.iter().enumerate() {
        let f = normal_cdf(z);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic Kolmogorov tail: P(sup > d) for sample size n, via the
/// alternating series with the finite-n argument sqrt(n)*d. Approximate
/// but conservative at the sizes used here.
pub fn kolmogorov_p(d: f64, n: usize) -> f64 {
    let t = (n as f64).sqrt() * d;
    if t < 0.2 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * t * t).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
        if term < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Upper-tail probability of the chi-square distribution with `dof`
/// degrees of freedom, via the regularized incomplete gamma function
/// (series expansion below a + 1, continued fraction above).
pub fn chi_square_p(stat: f64, dof: u32) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    1.0 - regularized_gamma_lower(dof as f64 / 2.0, stat / 2.0)
}

fn regularized_gamma_lower(a: f64, x: f64) -> f64 {
    if x < a + 1.0 {
        // series: P(a,x) = x^a e^-x / Gamma(a) * sum x^k / (a)_{k+1}
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        sum * (a * x.ln() - x - libm::lgamma(a)).exp()
    } else {
        // Lentz continued fraction for Q(a,x)
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let q = (a * x.ln() - x - libm::lgamma(a)).exp() * h;
        1.0 - q
    }
}

/// Pearson chi-square statistic from observed counts and expected counts.
pub fn chi_square_stat(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.96) - 0.975_002_1).abs() < 1e-6);
        assert!((normal_cdf(-1.0) - 0.158_655_25).abs() < 1e-7);
    }

    #[test]
    fn chi_square_reference_points() {
        // 0.001 upper quantile for 13 dof is 34.528
        assert!((chi_square_p(34.528, 13) - 0.001).abs() < 1e-4);
        // median of chi-square(2) is 2 ln 2
        assert!((chi_square_p(2.0 * core::f64::consts::LN_2, 2) - 0.5).abs() < 1e-12);
        assert!((chi_square_p(3.841, 1) - 0.05).abs() < 5e-4);
    }

    #[test]
    fn kolmogorov_reference_points() {
        // sqrt(n) d = 1.36 is the classical 5% point
        assert!((kolmogorov_p(1.36 / 100.0, 10_000) - 0.05).abs() < 2e-3);
        assert!(kolmogorov_p(0.001, 100) > 0.999);
    }

    #[test]
    fn standardization_is_exact() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin() * 3.0 + 7.0).collect();
        let zs = standardize(&xs).unwrap();
        assert!(mean(&zs).abs() < 1e-12);
        assert!((sample_variance(&zs) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_sample_detected() {
        assert!(standardize(&[4.0; 50]).is_none());
    }

    #[test]
    fn uniform_sample_is_platykurtic() {
        // deterministic low-discrepancy stand-in for uniform(0,1)
        let xs: Vec<f64> = (0..10_000)
            .map(|i| (i as f64 * 0.618_033_988_749_894_8).fract())
            .collect();
        let zs = standardize(&xs).unwrap();
        assert!((excess_kurtosis(&zs) + 1.2).abs() < 0.05);
        assert!(ks_distance_normal(&zs) > 0.05);
    }
}
