use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{mean, normal_sf, normal_two_sided, sample_variance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelchResult {
    /// `(mean_a - mean_b) / se`.
    pub t: f64,
    /// Welch-Satterthwaite degrees of freedom.
    pub df: f64,
    pub p: f64,
}

pub fn welch_t(group_a: &[f64], group_b: &[f64]) -> Result<WelchResult> {
    if group_a.len() < 2 || group_b.len() < 2 {
        return Err(Error::Degenerate("Welch t needs at least two values per group".into()));
    }
    let (na, nb) = (group_a.len() as f64, group_b.len() as f64);
    let (va, vb) = (sample_variance(group_a) / na, sample_variance(group_b) / nb);
    if va == 0.0 && vb == 0.0 {
        return Err(Error::Degenerate("both groups have zero variance".into()));
    }
    let t = (mean(group_a) - mean(group_b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Degenerate(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(WelchResult { t, df, p })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendTestResult {
    pub z: f64,
    pub p: f64,
    pub scores: Vec<f64>,
}

/// Cochran-Armitage test for a linear trend in proportions across ordered
/// levels. Positive `z` means proportions rise with the score.
pub fn cochran_armitage(successes: &[u64], trials: &[u64], scores: &[f64]) -> Result<TrendTestResult> {
    if successes.len() != trials.len() || trials.len() != scores.len() {
        return Err(Error::Contract("successes, trials and scores differ in length".into()));
    }
    if trials.len() < 2 {
        return Err(Error::Domain("trend test needs at least two levels".into()));
    }
    if scores.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("scores must be strictly increasing".into()));
    }
    if let Some(i) = (0..trials.len()).find(|&i| successes[i] > trials[i]) {
        return Err(Error::Domain(format!("level {i} has more successes than trials")));
    }
    let n_total: f64 = trials.iter().sum::<u64>() as f64;
    if n_total == 0.0 {
        return Err(Error::Domain("all levels have zero trials".into()));
    }
    let p_bar = successes.iter().sum::<u64>() as f64 / n_total;
    let (mut stat, mut sum_ns, mut sum_ns2) = (0.0, 0.0, 0.0);
    for i in 0..trials.len() {
        let (x, n, s) = (successes[i] as f64, trials[i] as f64, scores[i]);
        stat += s * (x - n * p_bar);
        sum_ns += n * s;
        sum_ns2 += n * s * s;
    }
    let var = p_bar * (1.0 - p_bar) * (sum_ns2 - sum_ns * sum_ns / n_total);
    if var <= 0.0 {
        return Err(Error::Degenerate("trend statistic has zero variance".into()));
    }
    let z = stat / var.sqrt();
    Ok(TrendTestResult {
        z,
        p: normal_two_sided(z),
        scores: scores.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub d: f64,
    pub p: f64,
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form converges fast for small lambda.
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let cdf: f64 = (1..=20)
            .map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp())
            .sum::<f64>()
            * (2.0 * std::f64::consts::PI).sqrt()
            / lambda;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let sf: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
            })
            .sum::<f64>()
            * 2.0;
        sf.clamp(0.0, 1.0)
    }
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value at
/// effective size `n_a n_b / (n_a + n_b)`.
pub fn ks_two_sample(sample_a: &[f64], sample_b: &[f64]) -> Result<KsResult> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::Degenerate("KS test needs non-empty samples".into()));
    }
    if sample_a.iter().chain(sample_b).any(|v| v.is_nan()) {
        return Err(Error::Domain("KS samples contain NaN".into()));
    }
    let mut a = sample_a.to_vec();
    let mut b = sample_b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    Ok(KsResult {
        d,
        p: kolmogorov_sf(ne.sqrt() * d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TostResult {
    pub difference: f64,
    pub margin: f64,
    pub p_lower: f64,
    pub p_upper: f64,
    pub equivalent: bool,
}

/// Two one-sided z-tests of `-margin < difference < margin`.
pub fn tost_equivalence(difference: f64, standard_error: f64, margin: f64, alpha: f64) -> Result<TostResult> {
    if standard_error.is_nan() || standard_error <= 0.0 {
        return Err(Error::Domain("standard error must be positive".into()));
    }
    if margin.is_nan() || margin <= 0.0 {
        return Err(Error::Domain("equivalence margin must be positive".into()));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0, 0.5)")));
    }
    let p_lower = normal_sf((difference + margin) / standard_error);
    let p_upper = normal_sf((margin - difference) / standard_error);
    Ok(TostResult {
        difference,
        margin,
        p_lower,
        p_upper,
        equivalent: p_lower < alpha && p_upper < alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn welch_examples() {
        let r = welch_t(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.t, 0.0);
        assert_relative_eq!(r.p, 1.0, epsilon = 1e-12);
        let r = welch_t(&[0.0, 0.0, 1.0, 1.0], &[10.0, 10.0, 11.0, 11.0]).unwrap();
        // se = sqrt(2 * (1/3)/4), t = -10 / se
        assert_relative_eq!(r.t, -10.0 / (2.0f64 / 12.0).sqrt(), epsilon = 1e-9);
        assert_relative_eq!(r.df, 6.0, epsilon = 1e-9);
        assert!(r.p < 0.01);
        assert_eq!(welch_t(&[1.0, 2.0], &[1.0, 2.0]).unwrap().t, 0.0);
        assert!(welch_t(&[1.0, 1.0], &[2.0, 2.0]).is_err());
        assert!(welch_t(&[1.0], &[2.0, 3.0]).is_err());
    }

    #[test]
    fn trend_flat_is_zero() {
        let r = cochran_armitage(&[10, 20, 30], &[100, 200, 300], &[1.0, 2.0, 3.0]).unwrap();
        assert!(r.z.abs() < 1e-12);
    }

    #[test]
    fn trend_on_pass_rate_counts() {
        let r = cochran_armitage(
            &[11, 34, 70, 97, 128, 164],
            &[300; 6],
            &[0.3, 0.4, 0.5, 0.6, 0.7, 1.0],
        )
        .unwrap();
        assert!(r.z > 0.0);
        assert!(r.p < 0.001);
    }

    #[test]
    fn trend_with_two_levels_is_two_proportion_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let (n1, n2) = (rng.random_range(5..200u64), rng.random_range(5..200u64));
            let (x1, x2) = (rng.random_range(1..n1), rng.random_range(1..n2));
            let ca = cochran_armitage(&[x1, x2], &[n1, n2], &[0.0, 1.0]).unwrap();
            let (p1, p2) = (x1 as f64 / n1 as f64, x2 as f64 / n2 as f64);
            let pool = (x1 + x2) as f64 / (n1 + n2) as f64;
            let z = (p2 - p1) / (pool * (1.0 - pool) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
            assert_relative_eq!(ca.z, z, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn trend_errors() {
        assert!(matches!(cochran_armitage(&[0, 0], &[0, 0], &[1.0, 2.0]), Err(Error::Domain(_))));
        assert!(cochran_armitage(&[1, 2], &[5, 5], &[2.0, 1.0]).is_err());
        assert!(cochran_armitage(&[1], &[5], &[1.0]).is_err());
        assert!(cochran_armitage(&[6, 2], &[5, 5], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ks_examples() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!((r.d, r.p), (0.0, 1.0));
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[5.0, 6.0, 7.0]).unwrap().d, 1.0);
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5]).unwrap();
        assert_relative_eq!(r.d, 1.0 / 3.0, epsilon = 1e-15);
    }

    /// Brute-force ECDF sweep over every observed value.
    fn ks_oracle(a: &[f64], b: &[f64]) -> f64 {
        let ecdf = |s: &[f64], x: f64| s.iter().filter(|v| **v <= x).count() as f64 / s.len() as f64;
        a.iter()
            .chain(b)
            .map(|&x| (ecdf(a, x) - ecdf(b, x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn kolmogorov_branches_agree() {
        // Both series evaluated near the switch point.
        for lambda in [1.17, 1.18, 1.19] {
            let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
            let theta = 1.0
                - (1..=20).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum::<f64>()
                    * (2.0 * std::f64::consts::PI).sqrt()
                    / lambda;
            let alt: f64 = 2.0
                * (1..=100)
                    .map(|k| (if k % 2 == 1 { 1.0 } else { -1.0 }) * (-2.0 * (k * k) as f64 * lambda * lambda).exp())
                    .sum::<f64>();
            assert_relative_eq!(theta, alt, epsilon = 1e-12);
            assert_relative_eq!(kolmogorov_sf(lambda), alt, epsilon = 1e-12);
        }
        // Known quantile: P(K > 1.3581) = 0.05.
        assert_relative_eq!(kolmogorov_sf(1.3581), 0.05, epsilon = 1e-4);
    }

    #[test]
    fn tost_examples() {
        let r = tost_equivalence(0.02, 0.01, 0.05, 0.05).unwrap();
        assert!(r.equivalent);
        assert_relative_eq!(r.p_upper, 0.0013498980316301, epsilon = 1e-9);
        assert!(!tost_equivalence(0.2, 0.01, 0.05, 0.05).unwrap().equivalent);
        assert!(tost_equivalence(0.0, 1e-9, 0.05, 0.05).unwrap().equivalent);
        assert!(tost_equivalence(0.0, 0.0, 0.05, 0.05).is_err());
    }

    proptest! {
        #[test]
        fn ks_matches_oracle(
            a in prop::collection::vec(0u8..20, 1..30),
            b in prop::collection::vec(0u8..20, 1..30),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let r = ks_two_sample(&a, &b).unwrap();
            prop_assert!((r.d - ks_oracle(&a, &b)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&r.p));
        }

        #[test]
        fn trend_is_affine_invariant(
            x in prop::collection::vec(1u64..50, 3..7),
            a in 0.1f64..10.0,
            shift in -5.0f64..5.0,
        ) {
            let trials = vec![60u64; x.len()];
            let scores: Vec<f64> = (0..x.len()).map(|i| i as f64 * 0.7 + 0.1).collect();
            let moved: Vec<f64> = scores.iter().map(|s| a * s + shift).collect();
            let z1 = cochran_armitage(&x, &trials, &scores).unwrap().z;
            let z2 = cochran_armitage(&x, &trials, &moved).unwrap().z;
            prop_assert!((z1 - z2).abs() < 1e-9 * (1.0 + z1.abs()));
        }

        #[test]
        fn tost_never_equivalent_outside_margin(
            diff in -1.0f64..1.0,
            se in 1e-6f64..1.0,
            margin in 0.01f64..0.5,
        ) {
            let r = tost_equivalence(diff, se, margin, 0.05).unwrap();
            if diff.abs() >= margin {
                prop_assert!(!r.equivalent);
            }
            if r.equivalent {
                prop_assert!(diff.abs() < margin);
            }
        }
    }
}
