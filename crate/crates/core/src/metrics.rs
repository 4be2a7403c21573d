//! The twelve distance metrics used to compare a human annotation heatmap
//! with an explanation heatmap, all operating on flattened vectors.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::heatmap::mass_normalize;

/// Minkowski order used for [`MetricId::Minkowski`].
pub const MINKOWSKI_ORDER: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MetricId {
    WeightedJaccard,
    Wasserstein,
    BrayCurtis,
    Canberra,
    Chebyshev,
    Manhattan,
    Correlation,
    Cosine,
    Euclidean,
    JensenShannon,
    Minkowski,
    SquaredEuclidean,
}

impl MetricId {
    pub const ALL: [MetricId; 12] = [
        MetricId::WeightedJaccard,
        MetricId::Wasserstein,
        MetricId::BrayCurtis,
        MetricId::Canberra,
        MetricId::Chebyshev,
        MetricId::Manhattan,
        MetricId::Correlation,
        MetricId::Cosine,
        MetricId::Euclidean,
        MetricId::JensenShannon,
        MetricId::Minkowski,
        MetricId::SquaredEuclidean,
    ];

    pub fn acronym(self) -> &'static str {
        match self {
            MetricId::WeightedJaccard => "WJ",
            MetricId::Wasserstein => "WA",
            MetricId::BrayCurtis => "BC",
            MetricId::Canberra => "CA",
            MetricId::Chebyshev => "CY",
            MetricId::Manhattan => "MA",
            MetricId::Correlation => "CR",
            MetricId::Cosine => "CS",
            MetricId::Euclidean => "EU",
            MetricId::JensenShannon => "JS",
            MetricId::Minkowski => "MI",
            MetricId::SquaredEuclidean => "SE",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            MetricId::WeightedJaccard => "Weighted Jaccard",
            MetricId::Wasserstein => "Wasserstein",
            MetricId::BrayCurtis => "Bray-Curtis",
            MetricId::Canberra => "Canberra",
            MetricId::Chebyshev => "Chebyshev",
            MetricId::Manhattan => "Manhattan",
            MetricId::Correlation => "Correlation",
            MetricId::Cosine => "Cosine",
            MetricId::Euclidean => "Euclidean",
            MetricId::JensenShannon => "Jensen-Shannon",
            MetricId::Minkowski => "Minkowski",
            MetricId::SquaredEuclidean => "squared Euclidean",
        }
    }

    pub fn distance(self, u: &[f64], v: &[f64]) -> Result<f64> {
        match self {
            MetricId::WeightedJaccard => weighted_jaccard(u, v),
            MetricId::Wasserstein => wasserstein_1d(u, v),
            MetricId::BrayCurtis => bray_curtis(u, v),
            MetricId::Canberra => canberra(u, v),
            MetricId::Chebyshev => chebyshev(u, v),
            MetricId::Manhattan => manhattan(u, v),
            MetricId::Correlation => correlation_distance(u, v),
            MetricId::Cosine => cosine_distance(u, v),
            MetricId::Euclidean => euclidean(u, v),
            MetricId::JensenShannon => jensen_shannon(u, v),
            MetricId::Minkowski => minkowski(u, v, MINKOWSKI_ORDER),
            MetricId::SquaredEuclidean => squared_euclidean(u, v),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.acronym())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.acronym().eq_ignore_ascii_case(s) || m.display_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

fn check_pair(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    for (index, &x) in u.iter().chain(v).enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFiniteValue {
                index: index % u.len().max(1),
            });
        }
    }
    Ok(())
}

fn check_non_negative_pair(u: &[f64], v: &[f64]) -> Result<()> {
    check_pair(u, v)?;
    for xs in [u, v] {
        if let Some((index, &value)) = xs.iter().enumerate().find(|(_, &x)| x < 0.0) {
            return Err(Error::NegativeValue { index, value });
        }
    }
    Ok(())
}

fn abs_diffs<'a>(u: &'a [f64], v: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    u.iter().zip(v).map(|(a, b)| (a - b).abs())
}

/// `1 - Σ min(u_i, v_i) / Σ max(u_i, v_i)`.
pub fn weighted_jaccard(u: &[f64], v: &[f64]) -> Result<f64> {
    check_non_negative_pair(u, v)?;
    let (mut lo, mut hi) = (0.0, 0.0);
    for (&a, &b) in u.iter().zip(v) {
        lo += a.min(b);
        hi += a.max(b);
    }
    if hi == 0.0 {
        return Err(Error::DegenerateInput {
            metric: "WJ",
            reason: "both vectors are all zero",
        });
    }
    Ok((1.0 - lo / hi).clamp(0.0, 1.0))
}

/// Earth mover's distance between the mass-normalized vectors, using the
/// element index as a 1-D ground space with unit spacing.
///
/// In one dimension the optimal transport cost equals the L1 norm of the
/// difference of the cumulative distributions.
pub fn wasserstein_1d(u: &[f64], v: &[f64]) -> Result<f64> {
    check_non_negative_pair(u, v)?;
    let pu = mass_normalize(u)?;
    let pv = mass_normalize(v)?;
    let (mut cu, mut cv, mut total) = (0.0, 0.0, 0.0);
    // The last CDF entry is 1 for both, so it is skipped.
    for (a, b) in pu.iter().zip(&pv).take(pu.len().saturating_sub(1)) {
        cu += a;
        cv += b;
        total += (cu - cv).abs();
    }
    Ok(total)
}

/// `Σ |u_i - v_i| / Σ |u_i + v_i|`.
pub fn bray_curtis(u: &[f64], v: &[f64]) -> Result<f64> {
    check_non_negative_pair(u, v)?;
    let num: f64 = abs_diffs(u, v).sum();
    let den: f64 = u.iter().zip(v).map(|(a, b)| (a + b).abs()).sum();
    if den == 0.0 {
        return Err(Error::DegenerateInput {
            metric: "BC",
            reason: "both vectors are all zero",
        });
    }
    Ok(num / den)
}

/// `Σ |u_i - v_i| / (|u_i| + |v_i|)`; terms with `u_i = v_i = 0` add nothing.
pub fn canberra(u: &[f64], v: &[f64]) -> Result<f64> {
    check_non_negative_pair(u, v)?;
    Ok(u
        .iter()
        .zip(v)
        .map(|(a, b)| {
            let den = a.abs() + b.abs();
            if den == 0.0 {
                0.0
            } else {
                (a - b).abs() / den
            }
        })
        .sum())
}

pub fn chebyshev(u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(u, v)?;
    Ok(abs_diffs(u, v).fold(0.0, f64::max))
}

pub fn manhattan(u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(u, v)?;
    Ok(abs_diffs(u, v).sum())
}

/// One minus the Pearson correlation of `u` and `v`.
pub fn correlation_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(u, v)?;
    let is_constant = |xs: &[f64]| xs.iter().all(|&x| x == xs[0]);
    if u.is_empty() || is_constant(u) || is_constant(v) {
        return Err(Error::DegenerateInput {
            metric: "CR",
            reason: "constant vector has no centered norm",
        });
    }
    let n = u.len() as f64;
    let mean_u = u.iter().sum::<f64>() / n;
    let mean_v = v.iter().sum::<f64>() / n;
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (ca, cb) = (a - mean_u, b - mean_v);
        dot += ca * cb;
        nu += ca * ca;
        nv += cb * cb;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::DegenerateInput {
            metric: "CR",
            reason: "constant vector has no centered norm",
        });
    }
    Ok((1.0 - dot / (nu.sqrt() * nv.sqrt())).clamp(0.0, 2.0))
}

pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(u, v)?;
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::DegenerateInput {
            metric: "CS",
            reason: "all-zero vector has no direction",
        });
    }
    Ok((1.0 - dot / (nu * nv)).clamp(0.0, 2.0))
}

pub fn euclidean(u: &[f64], v: &[f64]) -> Result<f64> {
    Ok(squared_euclidean(u, v)?.sqrt())
}

/// Square root of the mean Kullback-Leibler divergence (base 2) of each
/// mass-normalized input to their pointwise mean. Bounded by 1.
pub fn jensen_shannon(u: &[f64], v: &[f64]) -> Result<f64> {
    check_non_negative_pair(u, v)?;
    let pu = mass_normalize(u)?;
    let pv = mass_normalize(v)?;
    let mut sum = 0.0;
    for (&a, &b) in pu.iter().zip(&pv) {
        let m = (a + b) / 2.0;
        if a > 0.0 {
            sum += a * (a / m).log2();
        }
        if b > 0.0 {
            sum += b * (b / m).log2();
        }
    }
    Ok((sum / 2.0).max(0.0).sqrt().min(1.0))
}

/// `(Σ |u_i - v_i|^order)^(1/order)` for `order >= 1`.
pub fn minkowski(u: &[f64], v: &[f64], order: f64) -> Result<f64> {
    check_pair(u, v)?;
    if !order.is_finite() || order < 1.0 {
        return Err(Error::InvalidOrder(order));
    }
    Ok(abs_diffs(u, v)
        .map(|d| d.powf(order))
        .sum::<f64>()
        .powf(order.recip()))
}

pub fn squared_euclidean(u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(u, v)?;
    Ok(u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn registry_has_twelve_distinct_acronyms() {
        let mut acr: Vec<_> = MetricId::ALL.iter().map(|m| m.acronym()).collect();
        acr.sort();
        acr.dedup();
        assert_eq!(acr.len(), 12);
        for m in MetricId::ALL {
            assert_eq!(m.acronym().parse::<MetricId>().unwrap(), m);
        }
        assert!("XX".parse::<MetricId>().is_err());
    }

    #[test]
    fn weighted_jaccard_examples() {
        assert_eq!(weighted_jaccard(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(weighted_jaccard(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(weighted_jaccard(&[0.5, 1.0], &[1.0, 0.5]).unwrap(), 0.5, epsilon = 1e-15);
        assert!(matches!(weighted_jaccard(&[0.0], &[0.0]), Err(Error::DegenerateInput { .. })));
        assert!(matches!(weighted_jaccard(&[1.0], &[0.0, 1.0]), Err(Error::LengthMismatch(1, 2))));
        assert!(matches!(weighted_jaccard(&[-1.0], &[1.0]), Err(Error::NegativeValue { .. })));
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein_1d(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        let a = [1.0, 0.0, 0.0, 0.0];
        let b = [0.0, 0.0, 0.0, 1.0];
        assert_abs_diff_eq!(wasserstein_1d(&a, &b).unwrap(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            wasserstein_1d(&[1.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 1.0]).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        assert!(matches!(wasserstein_1d(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroMass)));
    }

    #[test]
    fn bray_curtis_examples() {
        assert_eq!(bray_curtis(&[0.4, 0.1], &[0.4, 0.1]).unwrap(), 0.0);
        assert_eq!(bray_curtis(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(bray_curtis(&[1.0, 1.0], &[3.0, 1.0]).unwrap(), 2.0 / 6.0, epsilon = 1e-15);
        assert!(bray_curtis(&[0.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn canberra_examples() {
        assert_eq!(canberra(&[0.5, 0.0], &[0.5, 0.0]).unwrap(), 0.0);
        assert_eq!(canberra(&[0.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(canberra(&[1.0, 3.0], &[3.0, 1.0]).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn chebyshev_and_manhattan_examples() {
        assert_eq!(chebyshev(&[0.1, 0.2], &[0.1, 0.2]).unwrap(), 0.0);
        assert_abs_diff_eq!(chebyshev(&[0.0, 0.2], &[0.9, 0.1]).unwrap(), 0.9, epsilon = 1e-15);
        assert_eq!(manhattan(&[1.0, 0.0, 1.0], &[0.0; 3]).unwrap(), 2.0);
        assert_abs_diff_eq!(manhattan(&[0.5, 0.5], &[0.25, 0.75]).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn correlation_examples() {
        assert_abs_diff_eq!(correlation_distance(&[0.1, 0.5, 0.2], &[0.1, 0.5, 0.2]).unwrap(), 0.0, epsilon = 1e-15);
        let u = [0.1, 0.5, 0.2, 0.9];
        let v: Vec<f64> = u.iter().map(|x| 1.0 - x).collect();
        assert_abs_diff_eq!(correlation_distance(&u, &v).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(correlation_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0, epsilon = 1e-15);
        assert!(matches!(
            correlation_distance(&[0.3, 0.3], &[0.0, 1.0]),
            Err(Error::DegenerateInput { metric: "CR", .. })
        ));
    }

    #[test]
    fn cosine_examples() {
        assert_abs_diff_eq!(cosine_distance(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0, epsilon = 1e-15);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(cosine_distance(&[1.0, 1.0], &[2.0, 2.0]).unwrap(), 0.0, epsilon = 1e-15);
        assert!(cosine_distance(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn euclidean_family_examples() {
        assert_eq!(euclidean(&[3.0, 0.0], &[0.0, 4.0]).unwrap(), 5.0);
        assert_eq!(squared_euclidean(&[3.0, 0.0], &[0.0, 4.0]).unwrap(), 25.0);
        assert_eq!(minkowski(&[1.0, 0.0], &[0.0, 0.0], 3.0).unwrap(), 1.0);
        assert_eq!(minkowski(&[0.2, 0.1], &[0.2, 0.1], 3.0).unwrap(), 0.0);
        assert!(matches!(minkowski(&[1.0], &[0.0], 0.5), Err(Error::InvalidOrder(_))));
    }

    #[test]
    fn jensen_shannon_examples() {
        assert_eq!(jensen_shannon(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_abs_diff_eq!(jensen_shannon(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0, epsilon = 1e-15);
        // term-by-term evaluation with base-2 logs
        assert_abs_diff_eq!(
            jensen_shannon(&[0.5, 0.5], &[0.25, 0.75]).unwrap(),
            0.220_895_768_849_017_35,
            epsilon = 1e-14
        );
        assert!(matches!(jensen_shannon(&[0.0], &[1.0]), Err(Error::ZeroMass)));
    }

    fn pair(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1..=max_len).prop_flat_map(|n| {
            (
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(0.0f64..1.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn axioms_hold((u, v) in pair(64)) {
            for m in MetricId::ALL {
                let (Ok(d_uv), Ok(d_vu), Ok(d_uu)) = (m.distance(&u, &v), m.distance(&v, &u), m.distance(&u, &u)) else {
                    continue;
                };
                prop_assert!(d_uv >= 0.0, "{m} negative");
                prop_assert!((d_uv - d_vu).abs() <= 1e-12, "{m} asymmetric");
                prop_assert!(d_uu.abs() <= 1e-12, "{m} d(u,u) = {d_uu}");
            }
        }

        #[test]
        fn minkowski_special_orders((u, v) in pair(64)) {
            assert_abs_diff_eq!(minkowski(&u, &v, 1.0).unwrap(), manhattan(&u, &v).unwrap(), epsilon = 1e-9);
            assert_abs_diff_eq!(minkowski(&u, &v, 2.0).unwrap(), euclidean(&u, &v).unwrap(), epsilon = 1e-9);
            assert_abs_diff_eq!(squared_euclidean(&u, &v).unwrap(), euclidean(&u, &v).unwrap().powi(2), epsilon = 1e-9);
        }

        #[test]
        fn jensen_shannon_scale_invariant((u, v) in pair(64), a in 0.01f64..100.0, b in 0.01f64..100.0) {
            prop_assume!(u.iter().sum::<f64>() > 0.0 && v.iter().sum::<f64>() > 0.0);
            let su: Vec<f64> = u.iter().map(|x| x * a).collect();
            let sv: Vec<f64> = v.iter().map(|x| x * b).collect();
            assert_abs_diff_eq!(jensen_shannon(&u, &v).unwrap(), jensen_shannon(&su, &sv).unwrap(), epsilon = 1e-12);
        }
    }
}
