//! Distribution summaries and the one-sided Mann-Whitney U test used to
//! compare central and influential players.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("group '{0}' is empty")]
    EmptyGroup(String),
}

/// Linear-interpolation quantile of an ascending slice (`q` in `[0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// Linear-interpolation quantile of an unsorted sample.
pub fn quantile(sample: &[f64], q: f64) -> Result<f64, StatsError> {
    Ok(quantile_sorted(&sorted_finite(sample)?, q))
}

fn sorted_finite(sample: &[f64]) -> Result<Vec<f64>, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn mean(sample: &[f64]) -> f64 {
    sample.iter().sum::<f64>() / sample.len() as f64
}

/// Population standard deviation.
pub fn population_sd(sample: &[f64]) -> f64 {
    let m = mean(sample);
    (sample.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / sample.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Descriptive {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
}

pub fn descriptive(sample: &[f64]) -> Result<Descriptive, StatsError> {
    let v = sorted_finite(sample)?;
    Ok(Descriptive {
        min: v[0],
        q25: quantile_sorted(&v, 0.25),
        median: quantile_sorted(&v, 0.5),
        q75: quantile_sorted(&v, 0.75),
        max: v[v.len() - 1],
        mean: mean(&v),
        sd: population_sd(&v),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// Values in the first sample tend to be larger.
    AGreater,
    /// Values in the first sample tend to be smaller.
    ALess,
}

impl Alternative {
    pub fn flipped(self) -> Self {
        match self {
            Alternative::AGreater => Alternative::ALess,
            Alternative::ALess => Alternative::AGreater,
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alternative::AGreater => "a_greater",
            Alternative::ALess => "a_less",
        })
    }
}

/// How the p-value is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PValueMethod {
    /// Exact enumeration for tie-free samples with `n_a * n_b <= 400`,
    /// normal approximation otherwise.
    #[default]
    Auto,
    Exact,
    Normal,
}

pub const EXACT_MAX_PRODUCT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Exact,
    NormalApproximation,
}

impl fmt::Display for TestMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestMethod::Exact => "exact",
            TestMethod::NormalApproximation => "normal-approximation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupComparison {
    pub metric: String,
    pub group_a: String,
    pub group_b: String,
    pub n_a: usize,
    pub n_b: usize,
    /// U statistic of the first sample.
    pub u: f64,
    pub p_value: f64,
    pub alternative: Alternative,
    pub mean_a: f64,
    pub sd_a: f64,
    pub mean_b: f64,
    pub sd_b: f64,
    pub method: TestMethod,
}

impl GroupComparison {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Average ranks (1-based) of the pooled sample, plus the tie-group sizes.
fn pooled_ranks(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut pooled: Vec<(f64, usize)> = a
        .iter()
        .chain(b.iter())
        .copied()
        .enumerate()
        .map(|(i, x)| (x, i))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for item in &pooled[i..j] {
            ranks[item.1] = avg;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Number of rank arrangements giving each value of U, for sample sizes
/// `m` and `n` without ties. Index `u` runs over `0..=m*n`.
pub fn exact_u_counts(m: usize, n: usize) -> Vec<u128> {
    // table[j][u] holds counts for sizes (i, j) while sweeping i upward
    let mut table: Vec<Vec<u128>> = (0..=n).map(|_| vec![1u128]).collect();
    for i in 1..=m {
        let mut next: Vec<Vec<u128>> = Vec::with_capacity(n + 1);
        next.push(vec![1u128]);
        for j in 1..=n {
            let mut counts = vec![0u128; i * j + 1];
            // largest pooled value belongs to the first sample: it beats all j
            for (u, &c) in table[j].iter().enumerate() {
                counts[u + j] += c;
            }
            // largest belongs to the second sample: contributes nothing
            for (u, &c) in next[j - 1].iter().enumerate() {
                counts[u] += c;
            }
            next.push(counts);
        }
        table = next;
    }
    table.swap_remove(n)
}

fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// One-sided Mann-Whitney U test of `a` against `b`.
pub fn mann_whitney_u(
    a: &[f64],
    b: &[f64],
    alternative: Alternative,
    method: PValueMethod,
) -> Result<(f64, f64, TestMethod), StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (na, nb) = (a.len(), b.len());
    let (ranks, ties) = pooled_ranks(a, b);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u = rank_sum_a - (na * (na + 1)) as f64 / 2.0;

    let use_exact = match method {
        PValueMethod::Exact => ties.is_empty(),
        PValueMethod::Normal => false,
        PValueMethod::Auto => ties.is_empty() && na * nb <= EXACT_MAX_PRODUCT,
    };
    if use_exact {
        let counts = exact_u_counts(na, nb);
        let total: u128 = counts.iter().sum();
        let u_int = u.round() as usize;
        let tail: u128 = match alternative {
            Alternative::AGreater => counts[u_int..].iter().sum(),
            Alternative::ALess => counts[..=u_int].iter().sum(),
        };
        return Ok((u, tail as f64 / total as f64, TestMethod::Exact));
    }

    let (naf, nbf) = (na as f64, nb as f64);
    let n = naf + nbf;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let variance = naf * nbf / 12.0 * ((n + 1.0) - tie_term);
    let mu = naf * nbf / 2.0;
    let p = if variance <= 0.0 {
        1.0
    } else {
        let sd = variance.sqrt();
        match alternative {
            Alternative::AGreater => 1.0 - standard_normal_cdf((u - mu - 0.5) / sd),
            Alternative::ALess => standard_normal_cdf((u - mu + 0.5) / sd),
        }
    };
    Ok((
        u,
        p.clamp(f64::MIN_POSITIVE, 1.0),
        TestMethod::NormalApproximation,
    ))
}

/// Runs the test and bundles it with group descriptives.
pub fn compare_samples(
    metric: &str,
    (label_a, a): (&str, &[f64]),
    (label_b, b): (&str, &[f64]),
    alternative: Alternative,
) -> Result<GroupComparison, StatsError> {
    let (u, p_value, method) = mann_whitney_u(a, b, alternative, PValueMethod::Auto)?;
    Ok(GroupComparison {
        metric: metric.to_string(),
        group_a: label_a.to_string(),
        group_b: label_b.to_string(),
        n_a: a.len(),
        n_b: b.len(),
        u,
        p_value,
        alternative,
        mean_a: mean(a),
        sd_a: population_sd(a),
        mean_b: mean(b),
        sd_b: population_sd(b),
        method,
    })
}

/// Per-player values entering the group comparison.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlayerMetrics {
    pub influence: f64,
    pub edge_sd: f64,
    pub degree: f64,
    pub closeness: f64,
    pub betweenness: f64,
    pub eigenvector: f64,
    pub pagerank: f64,
    pub avg_weighted_degree: f64,
    pub retention_transfer: Option<f64>,
}

pub const INFLUENTIAL_LABEL: &str = "influential";
pub const CENTRAL_LABEL: &str = "central";

type MetricGetter = fn(&PlayerMetrics) -> Option<f64>;

/// The comparison battery: metric, accessor, and the alternative with the
/// influential group as the first sample.
pub const COMPARISON_BATTERY: [(&str, MetricGetter, Alternative); 9] = [
    ("influence", |m| Some(m.influence), Alternative::AGreater),
    ("degree", |m| Some(m.degree), Alternative::ALess),
    ("betweenness", |m| Some(m.betweenness), Alternative::ALess),
    ("closeness", |m| Some(m.closeness), Alternative::ALess),
    ("eigenvector", |m| Some(m.eigenvector), Alternative::ALess),
    ("pagerank", |m| Some(m.pagerank), Alternative::ALess),
    (
        "avg_weighted_degree",
        |m| Some(m.avg_weighted_degree),
        Alternative::AGreater,
    ),
    ("edge_influence_sd", |m| Some(m.edge_sd), Alternative::ALess),
    (
        "retention_transfer",
        |m| m.retention_transfer,
        Alternative::ALess,
    ),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub central_size: usize,
    pub influential_size: usize,
    pub overlap: usize,
    pub disjoint: bool,
    pub comparisons: Vec<GroupComparison>,
}

/// Compares influential against central players over the whole battery.
/// Players missing from `metrics`, or lacking a value for a metric, are left
/// out of that metric's samples; a metric with an empty sample is skipped.
pub fn compare_groups(
    central: &BTreeSet<String>,
    influential: &BTreeSet<String>,
    metrics: &BTreeMap<String, PlayerMetrics>,
) -> Result<GroupReport, StatsError> {
    if central.is_empty() {
        return Err(StatsError::EmptyGroup(CENTRAL_LABEL.into()));
    }
    if influential.is_empty() {
        return Err(StatsError::EmptyGroup(INFLUENTIAL_LABEL.into()));
    }
    let overlap = central.intersection(influential).count();
    let collect = |group: &BTreeSet<String>, get: MetricGetter| -> Vec<f64> {
        group
            .iter()
            .filter_map(|id| metrics.get(id).and_then(get))
            .collect()
    };
    let mut comparisons = Vec::new();
    for (name, get, alternative) in COMPARISON_BATTERY {
        let a = collect(influential, get);
        let b = collect(central, get);
        if a.is_empty() || b.is_empty() {
            continue;
        }
        comparisons.push(compare_samples(
            name,
            (INFLUENTIAL_LABEL, &a),
            (CENTRAL_LABEL, &b),
            alternative,
        )?);
    }
    Ok(GroupReport {
        central_size: central.len(),
        influential_size: influential.len(),
        overlap,
        disjoint: overlap == 0,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_two_by_two() {
        let (u, p, m) = mann_whitney_u(
            &[1.0, 2.0],
            &[3.0, 4.0],
            Alternative::ALess,
            PValueMethod::Auto,
        )
        .unwrap();
        assert_eq!(u, 0.0);
        assert_eq!(m, TestMethod::Exact);
        assert!((p - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn full_tie_is_half_product() {
        let (u, p, m) = mann_whitney_u(
            &[7.0; 3],
            &[7.0; 4],
            Alternative::AGreater,
            PValueMethod::Auto,
        )
        .unwrap();
        assert_eq!(u, 6.0);
        assert_eq!(m, TestMethod::NormalApproximation);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert_eq!(
            mann_whitney_u(&[], &[1.0], Alternative::ALess, PValueMethod::Auto),
            Err(StatsError::EmptySample)
        );
    }

    #[test]
    fn exact_counts_sum_to_binomial() {
        let counts = exact_u_counts(4, 3);
        assert_eq!(counts.len(), 13);
        assert_eq!(counts.iter().sum::<u128>(), 35);
        // symmetric distribution
        for u in 0..=12 {
            assert_eq!(counts[u], counts[12 - u]);
        }
        assert_eq!(exact_u_counts(20, 20).iter().sum::<u128>(), 137_846_528_820);
    }

    #[test]
    fn large_samples_use_normal_approximation() {
        let a: Vec<f64> = (0..30).map(f64::from).collect();
        let b: Vec<f64> = (30..60).map(f64::from).collect();
        let (u, p, m) = mann_whitney_u(&a, &b, Alternative::ALess, PValueMethod::Auto).unwrap();
        assert_eq!(m, TestMethod::NormalApproximation);
        assert_eq!(u, 0.0);
        assert!(p > 0.0 && p < 1e-9);
    }

    #[test]
    fn descriptive_examples() {
        let d = descriptive(&[5.0]).unwrap();
        assert_eq!(
            (d.min, d.q25, d.median, d.q75, d.max),
            (5.0, 5.0, 5.0, 5.0, 5.0)
        );
        assert_eq!(d.sd, 0.0);
        let d = descriptive(&[3.0, 1.0, 5.0, 2.0, 4.0]).unwrap();
        assert_eq!(
            (d.min, d.q25, d.median, d.q75, d.max),
            (1.0, 2.0, 3.0, 4.0, 5.0)
        );
        let d = descriptive(&[1.0, 3.0]).unwrap();
        assert_eq!((d.mean, d.sd), (2.0, 1.0));
        assert_eq!(descriptive(&[]), Err(StatsError::EmptySample));
    }

    fn metrics(influence: f64, degree: f64) -> PlayerMetrics {
        PlayerMetrics {
            influence,
            degree,
            ..Default::default()
        }
    }

    #[test]
    fn group_battery() {
        let mut table = BTreeMap::new();
        let mut central = BTreeSet::new();
        let mut influential = BTreeSet::new();
        for i in 0..6 {
            table.insert(format!("c{i}"), metrics(0.01 * i as f64, 50.0 + i as f64));
            central.insert(format!("c{i}"));
            table.insert(
                format!("i{i}"),
                metrics(0.5 + 0.01 * i as f64, 3.0 + i as f64),
            );
            influential.insert(format!("i{i}"));
        }
        let report = compare_groups(&central, &influential, &table).unwrap();
        assert!(report.disjoint);
        // retention transfer has no values and is skipped
        assert_eq!(report.comparisons.len(), 8);
        let infl = &report.comparisons[0];
        assert_eq!(infl.metric, "influence");
        assert_eq!(infl.u, 36.0);
        assert!(infl.significant(0.05));
        assert_eq!(report.comparisons[1].u, 0.0);
        assert!(report.comparisons[1].significant(0.05));
    }

    #[test]
    fn identical_groups_overlap_fully() {
        let table: BTreeMap<_, _> = (0..4)
            .map(|i| (format!("p{i}"), metrics(0.1, 2.0)))
            .collect();
        let group: BTreeSet<_> = table.keys().cloned().collect();
        let report = compare_groups(&group, &group, &table).unwrap();
        assert_eq!(report.overlap, 4);
        assert!(!report.disjoint);
        assert!(report.comparisons.iter().all(|c| c.p_value == 1.0));
    }

    #[test]
    fn empty_group_names_the_group() {
        let group: BTreeSet<String> = ["x".to_string()].into();
        let err = compare_groups(&BTreeSet::new(), &group, &BTreeMap::new()).unwrap_err();
        assert_eq!(err, StatsError::EmptyGroup("central".into()));
        let err = compare_groups(&group, &BTreeSet::new(), &BTreeMap::new()).unwrap_err();
        assert_eq!(err.to_string(), "group 'influential' is empty");
    }

    proptest! {
        #[test]
        fn u_statistics_sum_to_product(
            a in prop::collection::vec(0u8..6, 1..12),
            b in prop::collection::vec(0u8..6, 1..12),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let (ua, pa, _) = mann_whitney_u(&a, &b, Alternative::AGreater, PValueMethod::Auto).unwrap();
            let (ub, pb, _) = mann_whitney_u(&b, &a, Alternative::ALess, PValueMethod::Auto).unwrap();
            prop_assert_eq!(ua + ub, (a.len() * b.len()) as f64);
            prop_assert!(ua >= 0.0 && ua <= (a.len() * b.len()) as f64);
            prop_assert!(pa > 0.0 && pa <= 1.0);
            prop_assert!((pa - pb).abs() < 1e-12);
        }

        #[test]
        fn descriptive_ignores_order(mut v in prop::collection::vec(-1e6f64..1e6, 1..40), seed in any::<u64>()) {
            let before = descriptive(&v).unwrap();
            let len = v.len();
            v.rotate_left((seed as usize) % len);
            v.reverse();
            let after = descriptive(&v).unwrap();
            prop_assert_eq!(before.min, after.min);
            prop_assert_eq!(before.median, after.median);
            prop_assert_eq!(before.q25, after.q25);
            prop_assert_eq!(before.q75, after.q75);
            prop_assert_eq!(before.max, after.max);
        }
    }
}
