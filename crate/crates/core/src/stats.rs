//! Reference distributions, empirical distances and pool summaries.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};

/// Arcsine law on `[0, 1]`.
pub mod arcsine {
    pub const MEAN: f64 = 0.5;
    pub const VARIANCE: f64 = 0.125;
    /// `E[(X - 1/2)^4]`
    pub const FOURTH_CENTRAL: f64 = 3.0 / 128.0;
}

/// `(2/pi) asin(sqrt(x))`.
pub fn arcsine_cdf(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            value: x,
            domain: "[0, 1]",
        });
    }
    Ok(2.0 / PI * x.sqrt().asin())
}

/// `1 / (pi sqrt(x (1 - x)))` on the open interval.
pub fn arcsine_density(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return f64::INFINITY;
    }
    1.0 / (PI * (x * (1.0 - x)).sqrt())
}

/// CDF of `|N(0, 1)|`, i.e. `2 Phi(y) - 1`.
pub fn half_normal_cdf(y: f64) -> Result<f64> {
    if y.is_nan() || y < 0.0 {
        return Err(Error::Domain {
            value: y,
            domain: "[0, inf)",
        });
    }
    Ok(libm::erf(y * FRAC_1_SQRT_2))
}

/// A labelled collection of scalar samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePool {
    pub label: String,
    pub values: Vec<f64>,
}

impl SamplePool {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }

    /// Rejects values outside `[lo, hi]` or NaN.
    pub fn with_support(
        label: impl Into<String>,
        values: Vec<f64>,
        lo: f64,
        hi: f64,
    ) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !(**v >= lo && **v <= hi)) {
            return Err(Error::Domain {
                value: bad,
                domain: "pool support",
            });
        }
        Ok(Self::new(label, values))
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn variance(&self) -> f64 {
        variance(&self.values)
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample Kolmogorov-Smirnov statistic `sup |F_n - F|`.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyPool);
    }
    let xs = sorted(values);
    let n = xs.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(sup)
}

/// Two-sample Kolmogorov-Smirnov statistic between right-continuous ECDFs.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPool);
    }
    let (xs, ys) = (sorted(a), sorted(b));
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

/// Total variation `(1/2) sum |p - q|` between two empirical laws on the integers.
pub fn tv_distance_discrete(a: &[i64], b: &[i64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mut diff: BTreeMap<i64, f64> = BTreeMap::new();
    let (wa, wb) = (1.0 / a.len() as f64, 1.0 / b.len() as f64);
    for &x in a {
        *diff.entry(x).or_default() += wa;
    }
    for &x in b {
        *diff.entry(x).or_default() -= wb;
    }
    Ok(0.5 * diff.values().map(|d| d.abs()).sum::<f64>())
}

/// Whether the sample mean and variance of `values` are within `k` standard
/// errors of a law with the given mean, variance and fourth central moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCheck {
    pub mean: f64,
    pub var: f64,
    pub mean_z: f64,
    pub var_z: f64,
}

impl MomentCheck {
    pub fn new(values: &[f64], mean_ref: f64, var_ref: f64, fourth_central_ref: f64) -> Self {
        let m = values.len() as f64;
        let (mu, var) = (mean(values), variance(values));
        Self {
            mean: mu,
            var,
            mean_z: (mu - mean_ref) / (var_ref / m).sqrt(),
            var_z: (var - var_ref) / ((fourth_central_ref - var_ref * var_ref) / m).sqrt(),
        }
    }

    pub fn arcsine(values: &[f64]) -> Self {
        Self::new(
            values,
            arcsine::MEAN,
            arcsine::VARIANCE,
            arcsine::FOURTH_CENTRAL,
        )
    }

    pub fn within(&self, k: f64) -> bool {
        self.mean_z.abs() <= k && self.var_z.abs() <= k
    }
}

/// Summary of one pool, serialized into the JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoolReport {
    pub pool_label: String,
    pub n: usize,
    pub mean: f64,
    pub var: f64,
    pub ks_vs_arcsine: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_vs_halfnormal: Option<f64>,
    pub pairwise_ks: BTreeMap<String, f64>,
}

impl PoolReport {
    /// Summary against the Arcsine law (skipped if values leave `[0, 1]`).
    pub fn arcsine(pool: &SamplePool) -> Result<Self> {
        let ks = if pool.values.iter().all(|v| (0.0..=1.0).contains(v)) {
            Some(ks_statistic(&pool.values, |x| arcsine_cdf(x).unwrap())?)
        } else {
            None
        };
        Ok(Self {
            pool_label: pool.label.clone(),
            n: pool.count(),
            mean: pool.mean(),
            var: pool.variance(),
            ks_vs_arcsine: ks,
            ks_vs_halfnormal: None,
            pairwise_ks: BTreeMap::new(),
        })
    }

    /// Summary against the half-normal law.
    pub fn half_normal(pool: &SamplePool) -> Result<Self> {
        Ok(Self {
            pool_label: pool.label.clone(),
            n: pool.count(),
            mean: pool.mean(),
            var: pool.variance(),
            ks_vs_arcsine: None,
            ks_vs_halfnormal: Some(ks_statistic(&pool.values, |y| {
                half_normal_cdf(y.max(0.0)).unwrap()
            })?),
            pairwise_ks: BTreeMap::new(),
        })
    }
}

/// Fills `pairwise_ks` of every report with the two-sample distances to the other pools.
pub fn attach_pairwise(reports: &mut [PoolReport], pools: &[SamplePool]) -> Result<()> {
    for (i, report) in reports.iter_mut().enumerate() {
        for (j, other) in pools.iter().enumerate() {
            if i != j {
                let d = two_sample_ks(&pools[i].values, &other.values)?;
                report.pairwise_ks.insert(other.label.clone(), d);
            }
        }
    }
    Ok(())
}
