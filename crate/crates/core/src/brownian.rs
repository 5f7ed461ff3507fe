//! Discretized two-sided Brownian paths and the functionals whose laws
//! identify `d*` with the Arcsine law.
//!
//! Paths live on the grid `h Z` with `h = 1 / resolution` and Gaussian
//! increments of variance `h`. A grid value of exactly 0 counts as
//! non-positive.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{theoretical_position, FunctionalOptions, FunctionalReport};
use crate::path::{Side, TwoSidedPath};
use crate::seed;
use crate::stats::two_sample_ks;

/// Default grid points per unit time.
pub const DEFAULT_RESOLUTION: usize = 1 << 16;

/// Sign changes per grid cell, times `sqrt(h)`, times this constant
/// approximates the local time at 0 (normalized so that `L_1 ~ |B_1|`).
pub const LOCAL_TIME_SCALE: f64 = 1.253_314_137_315_500_3; // sqrt(pi / 2)

const LEFT_STREAM: u64 = 0;
const RIGHT_STREAM: u64 = 1;

#[derive(Debug, Clone)]
struct Window {
    rng: ChaCha8Rng,
    values: Vec<f64>,
}

/// A lazily extended two-sided Gaussian random walk with step variance `h`.
#[derive(Debug, Clone)]
pub struct BrownianPath {
    resolution: usize,
    sqrt_h: f64,
    seed: u64,
    /// +1, or -1 after [`BrownianPath::reflect`].
    sign: f64,
    right: Window,
    left: Window,
}

impl BrownianPath {
    /// A path with only `B(0) = 0` materialized.
    pub fn new(resolution: usize, seed: u64) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidArgument(format!(
                "resolution must be at least 2, got {resolution}"
            )));
        }
        let window = |stream| Window {
            rng: seed::stream_rng(seed, stream),
            values: vec![0.0],
        };
        Ok(Self {
            resolution,
            sqrt_h: (1.0 / resolution as f64).sqrt(),
            seed,
            sign: 1.0,
            right: window(RIGHT_STREAM),
            left: window(LEFT_STREAM),
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn step(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn window_mut(&mut self, side: Side) -> &mut Window {
        match side {
            Side::Right => &mut self.right,
            Side::Left => &mut self.left,
        }
    }

    /// Materializes indices `0..=len` on `side`.
    pub fn extend(&mut self, side: Side, len: usize) {
        let (sqrt_h, sign) = (self.sqrt_h, self.sign);
        let window = self.window_mut(side);
        if window.values.len() > len {
            return;
        }
        window.values.reserve(len + 1 - window.values.len());
        let mut last = *window.values.last().unwrap();
        while window.values.len() <= len {
            let z: f64 = StandardNormal.sample(&mut window.rng);
            last += sign * sqrt_h * z;
            window.values.push(last);
        }
    }

    /// `B(k h)` for `k >= 0`, extending if needed.
    pub fn value_at(&mut self, side: Side, k: usize) -> f64 {
        self.extend(side, k);
        self.side(side)[k]
    }

    /// `B -> -B`, including everything generated later.
    pub fn reflect(&mut self) {
        self.sign = -self.sign;
        for v in self
            .right
            .values
            .iter_mut()
            .chain(self.left.values.iter_mut())
        {
            *v = -*v;
        }
    }

    /// `t -> B(-t)`: swaps the two sides.
    pub fn mirror(&mut self) {
        std::mem::swap(&mut self.right, &mut self.left);
    }

    fn unit_interval(&mut self) -> &[f64] {
        let n = self.resolution;
        self.extend(Side::Right, n);
        &self.right.values[..=n]
    }
}

impl TwoSidedPath for BrownianPath {
    fn steps_per_unit(&self) -> usize {
        self.resolution
    }

    fn extend_to(&mut self, side: Side, len: usize) -> usize {
        let current = self.side(side).len() - 1;
        if len > current {
            self.extend(side, len.max(2 * current));
        }
        len.max(current)
    }

    fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Right => &self.right.values,
            Side::Left => &self.left.values,
        }
    }
}

/// Samples a path on `[-extent, extent]`, extendable afterwards.
pub fn sample_brownian(resolution: usize, extent: usize, seed: u64) -> Result<BrownianPath> {
    if extent < 1 {
        return Err(Error::InvalidArgument("extent must be at least 1".into()));
    }
    let mut path = BrownianPath::new(resolution, seed)?;
    path.extend(Side::Right, extent * resolution);
    path.extend(Side::Left, extent * resolution);
    Ok(path)
}

#[inline]
fn positive(v: f64) -> bool {
    v > 0.0
}

/// `h #{k < end : B(k h) > 0}`, the time spent above 0 before `end h`.
fn time_positive(values: &[f64], end: usize, h: f64) -> f64 {
    values[..end].iter().filter(|v| positive(**v)).count() as f64 * h
}

/// Grid index of the last zero before time 1: the largest `k < resolution`
/// with `B(k h) == 0` or a sign change between `k` and `k + 1`.
fn last_zero_index(values: &[f64]) -> usize {
    let n = values.len() - 1;
    (0..n)
        .rev()
        .find(|&k| values[k] == 0.0 || positive(values[k]) != positive(values[k + 1]))
        .unwrap_or(0)
}

/// `A^+_1`, the occupation time of `(0, inf)` during `[0, 1]`.
pub fn occupation_time_positive(path: &mut BrownianPath) -> f64 {
    let h = path.step();
    let values = path.unit_interval();
    time_positive(values, values.len() - 1, h)
}

/// `g_1`, the last zero before time 1.
pub fn last_zero(path: &mut BrownianPath) -> f64 {
    let h = path.step();
    last_zero_index(path.unit_interval()) as f64 * h
}

/// `A^+_{g_1}`, the occupation time of `(0, inf)` up to the last zero.
pub fn occupation_before_last_zero(path: &mut BrownianPath) -> f64 {
    let h = path.step();
    let values = path.unit_interval();
    time_positive(values, last_zero_index(values), h)
}

/// `A^+_{g_1} + coin (1 - g_1)`.
pub fn composite_sample(path: &mut BrownianPath, coin: bool) -> f64 {
    let h = path.step();
    let values = path.unit_interval();
    let k = last_zero_index(values);
    let stub = if coin { 1.0 - k as f64 * h } else { 0.0 };
    time_positive(values, k, h) + stub
}

/// `d*` and the other functionals of the path.
pub fn dstar_of_brownian(
    path: &mut BrownianPath,
    options: &FunctionalOptions,
) -> Result<FunctionalReport> {
    theoretical_position(path, options)
}

/// Local-time proxy at 0 over the first `end` grid cells of `values`.
pub fn local_time_proxy(values: &[f64], end: usize, h: f64) -> f64 {
    let crossings = values[..=end]
        .windows(2)
        .filter(|w| positive(w[0]) != positive(w[1]))
        .count();
    crossings as f64 * LOCAL_TIME_SCALE * h.sqrt()
}

/// Occupation times `(A^+, A^-, tau_t)` at the proxy of the inverse local
/// time, or `None` when `tau_t` exceeds `cap` time units.
fn occupation_at_inverse_local_time(
    rng: &mut ChaCha8Rng,
    resolution: usize,
    t: f64,
    cap: f64,
) -> Option<(f64, f64, f64)> {
    let h = 1.0 / resolution as f64;
    let sqrt_h = h.sqrt();
    let needed = (t / (LOCAL_TIME_SCALE * sqrt_h)).ceil().max(1.0) as u64;
    let max_steps = (cap * resolution as f64) as u64;
    let (mut b, mut above, mut below, mut crossings) = (0.0f64, 0u64, 0u64, 0u64);
    for k in 0..max_steps {
        let z: f64 = StandardNormal.sample(rng);
        let next = b + sqrt_h * z;
        if positive(b) != positive(next) {
            crossings += 1;
            if crossings >= needed {
                // the zero sits in cell [k, k + 1]; take its left end
                return Some((above as f64 * h, below as f64 * h, k as f64 * h));
            }
        }
        if positive(b) {
            above += 1;
        } else {
            below += 1;
        }
        b = next;
    }
    None
}

/// First grid index at which a fresh walk reaches `level`, scanning at most
/// `max_steps` steps.
fn hitting_index(
    rng: &mut ChaCha8Rng,
    resolution: usize,
    level: f64,
    max_steps: u64,
) -> Option<u64> {
    let sqrt_h = (1.0 / resolution as f64).sqrt();
    let mut b = 0.0f64;
    if b >= level {
        return Some(0);
    }
    for k in 1..=max_steps {
        let z: f64 = StandardNormal.sample(rng);
        b += sqrt_h * z;
        if b >= level {
            return Some(k);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyIdentityReport {
    pub replicas: usize,
    pub resolution: usize,
    pub t: f64,
    /// Samples with `tau_t` (resp. a quarter of `T^+_t + T^-_t`) beyond this
    /// many time units are censored to `+inf` in both pools.
    pub cap: f64,
    pub censored_occupation: usize,
    pub censored_hitting: usize,
    pub ks_plus: f64,
    pub ks_minus: f64,
    pub ks_sum: f64,
    /// KS between `A^+ / tau` and `T^+ / (T^+ + T^-)` over uncensored samples.
    pub ks_ratio: f64,
    /// `max |A^+ + A^- - tau|` over uncensored samples.
    pub max_sum_defect: f64,
}

/// Compares `(A^+_{tau_t}, A^-_{tau_t})` with `(T^+_t, T^-_t) / 4` sampled
/// from independent paths.
///
/// Both pools are censored on the same event in law, `A^+ + A^- > cap`
/// against `(T^+ + T^-) / 4 > cap`, so their distances remain comparable.
pub fn keyidentity_check(
    seed: u64,
    replicas: usize,
    resolution: usize,
    t: f64,
    cap: f64,
) -> Result<KeyIdentityReport> {
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be positive".into()));
    }
    if resolution < 2 || t.is_nan() || t <= 0.0 || cap.is_nan() || cap <= 0.0 {
        return Err(Error::InvalidArgument(
            "resolution >= 2, t > 0 and cap > 0 required".into(),
        ));
    }
    let h = 1.0 / resolution as f64;
    let budget = (4.0 * cap * resolution as f64) as u64;
    let mut occ = Vec::with_capacity(replicas);
    let mut hit = Vec::with_capacity(replicas);
    let mut max_sum_defect = 0.0f64;
    for r in 0..replicas as u64 {
        let mut rng = seed::stream_rng(seed::derive(seed, r, seed::label::KEY_IDENTITY_LOCAL), 0);
        let sample = occupation_at_inverse_local_time(&mut rng, resolution, t, cap);
        if let Some((plus, minus, tau)) = sample {
            max_sum_defect = f64::max(max_sum_defect, (plus + minus - tau).abs());
        }
        occ.push(sample.map(|(plus, minus, _)| (plus, minus)));

        let base = seed::derive(seed, r, seed::label::KEY_IDENTITY_HITTING);
        let mut right = seed::stream_rng(base, RIGHT_STREAM);
        let mut left = seed::stream_rng(base, LEFT_STREAM);
        let pair = hitting_index(&mut right, resolution, t, budget)
            .and_then(|tp| hitting_index(&mut left, resolution, t, budget - tp).map(|tm| (tp, tm)));
        hit.push(pair.map(|(tp, tm)| (tp as f64 * h / 4.0, tm as f64 * h / 4.0)));
    }

    let inf = f64::INFINITY;
    let pick = |pairs: &[Option<(f64, f64)>], f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
        pairs
            .iter()
            .map(|p| p.map_or(inf, |(a, b)| f(a, b)))
            .collect()
    };
    let ratio = |pairs: &[Option<(f64, f64)>]| -> Vec<f64> {
        pairs
            .iter()
            .flatten()
            .filter(|(a, b)| a + b > 0.0)
            .map(|(a, b)| a / (a + b))
            .collect()
    };
    let ks_or_one = |a: &[f64], b: &[f64]| two_sample_ks(a, b).unwrap_or(1.0);

    Ok(KeyIdentityReport {
        replicas,
        resolution,
        t,
        cap,
        censored_occupation: occ.iter().filter(|p| p.is_none()).count(),
        censored_hitting: hit.iter().filter(|p| p.is_none()).count(),
        ks_plus: ks_or_one(&pick(&occ, &|a, _| a), &pick(&hit, &|a, _| a)),
        ks_minus: ks_or_one(&pick(&occ, &|_, b| b), &pick(&hit, &|_, b| b)),
        ks_sum: ks_or_one(&pick(&occ, &|a, b| a + b), &pick(&hit, &|a, b| a + b)),
        ks_ratio: ks_or_one(&ratio(&occ), &ratio(&hit)),
        max_sum_defect,
    })
}

/// Draws the fair coin used by [`composite_sample`] for replica `index`.
pub fn coin(seed: u64, index: u64) -> bool {
    seed::stream_rng(seed::derive(seed, index, seed::label::COIN), 0).random()
}
