//! Internal DLA on `Z` driven by walks in a fixed environment.
//!
//! The cluster after `n` particles is an interval `[g, d]` containing 0. A
//! particle started at 0 leaves it either at `g - 1` or at `d + 1`, and only
//! that exit side matters for the growth. For a walk in environment `omega`
//!
//! ```text
//! P(exit at g - 1) = sum_{i=0}^{d} exp V(i) / sum_{i=g-1}^{d} exp V(i)
//! ```
//!
//! so [`grow_cluster`] draws the exit side directly, one uniform variate per
//! particle, keeping both sums in log space and updating them as sites join.
//! [`grow_cluster_oracle`] runs the walks step by step instead and exists to
//! validate the shortcut.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::logspace::{log_add_exp, log_sum_exp};
use crate::seed;

/// Largest interval width accepted by [`hitting_probability_oracle`].
pub const ORACLE_MAX_WIDTH: usize = 10_000;

/// Default step budget for a single step-by-step walk.
pub const DEFAULT_STEP_CAP: u64 = 10_000_000;

/// Incremental log sums are rebuilt from scratch after this many updates.
pub const REFRESH_INTERVAL: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExitSide {
    /// The particle first left the cluster at `g - 1`.
    Left,
    /// The particle first left the cluster at `d + 1`.
    Right,
}

/// An interval cluster `[g, d]` together with the log-space sums that give
/// its exit probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    g: i64,
    d: i64,
    n_particles: u64,
    /// `log sum_{i=g-1}^{d} exp V(i)`
    log_inside: f64,
    /// `log sum_{i=0}^{d} exp V(i)`
    log_right: f64,
    updates: u64,
}

impl Cluster {
    /// The cluster `A(0) = {0}`.
    pub fn new(env: &mut Environment) -> Self {
        let v0 = env.potential(0);
        let vm1 = env.potential(-1);
        Self {
            g: 0,
            d: 0,
            n_particles: 0,
            log_inside: log_add_exp(vm1, v0),
            log_right: v0,
            updates: 0,
        }
    }

    pub fn left_edge(&self) -> i64 {
        self.g
    }

    pub fn right_edge(&self) -> i64 {
        self.d
    }

    pub fn n_particles(&self) -> u64 {
        self.n_particles
    }

    pub fn log_inside(&self) -> f64 {
        self.log_inside
    }

    pub fn log_right(&self) -> f64 {
        self.log_right
    }

    /// Probability that the next particle leaves through `g - 1`.
    #[inline]
    pub fn exit_left_probability(&self) -> f64 {
        (self.log_right - self.log_inside).exp()
    }

    /// Adds the exit site on `side` and updates the sums.
    pub fn add(&mut self, env: &mut Environment, side: ExitSide) {
        match side {
            ExitSide::Right => {
                self.d += 1;
                let v = env.potential(self.d);
                self.log_inside = log_add_exp(self.log_inside, v);
                self.log_right = log_add_exp(self.log_right, v);
            }
            ExitSide::Left => {
                self.g -= 1;
                let v = env.potential(self.g - 1);
                self.log_inside = log_add_exp(self.log_inside, v);
            }
        }
        self.n_particles += 1;
        self.updates += 1;
        if self.updates >= REFRESH_INTERVAL {
            self.recompute(env);
        }
    }

    /// Rebuilds both sums from the potential.
    pub fn recompute(&mut self, env: &mut Environment) {
        let (inside, right) = exit_log_sums(env, self.g, self.d);
        self.log_inside = inside;
        self.log_right = right;
        self.updates = 0;
    }
}

/// `(log sum_{g-1}^{d} exp V, log sum_{0}^{d} exp V)` computed from scratch.
fn exit_log_sums(env: &mut Environment, g: i64, d: i64) -> (f64, f64) {
    let values: Vec<f64> = (g - 1..=d).map(|i| env.potential(i)).collect();
    let origin = (1 - g) as usize;
    let inside = log_sum_exp(values.iter().copied());
    let right = log_sum_exp(values[origin..].iter().copied());
    (inside, right)
}

/// Probability that a walk from 0 leaves `[g, d]` through `g - 1`.
///
/// Exact in `(0, 1)`; the returned float can round to 0 or 1 when the two
/// sides differ by more than the `f64` range of `exp`.
pub fn exit_left_probability(env: &mut Environment, g: i64, d: i64) -> f64 {
    assert!(g <= 0 && 0 <= d, "cluster must contain the origin");
    let (inside, right) = exit_log_sums(env, g, d);
    (right - inside).exp()
}

/// Solves `h(x) = (1 - omega(x)) h(x - 1) + omega(x) h(x + 1)` on `[g, d]` with
/// `h(g - 1) = 1`, `h(d + 1) = 0` and returns `h(0)`.
pub fn hitting_probability_oracle(env: &mut Environment, g: i64, d: i64) -> Result<f64> {
    assert!(g <= 0 && 0 <= d, "cluster must contain the origin");
    let width = (d - g) as usize;
    if width > ORACLE_MAX_WIDTH {
        return Err(Error::IntervalTooLarge {
            width,
            limit: ORACLE_MAX_WIDTH,
        });
    }
    let m = width + 1;
    let omega: Vec<f64> = (g..=d).map(|x| env.omega(x)).collect();

    // Thomas algorithm on sub = -(1 - omega), diag = 1, sup = -omega, with
    // the eliminated superdiagonal kept as s = omega / pivot and its
    // complement t = 1 - s carried separately. Every pivot
    // 1 - (1 - omega) s_prev = omega + (1 - omega) t_prev is then a sum of
    // positive terms, so deep traps do not cancel digits away.
    let mut s = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let (mut t_prev, mut rhs_prev) = (1.0, 0.0);
    for i in 0..m {
        let (w, q) = (omega[i], 1.0 - omega[i]);
        let pivot = w + q * t_prev;
        // the h(g - 1) = 1 boundary enters as q * 1 on the first row
        let r = if i == 0 { q } else { q * rhs_prev };
        s[i] = w / pivot;
        rhs[i] = r / pivot;
        t_prev = q * t_prev / pivot;
        rhs_prev = rhs[i];
    }
    let mut h = vec![0.0; m];
    h[m - 1] = rhs[m - 1];
    for i in (0..m - 1).rev() {
        h[i] = rhs[i] + s[i] * h[i + 1];
    }
    Ok(h[(-g) as usize])
}

/// Runs a walk from 0 until it leaves `[g, d]`, with `omega` restricted to
/// the interval (`omega[0]` is `omega(g)`).
fn walk_exit(omega: &[f64], g: i64, rng: &mut ChaCha8Rng, step_cap: u64) -> Result<ExitSide> {
    let last = omega.len() as i64 - 1;
    let mut x = -g;
    for _ in 0..step_cap {
        let u: f64 = rng.random();
        x += if u < omega[x as usize] { 1 } else { -1 };
        if x < 0 {
            return Ok(ExitSide::Left);
        }
        if x > last {
            return Ok(ExitSide::Right);
        }
    }
    Err(Error::Capped { cap: step_cap })
}

fn interval_omega(env: &mut Environment, g: i64, d: i64) -> Vec<f64> {
    (g..=d).map(|x| env.omega(x)).collect()
}

/// Simulates one walk step by step until it leaves `[g, d]`.
///
/// Returns [`Error::Capped`] when `step_cap` steps were not enough.
pub fn step_walk_exit(
    env: &mut Environment,
    g: i64,
    d: i64,
    run_seed: u64,
    step_cap: u64,
) -> Result<ExitSide> {
    assert!(g <= 0 && 0 <= d, "cluster must contain the origin");
    let omega = interval_omega(env, g, d);
    let mut rng = seed::stream_rng(run_seed, seed::label::ORACLE_RUN);
    walk_exit(&omega, g, &mut rng, step_cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClusterPoint {
    pub n: u64,
    pub g: i64,
    pub d: i64,
}

impl ClusterPoint {
    pub fn d_over_n(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.d as f64 / self.n as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterTrajectory {
    pub env_seed: u64,
    pub run_seed: u64,
    pub points: Vec<ClusterPoint>,
}

impl ClusterTrajectory {
    pub fn last(&self) -> ClusterPoint {
        *self
            .points
            .last()
            .expect("trajectory has at least one point")
    }
}

fn normalized_checkpoints(n: u64, checkpoints: &[u64]) -> Vec<u64> {
    let mut cps: Vec<u64> = checkpoints.iter().copied().filter(|&c| c <= n).collect();
    cps.sort_unstable();
    cps.dedup();
    if cps.is_empty() {
        cps.push(n);
    }
    cps
}

/// Grows `A(n)` with the exact exit-side sampler, recording `(n, g_n, d_n)`
/// at each checkpoint `<= n` (or only at `n` if none are given).
pub fn grow_cluster(
    env: &mut Environment,
    n: u64,
    run_seed: u64,
    checkpoints: &[u64],
) -> ClusterTrajectory {
    let cps = normalized_checkpoints(n, checkpoints);
    let mut rng = seed::stream_rng(run_seed, seed::label::RUN);
    let mut cluster = Cluster::new(env);
    let mut points = Vec::with_capacity(cps.len());
    let mut next = cps.iter().peekable();
    for step in 0..=n {
        while next.peek().is_some_and(|&&c| c == step) {
            points.push(ClusterPoint {
                n: step,
                g: cluster.left_edge(),
                d: cluster.right_edge(),
            });
            next.next();
        }
        if step == n {
            break;
        }
        let u: f64 = rng.random();
        let side = if u < cluster.exit_left_probability() {
            ExitSide::Left
        } else {
            ExitSide::Right
        };
        cluster.add(env, side);
    }
    ClusterTrajectory {
        env_seed: env.master_seed(),
        run_seed,
        points,
    }
}

/// Grows `A(n)` by simulating every particle's walk. Fails with
/// [`Error::Capped`] as soon as one walk exceeds `step_cap`.
pub fn grow_cluster_oracle(
    env: &mut Environment,
    n: u64,
    run_seed: u64,
    step_cap: u64,
) -> Result<ClusterTrajectory> {
    let mut rng = seed::stream_rng(run_seed, seed::label::ORACLE_RUN);
    let (mut g, mut d) = (0i64, 0i64);
    for _ in 0..n {
        let omega = interval_omega(env, g, d);
        match walk_exit(&omega, g, &mut rng, step_cap)? {
            ExitSide::Left => g -= 1,
            ExitSide::Right => d += 1,
        }
    }
    Ok(ClusterTrajectory {
        env_seed: env.master_seed(),
        run_seed,
        points: vec![ClusterPoint { n, g, d }],
    })
}
