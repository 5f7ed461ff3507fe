//! Random environments and their potential.
//!
//! An environment assigns to every site `i` the probability `omega(i)` of a
//! step to the right. With `rho(i) = (1 - omega(i)) / omega(i)` the potential
//! is `V(0) = 0`, `V(i) = sum_{k=1}^{i} log rho(k)` for `i >= 1` and
//! `V(i) = -sum_{k=i+1}^{0} log rho(k)` for `i <= -1`.
//!
//! Sites are generated lazily. The right side (`i >= 1`) and the left side
//! (`i <= 0`) each draw from their own deterministic stream, consumed in site
//! order, so the realized environment does not depend on how or when the
//! windows were extended.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::{Side, TwoSidedPath};
use crate::seed;

const LEFT_STREAM: u64 = 0;
const RIGHT_STREAM: u64 = 1;
const MIN_GROWTH: usize = 64;

/// Law `mu` of a single `omega(i)`. Every constructible law has
/// `E[log rho] = 0` by the symmetry `rho <-> 1/rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum EnvironmentLaw {
    /// `omega` uniform on `(delta, 1 - delta)`.
    UniformTruncated { delta: f64 },
    /// `omega` is `p` or `1 - p` with probability 1/2 each.
    TwoPoint { p: f64 },
}

impl EnvironmentLaw {
    pub fn uniform(delta: f64) -> Result<Self> {
        let law = EnvironmentLaw::UniformTruncated { delta };
        law.validate()?;
        Ok(law)
    }

    pub fn two_point(p: f64) -> Result<Self> {
        let law = EnvironmentLaw::TwoPoint { p };
        law.validate()?;
        Ok(law)
    }

    /// The degenerate law `omega == 1/2`, whose potential is identically zero.
    pub fn flat() -> Self {
        EnvironmentLaw::TwoPoint { p: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EnvironmentLaw::UniformTruncated { delta } => {
                if !(0.0..0.5).contains(&delta) {
                    return Err(Error::InvalidLaw(format!(
                        "uniform truncation delta must lie in [0, 0.5), got {delta}"
                    )));
                }
            }
            EnvironmentLaw::TwoPoint { p } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidLaw(format!(
                        "two-point parameter p must lie in (0, 1), got {p}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn description(&self) -> String {
        self.to_string()
    }

    /// `E[(log rho)^2]`, when known in closed form.
    pub fn log_rho_second_moment(&self) -> Option<f64> {
        match *self {
            EnvironmentLaw::UniformTruncated { delta: 0.0 } => {
                Some(std::f64::consts::PI.powi(2) / 3.0)
            }
            EnvironmentLaw::UniformTruncated { .. } => None,
            EnvironmentLaw::TwoPoint { p } => Some(((1.0 - p) / p).ln().powi(2)),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            EnvironmentLaw::UniformTruncated { delta } => {
                let u: f64 = Open01.sample(rng);
                delta + (1.0 - 2.0 * delta) * u
            }
            EnvironmentLaw::TwoPoint { p } => {
                if rng.random::<bool>() {
                    p
                } else {
                    1.0 - p
                }
            }
        }
    }

    /// `log((1 - omega) / omega)`. For the two-point law the two values are
    /// exact negatives of each other so that potentials telescope exactly.
    fn log_rho(&self, omega: f64) -> f64 {
        match *self {
            EnvironmentLaw::TwoPoint { p } => {
                let up = ((1.0 - p) / p).ln();
                if omega == p {
                    up
                } else {
                    -up
                }
            }
            EnvironmentLaw::UniformTruncated { .. } => ((1.0 - omega) / omega).ln(),
        }
    }
}

impl fmt::Display for EnvironmentLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvironmentLaw::UniformTruncated { delta } => write!(f, "uniform(delta={delta})"),
            EnvironmentLaw::TwoPoint { p } => write!(f, "two_point(p={p})"),
        }
    }
}

#[derive(Debug, Clone)]
struct Window {
    rng: ChaCha8Rng,
    /// `omega` at distance `k + 1` (right) or `k` (left) from the origin.
    omega: Vec<f64>,
    /// `V` at distance `k` from the origin; `potential[0] == 0`.
    potential: Vec<f64>,
}

impl Window {
    fn new(master_seed: u64, stream: u64) -> Self {
        Self {
            rng: seed::stream_rng(master_seed, stream),
            omega: Vec::new(),
            potential: vec![0.0],
        }
    }
}

/// A lazily extended two-sided environment.
#[derive(Debug, Clone)]
pub struct Environment {
    law: EnvironmentLaw,
    master_seed: u64,
    right: Window,
    left: Window,
}

impl Environment {
    pub fn law(&self) -> EnvironmentLaw {
        self.law
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Ensures `V` is materialized on `side` for distances `0..=len`.
    pub fn extend(&mut self, side: Side, len: usize) {
        let law = self.law;
        let window = match side {
            Side::Right => &mut self.right,
            Side::Left => &mut self.left,
        };
        if window.potential.len() > len {
            return;
        }
        let target = (len + 1).max(2 * window.potential.len()).max(MIN_GROWTH);
        window.omega.reserve(target - 1 - window.omega.len());
        window.potential.reserve(target - window.potential.len());
        while window.potential.len() < target {
            let omega = law.sample(&mut window.rng);
            let step = law.log_rho(omega);
            let last = *window.potential.last().unwrap();
            window.omega.push(omega);
            window.potential.push(match side {
                Side::Right => last + step,
                Side::Left => last - step,
            });
        }
    }

    fn locate(i: i64) -> (Side, usize) {
        if i >= 0 {
            (Side::Right, i as usize)
        } else {
            (Side::Left, i.unsigned_abs() as usize)
        }
    }

    /// `omega(i)`, the probability of stepping from `i` to `i + 1`.
    pub fn omega(&mut self, i: i64) -> f64 {
        if i >= 1 {
            let k = i as usize;
            self.extend(Side::Right, k);
            self.right.omega[k - 1]
        } else {
            let k = i.unsigned_abs() as usize;
            self.extend(Side::Left, k + 1);
            self.left.omega[k]
        }
    }

    /// `log rho(i)`.
    pub fn log_rho(&mut self, i: i64) -> f64 {
        let omega = self.omega(i);
        self.law.log_rho(omega)
    }

    /// `rho(i) = (1 - omega(i)) / omega(i)`.
    pub fn rho(&mut self, i: i64) -> f64 {
        let omega = self.omega(i);
        (1.0 - omega) / omega
    }

    /// The potential `V(i)`.
    #[inline]
    pub fn potential(&mut self, i: i64) -> f64 {
        let (side, k) = Self::locate(i);
        self.extend(side, k);
        self.potential_side(side)[k]
    }

    /// `V(floor(n t)) / sqrt(n)`.
    pub fn renormalized_potential(&mut self, n: usize, t: f64) -> f64 {
        assert!(n >= 1, "scale must be positive");
        let i = (n as f64 * t).floor() as i64;
        self.potential(i) / (n as f64).sqrt()
    }

    /// Materialized potential at distances `0, 1, 2, ...` on `side`.
    pub fn potential_side(&self, side: Side) -> &[f64] {
        match side {
            Side::Right => &self.right.potential,
            Side::Left => &self.left.potential,
        }
    }

    /// View of the potential at scale `n`, i.e. of `V^(n)`.
    pub fn at_scale(&mut self, n: usize) -> PotentialPath<'_> {
        assert!(n >= 1, "scale must be positive");
        PotentialPath { env: self, n }
    }
}

/// Creates an environment with empty windows.
pub fn make_environment(law: EnvironmentLaw, master_seed: u64) -> Result<Environment> {
    law.validate()?;
    Ok(Environment {
        law,
        master_seed,
        right: Window::new(master_seed, RIGHT_STREAM),
        left: Window::new(master_seed, LEFT_STREAM),
    })
}

/// The renormalized potential `t -> V(floor(n t)) / sqrt(n)` as a grid path
/// with `n` points per unit time. Values are stored in raw log units.
#[derive(Debug)]
pub struct PotentialPath<'a> {
    env: &'a mut Environment,
    n: usize,
}

impl PotentialPath<'_> {
    pub fn scale(&self) -> usize {
        self.n
    }
}

impl TwoSidedPath for PotentialPath<'_> {
    fn steps_per_unit(&self) -> usize {
        self.n
    }

    fn value_scale(&self) -> f64 {
        1.0 / (self.n as f64).sqrt()
    }

    fn extend_to(&mut self, side: Side, len: usize) -> usize {
        self.env.extend(side, len);
        len
    }

    fn side(&self, side: Side) -> &[f64] {
        self.env.potential_side(side)
    }
}
