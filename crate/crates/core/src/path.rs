//! Two-sided discrete paths on an integer grid.
//!
//! Index `k` on [`Side::Right`] is the grid point `k`, on [`Side::Left`] it is
//! `-k`; both sides share the value at the origin. Time is `k / steps_per_unit`.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Right,
    Left,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Right => Side::Left,
            Side::Left => Side::Right,
        }
    }
}

/// A path that can be read outward from the origin on both sides and,
/// for lazily generated sources, extended on demand.
pub trait TwoSidedPath {
    /// Grid points per unit of time (`n` for a potential at scale `n`).
    fn steps_per_unit(&self) -> usize;

    /// Multiplier taking stored values to reported units (`1/sqrt(n)` for
    /// potentials, 1 for Brownian paths).
    fn value_scale(&self) -> f64 {
        1.0
    }

    /// Makes indices `0..=len` available on `side` if the source allows it.
    /// Returns the largest index now available.
    fn extend_to(&mut self, side: Side, len: usize) -> usize;

    /// Currently materialized values on `side`, starting at the origin.
    fn side(&self, side: Side) -> &[f64];
}

/// A fixed, fully materialized path. Used for synthetic inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    right: Vec<f64>,
    left: Vec<f64>,
    steps_per_unit: usize,
    value_scale: f64,
}

impl SampledPath {
    /// `right[0]` and `left[0]` are both the value at the origin and must agree.
    pub fn new(right: Vec<f64>, left: Vec<f64>, steps_per_unit: usize) -> Self {
        assert!(
            !right.is_empty() && !left.is_empty(),
            "both sides need the origin"
        );
        assert_eq!(right[0], left[0], "sides disagree at the origin");
        assert!(steps_per_unit > 0);
        Self {
            right,
            left,
            steps_per_unit,
            value_scale: 1.0,
        }
    }

    pub fn with_value_scale(mut self, scale: f64) -> Self {
        self.value_scale = scale;
        self
    }

    /// Builds from values at signed indices `-(left_len)..=right_len`, given
    /// in increasing index order.
    pub fn from_signed(values: &[f64], origin: usize, steps_per_unit: usize) -> Self {
        let right = values[origin..].to_vec();
        let left = values[..=origin].iter().rev().copied().collect();
        Self::new(right, left, steps_per_unit)
    }
}

impl TwoSidedPath for SampledPath {
    fn steps_per_unit(&self) -> usize {
        self.steps_per_unit
    }

    fn value_scale(&self) -> f64 {
        self.value_scale
    }

    fn extend_to(&mut self, side: Side, len: usize) -> usize {
        len.min(self.side(side).len() - 1)
    }

    fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Right => &self.right,
            Side::Left => &self.left,
        }
    }
}
