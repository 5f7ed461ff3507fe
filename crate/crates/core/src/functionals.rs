//! Path functionals locating the theoretical cluster edge.
//!
//! For a two-sided path `v` with `v(0) = 0`:
//!
//! * `T_y^+` is the first time `t >= 0` with `v(t) >= y`, `T_y^-` the same
//!   to the left of the origin (reported as a positive distance);
//! * `ybar` is the largest level `y >= 0` with `T_y^+ + T_y^- <= 1`;
//! * `alpha` is the length of the excursion of `v` below `v(T^+)` that
//!   starts at `T^+ = T_ybar^+`, `beta` its counterpart left of `-T^-`;
//! * `d* = T^+ + 1{alpha > beta} (1 - T^+ - T^-)`.
//!
//! Everything is computed in integer grid indices and converted to time
//! units (`index / steps_per_unit`) only when reported.
//!
//! Discrete conventions: `T_y` is the first index attaining `v >= y`; the
//! excursion scan starts one grid step after `T` (a zero-length excursion
//! would otherwise always qualify); level ties between the two sides are
//! merged right side first; `alpha == beta` gives `d* = T^+`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::{Side, TwoSidedPath};

/// Excursion scans stop at `DEFAULT_WINDOW_CAP_UNITS * steps_per_unit`.
pub const DEFAULT_WINDOW_CAP_UNITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Record {
    /// Path value (stored units) of the new running maximum.
    pub level: f64,
    /// Grid index at which it is first attained.
    pub index: usize,
}

/// Strict running maxima of one side of a path, scanned outward from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSequence {
    pub side: Side,
    pub steps_per_unit: usize,
    pub records: Vec<Record>,
    /// Largest index that was scanned.
    pub scanned_to: usize,
}

impl RecordSequence {
    /// Index of the first point with value `>= y`, if within the scan.
    pub fn first_reaching(&self, y: f64) -> Option<usize> {
        let k = self.records.partition_point(|r| r.level < y);
        self.records.get(k).map(|r| r.index)
    }

    /// `(level, time)` pairs.
    pub fn in_time_units(&self) -> Vec<(f64, f64)> {
        let n = self.steps_per_unit as f64;
        self.records
            .iter()
            .map(|r| (r.level, r.index as f64 / n))
            .collect()
    }
}

/// Scans indices `0..=max_index` on `side`, emitting each new running maximum.
pub fn ascending_records<P: TwoSidedPath + ?Sized>(
    path: &mut P,
    side: Side,
    max_index: usize,
) -> Result<RecordSequence> {
    let available = path.extend_to(side, max_index);
    if available < max_index {
        return Err(Error::WindowCap { cap: available });
    }
    let values = &path.side(side)[..=max_index];
    let mut records = vec![Record {
        level: values[0],
        index: 0,
    }];
    let mut best = values[0];
    for (index, &v) in values.iter().enumerate().skip(1) {
        if v > best {
            best = v;
            records.push(Record { level: v, index });
        }
    }
    Ok(RecordSequence {
        side,
        steps_per_unit: path.steps_per_unit(),
        records,
        scanned_to: max_index,
    })
}

/// `ybar` and the hitting indices at that level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalLevel {
    /// `ybar` in stored units.
    pub level: f64,
    pub plus_index: usize,
    pub minus_index: usize,
    pub steps_per_unit: usize,
}

impl CriticalLevel {
    pub fn t_plus(&self) -> f64 {
        self.plus_index as f64 / self.steps_per_unit as f64
    }

    pub fn t_minus(&self) -> f64 {
        self.minus_index as f64 / self.steps_per_unit as f64
    }
}

/// Merges right and left records by increasing level and returns the last
/// level whose hitting indices sum to at most `steps_per_unit`.
pub fn merge_critical_level(right: &RecordSequence, left: &RecordSequence) -> CriticalLevel {
    let n = right.steps_per_unit;
    debug_assert_eq!(n, left.steps_per_unit);
    let (r, l) = (&right.records, &left.records);
    // Level 0 is always admissible: both sides start at v(0) = 0.
    let mut best = CriticalLevel {
        level: r[0].level,
        plus_index: 0,
        minus_index: 0,
        steps_per_unit: n,
    };
    let (mut ri, mut li) = (0usize, 0usize);
    let (mut next_r, mut next_l) = (0usize, 0usize);
    loop {
        // next candidate level, right side first on ties
        let y = match (r.get(next_r), l.get(next_l)) {
            (Some(a), Some(b)) if a.level <= b.level => {
                next_r += 1;
                a.level
            }
            (Some(_), Some(b)) => {
                next_l += 1;
                b.level
            }
            (Some(a), None) => {
                next_r += 1;
                a.level
            }
            (None, Some(b)) => {
                next_l += 1;
                b.level
            }
            (None, None) => break,
        };
        while ri < r.len() && r[ri].level < y {
            ri += 1;
        }
        while li < l.len() && l[li].level < y {
            li += 1;
        }
        // No record at or above y within [0, n] means a hitting index beyond n.
        if ri == r.len() || li == l.len() || r[ri].index + l[li].index > n {
            break;
        }
        best = CriticalLevel {
            level: y,
            plus_index: r[ri].index,
            minus_index: l[li].index,
            steps_per_unit: n,
        };
    }
    best
}

/// Computes `ybar`, `T^+` and `T^-` from the records within `[-n, n]`.
pub fn critical_level<P: TwoSidedPath + ?Sized>(path: &mut P) -> Result<CriticalLevel> {
    let n = path.steps_per_unit();
    let right = ascending_records(path, Side::Right, n)?;
    let left = ascending_records(path, Side::Left, n)?;
    Ok(merge_critical_level(&right, &left))
}

/// Length of one excursion below the value at its starting index, in grid steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Excursion {
    /// Exact return step if `exact`, otherwise the number of steps scanned
    /// without a return (the true length is larger).
    pub steps: usize,
    pub exact: bool,
}

impl Excursion {
    /// `Some(true)` if certainly longer than `other`, `Some(false)` if
    /// certainly not, `None` if undecided.
    pub fn longer_than(&self, other: &Excursion) -> Option<bool> {
        match (self.exact, other.exact) {
            (true, true) => Some(self.steps > other.steps),
            (true, false) => (self.steps <= other.steps).then_some(false),
            (false, true) => (other.steps <= self.steps).then_some(true),
            (false, false) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Excursions {
    pub alpha: Excursion,
    pub beta: Excursion,
}

impl Excursions {
    /// `1{alpha > beta}` when decidable.
    pub fn alpha_longer(&self) -> Option<bool> {
        self.alpha.longer_than(&self.beta)
    }
}

/// How far to follow the longer excursion once the shorter one has returned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Resolve {
    /// Stop immediately: the longer one is only known to exceed the shorter
    /// one, which is all `d*` needs.
    Order,
    /// Keep scanning until this many time units past the start.
    Within(f64),
    /// Keep scanning up to the window cap.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalOptions {
    /// Scans never read beyond `window_cap_units * steps_per_unit` from the origin.
    pub window_cap_units: usize,
    pub resolve: Resolve,
}

impl Default for FunctionalOptions {
    fn default() -> Self {
        Self {
            window_cap_units: DEFAULT_WINDOW_CAP_UNITS,
            resolve: Resolve::Full,
        }
    }
}

struct Scan {
    side: Side,
    start: usize,
    level: f64,
    available: usize,
    limit: usize,
    result: Option<Excursion>,
}

impl Scan {
    fn new<P: TwoSidedPath + ?Sized>(path: &mut P, side: Side, start: usize, limit: usize) -> Self {
        let available = path.extend_to(side, start);
        let level = path.side(side)[start];
        Scan {
            side,
            start,
            level,
            available,
            limit,
            result: None,
        }
    }

    /// Checks step `k`; returns true once the scan has terminated.
    fn step<P: TwoSidedPath + ?Sized>(&mut self, path: &mut P, k: usize) -> bool {
        if self.result.is_some() {
            return true;
        }
        let idx = self.start + k;
        if idx > self.available {
            let want = idx.max(2 * self.available).min(self.limit);
            if want >= idx {
                self.available = path.extend_to(self.side, want);
            }
            if idx > self.available {
                self.result = Some(Excursion {
                    steps: k - 1,
                    exact: false,
                });
                return true;
            }
        }
        if path.side(self.side)[idx] >= self.level {
            self.result = Some(Excursion {
                steps: k,
                exact: true,
            });
            return true;
        }
        false
    }
}

/// Scans outward from `T^+` and `-T^-` in lockstep for the first return to
/// the starting value.
pub fn excursion_lengths<P: TwoSidedPath + ?Sized>(
    path: &mut P,
    level: &CriticalLevel,
    options: &FunctionalOptions,
) -> Excursions {
    let n = path.steps_per_unit();
    let limit = options.window_cap_units * n;
    let horizon = match options.resolve {
        Resolve::Order => 0,
        Resolve::Within(units) => (units.max(0.0) * n as f64).ceil() as usize,
        Resolve::Full => usize::MAX,
    };
    let mut right = Scan::new(path, Side::Right, level.plus_index, limit);
    let mut left = Scan::new(path, Side::Left, level.minus_index, limit);
    let mut k = 0usize;
    loop {
        k += 1;
        let r_done = right.step(path, k);
        let l_done = left.step(path, k);
        if r_done && l_done {
            break;
        }
        if (r_done || l_done) && k >= horizon {
            break;
        }
    }
    // a scan still running has checked k steps without a return
    let pending = Excursion {
        steps: k,
        exact: false,
    };
    Excursions {
        alpha: right.result.unwrap_or(pending),
        beta: left.result.unwrap_or(pending),
    }
}

/// Flags for the four good events at scale `n` and tolerance `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GoodEvents {
    pub b_plus: bool,
    pub b_minus: bool,
    pub c_plus: bool,
    pub c_minus: bool,
}

impl GoodEvents {
    /// `(B+ and C+) or (B- and C-)`.
    pub fn localizing(&self) -> bool {
        (self.b_plus && self.c_plus) || (self.b_minus && self.c_minus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalReport {
    /// `ybar` in reported units.
    pub ybar: f64,
    pub t_plus: f64,
    pub t_minus: f64,
    /// Excursion lengths in time units; lower bounds unless `*_exact`.
    pub alpha: f64,
    pub beta: f64,
    pub alpha_exact: bool,
    pub beta_exact: bool,
    /// Meaningful only when `resolved`.
    pub dstar: f64,
    pub gstar: f64,
    /// Whether the order of `alpha` and `beta`, hence `d*`, is determined.
    pub resolved: bool,
    pub critical: CriticalLevel,
    pub excursions: Excursions,
}

impl FunctionalReport {
    pub fn steps_per_unit(&self) -> usize {
        self.critical.steps_per_unit
    }
}

/// Full functional report for one path.
pub fn theoretical_position<P: TwoSidedPath + ?Sized>(
    path: &mut P,
    options: &FunctionalOptions,
) -> Result<FunctionalReport> {
    let critical = critical_level(path)?;
    let excursions = excursion_lengths(path, &critical, options);
    let n = critical.steps_per_unit;
    let nf = n as f64;
    let indicator = excursions.alpha_longer();
    let dstar_index = critical.plus_index
        + if indicator == Some(true) {
            n - critical.plus_index - critical.minus_index
        } else {
            0
        };
    let dstar = dstar_index as f64 / nf;
    Ok(FunctionalReport {
        ybar: critical.level * path.value_scale(),
        t_plus: critical.t_plus(),
        t_minus: critical.t_minus(),
        alpha: excursions.alpha.steps as f64 / nf,
        beta: excursions.beta.steps as f64 / nf,
        alpha_exact: excursions.alpha.exact,
        beta_exact: excursions.beta.exact,
        dstar,
        gstar: dstar - 1.0,
        resolved: indicator.is_some(),
        critical,
        excursions,
    })
}

/// Maximum of `side` over indices `lo..=hi`, or `-inf` when the range is empty.
fn side_max<P: TwoSidedPath + ?Sized>(path: &mut P, side: Side, lo: i64, hi: i64) -> f64 {
    if hi < lo {
        return f64::NEG_INFINITY;
    }
    let (lo, hi) = (lo.max(0) as usize, hi.max(0) as usize);
    let available = path.extend_to(side, hi);
    let hi = hi.min(available);
    path.side(side)[lo..=hi]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Evaluates `B^{eps,+-}` and `C^{eps,+-}` at scale `n = steps_per_unit`.
///
/// The barrier margin is `n^{1/3} / sqrt(n)` in reported units. A supremum
/// of `t -> v(floor(n t))` over `[a, b]` is the maximum over grid indices
/// `floor(n a)..=floor(n b)`.
pub fn good_event_flags<P: TwoSidedPath + ?Sized>(
    path: &mut P,
    report: &FunctionalReport,
    eps: f64,
) -> GoodEvents {
    let n = report.steps_per_unit();
    let nf = n as f64;
    let margin = nf.cbrt() / nf.sqrt() / path.value_scale();
    let level = report.critical.level;
    let p = report.critical.plus_index as i64;
    let q = report.critical.minus_index as i64;
    let eps_floor = (eps * nf).floor() as i64;
    let eps_ceil = (eps * nf).ceil() as i64;
    let alpha = report.excursions.alpha;
    let beta = report.excursions.beta;
    let shorter_than_eps = |e: Excursion| e.exact && (e.steps as f64) < eps * nf;

    // sup over [-T^- - beta - eps, -T^- - beta]
    let b_plus = shorter_than_eps(beta) && {
        let start = q + beta.steps as i64;
        side_max(path, Side::Left, start, start + eps_ceil) >= level + margin
    };
    // sup over [T^+ + alpha, T^+ + alpha + eps]
    let b_minus = shorter_than_eps(alpha) && {
        let start = p + alpha.steps as i64;
        side_max(path, Side::Right, start, start + eps_floor) >= level + margin
    };
    // sup over [-T^- + eps, 0]: empty when T^- < eps
    let c_plus =
        eps * nf > q as f64 || side_max(path, Side::Left, 0, q - eps_floor) <= level - margin;
    // sup over [0, T^+ - eps]
    let c_minus = side_max(path, Side::Right, 0, p - eps_ceil) <= level - margin;
    GoodEvents {
        b_plus,
        b_minus,
        c_plus,
        c_minus,
    }
}
