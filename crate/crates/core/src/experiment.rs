//! End-to-end experiments: replication, seeding and output assembly.
//!
//! Replica `r` of a run seeded by `seed` draws its environment from
//! `derive(seed, r, ENVIRONMENT)` and its walks from `derive(seed, r, RUN)`,
//! so results depend on neither the worker count nor the number of replicas
//! requested. Replicas are mapped in parallel and collected in index order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::brownian::{self, BrownianPath};
use crate::env::{make_environment, Environment, EnvironmentLaw};
use crate::error::{Error, Result};
use crate::functionals::{
    good_event_flags, theoretical_position, FunctionalOptions, FunctionalReport, GoodEvents,
    Resolve,
};
use crate::idla::{grow_cluster, grow_cluster_oracle, DEFAULT_STEP_CAP};
use crate::path::Side;
use crate::seed::{self, label};
use crate::stats::{
    attach_pairwise, half_normal_cdf, ks_statistic, tv_distance_discrete, MomentCheck, PoolReport,
    SamplePool,
};

/// Checkpoints below this size are ignored when reporting the extremes of
/// `d_n / n` along a quenched trajectory; tiny clusters hit 0 and 1 trivially.
pub const EXPLORE_MIN_N: u64 = 1 << 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub law: EnvironmentLaw,
    pub n: Vec<u64>,
    pub replicas: usize,
    pub seed: u64,
    pub eps: f64,
    pub resolution: usize,
    pub checkpoints: Vec<u64>,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(law: EnvironmentLaw, n: Vec<u64>, replicas: usize, seed: u64) -> Self {
        Self {
            law,
            n,
            replicas,
            seed,
            eps: 0.05,
            resolution: brownian::DEFAULT_RESOLUTION,
            checkpoints: Vec::new(),
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.law.validate()?;
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(Error::InvalidArgument(
                "n must be a nonempty list of positive sizes".into(),
            ));
        }
        if self.replicas == 0 {
            return Err(Error::InvalidArgument("replicas must be positive".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "eps = {} is not in (0, 1)",
                self.eps
            )));
        }
        if self.resolution < 2 {
            return Err(Error::InvalidArgument(
                "resolution must be at least 2".into(),
            ));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be positive".into()));
        }
        Ok(())
    }

    fn max_n(&self) -> u64 {
        *self.n.iter().max().expect("validated")
    }

    fn single_n(&self, op: &str) -> Result<u64> {
        match self.n[..] {
            [n] => Ok(n),
            _ => Err(Error::InvalidArgument(format!("{op} takes a single n"))),
        }
    }
}

/// Parses a law from its command-line name and parameters.
pub fn parse_law(name: &str, p: Option<f64>, delta: Option<f64>) -> Result<EnvironmentLaw> {
    match name {
        "uniform" => EnvironmentLaw::uniform(delta.unwrap_or(0.0)),
        "two-point" | "two_point" => match p {
            Some(p) => EnvironmentLaw::two_point(p),
            None => Err(Error::InvalidLaw("two-point law needs --p".into())),
        },
        "flat" => Ok(EnvironmentLaw::flat()),
        other => Err(Error::InvalidLaw(format!(
            "unknown law `{other}` (expected uniform, two-point or flat)"
        ))),
    }
}

/// Sample-level CSV plus a JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub csv: String,
    pub report: Value,
}

fn to_csv<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("reports serialize")
}

/// Maps `f` over replica indices `0..count` on `workers` threads, in order.
pub fn replicate<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..count as u64).into_par_iter().map(f).collect()))
}

fn environment(law: EnvironmentLaw, seed: u64, replica: u64) -> Environment {
    make_environment(law, seed::derive(seed, replica, label::ENVIRONMENT)).expect("validated law")
}

fn fraction(count: usize, total: usize) -> f64 {
    if total == 0 {
        f64::NAN
    } else {
        count as f64 / total as f64
    }
}

#[derive(Serialize)]
struct SimulateRow {
    replica: u64,
    n: u64,
    g_n: i64,
    d_n: i64,
    d_over_n: f64,
}

/// Annealed cluster growth: a fresh environment per replica, `d_n / n`
/// recorded at every size in `n` and every checkpoint.
pub fn run_simulate(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let n_max = cfg.max_n();
    let mut sizes: Vec<u64> = cfg
        .n
        .iter()
        .chain(&cfg.checkpoints)
        .copied()
        .filter(|&c| c >= 1 && c <= n_max)
        .collect();
    sizes.sort_unstable();
    sizes.dedup();

    let runs = replicate(cfg.workers, cfg.replicas, |r| {
        let mut env = environment(cfg.law, cfg.seed, r);
        grow_cluster(
            &mut env,
            n_max,
            seed::derive(cfg.seed, r, label::RUN),
            &sizes,
        )
    })?;

    let mut rows = Vec::with_capacity(runs.len() * sizes.len());
    let mut by_size: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for (r, run) in runs.iter().enumerate() {
        for p in &run.points {
            rows.push(SimulateRow {
                replica: r as u64,
                n: p.n,
                g_n: p.g,
                d_n: p.d,
                d_over_n: p.d_over_n(),
            });
            by_size.entry(p.n).or_default().push(p.d_over_n());
        }
    }
    let pools: Vec<SamplePool> = by_size
        .into_iter()
        .map(|(n, values)| SamplePool::new(format!("d_over_n@{n}"), values))
        .collect();
    let mut reports = pools
        .iter()
        .map(PoolReport::arcsine)
        .collect::<Result<Vec<_>>>()?;
    attach_pairwise(&mut reports, &pools)?;
    Ok(Output {
        csv: to_csv(&rows)?,
        report: json!({
            "law": cfg.law,
            "seed": cfg.seed,
            "replicas": cfg.replicas,
            "pools": reports,
        }),
    })
}

/// What to compute for each environment of a quenched batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchedPlan {
    pub n: u64,
    /// Grow the cluster to `n` and report `d_n / n`.
    pub grow: bool,
    /// Evaluate the good events at this tolerance.
    pub good_events_eps: Option<f64>,
    pub resolve: Resolve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchedRow {
    pub replica: u64,
    pub d_over_n: Option<f64>,
    pub functionals: FunctionalReport,
    pub good_events: Option<GoodEvents>,
}

/// Cluster and potential functionals at scale `plan.n` on the environments
/// of replicas `0..replicas`.
pub fn quenched_batch(
    law: EnvironmentLaw,
    seed: u64,
    replicas: usize,
    workers: usize,
    plan: QuenchedPlan,
) -> Result<Vec<QuenchedRow>> {
    let options = FunctionalOptions {
        resolve: plan.resolve,
        ..Default::default()
    };
    replicate(workers, replicas, |r| -> Result<QuenchedRow> {
        let mut env = environment(law, seed, r);
        let d_over_n = plan.grow.then(|| {
            grow_cluster(&mut env, plan.n, seed::derive(seed, r, label::RUN), &[])
                .last()
                .d_over_n()
        });
        let mut path = env.at_scale(plan.n as usize);
        let functionals = theoretical_position(&mut path, &options)?;
        let good_events = plan
            .good_events_eps
            .map(|eps| good_event_flags(&mut path, &functionals, eps));
        Ok(QuenchedRow {
            replica: r,
            d_over_n,
            functionals,
            good_events,
        })
    })?
    .into_iter()
    .collect()
}

#[derive(Serialize)]
struct LocalizationRow {
    n: u64,
    replica: u64,
    d_over_n: f64,
    dstar: f64,
    resolved: bool,
    exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationSummary {
    pub n: u64,
    pub eps: f64,
    pub replicas: usize,
    pub unresolved: usize,
    pub exceedances: usize,
    /// Among resolved replicas.
    pub exceedance_fraction: f64,
}

pub fn localization_summary(n: u64, eps: f64, rows: &[QuenchedRow]) -> LocalizationSummary {
    let resolved: Vec<&QuenchedRow> = rows.iter().filter(|r| r.functionals.resolved).collect();
    let exceedances = resolved
        .iter()
        .filter(|r| (r.d_over_n.expect("grown") - r.functionals.dstar).abs() > eps)
        .count();
    LocalizationSummary {
        n,
        eps,
        replicas: rows.len(),
        unresolved: rows.len() - resolved.len(),
        exceedances,
        exceedance_fraction: fraction(exceedances, resolved.len()),
    }
}

/// Quenched localization: `|d_n / n - d*_n| > eps` on the same environment.
pub fn run_localization(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &n in &cfg.n {
        let plan = QuenchedPlan {
            n,
            grow: true,
            good_events_eps: None,
            resolve: Resolve::Order,
        };
        let batch = quenched_batch(cfg.law, cfg.seed, cfg.replicas, cfg.workers, plan)?;
        summaries.push(localization_summary(n, cfg.eps, &batch));
        rows.extend(batch.iter().map(|q| {
            let d = q.d_over_n.expect("grown");
            LocalizationRow {
                n,
                replica: q.replica,
                d_over_n: d,
                dstar: q.functionals.dstar,
                resolved: q.functionals.resolved,
                exceeds: q.functionals.resolved && (d - q.functionals.dstar).abs() > cfg.eps,
            }
        }));
    }
    Ok(Output {
        csv: to_csv(&rows)?,
        report: json!({ "law": cfg.law, "seed": cfg.seed, "sizes": summaries }),
    })
}

#[derive(Serialize)]
struct GoodEventsRow {
    n: u64,
    replica: u64,
    ybar: f64,
    #[serde(rename = "B+")]
    b_plus: bool,
    #[serde(rename = "B-")]
    b_minus: bool,
    #[serde(rename = "C+")]
    c_plus: bool,
    #[serde(rename = "C-")]
    c_minus: bool,
    localizing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodEventsSummary {
    pub n: u64,
    pub eps: f64,
    pub replicas: usize,
    pub b_plus: usize,
    pub b_minus: usize,
    pub c_plus: usize,
    pub c_minus: usize,
    pub localizing: usize,
    pub frequency: f64,
}

pub fn good_events_summary(n: u64, eps: f64, rows: &[QuenchedRow]) -> GoodEventsSummary {
    let flags: Vec<GoodEvents> = rows
        .iter()
        .map(|r| r.good_events.expect("evaluated"))
        .collect();
    let count = |f: fn(&GoodEvents) -> bool| flags.iter().filter(|g| f(g)).count();
    let localizing = count(GoodEvents::localizing);
    GoodEventsSummary {
        n,
        eps,
        replicas: rows.len(),
        b_plus: count(|g| g.b_plus),
        b_minus: count(|g| g.b_minus),
        c_plus: count(|g| g.c_plus),
        c_minus: count(|g| g.c_minus),
        localizing,
        frequency: fraction(localizing, rows.len()),
    }
}

/// Frequency of `(B+ and C+) or (B- and C-)` over fresh environments.
pub fn run_good_events(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &n in &cfg.n {
        let plan = QuenchedPlan {
            n,
            grow: false,
            good_events_eps: Some(cfg.eps),
            resolve: Resolve::Within(cfg.eps),
        };
        let batch = quenched_batch(cfg.law, cfg.seed, cfg.replicas, cfg.workers, plan)?;
        summaries.push(good_events_summary(n, cfg.eps, &batch));
        rows.extend(batch.iter().map(|q| {
            let g = q.good_events.expect("evaluated");
            GoodEventsRow {
                n,
                replica: q.replica,
                ybar: q.functionals.ybar,
                b_plus: g.b_plus,
                b_minus: g.b_minus,
                c_plus: g.c_plus,
                c_minus: g.c_minus,
                localizing: g.localizing(),
            }
        }));
    }
    Ok(Output {
        csv: to_csv(&rows)?,
        report: json!({ "law": cfg.law, "seed": cfg.seed, "sizes": summaries }),
    })
}

#[derive(Serialize)]
struct FunctionalsRow {
    replica: u64,
    ybar: f64,
    #[serde(rename = "Tplus")]
    t_plus: f64,
    #[serde(rename = "Tminus")]
    t_minus: f64,
    alpha: f64,
    beta: f64,
    dstar: f64,
    #[serde(rename = "B+")]
    b_plus: bool,
    #[serde(rename = "B-")]
    b_minus: bool,
    #[serde(rename = "C+")]
    c_plus: bool,
    #[serde(rename = "C-")]
    c_minus: bool,
    resolved: bool,
}

/// Per-environment functionals of `V^(n)`. Excursions are followed to the
/// window cap; a censored one is reported as its lower bound.
pub fn run_functionals(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let n = cfg.single_n("functionals")?;
    let plan = QuenchedPlan {
        n,
        grow: false,
        good_events_eps: Some(cfg.eps),
        resolve: Resolve::Full,
    };
    let batch = quenched_batch(cfg.law, cfg.seed, cfg.replicas, cfg.workers, plan)?;
    let rows: Vec<FunctionalsRow> = batch
        .iter()
        .map(|q| {
            let f = &q.functionals;
            let g = q.good_events.expect("evaluated");
            FunctionalsRow {
                replica: q.replica,
                ybar: f.ybar,
                t_plus: f.t_plus,
                t_minus: f.t_minus,
                alpha: f.alpha,
                beta: f.beta,
                dstar: f.dstar,
                b_plus: g.b_plus,
                b_minus: g.b_minus,
                c_plus: g.c_plus,
                c_minus: g.c_minus,
                resolved: f.resolved,
            }
        })
        .collect();
    let censored = batch
        .iter()
        .filter(|q| !(q.functionals.alpha_exact && q.functionals.beta_exact))
        .count();
    Ok(Output {
        csv: to_csv(&rows)?,
        report: json!({
            "law": cfg.law,
            "seed": cfg.seed,
            "n": n,
            "eps": cfg.eps,
            "replicas": cfg.replicas,
            "unresolved": batch.iter().filter(|q| !q.functionals.resolved).count(),
            "censored_excursions": censored,
            "good_events": good_events_summary(n, cfg.eps, &batch),
        }),
    })
}

#[derive(Serialize)]
struct ExploreRow {
    env: u64,
    n: u64,
    g_n: i64,
    d_n: i64,
    d_over_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExploreSummary {
    pub env: u64,
    pub env_seed: u64,
    /// Extremes of `d_n / n` over checkpoints `n >= EXPLORE_MIN_N`.
    pub max_d_over_n: f64,
    pub min_d_over_n: f64,
}

/// One long growth per environment with checkpoints at powers of two, for
/// looking at how `d_n / n` wanders in a fixed environment.
pub fn run_quenched_explore(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let n_max = cfg.max_n();
    let mut checkpoints: Vec<u64> = (0..64)
        .map(|k| 1u64 << k)
        .take_while(|&c| c <= n_max)
        .chain(cfg.checkpoints.iter().copied())
        .chain([n_max])
        .collect();
    checkpoints.sort_unstable();
    checkpoints.dedup();

    let runs = replicate(cfg.workers, cfg.replicas, |e| {
        let mut env = environment(cfg.law, cfg.seed, e);
        grow_cluster(
            &mut env,
            n_max,
            seed::derive(cfg.seed, e, label::RUN),
            &checkpoints,
        )
    })?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (e, run) in runs.iter().enumerate() {
        let e = e as u64;
        rows.extend(run.points.iter().map(|p| ExploreRow {
            env: e,
            n: p.n,
            g_n: p.g,
            d_n: p.d,
            d_over_n: p.d_over_n(),
        }));
        let late: Vec<f64> = run
            .points
            .iter()
            .filter(|p| p.n >= EXPLORE_MIN_N)
            .map(|p| p.d_over_n())
            .collect();
        summaries.push(ExploreSummary {
            env: e,
            env_seed: run.env_seed,
            max_d_over_n: late.iter().copied().fold(f64::NAN, f64::max),
            min_d_over_n: late.iter().copied().fold(f64::NAN, f64::min),
        });
    }
    let swinging = summaries
        .iter()
        .filter(|s| s.max_d_over_n >= 0.9 && s.min_d_over_n <= 0.1)
        .count();
    Ok(Output {
        csv: to_csv(&rows)?,
        report: json!({
            "law": cfg.law,
            "seed": cfg.seed,
            "n_max": n_max,
            "min_n_for_extremes": EXPLORE_MIN_N,
            "environments": summaries,
            "environments_reaching_both_extremes": swinging,
        }),
    })
}

#[derive(Serialize)]
struct OracleRow {
    replica: u64,
    d_exact: i64,
    d_oracle: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub n: u64,
    pub runs: usize,
    pub env_seed: u64,
    pub capped: usize,
    pub tv: f64,
}

/// `d_n` from the exact sampler against step-by-step walks, `runs` times
/// each, in the single environment of replica 0.
pub fn run_oracle_compare(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let n = cfg.single_n("oracle-compare")?;
    let mut env = environment(cfg.law, cfg.seed, 0);
    env.extend(Side::Right, n as usize + 1);
    env.extend(Side::Left, n as usize + 1);
    let env = env;

    let pairs = replicate(
        cfg.workers,
        cfg.replicas,
        |r| -> Result<(i64, Option<i64>)> {
            let mut local = env.clone();
            let exact = grow_cluster(&mut local, n, seed::derive(cfg.seed, r, label::RUN), &[])
                .last()
                .d;
            let oracle = match grow_cluster_oracle(
                &mut local,
                n,
                seed::derive(cfg.seed, r, label::ORACLE_RUN),
                DEFAULT_STEP_CAP,
            ) {
                Ok(t) => Some(t.last().d),
                Err(Error::Capped { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok((exact, oracle))
        },
    )?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let exact: Vec<i64> = pairs.iter().map(|p| p.0).collect();
    let oracle: Vec<i64> = pairs.iter().filter_map(|p| p.1).collect();
    let summary = OracleComparison {
        n,
        runs: cfg.replicas,
        env_seed: env.master_seed(),
        capped: exact.len() - oracle.len(),
        tv: tv_distance_discrete(&exact, &oracle)?,
    };
    let rows: Vec<OracleRow> = pairs
        .iter()
        .enumerate()
        .map(|(r, &(d_exact, d_oracle))| OracleRow {
            replica: r as u64,
            d_exact,
            d_oracle,
        })
        .collect();
    Ok(Output {
        csv: to_csv(&rows)?,
        report: json!({ "law": cfg.law, "seed": cfg.seed, "comparison": summary }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrownianSample {
    pub replica: u64,
    pub dstar: f64,
    pub ybar: f64,
    /// In grid steps; the longer excursion is a lower bound.
    pub alpha_steps: usize,
    pub beta_steps: usize,
    pub resolved: bool,
    pub a_plus: f64,
    pub last_zero: f64,
    pub composite: f64,
}

/// One replica of the Brownian suite. `d*` and `ybar` come from a two-sided
/// path, `A+_1` and `g_1` from a second path, the composite from a third.
pub fn brownian_sample(seed: u64, replica: u64, resolution: usize) -> Result<BrownianSample> {
    let path = |l| BrownianPath::new(resolution, seed::derive(seed, replica, l));
    let options = FunctionalOptions {
        resolve: Resolve::Order,
        ..Default::default()
    };
    let mut two_sided = path(label::BROWNIAN_TWO_SIDED)?;
    let f = brownian::dstar_of_brownian(&mut two_sided, &options)?;
    let mut occupation = path(label::BROWNIAN_OCCUPATION)?;
    let mut composite = path(label::BROWNIAN_COMPOSITE)?;
    Ok(BrownianSample {
        replica,
        dstar: f.dstar,
        ybar: f.ybar,
        alpha_steps: f.excursions.alpha.steps,
        beta_steps: f.excursions.beta.steps,
        resolved: f.resolved,
        a_plus: brownian::occupation_time_positive(&mut occupation),
        last_zero: brownian::last_zero(&mut occupation),
        composite: brownian::composite_sample(&mut composite, brownian::coin(seed, replica)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrownianSuite {
    pub replicas: usize,
    pub resolution: usize,
    pub unresolved: usize,
    /// Arcsine-target pools: `d*`, `A+_1`, composite, `g_1`.
    pub arcsine_pools: Vec<PoolReport>,
    pub moments: BTreeMap<String, MomentCheck>,
    pub ybar: PoolReport,
    /// KS of `ybar` against the law of `|N(0, 1)| / 2`.
    pub ybar_ks_vs_half_of_halfnormal: f64,
    /// Fraction of paths whose shorter excursion exceeds one grid step,
    /// i.e. with both `alpha > h` and `beta > h`.
    pub both_excursions_above_one_step: f64,
    pub both_excursions_above_hundredth: f64,
}

pub fn brownian_suite(samples: &[BrownianSample], resolution: usize) -> Result<BrownianSuite> {
    let resolved: Vec<&BrownianSample> = samples.iter().filter(|s| s.resolved).collect();
    let pools = vec![
        SamplePool::new("dstar", resolved.iter().map(|s| s.dstar).collect()),
        SamplePool::new("a_plus", samples.iter().map(|s| s.a_plus).collect()),
        SamplePool::new("composite", samples.iter().map(|s| s.composite).collect()),
        SamplePool::new("last_zero", samples.iter().map(|s| s.last_zero).collect()),
    ];
    let mut arcsine_pools = pools
        .iter()
        .map(PoolReport::arcsine)
        .collect::<Result<Vec<_>>>()?;
    attach_pairwise(&mut arcsine_pools, &pools)?;
    let moments = pools
        .iter()
        .map(|p| (p.label.clone(), MomentCheck::arcsine(&p.values)))
        .collect();
    let ybar_values: Vec<f64> = samples.iter().map(|s| s.ybar).collect();
    let shorter = |s: &BrownianSample| s.alpha_steps.min(s.beta_steps);
    let hundredth = resolution as f64 / 100.0;
    Ok(BrownianSuite {
        replicas: samples.len(),
        resolution,
        unresolved: samples.len() - resolved.len(),
        arcsine_pools,
        moments,
        ybar: PoolReport::half_normal(&SamplePool::new("ybar", ybar_values.clone()))?,
        ybar_ks_vs_half_of_halfnormal: ks_statistic(&ybar_values, |y| {
            half_normal_cdf(2.0 * y.max(0.0)).expect("nonnegative")
        })?,
        both_excursions_above_one_step: fraction(
            samples.iter().filter(|s| shorter(s) > 1).count(),
            samples.len(),
        ),
        both_excursions_above_hundredth: fraction(
            samples
                .iter()
                .filter(|s| shorter(s) as f64 > hundredth)
                .count(),
            samples.len(),
        ),
    })
}

#[derive(Serialize)]
struct BrownianRow {
    replica: u64,
    dstar: f64,
    ybar: f64,
    alpha: f64,
    beta: f64,
    resolved: bool,
    a_plus: f64,
    last_zero: f64,
    composite: f64,
}

/// Parameters of the optional key-identity diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyIdentityParams {
    pub replicas: usize,
    pub t: f64,
    pub cap: f64,
}

/// The Brownian identity suite, optionally with the key-identity diagnostic.
pub fn run_brownian(cfg: &RunConfig, key_identity: Option<KeyIdentityParams>) -> Result<Output> {
    cfg.validate()?;
    let samples = replicate(cfg.workers, cfg.replicas, |r| {
        brownian_sample(cfg.seed, r, cfg.resolution)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let suite = brownian_suite(&samples, cfg.resolution)?;
    let h = 1.0 / cfg.resolution as f64;
    let rows: Vec<BrownianRow> = samples
        .iter()
        .map(|s| BrownianRow {
            replica: s.replica,
            dstar: s.dstar,
            ybar: s.ybar,
            alpha: s.alpha_steps as f64 * h,
            beta: s.beta_steps as f64 * h,
            resolved: s.resolved,
            a_plus: s.a_plus,
            last_zero: s.last_zero,
            composite: s.composite,
        })
        .collect();
    let key = key_identity
        .map(|k| brownian::keyidentity_check(cfg.seed, k.replicas, cfg.resolution, k.t, k.cap))
        .transpose()?;
    Ok(Output {
        csv: to_csv(&rows)?,
        report: json!({
            "seed": cfg.seed,
            "suite": to_json(&suite),
            "key_identity": key,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: Vec<u64>, replicas: usize) -> RunConfig {
        RunConfig::new(EnvironmentLaw::uniform(0.0).unwrap(), n, replicas, 3)
    }

    #[test]
    fn config_validation() {
        assert!(cfg(vec![10], 1).validate().is_ok());
        assert!(cfg(vec![], 1).validate().is_err());
        assert!(cfg(vec![0], 1).validate().is_err());
        assert!(cfg(vec![10], 0).validate().is_err());
        let mut c = cfg(vec![10], 1);
        c.eps = 1.5;
        assert!(c.validate().is_err());
        c.eps = 0.1;
        c.workers = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn law_names() {
        assert_eq!(
            parse_law("flat", None, None).unwrap(),
            EnvironmentLaw::flat()
        );
        assert_eq!(
            parse_law("two-point", Some(0.3), None).unwrap(),
            EnvironmentLaw::two_point(0.3).unwrap()
        );
        assert!(parse_law("two-point", None, None).is_err());
        assert_eq!(
            parse_law("uniform", None, Some(0.1)).unwrap(),
            EnvironmentLaw::uniform(0.1).unwrap()
        );
        assert!(parse_law("gaussian", None, None).is_err());
    }

    #[test]
    fn single_replica_simulate_has_one_row() {
        let out = run_simulate(&cfg(vec![50], 1)).unwrap();
        let lines: Vec<&str> = out.csv.lines().collect();
        assert_eq!(lines[0], "replica,n,g_n,d_n,d_over_n");
        assert_eq!(lines.len(), 2);
        let fields: Vec<&str> = lines[1].split(',').collect();
        let (g, d): (i64, i64) = (fields[2].parse().unwrap(), fields[3].parse().unwrap());
        assert_eq!(d - g, 50);
    }

    #[test]
    fn functionals_header_matches_schema() {
        let mut c = cfg(vec![200], 2);
        c.eps = 0.1;
        let out = run_functionals(&c).unwrap();
        assert_eq!(
            out.csv.lines().next().unwrap(),
            "replica,ybar,Tplus,Tminus,alpha,beta,dstar,B+,B-,C+,C-,resolved"
        );
        assert_eq!(out.csv.lines().count(), 3);
        assert!(run_functionals(&cfg(vec![100, 200], 1)).is_err());
    }

    #[test]
    fn flat_localization_runs() {
        let mut c = cfg(vec![64], 3);
        c.law = EnvironmentLaw::flat();
        let out = run_localization(&c).unwrap();
        for line in out.csv.lines().skip(1) {
            let dstar: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
            assert!(dstar == 0.0 || dstar == 1.0);
        }
    }
}
