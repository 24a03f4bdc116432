//! Batch evaluation over route sets, and the `vgreport/1` report.

use crate::episode::{
    aggregate, run_episode, EpisodeConfig, EpisodeError, EpisodeResult, EpisodeSummary,
    MetricsError, MetricsReport,
};
use crate::guidance::GuidanceScheme;
use crate::planner::PlanMode;
use crate::policies::PolicyKind;
use crate::scenario::{ScenarioError, ScenarioSet};
use crate::world::CityMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

pub const REPORT_FORMAT: &str = "vgreport/1";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("route {start}-{dest}: {source}")]
    Episode {
        start: String,
        dest: String,
        source: EpisodeError,
    },
    #[error("policy `{0}` cannot run in batch evaluation")]
    Policy(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

impl EvalError {
    pub fn code(&self) -> &'static str {
        match self {
            EvalError::Scenario(_) => "BadScenario",
            EvalError::Episode { source, .. } => source.code(),
            EvalError::Policy(_) => "BadPolicy",
            EvalError::Metrics(_) => "NoEpisodes",
            EvalError::Pool(_) => "Pool",
        }
    }
}

/// One row of an evaluation: a scheme, a planning mode and a policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub scheme: GuidanceScheme,
    pub plan_mode: PlanMode,
    /// `None` picks the oracle for the scheme.
    pub policy: Option<PolicyKind>,
}

impl RunSpec {
    pub fn policy(&self) -> PolicyKind {
        self.policy
            .unwrap_or_else(|| PolicyKind::oracle_for(self.scheme))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scheme: GuidanceScheme,
    pub plan_mode: String,
    pub policy: String,
    pub metrics: MetricsReport,
    pub episodes: Vec<EpisodeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: String,
    pub map: String,
    pub scenario: String,
    pub seed: u64,
    pub pedestrians: bool,
    pub runs: Vec<RunReport>,
}

impl Report {
    /// Canonical serialization; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Seed of the `index`-th episode of a run.
pub fn episode_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

/// Runs every episode of `set` under `run`. Results keep the set's job
/// order regardless of how many workers are used.
pub fn evaluate_run(
    map: &CityMap,
    set: &ScenarioSet,
    base: &EpisodeConfig,
    run: &RunSpec,
    seed: u64,
    jobs: usize,
) -> Result<Vec<EpisodeResult>, EvalError> {
    set.validate(map)?;
    let policy = run.policy();
    if policy == PolicyKind::Remote {
        return Err(EvalError::Policy(policy.name().into()));
    }
    let work: Vec<(usize, EpisodeConfig)> = set
        .jobs()
        .enumerate()
        .map(|(i, (route, _))| {
            let (start, dest) = set.routes[route].clone();
            let config = EpisodeConfig {
                route: (start, dest),
                scheme: run.scheme,
                plan_mode: run.plan_mode,
                seed: episode_seed(seed, i),
                pedestrians: set.pedestrians,
                ..base.clone()
            };
            (i, config)
        })
        .collect();
    let one = |(_, config): &(usize, EpisodeConfig)| {
        let mut p = policy.build(config.seed).expect("local policy");
        run_episode(p.as_mut(), config, map).map_err(|source| EvalError::Episode {
            start: config.route.0.clone(),
            dest: config.route.1.clone(),
            source,
        })
    };
    if jobs <= 1 {
        return work.iter().map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| EvalError::Pool(e.to_string()))?;
    pool.install(|| work.par_iter().map(one).collect())
}

/// Evaluates each run in turn. `on_episode` sees every result in order,
/// e.g. to write per-episode logs.
pub fn evaluate(
    map: &CityMap,
    set: &ScenarioSet,
    base: &EpisodeConfig,
    runs: &[RunSpec],
    seed: u64,
    jobs: usize,
    mut on_episode: impl FnMut(&RunSpec, &EpisodeResult),
) -> Result<Report, EvalError> {
    let mut out = Vec::with_capacity(runs.len());
    for run in runs {
        let results = evaluate_run(map, set, base, run, seed, jobs)?;
        for r in &results {
            on_episode(run, r);
        }
        let episodes: Vec<EpisodeSummary> = results.iter().map(EpisodeResult::summary).collect();
        out.push(RunReport {
            scheme: run.scheme,
            plan_mode: run.plan_mode.label(),
            policy: run.policy().name().into(),
            metrics: aggregate(&episodes)?,
            episodes,
        });
    }
    Ok(Report {
        format: REPORT_FORMAT.into(),
        map: map.name().into(),
        scenario: set.name.clone(),
        seed,
        pedestrians: set.pedestrians,
        runs: out,
    })
}

/// Plain-text table, one row per run, rates in percent.
pub fn format_table(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "map {}  scenario {}  seed {}  pedestrians {}",
        report.map,
        report.scenario,
        report.seed,
        if report.pedestrians { "on" } else { "off" }
    );
    let _ = writeln!(
        s,
        "{:<10} {:<11} {:<8} {:>4} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
        "scheme", "planning", "policy", "n", "SR", "SPL", "LFR", "WCR", "coll", "OOB", "timeout"
    );
    for run in &report.runs {
        let m = &run.metrics;
        let pct = |v: f64| format!("{:.2}", 100.0 * v);
        let _ = writeln!(
            s,
            "{:<10} {:<11} {:<8} {:>4} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
            run.scheme.name(),
            run.plan_mode,
            run.policy,
            m.episodes,
            pct(m.success_rate),
            pct(m.spl),
            pct(m.line_following_rate),
            pct(m.waypoint_collecting_rate),
            pct(m.collision_rate),
            pct(m.oob_rate),
            pct(m.timeout_rate),
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_set() -> ScenarioSet {
        ScenarioSet::new(
            "small",
            vec![("N1".into(), "S1".into()), ("W1".into(), "M1".into())],
        )
    }

    fn pursuit() -> RunSpec {
        RunSpec {
            scheme: GuidanceScheme::Path,
            plan_mode: PlanMode::OneTime,
            policy: None,
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let map = crate::maps::build_city8();
        let base = EpisodeConfig::default();
        let a = evaluate_run(&map, &small_set(), &base, &pursuit(), 5, 1).unwrap();
        let b = evaluate_run(&map, &small_set(), &base, &pursuit(), 5, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[1].seed, 6);
    }

    #[test]
    fn report_and_table() {
        let map = crate::maps::build_city8();
        let mut seen = 0;
        let report = evaluate(&map, &small_set(), &EpisodeConfig::default(), &[pursuit()], 0, 2, |_, _| seen += 1).unwrap();
        assert_eq!(seen, 2);
        assert_eq!(report.runs[0].policy, "pursuit");
        let table = format_table(&report);
        assert_eq!(table.lines().count(), 3);
        assert!(table.lines().nth(2).unwrap().starts_with("path"));
        let parsed: Report = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn remote_and_bad_sets_are_rejected() {
        let map = crate::maps::build_city8();
        let run = RunSpec {
            policy: Some(PolicyKind::Remote),
            ..pursuit()
        };
        assert!(matches!(
            evaluate_run(&map, &small_set(), &EpisodeConfig::default(), &run, 0, 1),
            Err(EvalError::Policy(_))
        ));
        let bad = ScenarioSet::new("bad", vec![("N1".into(), "X".into())]);
        assert!(matches!(
            evaluate_run(&map, &bad, &EpisodeConfig::default(), &pursuit(), 0, 1),
            Err(EvalError::Scenario(_))
        ));
    }
}
