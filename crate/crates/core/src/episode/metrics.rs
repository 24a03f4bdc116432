//! Evaluation metrics over sets of finished episodes.

use super::Outcome;
use crate::geom::{distance_to_polyline, Point};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("cannot aggregate an empty result set")]
    Empty,
}

/// Per-episode numbers the metrics are computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub start: String,
    pub dest: String,
    pub seed: u64,
    pub outcome: Outcome,
    pub steps: u64,
    /// Planned shortest path length from the start, meters.
    pub shortest_length: f64,
    /// Length actually driven, meters.
    pub path_length: f64,
    pub reward: f64,
    pub waypoints_collected: usize,
    pub waypoints_total: usize,
    pub line_following: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub episodes: usize,
    pub spl: f64,
    pub success_rate: f64,
    pub line_following_rate: f64,
    pub waypoint_collecting_rate: f64,
    pub collision_rate: f64,
    pub oob_rate: f64,
    pub timeout_rate: f64,
}

/// Success weighted by path length: mean of `S_i * l_i / max(l_i, p_i)`.
///
/// Each item is `(success, shortest length l_i, taken length p_i)`.
pub fn spl<I>(items: I) -> Result<f64, MetricsError>
where
    I: IntoIterator<Item = (bool, f64, f64)>,
{
    let mut n = 0usize;
    let mut sum = 0.0;
    for (success, shortest, taken) in items {
        n += 1;
        if success {
            sum += shortest / shortest.max(taken);
        }
    }
    if n == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(sum / n as f64)
}

/// Fraction of trajectory samples within `corridor` meters of `path`.
pub fn line_following_rate(trajectory: &[Point], path: &[Point], corridor: f64) -> f64 {
    if trajectory.is_empty() {
        return 0.0;
    }
    let inside = trajectory
        .iter()
        .filter(|&&p| distance_to_polyline(path, p) <= corridor)
        .count();
    inside as f64 / trajectory.len() as f64
}

/// `sum collected / sum total` over `(collected, total)` pairs.
pub fn waypoint_collecting_rate<I>(items: I) -> Result<f64, MetricsError>
where
    I: IntoIterator<Item = (usize, usize)>,
{
    let (collected, total) = items
        .into_iter()
        .fold((0usize, 0usize), |(c, t), (ci, ti)| (c + ci, t + ti));
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(collected as f64 / total as f64)
}

pub fn aggregate(results: &[EpisodeSummary]) -> Result<MetricsReport, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = results.len() as f64;
    let rate = |o: Outcome| results.iter().filter(|r| r.outcome == o).count() as f64 / n;
    Ok(MetricsReport {
        episodes: results.len(),
        spl: spl(results
            .iter()
            .map(|r| (r.outcome == Outcome::Success, r.shortest_length, r.path_length)))?,
        success_rate: rate(Outcome::Success),
        line_following_rate: results.iter().map(|r| r.line_following).sum::<f64>() / n,
        waypoint_collecting_rate: waypoint_collecting_rate(
            results.iter().map(|r| (r.waypoints_collected, r.waypoints_total)),
        )
        .unwrap_or(0.0),
        collision_rate: rate(Outcome::Collision),
        oob_rate: rate(Outcome::OutOfBound),
        timeout_rate: rate(Outcome::Timeout),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn summary(outcome: Outcome, l: f64, p: f64) -> EpisodeSummary {
        EpisodeSummary {
            start: "A".into(),
            dest: "B".into(),
            seed: 0,
            outcome,
            steps: 10,
            shortest_length: l,
            path_length: p,
            reward: 0.0,
            waypoints_collected: 1,
            waypoints_total: 2,
            line_following: 0.5,
        }
    }

    #[test]
    fn spl_hand_cases() {
        assert_eq!(spl([(true, 10.0, 10.0)]), Ok(1.0));
        assert_eq!(spl([(true, 10.0, 20.0)]), Ok(0.5));
        assert_eq!(spl([(false, 10.0, 10.0)]), Ok(0.0));
        // shorter than the plan still counts as 1
        assert_eq!(spl([(true, 10.0, 8.0)]), Ok(1.0));
        assert_eq!(spl(std::iter::empty()), Err(MetricsError::Empty));
    }

    #[test]
    fn line_following_counts_samples() {
        let path = [Point::new(0.0, 0.0), Point::new(10.0, 0.0)];
        let on: Vec<Point> = (0..=10).map(|i| Point::new(i as f64, 0.0)).collect();
        assert_eq!(line_following_rate(&on, &path, 2.0), 1.0);
        let off: Vec<Point> = (0..=10).map(|i| Point::new(i as f64, 5.0)).collect();
        assert_eq!(line_following_rate(&off, &path, 2.0), 0.0);
        let half = [Point::new(1.0, 1.0), Point::new(2.0, 1.5), Point::new(3.0, 3.0), Point::new(4.0, -4.0)];
        assert_eq!(line_following_rate(&half, &path, 2.0), 0.5);
    }

    #[test]
    fn waypoint_rate_cases() {
        assert_eq!(waypoint_collecting_rate([(4, 4)]), Ok(1.0));
        assert_eq!(waypoint_collecting_rate([(0, 4)]), Ok(0.0));
        assert_eq!(waypoint_collecting_rate([(3, 4)]), Ok(0.75));
        assert_eq!(waypoint_collecting_rate([(0, 0)]), Err(MetricsError::Empty));
    }

    #[test]
    fn aggregate_counts_outcomes() {
        let all = vec![summary(Outcome::Success, 10.0, 10.0); 3];
        let m = aggregate(&all).unwrap();
        assert_eq!((m.success_rate, m.collision_rate, m.oob_rate), (1.0, 0.0, 0.0));
        let mixed = [summary(Outcome::Success, 10.0, 10.0), summary(Outcome::Collision, 10.0, 3.0)];
        let m = aggregate(&mixed).unwrap();
        assert_eq!((m.success_rate, m.collision_rate), (0.5, 0.5));
        assert_eq!(aggregate(&[]), Err(MetricsError::Empty));
    }

    fn outcome_strategy() -> impl Strategy<Value = Outcome> {
        prop_oneof![
            Just(Outcome::Success),
            Just(Outcome::Collision),
            Just(Outcome::OutOfBound),
            Just(Outcome::Timeout)
        ]
    }

    proptest! {
        #[test]
        fn rates_partition_and_replication_is_idempotent(
            items in proptest::collection::vec((outcome_strategy(), 1.0f64..500.0, 0.0f64..1500.0), 1..40)
        ) {
            let set: Vec<_> = items.iter().map(|&(o, l, p)| summary(o, l, p)).collect();
            let m = aggregate(&set).unwrap();
            let sum = m.success_rate + m.collision_rate + m.oob_rate + m.timeout_rate;
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(m.spl <= m.success_rate + 1e-12);
            let mut doubled = set.clone();
            doubled.extend(set.iter().cloned());
            let d = aggregate(&doubled).unwrap();
            prop_assert!((d.spl - m.spl).abs() < 1e-12);
            prop_assert!((d.success_rate - m.success_rate).abs() < 1e-12);
            prop_assert!((d.line_following_rate - m.line_following_rate).abs() < 1e-12);
            prop_assert!((d.waypoint_collecting_rate - m.waypoint_collecting_rate).abs() < 1e-12);
        }
    }
}
