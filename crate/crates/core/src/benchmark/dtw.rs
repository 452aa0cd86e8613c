use crate::chain::{Configuration, KinematicChain, TaskPoint};
use crate::error::{Error, Result};
use crate::taskgraph::TaskMetricWeights;

/// Average task distance between the point pairs matched by dynamic time
/// warping of `input` and `produced`.
///
/// Steps are diagonal, vertical or horizontal; among equal-cost
/// predecessors the diagonal is preferred, then the vertical.
pub fn dtw_deviation(input: &[TaskPoint], produced: &[TaskPoint], metric: &TaskMetricWeights) -> Result<f64> {
    if input.is_empty() || produced.is_empty() {
        return Err(Error::invalid("dtw of an empty path"));
    }
    let m = produced.len();
    // (accumulated cost, matched pairs) for the previous and current rows
    let mut prev: Vec<(f64, usize)> = vec![(f64::INFINITY, 0); m];
    let mut cur: Vec<(f64, usize)> = vec![(f64::INFINITY, 0); m];
    for (i, a) in input.iter().enumerate() {
        for (j, b) in produced.iter().enumerate() {
            let c = metric.distance_unchecked(a, b);
            let best = if i == 0 && j == 0 {
                (0.0, 0)
            } else {
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { (f64::INFINITY, 0) };
                let up = if i > 0 { prev[j] } else { (f64::INFINITY, 0) };
                let left = if j > 0 { cur[j - 1] } else { (f64::INFINITY, 0) };
                let mut best = diag;
                if up.0 < best.0 {
                    best = up;
                }
                if left.0 < best.0 {
                    best = left;
                }
                best
            };
            cur[j] = (best.0 + c, best.1 + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (total, pairs) = prev[m - 1];
    Ok(total / pairs as f64)
}

/// Mean ratio of C-space step to task-space step along a produced path,
/// skipping steps with task motion below 1e-9.
pub fn path_smoothness(
    chain: &KinematicChain,
    qs: &[Configuration],
    ts: &[TaskPoint],
    metric: &TaskMetricWeights,
) -> Result<f64> {
    if qs.len() != ts.len() {
        return Err(Error::invalid("configuration and task paths differ in length"));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 1..qs.len() {
        let dp = metric.distance_unchecked(&ts[i - 1], &ts[i]);
        if dp < 1e-9 {
            continue;
        }
        total += chain.distance_unchecked(qs[i - 1].values(), qs[i].values()) / dp;
        count += 1;
    }
    if count == 0 {
        return Err(Error::UndefinedMetric("path never moves in task space".into()));
    }
    Ok(total / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robots::planar_chain;

    fn line(n: usize, dy: f64) -> Vec<TaskPoint> {
        (0..n).map(|i| TaskPoint::planar(0.1 * i as f64, dy)).collect()
    }

    #[test]
    fn identical_and_shifted() {
        let m = TaskMetricWeights::position();
        let a = line(20, 0.0);
        assert_eq!(dtw_deviation(&a, &a, &m).unwrap(), 0.0);
        let b = line(20, 0.3);
        assert!((dtw_deviation(&a, &b, &m).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn duplication_is_absorbed() {
        let m = TaskMetricWeights::position();
        let a = line(15, 0.0);
        let b: Vec<TaskPoint> = a.iter().flat_map(|p| [p.clone(), p.clone()]).collect();
        assert_eq!(dtw_deviation(&a, &b, &m).unwrap(), 0.0);
        assert!(dtw_deviation(&[], &b, &m).is_err());
    }

    #[test]
    fn smoothness_cases() {
        let chain = planar_chain(2);
        let m = TaskMetricWeights::position();
        let qs: Vec<Configuration> = (0..4).map(|i| Configuration::new(vec![0.2 * i as f64, 0.0])).collect();
        let ts: Vec<TaskPoint> = (0..4).map(|i| TaskPoint::planar(0.05 * i as f64, 0.0)).collect();
        assert!((path_smoothness(&chain, &qs, &ts, &m).unwrap() - 4.0).abs() < 1e-12);
        // hand case: steps (dq, dp) = (0.3, 0.1), skipped, (0.1, 0.2)
        let qs = vec![
            Configuration::new(vec![0.0, 0.0]),
            Configuration::new(vec![0.3, 0.0]),
            Configuration::new(vec![0.3, 0.5]),
            Configuration::new(vec![0.3, 0.6]),
        ];
        let ts = vec![
            TaskPoint::planar(0.0, 0.0),
            TaskPoint::planar(0.1, 0.0),
            TaskPoint::planar(0.1, 0.0),
            TaskPoint::planar(0.1, 0.2),
        ];
        let s = path_smoothness(&chain, &qs, &ts, &m).unwrap();
        assert!((s - (3.0 + 0.5) / 2.0).abs() < 1e-12);
        let still = vec![TaskPoint::planar(1.0, 1.0); 4];
        assert!(matches!(path_smoothness(&chain, &qs, &still, &m), Err(Error::UndefinedMetric(_))));
    }
}
