//! Comparisons of two error curves at matched nonzero budgets.

use std::collections::BTreeMap;

use crate::report::{Report, Row};
use crate::stats::{median, variance};

/// One grid point of a curve, aggregated over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub parameter: f64,
    pub median_fraction: f64,
    pub median_value: f64,
    pub variance: f64,
    pub trials: usize,
}

/// Aggregates the rows of one method and metric per parameter value.
pub fn curve(report: &Report, method: &str, metric: &str) -> Vec<CurvePoint> {
    let mut by_param: BTreeMap<u64, Vec<&Row>> = BTreeMap::new();
    for r in report.select(method, metric) {
        by_param.entry(order_key(r.parameter)).or_default().push(r);
    }
    by_param
        .into_values()
        .map(|rows| {
            let fr: Vec<f64> = rows.iter().map(|r| r.nnz_fraction).collect();
            let v: Vec<f64> = rows.iter().map(|r| r.value).collect();
            CurvePoint {
                parameter: rows[0].parameter,
                median_fraction: median(&fr),
                median_value: median(&v),
                variance: variance(&v),
                trials: rows.len(),
            }
        })
        .collect()
}

// order-preserving map of finite f64 onto u64
fn order_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 { !b } else { b | (1 << 63) }
}

/// Both curves at one baseline grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPoint {
    /// Baseline parameter (e.g. the number of sampled columns).
    pub parameter: f64,
    /// Median baseline nnz fraction over trials.
    pub fraction: f64,
    pub candidate_median: f64,
    pub baseline_median: f64,
    pub candidate_variance: f64,
    pub baseline_variance: f64,
}

impl MatchedPoint {
    pub fn candidate_not_worse(&self) -> bool {
        self.candidate_median <= self.baseline_median
    }
}

/// Compares `candidate` against `baseline` at every baseline grid point whose
/// median nnz fraction is at least `threshold`.
///
/// Within each trial the candidate is charged its value at the largest grid
/// point whose nnz fraction does not exceed the baseline's fraction in that
/// trial, so the candidate never uses more nonzeros than the baseline. A
/// trial with no such candidate point is charged `missing`.
pub fn matched_comparison(
    report: &Report,
    candidate: &str,
    baseline: &str,
    metric: &str,
    threshold: f64,
    missing: f64,
) -> Vec<MatchedPoint> {
    let mut cand: BTreeMap<usize, Vec<&Row>> = BTreeMap::new();
    for r in report.select(candidate, metric) {
        cand.entry(r.trial).or_default().push(r);
    }
    let mut base: BTreeMap<u64, Vec<&Row>> = BTreeMap::new();
    for r in report.select(baseline, metric) {
        base.entry(order_key(r.parameter)).or_default().push(r);
    }
    let mut out = Vec::new();
    for rows in base.into_values() {
        let fr: Vec<f64> = rows.iter().map(|r| r.nnz_fraction).collect();
        let fraction = median(&fr);
        if fraction < threshold {
            continue;
        }
        let b: Vec<f64> = rows.iter().map(|r| r.value).collect();
        let c: Vec<f64> = rows
            .iter()
            .map(|r| {
                cand.get(&r.trial)
                    .and_then(|cs| {
                        cs.iter()
                            .filter(|c| c.nnz_fraction <= r.nnz_fraction)
                            .max_by(|x, y| {
                                x.nnz_fraction
                                    .total_cmp(&y.nnz_fraction)
                                    .then(y.value.total_cmp(&x.value))
                            })
                    })
                    .map_or(missing, |c| c.value)
            })
            .collect();
        out.push(MatchedPoint {
            parameter: rows[0].parameter,
            fraction,
            candidate_median: median(&c),
            baseline_median: median(&b),
            candidate_variance: variance(&c),
            baseline_variance: variance(&b),
        });
    }
    out
}

/// Mean of the per-point trial variances of each curve.
pub fn mean_variances(points: &[MatchedPoint]) -> (f64, f64) {
    if points.is_empty() {
        return (0.0, 0.0);
    }
    let n = points.len() as f64;
    (
        points.iter().map(|p| p.candidate_variance).sum::<f64>() / n,
        points.iter().map(|p| p.baseline_variance).sum::<f64>() / n,
    )
}
