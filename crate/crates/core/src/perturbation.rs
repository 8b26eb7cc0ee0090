//! Perturbation updates of known eigenpairs of `A'` under a symmetric
//! perturbation `E`, in classical (complete spectrum) and truncated form.
//!
//! In the truncated formulas the unknown trailing eigenvalues of `A'` are
//! all replaced by one scalar `mu`; only the `m` leading pairs and
//! matrix-vector products with `A'` and `E` are needed.

use std::str::FromStr;

use rayon::prelude::*;

use crate::eigen::{sym_eig_full, EigenPairs};
use crate::error::{Error, Result};
use crate::matrix::{axpy, check_dim, dot, ColBlock, SymOperator, SymmetricDense};
use crate::tolerance::{EIGENGAP, SHIFT_DENOMINATOR};

/// `A = A' + E` together with the known leading pairs of `A'`.
pub struct PerturbationProblem<'a> {
    pub base: &'a dyn SymOperator,
    pub known: &'a EigenPairs,
    pub perturbation: &'a dyn SymOperator,
    pub trace_base: f64,
}

impl<'a> PerturbationProblem<'a> {
    pub fn new(
        base: &'a dyn SymOperator,
        known: &'a EigenPairs,
        perturbation: &'a dyn SymOperator,
    ) -> Result<Self> {
        check_dim("PerturbationProblem perturbation", base.dim(), perturbation.dim())?;
        check_dim("PerturbationProblem known pairs", base.dim(), known.n())?;
        known.check_distinct()?;
        Ok(Self {
            base,
            known,
            perturbation,
            trace_base: base.trace(),
        })
    }

    /// Overrides the trace of `A'` (e.g. when it is known analytically).
    pub fn with_trace(mut self, trace_base: f64) -> Self {
        self.trace_base = trace_base;
        self
    }

    pub fn n(&self) -> usize {
        self.base.dim()
    }

    pub fn m(&self) -> usize {
        self.known.m()
    }
}

/// How the unknown tail eigenvalues are summarized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuPolicy {
    Zero,
    /// Mean of the unknown eigenvalues, from the trace of `A'`.
    Mean,
    Explicit(f64),
}

impl MuPolicy {
    pub fn resolve(&self, trace_base: f64, known_values: &[f64], n: usize) -> Result<f64> {
        match *self {
            MuPolicy::Zero => Ok(0.0),
            MuPolicy::Mean => mu_mean(trace_base, known_values, n),
            MuPolicy::Explicit(v) if v.is_finite() => Ok(v),
            MuPolicy::Explicit(v) => Err(Error::InvalidArgument(format!("mu must be finite, got {v}"))),
        }
    }
}

impl FromStr for MuPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(MuPolicy::Zero),
            "mean" => Ok(MuPolicy::Mean),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(MuPolicy::Explicit)
                .ok_or_else(|| Error::InvalidArgument(format!("mu must be zero, mean or a number, got {other:?}"))),
        }
    }
}

/// Truncation order of the update formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

impl TryFrom<u8> for Order {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::InvalidArgument(format!("order must be 1 or 2, got {v}"))),
        }
    }
}

/// `(trace(A') - sum of known values) / (n - m)`.
pub fn mu_mean(trace_base: f64, known_values: &[f64], n: usize) -> Result<f64> {
    let m = known_values.len();
    if m >= n {
        return Err(Error::InvalidArgument(
            "mean of the unknown eigenvalues needs m < n".into(),
        ));
    }
    Ok((trace_base - known_values.iter().sum::<f64>()) / (n - m) as f64)
}

/// Products shared by all update formulas.
struct Projection {
    /// `E v_i`
    ev: Vec<Vec<f64>>,
    /// `p[k * m + i] = (E v_i, v_k)`
    p: Vec<f64>,
    /// `r_i = (I - V V^T) E v_i`
    r: Vec<Vec<f64>>,
}

fn project(known: &EigenPairs, e: &dyn SymOperator) -> Projection {
    let m = known.m();
    let complete = m == known.n();
    let ev: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| e.apply_vec(known.vector(i)))
        .collect();
    let mut p = vec![0.0; m * m];
    for (i, evi) in ev.iter().enumerate() {
        for k in 0..m {
            p[k * m + i] = dot(known.vector(k), evi);
        }
    }
    let r = ev
        .par_iter()
        .map(|evi| {
            if complete {
                return vec![0.0; evi.len()];
            }
            let mut r = evi.clone();
            // second pass keeps r orthogonal to V when most of E v_i lies in span(V)
            for _ in 0..2 {
                for v in known.vectors.columns() {
                    let c = dot(v, &r);
                    axpy(-c, v, &mut r);
                }
            }
            r
        })
        .collect();
    Projection { ev, p, r }
}

/// `v_i + sum_{k != i} (E v_i, v_k) / (t_i - t_k) v_k` over the known pairs.
fn in_span_update(known: &EigenPairs, proj: &Projection, i: usize) -> Vec<f64> {
    let m = known.m();
    let t = &known.values;
    let mut w = known.vector(i).to_vec();
    for k in 0..m {
        if k != i {
            axpy(proj.p[k * m + i] / (t[i] - t[k]), known.vector(k), &mut w);
        }
    }
    w
}

/// Classical update of all `n` eigenvectors; needs the complete spectrum of `A'`.
pub fn classical_eigvec_update(problem: &PerturbationProblem) -> Result<ColBlock> {
    check_dim("classical_eigvec_update (m must equal n)", problem.n(), problem.m())?;
    let proj = project(problem.known, problem.perturbation);
    let cols: Vec<Vec<f64>> = (0..problem.m())
        .into_par_iter()
        .map(|i| in_span_update(problem.known, &proj, i))
        .collect();
    ColBlock::from_columns(problem.n(), &cols)
}

/// `t_i + v_i^T E v_i`.
pub fn classical_eigval_update(problem: &PerturbationProblem) -> Vec<f64> {
    (0..problem.m())
        .into_par_iter()
        .map(|i| {
            let v = problem.known.vector(i);
            problem.known.values[i] + dot(v, &problem.perturbation.apply_vec(v))
        })
        .collect()
}

/// `r_i = (I - V V^T) E v_i` for the 0-based index `i`.
pub fn residual_r(known: &EigenPairs, e: &dyn SymOperator, i: usize) -> Result<Vec<f64>> {
    if i >= known.m() {
        return Err(Error::InvalidArgument(format!(
            "index {i} out of range for {} known pairs",
            known.m()
        )));
    }
    check_dim("residual_r", known.n(), e.dim())?;
    if known.m() == known.n() {
        return Ok(vec![0.0; known.n()]);
    }
    let mut r = e.apply_vec(known.vector(i));
    for _ in 0..2 {
        for v in known.vectors.columns() {
            let c = dot(v, &r);
            axpy(-c, v, &mut r);
        }
    }
    Ok(r)
}

/// Output of a truncated update: unnormalized vectors, updated values, and the `mu` used.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedUpdate {
    pub vectors: ColBlock,
    pub values: Vec<f64>,
    pub mu: f64,
}

fn check_shift(values: &[f64], mu: f64) -> Result<()> {
    for (i, t) in values.iter().enumerate() {
        let d = t - mu;
        if d.abs() < SHIFT_DENOMINATOR {
            return Err(Error::SingularDenominator { index: i, value: d });
        }
    }
    Ok(())
}

/// First- or second-order truncated update of the `m` known pairs.
pub fn truncated_update(
    problem: &PerturbationProblem,
    mu: MuPolicy,
    order: Order,
) -> Result<TruncatedUpdate> {
    let known = problem.known;
    let mu = mu.resolve(problem.trace_base, &known.values, problem.n())?;
    check_shift(&known.values, mu)?;
    let proj = project(known, problem.perturbation);
    let m = known.m();
    let cols: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let d = known.values[i] - mu;
            let mut w = in_span_update(known, &proj, i);
            axpy(1.0 / d, &proj.r[i], &mut w);
            if order == Order::Second {
                let mut second = problem.base.apply_vec(&proj.r[i]);
                axpy(-mu, &proj.r[i], &mut second);
                axpy(1.0 / (d * d), &second, &mut w);
            }
            w
        })
        .collect();
    let values = (0..m)
        .map(|i| known.values[i] + dot(known.vector(i), &proj.ev[i]))
        .collect();
    Ok(TruncatedUpdate {
        vectors: ColBlock::from_columns(problem.n(), &cols)?,
        values,
        mu,
    })
}

pub fn truncated_first_order(problem: &PerturbationProblem, mu: MuPolicy) -> Result<ColBlock> {
    Ok(truncated_update(problem, mu, Order::First)?.vectors)
}

pub fn truncated_second_order(problem: &PerturbationProblem, mu: MuPolicy) -> Result<ColBlock> {
    Ok(truncated_update(problem, mu, Order::Second)?.vectors)
}

/// The unknown eigenvalues `t_k, k > m`, either listed or summarized by moments.
#[derive(Debug, Clone, PartialEq)]
pub enum TailSpectrum {
    Values(Vec<f64>),
    /// `count`, `sum t_k` and `sum t_k^2`, e.g. from `trace(A')` and `trace(A'^2)`.
    /// When `at_least_mu` is false, `sum |t_k - mu|` is replaced by its
    /// Cauchy-Schwarz upper bound.
    Moments {
        count: usize,
        sum: f64,
        sum_sq: f64,
        at_least_mu: bool,
    },
}

impl TailSpectrum {
    /// Moments of the tail from the traces of `A'` and `A'^2` and the known values.
    pub fn from_traces(n: usize, trace: f64, trace_sq: f64, known_values: &[f64], psd: bool) -> Self {
        TailSpectrum::Moments {
            count: n - known_values.len(),
            sum: trace - known_values.iter().sum::<f64>(),
            sum_sq: (trace_sq - known_values.iter().map(|t| t * t).sum::<f64>()).max(0.0),
            at_least_mu: psd,
        }
    }

    fn sum_sq_dev(&self, mu: f64) -> f64 {
        match self {
            TailSpectrum::Values(v) => v.iter().map(|t| (t - mu).powi(2)).sum(),
            TailSpectrum::Moments { count, sum, sum_sq, .. } => {
                (sum_sq - 2.0 * mu * sum + *count as f64 * mu * mu).max(0.0)
            }
        }
    }

    fn sum_abs_dev(&self, mu: f64) -> f64 {
        match self {
            TailSpectrum::Values(v) => v.iter().map(|t| (t - mu).abs()).sum(),
            TailSpectrum::Moments { count, sum, at_least_mu, .. } => {
                if *at_least_mu {
                    (sum - *count as f64 * mu).max(0.0)
                } else {
                    (*count as f64 * self.sum_sq_dev(mu)).sqrt()
                }
            }
        }
    }
}

fn check_bound_args(gap: f64, t_i: f64, mu: f64) -> Result<f64> {
    if gap.abs() < EIGENGAP {
        return Err(Error::EigengapTooSmall { index: 0, gap });
    }
    let d = (t_i - mu).abs();
    if d < SHIFT_DENOMINATOR {
        return Err(Error::SingularDenominator { index: 0, value: t_i - mu });
    }
    Ok(d)
}

/// Leading term of the first-order error bound:
/// `sum_{k>m} |t_k - mu| / (|gap| |t_i - mu|) * norm_e`.
/// The `O(norm_e^2)` remainder is not included.
pub fn error_bound_first(tail: &TailSpectrum, gap: f64, t_i: f64, mu: f64, norm_e: f64) -> Result<f64> {
    let d = check_bound_args(gap, t_i, mu)?;
    Ok(tail.sum_abs_dev(mu) / (gap.abs() * d) * norm_e)
}

/// Leading term of the second-order error bound:
/// `sum_{k>m} |t_k - mu|^2 / (|gap| |t_i - mu|^2) * norm_e`.
pub fn error_bound_second(tail: &TailSpectrum, gap: f64, t_i: f64, mu: f64, norm_e: f64) -> Result<f64> {
    let d = check_bound_args(gap, t_i, mu)?;
    Ok(tail.sum_sq_dev(mu) / (gap.abs() * d * d) * norm_e)
}

/// Gap used in the bound for each known index: `|t_i - t_m|`, and for
/// `i = m` (where that vanishes) the gap to the first unknown value.
pub fn bound_gaps(known_values: &[f64], next_value: Option<f64>) -> Result<Vec<f64>> {
    let m = known_values.len();
    let last = known_values[m - 1];
    (0..m)
        .map(|i| {
            if i + 1 < m {
                Ok(known_values[i] - last)
            } else {
                next_value.map(|nv| last - nv).ok_or_else(|| {
                    Error::InvalidArgument("bound for the last known pair needs the next eigenvalue".into())
                })
            }
        })
        .collect()
}

/// Leading bound terms for every known index.
pub fn error_bounds(
    known_values: &[f64],
    next_value: Option<f64>,
    tail: &TailSpectrum,
    mu: f64,
    norm_e: f64,
    order: Order,
) -> Result<Vec<f64>> {
    let gaps = bound_gaps(known_values, next_value)?;
    known_values
        .iter()
        .zip(&gaps)
        .enumerate()
        .map(|(i, (&t, &g))| {
            let r = match order {
                Order::First => error_bound_first(tail, g, t, mu, norm_e),
                Order::Second => error_bound_second(tail, g, t, mu, norm_e),
            };
            r.map_err(|e| match e {
                Error::EigengapTooSmall { gap, .. } => Error::EigengapTooSmall { index: i, gap },
                Error::SingularDenominator { value, .. } => Error::SingularDenominator { index: i, value },
                other => other,
            })
        })
        .collect()
}

/// `Some(delta)` when the `n - m` trailing eigenvalues of `a` agree within `tolerance`.
pub fn is_lowrank_plus_shift(a: &SymmetricDense, m: usize, tolerance: f64) -> Result<Option<f64>> {
    if m >= a.n() {
        return Err(Error::InvalidArgument("need m < n to inspect the tail".into()));
    }
    let e = sym_eig_full(a)?;
    let tail = &e.values[m..];
    let (lo, hi) = (tail[tail.len() - 1], tail[0]);
    Ok((hi - lo <= tolerance).then(|| tail.iter().sum::<f64>() / tail.len() as f64))
}
