//! Numerical maximal-angle search.
//!
//! For a closed convex cone `K`, the unit vector of `K` most aligned with a
//! direction `v` is `proj_K(v) / |proj_K(v)|`. Maximizing the angle between
//! two unit members therefore alternates two exact block steps,
//! `B <- support(-A)` and `A <- support(-B)`, each of which can only lower
//! `<A, B>`. The copositive version projects through the
//! semidefinite-plus-nonnegative decomposition (orders up to 4); the
//! semidefinite-versus-nonnegative version uses eigenvalue clipping and
//! entrywise clipping in closed form.

use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::AnglePair;
use crate::coposcheck::{block_descent, dist_to_copositive, is_copositive, ConeDecomposition};
use crate::eigen::psd_project;
use crate::error::{CopoError, Result};
use crate::sampling::{sample_unit_symmetric, Seed};
use crate::sym::{clamped_acos, SymMatrix};

/// Iteration cap for each cone projection inside a search.
pub const SEARCH_INNER_MAX_ITER: usize = 20_000;

/// Certified-feasibility threshold on the distance to the order-4 cone.
pub const ORDER4_FEASIBILITY: f64 = 2e-6;

/// Exact-test tolerance for validating reported pairs of order at most 3.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// Projections shorter than this (relative to the input) count as zero.
const ZERO_PROJECTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    pub order: usize,
    pub starts: usize,
    pub seed: Seed,
    pub max_outer_iter: usize,
    /// Tolerance of each cone projection.
    pub inner_tol: f64,
    /// Stop once one outer sweep lowers `<A, B>` by less than this.
    pub outer_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            order: 3,
            starts: 64,
            seed: Seed(0),
            max_outer_iter: 500,
            inner_tol: 1e-12,
            outer_tol: 1e-11,
        }
    }
}

impl SearchConfig {
    pub fn new(order: usize, starts: usize, seed: u64) -> Self {
        SearchConfig { order, starts, seed: Seed(seed), ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(CopoError::DomainError("starts must be at least 1".into()));
        }
        if !(self.inner_tol > 0.0 && self.outer_tol > 0.0) {
            return Err(CopoError::DomainError("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one start.
#[derive(Debug, Clone, Serialize)]
pub struct StartRecord {
    pub index: usize,
    /// `None` when both sampling attempts hit a vanishing projection.
    pub final_angle: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest angle of any feasible pair evaluated along the way.
    pub max_angle_seen: f64,
    /// `<A, B>` after every accepted block step.
    pub trajectory: Vec<f64>,
    pub pair: Option<AnglePair>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub best: AnglePair,
    pub best_angle: f64,
    pub best_start: usize,
    pub per_start: Vec<StartRecord>,
    pub config: SearchConfig,
}

impl SearchReport {
    /// Largest angle of any feasible pair evaluated by any start.
    pub fn max_angle_seen(&self) -> f64 {
        self.per_start.iter().map(|s| s.max_angle_seen).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Unit copositive matrix maximizing `<v, B>`, with the decomposition
/// `P + N` of the projection it normalizes.
pub fn support_decomposition(
    v: &SymMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<(SymMatrix, ConeDecomposition)> {
    let dec = block_descent(v, tol, max_iter, |_| {})?;
    let proj = dec.projection();
    if proj.norm() <= ZERO_PROJECTION * (1.0 + v.norm()) {
        return Err(CopoError::ZeroProjection);
    }
    Ok((proj.normalized()?, dec))
}

/// Unit copositive matrix maximizing `<v, B>`, for orders up to 4.
pub fn support_point(v: &SymMatrix) -> Result<SymMatrix> {
    support_decomposition(v, 1e-12, SEARCH_INNER_MAX_ITER).map(|(s, _)| s)
}

/// Checks that a reported matrix is copositive: exactly for orders up to 3,
/// by distance to the cone for order 4.
pub fn is_feasible_copositive(a: &SymMatrix) -> Result<bool> {
    match a.order() {
        1..=3 => Ok(is_copositive(a, FEASIBILITY_TOL)?.member),
        4 => Ok(dist_to_copositive(a, 1e-12, 100_000)?.distance <= ORDER4_FEASIBILITY),
        n => Err(CopoError::UnsupportedOrder { order: n, supported: "1..=4" }),
    }
}

/// Result of one alternating run.
#[derive(Debug, Clone)]
pub struct AlternatingRun {
    pub pair: AnglePair,
    pub trajectory: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub min_inner_seen: f64,
}

/// Alternating block maximization of the angle from a copositive unit start.
pub fn alternating_search(a0: &SymMatrix, config: &SearchConfig) -> Result<AlternatingRun> {
    let n = a0.order();
    if n > 4 {
        return Err(CopoError::UnsupportedOrder { order: n, supported: "1..=4" });
    }
    if (a0.norm() - 1.0).abs() > 1e-9 {
        return Err(CopoError::DomainError("start must have unit norm".into()));
    }
    if !is_feasible_copositive(a0)? {
        return Err(CopoError::DomainError("start must be copositive".into()));
    }
    let support =
        |v: &SymMatrix| support_decomposition(v, config.inner_tol, SEARCH_INNER_MAX_ITER).map(|(s, _)| s);

    let mut a = a0.clone();
    let mut b = support(&-&a)?;
    let mut inner = a.dot(&b)?;
    let mut min_seen = inner;
    let mut trajectory = vec![inner];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_outer_iter {
        iterations += 1;
        let start = inner;
        let cand_a = support(&-&b)?;
        let ia = cand_a.dot(&b)?;
        min_seen = min_seen.min(ia);
        if ia <= inner {
            a = cand_a;
            inner = ia;
            trajectory.push(inner);
        }
        let cand_b = support(&-&a)?;
        let ib = a.dot(&cand_b)?;
        min_seen = min_seen.min(ib);
        if ib <= inner {
            b = cand_b;
            inner = ib;
            trajectory.push(inner);
        }
        if start - inner < config.outer_tol {
            converged = true;
            break;
        }
    }
    Ok(AlternatingRun {
        pair: AnglePair::new(a, b)?,
        trajectory,
        iterations,
        converged,
        min_inner_seen: min_seen,
    })
}

/// Random copositive unit start: the support point of a uniform direction.
fn copositive_start(n: usize, seed: Seed, config: &SearchConfig) -> Result<SymMatrix> {
    let v = sample_unit_symmetric(n, &mut seed.rng());
    support_decomposition(&v, config.inner_tol, SEARCH_INNER_MAX_ITER).map(|(s, _)| s)
}

/// Runs `attempt` on the start's child seed, retrying once on a vanishing
/// projection with the child's own first child seed.
fn with_retry<T>(seed: Seed, index: usize, attempt: impl Fn(Seed) -> Result<T>) -> Result<Option<T>> {
    let first = seed.child(index as u64);
    match attempt(first) {
        Ok(v) => Ok(Some(v)),
        Err(CopoError::ZeroProjection) => match attempt(first.child(0)) {
            Ok(v) => Ok(Some(v)),
            Err(CopoError::ZeroProjection) => Ok(None),
            Err(e) => Err(e),
        },
        Err(e) => Err(e),
    }
}

fn assemble(config: SearchConfig, runs: Vec<(usize, Option<AlternatingRun>)>) -> Result<SearchReport> {
    let mut best: Option<(usize, AnglePair)> = None;
    let mut per_start = Vec::with_capacity(runs.len());
    for (index, run) in runs {
        match run {
            Some(r) => {
                if best.as_ref().is_none_or(|(_, p)| r.pair.angle > p.angle) {
                    best = Some((index, r.pair.clone()));
                }
                per_start.push(StartRecord {
                    index,
                    final_angle: Some(r.pair.angle),
                    iterations: r.iterations,
                    converged: r.converged,
                    max_angle_seen: clamped_acos(r.min_inner_seen),
                    trajectory: r.trajectory,
                    pair: Some(r.pair),
                });
            }
            None => per_start.push(StartRecord {
                index,
                final_angle: None,
                iterations: 0,
                converged: false,
                max_angle_seen: f64::NEG_INFINITY,
                trajectory: Vec::new(),
                pair: None,
            }),
        }
    }
    let (best_start, best) = best.ok_or(CopoError::ZeroProjection)?;
    Ok(SearchReport { best_angle: best.angle, best, best_start, per_start, config })
}

/// Multistart estimate of the maximal angle of the copositive cone of
/// order 2, 3 or 4. Start `i` draws from `config.seed.child(i)`.
///
/// Returns `ZeroProjection` only if every start failed.
pub fn multistart_max_angle(config: &SearchConfig) -> Result<SearchReport> {
    config.validate()?;
    let n = config.order;
    if !(2..=4).contains(&n) {
        return Err(CopoError::UnsupportedOrder { order: n, supported: "2..=4" });
    }
    let runs: Vec<(usize, Option<AlternatingRun>)> = (0..config.starts)
        .into_par_iter()
        .map(|i| {
            let run = with_retry(config.seed, i, |s| {
                let a0 = copositive_start(n, s, config)?;
                alternating_search(&a0, config)
            })?;
            Ok((i, run))
        })
        .collect::<Result<_>>()?;
    let report = assemble(*config, runs)?;
    for m in [&report.best.a, &report.best.b] {
        if !is_feasible_copositive(m)? {
            return Err(CopoError::DomainError("search produced an infeasible pair".into()));
        }
    }
    Ok(report)
}

/// Alternating closed-form steps for the angle between a unit positive
/// semidefinite `A` and a unit nonnegative `B`:
/// `A <- normalize(psd_project(-B))`, `B <- normalize(max(-A, 0))`.
pub fn psi_alternating(b0: &SymMatrix, config: &SearchConfig) -> Result<AlternatingRun> {
    let psd_step = |b: &SymMatrix| -> Result<SymMatrix> {
        let p = psd_project(&-b)?;
        if p.norm() <= ZERO_PROJECTION {
            return Err(CopoError::ZeroProjection);
        }
        p.normalized()
    };
    let nonneg_step = |a: &SymMatrix| -> Result<SymMatrix> {
        let q = (-a).positive_part();
        if q.norm() <= ZERO_PROJECTION {
            return Err(CopoError::ZeroProjection);
        }
        q.normalized()
    };
    let mut b = b0.clone();
    let mut a = psd_step(&b)?;
    let mut inner = a.dot(&b)?;
    let mut min_seen = inner;
    let mut trajectory = vec![inner];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_outer_iter {
        iterations += 1;
        let start = inner;
        let cand_b = nonneg_step(&a)?;
        let ib = a.dot(&cand_b)?;
        min_seen = min_seen.min(ib);
        if ib <= inner {
            b = cand_b;
            inner = ib;
            trajectory.push(inner);
        }
        let cand_a = psd_step(&b)?;
        let ia = cand_a.dot(&b)?;
        min_seen = min_seen.min(ia);
        if ia <= inner {
            a = cand_a;
            inner = ia;
            trajectory.push(inner);
        }
        if start - inner < config.outer_tol {
            converged = true;
            break;
        }
    }
    Ok(AlternatingRun {
        pair: AnglePair::new(a, b)?,
        trajectory,
        iterations,
        converged,
        min_inner_seen: min_seen,
    })
}

/// Multistart estimate of the maximal angle between unit positive
/// semidefinite and unit nonnegative matrices of order 2 to 6.
/// `order` overrides `config.order`.
pub fn psi_search(order: usize, config: &SearchConfig) -> Result<SearchReport> {
    let config = SearchConfig { order, ..*config };
    config.validate()?;
    if !(2..=6).contains(&order) {
        return Err(CopoError::UnsupportedOrder { order, supported: "2..=6" });
    }
    let runs: Vec<(usize, Option<AlternatingRun>)> = (0..config.starts)
        .into_par_iter()
        .map(|i| {
            let run = with_retry(config.seed, i, |s| {
                let x = sample_unit_symmetric(order, &mut s.rng()).positive_part();
                if x.norm() <= ZERO_PROJECTION {
                    return Err(CopoError::ZeroProjection);
                }
                psi_alternating(&x.normalized()?, &config)
            })?;
            Ok((i, run))
        })
        .collect::<Result<_>>()?;
    assemble(config, runs)
}

/// Central-difference gradient and symmetrized Hessian of `f` at `point`.
pub fn fd_derivatives(
    f: impl Fn(&[f64]) -> Result<f64>,
    point: &[f64],
    step: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let k = point.len();
    let eval = |offsets: &[(usize, f64)]| -> Result<f64> {
        let mut x = point.to_vec();
        for &(i, d) in offsets {
            x[i] += d;
        }
        match f(&x) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) | Err(_) => {
                Err(CopoError::DomainError(format!("function undefined at stencil point {x:?}")))
            }
        }
    };
    let h = step;
    let f0 = eval(&[])?;
    let mut grad = vec![0.0; k];
    let mut hess = vec![vec![0.0; k]; k];
    for i in 0..k {
        let fp = eval(&[(i, h)])?;
        let fm = eval(&[(i, -h)])?;
        grad[i] = (fp - fm) / (2.0 * h);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in (0..k).filter(|&j| j != i) {
            let fpp = eval(&[(i, h), (j, h)])?;
            let fpm = eval(&[(i, h), (j, -h)])?;
            let fmp = eval(&[(i, -h), (j, h)])?;
            let fmm = eval(&[(i, -h), (j, -h)])?;
            hess[i][j] = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            let s = 0.5 * (hess[i][j] + hess[j][i]);
            hess[i][j] = s;
            hess[j][i] = s;
        }
    }
    Ok((grad, hess))
}
