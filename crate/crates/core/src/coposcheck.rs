//! Copositivity decisions for small orders.
//!
//! Orders one to three are decided exactly from closed-form inequalities on
//! the entries. Any order can be probed by exhaustive minimization of the
//! quadratic form over a lattice on the standard simplex, and orders up to
//! four admit a distance to the copositive cone through its
//! semidefinite-plus-nonnegative decomposition.

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{eigendecompose, psd_project};
use crate::error::{CopoError, Result};
use crate::sym::SymMatrix;

/// Default slack tolerance for the exact tests.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Square-root arguments in `[-SQRT_CLAMP, 0)` are treated as zero.
pub const SQRT_CLAMP: f64 = 1e-14;

/// Largest simplex lattice the oracle will enumerate.
pub const LATTICE_CAP: u128 = 100_000_000;

/// Lattice resolution used when searching for a violating simplex point.
const WITNESS_RESOLUTION: u32 = 60;

/// What backs a membership decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Slack of every defining inequality (all above `-tol`).
    InequalitySlacks { slacks: Vec<f64> },
    /// A point `x >= 0`, `sum x = 1`, with `x^T A x = value < 0`.
    Witness { x: Vec<f64>, value: f64 },
    /// No violating point was located; names the first failed inequality.
    ViolatedInequality { index: usize, slacks: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CopositivityVerdict {
    pub member: bool,
    /// Smallest signed slack among the inequalities that decide membership.
    pub margin: f64,
    pub certificate: Certificate,
}

impl CopositivityVerdict {
    pub fn witness(&self) -> Option<(&[f64], f64)> {
        match &self.certificate {
            Certificate::Witness { x, value } => Some((x, *value)),
            _ => None,
        }
    }
}

/// Number of strictly negative entries above the diagonal of an order-3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CaseSignature {
    pub negatives_above_diagonal: u8,
}

/// Off-diagonal entries divided by the geometric means of their diagonal pair:
/// `a12 = alpha sqrt(a11 a22)`, `a13 = beta sqrt(a11 a33)`, `a23 = gamma sqrt(a22 a33)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn require_order3(a: &SymMatrix) -> Result<()> {
    if a.order() != 3 {
        Err(CopoError::OrderMismatch { left: a.order(), right: 3 })
    } else {
        Ok(())
    }
}

pub fn classify_signs(a: &SymMatrix) -> Result<CaseSignature> {
    require_order3(a)?;
    let count = [(0, 1), (0, 2), (1, 2)].iter().filter(|&&(i, j)| a.get(i, j) < 0.0).count();
    Ok(CaseSignature { negatives_above_diagonal: count as u8 })
}

pub fn scaled_params(a: &SymMatrix) -> Result<ScaledParams> {
    require_order3(a)?;
    let d = a.diag();
    if let Some(index) = d.iter().position(|&v| v <= 0.0) {
        return Err(CopoError::NonpositiveDiagonal { index });
    }
    Ok(ScaledParams {
        alpha: a.get(0, 1) / (d[0] * d[1]).sqrt(),
        beta: a.get(0, 2) / (d[0] * d[2]).sqrt(),
        gamma: a.get(1, 2) / (d[1] * d[2]).sqrt(),
    })
}

/// Determinant of an order-3 matrix.
pub fn det3(a: &SymMatrix) -> f64 {
    let (a11, a22, a33) = (a.get(0, 0), a.get(1, 1), a.get(2, 2));
    let (a12, a13, a23) = (a.get(0, 1), a.get(0, 2), a.get(1, 2));
    a11 * (a22 * a33 - a23 * a23) - a12 * (a12 * a33 - a23 * a13) + a13 * (a12 * a23 - a22 * a13)
}

#[inline]
fn root(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

fn sqrt_clamped(x: f64, index: usize) -> Result<f64> {
    if x >= 0.0 {
        Ok(x.sqrt())
    } else if x >= -SQRT_CLAMP {
        Ok(0.0)
    } else {
        Err(CopoError::NonnegativeDiagonalViolated { index, value: x })
    }
}

/// Slacks of the defining inequalities.
///
/// Order 3 yields seven values: the three diagonal entries, the three
/// `a_ij + sqrt(a_ii a_jj)`, and the last inequality in its disjunctive form
/// `max(det A, sqrt(a11 a22 a33) + a12 sqrt(a33) + a13 sqrt(a22) + a23 sqrt(a11))`.
pub fn inequality_slacks(a: &SymMatrix) -> Result<Vec<f64>> {
    match a.order() {
        1 => Ok(vec![a.get(0, 0)]),
        2 => {
            let (a11, a22) = (a.get(0, 0), a.get(1, 1));
            Ok(vec![a11, a22, a.get(0, 1) + root(a11 * a22)])
        }
        3 => {
            let (a11, a22, a33) = (a.get(0, 0), a.get(1, 1), a.get(2, 2));
            let (a12, a13, a23) = (a.get(0, 1), a.get(0, 2), a.get(1, 2));
            let linear = root(a11 * a22 * a33) + a12 * root(a33) + a13 * root(a22) + a23 * root(a11);
            Ok(vec![
                a11,
                a22,
                a33,
                a12 + root(a11 * a22),
                a13 + root(a11 * a33),
                a23 + root(a22 * a33),
                det3(a).max(linear),
            ])
        }
        n => Err(CopoError::UnsupportedOrder { order: n, supported: "1..=3" }),
    }
}

/// Exact copositivity test for orders 1 to 3.
pub fn is_copositive(a: &SymMatrix, tol: f64) -> Result<CopositivityVerdict> {
    let slacks = inequality_slacks(a)?;
    let margin = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    let member = slacks.iter().all(|&s| s >= -tol);
    if member {
        return Ok(CopositivityVerdict {
            member,
            margin,
            certificate: Certificate::InequalitySlacks { slacks },
        });
    }
    let index = slacks.iter().position(|&s| s < -tol).expect("some slack fails");
    Ok(CopositivityVerdict { member, margin, certificate: violation_certificate(a, index, slacks) })
}

fn violation_certificate(a: &SymMatrix, index: usize, slacks: Vec<f64>) -> Certificate {
    match find_witness(a) {
        Some((x, value)) => Certificate::Witness { x, value },
        None => Certificate::ViolatedInequality { index, slacks },
    }
}

/// Grid search followed by pairwise mass-exchange descent on the simplex.
fn find_witness(a: &SymMatrix) -> Option<(Vec<f64>, f64)> {
    let grid = simplex_oracle(a, WITNESS_RESOLUTION).ok()?;
    if grid.value >= 0.0 {
        return None;
    }
    let (mut x, mut value) = (grid.argmin, grid.value);
    let n = a.order();
    for _pass in 0..100 {
        let before = value;
        for i in 0..n {
            for j in 0..n {
                if i == j || x[j] == 0.0 {
                    continue;
                }
                // Move mass t from j to i: q(t) = q0 + 2 t (Ax)_i - 2 t (Ax)_j + t^2 (a_ii - 2 a_ij + a_jj)
                let ax_i: f64 = (0..n).map(|k| a.get(i, k) * x[k]).sum();
                let ax_j: f64 = (0..n).map(|k| a.get(j, k) * x[k]).sum();
                let lin = 2.0 * (ax_i - ax_j);
                let curv = a.get(i, i) - 2.0 * a.get(i, j) + a.get(j, j);
                let t_max = x[j];
                let t = if curv > 0.0 {
                    (-lin / (2.0 * curv)).clamp(0.0, t_max)
                } else if lin < 0.0 || curv < 0.0 {
                    // Concave or descending: best at an end point.
                    if lin * t_max + curv * t_max * t_max < 0.0 {
                        t_max
                    } else {
                        0.0
                    }
                } else {
                    0.0
                };
                if t > 0.0 {
                    let mut y = x.clone();
                    y[i] += t;
                    y[j] -= t;
                    let v = a.quadratic_form(&y);
                    if v < value {
                        x = y;
                        value = v;
                    }
                }
            }
        }
        if before - value <= 1e-16 {
            break;
        }
    }
    Some((x, value))
}

/// Copositivity of an order-3 matrix by its count of negative off-diagonal entries.
///
/// The matrix is first permuted so that the negative entries sit at `(1,2)`
/// and then `(1,3)`. With `a` negatives: `a = 0` is always copositive;
/// `a = 1` needs `a12 >= -sqrt(a11 a22)`; `a = 2` needs `alpha, beta >= -1`
/// and `gamma >= alpha beta - sqrt((1 - alpha^2)(1 - beta^2))`; `a = 3`
/// reduces to positive semidefiniteness.
pub fn is_copositive_by_case(a: &SymMatrix, tol: f64) -> Result<CopositivityVerdict> {
    if a.order() != 3 {
        return Err(CopoError::UnsupportedOrder { order: a.order(), supported: "3" });
    }
    for i in 0..3 {
        let v = a.get(i, i);
        if v < -tol {
            return Err(CopoError::NonnegativeDiagonalViolated { index: i, value: v });
        }
    }
    let b = a.permuted(&canonical_permutation(a));
    let mut b = b;
    for i in 0..3 {
        if b.get(i, i) < 0.0 {
            b.set(i, i, 0.0);
        }
    }
    let sig = classify_signs(&b)?;
    let (b11, b22, b33) = (b.get(0, 0), b.get(1, 1), b.get(2, 2));
    let (b12, b13, b23) = (b.get(0, 1), b.get(0, 2), b.get(1, 2));

    let slacks: Vec<f64> = match sig.negatives_above_diagonal {
        0 => vec![b11, b22, b33],
        1 => vec![b12 + sqrt_clamped(b11 * b22, 0)?],
        2 => {
            if b11 > 0.0 && b22 > 0.0 && b33 > 0.0 {
                let p = scaled_params(&b)?;
                let mut s = vec![p.alpha + 1.0, p.beta + 1.0];
                if p.alpha >= -1.0 && p.beta >= -1.0 {
                    let r = sqrt_clamped((1.0 - p.alpha * p.alpha) * (1.0 - p.beta * p.beta), 0)?;
                    s.push(p.gamma - (p.alpha * p.beta - r));
                }
                s
            } else {
                // Same rule multiplied through by b11 sqrt(b22 b33), valid on a zero diagonal.
                let mut s = vec![b12 + sqrt_clamped(b11 * b22, 0)?, b13 + sqrt_clamped(b11 * b33, 0)?];
                if s.iter().all(|&v| v >= -tol) {
                    let r = sqrt_clamped((b11 * b22 - b12 * b12) * (b11 * b33 - b13 * b13), 0)?;
                    s.push(b11 * b23 - (b12 * b13 - r));
                }
                s
            }
        }
        3 => vec![eigendecompose(&b)?.min()],
        _ => unreachable!("three entries above the diagonal"),
    };
    let margin = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    if slacks.iter().all(|&s| s >= -tol) {
        Ok(CopositivityVerdict {
            member: true,
            margin,
            certificate: Certificate::InequalitySlacks { slacks },
        })
    } else {
        let index = slacks.iter().position(|&s| s < -tol).expect("some slack fails");
        Ok(CopositivityVerdict {
            member: false,
            margin,
            certificate: violation_certificate(a, index, slacks),
        })
    }
}

const PERMS3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Simultaneous permutation that places negative off-diagonal entries first
/// at `(1,2)`, then `(1,3)`; ties go to the most negative entries, then to
/// the earliest permutation.
pub fn canonical_permutation(a: &SymMatrix) -> [usize; 3] {
    let key = |p: &[usize; 3]| {
        let e = [a.get(p[0], p[1]), a.get(p[0], p[2]), a.get(p[1], p[2])];
        (e.map(|v| v < 0.0), e)
    };
    let mut best = PERMS3[0];
    let mut best_key = key(&best);
    for p in &PERMS3[1..] {
        let k = key(p);
        let better = match k.0.cmp(&best_key.0) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                k.1.iter().zip(&best_key.1).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
            }
        };
        if better {
            best = *p;
            best_key = k;
        }
    }
    best
}

/// Minimum of `x^T A x` over the simplex lattice `x = k / resolution`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexMin {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Lattice coordinates `k` of the minimizer, summing to the resolution.
    pub counts: Vec<u32>,
}

/// Number of lattice points `C(r + n - 1, n - 1)`.
pub fn lattice_size(n: usize, resolution: u32) -> u128 {
    let (top, k) = (resolution as u128 + n as u128 - 1, n as u128 - 1);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (top - i) / (i + 1);
        if c > LATTICE_CAP * 1000 {
            return c;
        }
    }
    c
}

/// Exhaustive minimum of the quadratic form over the simplex lattice.
///
/// Ties resolve to the lexicographically smallest `k`, so the result does
/// not depend on how the first coordinate is split across threads.
pub fn simplex_oracle(a: &SymMatrix, resolution: u32) -> Result<SimplexMin> {
    if resolution == 0 {
        return Err(CopoError::DomainError("simplex resolution must be at least 1".into()));
    }
    let n = a.order();
    let points = lattice_size(n, resolution);
    if points > LATTICE_CAP {
        return Err(CopoError::ResourceCap { points, cap: LATTICE_CAP });
    }
    let full = a.to_rows();
    let r = resolution;
    let best = (0..=r)
        .into_par_iter()
        .map(|k0| {
            let mut k = vec![0u32; n];
            k[0] = k0;
            let mut best: Option<(f64, Vec<u32>)> = None;
            enumerate_tail(&full, &mut k, 1, r - k0, &mut best);
            best
        })
        .flatten()
        .reduce_with(|x, y| if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x })
        .expect("nonempty lattice");
    let scale = 1.0 / (r as f64 * r as f64);
    Ok(SimplexMin {
        value: best.0 * scale,
        argmin: best.1.iter().map(|&c| c as f64 / r as f64).collect(),
        counts: best.1,
    })
}

fn enumerate_tail(
    full: &[Vec<f64>],
    k: &mut Vec<u32>,
    pos: usize,
    left: u32,
    best: &mut Option<(f64, Vec<u32>)>,
) {
    let n = k.len();
    if pos == n {
        if left != 0 {
            return;
        }
        let mut v = 0.0;
        for i in 0..n {
            if k[i] == 0 {
                continue;
            }
            let ki = k[i] as f64;
            v += full[i][i] * ki * ki;
            for j in i + 1..n {
                v += 2.0 * full[i][j] * ki * k[j] as f64;
            }
        }
        let better = match best {
            None => true,
            Some((bv, bk)) => v < *bv || (v == *bv && k.as_slice() < bk.as_slice()),
        };
        if better {
            *best = Some((v, k.clone()));
        }
        return;
    }
    if pos == n - 1 {
        k[pos] = left;
        enumerate_tail(full, k, pos + 1, 0, best);
        k[pos] = 0;
        return;
    }
    for c in 0..=left {
        k[pos] = c;
        enumerate_tail(full, k, pos + 1, left - c, best);
    }
    k[pos] = 0;
}

/// Result of projecting onto `P_n + N_n`.
#[derive(Debug, Clone, Serialize)]
pub struct ConeDecomposition {
    /// `|A - P - N|` at the final iterate.
    pub distance: f64,
    /// Positive semidefinite part.
    pub psd: SymMatrix,
    /// Entrywise nonnegative part.
    pub nonneg: SymMatrix,
    pub iterations: usize,
    pub converged: bool,
}

impl ConeDecomposition {
    /// The cone projection `P + N`.
    pub fn projection(&self) -> SymMatrix {
        &self.psd + &self.nonneg
    }
}

pub const DIST_DEFAULT_TOL: f64 = 1e-12;
pub const DIST_DEFAULT_MAX_ITER: usize = 100_000;

/// Distance from `A` to the copositive cone for orders up to 4, where the
/// cone equals the sum of the semidefinite and nonnegative cones.
pub fn dist_to_copositive(a: &SymMatrix, tol: f64, max_iter: usize) -> Result<ConeDecomposition> {
    block_descent(a, tol, max_iter, |_| {})
}

/// Block-coordinate descent on `|A - P - N|^2`.
///
/// For fixed `P` the best `N` is `max(A - P, 0)`, leaving the residual
/// `min(A - P, 0)`; the `P` block is then a projected gradient step
/// `P <- psd_project(A - N)`. Steps are extrapolated with Nesterov momentum,
/// a step is kept only when it lowers the objective, and momentum restarts
/// whenever one is rejected, so the recorded objective never increases.
///
/// Entrywise nonnegative and positive semidefinite inputs split exactly.
/// `on_iter` sees the objective after every sweep.
pub fn block_descent(
    a: &SymMatrix,
    tol: f64,
    max_iter: usize,
    mut on_iter: impl FnMut(f64),
) -> Result<ConeDecomposition> {
    let n = a.order();
    if n > 4 {
        return Err(CopoError::UnsupportedOrder { order: n, supported: "1..=4" });
    }
    if a.is_entrywise_nonnegative() {
        on_iter(0.0);
        return Ok(exact_split(SymMatrix::zeros(n), a.clone()));
    }
    let spec = eigendecompose(a)?;
    if spec.min() >= 0.0 {
        on_iter(0.0);
        return Ok(exact_split(a.clone(), SymMatrix::zeros(n)));
    }

    let objective = |p: &SymMatrix| {
        let r = (a - p).map(|v| v.min(0.0));
        r.dot(&r).expect("same order")
    };
    let mut p = spec.reconstruct_with(|l| l.max(0.0));
    let mut obj = objective(&p);
    on_iter(obj);
    let threshold = tol * tol;
    let mut y = p.clone();
    let mut t = 1.0f64;
    let mut iterations = 0;
    let mut converged = obj == 0.0;
    while !converged && iterations < max_iter {
        iterations += 1;
        let plain = t == 1.0;
        let nn = (a - &y).positive_part();
        let z = psd_project(&(a - &nn))?;
        let fz = objective(&z);
        // Plain steps descend in exact arithmetic and are always kept.
        if plain || fz <= obj {
            let stalled = obj - fz < threshold;
            let step = (&z - &p).norm();
            let prev = std::mem::replace(&mut p, z);
            obj = obj.min(fz);
            if plain && stalled && step <= tol {
                converged = true;
            } else if stalled && !plain {
                // Stalled under momentum: confirm with a plain step.
                y = p.clone();
                t = 1.0;
            } else {
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                y = &p + &(&(&p - &prev) * ((t - 1.0) / t_next));
                t = t_next;
            }
        } else {
            // Rejected extrapolation: restart from the kept iterate.
            y = p.clone();
            t = 1.0;
        }
        on_iter(obj);
    }
    let nn = (a - &p).positive_part();
    Ok(ConeDecomposition { distance: obj.sqrt(), psd: p, nonneg: nn, iterations, converged })
}

fn exact_split(psd: SymMatrix, nonneg: SymMatrix) -> ConeDecomposition {
    ConeDecomposition { distance: 0.0, psd, nonneg, iterations: 0, converged: true }
}
