//! Closed-form matrices, pairs and bounds from the case analysis of
//! order-3 copositive pairs, labelled by the sign case `(a, b)`: the counts
//! of negative entries above the diagonal of each member.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::eigen::eigendecompose;
use crate::error::{CopoError, Result};
use crate::sym::{clamped_acos, SymMatrix};

/// A pair of unit-norm matrices with their inner product and angle.
#[derive(Debug, Clone, Serialize)]
pub struct AnglePair {
    pub a: SymMatrix,
    pub b: SymMatrix,
    pub inner: f64,
    pub angle: f64,
}

impl AnglePair {
    /// Pairs two matrices that are already unit-norm.
    pub fn new(a: SymMatrix, b: SymMatrix) -> Result<Self> {
        let inner = a.dot(&b)?;
        Ok(AnglePair { a, b, inner, angle: clamped_acos(inner) })
    }

    /// Normalizes both members first.
    pub fn normalized(a: &SymMatrix, b: &SymMatrix) -> Result<Self> {
        Self::new(a.normalized()?, b.normalized()?)
    }

    pub fn swapped(&self) -> AnglePair {
        AnglePair { a: self.b.clone(), b: self.a.clone(), inner: self.inner, angle: self.angle }
    }

    /// Both members simultaneously permuted.
    pub fn permuted(&self, p: &[usize]) -> AnglePair {
        AnglePair { a: self.a.permuted(p), b: self.b.permuted(p), inner: self.inner, angle: self.angle }
    }
}

/// The one-parameter family of maximal-angle pairs of order 3, with
/// `a22 + a33 = 1/2`:
///
/// ```text
/// A = [ 1/2          -sqrt(a22/2)   -sqrt(a33/2) ]    B = [ 0          sqrt(a22)  sqrt(a33) ]
///     [ -sqrt(a22/2)  a22            sqrt(a22 a33)]        [ sqrt(a22)  0          0         ]
///     [ -sqrt(a33/2)  sqrt(a22 a33)  a33          ]        [ sqrt(a33)  0          0         ]
/// ```
pub fn theorem_family_pair(a22: f64) -> Result<AnglePair> {
    if !(0.0..=0.5).contains(&a22) {
        return Err(CopoError::DomainError(format!("a22 = {a22} outside [0, 1/2]")));
    }
    let a33 = 0.5 - a22;
    let (r22, r33) = (a22.sqrt(), a33.sqrt());
    let a = SymMatrix::from_rows(&[
        [0.5, -(a22 / 2.0).sqrt(), -(a33 / 2.0).sqrt()],
        [-(a22 / 2.0).sqrt(), a22, (a22 * a33).sqrt()],
        [-(a33 / 2.0).sqrt(), (a22 * a33).sqrt(), a33],
    ])?;
    let b = SymMatrix::from_rows(&[[0.0, r22, r33], [r22, 0.0, 0.0], [r33, 0.0, 0.0]])?;
    AnglePair::new(a, b)
}

/// Entrywise distance from an order-3 pair to the theorem family, minimized
/// over simultaneous permutations and over swapping the two members.
/// Returns the distance and the matching `a22`.
pub fn family_distance(pair: &AnglePair) -> Result<(f64, f64)> {
    if pair.a.order() != 3 {
        return Err(CopoError::OrderMismatch { left: pair.a.order(), right: 3 });
    }
    let mut best = (f64::INFINITY, 0.0);
    for (x, y) in [(&pair.a, &pair.b), (&pair.b, &pair.a)] {
        for p in PERMUTATIONS_3 {
            let (px, py) = (x.permuted(&p), y.permuted(&p));
            let a22 = px.get(1, 1).clamp(0.0, 0.5);
            let fam = theorem_family_pair(a22)?;
            let d = px.max_abs_diff(&fam.a).max(py.max_abs_diff(&fam.b));
            if d < best.0 {
                best = (d, a22);
            }
        }
    }
    Ok(best)
}

const PERMUTATIONS_3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// The maximal-angle pair of order 2, `A = [[1,-1],[-1,1]]/2`, `B = [[0,1],[1,0]]/sqrt(2)`.
pub fn order2_pair() -> AnglePair {
    let a = SymMatrix::from_rows(&[[0.5, -0.5], [-0.5, 0.5]]).expect("finite");
    let b = SymMatrix::from_rows(&[[0.0, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, 0.0]]).expect("finite");
    AnglePair::new(a, b).expect("same order")
}

/// The order-2 pair padded with a zero third row and column; the only
/// extremal pair in case `(1, 0)`.
pub fn case10_pair() -> AnglePair {
    let p = order2_pair();
    AnglePair::new(p.a.embed(3), p.b.embed(3)).expect("same order")
}

/// Case `(3, 0)`: the nonnegative unit matrix best aligned against `A`,
///
/// `B_A = -offdiag(A) / sqrt(2 (a12^2 + a13^2 + a23^2))`,
///
/// and the spectral lower bound `-sqrt(sum of negative eigenvalues^2) / sqrt(sum of all eigenvalues^2)`
/// of `B_A`, which bounds `<A', B_A>` over unit semidefinite `A'`.
pub fn case30_bound(a: &SymMatrix) -> Result<(SymMatrix, f64)> {
    if a.order() != 3 {
        return Err(CopoError::OrderMismatch { left: a.order(), right: 3 });
    }
    let off = [a.get(0, 1), a.get(0, 2), a.get(1, 2)];
    if off.iter().any(|&v| v >= 0.0) {
        return Err(CopoError::SignPatternError(format!(
            "off-diagonal entries {off:?} must all be negative"
        )));
    }
    let scale = (2.0 * off.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let b = SymMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { -a.get(i, j) / scale });
    let spec = eigendecompose(&b)?;
    let neg: f64 = spec.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| l * l).sum();
    let all: f64 = spec.eigenvalues.iter().map(|l| l * l).sum();
    Ok((b, -(neg.sqrt() / all.sqrt())))
}

/// Case `(3, 0)` family: the pair
/// `A_eps = [[1, -1+3eps, -eps], [-1+3eps, 1, -eps], [-eps, -eps, eps]]`
/// (normalized) and the padded order-2 `B`, whose angle tends to the
/// maximum as `eps -> 0`.
pub fn epsilon_family(eps: f64) -> Result<AnglePair> {
    if !(0.0..1.0 / 3.0).contains(&eps) {
        return Err(CopoError::DomainError(format!("eps = {eps} outside [0, 1/3)")));
    }
    let c = -1.0 + 3.0 * eps;
    let a = SymMatrix::from_rows(&[[1.0, c, -eps], [c, 1.0, -eps], [-eps, -eps, eps]])?;
    AnglePair::normalized(&a, &case10_pair().b)
}

/// Case `(2, 0)`: the unit semidefinite matrix attaining the bound, with
/// `a11 = 1/2`, `a22 = 2 a12^2`, `a33 = 2 a13^2`, `a23 = 2 a12 a13`.
pub fn case20_critical_a(a12: f64, a13: f64) -> Result<SymMatrix> {
    if !(a12 < 0.0 && a13 < 0.0) {
        return Err(CopoError::DomainError(format!("need a12 < 0 and a13 < 0, got ({a12}, {a13})")));
    }
    let norm = 2.0 * (a12 * a12 + a13 * a13).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(CopoError::DomainError(format!("2 sqrt(a12^2 + a13^2) = {norm}, expected 1")));
    }
    SymMatrix::from_rows(&[
        [0.5, a12, a13],
        [a12, 2.0 * a12 * a12, 2.0 * a12 * a13],
        [a13, 2.0 * a12 * a13, 2.0 * a13 * a13],
    ])
}

/// Inner product of a case-`(1, 1)` pair as a function of four diagonal entries:
///
/// `a11 b11 - sqrt(2 a11 a22) sqrt(1 - (b11 + b33)^2) - sqrt(2 b11 b33) sqrt(1 - (a11 + a22)^2)`.
pub fn case11_objective(a11: f64, a22: f64, b11: f64, b33: f64) -> Result<f64> {
    let args = [a11, a22, b11, b33];
    if args.iter().any(|v| !v.is_finite() || *v < 0.0) || a11 + a22 > 1.0 || b11 + b33 > 1.0 {
        return Err(CopoError::DomainError(format!("case (1,1) objective undefined at {args:?}")));
    }
    let sa = (1.0 - (a11 + a22).powi(2)).max(0.0).sqrt();
    let sb = (1.0 - (b11 + b33).powi(2)).max(0.0).sqrt();
    Ok(a11 * b11 - (2.0 * a11 * a22).sqrt() * sb - (2.0 * b11 * b33).sqrt() * sa)
}

/// Stationary point of the case-`(1, 1)` objective.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Case11Critical {
    pub a11: f64,
    pub a22: f64,
    pub a12: f64,
    pub a13: f64,
    pub b11: f64,
    pub b33: f64,
    pub b13: f64,
    pub b12: f64,
}

impl Case11Critical {
    /// Arguments of [`case11_objective`] at this point.
    pub fn objective_args(&self) -> [f64; 4] {
        [self.a11, self.a22, self.b11, self.b33]
    }
}

/// The unique interior critical point of case `(1, 1)`, where
/// `a11 / a22 = b11 / b33 = (sqrt 5 - 1) / 2`, and its assembled pair.
/// It is a saddle, not an antipodal pair.
pub fn case11_critical_pair() -> (Case11Critical, AnglePair) {
    let r5 = 5f64.sqrt();
    let a11 = ((7.0 * r5 - 15.0) / 10.0).sqrt();
    let a22 = ((3.0 * r5 - 5.0) / 10.0).sqrt();
    let a12 = -((5.0 - 2.0 * r5) / 5.0).sqrt();
    let a13 = ((r5 - 1.0) / (2.0 * r5)).sqrt();
    let crit = Case11Critical { a11, a22, a12, a13, b11: a11, b33: a22, b13: a12, b12: a13 };
    let a = SymMatrix::from_rows(&[[a11, a12, a13], [a12, a22, 0.0], [a13, 0.0, 0.0]]).expect("finite");
    let b = SymMatrix::from_rows(&[
        [crit.b11, crit.b12, crit.b13],
        [crit.b12, 0.0, 0.0],
        [crit.b13, 0.0, crit.b33],
    ])
    .expect("finite");
    (crit, AnglePair::new(a, b).expect("same order"))
}

/// Quantities of the case-`(2, 1)` analysis for a given `A`.
#[derive(Debug, Clone, Serialize)]
pub struct Case21Analysis {
    /// `sqrt(b33 / b22)` at the critical `B`.
    pub x: f64,
    /// The unique critical `B` for this `A`.
    pub b_a: SymMatrix,
    /// `<A, B_A> = -sqrt(h / 2)`.
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

/// Tolerance for membership in the case-`(2, 1)` domain.
pub const CASE21_TOL: f64 = 1e-10;

/// Critical nonnegative-diagonal partner of a unit `A` with
/// `-sqrt(a11 a22) <= a12 < 0`, `-sqrt(a11 a33) <= a13 < 0` and
/// `a23 > sqrt(a22 a33)`. `B_A` has `b11 = 0` and `b23 = -sqrt(b22 b33)`.
pub fn case21_analysis(a: &SymMatrix) -> Result<Case21Analysis> {
    if a.order() != 3 {
        return Err(CopoError::OrderMismatch { left: a.order(), right: 3 });
    }
    let tol = CASE21_TOL;
    let (a11, a22, a33) = (a.get(0, 0), a.get(1, 1), a.get(2, 2));
    let (a12, a13, a23) = (a.get(0, 1), a.get(0, 2), a.get(1, 2));
    let fail = |what: &str| Err(CopoError::DomainError(format!("case (2,1) domain: {what}")));
    if (a.norm() - 1.0).abs() > tol {
        return fail("A must have unit norm");
    }
    if !(a11 > tol && a22 > tol && a33 > tol) {
        return fail("diagonal must be positive");
    }
    if !(a12 < -tol && a12 >= -(a11 * a22).sqrt() - tol) {
        return fail("need -sqrt(a11 a22) <= a12 < 0");
    }
    if !(a13 < -tol && a13 >= -(a11 * a33).sqrt() - tol) {
        return fail("need -sqrt(a11 a33) <= a13 < 0");
    }
    if a23 <= (a22 * a33).sqrt() + tol {
        return fail("need a23 > sqrt(a22 a33)");
    }

    let disc = ((a33 - a22).powi(2) + 4.0 * a23 * a23).sqrt();
    let x = (a22 - a33 + disc) / (2.0 * a23);
    let lead = a22 - a23 * x;
    let b12 = -a12 / (lead * lead + 2.0 * a12 * a12 + 2.0 * a13 * a13).sqrt();
    let b13 = b12 * a13 / a12;
    let b22 = b12 * lead / (a12 * (1.0 + x * x));
    let b33 = b22 * x * x;
    let b23 = -(b22 * b33).sqrt();
    let b_a = SymMatrix::from_rows(&[[0.0, b12, b13], [b12, b22, b23], [b13, b23, b33]])?;

    let spread = (a22 + a33) * disc;
    let h = a22 * a22 + a33 * a33 + 4.0 * a12 * a12 + 4.0 * a13 * a13 + 2.0 * a23 * a23 - spread;
    let g = 2.0 * a11 * a11 + a22 * a22 + a33 * a33 + 2.0 * a23 * a23 + spread;
    let f = -(h.max(0.0) / 2.0).sqrt();
    Ok(Case21Analysis { x, b_a, f, g, h })
}
