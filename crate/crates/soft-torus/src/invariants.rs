//! Obstruction invariants of a unitary pair: commutator defect, the
//! multiplicative commutator `w = u v u* v*`, branch-cut winding numbers,
//! the bott integer extracted from the positive element `e(u, v)`, the
//! trace-formula consistency check between the two, the trace
//! determinant, and the scalar-commutator structure check.

use crate::error::{Error, Result};
use crate::generators::UnitaryPair;
use crate::matcore::{
    herm_eig, log_unitary, op_distance, operator_norm, polar_unitary, unitary_eig, CMatrix, C64,
    ONE,
};
pub use crate::matcore::BranchCut;
use num_complex::Complex;
use std::f64::consts::TAU;

/// Trace normalization: `normalized` sends the identity to 1,
/// `unnormalized` sends it to the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Normalized,
    Unnormalized,
}

impl TraceKind {
    pub fn apply(&self, trace: C64, n: usize) -> C64 {
        match self {
            TraceKind::Normalized => trace / n as f64,
            TraceKind::Unnormalized => trace,
        }
    }
}

/// The three circle functions entering `e(u, v)`, evaluated at the
/// angle fraction `t in [0, 1)`:
///
/// * `f` is the piecewise-linear tent with `f(1) = 1`, `f(-1) = 0`;
/// * `g = sqrt(f - f^2)` on the upper semicircle, zero below;
/// * `h = sqrt(f - f^2)` on the lower semicircle, zero above.
///
/// Pointwise, `g h = 0` and `g^2 + h^2 = f - f^2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FghTable;

impl FghTable {
    pub fn f(&self, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        if t <= 0.5 {
            1.0 - 2.0 * t
        } else {
            2.0 * t - 1.0
        }
    }

    pub fn g(&self, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        if t <= 0.5 {
            let f = self.f(t);
            (f - f * f).max(0.0).sqrt()
        } else {
            0.0
        }
    }

    pub fn h(&self, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        if t <= 0.5 {
            0.0
        } else {
            let f = self.f(t);
            (f - f * f).max(0.0).sqrt()
        }
    }
}

/// Everything the bott computation produces: the commutator, the gap of
/// `e(u, v)` at 1/2, the eigenvalue count above 1/2 and the resulting
/// integer, plus the winding number and its discrepancy from the bott
/// integer when the principal-branch logarithm applies.
#[derive(Debug, Clone)]
pub struct BottReport {
    pub n: usize,
    pub w: CMatrix,
    pub gap: f64,
    pub rank_above: usize,
    pub bott: i64,
    pub winding_unnormalized: Option<f64>,
    pub exel_discrepancy: Option<f64>,
}

impl BottReport {
    /// Trace-formula verdict: discrepancy below 1e-6.
    pub fn exel_pass(&self) -> Option<bool> {
        self.exel_discrepancy.map(|d| d < 1e-6)
    }
}

/// `||u v - e^{2 pi i theta} v u||` against the pair's own angle.
pub fn defect(pair: &UnitaryPair) -> f64 {
    let uv = pair.u() * pair.v();
    let vu = (pair.v() * pair.u()).scale(pair.lambda());
    op_distance(&uv, &vu)
}

/// Multiplicative commutator `w = u v u* v*`, re-unitarized when the
/// accumulated drift exceeds 1e-12. `det(w) = 1`, so any branch
/// logarithm of `w` has trace in `2 pi i Z`.
pub fn mult_commutator(pair: &UnitaryPair) -> CMatrix {
    let w = &(&(pair.u() * pair.v()) * &pair.u().adjoint()) * &pair.v().adjoint();
    let drift = w.unitary_defect();
    if drift > 1e-12 {
        if let Ok(p) = polar_unitary(&w) {
            return p;
        }
    }
    w
}

/// Winding number `(1/2 pi i) tr(log w)` of the multiplicative
/// commutator under the chosen branch cut and trace normalization.
/// For the unnormalized trace the value is an integer whenever the
/// branch applies.
pub fn winding(pair: &UnitaryPair, cut: BranchCut, tk: TraceKind) -> Result<f64> {
    let w = mult_commutator(pair);
    let l = log_unitary(&w, cut)?;
    let t = tk.apply(l.trace(), pair.n());
    Ok(t.im / TAU)
}

/// The 2n x 2n self-adjoint element
/// `e(u,v) = [[f(u), g(u) + h(u) v*], [g(u) + v h(u), 1 - f(u)]]`,
/// built by exact functional calculus on the eigensystem of `u`.
pub fn e_of_pair(pair: &UnitaryPair) -> Result<CMatrix> {
    let n = pair.n();
    let table = FghTable;
    let es = unitary_eig(pair.u())?;
    let fractions: Vec<f64> = es
        .values
        .iter()
        .map(|z| {
            let a = z.arg();
            (if a < 0.0 { a + TAU } else { a }) / TAU
        })
        .collect();
    let calc = |func: &dyn Fn(f64) -> f64| -> CMatrix {
        let d = CMatrix::diag(
            &fractions
                .iter()
                .map(|&t| Complex::new(func(t), 0.0))
                .collect::<Vec<_>>(),
        );
        &(&es.vectors * &d) * &es.vectors.adjoint()
    };
    let fu = calc(&|t| table.f(t));
    let gu = calc(&|t| table.g(t));
    let hu = calc(&|t| table.h(t));

    let upper_right = &gu + &(&hu * &pair.v().adjoint());
    let lower_left = &gu + &(pair.v() * &hu);
    let mut e = CMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            e[(i, j)] = fu[(i, j)];
            e[(i, n + j)] = upper_right[(i, j)];
            e[(n + i, j)] = lower_left[(i, j)];
            e[(n + i, n + j)] = -fu[(i, j)];
        }
        e[(n + i, n + i)] += ONE;
    }
    // symmetrize rounding
    Ok((&e + &e.adjoint()).scale(Complex::new(0.5, 0.0)))
}

/// Independent second route to the rank of the spectral projection of
/// `e` above 1/2: trace of the matrix sign of `2e - I` through the
/// scaled Newton-Schulz iteration, no eigendecomposition involved.
fn rank_above_via_sign(e: &CMatrix) -> Option<i64> {
    let two_n = e.n();
    let shifted = {
        let mut s = e.scale(Complex::new(2.0, 0.0));
        for i in 0..two_n {
            s[(i, i)] -= ONE;
        }
        s
    };
    let alpha = operator_norm(&shifted);
    if alpha == 0.0 {
        return None;
    }
    let mut x = shifted.scale(Complex::new(1.0 / alpha, 0.0));
    for _ in 0..60 {
        let sq = &x * &x;
        let resid = {
            let mut r = sq.clone();
            for i in 0..two_n {
                r[(i, i)] -= ONE;
            }
            r.frobenius_norm()
        };
        if resid <= 1e-12 {
            let tr = x.trace().re;
            let rank = (two_n as f64 + tr) / 2.0;
            return Some(rank.round() as i64);
        }
        // X <- X (3I - X^2) / 2
        let mut corr = sq.scale(Complex::new(-0.5, 0.0));
        for i in 0..two_n {
            corr[(i, i)] += Complex::new(1.5, 0.0);
        }
        x = &x * &corr;
    }
    None
}

/// Bott integer of a pair: eigenvalue count of `e(u, v)` above 1/2,
/// minus n. Errs with `GapTooSmall` when the spectrum comes within
/// `gap_policy` of 1/2 (the regime where the integer is not defined),
/// and cross-checks the count against the sign-function trace.
pub fn bott_pair(pair: &UnitaryPair, gap_policy: f64) -> Result<BottReport> {
    let n = pair.n();
    let e = e_of_pair(pair)?;
    let es = herm_eig(&e)?;
    let gap = es
        .values
        .iter()
        .map(|&x| (x - 0.5).abs())
        .fold(f64::INFINITY, f64::min);
    if gap < gap_policy {
        return Err(Error::GapTooSmall {
            gap,
            policy: gap_policy,
        });
    }
    let rank_above = es.values.iter().filter(|&&x| x > 0.5).count();
    let bott = rank_above as i64 - n as i64;
    if let Some(rank_traced) = rank_above_via_sign(&e) {
        let traced = rank_traced - n as i64;
        if traced != bott {
            return Err(Error::CrossCheckFailed {
                counted: bott,
                traced,
            });
        }
    }
    let w = mult_commutator(pair);
    let winding_unnormalized = log_unitary(&w, BranchCut::principal())
        .ok()
        .map(|l| l.trace().im / TAU);
    let exel_discrepancy = winding_unnormalized.map(|wd| (bott as f64 - wd).abs());
    Ok(BottReport {
        n,
        w,
        gap,
        rank_above,
        bott,
        winding_unnormalized,
        exel_discrepancy,
    })
}

pub const DEFAULT_GAP_POLICY: f64 = 0.05;

/// Trace-formula check: the bott integer and the principal-branch
/// unnormalized winding number computed independently, with their
/// discrepancy. Unlike [`bott_pair`], a failing principal branch is an
/// error here rather than a missing field.
pub fn exel_check(pair: &UnitaryPair, gap_policy: f64) -> Result<BottReport> {
    let report = bott_pair(pair, gap_policy)?;
    if report.winding_unnormalized.is_none() {
        // recompute to surface the branch error
        let w = mult_commutator(pair);
        log_unitary(&w, BranchCut::principal())?;
    }
    Ok(report)
}

/// Both sides of the power identity for the lifted pair
/// `(U, V) = tensor_lift(pair, theta)`: returns
/// `(bott(U^q, V^q), q^2 bott(U, V))`.
pub fn bott_power_identity(
    pair: &UnitaryPair,
    theta: crate::generators::RationalAngle,
    gap_policy: f64,
) -> Result<(i64, i64)> {
    let q = theta.q();
    let lift = crate::generators::tensor_lift(pair, theta);
    let lifted = bott_pair(&lift, gap_policy)?;
    let powered = UnitaryPair::new(
        lift.u().pow(q as u64),
        lift.v().pow(q as u64),
        crate::generators::Angle::ZERO,
    )?;
    let power_report = bott_pair(&powered, gap_policy)?;
    Ok((power_report.bott, q * q * lifted.bott))
}

/// Structure check for pairs whose commutator is central: reports the
/// winding-derived angle estimate and the residual `||w - e^{2 pi i
/// theta_hat} I||`. Errs with `NotCentral` if `w` fails to commute with
/// `u` and `v` within `tol`.
pub fn scalar_commutator_check(pair: &UnitaryPair, tol: f64) -> Result<(f64, f64)> {
    let w = mult_commutator(pair);
    let cu = op_distance(&(&w * pair.u()), &(pair.u() * &w));
    let cv = op_distance(&(&w * pair.v()), &(pair.v() * &w));
    let central_defect = cu.max(cv);
    if central_defect > tol {
        return Err(Error::NotCentral {
            defect: central_defect,
            tol,
        });
    }
    let theta_hat = winding(pair, BranchCut::principal(), TraceKind::Normalized)?;
    let scalar = CMatrix::scalar(pair.n(), crate::matcore::unit_phase(theta_hat));
    let residual = op_distance(&w, &scalar);
    Ok((theta_hat, residual))
}

/// de la Harpe/Exel determinant `exp(tr(log u))` under the chosen trace:
/// the ordinary determinant for the unnormalized trace, an n-th root of
/// it for the normalized one.
pub fn determinant_tau(u: &CMatrix, tk: TraceKind) -> Result<C64> {
    let l = log_unitary(u, BranchCut::principal())?;
    Ok(tk.apply(l.trace(), u.n()).exp())
}
