//! Eigendecomposition (cyclic Jacobi), unitary diagonalization and the
//! branch-cut matrix logarithm.

use super::{polar_unitary, CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};
use num_complex::Complex;
use std::f64::consts::{PI, TAU};

/// Eigendecomposition `A = V diag(values) V*`. Columns of `vectors` are
/// the eigenvectors; `values` is `f64` for Hermitian input and unit
/// `C64` for unitary input.
#[derive(Debug, Clone)]
pub struct EigenSystem<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix,
}

impl EigenSystem<f64> {
    /// `V diag(values) V*`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::diag(
            &self
                .values
                .iter()
                .map(|&x| Complex::new(x, 0.0))
                .collect::<Vec<_>>(),
        );
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

impl EigenSystem<C64> {
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::diag(&self.values);
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

/// Cyclic Jacobi on a Hermitian matrix. Eigenvalues ascending, ties kept
/// in sweep order. Assumes (and enforces) exact Hermitian symmetry.
pub(super) fn jacobi_hermitian(h: &CMatrix) -> EigenSystem<f64> {
    let n = h.n();
    let mut a = (h + &h.adjoint()).scale(Complex::new(0.5, 0.0));
    let mut v = CMatrix::identity(n);
    let hnorm = a.frobenius_norm();
    let stop = 1e-30 + 1e-14 * hnorm;
    let skip = 1e-18 * (hnorm / n as f64).max(1e-300);

    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= stop {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= skip {
                    continue;
                }
                let phase = apq / b; // e^{i phi}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // R = diag(1, conj(phase)) * [[c, s], [-s, c]] on rows/cols (p, q)
                let rpp = Complex::new(c, 0.0);
                let rpq = Complex::new(s, 0.0);
                let rqp = phase.conj() * (-s);
                let rqq = phase.conj() * c;
                // A <- A R (columns p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * rpp + akq * rqp;
                    a[(k, q)] = akp * rpq + akq * rqq;
                }
                // A <- R* A (rows p, q)
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = rpp.conj() * apk + rqp.conj() * aqk;
                    a[(q, k)] = rpq.conj() * apk + rqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex::new(a[(q, q)].re, 0.0);
                // V <- V R
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * rpp + vkq * rqp;
                    v[(k, q)] = vkp * rpq + vkq * rqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    EigenSystem { values, vectors }
}

/// Hermitian eigendecomposition; eigenvalues in nondecreasing order.
pub fn herm_eig(h: &CMatrix) -> Result<EigenSystem<f64>> {
    let defect = h.hermitian_defect();
    if defect > 1e-10 * (1.0 + h.frobenius_norm()) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(jacobi_hermitian(h))
}

/// Threshold for grouping eigenvalues of the Hermitian part before the
/// anti-Hermitian part is diagonalized inside each group.
const CLUSTER_TOL: f64 = 1e-7;

/// Unitary eigendecomposition via the commuting pair
/// `H = (u + u*)/2`, `K = (u - u*)/(2i)`: diagonalize `H`, then
/// diagonalize `K` restricted to each eigenvalue cluster of `H`.
/// Eigenvalues are unit-modulus, sorted by ascending phase in `[0, 2pi)`,
/// ties broken by index.
pub fn unitary_eig(u: &CMatrix) -> Result<EigenSystem<C64>> {
    let defect = u.unitary_defect();
    if defect > 1e-8 {
        return Err(Error::NotUnitary { defect });
    }
    let n = u.n();
    let uadj = u.adjoint();
    let h = (u + &uadj).scale(Complex::new(0.5, 0.0));
    let k = (u - &uadj).scale(Complex::new(0.0, -0.5));
    let eh = jacobi_hermitian(&h);
    let mut v = eh.vectors;
    let kp = &(&v.adjoint() * &k) * &v;

    // contiguous clusters of the sorted H-eigenvalues
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eh.values[end] - eh.values[end - 1]).abs() <= CLUSTER_TOL {
            end += 1;
        }
        let len = end - start;
        if len > 1 {
            let sub = CMatrix::from_fn(len, |i, j| kp[(start + i, start + j)]);
            let es = jacobi_hermitian(&sub);
            // v[:, cluster] <- v[:, cluster] * es.vectors
            let cols: Vec<Vec<C64>> = (0..len)
                .map(|j| {
                    (0..n)
                        .map(|r| {
                            (0..len)
                                .map(|l| v[(r, start + l)] * es.vectors[(l, j)])
                                .sum()
                        })
                        .collect()
                })
                .collect();
            for (j, col) in cols.iter().enumerate() {
                for r in 0..n {
                    v[(r, start + j)] = col[r];
                }
            }
        }
        start = end;
    }

    let t = &(&v.adjoint() * u) * &v;
    let mut values: Vec<C64> = (0..n)
        .map(|j| {
            let z = t[(j, j)];
            let m = z.norm();
            if m > 0.0 {
                z / m
            } else {
                ONE
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    let phase02pi = |z: C64| {
        let a = z.arg();
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    };
    order.sort_by(|&i, &j| phase02pi(values[i]).partial_cmp(&phase02pi(values[j])).unwrap());
    values = order.iter().map(|&i| values[i]).collect();
    let vectors = CMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(EigenSystem { values, vectors })
}

/// A choice of logarithm branch: the circle is cut at `e^{i omega}` and
/// phases are taken in the open arc of length `2pi` excluding the cut.
/// The principal cut is `omega = pi` (phases in `(-pi, pi)`); the
/// alternative cut used for anticommuting pairs is `omega = 0` (phases
/// in `(0, 2pi)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCut {
    omega: f64,
    gap_min: f64,
}

impl BranchCut {
    pub const DEFAULT_GAP_MIN: f64 = 1e-6;

    pub fn new(omega: f64, gap_min: f64) -> Self {
        assert!((0.0..PI).contains(&gap_min), "gap_min must lie in [0, pi)");
        let omega = omega.rem_euclid(TAU);
        BranchCut { omega, gap_min }
    }

    pub fn principal() -> Self {
        BranchCut::new(PI, Self::DEFAULT_GAP_MIN)
    }

    /// Cut at `+1`, phases in `(0, 2pi)`.
    pub fn log0() -> Self {
        BranchCut::new(0.0, Self::DEFAULT_GAP_MIN)
    }

    pub fn with_gap_min(self, gap_min: f64) -> Self {
        BranchCut::new(self.omega, gap_min)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gap_min(&self) -> f64 {
        self.gap_min
    }

    /// Phase of a unit-modulus `z` in the branch's arc, or the distance
    /// to the cut if `z` is within `gap_min` of it.
    pub fn phase_of(&self, z: C64) -> Result<f64> {
        // anchor the arc: phases lie in (omega0, omega0 + 2pi)
        let omega0 = if self.omega < PI {
            self.omega
        } else {
            self.omega - TAU
        };
        let mut phi = z.arg(); // (-pi, pi]
        if phi <= omega0 {
            phi += TAU;
        }
        let dist = (phi - omega0).min(omega0 + TAU - phi);
        if dist < self.gap_min {
            return Err(Error::SpectrumOnCut {
                omega: self.omega,
                dist,
            });
        }
        Ok(phi)
    }
}

/// Skew-Hermitian logarithm of a unitary with respect to a branch cut:
/// `exp(log_unitary(u, cut)) = u` with all phases inside the cut's arc.
///
/// Inputs with unitarity drift in `(1e-12, 1e-8]` are re-unitarized by
/// the polar factor first; products like `u v u* v*` accumulate rounding.
pub fn log_unitary(u: &CMatrix, cut: BranchCut) -> Result<CMatrix> {
    let defect = u.unitary_defect();
    if defect > 1e-8 {
        return Err(Error::NotUnitary { defect });
    }
    let cleaned;
    let input = if defect > 1e-12 {
        cleaned = polar_unitary(u)?;
        &cleaned
    } else {
        u
    };
    let es = unitary_eig(input)?;
    let mut phases = Vec::with_capacity(es.values.len());
    for &z in &es.values {
        phases.push(cut.phase_of(z)?);
    }
    let d = CMatrix::diag(
        &phases
            .iter()
            .map(|&p| Complex::new(0.0, p))
            .collect::<Vec<_>>(),
    );
    let l = &(&es.vectors * &d) * &es.vectors.adjoint();
    // exact skew-Hermitian output: purely imaginary trace
    Ok((&l - &l.adjoint()).scale(Complex::new(0.5, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{expm, op_distance, unit_phase};

    fn shift3() -> CMatrix {
        let mut s = CMatrix::zeros(3);
        s[(1, 0)] = ONE;
        s[(2, 1)] = ONE;
        s[(0, 2)] = ONE;
        s
    }

    /// Deterministic scrambled Hermitian matrix for kernel tests.
    fn pseudo_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut state = seed.max(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let g = CMatrix::from_fn(n, |_, _| Complex::new(next(), next()));
        (&g + &g.adjoint()).scale(Complex::new(0.5, 0.0))
    }

    #[test]
    fn herm_eig_diagonal_case() {
        let es = herm_eig(&CMatrix::diag(&[Complex::new(2.0, 0.0), ONE])).unwrap();
        assert!((es.values[0] - 1.0).abs() < 1e-14);
        assert!((es.values[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn herm_eig_symmetric_flip() {
        let h = CMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        let es = herm_eig(&h).unwrap();
        assert!((es.values[0] + 1.0).abs() < 1e-14);
        assert!((es.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let m = CMatrix::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]).unwrap();
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn herm_eig_reconstruction_n20() {
        let h = pseudo_hermitian(20, 42);
        let es = herm_eig(&h).unwrap();
        let resid = (&es.reconstruct() - &h).frobenius_norm();
        assert!(resid <= 1e-9 * h.frobenius_norm().max(1.0), "residual {resid:e}");
        for w in es.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        assert!(es.vectors.unitary_defect() < 1e-12);
    }

    #[test]
    fn unitary_eig_identity() {
        let es = unitary_eig(&CMatrix::identity(5)).unwrap();
        for z in es.values {
            assert!((z - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn unitary_eig_cyclic_shift_cube_roots() {
        let es = unitary_eig(&shift3()).unwrap();
        // characteristic polynomial of the 3-cycle is z^3 - 1
        for (j, z) in es.values.iter().enumerate() {
            let expected = unit_phase(j as f64 / 3.0);
            assert!((z - expected).norm() < 1e-10, "root {j}: {z}");
        }
        let resid = (&es.reconstruct() - &shift3()).frobenius_norm();
        assert!(resid < 1e-10);
    }

    #[test]
    fn unitary_eig_diagonal_phases() {
        let u = CMatrix::diag(&[unit_phase(0.15), unit_phase(0.7)]);
        let es = unitary_eig(&u).unwrap();
        assert!((es.values[0] - unit_phase(0.15)).norm() < 1e-12);
        assert!((es.values[1] - unit_phase(0.7)).norm() < 1e-12);
    }

    #[test]
    fn unitary_eig_mirrored_pair_cluster() {
        // e^{i phi} and e^{-i phi} share the Hermitian part; the cluster
        // pass must separate them through the anti-Hermitian part.
        let u0 = CMatrix::diag(&[unit_phase(0.2), unit_phase(-0.2)]);
        let r = {
            let c = Complex::new(0.6, 0.0);
            let s = Complex::new(0.8, 0.0);
            CMatrix::from_rows(&[vec![c, s], vec![-s, c]]).unwrap()
        };
        let u = &(&r * &u0) * &r.adjoint();
        let es = unitary_eig(&u).unwrap();
        let resid = (&es.reconstruct() - &u).frobenius_norm();
        assert!(resid < 1e-10, "residual {resid:e}");
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = log_unitary(&CMatrix::identity(4), BranchCut::principal()).unwrap();
        assert!(l.frobenius_norm() < 1e-12);
    }

    #[test]
    fn log_of_scalar_phase() {
        let u = CMatrix::scalar(3, unit_phase(1.0 / 6.0));
        let l = log_unitary(&u, BranchCut::principal()).unwrap();
        let expected = CMatrix::scalar(3, Complex::new(0.0, PI / 3.0));
        assert!((&l - &expected).frobenius_norm() < 1e-12);
    }

    #[test]
    fn log_rejects_spectrum_on_principal_cut() {
        let x = CMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        assert!(matches!(
            log_unitary(&x, BranchCut::principal()),
            Err(Error::SpectrumOnCut { .. })
        ));
    }

    #[test]
    fn log0_takes_positive_phases() {
        let u = CMatrix::scalar(2, -ONE);
        let l = log_unitary(&u, BranchCut::log0()).unwrap();
        let expected = CMatrix::scalar(2, Complex::new(0.0, PI));
        assert!((&l - &expected).frobenius_norm() < 1e-12);
    }

    #[test]
    fn general_cut_selects_the_right_arc() {
        // cut at i: phases live in (pi/2, pi/2 + 2pi)
        let cut = BranchCut::new(PI / 2.0, 1e-6);
        let u = CMatrix::diag(&[ONE, unit_phase(0.4)]); // phases 0 and 0.8 pi
        let l = log_unitary(&u, cut).unwrap();
        // the eigenvalue 1 sits just below the cut going counterclockwise,
        // so its phase in this branch is 2 pi; 0.8 pi is inside the arc
        let expected = CMatrix::diag(&[Complex::new(0.0, TAU), Complex::new(0.0, 0.8 * PI)]);
        assert!((&l - &expected).frobenius_norm() < 1e-12);
        // an eigenvalue at i is on this cut
        let bad = CMatrix::diag(&[ONE, unit_phase(0.25)]);
        assert!(matches!(
            log_unitary(&bad, cut),
            Err(Error::SpectrumOnCut { .. })
        ));
    }

    #[test]
    fn log_exp_roundtrip() {
        // skew-Hermitian with ||L|| below pi so the principal branch applies
        let h = pseudo_hermitian(8, 7).scale(Complex::new(0.0, 0.35));
        let skew = (&h - &h.adjoint()).scale(Complex::new(0.5, 0.0));
        let u = expm(&skew);
        let l = log_unitary(&u, BranchCut::principal()).unwrap();
        assert!(op_distance(&l, &skew) < 1e-9);
    }

    #[test]
    fn log_trace_purely_imaginary() {
        let u = expm(&CMatrix::from_rows(&[
            vec![Complex::new(0.0, 0.3), Complex::new(0.1, 0.2)],
            vec![Complex::new(-0.1, 0.2), Complex::new(0.0, -0.4)],
        ])
        .unwrap());
        let l = log_unitary(&u, BranchCut::principal()).unwrap();
        assert!(l.trace().re.abs() < 1e-10);
    }
}
