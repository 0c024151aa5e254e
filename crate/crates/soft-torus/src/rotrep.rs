//! Finite-dimensional representation theory of the rational rotation
//! relation `u v = e^{2 pi i p/q} v u`: irreducible blocks live at base
//! points `(t1, t2)` of the two-torus, are q-dimensional, and are built
//! from clock/shift matrices twisted by chosen q-th roots `(r1, r2)`.
//! This module constructs irreps, their spectral projections and matrix
//! units, and decomposes an exact pair into irreducible blocks.

use crate::error::{Error, Result};
use crate::generators::{clock, shift, RationalAngle, Seed, UnitaryPair};
use crate::matcore::{herm_eig, op_distance, polar_unitary, CMatrix, C64, ONE, ZERO};
use num_complex::Complex;
use rand::Rng;

/// An irreducible representation datum: angle `p/q`, base point
/// `(t1, t2)` on the torus, and q-th roots `r1^q = t1`, `r2^q = t2`.
#[derive(Debug, Clone, Copy)]
pub struct IrrepSpec {
    theta: RationalAngle,
    t1: C64,
    t2: C64,
    r1: C64,
    r2: C64,
}

fn unit_check(z: C64) -> Result<C64> {
    let n = z.norm();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::Parse(format!("|{z}| = {n} is not unit modulus")));
    }
    Ok(z / n)
}

impl IrrepSpec {
    pub fn new(theta: RationalAngle, t1: C64, t2: C64, r1: C64, r2: C64) -> Result<Self> {
        let (t1, t2, r1, r2) = (
            unit_check(t1)?,
            unit_check(t2)?,
            unit_check(r1)?,
            unit_check(r2)?,
        );
        let q = theta.q() as u32;
        for (r, t) in [(r1, t1), (r2, t2)] {
            let dist = (r.powu(q) - t).norm();
            if dist > 1e-10 {
                return Err(Error::RootMismatch { dist });
            }
        }
        Ok(IrrepSpec { theta, t1, t2, r1, r2 })
    }

    /// Principal q-th roots of the base point.
    pub fn principal(theta: RationalAngle, t1: C64, t2: C64) -> Result<Self> {
        let (t1, t2) = (unit_check(t1)?, unit_check(t2)?);
        let q = theta.q() as f64;
        let r1 = Complex::from_polar(1.0, t1.arg() / q);
        let r2 = Complex::from_polar(1.0, t2.arg() / q);
        IrrepSpec::new(theta, t1, t2, r1, r2)
    }

    pub fn theta(&self) -> RationalAngle {
        self.theta
    }

    pub fn base_point(&self) -> (C64, C64) {
        (self.t1, self.t2)
    }

    pub fn roots(&self) -> (C64, C64) {
        (self.r1, self.r2)
    }
}

/// The irrep at a base point: `(r1 S1, r2 S2)` of dimension q, with
/// `u^q = t1 I` and `v^q = t2 I`.
pub fn irrep_at(spec: &IrrepSpec) -> UnitaryPair {
    let q = spec.theta.q() as usize;
    let u = clock(q, spec.theta).scale(spec.r1);
    let v = shift(q).scale(spec.r2);
    UnitaryPair::new(u, v, spec.theta.into()).expect("clock/shift blocks are unitary")
}

/// Spectral projections of a unitary whose q-th power is scalar:
/// `E_j = (1/q) sum_k (r1 lambda^j)^{-k} u^k`. Each `E_j` projects onto
/// the eigenspace at `r1 lambda^j`, and they sum to the identity.
pub fn spectral_projections(
    u: &CMatrix,
    r1: C64,
    theta: RationalAngle,
) -> Result<Vec<CMatrix>> {
    let q = theta.q() as usize;
    let n = u.n();
    let uq = u.pow(q as u64);
    let s = uq.trace() / n as f64;
    let s = if s.norm() > 0.0 { s / s.norm() } else { ONE };
    let central_defect = op_distance(&uq, &CMatrix::scalar(n, s));
    if central_defect > 1e-8 {
        return Err(Error::NotCentralPower {
            defect: central_defect,
        });
    }
    let mut powers = Vec::with_capacity(q);
    let mut acc = CMatrix::identity(n);
    for _ in 0..q {
        powers.push(acc.clone());
        acc = &acc * u;
    }
    let r1_conj = r1.conj();
    let mut out = Vec::with_capacity(q);
    for j in 0..q {
        let mut e = CMatrix::zeros(n);
        let mut rpow = ONE; // r1^{-k}
        for (k, upow) in powers.iter().enumerate() {
            let coeff = rpow * theta.power_phase(-((j * k) as i64));
            e = &e + &upow.scale(coeff / q as f64);
            rpow *= r1_conj;
        }
        out.push(e);
    }
    Ok(out)
}

/// Matrix units `E_{ij} = (conj(r2) v)^{i-j} E_j` built from the
/// spectral projections and the shift action of `v`. Verifies the
/// relations `E_{ij} E_{kl} = delta_{jk} E_{il}` and errs if any
/// residual exceeds 1e-6 (the input was not an exact irrep multiple).
pub fn matrix_units(
    projections: &[CMatrix],
    v: &CMatrix,
    r2: C64,
) -> Result<Vec<Vec<CMatrix>>> {
    let q = projections.len();
    assert!(q >= 1);
    let n = v.n();
    let step = v.scale(r2.conj());
    let cycle_defect = op_distance(&step.pow(q as u64), &CMatrix::identity(n));
    if cycle_defect > 1e-8 {
        return Err(Error::RelationViolation {
            residual: cycle_defect,
        });
    }
    // powers of (conj(r2) v), exponents 0..q
    let mut steps = Vec::with_capacity(q);
    let mut acc = CMatrix::identity(n);
    for _ in 0..q {
        steps.push(acc.clone());
        acc = &acc * &step;
    }
    let units: Vec<Vec<CMatrix>> = (0..q)
        .map(|i| {
            (0..q)
                .map(|j| {
                    let e = (i as i64 - j as i64).rem_euclid(q as i64) as usize;
                    &steps[e] * &projections[j]
                })
                .collect()
        })
        .collect();

    let mut residual: f64 = 0.0;
    for i in 0..q {
        for j in 0..q {
            for k in 0..q {
                for l in 0..q {
                    let prod = &units[i][j] * &units[k][l];
                    let expected = if j == k { Some(&units[i][l]) } else { None };
                    let r = match expected {
                        Some(e) => (&prod - e).frobenius_norm(),
                        None => prod.frobenius_norm(),
                    };
                    residual = residual.max(r);
                }
            }
        }
    }
    let mut diag_sum = CMatrix::zeros(n);
    for (i, row) in units.iter().enumerate() {
        diag_sum = &diag_sum + &row[i];
    }
    residual = residual.max((&diag_sum - &CMatrix::identity(n)).frobenius_norm());
    if residual > 1e-6 {
        return Err(Error::RelationViolation { residual });
    }
    Ok(units)
}

/// Decomposition of an exact pair into irreducible blocks: a unitary
/// `W` with `W* u W = blkdiag(r1 S1)` per block, the block data with
/// multiplicities, and the worst canonicalization residual.
#[derive(Debug, Clone)]
pub struct RepDecomposition {
    pub blocks: Vec<(IrrepSpec, usize)>,
    pub conjugator: CMatrix,
    pub residual: f64,
}

impl RepDecomposition {
    fn canonical_forms(&self) -> (CMatrix, CMatrix) {
        let theta = self.blocks[0].0.theta;
        let q = theta.q() as usize;
        let n: usize = self.blocks.iter().map(|(_, m)| m * q).sum();
        let s1 = clock(q, theta);
        let s2 = shift(q);
        let mut a = CMatrix::zeros(n);
        let mut b = CMatrix::zeros(n);
        let mut at = 0;
        for (spec, mult) in &self.blocks {
            for _ in 0..*mult {
                a.set_block(at, &s1.scale(spec.r1));
                b.set_block(at, &s2.scale(spec.r2));
                at += q;
            }
        }
        (a, b)
    }

    /// `(W A W*, W B W*)`: the exact pair this decomposition encodes.
    pub fn reassemble(&self) -> UnitaryPair {
        let (a, b) = self.canonical_forms();
        let w = &self.conjugator;
        let wadj = w.adjoint();
        let theta = self.blocks[0].0.theta;
        UnitaryPair::new(&(w * &a) * &wadj, &(w * &b) * &wadj, theta.into())
            .expect("conjugate of exact pair is unitary")
    }
}

/// Internal frame produced by joint block diagonalization of
/// `(u^q, v^q)`: columns of `w` are grouped into `mult` sub-blocks of
/// size q per cluster.
pub(crate) struct BlockFrame {
    pub w: CMatrix,
    /// per cluster: (t1, t2, multiplicity)
    pub clusters: Vec<(C64, C64, usize)>,
}

/// Joint block diagonalization of the commuting normal pair
/// `(u^q, v^q)`: a seeded random real combination of their Hermitian
/// and anti-Hermitian parts breaks degeneracies; eigenvector clusters
/// in joint eigenvalue space are refined through the averaging
/// projections of `u` and the shift action of `v`.
pub(crate) fn joint_block_frame(
    pair: &UnitaryPair,
    theta: RationalAngle,
    cluster_tol: f64,
    seed: Seed,
) -> Result<BlockFrame> {
    let q = theta.q() as usize;
    let n = pair.n();
    if !n.is_multiple_of(q) {
        return Err(Error::NotDivisible {
            q: theta.q(),
            n,
        });
    }
    let uq = pair.u().pow(q as u64);
    let vq = pair.v().pow(q as u64);
    let mut rng = seed.rng();
    let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let herm = |m: &CMatrix| (m + &m.adjoint()).scale(Complex::new(0.5, 0.0));
    let skew_i = |m: &CMatrix| (m - &m.adjoint()).scale(Complex::new(0.0, -0.5));
    let mix = &(&herm(&uq).scale(Complex::new(c[0], 0.0)) + &skew_i(&uq).scale(Complex::new(c[1], 0.0)))
        + &(&herm(&vq).scale(Complex::new(c[2], 0.0)) + &skew_i(&vq).scale(Complex::new(c[3], 0.0)));
    let es = herm_eig(&mix)?;
    let vbase = es.vectors;
    let x1 = &(&vbase.adjoint() * &uq) * &vbase;
    let x2 = &(&vbase.adjoint() * &vq) * &vbase;
    let d1: Vec<C64> = (0..n).map(|j| x1[(j, j)]).collect();
    let d2: Vec<C64> = (0..n).map(|j| x2[(j, j)]).collect();

    // greedy clustering in joint eigenvalue space
    let mut used = vec![false; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut group = vec![i];
        for j in (i + 1)..n {
            if !used[j]
                && (d1[i] - d1[j]).norm() < cluster_tol
                && (d2[i] - d2[j]).norm() < cluster_tol
            {
                used[j] = true;
                group.push(j);
            }
        }
        groups.push(group);
    }

    let mut w_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut clusters = Vec::with_capacity(groups.len());
    for group in &groups {
        let k = group.len();
        if k % q != 0 {
            return Err(Error::DecompositionFailed {
                residual: f64::INFINITY,
            });
        }
        let mult = k / q;
        let mean = |d: &[C64]| {
            let s: C64 = group.iter().map(|&j| d[j]).sum();
            let s = s / k as f64;
            if s.norm() > 0.0 {
                s / s.norm()
            } else {
                ONE
            }
        };
        let (t1, t2) = (mean(&d1), mean(&d2));
        let r1 = Complex::from_polar(1.0, t1.arg() / q as f64);
        let r2 = Complex::from_polar(1.0, t2.arg() / q as f64);
        // restrict u, v to the cluster frame
        let vc = {
            let mut m = vec![vec![ZERO; k]; n];
            for (col, &j) in group.iter().enumerate() {
                for (row, item) in m.iter_mut().enumerate() {
                    item[col] = vbase[(row, j)];
                }
            }
            m
        };
        let restrict = |m: &CMatrix| -> Vec<Vec<C64>> {
            // vc^* m vc, k x k
            let mut tmp = vec![vec![ZERO; k]; n];
            for r in 0..n {
                for cidx in 0..k {
                    let mut s = ZERO;
                    for l in 0..n {
                        s += m[(r, l)] * vc[l][cidx];
                    }
                    tmp[r][cidx] = s;
                }
            }
            let mut out = vec![vec![ZERO; k]; k];
            for ridx in 0..k {
                for cidx in 0..k {
                    let mut s = ZERO;
                    for l in 0..n {
                        s += vc[l][ridx].conj() * tmp[l][cidx];
                    }
                    out[ridx][cidx] = s;
                }
            }
            out
        };
        let uc_rows = restrict(pair.u());
        let vc_rows = restrict(pair.v());
        let uc = CMatrix::from_fn(k, |i, j| uc_rows[i][j]);
        let vcm = CMatrix::from_fn(k, |i, j| vc_rows[i][j]);

        // averaging projection onto the r1-eigenspace of uc
        let mut e0 = CMatrix::zeros(k);
        let mut upow = CMatrix::identity(k);
        let mut rpow = ONE;
        for _ in 0..q {
            e0 = &e0 + &upow.scale(rpow / q as f64);
            upow = &upow * &uc;
            rpow *= r1.conj();
        }
        let e0 = (&e0 + &e0.adjoint()).scale(Complex::new(0.5, 0.0));
        let ees = herm_eig(&e0)?;
        // top-mult eigenvectors span the projection range
        let basis: Vec<Vec<C64>> = (0..mult)
            .map(|s| (0..k).map(|r| ees.vectors[(r, k - mult + s)]).collect())
            .collect();

        let mut frame: Vec<Vec<C64>> = Vec::with_capacity(k);
        for wvec in &basis {
            let mut x = wvec.clone();
            for _ in 0..q {
                frame.push(x.clone());
                // x <- conj(r2) vc x
                let mut next = vec![ZERO; k];
                for (r, slot) in next.iter_mut().enumerate() {
                    let mut s = ZERO;
                    for l in 0..k {
                        s += vcm[(r, l)] * x[l];
                    }
                    *slot = r2.conj() * s;
                }
                x = next;
            }
        }
        // orthonormalize the frame (already near-orthonormal for exact input)
        for j in 0..frame.len() {
            for _ in 0..2 {
                for i in 0..j {
                    let (head, tail) = frame.split_at_mut(j);
                    let (prev, cur) = (&head[i], &mut tail[0]);
                    let proj: C64 =
                        prev.iter().zip(cur.iter()).map(|(a, b)| a.conj() * b).sum();
                    for (z, &w) in cur.iter_mut().zip(prev.iter()) {
                        *z -= proj * w;
                    }
                }
            }
            let norm: f64 = frame[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                return Err(Error::DecompositionFailed {
                    residual: f64::INFINITY,
                });
            }
            for z in frame[j].iter_mut() {
                *z /= norm;
            }
        }
        // lift cluster-local frame back to ambient coordinates
        for col in &frame {
            let mut ambient = vec![ZERO; n];
            for (r, item) in ambient.iter_mut().enumerate() {
                let mut s = ZERO;
                for l in 0..k {
                    s += vc[r][l] * col[l];
                }
                *item = s;
            }
            w_cols.push(ambient);
        }
        clusters.push((t1, t2, mult));
    }

    let w_raw = CMatrix::from_fn(n, |i, j| w_cols[j][i]);
    let w = polar_unitary(&w_raw).map_err(|_| Error::DecompositionFailed {
        residual: f64::INFINITY,
    })?;
    Ok(BlockFrame { w, clusters })
}

/// Decompose an exact (or nearly exact, within `tol`) theta-pair into
/// irreducible blocks. The construction simultaneously diagonalizes the
/// near-central powers `u^q, v^q`, then builds the canonical basis in
/// each joint eigenspace from the spectral projections of `u` and the
/// shift action of `v`.
pub fn decompose_exact_pair(
    pair: &UnitaryPair,
    theta: RationalAngle,
    tol: f64,
) -> Result<RepDecomposition> {
    let q = theta.q();
    let n = pair.n();
    if !n.is_multiple_of(q as usize) {
        return Err(Error::NotDivisible { q, n });
    }
    let pair_defect = crate::invariants::defect(&pair.clone().with_theta(theta.into()));
    if pair_defect > tol {
        return Err(Error::DecompositionFailed {
            residual: pair_defect,
        });
    }
    let frame = joint_block_frame(pair, theta, 1e-6, Seed(0x0c1))?;
    let blocks: Vec<(IrrepSpec, usize)> = frame
        .clusters
        .iter()
        .map(|&(t1, t2, mult)| Ok((IrrepSpec::principal(theta, t1, t2)?, mult)))
        .collect::<Result<_>>()?;
    let mut decomposition = RepDecomposition {
        blocks,
        conjugator: frame.w,
        residual: 0.0,
    };
    let (a, b) = decomposition.canonical_forms();
    let wadj = decomposition.conjugator.adjoint();
    let x = &(&wadj * pair.u()) * &decomposition.conjugator;
    let y = &(&wadj * pair.v()) * &decomposition.conjugator;
    let residual = op_distance(&x, &a).max(op_distance(&y, &b));
    decomposition.residual = residual;
    if residual > 100.0 * tol.max(1e-12) {
        return Err(Error::DecompositionFailed { residual });
    }
    Ok(decomposition)
}
