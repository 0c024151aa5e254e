//! Dense complex linear algebra kernel.
//!
//! Everything here works on [`CMatrix`], a dense square matrix of
//! `Complex<f64>` in row-major order. The kernel is deliberately small:
//! arithmetic, Kronecker products, Hermitian/unitary eigendecomposition
//! (cyclic Jacobi), branch-cut matrix logarithm, matrix exponential and
//! polar factorization. All functions are pure; nothing is cached or
//! mutated in place behind the caller's back.

mod eig;

pub use eig::{herm_eig, log_unitary, unitary_eig, BranchCut, EigenSystem};

use crate::error::{Error, Result};
use num_complex::Complex;
use std::f64::consts::TAU;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

pub type C64 = Complex<f64>;

pub const ZERO: C64 = Complex::new(0.0, 0.0);
pub const ONE: C64 = Complex::new(1.0, 0.0);
pub const I: C64 = Complex::new(0.0, 1.0);

/// `e^{i 2π t}` for a fraction-of-a-turn `t`.
pub fn unit_phase(turns: f64) -> C64 {
    let a = TAU * turns;
    Complex::new(a.cos(), a.sin())
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        CMatrix {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// `z * I_n`.
    pub fn scalar(n: usize, z: C64) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = CMatrix::zeros(values.len());
        for (i, &z) in values.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from nested rows, validating shape and finiteness.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        let mut m = CMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {} has length {}, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            for (j, &z) in row.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::Parse(format!("non-finite entry at ({i},{j})")));
                }
                m[(i, j)] = z;
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        CMatrix::from_fn(n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, z: C64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|&a| a * z).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `||self * self^adj - I||_F`, the unitarity drift.
    pub fn unitary_defect(&self) -> f64 {
        let p = self * &self.adjoint();
        (&p - &CMatrix::identity(self.n)).frobenius_norm()
    }

    /// `||self - self^adj||_F`.
    pub fn hermitian_defect(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm()
    }

    /// Matrix power by repeated squaring.
    pub fn pow(&self, mut k: u64) -> CMatrix {
        let mut base = self.clone();
        let mut acc = CMatrix::identity(self.n);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Embed `block` at diagonal offset `at` (used to assemble block-diagonal forms).
    pub fn set_block(&mut self, at: usize, block: &CMatrix) {
        let k = block.n;
        assert!(at + k <= self.n);
        for i in 0..k {
            for j in 0..k {
                self[(at + i, at + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, at: usize, k: usize) -> CMatrix {
        assert!(at + k <= self.n);
        CMatrix::from_fn(k, |i, j| self[(at + i, at + j)])
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        // i-k-j order keeps both operands streaming over rows.
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    dst[j] += a * row[j];
                }
            }
        }
        out
    }
}

/// Kronecker product: block `(i,j)` of the result is `a[i,j] * b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (na, nb) = (a.n(), b.n());
    let n = na * nb;
    let mut out = CMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let z = a[(i, j)];
            if z == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = z * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Largest singular value, via the Hermitian eigenproblem for `a* a`.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.n() == 1 {
        return a[(0, 0)].norm();
    }
    let gram = &a.adjoint() * a;
    let es = herm_eig_unchecked(&gram);
    es.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// `||a - b||` in operator norm.
pub fn op_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    operator_norm(&(a - b))
}

pub(crate) fn herm_eig_unchecked(h: &CMatrix) -> EigenSystem<f64> {
    // `a* a` is Hermitian up to rounding; symmetrize and skip the defect check.
    let sym = (h + &h.adjoint()).scale(Complex::new(0.5, 0.0));
    eig::jacobi_hermitian(&sym)
}

/// Unitary polar factor of an invertible matrix: the maximizer of
/// `Re tr(W* a)` over unitaries `W`.
///
/// Inputs that are already close to a multiple of a unitary converge
/// through pure Newton-Schulz iteration; the general case goes through
/// the eigendecomposition of `a* a`, polished with Newton-Schulz steps
/// until `||U*U - I||_F <= 1e-13`.
pub fn polar_unitary(a: &CMatrix) -> Result<CMatrix> {
    let n = a.n();
    let alpha = a.frobenius_norm() / (n as f64).sqrt();
    if alpha > 0.0 {
        let mut x = a.scale(Complex::new(1.0 / alpha, 0.0));
        // within this Frobenius ball every singular value of x lies in
        // the Newton-Schulz basin (0, sqrt(3))
        let start_defect = x.unitary_defect();
        if start_defect <= 0.7 {
            for _ in 0..30 {
                let defect = x.unitary_defect();
                if defect <= 1e-13 {
                    return Ok(x);
                }
                let gram = &x.adjoint() * &x;
                let corr =
                    &CMatrix::scalar(n, Complex::new(1.5, 0.0)) - &gram.scale(Complex::new(0.5, 0.0));
                x = &x * &corr;
                if !x.is_finite() {
                    break;
                }
            }
        }
        // fall through to the eigendecomposition route
    }
    let gram = &a.adjoint() * a;
    let es = herm_eig_unchecked(&gram);
    let sigma_max = es.values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    let sigma_min = es.values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    if sigma_max == 0.0 || sigma_min < 1e-12 * sigma_max {
        return Err(Error::SingularInput);
    }
    let inv_h = {
        // (a* a)^{-1/2} = V diag(1/sigma) V*
        let v = &es.vectors;
        let d = CMatrix::diag(
            &es.values
                .iter()
                .map(|&l| Complex::new(1.0 / l.max(0.0).sqrt(), 0.0))
                .collect::<Vec<_>>(),
        );
        &(v * &d) * &v.adjoint()
    };
    let mut u = a * &inv_h;
    // Newton-Schulz: U <- U (3I - U*U)/2, quadratic once close to unitary.
    for _ in 0..8 {
        if u.unitary_defect() <= 1e-13 {
            return Ok(u);
        }
        let gram = &u.adjoint() * &u;
        let corr = &CMatrix::scalar(n, Complex::new(1.5, 0.0)) - &gram.scale(Complex::new(0.5, 0.0));
        u = &u * &corr;
    }
    if u.unitary_defect() <= 1e-11 {
        Ok(u)
    } else {
        Err(Error::NoConvergence)
    }
}

/// Matrix exponential by scaling-and-squaring with a truncated Taylor
/// series (terms below 1e-13 dropped). Intended for skew-Hermitian
/// arguments of moderate norm.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.n();
    let norm = a.frobenius_norm();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale(Complex::new(1.0 / f64::powi(2.0, s as i32), 0.0));
    let mut sum = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=40 {
        term = &term * &scaled;
        term = term.scale(Complex::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
        if term.frobenius_norm() <= 1e-13 {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..s {
        result = &result * &result;
    }
    result
}
