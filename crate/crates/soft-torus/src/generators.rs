//! Constructors for the unitary pairs the toolkit works on: clock and
//! shift matrices, exact theta-commuting pairs, the almost-commuting
//! clock/shift pairs of dimension n, Haar-random unitaries, seeded
//! multiplicative perturbations, scalar twists and the tensor lift.

use crate::error::{Error, Result};
use crate::matcore::{expm, kron, operator_norm, unit_phase, CMatrix, C64, ONE};
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::str::FromStr;

/// Reduced fraction `p/q` normalized into the window `(-1/2, 1/2]`,
/// the winding fraction of an exact pair. `lambda = e^{2 pi i p/q}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalAngle {
    p: i64,
    q: i64,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a.abs()
}

impl RationalAngle {
    pub const ZERO: RationalAngle = RationalAngle { p: 0, q: 1 };

    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        // normalize in i128: the inputs are arbitrary i64, so negation
        // and the window shift must not overflow
        let (mut p, q) = {
            let (p, q) = (p as i128, q as i128);
            if q < 0 {
                (-p, -q)
            } else {
                (p, q)
            }
        };
        p = p.rem_euclid(q); // into [0, q)
        if 2 * p > q {
            p -= q; // into (-1/2, 1/2]
        }
        let g = gcd(p, q).max(1);
        let (p, q) = (p / g, q / g);
        if q > i64::MAX as i128 {
            return Err(Error::Parse("denominator out of range".into()));
        }
        Ok(RationalAngle {
            p: p as i64,
            q: q as i64,
        })
    }

    pub fn half() -> Self {
        RationalAngle { p: 1, q: 2 }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn is_zero(&self) -> bool {
        self.p == 0
    }

    /// `e^{2 pi i k p / q}` with the angle reduced exactly in integer
    /// arithmetic before any floating-point rounding.
    pub fn power_phase(&self, k: i64) -> C64 {
        let r = (k as i128 * self.p as i128).rem_euclid(self.q as i128);
        unit_phase(r as f64 / self.q as f64)
    }

    pub fn phase(&self) -> C64 {
        self.power_phase(1)
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for RationalAngle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (ps, qs) = s
            .split_once('/')
            .ok_or_else(|| Error::Parse(format!("expected p/q, got {s:?}")))?;
        let p: i64 = ps
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator {ps:?}")))?;
        let q: i64 = qs
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator {qs:?}")))?;
        RationalAngle::new(p, q)
    }
}

/// Target angle of a pair: an exact rational winding fraction or a raw
/// real value (accepted for invariant computations, rejected by the
/// solver).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Rational(RationalAngle),
    Real(f64),
}

impl Angle {
    pub const ZERO: Angle = Angle::Rational(RationalAngle::ZERO);

    pub fn value(&self) -> f64 {
        match self {
            Angle::Rational(r) => r.value(),
            Angle::Real(x) => *x,
        }
    }

    pub fn phase(&self) -> C64 {
        match self {
            Angle::Rational(r) => r.phase(),
            Angle::Real(x) => unit_phase(*x),
        }
    }

    /// Nearest rational with denominator at most `max_q`, if one lies
    /// within `tol`.
    pub fn snap(x: f64, max_q: i64, tol: f64) -> Option<RationalAngle> {
        for q in 1..=max_q {
            let p = (x * q as f64).round() as i64;
            if (x - p as f64 / q as f64).abs() <= tol {
                return RationalAngle::new(p, q).ok();
            }
        }
        None
    }

    pub fn require_rational(&self) -> Result<RationalAngle> {
        match self {
            Angle::Rational(r) => Ok(*r),
            Angle::Real(x) => Err(Error::IrrationalTarget {
                value: *x,
                max_q: 64,
            }),
        }
    }
}

impl From<RationalAngle> for Angle {
    fn from(r: RationalAngle) -> Self {
        Angle::Rational(r)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Rational(r) => write!(f, "{r}"),
            Angle::Real(x) => write!(f, "{x}"),
        }
    }
}

/// 64-bit seed for all randomness in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(&self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.0)
    }

    /// Per-trial seed in a sweep: base value plus the row index.
    pub fn offset(&self, k: u64) -> Seed {
        Seed(self.0.wrapping_add(k))
    }
}

/// Two same-dimension unitaries and the angle they are measured against.
#[derive(Debug, Clone)]
pub struct UnitaryPair {
    u: CMatrix,
    v: CMatrix,
    theta: Angle,
}

impl UnitaryPair {
    pub fn new(u: CMatrix, v: CMatrix, theta: Angle) -> Result<Self> {
        if u.n() != v.n() {
            return Err(Error::Dimension(format!(
                "u is {}x{0} but v is {}x{1}",
                u.n(),
                v.n()
            )));
        }
        for m in [&u, &v] {
            let defect = m.unitary_defect();
            if defect > 1e-8 {
                return Err(Error::NotUnitary { defect });
            }
        }
        Ok(UnitaryPair { u, v, theta })
    }

    pub fn n(&self) -> usize {
        self.u.n()
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn theta(&self) -> Angle {
        self.theta
    }

    pub fn lambda(&self) -> C64 {
        self.theta.phase()
    }

    pub fn with_theta(self, theta: Angle) -> UnitaryPair {
        UnitaryPair { theta, ..self }
    }

    /// Simultaneous conjugation `(w* u w, w* v w)`.
    pub fn conjugated(&self, w: &CMatrix) -> UnitaryPair {
        let wadj = w.adjoint();
        UnitaryPair {
            u: &(&wadj * &self.u) * w,
            v: &(&wadj * &self.v) * w,
            theta: self.theta,
        }
    }
}

/// Clock matrix `S1 = diag(1, lambda, ..., lambda^{q-1})` with
/// `lambda = e^{2 pi i theta}`.
pub fn clock(q: usize, theta: RationalAngle) -> CMatrix {
    assert!(q >= 1);
    CMatrix::diag(
        &(0..q)
            .map(|j| theta.power_phase(j as i64))
            .collect::<Vec<_>>(),
    )
}

/// Cyclic shift `S2`: ones on the subdiagonal and in the top-right
/// corner. `S1 S2 = e^{2 pi i theta} S2 S1`.
pub fn shift(q: usize) -> CMatrix {
    assert!(q >= 1);
    let mut s = CMatrix::zeros(q);
    for i in 0..q.saturating_sub(1) {
        s[(i + 1, i)] = ONE;
    }
    s[(0, q - 1)] = ONE;
    s
}

/// Canonical exact pair `(I_m x S1, I_m x S2)` of dimension `q m`,
/// satisfying `u v = e^{2 pi i theta} v u` to floating precision.
pub fn theta_pair(theta: RationalAngle, m: usize) -> UnitaryPair {
    assert!(m >= 1);
    let q = theta.q() as usize;
    let eye = CMatrix::identity(m);
    UnitaryPair {
        u: kron(&eye, &clock(q, theta)),
        v: kron(&eye, &shift(q)),
        theta: theta.into(),
    }
}

/// The classical obstruction example: `(clock(n, 1/n), shift(n))`,
/// measured against theta = 0. The commutator defect is `2 sin(pi/n)`
/// but the pair cannot be perturbed to a commuting pair.
pub fn voiculescu(n: usize) -> UnitaryPair {
    assert!(n >= 2);
    let angle = RationalAngle::new(1, n as i64).expect("n >= 2");
    UnitaryPair {
        u: clock(n, angle),
        v: shift(n),
        theta: Angle::ZERO,
    }
}

fn ginibre(n: usize, rng: &mut ChaCha12Rng) -> CMatrix {
    CMatrix::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re, im)
    })
}

/// Haar-distributed unitary: modified Gram-Schmidt orthonormalization of
/// a complex Ginibre matrix. MGS is the QR factor with positive real
/// diagonal of R, which makes the distribution exactly
/// translation-invariant. Deterministic for a given seed.
pub fn haar_unitary(n: usize, seed: Seed) -> CMatrix {
    let mut rng = seed.rng();
    let g = ginibre(n, &mut rng);
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| (0..n).map(|i| g[(i, j)]).collect()).collect();
    for j in 0..n {
        // two MGS passes for orthogonality at working precision
        for _ in 0..2 {
            for i in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let (prev, cur) = (&head[i], &mut tail[0]);
                let proj: C64 = prev.iter().zip(cur.iter()).map(|(a, b)| a.conj() * b).sum();
                for (z, &w) in cur.iter_mut().zip(prev.iter()) {
                    *z -= proj * w;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    CMatrix::from_fn(n, |i, j| cols[j][i])
}

fn random_unit_skew(n: usize, rng: &mut ChaCha12Rng) -> CMatrix {
    let g = ginibre(n, rng);
    let k = (&g - &g.adjoint()).scale(Complex::new(0.5, 0.0));
    let norm = operator_norm(&k);
    if norm == 0.0 {
        k
    } else {
        k.scale(Complex::new(1.0 / norm, 0.0))
    }
}

/// Multiplicative perturbation `(u e^{eps K1}, v e^{eps K2})` with seeded
/// unit-norm skew-Hermitian directions. Outputs stay exactly unitary and
/// `||u' - u|| <= eps`.
pub fn perturb_pair(pair: &UnitaryPair, eps: f64, seed: Seed) -> UnitaryPair {
    assert!((0.0..=0.5).contains(&eps), "eps must lie in [0, 0.5]");
    let mut rng = seed.rng();
    let n = pair.n();
    let k1 = random_unit_skew(n, &mut rng);
    let k2 = random_unit_skew(n, &mut rng);
    let e = Complex::new(eps, 0.0);
    UnitaryPair {
        u: pair.u() * &expm(&k1.scale(e)),
        v: pair.v() * &expm(&k2.scale(e)),
        theta: pair.theta(),
    }
}

/// Scalar twist `(r1 u, r2 v)`; the defect against the same theta is
/// unchanged.
pub fn twist(pair: &UnitaryPair, r1: C64, r2: C64) -> UnitaryPair {
    assert!(
        (r1.norm() - 1.0).abs() <= 1e-12 && (r2.norm() - 1.0).abs() <= 1e-12,
        "twist phases must be unit modulus"
    );
    UnitaryPair {
        u: pair.u().scale(r1),
        v: pair.v().scale(r2),
        theta: pair.theta(),
    }
}

/// Tensor lift `(u x S2, v x S1)` of dimension `n q`. Its multiplicative
/// commutator is `(u v u* v*) x (e^{-2 pi i theta} I_q)`, so the lift of
/// a pair with winding fraction theta nearly commutes; the lifted pair
/// is measured against theta = 0.
pub fn tensor_lift(pair: &UnitaryPair, theta: RationalAngle) -> UnitaryPair {
    let q = theta.q() as usize;
    UnitaryPair {
        u: kron(pair.u(), &shift(q)),
        v: kron(pair.v(), &clock(q, theta)),
        theta: Angle::ZERO,
    }
}
