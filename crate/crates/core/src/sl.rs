//! The real special lagrangian structure on `R^{d,1} × R^{d,1}` and on the
//! contact fibres of the unit tangent bundle `M = U⁺R^{d,1}`.
//!
//! A pair `X = (X_r, X_i)` is identified with the complex vector
//! `X_r + i X_i`; `J` is multiplication by `i`, `R` is conjugation, and
//! `g + i ω` is the hermitian extension of the Minkowski form.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{complex_det, SMat, MAX_DIM};
use crate::minkowski::{check_future_unit, LorentzMap, MinkVector};
use crate::num;

/// An element `(X_r, X_i)` of `R^{d,1} × R^{d,1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairVector {
    pub re: MinkVector,
    pub im: MinkVector,
}

impl PairVector {
    pub fn new(re: MinkVector, im: MinkVector) -> Result<Self> {
        if re.dim() != im.dim() {
            return Err(Error::DimensionMismatch {
                expected: re.dim(),
                found: im.dim(),
            });
        }
        Ok(PairVector { re, im })
    }

    pub fn real(v: MinkVector) -> Self {
        PairVector {
            re: v,
            im: MinkVector::zero(v.dim()),
        }
    }

    pub fn imaginary(v: MinkVector) -> Self {
        PairVector {
            re: MinkVector::zero(v.dim()),
            im: v,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::real(MinkVector::zero(dim))
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    /// `J(X_r, X_i) = (-X_i, X_r)`
    pub fn j(&self) -> Self {
        PairVector {
            re: -self.im,
            im: self.re,
        }
    }

    /// `R(X_r, X_i) = (X_r, -X_i)`
    pub fn r(&self) -> Self {
        PairVector {
            re: self.re,
            im: -self.im,
        }
    }

    /// `ω(X, Y) = ⟨X_r, Y_i⟩ - ⟨Y_r, X_i⟩`
    pub fn omega(&self, y: &PairVector) -> f64 {
        self.re.dot(&y.im) - y.re.dot(&self.im)
    }

    /// `g(X, Y) = ⟨X_r, Y_r⟩ + ⟨X_i, Y_i⟩`
    pub fn g(&self, y: &PairVector) -> f64 {
        self.re.dot(&y.re) + self.im.dot(&y.im)
    }

    /// `m(X, Y) = ⟨X_r, Y_i⟩ + ⟨Y_r, X_i⟩`
    pub fn m(&self, y: &PairVector) -> f64 {
        self.re.dot(&y.im) + y.re.dot(&self.im)
    }

    /// `m(X, JY) = ⟨X_r, Y_r⟩ - ⟨X_i, Y_i⟩`, symmetric in `X, Y`.
    pub fn mj(&self, y: &PairVector) -> f64 {
        self.re.dot(&y.re) - self.im.dot(&y.im)
    }

    pub fn euclid_norm_sq(&self) -> f64 {
        self.re.euclid_norm_sq() + self.im.euclid_norm_sq()
    }

    /// Multiplies coordinate `k` of `X_r + i X_i` by `e^{i φ_k}`.
    pub fn phase_rotate(&self, phases: &[f64]) -> Self {
        assert_eq!(phases.len(), self.dim() + 1);
        let mut out = *self;
        for (k, &phi) in phases.iter().enumerate() {
            let (s, c) = (num::sin(phi), num::cos(phi));
            let (a, b) = (self.re.get(k), self.im.get(k));
            out.re.set(k, c * a - s * b);
            out.im.set(k, s * a + c * b);
        }
        out
    }

    pub fn apply_lorentz(&self, l: &LorentzMap) -> Self {
        PairVector {
            re: l.apply(&self.re),
            im: l.apply(&self.im),
        }
    }
}

impl Add for PairVector {
    type Output = PairVector;
    fn add(self, o: PairVector) -> PairVector {
        PairVector {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for PairVector {
    type Output = PairVector;
    fn sub(self, o: PairVector) -> PairVector {
        PairVector {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Neg for PairVector {
    type Output = PairVector;
    fn neg(self) -> PairVector {
        self * -1.0
    }
}

impl Mul<f64> for PairVector {
    type Output = PairVector;
    fn mul(self, s: f64) -> PairVector {
        PairVector {
            re: self.re * s,
            im: self.im * s,
        }
    }
}

fn same_dim(x: &PairVector, y: &PairVector) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(())
}

pub fn omega(x: &PairVector, y: &PairVector) -> Result<f64> {
    same_dim(x, y)?;
    Ok(x.omega(y))
}

pub fn jmap(x: &PairVector) -> PairVector {
    x.j()
}

pub fn rmap(x: &PairVector) -> PairVector {
    x.r()
}

pub fn gmet(x: &PairVector, y: &PairVector) -> Result<f64> {
    same_dim(x, y)?;
    Ok(x.g(y))
}

pub fn mmet(x: &PairVector, y: &PairVector) -> Result<f64> {
    same_dim(x, y)?;
    Ok(x.m(y))
}

/// Gram matrix of `form` over `vectors`.
pub fn gram_with(vectors: &[PairVector], form: impl Fn(&PairVector, &PairVector) -> f64) -> SMat {
    SMat::from_fn(vectors.len(), |i, j| form(&vectors[i], &vectors[j]))
}

pub fn gram_g(vectors: &[PairVector]) -> SMat {
    gram_with(vectors, PairVector::g)
}

pub fn gram_m(vectors: &[PairVector]) -> SMat {
    gram_with(vectors, PairVector::m)
}

pub fn gram_mj(vectors: &[PairVector]) -> SMat {
    gram_with(vectors, PairVector::mj)
}

/// `Ω̂(X_1, .., X_{d+1}) = det(dz^k(X_j))` with `dz^k(X) = ⟨e_k, X_r⟩ +
/// i⟨e_k, X_i⟩`. The temporal row therefore carries a sign flip; `Ω̂` is
/// only defined up to sign, and this fixes it once.
pub fn omega_hat_eval(vectors: &[PairVector]) -> Result<Complex64> {
    let Some(first) = vectors.first() else {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: 0,
        });
    };
    let d = first.dim();
    if vectors.len() != d + 1 {
        return Err(Error::DimensionMismatch {
            expected: d + 1,
            found: vectors.len(),
        });
    }
    for v in vectors {
        same_dim(first, v)?;
    }
    let mut m = [[Complex64::new(0.0, 0.0); MAX_DIM]; MAX_DIM];
    for (j, v) in vectors.iter().enumerate() {
        let (re, im) = (v.re.flat(), v.im.flat());
        for k in 0..=d {
            m[k][j] = Complex64::new(re.get(k), im.get(k));
        }
    }
    Ok(complex_det(d + 1, &mut m))
}

/// Phase factors `diag(e^{iφ_k})` and real Lorentz maps both preserve the
/// hermitian form; their products generate `U(d,1)`.
#[derive(Clone, Debug)]
pub enum UnitaryFactor {
    Lorentz(LorentzMap),
    Phases(Vec<f64>),
}

/// Image of the real subspace `R^{d,1} × {0}` under the product of
/// `factors` (applied first to last): the basis `U e_1, .., U e_{d+1}`.
pub fn unitary_image(dim: usize, factors: &[UnitaryFactor]) -> Vec<PairVector> {
    (0..=dim)
        .map(|k| {
            let mut v = PairVector::real(MinkVector::basis(dim, k));
            for f in factors {
                v = match f {
                    UnitaryFactor::Lorentz(l) => v.apply_lorentz(l),
                    UnitaryFactor::Phases(p) => v.phase_rotate(p),
                };
            }
            v
        })
        .collect()
}

/// Splits a (possibly indefinite) nondegenerate `g` into an orthonormal
/// basis: positive vectors first, then negative ones. Returns the basis and
/// the signature `(positive, negative)`.
pub fn g_orthonormalize(vectors: &[PairVector]) -> Result<(Vec<PairVector>, (usize, usize))> {
    let n = vectors.len();
    if n == 0 || n > MAX_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    let gram = gram_g(vectors);
    let eig = gram.sym_eigen();
    let scale = eig.values().iter().fold(0.0_f64, |a, &b| a.max(num::abs(b)));
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    if eig.values().iter().any(|&l| num::abs(l) <= tol) {
        return Err(Error::Signature("g is degenerate on the span".into()));
    }
    let mut out = Vec::with_capacity(n);
    let mut pos = 0;
    // values are ascending: negatives first, emit positives first
    let order: Vec<usize> = (0..n)
        .filter(|&k| eig.values()[k] > 0.0)
        .chain((0..n).filter(|&k| eig.values()[k] < 0.0))
        .collect();
    for &k in &order {
        let lambda = eig.values()[k];
        if lambda > 0.0 {
            pos += 1;
        }
        let s = 1.0 / num::sqrt(num::abs(lambda));
        let c = eig.vector(k);
        let mut w = PairVector::zero(vectors[0].dim());
        for (i, v) in vectors.iter().enumerate() {
            w = w + *v * (c[i] * s);
        }
        out.push(w);
    }
    Ok((out, (pos, n - pos)))
}

/// A point `(x, y)` of `M`: `‖y‖² = -1`, `y_{d+1} > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactPoint {
    pub x: MinkVector,
    pub y: MinkVector,
}

impl ContactPoint {
    pub fn new(x: MinkVector, y: MinkVector) -> Result<Self> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: y.dim(),
            });
        }
        check_future_unit(&y).map_err(|e| Error::InvalidContactPoint(format!("{e}")))?;
        Ok(ContactPoint { x, y })
    }

    /// `(0, e_{d+1})`.
    pub fn origin(dim: usize) -> Self {
        ContactPoint {
            x: MinkVector::zero(dim),
            y: MinkVector::basis(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.y.dim()
    }

    /// Orthonormal spatial basis of `y^⊥`: the spatial columns of the pure
    /// boost taking `e_{d+1}` to `y`.
    pub fn spatial_frame(&self) -> Vec<MinkVector> {
        let l = LorentzMap::boost_to(&self.y).expect("validated contact point");
        (0..self.dim())
            .map(|a| l.apply(&MinkVector::basis(self.dim(), a)))
            .collect()
    }

    /// `max(|⟨X_r, y⟩|, |⟨X_i, y⟩|)`.
    pub fn fibre_residual(&self, v: &PairVector) -> f64 {
        num::abs(v.re.dot(&self.y)).max(num::abs(v.im.dot(&self.y)))
    }
}

/// `λ_{(x,y)}(X) = ⟨X_r, y⟩`.
pub fn liouville(p: &ContactPoint, v: &PairVector) -> f64 {
    v.re.dot(&p.y)
}

/// Defect measurements of a candidate lagrangian frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameResiduals {
    /// Largest `|⟨X_r, y⟩|`, `|⟨X_i, y⟩|` relative to `|X|`.
    pub fibre: f64,
    /// Largest `|ω(X_a, X_b)|` relative to `|X_a||X_b|`.
    pub omega: f64,
    /// Smallest eigenvalue of the `g` Gram matrix relative to its largest.
    pub gram_min: f64,
}

impl FrameResiduals {
    pub fn measure(point: &ContactPoint, vectors: &[PairVector]) -> Self {
        let norms: Vec<f64> = vectors.iter().map(|v| num::sqrt(v.euclid_norm_sq())).collect();
        let mut fibre = 0.0_f64;
        let mut omega = 0.0_f64;
        for (a, v) in vectors.iter().enumerate() {
            fibre = fibre.max(point.fibre_residual(v) / norms[a].max(f64::MIN_POSITIVE));
            for b in 0..a {
                let w = &vectors[b];
                omega = omega.max(num::abs(v.omega(w)) / (norms[a] * norms[b]).max(f64::MIN_POSITIVE));
            }
        }
        let eig = gram_g(vectors).sym_eigen();
        let gram_min = if vectors.is_empty() || eig.max() <= 0.0 {
            0.0
        } else {
            eig.min() / eig.max()
        };
        FrameResiduals {
            fibre,
            omega,
            gram_min,
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.fibre <= tol && self.omega <= tol && self.gram_min > tol
    }
}

/// Default relative tolerance of [`LagrangianFrame`] invariants.
pub const FRAME_TOL: f64 = 1e-9;

/// `d` vectors spanning a lagrangian subspace of the fibre `α_{(x,y)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianFrame {
    point: ContactPoint,
    vectors: Vec<PairVector>,
    tol: f64,
}

impl LagrangianFrame {
    pub fn new(point: ContactPoint, vectors: Vec<PairVector>, tol: f64) -> Result<Self> {
        let d = point.dim();
        if vectors.len() != d {
            return Err(Error::InvalidFrame(format!(
                "expected {d} vectors, got {}",
                vectors.len()
            )));
        }
        if let Some(v) = vectors.iter().find(|v| v.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.dim(),
            });
        }
        let r = FrameResiduals::measure(&point, &vectors);
        if !(r.fibre <= tol) {
            return Err(Error::InvalidFrame(format!(
                "vector leaves the contact fibre (residual {:.3e})",
                r.fibre
            )));
        }
        if !(r.omega <= tol) {
            return Err(Error::InvalidFrame(format!(
                "ω does not vanish on the span (residual {:.3e})",
                r.omega
            )));
        }
        if !(r.gram_min > tol) {
            return Err(Error::InvalidFrame(format!(
                "vectors are linearly dependent (relative g eigenvalue {:.3e})",
                r.gram_min
            )));
        }
        Ok(LagrangianFrame { point, vectors, tol })
    }

    pub fn point(&self) -> &ContactPoint {
        &self.point
    }

    pub fn vectors(&self) -> &[PairVector] {
        &self.vectors
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    pub fn residuals(&self) -> FrameResiduals {
        FrameResiduals::measure(&self.point, &self.vectors)
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        (gram_g(&self.vectors) - SMat::identity(self.dim())).max_abs() <= tol
    }

    /// Same span, `g`-orthonormal basis (Cholesky whitening).
    pub fn orthonormalized(&self) -> Result<Self> {
        let c = whitening(&gram_g(&self.vectors))?;
        Ok(LagrangianFrame {
            point: self.point,
            vectors: combine(&self.vectors, &c),
            tol: self.tol,
        })
    }
}

/// `C` with `Cᵀ G C = Id` for a positive definite `G`.
fn whitening(gram: &SMat) -> Result<SMat> {
    let l = gram
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite(gram.sym_eigen().min()))?;
    let linv = l
        .inverse()
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    Ok(linv.transpose())
}

/// `w_j = Σ_i C_ij v_i`
fn combine(vectors: &[PairVector], c: &SMat) -> Vec<PairVector> {
    let n = vectors.len();
    (0..n)
        .map(|j| {
            let mut w = PairVector::zero(vectors[0].dim());
            for (i, v) in vectors.iter().enumerate() {
                w = w + *v * c[(i, j)];
            }
            w
        })
        .collect()
}

/// `Ω̂((y, 0), X_1, .., X_d)` at `p` without validating the vectors; returns
/// 0 on dependent input.
pub fn contact_omega(p: &ContactPoint, vectors: &[PairVector]) -> Result<Complex64> {
    let mut all = Vec::with_capacity(vectors.len() + 1);
    all.push(PairVector::real(p.y));
    all.extend_from_slice(vectors);
    omega_hat_eval(&all)
}

/// `Ω` of the frame; modulus 1 on `g`-orthonormal frames.
pub fn omega_eval(frame: &LagrangianFrame) -> Complex64 {
    contact_omega(&frame.point, &frame.vectors).expect("frame dimensions validated")
}

/// `Im(e^{iθ} Ω)` on the frame (no normalization of the frame).
pub fn sl_defect(frame: &LagrangianFrame, theta: f64) -> f64 {
    (Complex64::from_polar(1.0, theta) * omega_eval(frame)).im
}

fn check_symmetric(b: &SMat) -> Result<()> {
    let asym = b.asymmetry();
    if !(asym <= 1e-10 * (1.0 + b.max_abs())) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Vectors `(E_a, Σ_b B_ba E_b)`: the graph of `B` over the real subspace in
/// the basis `E`.
pub fn graph_vectors(basis: &[MinkVector], b: &SMat) -> Vec<PairVector> {
    let d = basis.len();
    (0..d)
        .map(|a| {
            let mut im = MinkVector::zero(basis[0].dim());
            for (c, e) in basis.iter().enumerate() {
                im += *e * b[(c, a)];
            }
            PairVector { re: basis[a], im }
        })
        .collect()
}

/// Frame spanned by the graph of the symmetric `B : R → I` over the
/// orthonormal basis [`ContactPoint::spatial_frame`] of `y^⊥`.
pub fn graph_frame(p: &ContactPoint, b: &SMat) -> Result<LagrangianFrame> {
    if b.order() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: b.order(),
        });
    }
    check_symmetric(b)?;
    let vectors = graph_vectors(&p.spatial_frame(), b);
    LagrangianFrame::new(*p, vectors, FRAME_TOL)
}

/// `Θ = Σ arctan λ_i` for positive definite `B`.
pub fn refined_angle(b: &SMat) -> Result<f64> {
    check_symmetric(b)?;
    let eig = b.sym_eigen();
    if !(eig.min() > 0.0) {
        return Err(Error::NotPositiveDefinite(eig.min()));
    }
    Ok(eig.values().iter().map(|&l| num::atan(l)).sum())
}

/// Joint eigenbasis of `m(·,·)` and `m(·,J·)` over a frame's span.
#[derive(Clone, Debug)]
pub struct JointDiagonal {
    /// `g`-orthonormal basis of the span.
    pub basis: Vec<PairVector>,
    /// `m(X_a, X_a)`, ascending.
    pub m: Vec<f64>,
    /// `m(X_a, J X_a)` in the same order.
    pub mj: Vec<f64>,
    /// Largest off-diagonal entry of either Gram matrix in `basis`.
    pub residual: f64,
}

/// Residual above which joint diagonalization is reported as failed.
pub const JOINT_TOL: f64 = 1e-7;

pub fn simultaneous_diagonalize(frame: &LagrangianFrame) -> Result<JointDiagonal> {
    let d = frame.dim();
    let white = combine(&frame.vectors, &whitening(&gram_g(&frame.vectors))?);
    let eig = gram_m(&white).sym_eigen();
    let mut basis = combine(&white, &eig.vectors);
    let values = eig.values();
    let scale = 1.0 + values.iter().fold(0.0_f64, |a, &b| a.max(num::abs(b)));

    // re-diagonalize m(·,J·) inside clusters of (numerically) equal m-values
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && values[end] - values[end - 1] < 1e-8 * scale {
            end += 1;
        }
        if end - start > 1 {
            let block = &basis[start..end];
            let inner = gram_mj(block).sym_eigen();
            let rotated = combine(block, &inner.vectors);
            basis[start..end].copy_from_slice(&rotated);
        }
        start = end;
    }

    let gm = gram_m(&basis);
    let gmj = gram_mj(&basis);
    let residual = gm.max_off_diagonal().max(gmj.max_off_diagonal());
    if !(residual <= JOINT_TOL) {
        return Err(Error::Numerical(format!(
            "joint diagonalization residual {residual:.3e}"
        )));
    }
    Ok(JointDiagonal {
        m: (0..d).map(|a| gm[(a, a)]).collect(),
        mj: (0..d).map(|a| gmj[(a, a)]).collect(),
        basis,
        residual,
    })
}

/// Eigenvalues of `m` with respect to `g` on the span, ascending.
pub fn m_eigenvalues(frame: &LagrangianFrame) -> Result<Vec<f64>> {
    let c = whitening(&gram_g(&frame.vectors))?;
    let m = c.transpose() * gram_m(&frame.vectors) * c;
    Ok(m.sym_eigen().values().to_vec())
}

/// `φ^k`: the minimum of `Σ_{a≤k} m(X_a, X_a)` over `g`-orthonormal
/// `k`-tuples, i.e. the sum of the `k` smallest `m`-eigenvalues.
pub fn phi_k(frame: &LagrangianFrame, k: usize) -> Result<f64> {
    if k == 0 || k > frame.dim() {
        return Err(Error::OutOfRange {
            what: "phi_k index",
            value: k as f64,
        });
    }
    Ok(m_eigenvalues(frame)?[..k].iter().sum())
}

/// Number of `m`-eigenvalues with `|λ| <= tol`.
pub fn nullity(frame: &LagrangianFrame, tol: f64) -> Result<usize> {
    Ok(m_eigenvalues(frame)?
        .iter()
        .filter(|l| num::abs(**l) <= tol)
        .count())
}

/// Curvature `g(R̄_{XY} Z, W)` of the contact distribution, in the expanded
/// four-term form. Grouped so that swapping `X ↔ Y` or `Z ↔ W` flips the sign
/// bit-exactly.
pub fn contact_curvature(
    p: &ContactPoint,
    x: &PairVector,
    y: &PairVector,
    z: &PairVector,
    w: &PairVector,
) -> Result<f64> {
    for v in [x, y, z, w] {
        if v.dim() != p.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                found: v.dim(),
            });
        }
        let scale = 1.0 + v.euclid_norm_sq();
        if p.fibre_residual(v) > FRAME_TOL * scale {
            return Err(Error::InvalidFrame(format!(
                "vector not in the contact fibre (residual {:.3e})",
                p.fibre_residual(v)
            )));
        }
    }
    let first = z.re.dot(&x.im) * w.re.dot(&y.im) + z.im.dot(&x.im) * w.im.dot(&y.im);
    let second = w.re.dot(&x.im) * z.re.dot(&y.im) + w.im.dot(&x.im) * z.im.dot(&y.im);
    Ok(first - second)
}
