//! Minkowski space `R^{d,1}`: vectors, causal classes and Lorentz maps.
//!
//! Coordinates are `(x_1, .., x_d, x_{d+1})` with the temporal coordinate
//! last, so in 0-based indexing the time slot of a `dim = d` vector is `d`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SMat, MAX_DIM};
use crate::num;

/// Relative tolerance used by [`classify_default`]; the absolute threshold is
/// `CAUSAL_TOL * (1 + |v|²)` with `|·|` the euclidean norm.
pub const CAUSAL_TOL: f64 = 1e-10;

/// A point or vector of `R^{d,1}`.
#[derive(Clone, Copy, PartialEq)]
pub struct MinkVector {
    dim: usize,
    c: [f64; MAX_DIM],
}

impl core::fmt::Debug for MinkVector {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "MinkVector{:?}", self.coords())
    }
}

impl MinkVector {
    /// Builds a vector from its `d + 1` coordinates, time last.
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.len() < 2 || coords.len() > MAX_DIM {
            return Err(Error::UnsupportedDimension(coords.len().saturating_sub(1)));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("MinkVector"));
        }
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(MinkVector {
            dim: coords.len() - 1,
            c,
        })
    }

    /// Spatial part `s` and time `t`.
    pub fn from_parts(spatial: &[f64], time: f64) -> Result<Self> {
        let mut c = [0.0; MAX_DIM];
        let d = spatial.len();
        if d + 1 > MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        c[..d].copy_from_slice(spatial);
        c[d] = time;
        Self::new(&c[..=d])
    }

    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1 && dim < MAX_DIM, "unsupported dimension {dim}");
        MinkVector {
            dim,
            c: [0.0; MAX_DIM],
        }
    }

    /// Canonical basis vector `e_{k+1}`; `k = dim` is the temporal one.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zero(dim);
        v.c[k] = 1.0;
        v
    }

    /// The point `(s, sqrt(1 + |s|²))` of the hyperboloid `ℍ^d`.
    pub fn hyperboloid_point(spatial: &[f64]) -> Result<Self> {
        let r2: f64 = spatial.iter().map(|x| x * x).sum();
        Self::from_parts(spatial, num::sqrt(1.0 + r2))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.c[..=self.dim]
    }

    #[inline]
    pub fn spatial(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.c[self.dim]
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.coords()[k]
    }

    pub fn set(&mut self, k: usize, value: f64) {
        assert!(k <= self.dim);
        self.c[k] = value;
    }

    /// `⟨u, v⟩` without the dimension check; callers guarantee equal `dim`.
    #[inline]
    pub fn dot(&self, other: &MinkVector) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut s = 0.0;
        for k in 0..d {
            s += self.c[k] * other.c[k];
        }
        s - self.c[d] * other.c[d]
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn euclid_norm_sq(&self) -> f64 {
        self.coords().iter().map(|x| x * x).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|&x| x == 0.0)
    }

    /// Raises `x_i` index: `η v`.
    pub fn flat(&self) -> MinkVector {
        let mut v = *self;
        v.c[self.dim] = -v.c[self.dim];
        v
    }

    fn check_dim(&self, other: &MinkVector) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

/// The signature-(d,1) inner product.
pub fn mink_inner(u: &MinkVector, v: &MinkVector) -> Result<f64> {
    u.check_dim(v)?;
    Ok(u.dot(v))
}

impl Add for MinkVector {
    type Output = MinkVector;
    fn add(mut self, rhs: MinkVector) -> MinkVector {
        self += rhs;
        self
    }
}

impl AddAssign for MinkVector {
    fn add_assign(&mut self, rhs: MinkVector) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for k in 0..=self.dim {
            self.c[k] += rhs.c[k];
        }
    }
}

impl Sub for MinkVector {
    type Output = MinkVector;
    fn sub(mut self, rhs: MinkVector) -> MinkVector {
        self -= rhs;
        self
    }
}

impl SubAssign for MinkVector {
    fn sub_assign(&mut self, rhs: MinkVector) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for k in 0..=self.dim {
            self.c[k] -= rhs.c[k];
        }
    }
}

impl Neg for MinkVector {
    type Output = MinkVector;
    fn neg(self) -> MinkVector {
        self * -1.0
    }
}

impl Mul<f64> for MinkVector {
    type Output = MinkVector;
    fn mul(mut self, s: f64) -> MinkVector {
        for k in 0..=self.dim {
            self.c[k] *= s;
        }
        self
    }
}

impl Mul<MinkVector> for f64 {
    type Output = MinkVector;
    fn mul(self, v: MinkVector) -> MinkVector {
        v * self
    }
}

impl Serialize for MinkVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MinkVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        MinkVector::new(&v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalKind {
    Spacelike,
    Timelike,
    Null,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalClass {
    pub kind: CausalKind,
    /// `x_{d+1} > 0`; only meaningful for timelike and null vectors.
    pub future: bool,
}

/// Causal class of `v`. `tol` is relative: `‖v‖²` counts as null when
/// `|‖v‖²| <= tol * (1 + |v|²)`.
pub fn classify(v: &MinkVector, tol: f64) -> CausalClass {
    if v.is_zero() {
        return CausalClass {
            kind: CausalKind::Zero,
            future: false,
        };
    }
    let q = v.norm_sq();
    let thr = tol * (1.0 + v.euclid_norm_sq());
    let kind = if q > thr {
        CausalKind::Spacelike
    } else if q < -thr {
        CausalKind::Timelike
    } else {
        CausalKind::Null
    };
    let future = kind != CausalKind::Spacelike && v.time() > 0.0;
    CausalClass { kind, future }
}

pub fn classify_default(v: &MinkVector) -> CausalClass {
    classify(v, CAUSAL_TOL)
}

/// A linear isometry of `R^{d,1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzMap {
    m: SMat,
    tol: f64,
}

/// Default tolerance on `max |Mᵀ η M - η|`, relative to `1 + max|M|²`.
pub const LORENTZ_TOL: f64 = 1e-10;

fn eta(n: usize) -> SMat {
    let mut e = SMat::identity(n);
    e[(n - 1, n - 1)] = -1.0;
    e
}

/// `max |Mᵀ η M - η|`.
pub fn lorentz_residual(m: &SMat) -> f64 {
    let e = eta(m.order());
    (m.transpose() * e * *m - e).max_abs()
}

impl LorentzMap {
    /// Validates `Mᵀ η M = η` to `tol * (1 + max|M|²)`.
    pub fn new(m: SMat, tol: f64) -> Result<Self> {
        let n = m.order();
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension(n.saturating_sub(1)));
        }
        let residual = lorentz_residual(&m);
        let scale = 1.0 + m.max_abs() * m.max_abs();
        if !(residual <= tol * scale) {
            return Err(Error::NotLorentz {
                residual,
                tolerance: tol * scale,
            });
        }
        Ok(LorentzMap { m, tol })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(SMat::from_rows(rows), LORENTZ_TOL)
    }

    pub fn identity(dim: usize) -> Self {
        LorentzMap {
            m: SMat::identity(dim + 1),
            tol: LORENTZ_TOL,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.order() - 1
    }

    pub fn matrix(&self) -> &SMat {
        &self.m
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn residual(&self) -> f64 {
        lorentz_residual(&self.m)
    }

    /// `(M e_{d+1})_{d+1} > 0`.
    pub fn is_future_preserving(&self) -> bool {
        let d = self.dim();
        self.m[(d, d)] > 0.0
    }

    pub fn apply(&self, v: &MinkVector) -> MinkVector {
        assert_eq!(v.dim(), self.dim(), "dimension mismatch");
        let w = self.m.mul_vec(v.coords());
        MinkVector {
            dim: v.dim(),
            c: w,
        }
    }

    pub fn compose(&self, other: &LorentzMap) -> LorentzMap {
        LorentzMap {
            m: self.m * other.m,
            tol: self.tol.max(other.tol),
        }
    }

    /// `η Mᵀ η`, exact for Lorentz maps.
    pub fn inverse(&self) -> LorentzMap {
        let e = eta(self.m.order());
        LorentzMap {
            m: e * self.m.transpose() * e,
            tol: self.tol,
        }
    }

    /// Largest entry of `self - other`.
    pub fn distance(&self, other: &LorentzMap) -> f64 {
        (self.m - other.m).max_abs()
    }

    /// Rotation by `angle` in the spatial `(i, j)` plane.
    pub fn rotation(dim: usize, i: usize, j: usize, angle: f64) -> Result<Self> {
        if i >= dim || j >= dim || i == j {
            return Err(Error::OutOfRange {
                what: "rotation plane index",
                value: i.max(j) as f64,
            });
        }
        let mut m = SMat::identity(dim + 1);
        let (s, c) = (num::sin(angle), num::cos(angle));
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        Ok(LorentzMap { m, tol: LORENTZ_TOL })
    }

    /// The pure boost (no spatial rotation) taking `e_{d+1}` to the future
    /// unit timelike vector `y`.
    pub fn boost_to(y: &MinkVector) -> Result<Self> {
        check_future_unit(y)?;
        let d = y.dim();
        let s = y.spatial();
        let t = y.time();
        let m = SMat::from_fn(d + 1, |i, j| match (i < d, j < d) {
            (true, true) => (i == j) as u8 as f64 + s[i] * s[j] / (1.0 + t),
            (true, false) => s[i],
            (false, true) => s[j],
            (false, false) => t,
        });
        Ok(LorentzMap { m, tol: LORENTZ_TOL })
    }
}

/// Checks `‖y‖² = -1` (to `1e-9` relative) and `y_{d+1} > 0`.
pub fn check_future_unit(y: &MinkVector) -> Result<()> {
    let q = y.norm_sq();
    if !(num::abs(q + 1.0) <= 1e-9 * (1.0 + y.euclid_norm_sq())) || y.time() <= 0.0 {
        return Err(Error::NotUnit(format!(
            "expected a future unit timelike vector, got ‖y‖² = {q}, y_t = {}",
            y.time()
        )));
    }
    Ok(())
}

/// Boost of rapidity `rapidity` along the unit spatial direction `n`:
/// `e_{d+1} ↦ sinh(a) n + cosh(a) e_{d+1}`.
pub fn boost(direction: &MinkVector, rapidity: f64) -> Result<LorentzMap> {
    let d = direction.dim();
    let n = direction.spatial();
    let n2: f64 = n.iter().map(|x| x * x).sum();
    if num::abs(direction.time()) > 1e-12 || num::abs(n2 - 1.0) > 1e-10 {
        return Err(Error::NotUnit(format!(
            "boost direction must be a unit spatial vector, got {:?}",
            direction.coords()
        )));
    }
    if !rapidity.is_finite() {
        return Err(Error::NonFinite("rapidity"));
    }
    let (ch, sh) = (num::cosh(rapidity), num::sinh(rapidity));
    let m = SMat::from_fn(d + 1, |i, j| match (i < d, j < d) {
        (true, true) => (i == j) as u8 as f64 + (ch - 1.0) * n[i] * n[j],
        (true, false) => sh * n[i],
        (false, true) => sh * n[j],
        (false, false) => ch,
    });
    Ok(LorentzMap { m, tol: LORENTZ_TOL })
}

/// Orthonormalizes `d + 1` vectors spanning `R^{d,1}` into `d` spatial unit
/// vectors followed by one future unit timelike vector.
///
/// The most timelike input is used as the temporal pivot; if no input is
/// timelike, a timelike combination is taken from the negative eigendirection
/// of the Gram matrix. The remaining vectors are projected onto the
/// orthogonal complement, where the form is positive definite, and
/// Gram–Schmidt'ed with largest-norm pivoting.
pub fn lorentz_orthonormalize(basis: &[MinkVector]) -> Result<Vec<MinkVector>> {
    let Some(first) = basis.first() else {
        return Err(Error::Signature("empty basis".into()));
    };
    let d = first.dim();
    if basis.len() != d + 1 {
        return Err(Error::DimensionMismatch {
            expected: d + 1,
            found: basis.len(),
        });
    }
    for b in basis {
        first.check_dim(b)?;
    }
    let scale = basis
        .iter()
        .map(|b| b.euclid_norm_sq())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Err(Error::Signature("zero basis".into()));
    }
    let degenerate_tol = 1e-10 * scale;

    // temporal pivot
    let ratio = |b: &MinkVector| {
        let e = b.euclid_norm_sq();
        if e == 0.0 {
            0.0
        } else {
            b.norm_sq() / e
        }
    };
    let (pivot, best) = basis
        .iter()
        .enumerate()
        .map(|(i, b)| (i, ratio(b)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    let mut t = if best < -1e-8 {
        basis[pivot]
    } else {
        let n = d + 1;
        let gram = SMat::from_fn(n, |i, j| basis[i].dot(&basis[j]));
        let eig = gram.sym_eigen();
        if !(eig.min() < -degenerate_tol) {
            return Err(Error::Signature(format!(
                "no timelike direction in span (smallest Gram eigenvalue {:.3e})",
                eig.min()
            )));
        }
        let c = eig.vector(0);
        let mut t = MinkVector::zero(d);
        for (k, b) in basis.iter().enumerate() {
            t += *b * c[k];
        }
        t
    };
    let q = t.norm_sq();
    if !(q < -degenerate_tol) {
        return Err(Error::Signature("degenerate temporal direction".into()));
    }
    t = t * (1.0 / num::sqrt(-q));
    if t.time() < 0.0 {
        t = -t;
    }

    let mut rest: Vec<MinkVector> = basis
        .iter()
        .map(|b| *b + t * b.dot(&t))
        .collect();
    let mut out = Vec::with_capacity(d + 1);
    for _ in 0..d {
        let (idx, norm) = rest
            .iter()
            .enumerate()
            .map(|(i, w)| (i, w.norm_sq()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::Signature("rank deficient basis".into()))?;
        if !(norm > degenerate_tol) {
            return Err(Error::Signature(format!(
                "rank deficient basis (residual norm {norm:.3e})"
            )));
        }
        let e = rest.swap_remove(idx) * (1.0 / num::sqrt(norm));
        for w in rest.iter_mut() {
            let c = w.dot(&e);
            *w -= e * c;
        }
        // second pass against already accepted vectors for stability
        for w in rest.iter_mut() {
            for f in out.iter().chain(core::iter::once(&e)) {
                let c = w.dot(f);
                *w -= *f * c;
            }
            let c = w.dot(&t);
            *w += t * c;
        }
        out.push(e);
    }
    out.push(t);
    Ok(out)
}

/// Gram matrix `⟨e_i, e_j⟩` of a list of vectors.
pub fn gram(vectors: &[MinkVector]) -> SMat {
    SMat::from_fn(vectors.len(), |i, j| vectors[i].dot(&vectors[j]))
}

/// `max |Gram - η|` of a frame in the order returned by
/// [`lorentz_orthonormalize`].
pub fn orthonormality_residual(frame: &[MinkVector]) -> f64 {
    (gram(frame) - eta(frame.len())).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(k: usize) -> MinkVector {
        MinkVector::basis(3, k)
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(mink_inner(&e(0), &e(0)).unwrap(), 1.0);
        assert_eq!(mink_inner(&e(3), &e(3)).unwrap(), -1.0);
        let n = e(0) + e(3);
        assert_eq!(mink_inner(&n, &n).unwrap(), 0.0);
        let w = MinkVector::basis(2, 0);
        assert!(matches!(
            mink_inner(&e(0), &w),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let c = classify_default(&e(3));
        assert_eq!((c.kind, c.future), (CausalKind::Timelike, true));
        let c = classify_default(&(e(0) + e(3)));
        assert_eq!((c.kind, c.future), (CausalKind::Null, true));
        assert_eq!(classify_default(&e(0)).kind, CausalKind::Spacelike);
        assert_eq!(classify_default(&MinkVector::zero(3)).kind, CausalKind::Zero);
        assert!(!classify_default(&-e(3)).future);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(MinkVector::new(&[0.0, f64::NAN]).is_err());
        assert!(MinkVector::new(&[1.0]).is_err());
    }

    #[test]
    fn boost_examples() {
        let id = boost(&e(0), 0.0).unwrap();
        assert!(id.distance(&LorentzMap::identity(3)) == 0.0);
        let a = 0.7_f64;
        let b = boost(&e(0), a).unwrap();
        let img = b.apply(&e(3));
        let expect = [a.sinh(), 0.0, 0.0, a.cosh()];
        for (x, y) in img.coords().iter().zip(expect) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(b.residual() < 1e-14);
        let back = b.compose(&boost(&e(0), -a).unwrap());
        assert!(back.distance(&LorentzMap::identity(3)) < 1e-12);
        assert!(boost(&(e(0) * 2.0), 1.0).is_err());
    }

    #[test]
    fn boost_to_sends_time_axis_to_y() {
        let y = MinkVector::hyperboloid_point(&[0.3, -1.2, 0.5]).unwrap();
        let l = LorentzMap::boost_to(&y).unwrap();
        assert!(l.residual() < 1e-13);
        let img = l.apply(&e(3));
        assert!((img - y).euclid_norm_sq() < 1e-28);
        assert!(l.is_future_preserving());
    }

    #[test]
    fn inverse_is_eta_transpose_eta() {
        let n = MinkVector::new(&[0.6, 0.8, 0.0, 0.0]).unwrap();
        let l = boost(&n, 1.3)
            .unwrap()
            .compose(&LorentzMap::rotation(3, 1, 2, 0.4).unwrap());
        let id = l.compose(&l.inverse());
        assert!(id.distance(&LorentzMap::identity(3)) < 1e-12);
    }

    #[test]
    fn orthonormalize_canonical_and_boosted() {
        let canon: Vec<_> = (0..4).map(e).collect();
        let out = lorentz_orthonormalize(&canon).unwrap();
        assert_eq!(out[3], e(3));
        assert!(orthonormality_residual(&out) == 0.0);

        let l = boost(&e(1), 1.1).unwrap();
        let boosted: Vec<_> = canon.iter().map(|v| l.apply(v)).collect();
        let out = lorentz_orthonormalize(&boosted).unwrap();
        assert!(orthonormality_residual(&out) <= 1e-12);
        assert!((out[3] - l.apply(&e(3))).euclid_norm_sq() < 1e-24);
    }

    #[test]
    fn orthonormalize_without_timelike_input() {
        // all inputs null or spacelike
        let basis = [e(0) + e(3), e(0) - e(3), e(1), e(2)];
        let out = lorentz_orthonormalize(&basis).unwrap();
        assert!(orthonormality_residual(&out) <= 1e-12);
        assert!(out[3].time() > 0.0);
    }

    #[test]
    fn orthonormalize_rejects_degenerate() {
        let basis = [e(0), e(0) * 2.0, e(2), e(3)];
        assert!(matches!(
            lorentz_orthonormalize(&basis),
            Err(Error::Signature(_))
        ));
        // spacelike span of dimension 4 is impossible, but a null plane is
        let basis = [e(0) + e(3), (e(0) + e(3)) * 3.0, e(1), e(2)];
        assert!(lorentz_orthonormalize(&basis).is_err());
    }
}
