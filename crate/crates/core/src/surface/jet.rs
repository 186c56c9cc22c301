//! Second-order jets of spacelike graphs `x_{d+1} = u(x)`.
//!
//! With `p = ∇u` and `W = sqrt(1 - |p|²)`:
//!
//! * tangents `T_a = e_a + p_a e_{d+1}`, induced metric `g = I - p pᵀ`,
//!   inverse `G = I + p pᵀ / W²`;
//! * future unit normal `N = (p, 1) / W`;
//! * Weingarten map `dN(T_a) = Σ_b M_ba T_b` with `M = G Hess(u) / W`;
//! * in the orthonormal tangent frame `e_a = Σ_b T_b P_ba`, `P = g^{-1/2} =
//!   I + p pᵀ / (W (1 + W))`, the shape operator is the symmetric matrix
//!   `P Hess(u) P / W`.
//!
//! The sign makes the future hyperboloid `‖x‖² = -1/k²` have `A = k Id`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{SMat, MAX_DIM};
use crate::minkowski::MinkVector;
use crate::num;

/// Default spacelike margin: graphs must satisfy `|∇u| < 1 - margin`.
pub const SPACELIKE_MARGIN: f64 = 1e-3;

/// Pointwise geometry of a spacelike graph.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceJet {
    dim: usize,
    base: [f64; MAX_DIM],
    pub height: f64,
    grad: [f64; MAX_DIM],
    /// `Hess u` in graph coordinates.
    pub hessian: SMat,
    /// Future unit normal.
    pub normal: MinkVector,
    tangents: [MinkVector; MAX_DIM],
    frame: [MinkVector; MAX_DIM],
    /// Shape operator in the orthonormal tangent frame (symmetric).
    pub shape: SMat,
    principal: [f64; MAX_DIM],
}

/// `(W, P)` for a gradient `p` with `|p| < 1`.
pub(crate) fn graph_factors(p: &[f64]) -> (f64, SMat) {
    let p2: f64 = p.iter().map(|x| x * x).sum();
    let w = num::sqrt(1.0 - p2);
    let c = 1.0 / (w * (1.0 + w));
    let pm = SMat::from_fn(p.len(), |a, b| (a == b) as u8 as f64 + c * p[a] * p[b]);
    (w, pm)
}

/// `M = G H / W`, the Weingarten map in coordinate tangents.
pub fn weingarten(p: &[f64], hess: &SMat) -> SMat {
    let d = p.len();
    let p2: f64 = p.iter().map(|x| x * x).sum();
    let w2 = 1.0 - p2;
    let w = num::sqrt(w2);
    let g = SMat::from_fn(d, |a, b| (a == b) as u8 as f64 + p[a] * p[b] / w2);
    (g * *hess).scale(1.0 / w)
}

fn check_gradient(p: &[f64], margin: f64) -> Result<()> {
    let n = num::sqrt(p.iter().map(|x| x * x).sum());
    if !(n < 1.0 - margin) {
        return Err(Error::Precondition(format!(
            "graph is not uniformly spacelike: |∇u| = {n:.6} ≥ 1 - {margin}"
        )));
    }
    Ok(())
}

impl SurfaceJet {
    /// Builds the jet from graph data at the base point `x`.
    pub fn from_graph(x: &[f64], height: f64, grad: &[f64], hessian: SMat, margin: f64) -> Result<Self> {
        let d = x.len();
        if !(2..MAX_DIM).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        if grad.len() != d || hessian.order() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if grad.len() != d { grad.len() } else { hessian.order() },
            });
        }
        if !height.is_finite() || grad.iter().chain(x).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("surface jet"));
        }
        check_gradient(grad, margin)?;
        let asym = hessian.asymmetry();
        if asym > 1e-8 * (1.0 + hessian.max_abs()) {
            return Err(Error::NotSymmetric(asym));
        }
        let hessian = hessian.symmetrized();
        let (w, pm) = graph_factors(grad);
        let normal = MinkVector::from_parts(grad, 1.0)? * (1.0 / w);
        let mut tangents = [MinkVector::zero(d); MAX_DIM];
        for (a, t) in tangents.iter_mut().enumerate().take(d) {
            let mut c = [0.0; MAX_DIM];
            c[a] = 1.0;
            c[d] = grad[a];
            *t = MinkVector::new(&c[..=d])?;
        }
        let mut frame = [MinkVector::zero(d); MAX_DIM];
        for (a, e) in frame.iter_mut().enumerate().take(d) {
            for (b, t) in tangents.iter().enumerate().take(d) {
                *e += *t * pm[(b, a)];
            }
        }
        let shape = (pm * hessian * pm).scale(1.0 / w).symmetrized();
        let eig = shape.sym_eigen();
        let mut principal = [0.0; MAX_DIM];
        principal[..d].copy_from_slice(eig.values());
        let mut base = [0.0; MAX_DIM];
        base[..d].copy_from_slice(x);
        let mut g = [0.0; MAX_DIM];
        g[..d].copy_from_slice(grad);
        Ok(SurfaceJet {
            dim: d,
            base,
            height,
            grad: g,
            hessian,
            normal,
            tangents,
            frame,
            shape,
            principal,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Graph coordinates of the base point.
    pub fn base(&self) -> &[f64] {
        &self.base[..self.dim]
    }

    /// The point `(x, u(x))` of `R^{d,1}`.
    pub fn point(&self) -> MinkVector {
        MinkVector::from_parts(self.base(), self.height).expect("finite jet")
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad[..self.dim]
    }

    /// `W = sqrt(1 - |∇u|²)`
    pub fn w(&self) -> f64 {
        num::sqrt(1.0 - self.grad().iter().map(|x| x * x).sum::<f64>())
    }

    /// Coordinate tangents `T_a = e_a + ∂_a u e_{d+1}`.
    pub fn tangents(&self) -> &[MinkVector] {
        &self.tangents[..self.dim]
    }

    /// Orthonormal tangent frame in which [`SurfaceJet::shape`] is expressed.
    pub fn frame(&self) -> &[MinkVector] {
        &self.frame[..self.dim]
    }

    /// Principal curvatures, ascending.
    pub fn principal(&self) -> &[f64] {
        &self.principal[..self.dim]
    }

    pub fn sigma2(&self) -> f64 {
        self.shape.sigma2()
    }

    /// `G H / W`.
    pub fn weingarten(&self) -> SMat {
        weingarten(self.grad(), &self.hessian)
    }

    pub fn is_convex(&self) -> bool {
        self.principal[0] > 0.0
    }
}

/// Future unit normal to the span of `d` spacelike tangents, from the
/// cofactor (generalized cross product) construction.
pub fn normal_from_tangents(tangents: &[MinkVector]) -> Result<MinkVector> {
    let d = tangents.len();
    if d == 0 || tangents.iter().any(|t| t.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: tangents.first().map_or(0, |t| t.dim()),
        });
    }
    let mut c = [0.0; MAX_DIM];
    for (k, ck) in c.iter_mut().enumerate().take(d + 1) {
        let minor = SMat::from_fn(d, |a, j| {
            let col = if j < k { j } else { j + 1 };
            tangents[a].get(col)
        });
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *ck = sign * minor.det();
    }
    // euclidean-orthogonal n ⇒ η n is Minkowski-orthogonal
    let n = MinkVector::new(&c[..=d])?.flat();
    let q = n.norm_sq();
    if !(q < 0.0) {
        return Err(Error::Precondition("tangent plane is not spacelike".into()));
    }
    let n = n * (1.0 / num::sqrt(-q));
    Ok(if n.time() < 0.0 { -n } else { n })
}

/// Principal curvatures (ascending) of a parametrized hypersurface from its
/// first and second derivatives: eigenvalues of `g⁻¹ II` with
/// `II_ab = -⟨N, X_ab⟩`, `N` the future unit normal.
pub fn parametric_principal(tangents: &[MinkVector], second: &[Vec<MinkVector>]) -> Result<Vec<f64>> {
    let d = tangents.len();
    let n = normal_from_tangents(tangents)?;
    let g = SMat::from_fn(d, |a, b| tangents[a].dot(&tangents[b]));
    let ii = SMat::from_fn(d, |a, b| -n.dot(&second[a][b]));
    let l = g
        .cholesky()
        .ok_or_else(|| Error::Precondition("induced metric is not riemannian".into()))?;
    let li = l
        .inverse()
        .ok_or_else(|| Error::Numerical("singular induced metric".into()))?;
    let s = li * ii * li.transpose();
    Ok(s.sym_eigen().values().to_vec())
}
