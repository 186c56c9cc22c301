//! Spacelike graph hypersurfaces: jets, scalar curvature, legendrian lifts
//! and curtain submanifolds.

pub mod analytic;
pub mod curtain;
pub mod field;
pub mod jet;

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sl::{contact_omega, graph_vectors, ContactPoint, LagrangianFrame, FRAME_TOL};

pub use analytic::{AffineGraph, AnalyticSurface, Hyperboloid, QuadricGraph, Rippled};
pub use curtain::{curtain_build, curtain_condition, CurtainSample, GeodesicSlice, Potential};
pub use field::{jet_at, Grid, HeightField, Stencil};
pub use jet::{SurfaceJet, SPACELIKE_MARGIN};

/// `2 / (d (d - 1))`, the normalization turning `σ₂` into scalar curvature.
pub fn sigma2_scale(d: usize) -> f64 {
    2.0 / (d * (d - 1)) as f64
}

/// `S = -(2 / (d (d - 1))) σ₂(λ)`; for `d = 3`, `-(λ₁λ₂ + λ₁λ₃ + λ₂λ₃) / 3`.
pub fn scalar_curvature(jet: &SurfaceJet) -> f64 {
    -sigma2_scale(jet.dim()) * jet.sigma2()
}

/// Legendrian lift `x ↦ (x, N(x))`: the frame `(e_a, A e_a)` over the
/// orthonormal tangent frame, i.e. the graph of the shape operator.
pub fn lift(jet: &SurfaceJet) -> Result<LagrangianFrame> {
    let p = ContactPoint::new(jet.point(), jet.normal)?;
    let vectors = graph_vectors(jet.frame(), &jet.shape);
    LagrangianFrame::new(p, vectors, FRAME_TOL)
        .map_err(|e| Error::InvalidFrame(format!("lift of a defective jet: {e}")))
}

/// Largest `|σ₂(A) - 1|` accepted by [`trace_ii_defect`].
pub const SIGMA2_UNIT_TOL: f64 = 1e-6;

fn lift_omega(surface: &dyn AnalyticSurface, x: &[f64]) -> Result<Complex64> {
    let jet = surface.jet(x)?;
    let p = ContactPoint::new(jet.point(), jet.normal)?;
    contact_omega(&p, &graph_vectors(jet.frame(), &jet.shape))
}

/// Trace of the second fundamental form of the lift in the direction of the
/// coordinate vector `direction`: the derivative of the phase of `Ω` along
/// the lift, `Im(D_X Ω / Ω)`, by Richardson-extrapolated central
/// differences of exact jets. Requires `σ₂(A) = 1` at `x`.
pub fn trace_ii_defect(surface: &dyn AnalyticSurface, x: &[f64], direction: &[f64]) -> Result<f64> {
    let d = surface.dim();
    if x.len() != d || direction.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if x.len() != d { x.len() } else { direction.len() },
        });
    }
    let jet = surface.jet(x)?;
    let s2 = jet.sigma2();
    if !((s2 - 1.0).abs() <= SIGMA2_UNIT_TOL) {
        return Err(Error::Precondition(format!(
            "surface does not satisfy σ₂(A) = 1 at the point (σ₂ = {s2:.6})"
        )));
    }
    let w0 = lift_omega(surface, x)?;
    let phase = |t: f64| -> Result<f64> {
        let xt: Vec<f64> = x.iter().zip(direction).map(|(a, v)| a + t * v).collect();
        Ok((lift_omega(surface, &xt)? / w0).arg())
    };
    let central = |h: f64| -> Result<f64> { Ok((phase(h)? - phase(-h)?) / (2.0 * h)) };
    let h = 1e-3;
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SMat;
    use crate::minkowski::MinkVector;
    use crate::sl::{gram_m, sl_defect};
    use core::f64::consts::FRAC_PI_2;

    #[test]
    fn scalar_curvature_examples() {
        let plane = AffineGraph::flat(3, 1.0).jet(&[0.0; 3]).unwrap();
        assert_eq!(scalar_curvature(&plane), 0.0);
        let j = Hyperboloid::round(3, 2.0).unwrap().jet(&[0.1, 0.0, 0.3]).unwrap();
        assert!((scalar_curvature(&j) + 4.0).abs() < 1e-12);
        let q = QuadricGraph {
            value: 0.0,
            slope: alloc::vec![0.0; 3],
            hessian: SMat::from_diag(&[1.0, 2.0, 3.0]),
        };
        let j = q.jet(&[0.0; 3]).unwrap();
        assert!((scalar_curvature(&j) + 11.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn lift_examples() {
        let plane = AffineGraph::flat(3, 0.0).jet(&[0.2; 3]).unwrap();
        let f = lift(&plane).unwrap();
        assert!(f.vectors().iter().all(|v| v.im == MinkVector::zero(3)));

        let k = 1.0 / 3f64.sqrt();
        let j = Hyperboloid::round(3, k).unwrap().jet(&[0.3, -0.2, 0.5]).unwrap();
        let f = lift(&j).unwrap();
        assert!(sl_defect(&f, FRAC_PI_2).abs() < 1e-8);
        assert!(gram_m(f.vectors()).cholesky().is_some());
    }

    #[test]
    fn trace_ii_vanishes_on_unit_sigma2_leaf() {
        let k = 1.0 / 3f64.sqrt();
        let s = Hyperboloid::round(3, k).unwrap();
        let t = trace_ii_defect(&s, &[0.3, 0.1, -0.2], &[1.0, 0.5, 0.0]).unwrap();
        assert!(t.abs() < 1e-7);
        let s = Hyperboloid::round(3, 1.0).unwrap();
        assert!(matches!(
            trace_ii_defect(&s, &[0.0; 3], &[1.0, 0.0, 0.0]),
            Err(Error::Precondition(_))
        ));
    }
}
