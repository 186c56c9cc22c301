//! Closed-form graphs with exact second-order jets, used as oracles.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{SMat, MAX_DIM};
use crate::minkowski::{boost, MinkVector};
use crate::num;

use super::jet::{SurfaceJet, SPACELIKE_MARGIN};

/// A graph `x_{d+1} = u(x)` whose value, gradient and hessian are known in
/// closed form.
pub trait AnalyticSurface {
    fn dim(&self) -> usize;

    /// `(u, ∇u, Hess u)` at `x`.
    fn graph_jet(&self, x: &[f64]) -> Result<(f64, [f64; MAX_DIM], SMat)>;

    fn height(&self, x: &[f64]) -> Result<f64> {
        Ok(self.graph_jet(x)?.0)
    }

    /// Exact [`SurfaceJet`] at `x`.
    fn jet(&self, x: &[f64]) -> Result<SurfaceJet> {
        let (u, p, h) = self.graph_jet(x)?;
        SurfaceJet::from_graph(x, u, &p[..self.dim()], h, SPACELIKE_MARGIN)
    }
}

fn check_len(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    Ok(())
}

/// `u(x) = c + ⟨b, x⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineGraph {
    pub value: f64,
    pub slope: Vec<f64>,
}

impl AffineGraph {
    pub fn flat(dim: usize, value: f64) -> Self {
        AffineGraph {
            value,
            slope: alloc::vec![0.0; dim],
        }
    }
}

impl AnalyticSurface for AffineGraph {
    fn dim(&self) -> usize {
        self.slope.len()
    }

    fn graph_jet(&self, x: &[f64]) -> Result<(f64, [f64; MAX_DIM], SMat)> {
        check_len(x, self.dim())?;
        let mut p = [0.0; MAX_DIM];
        p[..self.dim()].copy_from_slice(&self.slope);
        let u = self.value + x.iter().zip(&self.slope).map(|(a, b)| a * b).sum::<f64>();
        Ok((u, p, SMat::zeros(self.dim())))
    }
}

/// `u(x) = c + ⟨b, x⟩ + ½ xᵀ Q x`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricGraph {
    pub value: f64,
    pub slope: Vec<f64>,
    pub hessian: SMat,
}

impl AnalyticSurface for QuadricGraph {
    fn dim(&self) -> usize {
        self.slope.len()
    }

    fn graph_jet(&self, x: &[f64]) -> Result<(f64, [f64; MAX_DIM], SMat)> {
        let d = self.dim();
        check_len(x, d)?;
        let qx = self.hessian.mul_vec(x);
        let mut p = [0.0; MAX_DIM];
        let mut u = self.value;
        for a in 0..d {
            p[a] = self.slope[a] + qx[a];
            u += self.slope[a] * x[a] + 0.5 * x[a] * qx[a];
        }
        Ok((u, p, self.hessian))
    }
}

/// Future sheet of `‖X - c‖² = -1/k²`: `u(x) = c_t + sqrt(1/k² + |x - c_s|²)`.
/// Shape operator `k Id`, scalar curvature `-k²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperboloid {
    pub k: f64,
    pub center: MinkVector,
}

impl Hyperboloid {
    pub fn new(k: f64, center: MinkVector) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::OutOfRange { what: "k", value: k });
        }
        Ok(Hyperboloid { k, center })
    }

    /// Centered at the origin: the fuchsian leaf `Σ_k`.
    pub fn round(dim: usize, k: f64) -> Result<Self> {
        Self::new(k, MinkVector::zero(dim))
    }

    /// Image of the hyperboloid centered at `offset` under the boost of
    /// rapidity `rapidity` along `e_{axis}`: centered at `L · offset`.
    pub fn boosted(k: f64, offset: MinkVector, axis: usize, rapidity: f64) -> Result<Self> {
        let l = boost(&MinkVector::basis(offset.dim(), axis), rapidity)?;
        Self::new(k, l.apply(&offset))
    }

    fn rho(&self, x: &[f64]) -> (f64, [f64; MAX_DIM]) {
        let mut r = [0.0; MAX_DIM];
        let mut r2 = 1.0 / (self.k * self.k);
        for (a, xa) in x.iter().enumerate() {
            r[a] = xa - self.center.get(a);
            r2 += r[a] * r[a];
        }
        (num::sqrt(r2), r)
    }

    /// `∂u/∂k` at fixed `x`.
    pub fn dk(&self, x: &[f64]) -> Result<f64> {
        check_len(x, self.center.dim())?;
        let (rho, _) = self.rho(x);
        Ok(-1.0 / (self.k * self.k * self.k * rho))
    }
}

impl AnalyticSurface for Hyperboloid {
    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn graph_jet(&self, x: &[f64]) -> Result<(f64, [f64; MAX_DIM], SMat)> {
        let d = self.dim();
        check_len(x, d)?;
        let (rho, r) = self.rho(x);
        let mut p = [0.0; MAX_DIM];
        for a in 0..d {
            p[a] = r[a] / rho;
        }
        let h = SMat::from_fn(d, |a, b| ((a == b) as u8 as f64 - p[a] * p[b]) / rho);
        Ok((self.center.time() + rho, p, h))
    }
}

/// `base(x) + amplitude · sin(⟨wave, x⟩ + phase)`: a non-symmetric smooth
/// test surface.
#[derive(Clone, Debug, PartialEq)]
pub struct Rippled<S> {
    pub base: S,
    pub amplitude: f64,
    pub wave: Vec<f64>,
    pub phase: f64,
}

impl<S: AnalyticSurface> AnalyticSurface for Rippled<S> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn graph_jet(&self, x: &[f64]) -> Result<(f64, [f64; MAX_DIM], SMat)> {
        let d = self.dim();
        check_len(x, d)?;
        if self.wave.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.wave.len(),
            });
        }
        let (u, mut p, h) = self.base.graph_jet(x)?;
        let arg = x.iter().zip(&self.wave).map(|(a, b)| a * b).sum::<f64>() + self.phase;
        let (s, c) = (num::sin(arg), num::cos(arg));
        for a in 0..d {
            p[a] += self.amplitude * c * self.wave[a];
        }
        let h = h - SMat::outer(&self.wave, &self.wave).scale(self.amplitude * s);
        Ok((u + self.amplitude * s, p, h))
    }
}

impl<S: AnalyticSurface + ?Sized> AnalyticSurface for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn graph_jet(&self, x: &[f64]) -> Result<(f64, [f64; MAX_DIM], SMat)> {
        (**self).graph_jet(x)
    }
}

/// Checks that `x` stays where a surface is uniformly spacelike.
pub fn check_spacelike_at(surface: &dyn AnalyticSurface, x: &[f64], margin: f64) -> Result<()> {
    let (_, p, _) = surface.graph_jet(x)?;
    let n = num::sqrt(p[..surface.dim()].iter().map(|v| v * v).sum());
    if !(n < 1.0 - margin) {
        return Err(Error::Precondition(format!(
            "surface is not spacelike at {x:?}: |∇u| = {n:.6}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperboloid_shape_is_k_identity() {
        for k in [0.5, 1.0 / 3f64.sqrt(), 1.0, 2.0] {
            let s = Hyperboloid::round(3, k).unwrap();
            let j = s.jet(&[0.2, -0.3, 0.4]).unwrap();
            assert!((j.shape - SMat::identity(3).scale(k)).max_abs() < 1e-12);
            assert!((j.point().norm_sq() + 1.0 / (k * k)).abs() < 1e-12);
            // the normal is the position scaled by k
            assert!((j.normal - j.point() * k).euclid_norm_sq() < 1e-24);
        }
    }

    #[test]
    fn boosted_hyperboloid_still_umbilic() {
        let c0 = MinkVector::new(&[0.0, 0.0, 0.0, -0.5]).unwrap();
        let s = Hyperboloid::boosted(1.0, c0, 0, 0.8).unwrap();
        let j = s.jet(&[0.1, 0.2, -0.1]).unwrap();
        for l in j.principal() {
            assert!((l - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rippled_derivatives_match_differences() {
        let s = Rippled {
            base: Hyperboloid::round(2, 1.0).unwrap(),
            amplitude: 0.05,
            wave: alloc::vec![2.0, -1.0],
            phase: 0.3,
        };
        let x = [0.2, 0.1];
        let (_, p, h) = s.graph_jet(&x).unwrap();
        let eps = 1e-5;
        for a in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += eps;
            xm[a] -= eps;
            let (up, pp, _) = s.graph_jet(&xp).unwrap();
            let (um, pm, _) = s.graph_jet(&xm).unwrap();
            assert!(((up - um) / (2.0 * eps) - p[a]).abs() < 1e-9);
            for b in 0..2 {
                assert!(((pp[b] - pm[b]) / (2.0 * eps) - h[(a, b)]).abs() < 1e-8);
            }
        }
    }
}
