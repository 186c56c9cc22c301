//! Curtain submanifolds `N^ξS = {(x + ξ(y), y) | y ∈ S, x ∈ N_yS}` over
//! totally geodesic `S ⊂ ℍ^d`, with `ξ = ∇φ - φ y`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{det_shifted, SMat};
use crate::minkowski::{LorentzMap, MinkVector};
use crate::num;
use crate::sl::{ContactPoint, LagrangianFrame, PairVector, FRAME_TOL};

/// `S = ℍ^d ∩ {x_k = level for every spatial axis k not in axes}`.
/// Only `level = 0` (a totally geodesic `ℍ^{d'}`, `d' = axes.len()`) is
/// supported.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSlice {
    dim: usize,
    axes: Vec<usize>,
}

impl GeodesicSlice {
    pub fn new(dim: usize, axes: &[usize], level: f64) -> Result<Self> {
        if !(1..crate::MAX_DIM).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if level != 0.0 {
            return Err(Error::Unsupported(format!(
                "slice at level {level} is an equidistant hypersurface, not totally geodesic"
            )));
        }
        let mut sorted = axes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != axes.len() || sorted.iter().any(|&a| a >= dim) {
            return Err(Error::Unsupported(format!("invalid slice axes {axes:?}")));
        }
        Ok(GeodesicSlice { dim, axes: sorted })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `d'`
    pub fn slice_dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    /// Spatial axes spanning the normal space `N_yS`.
    pub fn normal_axes(&self) -> Vec<usize> {
        (0..self.dim).filter(|a| !self.axes.contains(a)).collect()
    }

    /// The point of `S` with coordinates `s` along [`Self::axes`].
    pub fn point(&self, s: &[f64]) -> Result<MinkVector> {
        if s.len() != self.axes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.axes.len(),
                found: s.len(),
            });
        }
        let mut spatial = alloc::vec![0.0; self.dim];
        for (k, &a) in self.axes.iter().enumerate() {
            spatial[a] = s[k];
        }
        MinkVector::hyperboloid_point(&spatial)
    }
}

/// Functions on `S` with closed-form jets.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Constant(f64),
    /// `φ(y) = c + ⟨a, y⟩` with `a` in the ambient span of `S`; then
    /// `Hess φ = ⟨a, y⟩ Id` and `ξ = a - c y`.
    Linear { constant: f64, covector: MinkVector },
}

/// `(φ, ∇φ, Hess φ)` at `y ∈ S`, the hessian in the orthonormal basis
/// returned alongside.
struct PotentialJet {
    value: f64,
    grad: MinkVector,
    hessian: SMat,
}

impl Potential {
    fn jet(&self, slice: &GeodesicSlice, y: &MinkVector, tangent: &[MinkVector]) -> Result<PotentialJet> {
        let dp = slice.slice_dim();
        match self {
            Potential::Constant(c) => Ok(PotentialJet {
                value: *c,
                grad: MinkVector::zero(slice.dim()),
                hessian: SMat::zeros(dp),
            }),
            Potential::Linear { constant, covector } => {
                if covector.dim() != slice.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: slice.dim(),
                        found: covector.dim(),
                    });
                }
                if slice.normal_axes().iter().any(|&k| covector.get(k) != 0.0) {
                    return Err(Error::Unsupported(
                        "linear potential must lie in the ambient span of S".into(),
                    ));
                }
                let l = covector.dot(y);
                let mut grad = MinkVector::zero(slice.dim());
                for e in tangent {
                    grad += *e * covector.dot(e);
                }
                Ok(PotentialJet {
                    value: constant + l,
                    grad,
                    hessian: SMat::identity(dp).scale(l),
                })
            }
        }
    }
}

/// `Im(e^{iθ} det(Hess φ + (i - φ) Id))`.
pub fn curtain_condition(phi: f64, hessian: &SMat, theta: f64) -> f64 {
    let det = det_shifted(hessian, Complex64::new(-phi, 1.0), Complex64::new(1.0, 0.0));
    (Complex64::from_polar(1.0, theta) * det).im
}

/// A point of `N^ξS` with its tangent frame.
#[derive(Clone, Debug)]
pub struct CurtainSample {
    pub base: MinkVector,
    pub offset: MinkVector,
    pub displacement: MinkVector,
    pub frame: LagrangianFrame,
    /// `φ` and `Hess φ` at `base`, for [`curtain_condition`].
    pub phi: f64,
    pub hessian: SMat,
}

impl CurtainSample {
    pub fn point(&self) -> &ContactPoint {
        self.frame.point()
    }
}

/// Samples `N^ξS` at every `(base, offset)` pair. `bases` are coordinates on
/// `S` (length `d'` each); an offset `r` places `x = r Σ_k e_k / sqrt(#k)`
/// over the normal axes (and `x = 0` when `S = ℍ^d`).
///
/// Frames: `f_i = ((Hess φ - φ Id) e_i, e_i)` over an orthonormal basis
/// `e_i` of `T_yS`, and `(e_k, 0)` over the normal axes.
pub fn curtain_build(
    slice: &GeodesicSlice,
    potential: &Potential,
    bases: &[Vec<f64>],
    offsets: &[f64],
) -> Result<Vec<CurtainSample>> {
    let d = slice.dim();
    let normals = slice.normal_axes();
    let mut out = Vec::with_capacity(bases.len() * offsets.len());
    for s in bases {
        let y = slice.point(s)?;
        let l = LorentzMap::boost_to(&y)?;
        // the pure boost fixes every normal axis; its other columns span T_yS
        let tangent: Vec<MinkVector> = slice
            .axes()
            .iter()
            .map(|&a| l.apply(&MinkVector::basis(d, a)))
            .collect();
        let jet = potential.jet(slice, &y, &tangent)?;
        let a = jet.hessian - SMat::identity(slice.slice_dim()).scale(jet.value);
        let xi = jet.grad - y * jet.value;
        let mut vectors = Vec::with_capacity(d);
        for (i, ei) in tangent.iter().enumerate() {
            let mut re = MinkVector::zero(d);
            for (j, ej) in tangent.iter().enumerate() {
                re += *ej * a[(j, i)];
            }
            vectors.push(PairVector::new(re, *ei)?);
        }
        for &k in &normals {
            vectors.push(PairVector::real(MinkVector::basis(d, k)));
        }
        for &r in offsets {
            let mut x = MinkVector::zero(d);
            if !normals.is_empty() {
                let c = r / num::sqrt(normals.len() as f64);
                for &k in &normals {
                    x.set(k, c);
                }
            }
            let point = ContactPoint::new(x + xi, y)?;
            let frame = LagrangianFrame::new(point, vectors.clone(), FRAME_TOL)?;
            out.push(CurtainSample {
                base: y,
                offset: x,
                displacement: xi,
                frame,
                phi: jet.value,
                hessian: jet.hessian,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl::{nullity, sl_defect};
    use core::f64::consts::FRAC_PI_2;

    #[test]
    fn curtain_condition_examples() {
        let z = SMat::zeros(2);
        assert!(curtain_condition(1.0, &z, FRAC_PI_2).abs() < 1e-15);
        assert!((curtain_condition(0.0, &z, FRAC_PI_2) + 1.0).abs() < 1e-15);
        for c in [-0.5, 0.3, 2.0] {
            assert!((curtain_condition(c, &z, FRAC_PI_2) - (c * c - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_one_curtain_is_special() {
        let s = GeodesicSlice::new(3, &[1, 2], 0.0).unwrap();
        let bases = alloc::vec![alloc::vec![0.0, 0.0], alloc::vec![0.5, -1.0]];
        let samples = curtain_build(&s, &Potential::Constant(1.0), &bases, &[0.0, 1.5]).unwrap();
        assert_eq!(samples.len(), 4);
        for smp in &samples {
            assert!(smp.frame.residuals().passes(1e-12));
            assert!(sl_defect(&smp.frame, FRAC_PI_2).abs() < 1e-12);
            assert!(nullity(&smp.frame, 1e-9).unwrap() >= 1);
        }
    }

    #[test]
    fn constant_zero_curtain_has_unit_defect() {
        let s = GeodesicSlice::new(3, &[0, 1], 0.0).unwrap();
        let smp = curtain_build(&s, &Potential::Constant(0.0), &[alloc::vec![0.3, 0.2]], &[0.7]).unwrap();
        assert!((sl_defect(&smp[0].frame, FRAC_PI_2).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_slice_is_horizontal() {
        let s = GeodesicSlice::new(3, &[], 0.0).unwrap();
        let smp = curtain_build(&s, &Potential::Constant(2.0), &[alloc::vec![]], &[1.0]).unwrap();
        assert_eq!(nullity(&smp[0].frame, 1e-12).unwrap(), 3);
        for v in smp[0].frame.vectors() {
            assert_eq!(v.im, MinkVector::zero(3));
        }
    }

    #[test]
    fn linear_potential_translates() {
        let s = GeodesicSlice::new(3, &[0, 1], 0.0).unwrap();
        let a = MinkVector::new(&[0.2, -0.1, 0.0, 0.3]).unwrap();
        let pot = Potential::Linear {
            constant: 1.0,
            covector: a,
        };
        let smp = curtain_build(&s, &pot, &[alloc::vec![0.4, 0.1]], &[0.0]).unwrap();
        let expect = a - smp[0].base;
        assert!((smp[0].displacement - expect).euclid_norm_sq() < 1e-26);
        assert!(sl_defect(&smp[0].frame, FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn non_geodesic_slice_is_unsupported() {
        assert!(matches!(
            GeodesicSlice::new(3, &[1, 2], 0.5),
            Err(Error::Unsupported(_))
        ));
    }
}
