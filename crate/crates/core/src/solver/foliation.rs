//! Foliation probes: monotonicity of solved families in `k` and the linear
//! problem `Bⁱʲ g;ᵢⱼ = 1 + φ g` (i.e. `J g = -1`) governing the variation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::jacobi::jacobi_solve;
use crate::solver::newton::{newton_solve, NewtonOptions, SolveFailure};
use crate::surface::field::{Grid, HeightField};

const LINEAR_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoliationReport {
    pub ks: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Final `max |S + k²|` per `k`.
    pub residuals: Vec<f64>,
    /// `min (u_{k_i} - u_{k_{i+1}})` over interior nodes and consecutive
    /// `k_i < k_{i+1}`.
    pub min_gap: f64,
    pub strictly_decreasing: bool,
    /// `max g` per `k` for `J g = -1` with homogeneous boundary values on the
    /// solved leaf.
    pub g_max: Vec<f64>,
    pub g_negative: bool,
}

/// Solves `J g = -1` on `field` with `g = boundary` on the boundary (a
/// full-grid function whose interior entries are ignored).
///
/// With `boundary = ∂_k u / (2 k W)` taken from an exact family `u_k`, the
/// solution approximates the same quantity in the interior, since
/// `J (∂_k u / W) = ∂_k S = -2k`. On the round leaf it is `-1 / (2k³)`.
pub fn foliation_variation(field: &HeightField, boundary: &[f64]) -> Result<Vec<f64>> {
    let rhs = vec![-1.0; field.grid().len()];
    jacobi_solve(field, &rhs, boundary, LINEAR_TOL)
}

/// Solves the Dirichlet problem for every `k` in `ks` (sorted increasingly)
/// with boundary data `family(k)`, starting each solve from `family(k)`
/// itself, then checks pointwise strict decrease in `k` and the sign of the
/// homogeneous solution of `J g = -1` on each solved leaf.
pub fn foliation_probe(
    grid: Grid,
    family: &dyn Fn(f64) -> Result<HeightField>,
    ks: &[f64],
    opts: &NewtonOptions,
) -> core::result::Result<(Vec<HeightField>, FoliationReport), SolveFailure> {
    if ks.is_empty() || ks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition(format!("k values must be strictly increasing: {ks:?}")).into());
    }
    let mut sols = Vec::with_capacity(ks.len());
    let mut iterations = Vec::with_capacity(ks.len());
    let mut residuals = Vec::with_capacity(ks.len());
    let mut g_max = Vec::with_capacity(ks.len());
    for &k in ks {
        let data = family(k)?;
        if !data.grid().same_layout(&grid) {
            return Err(Error::InvalidField("family grid differs from probe grid".into()).into());
        }
        let (u, rep) = newton_solve(&data, k, &data, opts)?;
        iterations.push(rep.iterations);
        residuals.push(*rep.residual_history.last().unwrap_or(&f64::NAN));
        let g = foliation_variation(&u, &vec![0.0; grid.len()])?;
        g_max.push(grid.interior().into_iter().map(|i| g[i]).fold(f64::NEG_INFINITY, f64::max));
        sols.push(u);
    }
    let mut min_gap = f64::INFINITY;
    for pair in sols.windows(2) {
        for i in grid.interior() {
            min_gap = min_gap.min(pair[0].values()[i] - pair[1].values()[i]);
        }
    }
    let report = FoliationReport {
        ks: ks.to_vec(),
        iterations,
        residuals,
        min_gap,
        strictly_decreasing: min_gap > 0.0,
        g_negative: g_max.iter().all(|&g| g < 0.0),
        g_max,
    };
    Ok((sols, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::analytic::{AnalyticSurface, Hyperboloid};

    #[test]
    fn round_family_variation_matches_constant() {
        let k = 1.0;
        let grid = Grid::cube(2, -0.5, 0.5, 1.0 / 16.0).unwrap();
        let s = Hyperboloid::round(2, k).unwrap();
        let u = HeightField::sample(grid, &s).unwrap();
        let bnd: Vec<f64> = (0..grid.len())
            .map(|i| {
                let x = grid.coords(i);
                let (_, p, _) = s.graph_jet(&x[..2]).unwrap();
                let w = (1.0 - p[0] * p[0] - p[1] * p[1]).sqrt();
                s.dk(&x[..2]).unwrap() / (2.0 * k * w)
            })
            .collect();
        // the boundary data is the constant itself
        assert!(bnd.iter().all(|v| (v + 0.5).abs() < 1e-12));
        let g = foliation_variation(&u, &bnd).unwrap();
        for i in grid.interior() {
            assert!((g[i] + 0.5).abs() < 0.05 * 0.5, "{}", g[i]);
        }
    }

    #[test]
    fn probe_on_round_family() {
        let grid = Grid::cube(2, -0.5, 0.5, 0.125).unwrap();
        let family = |k: f64| HeightField::sample(grid, &Hyperboloid::round(2, k)?);
        let (_, rep) = foliation_probe(grid, &family, &[0.8, 1.0, 1.25], &NewtonOptions::default()).unwrap();
        assert!(rep.strictly_decreasing && rep.g_negative);
        assert!(foliation_probe(grid, &family, &[1.0, 0.8], &NewtonOptions::default()).is_err());
    }
}
