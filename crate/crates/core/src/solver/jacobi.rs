//! The Jacobi operator `J f = Bⁱʲ(A²)ᵢⱼ f - Bⁱʲ f;ᵢⱼ`: the derivative of
//! scalar curvature under the normal variation `x ↦ x + t f(x) N(x)`.
//!
//! In graph coordinates the covariant hessian uses the Christoffel symbols
//! of `g = δ - ∇u ∇uᵀ`, `Γᶜ_ab = -u_c u_ab / W²`, so
//! `f;ab = f_ab + (∇u·∇f) u_ab / W²`. A normal variation `f` moves the
//! height at a fixed base point by `δu = W f` to first order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SMat, MAX_DIM};
use crate::num;
use crate::solver::{assemble, stencil, PointOperator, Unknowns};
use crate::sparse::{self, Csr};
use crate::surface::analytic::AnalyticSurface;
use crate::surface::scalar_curvature;
use crate::surface::field::{Grid, HeightField};
use crate::surface::jet::graph_factors;
use crate::surface::{sigma2_scale, SPACELIKE_MARGIN};

/// `B = (2 / (d (d - 1))) (tr A Id - A)`; for `d = 3`, `(tr A Id - A) / 3`.
/// Then `tr(B A) = 2 (2 / (d (d - 1))) σ₂(A) = -2 S`.
pub fn assemble_b(a: &SMat) -> Result<SMat> {
    let d = a.order();
    if d < 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    Ok((SMat::identity(d).scale(a.trace()) - *a).scale(sigma2_scale(d)))
}

/// Per-node data of `J`.
struct NodeData {
    op: PointOperator,
    min_principal: f64,
}

/// Shape operator in the orthonormal frame `e = P ∂`, and the contravariant
/// `Bⁱʲ = P B P`, from second-order jets at node `i`.
fn node_data(field: &HeightField, i: usize, margin: f64) -> Result<NodeData> {
    let d = field.dim();
    let (p, h) = field.derivatives2(i);
    let p = &p[..d];
    let p2: f64 = p.iter().map(|x| x * x).sum();
    if !(num::sqrt(p2) < 1.0 - margin) {
        return Err(Error::Precondition(format!(
            "jet at node {i} is not spacelike with margin {margin} (|∇u| = {:.6})",
            num::sqrt(p2)
        )));
    }
    let (w, pm) = graph_factors(p);
    let a = (pm * h * pm).scale(1.0 / w);
    let b = assemble_b(&a)?;
    let zeroth = (b * a * a).trace();
    let c = pm * b * pm;
    let mut cu = 0.0;
    for x in 0..d {
        for y in 0..d {
            cu += c[(x, y)] * h[(x, y)];
        }
    }
    let mut first = [0.0; MAX_DIM];
    for x in 0..d {
        first[x] = -cu * p[x] / (w * w);
    }
    Ok(NodeData {
        op: PointOperator {
            k: c.scale(-1.0),
            b: first,
            c: zeroth,
        },
        min_principal: a.sym_eigen().min(),
    })
}

/// `J f` at every node; `f` is a full-grid function. Interior nodes use
/// all their neighbours (boundary values included), boundary entries of the
/// result are 0.
pub fn jacobi_apply(field: &HeightField, f: &[f64]) -> Result<Vec<f64>> {
    let grid = field.grid();
    if f.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: f.len(),
        });
    }
    let mut out = vec![0.0; grid.len()];
    for i in grid.interior() {
        let nd = node_data(field, i, 0.0)?;
        let mut acc = 0.0;
        stencil(grid, i, &nd.op, |j, w| acc += w * f[j]);
        out[i] = acc;
    }
    Ok(out)
}

/// `J` assembled over interior nodes with homogeneous Dirichlet data.
#[derive(Clone, Debug)]
pub struct JacobiMatrix {
    pub matrix: Csr,
    /// Flat grid index of each row.
    pub nodes: Vec<usize>,
    /// Zeroth-order coefficient `Bⁱʲ(A²)ᵢⱼ` per row.
    pub zeroth: Vec<f64>,
    /// Smallest principal curvature per row.
    pub min_principal: Vec<f64>,
}

impl JacobiMatrix {
    pub fn min_zeroth(&self) -> f64 {
        self.zeroth.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Scatters a row vector back to a full-grid function (0 on the boundary).
    pub fn scatter(&self, grid: &Grid, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        for (r, &i) in self.nodes.iter().enumerate() {
            out[i] = x[r];
        }
        out
    }
}

pub fn jacobi_matrix(field: &HeightField) -> Result<JacobiMatrix> {
    let grid = field.grid();
    let unknowns = Unknowns::new(grid);
    let mut ops = Vec::with_capacity(unknowns.len());
    let mut zeroth = Vec::with_capacity(unknowns.len());
    let mut min_principal = Vec::with_capacity(unknowns.len());
    for &i in &unknowns.nodes {
        let nd = node_data(field, i, 0.0)?;
        zeroth.push(nd.op.c);
        min_principal.push(nd.min_principal);
        ops.push(nd.op);
    }
    Ok(JacobiMatrix {
        matrix: assemble(grid, &unknowns, &ops),
        nodes: unknowns.nodes,
        zeroth,
        min_principal,
    })
}

/// Solves `J g = rhs` at interior nodes with `g = boundary` on boundary
/// nodes; both arguments are full-grid functions.
pub fn jacobi_solve(field: &HeightField, rhs: &[f64], boundary: &[f64], tol: f64) -> Result<Vec<f64>> {
    let grid = field.grid();
    for v in [rhs, boundary] {
        if v.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: v.len(),
            });
        }
    }
    let unknowns = Unknowns::new(grid);
    let mut ops = Vec::with_capacity(unknowns.len());
    let mut b = Vec::with_capacity(unknowns.len());
    for &i in &unknowns.nodes {
        let nd = node_data(field, i, 0.0)?;
        let mut r = rhs[i];
        stencil(grid, i, &nd.op, |j, w| {
            if unknowns.row[j] == usize::MAX {
                r -= w * boundary[j];
            }
        });
        b.push(r);
        ops.push(nd.op);
    }
    let (x, _) = sparse::solve(&assemble(grid, &unknowns, &ops), &b, tol)?;
    let mut out = boundary.to_vec();
    for (r, &i) in unknowns.nodes.iter().enumerate() {
        out[i] = x[r];
    }
    Ok(out)
}

/// Outcome of [`jacobi_fd_check`]; vectors are over interior nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdCheck {
    pub finite_difference: Vec<f64>,
    pub operator: Vec<f64>,
    /// `max |fd - J f| / max |J f|` (0 when both vanish).
    pub relative_error: f64,
}

/// Compares `J f` with `(S_ε(x) - S_0(y)) / ε`, where `S_ε` is the discrete
/// scalar curvature of the normally displaced surface `x + ε f N` re-read as
/// a height field on `grid`. The displaced surface is resampled exactly: the
/// base point `y` over grid node `x` solves `y + ε f(y) ∇u(y) / W(y) = x`.
///
/// The comparison follows the point, not the coordinate: a fixed-`x`
/// difference picks up the drift `-f ⟨∇S, ∇u⟩ / W` wherever `S` is not
/// constant. `S_0(y)` is taken as `S_0(x) + S(y) - S(x)` with the last two
/// from analytic jets, which removes the drift to `O(ε)`.
pub fn jacobi_fd_check(
    surface: &dyn AnalyticSurface,
    grid: Grid,
    f: &dyn Fn(&[f64]) -> f64,
    eps: f64,
) -> Result<FdCheck> {
    let d = grid.dim();
    if surface.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: surface.dim(),
        });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::OutOfRange { what: "eps", value: eps });
    }
    let base = HeightField::sample(grid, surface)?;
    base.check_spacelike(SPACELIKE_MARGIN)?;
    let mut fvals = Vec::with_capacity(grid.len());
    let mut moved = Vec::with_capacity(grid.len());
    let mut drift = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let x = grid.coords(i);
        let x = &x[..d];
        fvals.push(f(x));
        let mut y = [0.0; MAX_DIM];
        y[..d].copy_from_slice(x);
        let mut converged = false;
        for _ in 0..100 {
            let (_, p, _) = surface.graph_jet(&y[..d])?;
            let w = num::sqrt(1.0 - p[..d].iter().map(|v| v * v).sum::<f64>());
            let fy = eps * f(&y[..d]) / w;
            let mut change = 0.0_f64;
            for a in 0..d {
                let next = x[a] - fy * p[a];
                change = change.max(num::abs(next - y[a]));
                y[a] = next;
            }
            if change <= 1e-15 * (1.0 + num::abs(x[0])) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "displaced surface is not a graph near node {i} (eps = {eps})"
            )));
        }
        let (u, p, _) = surface.graph_jet(&y[..d])?;
        let w = num::sqrt(1.0 - p[..d].iter().map(|v| v * v).sum::<f64>());
        moved.push(u + eps * f(&y[..d]) / w);
        drift.push(if grid.is_boundary(i) {
            0.0
        } else {
            scalar_curvature(&surface.jet(&y[..d])?) - scalar_curvature(&surface.jet(x)?)
        });
    }
    let moved = HeightField::new(grid, moved)?;
    moved
        .check_spacelike(SPACELIKE_MARGIN)
        .map_err(|e| Error::Precondition(format!("displaced surface: {e}")))?;

    let s0 = super::newton::curvature_residual_field(&base, 0.0)?;
    let s1 = super::newton::curvature_residual_field(&moved, 0.0)?;
    let jf = jacobi_apply(&base, &fvals)?;
    let nodes = grid.interior();
    let fd: Vec<f64> = nodes.iter().map(|&i| (s1[i] - s0[i] - drift[i]) / eps).collect();
    let op: Vec<f64> = nodes.iter().map(|&i| jf[i]).collect();
    let scale = op.iter().fold(0.0_f64, |m, v| m.max(num::abs(*v)));
    let diff = fd
        .iter()
        .zip(&op)
        .fold(0.0_f64, |m, (a, b)| m.max(num::abs(a - b)));
    let relative_error = if scale == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / scale
    };
    Ok(FdCheck {
        finite_difference: fd,
        operator: op,
        relative_error,
    })
}

/// Outcome of [`jacobi_invertibility_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityReport {
    /// Inverse-iteration estimate of the smallest singular value of the
    /// assembled operator (homogeneous boundary).
    pub sigma_min_estimate: f64,
    /// `min Bⁱʲ(A²)ᵢⱼ` over interior nodes.
    pub zeroth_floor: f64,
    /// Smallest `|J_ii| - Σ_{j≠i} |J_ij|` over rows.
    pub diagonal_margin: f64,
    pub diagonally_dominant: bool,
    pub iterations: usize,
}

/// Estimates the smallest singular value of `J` by inverse iteration on
/// `JᵀJ` and checks the maximum-principle structure. Requires `A ≻ 0` at
/// every interior node.
pub fn jacobi_invertibility_check(field: &HeightField) -> Result<InvertibilityReport> {
    let jm = jacobi_matrix(field)?;
    let worst = jm.min_principal.iter().copied().fold(f64::INFINITY, f64::min);
    if !(worst > 0.0) {
        return Err(Error::Precondition(format!(
            "shape operator is not positive definite (min principal curvature {worst:.3e})"
        )));
    }
    let zeroth_floor = jm.min_zeroth();
    let n = jm.matrix.n();
    let jt = jm.matrix.transpose();
    let pre = sparse::Ilu0::new(&jm.matrix)?;
    let pre_t = sparse::Ilu0::new(&jt)?;
    let mut x: Vec<f64> = (0..n).map(|r| 1.0 + 0.1 * ((r * 37 % 11) as f64)).collect();
    normalize(&mut x);
    let mut estimate = f64::INFINITY;
    let mut iterations = 0;
    let max_iter = 10 * n.max(100);
    for it in 0..50 {
        iterations = it + 1;
        // y = J^{-1} J^{-T} x
        let mut z = vec![0.0; n];
        sparse::bicgstab(&jt, &pre_t, &x, &mut z, 1e-10, max_iter)?;
        let mut y = vec![0.0; n];
        sparse::bicgstab(&jm.matrix, &pre, &z, &mut y, 1e-10, max_iter)?;
        let growth = normalize(&mut y);
        let next = 1.0 / num::sqrt(growth);
        x = y;
        let done = num::abs(next - estimate) <= 1e-6 * next;
        estimate = next;
        if done {
            break;
        }
    }
    if !(estimate > 0.0 && estimate.is_finite()) {
        return Err(Error::Numerical(format!(
            "singular value estimate {estimate} is not positive"
        )));
    }
    let diagonal_margin = jm.matrix.min_diagonal_margin();
    Ok(InvertibilityReport {
        sigma_min_estimate: estimate,
        zeroth_floor,
        diagonal_margin,
        diagonally_dominant: diagonal_margin > 0.0,
        iterations,
    })
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = num::sqrt(x.iter().map(|v| v * v).sum());
    for v in x.iter_mut() {
        *v /= n;
    }
    n
}
