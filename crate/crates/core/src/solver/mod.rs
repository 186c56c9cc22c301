//! The Jacobi operator and the Newton / continuation solver for
//! `σ₂(A) = d(d-1)k²/2` (scalar curvature `-k²`) on height fields with
//! Dirichlet data.
//!
//! Dirichlet data stand in for group equivariance: the compact quotients on
//! which the curvature problem is naturally posed cannot be realised on a
//! grid, so solutions are pinned on the boundary of a box instead, and
//! continuation runs over paths of boundary data.

pub mod continuation;
pub mod foliation;
pub mod jacobi;
pub mod newton;

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{SMat, MAX_DIM};
use crate::surface::field::Grid;
use crate::surface::sigma2_scale;

pub use continuation::{continuation, sampled_path, ContinuationFailure};
pub use foliation::{foliation_probe, foliation_variation, FoliationReport};
pub use jacobi::{
    assemble_b, jacobi_apply, jacobi_fd_check, jacobi_invertibility_check, jacobi_matrix, jacobi_solve, FdCheck,
    InvertibilityReport, JacobiMatrix,
};
pub use newton::{
    affine_init, curvature_residual, curvature_residual_field, newton_solve, NewtonOptions, SolveFailure,
    SolveReport,
};

/// `σ₂` value equivalent to scalar curvature `-k²`.
pub fn target_sigma2(d: usize, k: f64) -> f64 {
    k * k / sigma2_scale(d)
}

/// Coefficients of a linear second-order operator at one node:
/// `L f = Σ_ab K_ab ∂_ab f + Σ_a b_a ∂_a f + c f`, `K` symmetric.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PointOperator {
    pub k: SMat,
    pub b: [f64; MAX_DIM],
    pub c: f64,
}

/// Emits the second-order central-difference stencil of `op` at interior
/// node `i` as `(neighbour, weight)` pairs; the centre comes first.
pub(crate) fn stencil(grid: &Grid, i: usize, op: &PointOperator, mut emit: impl FnMut(usize, f64)) {
    let d = grid.dim();
    let h = grid.spacing();
    let mut centre = op.c;
    for a in 0..d {
        centre -= 2.0 * op.k[(a, a)] / (h[a] * h[a]);
    }
    emit(i, centre);
    for a in 0..d {
        let sa = grid.stride(a);
        let second = op.k[(a, a)] / (h[a] * h[a]);
        let first = op.b[a] / (2.0 * h[a]);
        emit(i + sa, second + first);
        emit(i - sa, second - first);
        for b in 0..a {
            let sb = grid.stride(b);
            let w = 2.0 * op.k[(a, b)] / (4.0 * h[a] * h[b]);
            emit(i + sa + sb, w);
            emit(i - sa - sb, w);
            emit(i + sa - sb, -w);
            emit(i - sa + sb, -w);
        }
    }
}

/// Interior (non-boundary) nodes and the inverse map flat → row.
#[derive(Clone, Debug)]
pub(crate) struct Unknowns {
    pub nodes: Vec<usize>,
    pub row: Vec<usize>,
}

impl Unknowns {
    pub fn new(grid: &Grid) -> Self {
        let nodes = grid.interior();
        let mut row = vec![usize::MAX; grid.len()];
        for (r, &i) in nodes.iter().enumerate() {
            row[i] = r;
        }
        Unknowns { nodes, row }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// Builds the CSR matrix of per-node operators over the interior unknowns;
/// couplings to boundary nodes are dropped (homogeneous Dirichlet).
pub(crate) fn assemble(
    grid: &Grid,
    unknowns: &Unknowns,
    ops: &[PointOperator],
) -> crate::sparse::Csr {
    let d = grid.dim();
    let per_row = 1 + 2 * d + 2 * d * (d - 1);
    let mut b = crate::sparse::CsrBuilder::new(unknowns.len(), unknowns.len() * per_row);
    for (r, &i) in unknowns.nodes.iter().enumerate() {
        stencil(grid, i, &ops[r], |j, w| {
            let c = unknowns.row[j];
            if c != usize::MAX {
                b.push(c, w);
            }
        });
        b.finish_row();
    }
    b.build()
}
