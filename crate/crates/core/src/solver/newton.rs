//! Damped Newton for `σ₂(A[u]) = target` with Dirichlet data.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SMat, MAX_DIM};
use crate::num;
use crate::solver::{assemble, stencil, target_sigma2, PointOperator, Unknowns};
use crate::sparse;
use crate::surface::field::{Grid, HeightField};
use crate::surface::jet::graph_factors;
use crate::surface::sigma2_scale;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Convergence threshold on `max |S + k²|` over interior nodes.
    pub tol: f64,
    pub max_iter: usize,
    /// Line-search halvings per Newton step.
    pub max_halvings: usize,
    /// Spacelike margin every iterate must respect.
    pub margin: f64,
    /// Relative residual of the inner linear solves.
    pub linear_tol: f64,
    /// Mean-curvature predictor steps allowed for non-convex initial data.
    pub max_predictor: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-8,
            max_iter: 30,
            max_halvings: 20,
            margin: crate::surface::SPACELIKE_MARGIN,
            linear_tol: 1e-11,
            max_predictor: 5,
        }
    }
}

/// Trace of a solve. `residual_history[j]` is `max |S + k²|` at the `j`-th
/// accepted iterate (index 0 is the starting iterate after any predictor
/// steps).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub predictor_steps: usize,
    pub residual_history: Vec<f64>,
    pub damping_steps: Vec<usize>,
    pub linear_iterations: Vec<usize>,
    /// Smallest principal curvature over the interior at each accepted
    /// iterate; all positive by construction.
    pub min_principal_history: Vec<f64>,
    pub min_principal: f64,
    pub converged: bool,
}

/// A failed solve together with what was recorded up to the failure.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveFailure {
    pub error: Error,
    pub report: SolveReport,
}

impl core::fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} (after {} iterations)", self.error, self.report.iterations)
    }
}

impl core::error::Error for SolveFailure {}

impl From<Error> for SolveFailure {
    fn from(error: Error) -> Self {
        SolveFailure {
            error,
            report: SolveReport::default(),
        }
    }
}

/// `σ₂(M)` and its derivatives for `M = G H / W`: `∂σ₂/∂H_ab = K_ab`
/// (symmetrized) and `∂σ₂/∂p_a`.
pub(crate) fn sigma2_linearization(p: &[f64], h: &SMat) -> (f64, SMat, [f64; MAX_DIM]) {
    let d = p.len();
    let p2: f64 = p.iter().map(|x| x * x).sum();
    let w2 = 1.0 - p2;
    let w = num::sqrt(w2);
    let g = SMat::from_fn(d, |a, b| (a == b) as u8 as f64 + p[a] * p[b] / w2);
    let m = (g * *h).scale(1.0 / w);
    let s2 = m.sigma2();
    let cof = SMat::identity(d).scale(m.trace()) - m;
    let k = (cof * g).symmetrized().scale(1.0 / w);
    let q = *h * cof;
    let qp = q.mul_vec(p);
    let qtp = q.transpose().mul_vec(p);
    let pqp: f64 = (0..d).map(|a| p[a] * qp[a]).sum();
    let mut gp = [0.0; MAX_DIM];
    for a in 0..d {
        gp[a] = ((qtp[a] + qp[a]) / w2 + 2.0 * pqp * p[a] / (w2 * w2)) / w + 2.0 * s2 * p[a] / w2;
    }
    (s2, k, gp)
}

struct Eval {
    residual: Vec<f64>,
    /// `max |S + k²|`
    max_s: f64,
    min_principal: f64,
    spacelike: bool,
}

impl Eval {
    fn admissible(&self) -> bool {
        self.spacelike && self.min_principal > 0.0
    }
}

fn evaluate(field: &HeightField, unknowns: &Unknowns, target: f64, margin: f64) -> Eval {
    let d = field.dim();
    let scale = sigma2_scale(d);
    let mut residual = Vec::with_capacity(unknowns.len());
    let mut max_s = 0.0_f64;
    let mut min_principal = f64::INFINITY;
    let mut spacelike = true;
    for &i in &unknowns.nodes {
        let (p, h) = field.derivatives2(i);
        let p = &p[..d];
        let p2: f64 = p.iter().map(|x| x * x).sum();
        if !(num::sqrt(p2) < 1.0 - margin) {
            spacelike = false;
            residual.push(f64::NAN);
            max_s = f64::INFINITY;
            continue;
        }
        let (w, pm) = graph_factors(p);
        let shape = (pm * h * pm).scale(1.0 / w);
        let f = shape.sigma2() - target;
        min_principal = min_principal.min(shape.sym_eigen().min());
        max_s = max_s.max(num::abs(scale * f));
        residual.push(f);
    }
    Eval {
        residual,
        max_s,
        min_principal,
        spacelike,
    }
}

/// Least-squares affine fit `u ≈ c + ⟨b, x⟩` to the boundary values.
pub fn affine_init(boundary: &HeightField) -> Result<HeightField> {
    let grid = *boundary.grid();
    let d = grid.dim();
    let n = d + 1;
    let mut ata = SMat::zeros(n);
    let mut atb = [0.0; MAX_DIM];
    for i in (0..grid.len()).filter(|&i| grid.is_boundary(i)) {
        let x = grid.coords(i);
        let mut row = [0.0; MAX_DIM];
        row[0] = 1.0;
        row[1..n].copy_from_slice(&x[..d]);
        for r in 0..n {
            atb[r] += row[r] * boundary.values()[i];
            for c in 0..n {
                ata[(r, c)] += row[r] * row[c];
            }
        }
    }
    let coef = ata
        .inverse()
        .ok_or_else(|| Error::Numerical("degenerate boundary for affine fit".into()))?
        .mul_vec(&atb[..n]);
    let mut out = HeightField::from_fn(grid, |x| {
        coef[0] + x.iter().zip(&coef[1..n]).map(|(a, b)| a * b).sum::<f64>()
    })?;
    copy_boundary(&mut out, boundary);
    Ok(out)
}

pub(crate) fn copy_boundary(dst: &mut HeightField, src: &HeightField) {
    let grid = *src.grid();
    for i in 0..grid.len() {
        if grid.is_boundary(i) {
            dst.values_mut()[i] = src.values()[i];
        }
    }
}

fn check_inputs(boundary: &HeightField, init: &HeightField, k: f64, opts: &NewtonOptions) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::OutOfRange { what: "k", value: k });
    }
    if !(opts.tol > 0.0 && opts.linear_tol > 0.0 && opts.margin >= 0.0) {
        return Err(Error::OutOfRange {
            what: "solver tolerance",
            value: opts.tol.min(opts.linear_tol),
        });
    }
    if !boundary.grid().same_layout(init.grid()) {
        return Err(Error::InvalidField("boundary and initial fields use different grids".into()));
    }
    if boundary.dim() < 2 {
        return Err(Error::UnsupportedDimension(boundary.dim()));
    }
    boundary
        .check_spacelike(opts.margin)
        .map_err(|e| Error::Precondition(format!("boundary data: {e}")))?;
    Ok(())
}

/// One Picard step of the mean-curvature equation `tr(G H) / W = d k` with
/// coefficients frozen at `u`; the round and boosted hyperboloids are exact
/// fixed points. Used to reach the convex branch from flat data. Gradients
/// steeper than `1 - margin` (e.g. next to a boundary that does not match an
/// affine start) are clipped when freezing the coefficients.
fn predictor_step(
    u: &HeightField,
    unknowns: &Unknowns,
    k: f64,
    margin: f64,
    linear_tol: f64,
) -> Result<(HeightField, usize)> {
    let grid = *u.grid();
    let d = grid.dim();
    let cap = 1.0 - margin.max(crate::surface::SPACELIKE_MARGIN);
    let mut ops = Vec::with_capacity(unknowns.len());
    let mut rhs = Vec::with_capacity(unknowns.len());
    for &i in &unknowns.nodes {
        let (mut p, _) = u.derivatives2(i);
        let norm = num::sqrt(p[..d].iter().map(|x| x * x).sum::<f64>());
        if norm > cap {
            for x in &mut p[..d] {
                *x *= cap / norm;
            }
        }
        let p = &p[..d];
        let p2: f64 = p.iter().map(|x| x * x).sum();
        let w2 = 1.0 - p2;
        let op = PointOperator {
            k: SMat::from_fn(d, |a, b| (a == b) as u8 as f64 + p[a] * p[b] / w2),
            b: [0.0; MAX_DIM],
            c: 0.0,
        };
        let mut r = d as f64 * k * num::sqrt(w2);
        stencil(&grid, i, &op, |j, w| {
            if unknowns.row[j] == usize::MAX {
                r -= w * u.values()[j];
            }
        });
        rhs.push(r);
        ops.push(op);
    }
    let a = assemble(&grid, unknowns, &ops);
    let (x, stats) = sparse::solve(&a, &rhs, linear_tol)?;
    let mut out = u.clone();
    for (r, &i) in unknowns.nodes.iter().enumerate() {
        out.values_mut()[i] = x[r];
    }
    Ok((out, stats.iterations))
}

fn jacobian(u: &HeightField, unknowns: &Unknowns) -> sparse::Csr {
    let d = u.dim();
    let ops: Vec<PointOperator> = unknowns
        .nodes
        .iter()
        .map(|&i| {
            let (p, h) = u.derivatives2(i);
            let (_, k, b) = sigma2_linearization(&p[..d], &h);
            PointOperator { k, b, c: 0.0 }
        })
        .collect();
    assemble(u.grid(), unknowns, &ops)
}

/// Solves `S[u] = -k²` in the interior with `u = boundary` on the boundary,
/// starting from `init` (its boundary values are replaced).
///
/// Every accepted iterate is spacelike with margin and locally strictly
/// convex; a line search halves the step until the residual decreases.
pub fn newton_solve(
    boundary: &HeightField,
    k: f64,
    init: &HeightField,
    opts: &NewtonOptions,
) -> core::result::Result<(HeightField, SolveReport), SolveFailure> {
    check_inputs(boundary, init, k, opts)?;
    let grid: Grid = *boundary.grid();
    let d = grid.dim();
    let target = target_sigma2(d, k);
    let unknowns = Unknowns::new(&grid);
    let mut report = SolveReport::default();
    let fail = |error: Error, report: &SolveReport| SolveFailure {
        error,
        report: report.clone(),
    };

    let mut u = init.clone();
    copy_boundary(&mut u, boundary);
    let mut eval = evaluate(&u, &unknowns, target, opts.margin);
    while !eval.admissible() && report.predictor_steps < opts.max_predictor {
        let (next, its) =
            predictor_step(&u, &unknowns, k, opts.margin, opts.linear_tol).map_err(|e| fail(e, &report))?;
        report.predictor_steps += 1;
        report.linear_iterations.push(its);
        u = next;
        eval = evaluate(&u, &unknowns, target, opts.margin);
    }
    if !eval.spacelike {
        return Err(fail(
            Error::Precondition("initial iterate is not uniformly spacelike".into()),
            &report,
        ));
    }
    if !eval.admissible() {
        return Err(fail(
            Error::BranchDeparture(format!(
                "initial iterate is not locally strictly convex (min principal curvature {:.3e})",
                eval.min_principal
            )),
            &report,
        ));
    }
    report.residual_history.push(eval.max_s);
    report.min_principal_history.push(eval.min_principal);

    loop {
        if eval.max_s <= opts.tol {
            report.converged = true;
            report.min_principal = eval.min_principal;
            return Ok((u, report));
        }
        if report.iterations >= opts.max_iter {
            return Err(fail(
                Error::NonConvergence(format!(
                    "residual {:.3e} after {} Newton iterations",
                    eval.max_s, report.iterations
                )),
                &report,
            ));
        }
        let jac = jacobian(&u, &unknowns);
        let rhs: Vec<f64> = eval.residual.iter().map(|f| -f).collect();
        let (step, stats) = sparse::solve(&jac, &rhs, opts.linear_tol).map_err(|e| {
            fail(
                Error::NonConvergence(format!("linear solve failed: {e}")),
                &report,
            )
        })?;
        report.linear_iterations.push(stats.iterations);

        let mut lambda = 1.0;
        let mut accepted = None;
        let mut convexity_lost = false;
        for halvings in 0..=opts.max_halvings {
            let mut trial = u.clone();
            for (r, &i) in unknowns.nodes.iter().enumerate() {
                trial.values_mut()[i] += lambda * step[r];
            }
            let e = evaluate(&trial, &unknowns, target, opts.margin);
            if e.spacelike && !(e.min_principal > 0.0) {
                convexity_lost = true;
            }
            if e.admissible() && e.max_s < eval.max_s {
                accepted = Some((trial, e, halvings));
                break;
            }
            lambda *= 0.5;
        }
        let Some((trial, e, halvings)) = accepted else {
            let msg = format!(
                "line search failed after {} halvings at residual {:.3e}",
                opts.max_halvings, eval.max_s
            );
            let error = if convexity_lost {
                Error::BranchDeparture(msg)
            } else {
                Error::NonConvergence(msg)
            };
            return Err(fail(error, &report));
        };
        report.iterations += 1;
        report.damping_steps.push(halvings);
        report.residual_history.push(e.max_s);
        report.min_principal_history.push(e.min_principal);
        u = trial;
        eval = e;
    }
}

/// `max |S[u] + k²|` over interior nodes (second-order jets).
pub fn curvature_residual(field: &HeightField, k: f64) -> Result<f64> {
    let unknowns = Unknowns::new(field.grid());
    let e = evaluate(field, &unknowns, target_sigma2(field.dim(), k), 0.0);
    if !e.spacelike {
        return Err(Error::Precondition("field is not spacelike".into()));
    }
    Ok(e.max_s)
}

/// `S[u] + k²` at every node; boundary entries are 0.
pub fn curvature_residual_field(field: &HeightField, k: f64) -> Result<Vec<f64>> {
    let unknowns = Unknowns::new(field.grid());
    let scale = sigma2_scale(field.dim());
    let e = evaluate(field, &unknowns, target_sigma2(field.dim(), k), 0.0);
    if !e.spacelike {
        return Err(Error::Precondition("field is not spacelike".into()));
    }
    let mut out = vec![0.0; field.grid().len()];
    for (r, &i) in unknowns.nodes.iter().enumerate() {
        out[i] = -scale * e.residual[r];
    }
    Ok(out)
}
