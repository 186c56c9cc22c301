//! The seeded property suite behind `csc verify`.
//!
//! Every check draws from its own stream (see [`sample::stream`]), records
//! what it measured against a fixed tolerance, and never reads the clock, so
//! a report is a pure function of the configuration.

use core::f64::consts::FRAC_PI_2;
use std::collections::BTreeMap;

use csc_core::affine::{
    cocycle_defect, cone_position_check, AffineIsometry, format_word, fuchsian_time, future_complete_check, future_displacements,
    leaf_point, Ball, Cocycle, Cone, Letter,
};
use csc_core::minkowski::MinkVector;
use csc_core::sl::{
    g_orthonormalize, gram_m, graph_frame, nullity, omega_hat_eval, phi_k, refined_angle,
    simultaneous_diagonalize, sl_defect, unitary_image, PairVector, UnitaryFactor,
};
use csc_core::solver::{
    affine_init, assemble_b, foliation_probe, jacobi_apply, jacobi_fd_check, newton_solve, NewtonOptions,
};
use csc_core::surface::{
    curtain_build, lift, scalar_curvature, AnalyticSurface, GeodesicSlice, Grid, HeightField, Hyperboloid, Potential,
    QuadricGraph, Rippled,
};
use csc_core::SMat;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::sample::{self, Rand};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Entry of the property table in the README.
    pub anchor: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub config_hash: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

struct Check {
    name: &'static str,
    anchor: &'static str,
    run: fn(&mut Rand, &RunConfig) -> (bool, f64, f64),
}

const CHECKS: &[Check] = &[
    Check {
        name: "sl.structure_identities",
        anchor: "complex structure J, real structure R, symplectic form ω",
        run: structure_identities,
    },
    Check {
        name: "sl.lagrangian_signature",
        anchor: "lagrangian subspaces: g-signature (d,1), unit holomorphic volume",
        run: lagrangian_signature,
    },
    Check {
        name: "sl.graphical_condition",
        anchor: "graph of B is special at angle π/2 iff σ₂(B) = 1",
        run: graphical_condition,
    },
    Check {
        name: "sl.mj_positive",
        anchor: "positive special frames: λ_{d-1} ≤ 1 and m(X, JX) ≥ 0 on minimizers",
        run: mj_positive,
    },
    Check {
        name: "sl.phi_k_minimum",
        anchor: "degeneracy functional φ^k is a constrained minimum of m",
        run: phi_k_minimum,
    },
    Check {
        name: "surface.fuchsian_curvature",
        anchor: "fuchsian leaf Σ_k has scalar curvature -k²",
        run: fuchsian_curvature,
    },
    Check {
        name: "surface.lift_dictionary",
        anchor: "legendrian lift: lagrangian, positive iff convex",
        run: lift_dictionary,
    },
    Check {
        name: "surface.curtain",
        anchor: "curtains N^ξS: legendrian, special iff Im(e^{iθ}det(Hess φ + (i-φ)Id)) = 0",
        run: curtain,
    },
    Check {
        name: "solver.trace_ba",
        anchor: "tr(BA) = 2k² on the leaves",
        run: trace_ba,
    },
    Check {
        name: "solver.jacobi_round_leaf",
        anchor: "Jacobi operator on Σ_k: J1 = 2k³",
        run: jacobi_round_leaf,
    },
    Check {
        name: "solver.jacobi_fd",
        anchor: "Jacobi operator is the normal linearization of S",
        run: jacobi_fd,
    },
    Check {
        name: "solver.newton_recovery",
        anchor: "Dirichlet solve recovers boosted hyperboloids on the convex branch",
        run: newton_recovery,
    },
    Check {
        name: "solver.foliation_monotone",
        anchor: "solved leaves decrease in k; the variation g is negative",
        run: foliation_monotone,
    },
    Check {
        name: "affine.cocycle_identity",
        anchor: "group law of affine isometries; cocycle identity τ(αβ) = τ(α) + α τ(β)",
        run: cocycle_identity,
    },
    Check {
        name: "affine.fuchsian_invariance",
        anchor: "fuchsian time -1/‖y‖² is Lorentz invariant",
        run: fuchsian_invariance,
    },
    Check {
        name: "affine.position",
        anchor: "leaves sit at cosmological time 1/k; the future cone is future-complete",
        run: position,
    },
];

/// Runs every check; results are sorted by name.
pub fn run(cfg: &RunConfig) -> VerifyReport {
    let mut checks: Vec<CheckResult> = CHECKS
        .iter()
        .map(|c| {
            let mut r = sample::stream(cfg.seed, c.name);
            let (passed, measured, tolerance) = (c.run)(&mut r, cfg);
            CheckResult {
                name: c.name.to_string(),
                anchor: c.anchor.to_string(),
                passed: passed && measured.is_finite(),
                measured,
                tolerance,
                seed: cfg.seed,
            }
        })
        .collect();
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    VerifyReport {
        seed: cfg.seed,
        config_hash: cfg.hash(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Names of all checks, sorted.
pub fn check_names() -> Vec<&'static str> {
    let mut n: Vec<_> = CHECKS.iter().map(|c| c.name).collect();
    n.sort_unstable();
    n
}

fn within(measured: f64, tol: f64) -> (bool, f64, f64) {
    (measured <= tol, measured, tol)
}

fn pair_dist(a: &PairVector, b: &PairVector) -> f64 {
    (*a - *b).euclid_norm_sq().sqrt()
}

fn structure_identities(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let (x, y) = (sample::pair(r, 3), sample::pair(r, 3));
        let s = 1.0 + x.euclid_norm_sq().sqrt();
        worst = worst.max(pair_dist(&x.j().j(), &(-x)) / s);
        worst = worst.max(pair_dist(&x.r().r(), &x) / s);
        worst = worst.max((x.r().j() + x.j().r()).euclid_norm_sq().sqrt() / s);
        let w = x.omega(&y);
        worst = worst.max((x.j().omega(&y.j()) - w).abs() / (1.0 + w.abs()));
        worst = worst.max((x.r().omega(&y.r()) + w).abs() / (1.0 + w.abs()));
    }
    within(worst, 1e-12)
}

fn lagrangian_signature(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let mut worst = 0.0_f64;
    let mut ok = true;
    for _ in 0..100 {
        let factors = [
            UnitaryFactor::Lorentz(sample::lorentz(r, 3, 1.0, 2)),
            UnitaryFactor::Phases(sample::uniform(r, 4, 3.0)),
            UnitaryFactor::Lorentz(sample::lorentz(r, 3, 1.0, 2)),
        ];
        let vs = unitary_image(3, &factors);
        match g_orthonormalize(&vs) {
            Ok((basis, sig)) => {
                ok &= sig == (3, 1);
                match omega_hat_eval(&basis) {
                    Ok(z) => worst = worst.max((z.norm() - 1.0).abs()),
                    Err(_) => ok = false,
                }
            }
            Err(_) => ok = false,
        }
    }
    let (p, m, t) = within(worst, 1e-9);
    (p && ok, m, t)
}

fn graphical_condition(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    const TOL: f64 = 1e-9;
    let mut worst = 0.0_f64;
    let mut agree = true;
    for _ in 0..1000 {
        let p = sample::contact_point(r, 3);
        let b = sample::spd(r, 3, 0.05);
        let unit = b.scale(1.0 / b.sigma2().sqrt());
        for delta in [-1e-2, -1e-5, 0.0, 1e-5, 1e-2] {
            let bs = unit.scale(1.0 + delta);
            let Ok(frame) = graph_frame(&p, &bs) else {
                agree = false;
                continue;
            };
            let defect = sl_defect(&frame, FRAC_PI_2).abs();
            agree &= (defect <= TOL) == ((bs.sigma2() - 1.0).abs() <= TOL);
            if delta == 0.0 {
                worst = worst.max(defect);
            }
        }
    }
    let (p, m, t) = within(worst, TOL);
    (p && agree, m, t)
}

/// Scales `b` so that `Σ arctan λ = target`, by bisection.
fn scale_to_angle(b: &SMat, target: f64) -> Option<SMat> {
    let theta = |s: f64| refined_angle(&b.scale(s)).ok();
    let (mut lo, mut hi) = (0.0, 1.0);
    while theta(hi)? < target {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if theta(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(b.scale(0.5 * (lo + hi)))
}

fn mj_positive(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let p = sample::contact_point(r, 3);
        let Some(b) = scale_to_angle(&sample::spd(r, 3, 0.01), FRAC_PI_2) else {
            return (false, f64::NAN, 1e-9);
        };
        let l = b.sym_eigen();
        // λ_{d-1}: second largest of three
        worst = worst.max(l.values()[1] - 1.0);
        let Ok(jd) = graph_frame(&p, &b).and_then(|f| simultaneous_diagonalize(&f)) else {
            return (false, f64::NAN, 1e-9);
        };
        for a in 0..2 {
            worst = worst.max(-jd.mj[a]);
        }
    }
    within(worst, 1e-9)
}

/// Randomized upper bound for `φ^k`: uniform `g`-orthonormal tuples, then a
/// shrinking random walk around the best one.
pub fn sampled_phi(r: &mut Rand, frame: &[PairVector], k: usize, samples: usize) -> f64 {
    let basis = gram_schmidt(frame);
    let d = basis.len();
    let m: Vec<Vec<f64>> = (0..d).map(|a| (0..d).map(|b| basis[a].m(&basis[b])).collect()).collect();
    let value = |cols: &[Vec<f64>]| -> f64 {
        cols.iter()
            .map(|c| (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).map(|(a, b)| c[a] * m[a][b] * c[b]).sum::<f64>())
            .sum()
    };
    let random_tuple = |r: &mut Rand| loop {
        let mut cols: Vec<Vec<f64>> = (0..k).map(|_| sample::uniform(r, d, 1.0)).collect();
        if orthonormalize(&mut cols) {
            return cols;
        }
    };
    let mut best = random_tuple(r);
    let mut best_v = value(&best);
    let uniform = samples / 5;
    for _ in 1..uniform {
        let c = random_tuple(r);
        let v = value(&c);
        if v < best_v {
            best = c;
            best_v = v;
        }
    }
    let mut step = 0.3;
    for _ in uniform..samples {
        let mut c = best.clone();
        for col in &mut c {
            col.iter_mut().for_each(|x| *x += step * r.random_range(-1.0..1.0));
        }
        if !orthonormalize(&mut c) {
            continue;
        }
        let v = value(&c);
        if v < best_v {
            best = c;
            best_v = v;
        } else {
            step = (step * 0.995_f64).max(1e-6);
        }
    }
    best_v
}

fn gram_schmidt(vs: &[PairVector]) -> Vec<PairVector> {
    let mut out: Vec<PairVector> = Vec::new();
    for v in vs {
        let mut w = *v;
        for e in &out {
            w = w - *e * w.g(e);
        }
        out.push(w * (1.0 / w.g(&w).sqrt()));
    }
    out
}

fn orthonormalize(cols: &mut [Vec<f64>]) -> bool {
    for i in 0..cols.len() {
        for j in 0..i {
            let dot: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            let cj = cols[j].clone();
            cols[i].iter_mut().zip(&cj).for_each(|(a, b)| *a -= dot * b);
        }
        let n = cols[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-9 {
            return false;
        }
        cols[i].iter_mut().for_each(|x| *x /= n);
    }
    true
}

fn phi_k_minimum(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let mut gap = 0.0_f64;
    let mut below = false;
    for _ in 0..100 {
        let p = sample::contact_point(r, 3);
        let b = sample::symmetric(r, 3, 2.0);
        let Ok(frame) = graph_frame(&p, &b) else {
            return (false, f64::NAN, 1e-3);
        };
        for k in 1..=3 {
            let Ok(phi) = phi_k(&frame, k) else {
                return (false, f64::NAN, 1e-3);
            };
            let s = sampled_phi(r, frame.vectors(), k, 10_000);
            below |= s < phi - 1e-10;
            gap = gap.max(s - phi);
        }
    }
    let (p, m, t) = within(gap, 1e-3);
    (p && !below, m, t)
}

fn fuchsian_curvature(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let mut worst = 0.0_f64;
    for k in [0.5, 1.0 / 3f64.sqrt(), 1.0, 2.0] {
        let s = Hyperboloid::round(3, k).expect("k > 0");
        for _ in 0..100 {
            match s.jet(&sample::uniform(r, 3, 0.5)) {
                Ok(jet) => worst = worst.max((scalar_curvature(&jet) + k * k).abs()),
                Err(_) => return (false, f64::NAN, 1e-10),
            }
        }
    }
    within(worst, 1e-10)
}

fn lift_dictionary(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let mut worst = 0.0_f64;
    let mut agree = true;
    for i in 0..60 {
        let surface: Box<dyn AnalyticSurface> = if i % 3 == 2 {
            Box::new(QuadricGraph {
                value: 0.0,
                slope: vec![0.0; 3],
                hessian: sample::symmetric(r, 3, 1.0),
            })
        } else {
            Box::new(Rippled {
                base: Hyperboloid::round(3, r.random_range(0.5..2.0)).expect("k > 0"),
                amplitude: r.random_range(0.0..0.1),
                wave: sample::uniform(r, 3, 2.0),
                phase: r.random_range(0.0..6.0),
            })
        };
        let Ok(jet) = surface.jet(&sample::uniform(r, 3, 0.3)) else {
            return (false, f64::NAN, 1e-9);
        };
        let Ok(frame) = lift(&jet) else {
            return (false, f64::NAN, 1e-9);
        };
        let res = frame.residuals();
        worst = worst.max(res.fibre).max(res.omega);
        agree &= gram_m(frame.vectors()).cholesky().is_some() == jet.is_convex();
    }
    let (p, m, t) = within(worst, 1e-9);
    (p && agree, m, t)
}

fn curtain(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let Ok(slice) = GeodesicSlice::new(3, &[1, 2], 0.0) else {
        return (false, f64::NAN, 1e-9);
    };
    let bases: Vec<Vec<f64>> = (0..20).map(|_| sample::uniform(r, 2, 1.5)).collect();
    let offsets = [-2.0, 0.0, 1.0];
    let mut worst = 0.0_f64;
    let mut ok = true;
    match curtain_build(&slice, &Potential::Constant(1.0), &bases, &offsets) {
        Ok(samples) => {
            for s in &samples {
                let res = s.frame.residuals();
                worst = worst.max(res.fibre).max(res.omega).max(sl_defect(&s.frame, FRAC_PI_2).abs());
                ok &= res.gram_min > 1e-9;
                ok &= nullity(&s.frame, 1e-9).is_ok_and(|n| n >= 1);
            }
        }
        Err(_) => ok = false,
    }
    match curtain_build(&slice, &Potential::Constant(0.0), &bases, &offsets) {
        Ok(samples) => {
            for s in &samples {
                worst = worst.max((sl_defect(&s.frame, FRAC_PI_2).abs() - 1.0).abs());
            }
        }
        Err(_) => ok = false,
    }
    let (p, m, t) = within(worst, 1e-9);
    (p && ok, m, t)
}

fn trace_ba(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let mut worst = 0.0_f64;
    for k in [0.5, 1.0, 2.0] {
        let s = Hyperboloid::round(3, k).expect("k > 0");
        for _ in 0..100 {
            let Ok(jet) = s.jet(&sample::uniform(r, 3, 0.5)) else {
                return (false, f64::NAN, 1e-12);
            };
            let Ok(b) = assemble_b(&jet.shape) else {
                return (false, f64::NAN, 1e-12);
            };
            worst = worst.max(((b * jet.shape).trace() - 2.0 * k * k).abs() / (2.0 * k * k));
        }
    }
    within(worst, 1e-12)
}

fn jacobi_round_leaf(_: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let run = || -> csc_core::Result<f64> {
        let k = 1.0;
        let grid = Grid::cube(3, -0.5, 0.5, 1.0 / 32.0)?;
        let u = HeightField::sample(grid, &Hyperboloid::round(3, k)?)?;
        let jf = jacobi_apply(&u, &vec![1.0; grid.len()])?;
        let want = 2.0 * k * k * k;
        Ok(grid.interior().iter().map(|&i| (jf[i] - want).abs() / want).fold(0.0, f64::max))
    };
    within(run().unwrap_or(f64::NAN), 1e-2)
}

fn jacobi_fd(_: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let run = || -> csc_core::Result<f64> {
        let s = Rippled {
            base: Hyperboloid::round(3, 1.0)?,
            amplitude: 0.02,
            wave: vec![1.0, 2.0, -1.0],
            phase: 0.4,
        };
        let grid = Grid::cube(3, -0.5, 0.5, 1.0 / 32.0)?;
        let f = |x: &[f64]| 1.0 + 0.5 * (2.0 * x[0]).sin() * x[1];
        Ok(jacobi_fd_check(&s, grid, &f, 1e-5)?.relative_error)
    };
    within(run().unwrap_or(f64::NAN), 5e-2)
}

fn newton_recovery(_: &mut Rand, cfg: &RunConfig) -> (bool, f64, f64) {
    let run = || -> Option<(bool, f64)> {
        let mut c = MinkVector::zero(3);
        c.set(3, -0.5);
        let s = Hyperboloid::boosted(1.0, c, 0, 0.6).ok()?;
        let grid = Grid::cube(3, -0.5, 0.5, 1.0 / 16.0).ok()?;
        let boundary = HeightField::sample(grid, &s).ok()?;
        let init = affine_init(&boundary).ok()?;
        let opts = NewtonOptions {
            tol: cfg.tol,
            ..NewtonOptions::default()
        };
        let (_, rep) = newton_solve(&boundary, 1.0, &init, &opts).ok()?;
        let last = *rep.residual_history.last()?;
        Some((rep.converged && rep.iterations <= 10 && rep.min_principal > 0.0, last))
    };
    match run() {
        Some((ok, res)) => (ok && res <= cfg.tol, res, cfg.tol),
        None => (false, f64::NAN, cfg.tol),
    }
}

fn foliation_monotone(_: &mut Rand, cfg: &RunConfig) -> (bool, f64, f64) {
    let Ok(grid) = Grid::cube(3, -0.5, 0.5, 1.0 / 16.0) else {
        return (false, f64::NAN, 0.0);
    };
    let family = move |k: f64| HeightField::sample(grid, &Hyperboloid::round(3, k)?);
    let opts = NewtonOptions {
        tol: cfg.tol,
        ..NewtonOptions::default()
    };
    match foliation_probe(grid, &family, &[0.8, 1.0, 1.25], &opts) {
        // measured: smallest gap between consecutive leaves, must be > 0
        Ok((_, rep)) => (rep.strictly_decreasing && rep.g_negative && rep.min_gap > 0.0, rep.min_gap, 0.0),
        Err(_) => (false, f64::NAN, 0.0),
    }
}

fn random_word(r: &mut Rand) -> String {
    let n = r.random_range(1..=4);
    let letters: Vec<Letter> = (0..n)
        .map(|_| Letter {
            name: if r.random_bool(0.5) { "a" } else { "b" }.to_string(),
            inverse: r.random_bool(0.5),
        })
        .collect();
    format_word(&letters)
}

fn cocycle_identity(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let mut gens = BTreeMap::new();
    gens.insert("a".to_string(), sample::lorentz(r, 3, 0.5, 1));
    gens.insert("b".to_string(), sample::lorentz(r, 3, 0.5, 1));
    let v = sample::vector(r, 3, 2.0);
    let Ok(c) = Cocycle::coboundary(gens, v, vec![]) else {
        return (false, f64::NAN, 1e-12);
    };
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let (wa, wb, wc) = (random_word(r), random_word(r), random_word(r));
        let run = || -> csc_core::Result<f64> {
            let (a, b, e) = (c.element(&wa)?, c.element(&wb)?, c.element(&wc)?);
            let id = AffineIsometry::identity(3);
            let scale = (1.0 + a.linear.matrix().max_abs()) * (1.0 + b.linear.matrix().max_abs()) * (1.0 + e.linear.matrix().max_abs());
            let group = [
                a.compose(&b).compose(&e).distance(&a.compose(&b.compose(&e))),
                a.compose(&a.inverse()).distance(&id),
                a.inverse().compose(&a).distance(&id),
                a.compose(&id).distance(&a),
                c.element(&format!("{wa} {wb}"))?.distance(&a.compose(&b)),
            ];
            let defect = cocycle_defect(&c, &wa, &wb)? / (1.0 + v.euclid_norm_sq().sqrt());
            Ok(group.into_iter().fold(defect, f64::max) / scale)
        };
        match run() {
            Ok(d) => worst = worst.max(d),
            Err(_) => return (false, f64::NAN, 1e-12),
        }
    }
    within(worst, 1e-12)
}

fn fuchsian_invariance(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let k = r.random_range(0.3..3.0);
        let Ok(y) = leaf_point(&sample::uniform(r, 3, 1.0), k) else {
            return (false, f64::NAN, 1e-12);
        };
        let l = sample::lorentz(r, 3, 0.5, 1);
        match (fuchsian_time(&y), fuchsian_time(&l.apply(&y))) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs() / a),
            _ => return (false, f64::NAN, 1e-12),
        }
    }
    within(worst, 1e-12)
}

fn position(r: &mut Rand, _: &RunConfig) -> (bool, f64, f64) {
    let mut worst = 0.0_f64;
    let mut ok = true;
    let mut all = Vec::new();
    for k in [0.5, 1.0, 2.0] {
        let pts: Vec<MinkVector> = (0..50)
            .filter_map(|_| leaf_point(&sample::uniform(r, 3, 2.0), k).ok())
            .collect();
        let rep = cone_position_check(&pts, k);
        ok &= rep.all_in_cone && rep.samples == 50;
        worst = worst.max(rep.max_offset_error);
        all.extend(pts);
    }
    let disp = future_displacements(3);
    ok &= future_complete_check(&all, &Cone::future(3), &disp).passed();
    // control: a ball is not future-complete
    let ball = Ball {
        center: MinkVector::basis(3, 3),
        radius: 2.0,
    };
    ok &= !future_complete_check(&all, &ball, &disp).passed();
    let (p, m, t) = within(worst, 1e-10);
    (p && ok, m, t)
}
