//! Subcommand bodies. Each takes a validated [`RunConfig`] and an output
//! directory and returns the JSON summary it also wrote.

use core::f64::consts::FRAC_PI_2;
use std::path::Path;

use csc_core::affine::{cocycle_defect, format_word, Letter};
use csc_core::sl::{m_eigenvalues, nullity, sl_defect};
use csc_core::solver::{
    affine_init, continuation, curvature_residual, foliation_probe, foliation_variation, newton_solve, sampled_path,
    FoliationReport, SolveReport,
};
use csc_core::surface::{
    curtain_build, curtain_condition, lift, scalar_curvature, AnalyticSurface, GeodesicSlice, Grid, HeightField,
    Hyperboloid, Potential,
};
use csc_core::MinkVector;
use rand::Rng;
use serde::Serialize;

use crate::config::{InitKind, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{read_cocycle, read_field, write_csv, write_field, write_json};
use crate::report::Envelope;
use crate::sample;
use crate::verify::{self, VerifyReport};

fn emit<T: Serialize>(cfg: &RunConfig, out: &Path, file: &str, result: &T) -> Result<()> {
    write_json(&out.join(file), &Envelope::new(cfg, result))
}

pub fn verify(cfg: &RunConfig, out: &Path) -> Result<VerifyReport> {
    let report = verify::run(cfg);
    write_json(&out.join("verify_report.json"), &report)?;
    if report.passed {
        Ok(report)
    } else {
        Err(CliError::ChecksFailed {
            failed: report.failures(),
            total: report.checks.len(),
        })
    }
}

#[derive(Debug, Serialize)]
pub struct SolveSummary {
    pub k: f64,
    pub grid_shape: Vec<usize>,
    pub residual: f64,
    /// `max |u - exact|` when the boundary came from an analytic surface.
    pub max_error: Option<f64>,
    pub report: SolveReport,
}

fn initial(cfg: &RunConfig, boundary: &HeightField) -> Result<HeightField> {
    Ok(match cfg.init {
        InitKind::Affine => affine_init(boundary)?,
        InitKind::Exact => boundary.clone(),
    })
}

pub fn solve(cfg: &RunConfig, out: &Path) -> Result<SolveSummary> {
    let (boundary, exact) = match &cfg.input {
        Some(p) => (read_field(p)?, None),
        None => {
            let s = cfg.analytic_surface()?;
            let f = HeightField::sample(cfg.grid()?, s.as_ref())?;
            (f.clone(), Some(f))
        }
    };
    let init = initial(cfg, &boundary)?;
    let (u, report) = newton_solve(&boundary, cfg.k, &init, &cfg.newton())?;
    let max_error = exact.map(|e| {
        e.values()
            .iter()
            .zip(u.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    let summary = SolveSummary {
        k: cfg.k,
        grid_shape: u.grid().shape().to_vec(),
        residual: curvature_residual(&u, cfg.k)?,
        max_error,
        report,
    };
    write_field(&out.join("solution.json"), &u)?;
    emit(cfg, out, "solve_report.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct StepEntry {
    pub index: usize,
    pub t: f64,
    pub rapidity: f64,
    pub file: String,
    pub residual: f64,
    pub min_principal: f64,
    pub report: SolveReport,
}

#[derive(Debug, Serialize)]
pub struct ContinuationManifest {
    pub k: f64,
    pub steps: usize,
    pub final_rapidity: f64,
    pub entries: Vec<StepEntry>,
}

/// Continues along the boosted family from rapidity 0 to `cfg.rapidity`.
pub fn continue_path(cfg: &RunConfig, out: &Path) -> Result<ContinuationManifest> {
    let grid = cfg.grid()?;
    let path = sampled_path(grid, |t| {
        cfg.hyperboloid(cfg.rapidity * t).map_err(|e| match e {
            CliError::Core(e) => e,
            other => csc_core::Error::Precondition(other.to_string()),
        })
    });
    let start = path(0.0)?;
    let init = initial(cfg, &start)?;
    let solved = continuation(&path, cfg.k, cfg.steps, &init, &cfg.newton())?;
    let mut entries = Vec::with_capacity(solved.len());
    for (j, (u, rep)) in solved.into_iter().enumerate() {
        let file = format!("step_{j:03}.json");
        write_field(&out.join(&file), &u)?;
        let t = j as f64 / cfg.steps as f64;
        entries.push(StepEntry {
            index: j,
            t,
            rapidity: cfg.rapidity * t,
            file,
            residual: *rep.residual_history.last().unwrap_or(&f64::NAN),
            min_principal: rep.min_principal,
            report: rep,
        });
    }
    let manifest = ContinuationManifest {
        k: cfg.k,
        steps: cfg.steps,
        final_rapidity: cfg.rapidity,
        entries,
    };
    emit(cfg, out, "manifest.json", &manifest)?;
    Ok(manifest)
}

/// `∂_k u / (2 k W)` for the hyperboloid family, the exact boundary data of
/// the foliation variation `g`.
pub fn family_variation_boundary(grid: &Grid, surface: &Hyperboloid) -> csc_core::Result<Vec<f64>> {
    let d = grid.dim();
    (0..grid.len())
        .map(|i| {
            let x = grid.coords(i);
            let (_, p, _) = surface.graph_jet(&x[..d])?;
            let w = (1.0 - p[..d].iter().map(|v| v * v).sum::<f64>()).sqrt();
            Ok(surface.dk(&x[..d])? / (2.0 * surface.k * w))
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct LeafSamples {
    pub k: f64,
    pub points: Vec<Vec<f64>>,
    /// `|S + k²|` at each point, from the exact jet.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

#[derive(Debug, Serialize)]
pub struct FoliationSummary {
    pub samples: Vec<LeafSamples>,
    pub probe: FoliationReport,
    /// Mean of `g` over interior nodes, with the family's boundary data,
    /// per `k`; compare with `-1/(2k³)` on round leaves.
    pub g_mean: Vec<f64>,
}

pub fn foliate(cfg: &RunConfig, out: &Path) -> Result<FoliationSummary> {
    let d = cfg.dim;
    let mut r = sample::stream(cfg.seed, "foliate");
    let mut ks: Vec<f64> = cfg.ks.clone();
    if !ks.contains(&cfg.k) {
        ks.push(cfg.k);
    }
    ks.sort_by(f64::total_cmp);
    let mut samples = Vec::with_capacity(ks.len());
    for &k in &ks {
        let leaf = Hyperboloid::round(d, k)?;
        let mut points = Vec::with_capacity(cfg.samples);
        let mut residuals = Vec::with_capacity(cfg.samples);
        for _ in 0..cfg.samples {
            let x = sample::uniform(&mut r, d, 2.0);
            let jet = leaf.jet(&x)?;
            residuals.push((scalar_curvature(&jet) + k * k).abs());
            points.push(jet.point().coords().to_vec());
        }
        samples.push(LeafSamples {
            k,
            max_residual: residuals.iter().copied().fold(0.0, f64::max),
            points,
            residuals,
        });
    }

    let grid = cfg.grid()?;
    let family = |k: f64| HeightField::sample(grid, &Hyperboloid::round(d, k)?);
    let (leaves, probe) = foliation_probe(grid, &family, &cfg.ks, &cfg.newton())?;
    let mut g_mean = Vec::with_capacity(leaves.len());
    for (u, &k) in leaves.iter().zip(&cfg.ks) {
        let bnd = family_variation_boundary(&grid, &Hyperboloid::round(d, k)?)?;
        let g = foliation_variation(u, &bnd)?;
        let inner = grid.interior();
        g_mean.push(inner.iter().map(|&i| g[i]).sum::<f64>() / inner.len() as f64);
    }
    let summary = FoliationSummary { samples, probe, g_mean };
    emit(cfg, out, "foliation.json", &summary)?;
    Ok(summary)
}

fn m_columns(d: usize) -> Vec<String> {
    (0..d).map(|a| format!("m{a}")).collect()
}

#[derive(Debug, Serialize)]
pub struct LiftSummary {
    pub samples: usize,
    pub convex: usize,
    /// Largest `|sl defect|` at angle π/2 among all samples.
    pub max_defect: f64,
    /// Convex samples whose `m` eigenvalues are all positive.
    pub convex_positive: usize,
    pub csv: String,
}

/// Lifts the configured analytic surface at random points of the domain.
pub fn lift_samples(cfg: &RunConfig, out: &Path) -> Result<LiftSummary> {
    let d = cfg.dim;
    let s = cfg.analytic_surface()?;
    let mut r = sample::stream(cfg.seed, "lift");
    let [lo, hi] = cfg.domain;
    let mut header: Vec<String> = (0..d).map(|a| format!("x{a}")).collect();
    header.extend(["sigma2".into(), "sl_defect".into()]);
    header.extend(m_columns(d));
    header.push("convex".into());
    let mut rows = Vec::with_capacity(cfg.samples);
    let (mut convex, mut positive, mut max_defect) = (0, 0, 0.0_f64);
    for _ in 0..cfg.samples {
        let x: Vec<f64> = (0..d).map(|_| r.random_range(lo..hi)).collect();
        let jet = s.jet(&x)?;
        let frame = lift(&jet)?;
        let defect = sl_defect(&frame, FRAC_PI_2);
        let m = m_eigenvalues(&frame)?;
        max_defect = max_defect.max(defect.abs());
        if jet.is_convex() {
            convex += 1;
            positive += m.iter().all(|&v| v > 0.0) as usize;
        }
        let mut row = x;
        row.extend([jet.sigma2(), defect]);
        row.extend(&m);
        row.push(jet.is_convex() as u8 as f64);
        rows.push(row);
    }
    write_csv(&out.join("lift.csv"), &header, &rows)?;
    let summary = LiftSummary {
        samples: cfg.samples,
        convex,
        max_defect,
        convex_positive: positive,
        csv: "lift.csv".into(),
    };
    emit(cfg, out, "lift.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct CurtainSummary {
    pub potential: f64,
    pub samples: usize,
    pub max_defect: f64,
    pub max_condition: f64,
    pub min_nullity: usize,
    pub csv: String,
}

pub fn curtain(cfg: &RunConfig, out: &Path) -> Result<CurtainSummary> {
    let d = cfg.dim;
    let c = &cfg.curtain;
    let slice = GeodesicSlice::new(d, &c.axes, 0.0)?;
    let mut r = sample::stream(cfg.seed, "curtain");
    let bases: Vec<Vec<f64>> = (0..cfg.samples)
        .map(|_| sample::uniform(&mut r, slice.slice_dim(), c.spread))
        .collect();
    let built = curtain_build(&slice, &Potential::Constant(c.potential), &bases, &c.offsets)?;
    let mut header: Vec<String> = (0..=d).map(|a| format!("y{a}")).collect();
    header.extend((0..=d).map(|a| format!("x{a}")));
    header.extend(["sl_defect".into(), "condition".into(), "nullity".into()]);
    header.extend(m_columns(d));
    let mut rows = Vec::with_capacity(built.len());
    let (mut max_defect, mut max_condition, mut min_nullity) = (0.0_f64, 0.0_f64, usize::MAX);
    for s in &built {
        let defect = sl_defect(&s.frame, FRAC_PI_2);
        let cond = curtain_condition(s.phi, &s.hessian, FRAC_PI_2);
        let n = nullity(&s.frame, 1e-9)?;
        max_defect = max_defect.max(defect.abs());
        max_condition = max_condition.max(cond.abs());
        min_nullity = min_nullity.min(n);
        let p = s.point();
        let mut row: Vec<f64> = p.y.coords().to_vec();
        row.extend(p.x.coords());
        row.extend([defect, cond, n as f64]);
        row.extend(m_eigenvalues(&s.frame)?);
        rows.push(row);
    }
    write_csv(&out.join("curtain.csv"), &header, &rows)?;
    let summary = CurtainSummary {
        potential: c.potential,
        samples: built.len(),
        max_defect,
        max_condition,
        min_nullity: if built.is_empty() { 0 } else { min_nullity },
        csv: "curtain.csv".into(),
    };
    emit(cfg, out, "curtain.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct CocycleSummary {
    pub generators: Vec<String>,
    pub pairs: usize,
    pub max_defect: f64,
    /// `τ` of every generator and its inverse, for reference.
    pub translations: Vec<(String, Vec<f64>)>,
}

/// Reads a cocycle document and measures the cocycle identity on random
/// word pairs.
pub fn cocycle(cfg: &RunConfig, out: &Path) -> Result<CocycleSummary> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("cocycle needs --input <cocycle.json>".into()))?;
    let c = read_cocycle(path)?;
    let names: Vec<String> = c.generators().keys().cloned().collect();
    if names.is_empty() {
        return Err(CliError::Usage("cocycle has no generators".into()));
    }
    let mut r = sample::stream(cfg.seed, "cocycle");
    let word = |r: &mut sample::Rand| {
        let n = r.random_range(1..=4);
        let letters: Vec<Letter> = (0..n)
            .map(|_| Letter {
                name: names[r.random_range(0..names.len())].clone(),
                inverse: r.random_bool(0.5),
            })
            .collect();
        format_word(&letters)
    };
    let mut max_defect = 0.0_f64;
    for _ in 0..cfg.samples {
        let (a, b) = (word(&mut r), word(&mut r));
        max_defect = max_defect.max(cocycle_defect(&c, &a, &b)?);
    }
    let mut translations = Vec::new();
    for n in c.generators().keys() {
        for w in [n.clone(), format!("{n}^-1")] {
            let v: MinkVector = c.extend(&w)?;
            translations.push((w, v.coords().to_vec()));
        }
    }
    let summary = CocycleSummary {
        generators: c.generators().keys().cloned().collect(),
        pairs: cfg.samples,
        max_defect,
        translations,
    };
    emit(cfg, out, "cocycle.json", &summary)?;
    Ok(summary)
}
