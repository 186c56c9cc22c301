//! Continuation over a path of boundary data `t ∈ [0, 1]`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::solver::newton::{newton_solve, NewtonOptions, SolveReport};
use crate::surface::analytic::AnalyticSurface;
use crate::surface::field::{Grid, HeightField};

/// A step that failed, with everything solved before it.
#[derive(Clone, Debug)]
pub struct ContinuationFailure {
    /// Index of the failing step (`t = index / steps`).
    pub index: usize,
    pub partial: Vec<(HeightField, SolveReport)>,
    pub error: Error,
    pub report: SolveReport,
}

impl core::fmt::Display for ContinuationFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "continuation step {} failed: {}", self.index, self.error)
    }
}

impl core::error::Error for ContinuationFailure {}

/// The path `t ↦ family(t)` sampled on `grid`.
pub fn sampled_path<S, F>(grid: Grid, family: F) -> impl Fn(f64) -> Result<HeightField>
where
    S: AnalyticSurface,
    F: Fn(f64) -> Result<S>,
{
    move |t| HeightField::sample(grid, &family(t)?)
}

/// Solves at `t_j = j / steps`, `j = 0..=steps`. Only boundary values of
/// `path(t)` are imposed; the step-`j` solve starts from
/// `u_{j-1} + path(t_j) - path(t_{j-1})` (from `init` at `j = 0`).
pub fn continuation(
    path: &dyn Fn(f64) -> Result<HeightField>,
    k: f64,
    steps: usize,
    init: &HeightField,
    opts: &NewtonOptions,
) -> core::result::Result<Vec<(HeightField, SolveReport)>, ContinuationFailure> {
    let mut out: Vec<(HeightField, SolveReport)> = Vec::with_capacity(steps + 1);
    let mut prev_trace: Option<HeightField> = None;
    let fail = |index: usize, out: Vec<(HeightField, SolveReport)>, error: Error, report: SolveReport| {
        ContinuationFailure {
            index,
            partial: out,
            error,
            report,
        }
    };
    if steps == 0 {
        return Err(fail(
            0,
            out,
            Error::OutOfRange { what: "steps", value: 0.0 },
            SolveReport::default(),
        ));
    }
    for j in 0..=steps {
        let t = j as f64 / steps as f64;
        let trace = match path(t) {
            Ok(tr) => tr,
            Err(e) => return Err(fail(j, out, e, SolveReport::default())),
        };
        if !trace.grid().same_layout(init.grid()) {
            let e = Error::InvalidField("path grid differs from the initial field".into());
            return Err(fail(j, out, e, SolveReport::default()));
        }
        let start = match (&prev_trace, out.last()) {
            (Some(prev), Some((u, _))) => {
                let mut s = u.clone();
                for ((v, a), b) in s.values_mut().iter_mut().zip(trace.values()).zip(prev.values()) {
                    *v += a - b;
                }
                s
            }
            _ => init.clone(),
        };
        match newton_solve(&trace, k, &start, opts) {
            Ok(sol) => out.push(sol),
            Err(f) => return Err(fail(j, out, f.error, f.report)),
        }
        prev_trace = Some(trace);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::MinkVector;
    use crate::surface::analytic::Hyperboloid;

    fn grid() -> Grid {
        Grid::cube(2, -0.5, 0.5, 0.125).unwrap()
    }

    #[test]
    fn constant_path_repeats_solution() {
        let g = grid();
        let path = sampled_path(g, |_| Hyperboloid::round(2, 1.0));
        let init = path(0.0).unwrap();
        let sols = continuation(&path, 1.0, 4, &init, &NewtonOptions::default()).unwrap();
        assert_eq!(sols.len(), 5);
        for (u, r) in &sols[1..] {
            assert_eq!(r.iterations, 0);
            assert_eq!(u.values(), sols[0].0.values());
        }
    }

    #[test]
    fn boost_path_converges() {
        let g = grid();
        let c0 = MinkVector::new(&[0.0, 0.0, -0.5]).unwrap();
        let path = sampled_path(g, move |t| Hyperboloid::boosted(1.0, c0, 0, t));
        let init = path(0.0).unwrap();
        let sols = continuation(&path, 1.0, 4, &init, &NewtonOptions::default()).unwrap();
        assert!(sols.iter().all(|(_, r)| r.converged));
    }

    #[test]
    fn spacelike_exit_aborts_with_index() {
        let g = grid();
        let base = HeightField::sample(g, &Hyperboloid::round(2, 1.0).unwrap()).unwrap();
        let path = |t: f64| {
            let mut f = base.clone();
            for i in 0..g.len() {
                f.values_mut()[i] += 2.0 * t * g.coords(i)[0];
            }
            Ok(f)
        };
        let err = continuation(&path, 1.0, 4, &base, &NewtonOptions::default()).unwrap_err();
        assert!(err.index >= 1 && err.index <= 4);
        assert_eq!(err.partial.len(), err.index);
        assert!(matches!(err.error, Error::Precondition(_)));
    }
}
