//! Run configuration: JSON file, then command-line overrides, then validation.

use std::path::{Path, PathBuf};

use csc_core::minkowski::MinkVector;
use csc_core::solver::NewtonOptions;
use csc_core::surface::{AnalyticSurface, Grid, Hyperboloid, QuadricGraph};
use csc_core::SMat;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// An analytic test surface. Hyperboloids use the run's `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    /// The fuchsian leaf `‖x‖² = -1/k²`.
    Round,
    /// The hyperboloid centered at `(0, …, 0, time_offset)`, boosted along
    /// `e_axis`.
    Boosted { time_offset: f64, axis: usize, rapidity: f64 },
    /// `value + ⟨slope, x⟩ + ½ xᵀ hessian x`.
    Quadric {
        value: f64,
        slope: Vec<f64>,
        hessian: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// Least-squares plane through the boundary values.
    Affine,
    /// The boundary field itself (exact when it samples a solution).
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurtainSpec {
    /// Spatial axes spanning the totally geodesic slice.
    pub axes: Vec<usize>,
    /// Constant potential `φ`.
    pub potential: f64,
    /// Offsets along the normal directions.
    pub offsets: Vec<f64>,
    /// Half-width of the box the base points are drawn from.
    pub spread: f64,
}

impl Default for CurtainSpec {
    fn default() -> Self {
        CurtainSpec {
            axes: vec![1, 2],
            potential: 1.0,
            offsets: vec![-1.0, 0.0, 1.0],
            spread: 1.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Filled in from the subcommand.
    pub command: String,
    pub dim: usize,
    pub k: f64,
    pub grid_h: f64,
    /// `[lo, hi]` on every axis.
    pub domain: [f64; 2],
    pub steps: usize,
    pub seed: u64,
    /// Newton tolerance on `max |S + k²|`.
    pub tol: f64,
    pub max_iter: usize,
    pub surface: SurfaceSpec,
    pub init: InitKind,
    /// Boundary height field (solve) or cocycle document (cocycle).
    pub input: Option<PathBuf>,
    /// Final rapidity of the continuation path.
    pub rapidity: f64,
    /// Leaf parameters probed by `foliate`.
    pub ks: Vec<f64>,
    /// Random samples (lift, foliate, curtain bases, cocycle word pairs).
    pub samples: usize,
    pub curtain: CurtainSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            dim: 3,
            k: 1.0,
            grid_h: 1.0 / 16.0,
            domain: [-0.5, 0.5],
            steps: 16,
            seed: 0,
            tol: 1e-8,
            max_iter: 30,
            surface: SurfaceSpec::Boosted {
                time_offset: -0.5,
                axis: 0,
                rapidity: 0.6,
            },
            init: InitKind::Affine,
            input: None,
            rapidity: 1.0,
            ks: vec![0.8, 1.0, 1.25],
            samples: 100,
            curtain: CurtainSpec::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub k: Option<f64>,
    pub grid_h: Option<f64>,
    pub steps: Option<usize>,
    pub tol: Option<f64>,
    pub input: Option<PathBuf>,
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => crate::io::read_json(p),
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.k {
            self.k = v;
        }
        if let Some(v) = o.grid_h {
            self.grid_h = v;
        }
        if let Some(v) = o.steps {
            self.steps = v;
        }
        if let Some(v) = o.tol {
            self.tol = v;
        }
        if o.input.is_some() {
            self.input = o.input.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("tol", self.tol)?;
        positive("k", self.k)?;
        positive("grid_h", self.grid_h)?;
        positive("curtain.spread", self.curtain.spread)?;
        for &k in &self.ks {
            positive("ks entry", k)?;
        }
        if !(2..csc_core::MAX_DIM).contains(&self.dim) {
            return Err(CliError::Usage(format!("dim must lie in 2..{}", csc_core::MAX_DIM)));
        }
        let [lo, hi] = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(CliError::Usage(format!("domain [{lo}, {hi}] is empty")));
        }
        if self.steps == 0 || self.samples == 0 || self.max_iter == 0 {
            return Err(CliError::Usage("steps, samples and max_iter must be at least 1".into()));
        }
        if !self.rapidity.is_finite() {
            return Err(CliError::Usage("rapidity must be finite".into()));
        }
        if let SurfaceSpec::Boosted { axis, .. } = self.surface {
            if axis >= self.dim {
                return Err(CliError::Usage(format!("boost axis {axis} out of range for dim {}", self.dim)));
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        format!("{:x}", Sha256::digest(&bytes))
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::cube(self.dim, self.domain[0], self.domain[1], self.grid_h)?)
    }

    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..NewtonOptions::default()
        }
    }

    pub fn hyperboloid(&self, rapidity: f64) -> Result<Hyperboloid> {
        let (time_offset, axis) = match self.surface {
            SurfaceSpec::Boosted { time_offset, axis, .. } => (time_offset, axis),
            _ => (0.0, 0),
        };
        let mut c = MinkVector::zero(self.dim);
        c.set(self.dim, time_offset);
        Ok(Hyperboloid::boosted(self.k, c, axis, rapidity)?)
    }

    pub fn analytic_surface(&self) -> Result<Box<dyn AnalyticSurface>> {
        Ok(match &self.surface {
            SurfaceSpec::Round => Box::new(Hyperboloid::round(self.dim, self.k)?),
            SurfaceSpec::Boosted { rapidity, .. } => Box::new(self.hyperboloid(*rapidity)?),
            SurfaceSpec::Quadric { value, slope, hessian } => {
                let d = self.dim;
                if slope.len() != d || hessian.len() != d || hessian.iter().any(|r| r.len() != d) {
                    return Err(CliError::Usage(format!("quadric surface needs a {d}-vector and a {d}×{d} matrix")));
                }
                let h = SMat::from_fn(d, |a, b| hessian[a][b]);
                if h.asymmetry() > 0.0 {
                    return Err(CliError::Usage("quadric hessian must be symmetric".into()));
                }
                Box::new(QuadricGraph {
                    value: *value,
                    slope: slope.clone(),
                    hessian: h,
                })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_tolerance_is_rejected() {
        let cfg = RunConfig {
            tol: 0.0,
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Usage(_))));
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn overrides_win_and_change_the_hash() {
        let mut cfg = RunConfig::default();
        let before = cfg.hash();
        cfg.apply(&Overrides {
            seed: Some(7),
            k: Some(2.0),
            ..Overrides::default()
        });
        assert_eq!((cfg.seed, cfg.k), (7, 2.0));
        assert_ne!(cfg.hash(), before);
        assert_eq!(cfg.hash(), cfg.clone().hash());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig {
            surface: SurfaceSpec::Quadric {
                value: 0.0,
                slope: vec![0.0; 3],
                hessian: vec![vec![1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 0.5]],
            },
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
        let partial: RunConfig = serde_json::from_str(r#"{"k": 2.0}"#).unwrap();
        assert_eq!(partial.k, 2.0);
        assert_eq!(partial.dim, 3);
    }
}
