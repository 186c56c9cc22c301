//! Height fields on rectangular grids and their finite-difference jets.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SMat, MAX_DIM};
use crate::num;

use super::analytic::AnalyticSurface;
use super::jet::{SurfaceJet, SPACELIKE_MARGIN};

/// Current version of the serialized [`HeightField`] layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Node layout of a rectangular grid; values are stored row-major (last
/// axis fastest).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    d: usize,
    min: [f64; MAX_DIM],
    max: [f64; MAX_DIM],
    shape: [usize; MAX_DIM],
    spacing: [f64; MAX_DIM],
    strides: [usize; MAX_DIM],
    len: usize,
}

impl Grid {
    /// Grid with `shape[a]` nodes along axis `a` spanning `[min[a], max[a]]`.
    pub fn new(min: &[f64], max: &[f64], shape: &[usize]) -> Result<Self> {
        let d = min.len();
        if !(1..MAX_DIM).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        if max.len() != d || shape.len() != d {
            return Err(Error::InvalidField("domain and shape lengths differ".into()));
        }
        let mut g = Grid {
            d,
            min: [0.0; MAX_DIM],
            max: [0.0; MAX_DIM],
            shape: [1; MAX_DIM],
            spacing: [0.0; MAX_DIM],
            strides: [0; MAX_DIM],
            len: 1,
        };
        for a in 0..d {
            if !(min[a].is_finite() && max[a].is_finite() && max[a] > min[a]) {
                return Err(Error::InvalidField(format!("empty extent on axis {a}")));
            }
            if shape[a] < 3 {
                return Err(Error::InvalidField(format!("axis {a} needs at least 3 nodes")));
            }
            g.min[a] = min[a];
            g.max[a] = max[a];
            g.shape[a] = shape[a];
            g.spacing[a] = (max[a] - min[a]) / (shape[a] - 1) as f64;
        }
        let mut stride = 1;
        for a in (0..d).rev() {
            g.strides[a] = stride;
            stride *= shape[a];
        }
        g.len = stride;
        Ok(g)
    }

    /// The cube `[lo, hi]^d` with spacing `h`; `(hi - lo) / h` must be an
    /// integer.
    pub fn cube(d: usize, lo: f64, hi: f64, h: f64) -> Result<Self> {
        let cells = (hi - lo) / h;
        let n = libm::round(cells);
        if !(h > 0.0) || num::abs(cells - n) > 1e-9 * cells.max(1.0) {
            return Err(Error::InvalidField(format!(
                "spacing {h} does not divide [{lo}, {hi}]"
            )));
        }
        let n = n as usize + 1;
        Self::new(&vec![lo; d], &vec![hi; d], &vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.d]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.d]
    }

    pub fn domain_min(&self) -> &[f64] {
        &self.min[..self.d]
    }

    pub fn domain_max(&self) -> &[f64] {
        &self.max[..self.d]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut m = [0; MAX_DIM];
        let mut r = flat;
        for a in 0..self.d {
            m[a] = r / self.strides[a];
            r %= self.strides[a];
        }
        m
    }

    pub fn flat_index(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: multi.len(),
            });
        }
        let mut f = 0;
        for a in 0..self.d {
            if multi[a] >= self.shape[a] {
                return Err(Error::OutOfRange {
                    what: "grid index",
                    value: multi[a] as f64,
                });
            }
            f += multi[a] * self.strides[a];
        }
        Ok(f)
    }

    /// Coordinates of a node.
    pub fn coords(&self, flat: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(flat);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.d {
            x[a] = if m[a] + 1 == self.shape[a] {
                self.max[a]
            } else {
                self.min[a] + m[a] as f64 * self.spacing[a]
            };
        }
        x
    }

    /// Number of cells between the node and the nearest boundary face.
    pub fn depth(&self, flat: usize) -> usize {
        let m = self.multi_index(flat);
        (0..self.d)
            .map(|a| m[a].min(self.shape[a] - 1 - m[a]))
            .min()
            .unwrap_or(0)
    }

    pub fn is_boundary(&self, flat: usize) -> bool {
        self.depth(flat) == 0
    }

    /// Flat indices of nodes at depth `>= 1`, in storage order.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| !self.is_boundary(i)).collect()
    }

    /// Same node layout (ignoring floating-point noise in the bounds).
    pub fn same_layout(&self, other: &Grid) -> bool {
        self.d == other.d
            && self.shape() == other.shape()
            && (0..self.d).all(|a| {
                num::abs(self.min[a] - other.min[a]) <= 1e-12 * (1.0 + num::abs(self.min[a]))
                    && num::abs(self.max[a] - other.max[a]) <= 1e-12 * (1.0 + num::abs(self.max[a]))
            })
    }
}

/// Finite-difference order of the jet stencils.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// Central second-order differences (3 points per axis).
    #[default]
    Second,
    /// Central fourth-order differences (5 points per axis).
    Fourth,
}

impl Stencil {
    /// Nodes needed between a jet and the boundary.
    pub fn reach(self) -> usize {
        match self {
            Stencil::Second => 1,
            Stencil::Fourth => 2,
        }
    }
}

/// A spacelike graph `x_{d+1} = u(x)` sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct HeightField {
    grid: Grid,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    schema_version: u32,
    d: usize,
    domain_min: Vec<f64>,
    domain_max: Vec<f64>,
    shape: Vec<usize>,
    spacing: Vec<f64>,
    values: Vec<f64>,
}

impl From<HeightField> for FieldRepr {
    fn from(f: HeightField) -> Self {
        FieldRepr {
            schema_version: SCHEMA_VERSION,
            d: f.grid.d,
            domain_min: f.grid.domain_min().to_vec(),
            domain_max: f.grid.domain_max().to_vec(),
            shape: f.grid.shape().to_vec(),
            spacing: f.grid.spacing().to_vec(),
            values: f.values,
        }
    }
}

impl TryFrom<FieldRepr> for HeightField {
    type Error = Error;

    fn try_from(r: FieldRepr) -> Result<Self> {
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidField(format!(
                "unsupported schema_version {}",
                r.schema_version
            )));
        }
        if r.domain_min.len() != r.d {
            return Err(Error::InvalidField("d disagrees with domain_min".into()));
        }
        let grid = Grid::new(&r.domain_min, &r.domain_max, &r.shape)?;
        if r.spacing.len() != r.d
            || r.spacing
                .iter()
                .zip(grid.spacing())
                .any(|(a, b)| num::abs(a - b) > 1e-9 * b)
        {
            return Err(Error::InvalidField(
                "spacing inconsistent with domain bounds and shape".into(),
            ));
        }
        HeightField::new(grid, r.values)
    }
}

impl HeightField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("height field"));
        }
        Ok(HeightField { grid, values })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let d = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.coords(i)[..d])).collect();
        Self::new(grid, values)
    }

    /// Samples an analytic surface at every node.
    pub fn sample(grid: Grid, surface: &dyn AnalyticSurface) -> Result<Self> {
        if surface.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: surface.dim(),
            });
        }
        let d = grid.dim();
        let values = (0..grid.len())
            .map(|i| surface.height(&grid.coords(i)[..d]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Largest `|∇u|` over all nodes, one-sided at the boundary.
    pub fn max_slope(&self) -> f64 {
        let g = &self.grid;
        let d = g.dim();
        let mut worst = 0.0_f64;
        for i in 0..g.len() {
            let m = g.multi_index(i);
            let mut s = 0.0;
            for a in 0..d {
                let st = g.stride(a);
                let h = g.spacing()[a];
                let da = if m[a] == 0 {
                    (self.values[i + st] - self.values[i]) / h
                } else if m[a] + 1 == g.shape()[a] {
                    (self.values[i] - self.values[i - st]) / h
                } else {
                    (self.values[i + st] - self.values[i - st]) / (2.0 * h)
                };
                s += da * da;
            }
            worst = worst.max(num::sqrt(s));
        }
        worst
    }

    /// Fails unless every difference quotient has `|∇u| < 1 - margin`.
    pub fn check_spacelike(&self, margin: f64) -> Result<()> {
        let s = self.max_slope();
        if !(s < 1.0 - margin) {
            return Err(Error::Precondition(format!(
                "height field is not uniformly spacelike: max |∇u| = {s:.6} ≥ 1 - {margin}"
            )));
        }
        Ok(())
    }

    /// Finite-difference `(∇u, Hess u)` at a node of sufficient depth.
    pub fn derivatives(&self, flat: usize, stencil: Stencil) -> Result<([f64; MAX_DIM], SMat)> {
        if self.grid.depth(flat) < stencil.reach() {
            return Err(Error::Precondition(format!(
                "node {flat} is within {} cell(s) of the boundary",
                stencil.reach()
            )));
        }
        Ok(match stencil {
            Stencil::Second => self.derivatives2(flat),
            Stencil::Fourth => self.derivatives4(flat),
        })
    }

    /// Second-order central differences; caller guarantees depth `>= 1`.
    pub(crate) fn derivatives2(&self, i: usize) -> ([f64; MAX_DIM], SMat) {
        let g = &self.grid;
        let u = &self.values;
        let d = g.dim();
        let mut p = [0.0; MAX_DIM];
        let mut h = SMat::zeros(d);
        for a in 0..d {
            let sa = g.strides[a];
            let ha = g.spacing[a];
            p[a] = (u[i + sa] - u[i - sa]) / (2.0 * ha);
            h[(a, a)] = (u[i + sa] - 2.0 * u[i] + u[i - sa]) / (ha * ha);
            for b in 0..a {
                let sb = g.strides[b];
                let hb = g.spacing[b];
                let v = (u[i + sa + sb] - u[i + sa - sb] - u[i - sa + sb] + u[i - sa - sb]) / (4.0 * ha * hb);
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        (p, h)
    }

    fn derivatives4(&self, i: usize) -> ([f64; MAX_DIM], SMat) {
        let g = &self.grid;
        let u = &self.values;
        let d = g.dim();
        const D1: [(isize, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
        let at = |off: isize| u[(i as isize + off) as usize];
        let mut p = [0.0; MAX_DIM];
        let mut h = SMat::zeros(d);
        for a in 0..d {
            let sa = g.strides[a] as isize;
            let ha = g.spacing[a];
            p[a] = D1.iter().map(|&(k, c)| c * at(k * sa)).sum::<f64>() / (12.0 * ha);
            h[(a, a)] = (-at(2 * sa) + 16.0 * at(sa) - 30.0 * at(0) + 16.0 * at(-sa) - at(-2 * sa))
                / (12.0 * ha * ha);
            for b in 0..a {
                let sb = g.strides[b] as isize;
                let hb = g.spacing[b];
                let mut v = 0.0;
                for &(ka, ca) in &D1 {
                    for &(kb, cb) in &D1 {
                        v += ca * cb * at(ka * sa + kb * sb);
                    }
                }
                v /= 144.0 * ha * hb;
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        (p, h)
    }

    /// Jet at a grid node with the given stencil and spacelike margin.
    pub fn jet_with(&self, flat: usize, stencil: Stencil, margin: f64) -> Result<SurfaceJet> {
        let (p, h) = self.derivatives(flat, stencil)?;
        let d = self.dim();
        SurfaceJet::from_graph(&self.grid.coords(flat)[..d], self.values[flat], &p[..d], h, margin)
    }
}

/// Second-order finite-difference jet at a grid multi-index.
pub fn jet_at(field: &HeightField, index: &[usize]) -> Result<SurfaceJet> {
    let flat = field.grid.flat_index(index)?;
    field.jet_with(flat, Stencil::Second, SPACELIKE_MARGIN)
}
