//! Numerics for constant scalar curvature (CSC) spacelike hypersurfaces in
//! Minkowski space `R^{d,1}`.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised bottom-up:
//!
//! * [`minkowski`] — signature-(d,1) vectors, causal classes, Lorentz maps,
//!   boosts and orthonormalization.
//! * [`sl`] — the real special lagrangian structure `(ω, J, R)` on
//!   `R^{d,1} × R^{d,1}`, its metrics `g` and `m`, the holomorphic volume
//!   form, lagrangian frames on contact fibres, the refined angle, the
//!   degeneracy functionals `φ^k` and the curvature of the contact
//!   distribution.
//! * [`surface`] — spacelike graphs, height fields, surface jets, scalar
//!   curvature, legendrian lifts and curtain submanifolds.
//! * [`solver`] — the Jacobi operator, a damped Newton solver for
//!   `σ₂(A) = const` on height fields, boundary-data continuation and
//!   foliation probes.
//! * [`affine`] — affine isometries, cocycles, the future cone and the
//!   fuchsian time function.
//!
//! All linear algebra below the solver runs on fixed-capacity matrices
//! ([`linalg::SMat`]); the spatial dimension `d` is a runtime value with
//! `d + 1 <= MAX_DIM`.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod affine;
pub mod error;
pub mod linalg;
pub mod minkowski;
mod num;
pub mod sl;
pub mod solver;
pub mod sparse;
pub mod surface;

pub use error::{Error, Result};
pub use linalg::{SMat, MAX_DIM};
pub use minkowski::{CausalClass, CausalKind, LorentzMap, MinkVector};
pub use num_complex::Complex64;
pub use sl::{ContactPoint, LagrangianFrame, PairVector};
pub use surface::{HeightField, SurfaceJet};

/// Default spatial dimension.
pub const DEFAULT_DIM: usize = 3;
