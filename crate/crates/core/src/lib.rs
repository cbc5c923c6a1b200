//! Numerical laboratory for suspension flows over hyperbolic toral automorphisms.
//!
//! The crate is `no_std` and needs only `alloc`. It covers:
//!
//! * [`spectral`]: exact integer linear algebra on unimodular matrices, certified
//!   eigenvalue moduli, the codimension-one spectral gap inequality, invariant
//!   subspaces of the unstable restriction and a companion-matrix catalog.
//! * [`roof`]: trigonometric roof functions, periodic orbits, Birkhoff sums,
//!   periodic obstructions and a frequency-space cohomological equation solver.
//! * [`flow`]: the suspension flow on the mapping torus, strong stable and unstable
//!   leaves via convergent time-adjustment series.
//! * [`pcf`]: temporal distance functions (two independent evaluations), their
//!   gradients, matching kernels and conjugacy reconstruction on unstable patches.
//! * [`perturb`]: section charts at the fixed point, roof bumps, the stable-graph
//!   time of a reparametrized flow, holonomy derivatives and Grassmannian sweeps.
//! * [`regularity`]: bunching sups of the linear model and the volume identity.
//!
//! Torus points live on the lattice `(2^-64 Z / Z)^d` (see [`torus`]); the integer
//! base map is an exact bijection of that lattice, so forward and backward flow
//! evolution commute bit-for-bit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![no_std]

extern crate alloc;

pub mod error;
pub mod flow;
pub mod linalg;
pub mod pcf;
pub mod perturb;
pub mod poly;
pub mod rational;
pub mod regularity;
pub mod roof;
pub mod spectral;
pub mod torus;
pub mod trig;

mod dd;
mod sum;

pub use error::{Error, Result};
pub use flow::{FlowPoint, Leaf, SuspensionFlow};
pub use rational::Rational;
pub use roof::RoofFunction;
pub use spectral::{IntegerMatrix, SpectralData};
pub use torus::TorusPoint;
pub use trig::TrigPolynomial;
