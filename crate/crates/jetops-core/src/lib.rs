//! Numerical calculus of Legendrian submanifolds of `J¹(ℝⁿ,ℝ)` through
//! generating functions.
//!
//! The crate is organised around one expression type, [`expr::GfExpr`], which
//! models generating functions `F(q, w)` closed under the classical
//! combinators (the contact transformation `T`, slice, contour, product, sum,
//! convolution, stabilization, fiber diffeomorphisms and a one-parameter
//! deformation path).  On top of it sit:
//!
//! * [`front`] — sampling the contour `{∇_w F = 0}` into Legendrian point
//!   clouds, wave-front projection, geometric operations on clouds, cusp
//!   detection and Hausdorff comparison;
//! * [`selector`] — the min-max of almost-simple fiber functions and the
//!   q-parametrised selector curve, computed by critical-value enumeration
//!   plus cubical sublevel relative persistence;
//! * [`convex`] — discrete convex analysis on sampled 1-D functions:
//!   Legendre–Fenchel transform, infimal convolution, biconjugate and the
//!   gradient-inversion Legendre transform.
//!
//! The crate is `no_std` compatible (with `alloc`); file formats, CLI and
//! scenario plumbing live in the companion `jetops` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod convex;
pub mod error;
pub mod expr;
pub mod front;
pub mod grid;
pub mod math;
pub mod ops;
pub mod selector;

pub use error::{Error, Result};
pub use expr::GfExpr;
pub use front::{LegendrianCloud, Point1Jet, WaveFront};
pub use grid::GridFunction;
pub use selector::{CriticalValueSet, Field, PersistenceDiagram, SelectorCurve};
