//! Spectral calculus on the round sphere, the degenerate transport solvers
//! behind κ-self-similar vacuum data, and the characteristic initial data
//! built from them.

pub mod axisym;
pub mod calculus;
pub mod chardata;
pub mod constraint;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod fit;
pub mod grid;
pub mod hprofile;
pub mod io;
pub mod jet;
pub mod lie;
pub mod linalg;
pub mod metric;
pub mod norms;
pub mod ode;
pub mod quad1d;
pub mod random;
pub mod seed;
pub mod transport;
pub mod tuple;

pub use error::{Error, Result};
pub use field::{AnyField, Field, FieldKind, OneForm, ScalarField, SymTF2Field, Tensor, VectorField};
pub use grid::SphereGrid;
pub use metric::ConformalMetric;
