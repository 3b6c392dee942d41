//! Numerical verification of equivariant localization for a pair of
//! commuting Killing vector fields.
//!
//! The building blocks are exact (jet-based) exterior calculus on a single
//! coordinate chart ([`calculus`], [`geometry`]), the twisted differential
//! `d + i_X + √−1 i_Y` ([`equivariant`]), zero sets and Pfaffians
//! ([`zeroset`]), quadrature and the fixed-point formula ([`localization`]),
//! characteristic forms ([`characteristic`]) and the exact stationary-phase
//! identity ([`symplectic`]). [`runner`] drives whole suites and produces
//! JSON reports.

pub mod calculus;
pub mod characteristic;
pub mod equivariant;
pub mod error;
pub mod expr;
pub mod form;
pub mod geometry;
pub mod jet;
pub mod localization;
pub mod runner;
pub mod scenarios;
pub mod symplectic;
pub mod zeroset;

pub use num_complex::Complex64 as C64;

pub use calculus::FormField;
pub use characteristic::{CharacteristicClass, EndValuedFormField, Frame};
pub use equivariant::{GeneratorKind, Identity, TwistPair};
pub use error::{Error, Result};
pub use form::{FormJet, FormValue, GradedForm};
pub use geometry::{Chart, Scenario, VectorField};
pub use localization::{Integral, LocalizationReport, QuadratureSpec};
pub use runner::{run, Report, RunSpec, Suite};
pub use scenarios::{builtin, builtin_with, load_scenario, ScenarioConfig};
pub use symplectic::SymplecticData;
pub use zeroset::{FixedComponent, SkewComplexMatrix};
