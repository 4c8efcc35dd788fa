//! Exact workbench for the graph complex of homotopy link diagrams, with a
//! Milnor invariant calculator for pure braids and a Monte Carlo evaluator of
//! configuration space integrals.

pub mod acceptance;
pub mod dgalgebra;
pub mod diagrams;
pub mod error;
pub mod csintegral;
pub mod exactla;
pub mod milnor;
pub mod relations;

pub use diagrams::{CanonicalKey, Diagram, LieDiagram, LinComb, Violation};
pub use error::{DiagramError, IntegralError, MilnorError, RelationError};
pub use exactla::{RatMatrix, Rational, Subspace};
