use thiserror::Error;

use crate::diagrams::Violation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("malformed diagram: {0}")]
    Malformed(String),
    #[error("diagram violates {} constraint(s): {violations:?}", violations.len())]
    Invalid { violations: Vec<Violation> },
    #[error("diagram is not trivalent (defect {defect})")]
    NotTrivalent { defect: i64 },
    #[error("diagrams live on different numbers of segments ({0} vs {1})")]
    SegmentMismatch(usize, usize),
    #[error("cannot parse canonical key {0:?}")]
    BadKey(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("tree part violates an IHX condition: {terms}")]
    IhxViolation { terms: String },
    #[error("no cocycle extends the given top part")]
    NoCompletion,
    #[error("top part mixes free-vertex counts {0} and {1}")]
    MixedFreeCounts(usize, usize),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MilnorError {
    #[error("generator index {index} out of range for {strands} strands")]
    IndexOutOfRange { index: usize, strands: usize },
    #[error("Milnor indices must be distinct, got {0:?}")]
    RepeatedIndex(Vec<usize>),
    #[error("image of x{0} is not a conjugate of x{0}")]
    NotConjugate(usize),
    #[error("cannot parse braid token {0:?}")]
    Parse(String),
    #[error("invariant of type {invariant} cannot be evaluated on a diagram of order {order}")]
    TypeTooLow { invariant: usize, order: usize },
    #[error("no global chord order is compatible with the leg orders on every segment")]
    NotBraidRealizable,
    #[error("interleaving is not a permutation of the chords compatible with the segment orders")]
    BadInterleaving,
    #[error("expected a chord diagram")]
    NotChordDiagram,
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegralError {
    #[error("diagram must be trivalent")]
    NotTrivalent,
    #[error("diagram uses segment {segment} but the link has {strands} strands")]
    StrandOutOfRange { segment: usize, strands: usize },
    #[error("invalid link: {0}")]
    InvalidLink(String),
    #[error("projection stayed degenerate after {0} perturbations")]
    DegenerateProjection(usize),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}
