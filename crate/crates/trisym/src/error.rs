use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped by the module that raises them; `kind()` buckets them
/// for exit-code mapping in the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // map construction
    #[error("rotation refers to unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("map has no vertices")]
    EmptyMap,
    #[error("map is not connected")]
    NotConnected,
    #[error("loop edge at vertex {0}")]
    LoopEdge(usize),
    #[error("parallel edge between {0} and {1}")]
    ParallelEdge(usize, usize),
    #[error("inconsistent rotation: {0} lists {1} but not vice versa")]
    InconsistentRotation(usize, usize),
    #[error("Euler violation: V - E + F = {0}")]
    EulerViolation(i64),
    #[error("unknown cell {0}")]
    UnknownCell(String),
    #[error("cells are not incident")]
    NotIncident,
    #[error("dual is not simple")]
    DualNotSimple,
    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },

    // triangulations
    #[error("face {0} is not a triangle")]
    NonTriangularFace(String),
    #[error("Trivial triangulation rejected (V = {0})")]
    Trivial(usize),
    #[error("outer face is not bounded by a cycle")]
    OuterNotCycle,
    #[error("inner face {0} is not a triangle")]
    InnerFaceNotTriangle(String),
    #[error("root cells are not mutually incident")]
    RootNotIncident,
    #[error("BoundaryLengthMismatch: face has length {face}, near-triangulation has {near}")]
    BoundaryLengthMismatch { face: usize, near: usize },
    #[error("DoubleEdgeCreated between {0} and {1}")]
    DoubleEdgeCreated(usize, usize),
    #[error("cycle does not bound a disc")]
    NotADiscBoundary,

    // symmetry
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("automorphism is not reflective at the root")]
    NotReflective,
    #[error("no rotation of the requested order at the root")]
    NoRotation,
    #[error("group is not dihedral")]
    NotDihedral,

    // composition guards
    #[error("LengthMismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("ChordViolation: {0}")]
    ChordViolation(String),
    #[error("TwoLayeredViolation: {0}")]
    TwoLayeredViolation(String),

    // parameters
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("vertex bound {requested} exceeds cap {cap}")]
    BoundTooLarge { requested: usize, cap: usize },
    #[error("level construction already terminal")]
    AlreadyTerminal,
}

/// Coarse classification used to choose process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    MissingSymmetry,
    Guard,
    Internal,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            NotReflective | NoRotation | NotDihedral => ErrorKind::MissingSymmetry,
            BoundaryLengthMismatch { .. }
            | DoubleEdgeCreated(..)
            | LengthMismatch { .. }
            | ChordViolation(_)
            | TwoLayeredViolation(_) => ErrorKind::Guard,
            InvariantViolation(_) | AlreadyTerminal => ErrorKind::Internal,
            _ => ErrorKind::Input,
        }
    }

    /// Short variant name, used by the CLI to name violated guards.
    pub fn name(&self) -> &'static str {
        use Error::*;
        match self {
            UnknownVertex(_) => "UnknownVertex",
            EmptyMap => "EmptyMap",
            NotConnected => "NotConnected",
            LoopEdge(_) => "LoopEdge",
            ParallelEdge(..) => "ParallelEdge",
            InconsistentRotation(..) => "InconsistentRotation",
            EulerViolation(_) => "EulerViolation",
            UnknownCell(_) => "UnknownCell",
            NotIncident => "NotIncident",
            DualNotSimple => "DualNotSimple",
            ParseError { .. } => "ParseError",
            NonTriangularFace(_) => "NonTriangularFace",
            Trivial(_) => "Trivial",
            OuterNotCycle => "OuterNotCycle",
            InnerFaceNotTriangle(_) => "InnerFaceNotTriangle",
            RootNotIncident => "RootNotIncident",
            BoundaryLengthMismatch { .. } => "BoundaryLengthMismatch",
            DoubleEdgeCreated(..) => "DoubleEdgeCreated",
            NotADiscBoundary => "NotADiscBoundary",
            InvariantViolation(_) => "InvariantViolation",
            NotReflective => "NotReflective",
            NoRotation => "NoRotation",
            NotDihedral => "NotDihedral",
            LengthMismatch { .. } => "LengthMismatch",
            ChordViolation(_) => "ChordViolation",
            TwoLayeredViolation(_) => "TwoLayeredViolation",
            BadParams(_) => "BadParams",
            BoundTooLarge { .. } => "BoundTooLarge",
            AlreadyTerminal => "AlreadyTerminal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
