use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid triangulation: {0}")]
    Triangulation(String),
    #[error("face multiply matched: tet {tet} face {face}")]
    FaceMultiplyMatched { tet: usize, face: u8 },
    #[error("unmatched face: tet {tet} face {face}")]
    UnmatchedFace { tet: usize, face: u8 },
    #[error("orientation-preserving gluing: tet {tet} face {face}")]
    OrientationPreserving { tet: usize, face: u8 },
    #[error("edge-count mismatch: {edges} edge classes for {tets} tetrahedra")]
    EdgeCountMismatch { edges: usize, tets: usize },
    #[error("non-torus cusp link (component {cusp}, euler characteristic {euler}, orientable {orientable})")]
    NonTorusCusp {
        cusp: usize,
        euler: i64,
        orientable: bool,
    },
    #[error("degenerate coordinate: {0}")]
    Degenerate(String),
    #[error("inconsistent decoration: residual {0:e}")]
    Inconsistent(f64),
    #[error("invalid point data: {0}")]
    Point(String),
    #[error("expression error in {expr:?}: {message}")]
    Expression { expr: String, message: String },
    #[error("argument not in J*: defect {0:e}")]
    NotInJStar(f64),
    #[error("cusp mismatch: {0} vs {1}")]
    CuspMismatch(usize, usize),
    #[error("open path: {0}")]
    OpenPath(String),
    #[error("not a solution point: residual {0:e}")]
    NotSolution(f64),
    #[error("not unipotent: max |eigenvalue - 1| = {0:e}")]
    NotUnipotent(f64),
    #[error("point not positive")]
    NotPositive,
    #[error("xi not in A_J: defect {0:e}")]
    NotInAJ(f64),
    #[error("kernel mismatch: {0}")]
    KernelMismatch(String),
    #[error("identity violated: {0}")]
    IdentityViolated(String),
    #[error("no convergence after {iterations} iterations (best residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("degenerate step: {0}")]
    DegenerateStep(String),
    #[error("target out of local range: log distance {0:e}")]
    TargetOutOfRange(f64),
    #[error("excluded parameter: {0}")]
    ExcludedParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Input errors (exit code 2) as opposed to computational failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::Triangulation(_)
                | Error::FaceMultiplyMatched { .. }
                | Error::UnmatchedFace { .. }
                | Error::OrientationPreserving { .. }
                | Error::EdgeCountMismatch { .. }
                | Error::NonTorusCusp { .. }
                | Error::Point(_)
                | Error::OpenPath(_)
                | Error::Expression { .. }
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
