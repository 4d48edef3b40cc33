use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unknown variable `{name}` at {line}:{col}")]
    UnknownVariable { name: String, line: usize, col: usize },

    #[error("domain error in {op} at point {point:?}")]
    Domain { op: &'static str, point: Vec<f64> },

    #[error("sampling exhausted on chart `{chart}`: guard rejected every redraw")]
    SamplingExhausted { chart: String },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("chart mismatch: expected `{expected}`, found `{found}`")]
    ChartMismatch { expected: String, found: String },

    #[error("tensor kind mismatch: {0}")]
    KindMismatch(String),

    #[error("degree overflow: degree {degree} exceeds dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },

    #[error("degree underflow: operator needs degree >= {needed}")]
    DegreeUnderflow { needed: usize },

    #[error("two-form is singular at {point:?}")]
    SingularForm { point: Vec<f64> },

    #[error("one-form is not contact at {point:?}")]
    NotContact { point: Vec<f64> },

    #[error("structure does not project along the map at {point:?} (residual {residual:e})")]
    NotProjectable { point: Vec<f64>, residual: f64 },

    #[error("elements are not composable (residual {residual:e})")]
    NotComposable { residual: f64 },

    #[error("rank deficiency: expected rank {expected}, found {found}")]
    RankDeficiency { expected: usize, found: usize },

    #[error("vector is not in the algebroid fiber at {point:?} (residual {residual:e})")]
    NotInFiber { point: Vec<f64>, residual: f64 },

    #[error("one-form is not basic for the source map (residual {residual:e})")]
    BasicnessViolation { residual: f64 },

    #[error("pair is not a locally conformal symplectic structure")]
    NotLcs,

    #[error("definition error: {0}")]
    Definition(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
