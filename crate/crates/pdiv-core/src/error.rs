use thiserror::Error;

/// Errors produced by constructors and operations in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("axis {axis} out of range 1..={order}")]
    AxisOutOfRange { axis: usize, order: usize },

    #[error("axes must be strictly time-ordered: {earlier} is not earlier than {later}")]
    AxesNotOrdered { earlier: usize, later: usize },

    #[error("future and past axis sets overlap at axis {axis}")]
    OverlappingAxes { axis: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("entry {index} is {value}, below the non-negativity tolerance")]
    NegativeEntry { index: usize, value: f64 },

    #[error("entries sum to {sum}, not 1 within tolerance")]
    NotNormalized { sum: f64 },

    #[error("column {column} sums to {sum}, not 1 within tolerance")]
    ColumnNotNormalized { column: usize, sum: f64 },

    #[error("parameter {name} is {value}, outside [0, 1]")]
    OutOfUnitInterval { name: &'static str, value: f64 },

    #[error("{what} must be positive")]
    EmptyInput { what: &'static str },

    #[error("population must be a finite non-negative number, got {value}")]
    InvalidPopulation { value: f64 },

    #[error("tensor order {order} is too small, need at least {needed}")]
    OrderTooSmall { order: usize, needed: usize },

    #[error("unsupported order {order}, supported orders are {supported}")]
    UnsupportedOrder { order: usize, supported: &'static str },

    #[error("family orders must run 1..=M without gaps, member {index} has order {got}")]
    FamilyOrderGap { index: usize, got: usize },

    #[error("transition matrix column {column} is undefined (conditioning event has probability 0)")]
    UndefinedColumn { column: usize },

    #[error("memory matrix for history {history:?} is required but undefined at column {column}")]
    MissingKernel { history: Vec<usize>, column: usize },

    #[error("initial vector puts mass {mass} on state {state}, which the base block cannot reach")]
    UnreachableInitial { state: usize, mass: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
