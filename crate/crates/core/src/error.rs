use thiserror::Error;

/// Errors produced by dataset handling, model fitting and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv parse error: {0}")]
    Csv(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("cell at row {row}, column {column:?} is not a finite number: {value:?}")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),

    #[error("column name must be nonempty")]
    EmptyColumnName,

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("column {0:?} is constant; correlation is undefined")]
    ConstantColumn(String),

    #[error("empty vector")]
    EmptyVector,

    #[error("input vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("test fraction {0} out of range (0, 1)")]
    BadFraction(f64),

    #[error("split leaves {0} training rows; at least 2 required")]
    TrainTooSmall(usize),

    #[error("synthetic dataset needs at least 10 rows, got {0}")]
    TooFewRows(usize),

    #[error("value at index {index} is not positive after shift ({value})")]
    NonPositive { index: usize, value: f64 },

    #[error("no informative lambda: input is constant")]
    NoInformativeLambda,

    #[error("inverse transform domain violation at index {index} for lambda {lambda}")]
    InverseDomain { index: usize, lambda: f64 },

    #[error("design matrix is rank deficient: column {0:?} is linearly dependent")]
    RankDeficient(String),

    #[error("not enough observations: n = {n} with {k} predictors")]
    TooFewObservations { n: usize, k: usize },

    #[error("model terms {0:?} are not nested in the reference model")]
    NotNested(Vec<String>),

    #[error("leverage is 1 at row {0}; PRESS is undefined")]
    LeverageOne(usize),

    #[error("response {0:?} appears among the candidate terms")]
    ResponseInCandidates(String),

    #[error("fold {fold} has {size} rows, too few to fit the model")]
    FoldTooSmall { fold: usize, size: usize },

    #[error("alpha {0} out of range (0, 1]")]
    BadAlpha(f64),

    #[error("need at least {need} folds/rows, got {got}")]
    BadFolds { need: usize, got: usize },

    #[error("empty training data")]
    EmptyTrainingData,

    #[error("feature vector has {got} values, model expects {expected}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("non-finite feature value at index {0}")]
    NonFiniteFeature(usize),

    #[error("OOB undefined: forest was trained without bootstrap")]
    OobUndefined,

    #[error("actual value at index {0} is zero; MAPE is undefined")]
    ZeroActual(usize),

    #[error("constant actual values; r-squared is undefined")]
    ConstantActual,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
