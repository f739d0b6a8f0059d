use thiserror::Error;

/// Errors produced by measure construction and the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("weight vector {index} has length {got}, expected base^dimension = {expected}")]
    WeightLength {
        index: usize,
        got: usize,
        expected: usize,
    },

    #[error("weight vector {index} sums to {sum}, expected 1 within 1e-12")]
    WeightSum { index: usize, sum: f64 },

    #[error("weight vector {index} contains non-positive entry {value} (pass degenerate=true to allow zeros)")]
    WeightRange { index: usize, value: f64 },

    #[error("grid has {boxes} boxes at level {level}; the dense representation is capped at {cap}")]
    GridTooLarge {
        level: usize,
        boxes: u128,
        cap: u64,
    },

    #[error("invalid grid parameters: base {base}, dimension {dimension}")]
    BadGrid { base: u32, dimension: u32 },

    #[error("no sample points given")]
    EmptySamples,

    #[error("sample point {index} has {got} coordinates, expected {expected}")]
    SampleDimension {
        index: usize,
        got: usize,
        expected: usize,
    },

    #[error("sample coordinate {value} lies outside [0, 1]")]
    SampleOutOfRange { value: f64 },

    #[error("level {level} exceeds the tree's maximum level {max_level}")]
    LevelOutOfRange { level: usize, max_level: usize },

    #[error("invalid digit path: {reason}")]
    BadPath { reason: String },

    #[error("window {lo}..={hi} is invalid: {reason}")]
    BadWindow { lo: usize, hi: usize, reason: String },

    #[error("measure trees do not share grid parameters (base, dimension, max level)")]
    MismatchedGrids,

    #[error("q vector has length {got}, expected {expected}")]
    QLength { got: usize, expected: usize },

    #[error("joint support is empty at level {level}")]
    EmptyJointSupport { level: usize },

    #[error("partition sum is not strictly decreasing in t at level {level}: a gauge mass on the joint support is >= 1")]
    NotMonotone { level: usize },

    #[error("root not bracketed within |t| <= {cap}")]
    Unbracketed { cap: f64 },

    #[error("transfer sum has a zero weight raised to non-positive exponent {exponent}")]
    ZeroWeightPower { exponent: f64 },

    #[error("cascade weights must be strictly positive for oracle evaluation")]
    DegenerateWeights,

    #[error("zero mass on the requested path at level {level}")]
    ZeroMassOnPath { level: usize },

    #[error("degenerate gauge: every gauge mass equals 1, relative dimensions are undefined")]
    DegenerateGauge,

    #[error("invalid measure tree: {0}")]
    InvalidTree(String),

    #[error("empty table")]
    EmptyTable,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {reason}")]
    Parse { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
