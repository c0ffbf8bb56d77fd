use thiserror::Error;

/// Errors surfaced by the numerical modules.
#[derive(Error, Debug)]
pub enum Error {
    #[error("spectral measure bound violated at theta = {theta:?}: a = {value}, required {lambda_min} <= a <= {lambda_max}")]
    MeasureBound {
        theta: crate::Point,
        value: f64,
        lambda_min: f64,
        lambda_max: f64,
    },

    #[error("invalid parameter {name}: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("field evaluation produced a non-finite value at {point:?}")]
    NonFiniteField { point: crate::Point },

    #[error("growth envelope violated at {point:?}: |u| = {value} exceeds {bound}")]
    EnvelopeViolated {
        point: crate::Point,
        value: f64,
        bound: f64,
    },

    #[error("far-field tail does not converge (growth exponent {exponent} >= 2s = {two_s})")]
    NonconvergentTail { exponent: f64, two_s: f64 },

    #[error("near-field contributions do not decay; the field is rougher than its smoothness hint at this point")]
    DivergentNearField,

    #[error("quadrature tolerance {tol} not reached within node budget (achieved {achieved})")]
    ToleranceNotReached { tol: f64, achieved: f64 },

    #[error("point {point:?} outside the domain chart (radius {chart_radius})")]
    OutsideChart {
        point: crate::Point,
        chart_radius: f64,
    },

    #[error("exponent gamma = {gamma} <= -1: integral diverges")]
    DivergentExponent { gamma: f64 },

    #[error("gamma = beta = {gamma}: logarithmic case refused")]
    LogarithmicCase { gamma: f64 },

    #[error("no admissible cone aperture on the search grid (domain too rough at this scale)")]
    NoAdmissibleCone,

    #[error("regularized distance check failed: {msg} (worst point {point:?})")]
    RegularizedDistance { msg: String, point: crate::Point },

    #[error("no passing value on the search grid for {name}")]
    SearchExhausted { name: &'static str },

    #[error("monotone-scheme check failed at node {node}: {msg}")]
    Monotonicity { node: usize, msg: String },

    #[error("linear system is singular or too ill-conditioned (residual {residual})")]
    SingularSystem { residual: f64 },

    #[error("sample cloud is empty or below minimum size")]
    EmptyCloud,

    #[error("denominator field is not positive on the sample cloud (min {min})")]
    NonpositiveDenominator { min: f64 },

    #[error("parse error at {location}: {msg}")]
    Parse { location: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            msg: msg.into(),
        }
    }
}
