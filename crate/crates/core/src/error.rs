use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curvature symmetries violated: {0}")]
    SymmetryViolation(String),
    #[error("frame is not orthonormal (residual {residual:e})")]
    NonOrthonormalFrame { residual: f64 },
    #[error("Ricci spectrum from B-blocks disagrees with direct spectrum (deviation {deviation:e}); matching sign pattern: {matched:?}")]
    ConventionMismatch {
        deviation: f64,
        matched: Option<[i8; 3]>,
    },
    #[error("unknown catalog metric `{0}`")]
    UnknownName(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("point {point:?} lies outside the chart domain")]
    OutOfDomain { point: Vec<f64> },
    #[error("metric is singular or not positive definite at {point:?}")]
    SingularMetric { point: Vec<f64> },
    #[error("chart has no potential function")]
    MissingPotential,
    #[error("chart is not a steady soliton (rho = {0})")]
    NotSteady(f64),
    #[error("R + |grad f|^2 is not constant (spread {spread:e})")]
    NonConstantEnergy { spread: f64 },
    #[error("shooting failed: {0}")]
    ShootingFailed(String),
    #[error("integration step failure: {0}")]
    StepFailure(String),
    #[error("rejection budget of {budget} draws exceeded for constraints {constraints}")]
    RejectionBudgetExceeded { budget: usize, constraints: String },
    #[error("unknown campaign `{0}`")]
    UnknownCampaign(String),
    #[error("campaign `{campaign}` requires constraints {required}")]
    ConstraintMismatch { campaign: String, required: String },
}
