use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian (max |H - H^dagger| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary (max |U^dagger U - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("Hermitian eigendecomposition did not converge")]
    ConvergenceFailure,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0}")]
    Domain(String),

    #[error("invalid site index: {0}")]
    Index(String),

    #[error("operators violate the eigengate commutator condition (defect {defect:e})")]
    Admissibility { defect: f64 },

    #[error("extremal energy state is degenerate")]
    DegenerateExtremum,

    #[error("drive {label} does not couple the transition (|matrix element| = {magnitude:e})")]
    ZeroCoupling { label: String, magnitude: f64 },

    #[error("propagator did not converge: halving dt from {step:e} still moved entries by {change:e}")]
    StepTooCoarse { step: f64, change: f64 },

    #[error("off-resonant error formula requires nonzero detuning")]
    DivergentCase,

    #[error("phase trace requires resonant driving (detuning = {detuning:e})")]
    OffResonant { detuning: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

impl Error {
    /// Numerical failures as opposed to bad inputs; the CLI maps these to a
    /// distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::NotUnitary { .. }
                | Error::NonFinite
                | Error::ConvergenceFailure
                | Error::StepTooCoarse { .. }
        )
    }
}
