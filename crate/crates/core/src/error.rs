use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coin at position {position}{} is not unitary (defect {defect:.3e})", step_suffix(.step))]
    NonUnitaryCoin {
        step: Option<usize>,
        position: i64,
        defect: f64,
    },
    #[error("coin input is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("circuit needs at least one iteration pair")]
    EmptyPairs,
    #[error("POVM needs at least two outcomes, got {0}")]
    TooFewOutcomes(usize),
    #[error("theta = {theta} outside {range}")]
    ThetaOutOfRange { theta: f64, range: &'static str },
    #[error("POVM element {label} is not Hermitian (defect {defect:.3e})")]
    NotHermitian { label: String, defect: f64 },
    #[error("POVM element {label} has negative eigenvalue {eigenvalue:.3e}")]
    NotPositive { label: String, eigenvalue: f64 },
    #[error("POVM element {label} is not rank 1 (eigenvalues {eigenvalues:?})")]
    NotRankOne { label: String, eigenvalues: [f64; 2] },
    #[error("POVM elements do not sum to identity (residual {residual:.3e})")]
    Incomplete { residual: f64 },
    #[error(
        "no outcome ordering admits a peel-off circuit (best ordering failed with a = {max_amplitude})"
    )]
    Infeasible { max_amplitude: f64 },
    #[error("visibility for interferometer {id} is {value}, expected a value in [0, 1]")]
    InvalidVisibility { id: String, value: f64 },
    #[error("detection efficiency at port {port} is {value}, expected a value in (0, 1]")]
    InvalidEfficiency { port: i64, value: f64 },
    #[error("efficiency imbalance {imbalance:.4} exceeds budget {budget:.4}")]
    ImbalanceExceeded { imbalance: f64, budget: f64 },
    #[error("probability at port {port} is negative ({value})")]
    NegativeProbability { port: i64, value: f64 },
    #[error("distribution sums to {sum}, expected 1")]
    Unnormalized { sum: f64 },
    #[error("sample size must be positive")]
    EmptySample,
}

fn step_suffix(step: &Option<usize>) -> String {
    match step {
        Some(s) => format!(" in step {s}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
