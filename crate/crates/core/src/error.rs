use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid graph: {}", format_violations(.0))]
    Graph(Vec<crate::graph::GraphViolation>),

    #[error("structure violation: {0}")]
    Structure(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("evaluation point {point} is within {distance:e} of the pole {pole}")]
    NearPole {
        point: Complex64,
        pole: Complex64,
        distance: f64,
    },

    #[error("singular Sylvester operator: eigenvalue sum {sum} is numerically zero")]
    SingularSylvester { sum: Complex64 },

    #[error("pair is not stabilizable: uncontrollable mode at {eigenvalue}")]
    Unstabilizable { eigenvalue: Complex64 },

    #[error("marginal spectrum: spectral abscissa {abscissa:e} is inside the Hurwitz margin")]
    Marginal { abscissa: f64 },

    #[error("feedback loop is ill-posed: smallest singular value {sigma_min:e}")]
    IllPosed { sigma_min: f64 },

    #[error("synthesis failed: {0}")]
    Synthesis(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

fn format_violations(v: &[crate::graph::GraphViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
