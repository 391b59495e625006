use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (anti-Hermitian residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("Hermitian eigensolver did not converge after {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("function undefined at eigenvalue {eigenvalue:.17e}")]
    Domain { eigenvalue: f64 },

    #[error("sign undefined: eigenvalue {eigenvalue:.3e} lies inside the gap (threshold {threshold:.3e})")]
    SingularSign { eigenvalue: f64, threshold: f64 },

    #[error("unitary logarithm hits the branch cut: eigenvalue phase {phase:.17e}")]
    BranchCut { phase: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("{which} is not a projection: {property} residual {residual:.3e}")]
    NotAProjection {
        which: &'static str,
        property: &'static str,
        residual: f64,
    },

    #[error("operator norm {norm:.17e} exceeds 1")]
    NotAContraction { norm: f64 },

    #[error("generic part is trivial")]
    EmptyGenericPart,

    #[error("eigenvalue {eigenvalue:.3e} is too close to a classification threshold")]
    BorderlineSpectrum { eigenvalue: f64 },

    #[error("generic part certification failed: {0}")]
    GenericCertification(String),

    #[error("principal angle {angle:.17e} is degenerate")]
    DegenerateAngle { angle: f64 },

    #[error("symmetry does not anti-commute with A0 (residual {residual:.3e})")]
    AnticommutationViolated { residual: f64 },

    #[error("subspace is not co-diagonal for A0 (residual {residual:.3e})")]
    NotCodiagonal { residual: f64 },

    #[error("operator is not in the commutant of A0 (residual {residual:.3e})")]
    NotInCommutant { residual: f64 },

    #[error("pairs have different differences (residual {residual:.3e})")]
    MismatchedDifference { residual: f64 },

    #[error("closed-range report is inconsistent: {0}")]
    InconsistentReport(String),

    #[error("block does not commute with the angle operator (residual {residual:.3e})")]
    NotCommutingWithGamma { residual: f64 },

    #[error("operator is not horizontal (residual {residual:.3e})")]
    NotHorizontal { residual: f64 },

    #[error("minimality certificate failed: |Z| = {z_norm:.17e} > |Z + D| = {perturbed_norm:.17e}")]
    CertificateFailed { z_norm: f64, perturbed_norm: f64 },

    #[error("spectrum has a repeated eigenvalue near {eigenvalue:.3e}")]
    DegenerateSpectrum { eigenvalue: f64 },

    #[error("Gram matrix is ill-conditioned (condition number {condition:.3e})")]
    IllConditionedGram { condition: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {eigenvalue:.3e})")]
    NotPositive { eigenvalue: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
