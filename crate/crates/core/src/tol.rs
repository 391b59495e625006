use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every operation.
///
/// Both are relative: `rank_tol · ‖M‖` decides numerical nullspaces and
/// `gap_tol · ‖M‖` the spectral gap required by the sign function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub gap_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            gap_tol: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn new(rank_tol: f64, gap_tol: f64) -> Self {
        Self { rank_tol, gap_tol }
    }
}
