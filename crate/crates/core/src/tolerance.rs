/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Physicality checks (trace preservation, CP, unitarity).
    pub physical: f64,
    /// Pure algebraic identities.
    pub algebra: f64,
    /// Hermiticity and unit trace of states and observables.
    pub state: f64,
    /// Eigenvalue floor accepted as positive semidefinite.
    pub psd_floor: f64,
    /// Completeness of Kraus lists.
    pub kraus: f64,
    /// Primal feasibility of linear programs.
    pub lp_feasibility: f64,
    /// Largest imaginary part tolerated in an expectation value.
    pub imaginary: f64,
    /// Normalization of quasi-probability coefficients.
    pub normalization: f64,
}

pub const TOL: Tolerances = Tolerances {
    physical: 1e-9,
    algebra: 1e-12,
    state: 1e-10,
    psd_floor: 1e-9,
    kraus: 1e-8,
    lp_feasibility: 1e-8,
    imaginary: 1e-9,
    normalization: 1e-8,
};

impl Default for Tolerances {
    fn default() -> Self {
        TOL
    }
}
