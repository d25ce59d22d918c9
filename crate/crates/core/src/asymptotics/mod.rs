//! Expansion coefficients at infinity: fits, flux formulas for `d`, and
//! the decay and symmetry checks built on them.

mod checks;
mod coeffs;
mod fit;
mod flux;

pub use checks::{
    linearization_check, q_consistency, radiality_check, remainder_at, remainder_check, symmetry_check, DecayReport,
    RadialityReport, SymmetryReport,
};
pub use coeffs::{CoeffErrors, ExpansionCoeffs};
pub use fit::{fit_a, fit_beta_gamma_d, fit_d1_d2, fit_expansion, CoeffDeviation, FitOptions};
pub use flux::{
    contour_integrals, evaluate, flux_d, flux_independence, quadrature_selftests, ContourIntegrals, FluxEntry,
    FluxReport, FormulaId, Normal, QuadratureSelfTest,
};
