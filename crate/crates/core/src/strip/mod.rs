//! Open-boundary strips: quasienergy spectra, edge modes and their localization.

pub mod edge;
pub mod hamiltonian;
pub mod propagate;
pub mod spectrum;

pub use edge::{
    chirality, edge_modes, edge_profile, fit_localization_length, localization_length, localization_profiles, EdgeMode,
    EdgeProfile, GapCenter, Side, EDGE_THRESHOLD, GAP_WINDOW,
};
pub use hamiltonian::{build_strip_flat, build_strip_static, flatten_strip, FlatBand, StripHamiltonian};
pub use propagate::{alpha_flatness_check, strip_period_unitary, StripControl, StripDrive};
pub use spectrum::{
    edge_weights, k2_grid, quasienergy_spectrum, strip_eigenstates, SpectrumRow, SpectrumTable, StripOptions,
    StripState, DEFAULT_K2_POINTS, DEFAULT_STRIP_SITES,
};
