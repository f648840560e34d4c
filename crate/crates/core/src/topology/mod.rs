//! Hopf invariant of the pseudo-spin field on the `(k1, k2, alpha)` torus.

pub mod chern;
pub mod gauge;
pub mod grid;
pub mod linking;
pub mod preimage;
pub mod summary;
pub mod texture;

pub use chern::chern_number;
pub use gauge::{curl_residual, gauge_field, hopf_invariant};
pub use grid::{chern_slices, current_field, pseudospin_grid, slice_fluxes, PseudoSpinGrid, VectorFieldGrid};
pub use linking::{family_linking, linking_number, Linking};
pub use preimage::{preimage_curves, Pole, PreimageCurve};
pub use summary::{analyze_drive, analyze_field, TopologyAnalysis, TopologySummary};
pub use texture::{hopf_texture, hopf_texture_grid};
