//! Direct sampling method (DSM) for locating small electromagnetic anomalies
//! from scattered-field S-parameters measured on a circular antenna array.
//!
//! The crate is organised bottom-up:
//!
//! * [`special_fn`]: integer-order Bessel functions, `H0^(2)` and the
//!   truncated Jacobi-Anger expansion.
//! * [`em`]: media, wavenumber, contrast, antenna geometry and incident fields.
//! * [`forward`]: Born-approximated S-parameter synthesis and noise.
//! * [`dsm`]: the normalized indicator map, the Bessel-series structure
//!   function and peak extraction.
//! * [`grid`] and [`io`]: the search grid, scenario files and map output.

pub mod dsm;
pub mod em;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod special_fn;

pub use dsm::{analytic_phi_map, indicator_map, inner_product_gamma, peak_extract, IndicatorMap, MapKind, Peak};
pub use em::{
    contrast, incident_field, wavenumber, Anomaly, AntennaArray, ContrastMode, FieldMode, MediumParams, Wavenumber,
};
pub use error::{DsmError, Result};
pub use forward::{add_noise, synth_extended, synth_point, SParamSet, Scenario, ScenarioOptions, SearchDomain};
pub use geometry::Point2;
pub use grid::{build_disk_grid, DiskGrid};
