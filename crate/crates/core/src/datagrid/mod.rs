//! Scenario and sub-band axes, the 4-D transmittance and path-loss tensors,
//! and grid file I/O.

mod axes;
mod csv;
mod grid;

pub(crate) use axes::FREQ_EPS;
pub use axes::{
    builtin_band, builtin_bands, builtin_scenario, theta_grid, ScenarioSpec, SubBand, BUILTIN_BANDS, BUILTIN_SCENARIOS,
    DEFAULT_STEP_THZ,
};
pub use csv::{
    ingest_external, ingest_external_from, read_grid, read_grid_filtered, read_grid_from, write_grid, write_grid_to,
    GridFilter, GRID_HEADER, GRID_MAGIC,
};
pub use grid::{absorption_db, fspl_db, path_loss_grid, GridAxes, PathLossGrid, TransmittanceGrid, SPEED_OF_LIGHT};
