//! Simulation and image formation for a side-looking polarimetric FMCW
//! synthetic aperture radar mounted on a ground vehicle.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! 1. **Echo simulation** ([`sim`]): dechirped complex baseband data cubes
//!    from point-scatterer scenes along a vehicle track, with TDM H/V
//!    transmit multiplexing, optional residual video phase, and seeded noise.
//! 2. **Image formation** ([`focus`]): the range migration (omega-k)
//!    algorithm — crossrange Fourier transform, reference-range matched
//!    filter, Stolt interpolation, and 2-D inverse transform.
//! 3. **Oracle** ([`backproject`]): an independent time-domain backprojection
//!    focuser used to validate the frequency-domain chain, including on
//!    nonuniform tracks the RMA cannot accept.
//! 4. **Trajectory analysis** ([`trajectory`]): constant-velocity fits of
//!    GNSS logs, along/cross-track error statistics, synthetic wobbled tracks.
//! 5. **Polarimetry** ([`polarimetry`]): TDM demultiplexing, quad-pol image
//!    formation, corner-reflector radiometric calibration, width measurement.
//! 6. **File formats** ([`formats`]): bit-exact binary cube/image/stats
//!    formats plus 8-bit raster export.
//!
//! Data-parallel inner loops (pulse simulation, Stolt columns, backprojection
//! pixels, batched FFT lanes) run on rayon when the default `parallel`
//! feature is enabled; with `--no-default-features` everything falls back to
//! the sequential implementations, which are also exported as `*_seq`
//! functions for benchmarking.

pub mod backproject;
mod fft;
pub mod focus;
pub mod formats;
pub mod image;
pub mod model;
pub mod polarimetry;
pub mod sim;
pub mod trajectory;

pub use image::{PolLabel, SarImage};
pub use model::{AntennaParams, PointScatterer, Pol, ScatteringMatrix, WaveformParams};
pub use sim::{DataCube, NoiseSpec, Scene, Track};

/// Speed of light in vacuum (m/s), exact SI value.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
