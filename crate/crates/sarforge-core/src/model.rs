//! Radar parameter and geometry types plus the closed-form system
//! calculators: resolutions, sampling bounds, wavenumber axes, and range
//! histories.
//!
//! Conventions used throughout the crate:
//!
//! - The platform drives along the x axis (crossrange); targets sit at
//!   `y > 0` (downrange) in a flat 2-D world frame.
//! - Fast time `t` is symmetric about the chirp center,
//!   `t ∈ [-tau_pd/2, +tau_pd/2]`, sampled at `n_fast` points with both
//!   endpoints included.
//! - The round-trip wavenumber is `k_r = (4*pi/c) * (f0 + K*t)` with chirp
//!   rate `K = beta / tau_pd`.

use std::fmt;

use num_complex::Complex64;

use crate::SPEED_OF_LIGHT;

/// Errors raised while validating model parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// A parameter that must be strictly positive was not.
    NonPositive { name: &'static str, value: f64 },
    /// A beamwidth outside (0, pi).
    BadBeamwidth { name: &'static str, value: f64 },
    /// A non-finite input.
    NotFinite { name: &'static str },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NonPositive { name, value } => {
                write!(f, "{name} must be > 0, got {value}")
            }
            ModelError::BadBeamwidth { name, value } => {
                write!(f, "{name} must lie in (0, pi) rad, got {value}")
            }
            ModelError::NotFinite { name } => write!(f, "{name} must be finite"),
        }
    }
}

impl std::error::Error for ModelError {}

fn require_positive(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if !value.is_finite() {
        return Err(ModelError::NotFinite { name });
    }
    if value <= 0.0 {
        return Err(ModelError::NonPositive { name, value });
    }
    Ok(value)
}

/// Transmit polarization of a pulse. Index 0 = H, 1 = V everywhere a
/// scattering matrix is indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    /// Row/column index into a [`ScatteringMatrix`].
    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }

    /// Receive-channel index in a data cube. The channel order is fixed:
    /// channel 0 carries the V-polarized receiver, channel 1 the H-polarized
    /// receiver.
    pub fn rx_channel(self) -> usize {
        match self {
            Pol::H => 1,
            Pol::V => 0,
        }
    }

    /// Inverse of [`Pol::rx_channel`].
    pub fn from_rx_channel(chan: usize) -> Pol {
        match chan {
            0 => Pol::V,
            1 => Pol::H,
            _ => panic!("receive channel index must be 0 or 1, got {chan}"),
        }
    }
}

impl fmt::Display for Pol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pol::H => write!(f, "H"),
            Pol::V => write!(f, "V"),
        }
    }
}

/// FMCW waveform parameters.
///
/// `f_p` is the *effective* pulse repetition frequency; it may be far below
/// `1/tau_pd` when the acquisition host rate-limits the chirps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformParams {
    /// Carrier frequency (Hz).
    pub f0: f64,
    /// Sweep bandwidth (Hz).
    pub beta: f64,
    /// Chirp duration (s).
    pub tau_pd: f64,
    /// Effective pulse repetition frequency (Hz).
    pub f_p: f64,
    /// ADC sampling rate (samples/s).
    pub f_s: f64,
}

impl WaveformParams {
    pub fn new(f0: f64, beta: f64, tau_pd: f64, f_p: f64, f_s: f64) -> Result<Self, ModelError> {
        require_positive("f0", f0)?;
        require_positive("beta", beta)?;
        require_positive("tau_pd", tau_pd)?;
        require_positive("f_p", f_p)?;
        require_positive("f_s", f_s)?;
        Ok(Self {
            f0,
            beta,
            tau_pd,
            f_p,
            f_s,
        })
    }

    /// Chirp rate `K = beta / tau_pd` (Hz/s).
    pub fn chirp_rate(&self) -> f64 {
        self.beta / self.tau_pd
    }

    /// Carrier wavelength (m).
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f0
    }

    /// Number of fast-time samples per pulse, `round(f_s * tau_pd)`.
    pub fn n_fast(&self) -> usize {
        (self.f_s * self.tau_pd).round() as usize
    }

    /// Downrange resolution `c / (2 beta)` (m).
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.beta)
    }

    /// Maximum unambiguous range `c f_s tau_pd / (4 beta)` (m); the range at
    /// which the dechirped beat frequency reaches the ADC Nyquist rate.
    pub fn max_unambiguous_range(&self) -> f64 {
        SPEED_OF_LIGHT * self.f_s * self.tau_pd / (4.0 * self.beta)
    }

    /// Dechirped beat frequency `2 R K / c` (Hz) of a scatterer at range `r`.
    pub fn beat_frequency(&self, r: f64) -> f64 {
        2.0 * r * self.chirp_rate() / SPEED_OF_LIGHT
    }

    /// Residual video phase `K (4 pi / c^2) R^2` (rad) left by dechirping a
    /// scatterer at range `r`.
    pub fn rvp_phase(&self, r: f64) -> f64 {
        self.chirp_rate() * 4.0 * std::f64::consts::PI / (SPEED_OF_LIGHT * SPEED_OF_LIGHT) * r * r
    }

    /// `n_fast` uniformly spaced round-trip wavenumbers
    /// `k_r = (4 pi / c)(f0 + K t)` over `t ∈ [-tau_pd/2, +tau_pd/2]`, both
    /// endpoints included, so the span is exactly `4 pi beta / c`.
    pub fn wavenumber_axis(&self, n_fast: usize) -> Vec<f64> {
        assert!(n_fast >= 2, "wavenumber axis needs at least 2 samples");
        let scale = 4.0 * std::f64::consts::PI / SPEED_OF_LIGHT;
        let lo = scale * (self.f0 - self.beta / 2.0);
        let hi = scale * (self.f0 + self.beta / 2.0);
        let step = (hi - lo) / (n_fast - 1) as f64;
        (0..n_fast).map(|i| lo + step * i as f64).collect()
    }

    /// Fast-time sample instants matching [`WaveformParams::wavenumber_axis`]:
    /// `n_fast` points over `[-tau_pd/2, +tau_pd/2]`, endpoints included.
    pub fn fast_time_axis(&self, n_fast: usize) -> Vec<f64> {
        assert!(n_fast >= 2, "fast-time axis needs at least 2 samples");
        let step = self.tau_pd / (n_fast - 1) as f64;
        (0..n_fast)
            .map(|i| -self.tau_pd / 2.0 + step * i as f64)
            .collect()
    }
}

impl Default for WaveformParams {
    /// C-band vehicle-mounted profile: 5.9 GHz carrier, 200 MHz sweep, 1 ms
    /// chirps, 75 Hz effective PRF, 100 kSps ADC.
    fn default() -> Self {
        Self {
            f0: 5.9e9,
            beta: 200.0e6,
            tau_pd: 1.0e-3,
            f_p: 75.0,
            f_s: 100.0e3,
        }
    }
}

/// Antenna gains and beamwidths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaParams {
    /// Transmit gain (dBi).
    pub gain_tx_dbi: f64,
    /// Receive gain (dBi).
    pub gain_rx_dbi: f64,
    /// Transmit half-power beamwidth (rad).
    pub theta3db_tx: f64,
    /// Receive half-power beamwidth (rad).
    pub theta3db_rx: f64,
    /// Rayleigh (peak-to-null) beamwidth used for the spatial sampling bound
    /// (rad).
    pub theta_r: f64,
    /// True when `theta_r` was not supplied and defaulted to
    /// `theta3db_tx / 2`; surfaced in output metadata.
    pub theta_r_defaulted: bool,
}

impl AntennaParams {
    pub fn new(
        gain_tx_dbi: f64,
        gain_rx_dbi: f64,
        theta3db_tx: f64,
        theta3db_rx: f64,
        theta_r: Option<f64>,
    ) -> Result<Self, ModelError> {
        for (name, value) in [("theta3db_tx", theta3db_tx), ("theta3db_rx", theta3db_rx)] {
            if !(value > 0.0 && value < std::f64::consts::PI) {
                return Err(ModelError::BadBeamwidth { name, value });
            }
        }
        if let Some(tr) = theta_r {
            if !(tr > 0.0 && tr < std::f64::consts::PI) {
                return Err(ModelError::BadBeamwidth {
                    name: "theta_r",
                    value: tr,
                });
            }
        }
        Ok(Self {
            gain_tx_dbi,
            gain_rx_dbi,
            theta3db_tx,
            theta3db_rx,
            theta_r: theta_r.unwrap_or(theta3db_tx / 2.0),
            theta_r_defaulted: theta_r.is_none(),
        })
    }
}

impl Default for AntennaParams {
    /// 13.2 dBi / 40 deg transmit, 9.5 dBi / 65 deg receive, 20 deg Rayleigh
    /// beamwidth.
    fn default() -> Self {
        Self {
            gain_tx_dbi: 13.2,
            gain_rx_dbi: 9.5,
            theta3db_tx: 40f64.to_radians(),
            theta3db_rx: 65f64.to_radians(),
            theta_r: 20f64.to_radians(),
            theta_r_defaulted: false,
        }
    }
}

/// 2x2 complex scattering matrix indexed `[tx][rx]` with H = 0, V = 1, i.e.
/// laid out as `[[HH, HV], [VH, VV]]`. The convention is locked by unit test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMatrix(pub [[Complex64; 2]; 2]);

impl ScatteringMatrix {
    pub fn new(hh: Complex64, hv: Complex64, vh: Complex64, vv: Complex64) -> Self {
        Self([[hh, hv], [vh, vv]])
    }

    /// Identity response: unit co-pol, zero cross-pol.
    pub fn identity() -> Self {
        Self::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    /// Anti-diagonal response: pure cross-pol coupling.
    pub fn cross() -> Self {
        Self::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
    }

    /// Identity matrix scaled so that `|amplitude|^2` equals the given RCS
    /// in dB relative to 1 m^2.
    pub fn from_rcs_dbsm(rcs_dbsm: f64) -> Self {
        let amp = 10f64.powf(rcs_dbsm / 20.0);
        let a = Complex64::new(amp, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Self::new(a, z, z, a)
    }

    /// Amplitude coupling transmit polarization `tx` into receive
    /// polarization `rx`.
    pub fn coupling(&self, tx: Pol, rx: Pol) -> Complex64 {
        self.0[tx.index()][rx.index()]
    }

    pub fn hh(&self) -> Complex64 {
        self.0[0][0]
    }

    pub fn hv(&self) -> Complex64 {
        self.0[0][1]
    }

    pub fn vh(&self) -> Complex64 {
        self.0[1][0]
    }

    pub fn vv(&self) -> Complex64 {
        self.0[1][1]
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scale(&self, g: Complex64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= g;
            }
        }
        out
    }
}

/// Point target: world position plus polarimetric scattering matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointScatterer {
    /// Crossrange position (m, world frame).
    pub x: f64,
    /// Downrange position (m, world frame); must be positive, targets sit on
    /// one side of the track.
    pub y: f64,
    /// Polarimetric scattering matrix.
    pub s: ScatteringMatrix,
}

impl PointScatterer {
    pub fn new(x: f64, y: f64, s: ScatteringMatrix) -> Result<Self, ModelError> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(ModelError::NotFinite { name: "position" });
        }
        if y <= 0.0 {
            return Err(ModelError::NonPositive {
                name: "y (downrange)",
                value: y,
            });
        }
        if !s.is_finite() {
            return Err(ModelError::NotFinite {
                name: "scattering matrix",
            });
        }
        Ok(Self { x, y, s })
    }

    /// Unit-amplitude co-polarized scatterer (identity matrix).
    pub fn unit(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            s: ScatteringMatrix::identity(),
        }
    }
}

/// Platform state under the stop-and-go model: the platform is quasi-static
/// during each pulse and advances `v / f_p` between pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformState {
    /// Along-track position of this pulse (m).
    pub x: f64,
    /// Platform speed (m/s).
    pub v: f64,
    /// Pulse index.
    pub pulse: usize,
}

impl PlatformState {
    /// Position of pulse `n` at constant speed: `x_n = n * v / f_p`.
    pub fn at_pulse(n: usize, v: f64, f_p: f64) -> Self {
        Self {
            x: n as f64 * v / f_p,
            v,
            pulse: n,
        }
    }
}

/// Slant range from platform position `x_n` to the target:
/// `R = sqrt(y^2 + (x - x_n)^2)`. Minimized at broadside (`x_n = x`), where
/// it equals the range of closest approach `y`.
pub fn range_history(target: &PointScatterer, x_n: f64) -> f64 {
    let dx = target.x - x_n;
    (target.y * target.y + dx * dx).sqrt()
}

/// Crossrange resolution `lambda / (2 theta_3db)` (m) for an antenna with
/// the given azimuth half-power beamwidth.
pub fn crossrange_resolution(f0: f64, theta3db: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / f0;
    lambda / (2.0 * theta3db)
}

/// Minimum PRF `4 v sin(theta_r) / lambda` (Hz) that samples the broadside
/// Doppler at least twice per cycle. Strict bound: callers must exceed it.
pub fn min_prf(v: f64, f0: f64, theta_r: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / f0;
    4.0 * v * theta_r.sin() / lambda
}

/// Maximum along-track sampling interval `lambda / (4 sin(theta_r))` (m).
/// Strict bound: callers must stay below it.
pub fn max_spatial_step(f0: f64, theta_r: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / f0;
    lambda / (4.0 * theta_r.sin())
}
