//! Dechirped FMCW baseband echo simulation.
//!
//! For a scatterer at range `R(x_n)` the dechirped, quadrature-downconverted
//! sample at fast time `t` is
//!
//! ```text
//! s(x_n, t) = a * exp{-j (4 pi / c)(f0 + K t) R(x_n)}          (baseband)
//!           [ * exp{+j K (4 pi / c^2) R^2(x_n)} ]              (optional RVP)
//! ```
//!
//! with unit-modulus amplitudes by default — propagation loss is deliberately
//! omitted so the imaged response depends on phase only. Pulses along the
//! track are independent; [`simulate_cube`] evaluates them in parallel and
//! assembles the cube in pulse order, so results are identical to the
//! sequential path.
//!
//! Time-domain multiplexing alternates the transmit polarization H, V, H, V
//! between consecutive pulses; the two members of each H/V pair share one
//! along-track position (burst pairing), so a TDM cube holds two pulses per
//! track position and its position vector is non-decreasing rather than
//! strictly increasing.

use std::fmt;

use ndarray::{Array3, ArrayView2};
use num_complex::{Complex32, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::model::{max_spatial_step, range_history, Pol, PointScatterer, WaveformParams};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Errors from scene validation and simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// A scene must contain at least one scatterer.
    EmptyScene,
    /// The reference-reflector index does not point at a scatterer.
    BadReflectorIndex { index: usize, len: usize },
    /// `round(f_s * tau_pd)` left fewer than 2 fast-time samples.
    TooFewFastSamples { n_fast: usize },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::EmptyScene => write!(f, "scene contains no scatterers"),
            SimError::BadReflectorIndex { index, len } => {
                write!(f, "reference reflector index {index} out of range ({len} scatterers)")
            }
            SimError::TooFewFastSamples { n_fast } => {
                write!(f, "waveform yields {n_fast} fast-time samples, need at least 2")
            }
        }
    }
}

impl std::error::Error for SimError {}

/// Calibration reference: one scatterer in the scene designated as a corner
/// reflector of known radar cross section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceReflector {
    /// Index into [`Scene::scatterers`].
    pub index: usize,
    /// RCS in dB relative to 1 m^2.
    pub rcs_dbsm: f64,
}

/// A collection of point scatterers, optionally with a designated
/// calibration reflector.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub scatterers: Vec<PointScatterer>,
    pub reference_reflector: Option<ReferenceReflector>,
}

impl Scene {
    pub fn new(scatterers: Vec<PointScatterer>) -> Self {
        Self {
            scatterers,
            reference_reflector: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.scatterers.is_empty() {
            return Err(SimError::EmptyScene);
        }
        if let Some(r) = self.reference_reflector {
            if r.index >= self.scatterers.len() {
                return Err(SimError::BadReflectorIndex {
                    index: r.index,
                    len: self.scatterers.len(),
                });
            }
        }
        Ok(())
    }

    /// Translate every scatterer by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Scene {
        let mut out = self.clone();
        for s in out.scatterers.iter_mut() {
            s.x += dx;
            s.y += dy;
        }
        out
    }
}

/// Along-track sampling plan: explicit positions or a constant-velocity
/// stop-and-go track `x_n = start + n v / f_p`.
#[derive(Debug, Clone, PartialEq)]
pub enum Track {
    Positions(Vec<f64>),
    Uniform {
        speed: f64,
        n_positions: usize,
        start: f64,
    },
}

impl Track {
    /// Along-track position of every slow-time sample.
    pub fn positions(&self, f_p: f64) -> Vec<f64> {
        match self {
            Track::Positions(p) => p.clone(),
            Track::Uniform {
                speed,
                n_positions,
                start,
            } => (0..*n_positions)
                .map(|n| start + n as f64 * speed / f_p)
                .collect(),
        }
    }
}

/// Optional amplitude model. `Unity` matches the phase-only derivation the
/// focuser is tested against; `InverseSquare` applies a `1/R^2` taper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeTaper {
    #[default]
    Unity,
    InverseSquare,
}

/// Simulation switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Alternate H/V transmit with burst pairing (two pulses per position).
    pub tdm: bool,
    /// Transmit polarization used for every pulse when `tdm` is off.
    pub fixed_tx_pol: Pol,
    /// Keep the residual video phase term from the dechirp.
    pub include_rvp: bool,
    /// Amplitude model.
    pub taper: AmplitudeTaper,
    /// Rayleigh beamwidth for the spacing check; when set, a pulse spacing
    /// above `lambda / (4 sin theta_r)` logs a warning (never an error).
    pub theta_r: Option<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            tdm: false,
            fixed_tx_pol: Pol::H,
            include_rvp: false,
            taper: AmplitudeTaper::Unity,
            theta_r: None,
        }
    }
}

/// Complex baseband data cube: `pulses x fast-time x receive-channel`
/// samples plus per-pulse platform positions and transmit polarizations.
///
/// Channel order is fixed: channel 0 = V receive, channel 1 = H receive.
/// Samples are stored as complex `f32`, matching the on-disk cube format;
/// processing promotes to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCube {
    pub samples: Array3<Complex32>,
    pub pulse_positions: Vec<f64>,
    pub pulse_tx_pol: Vec<Pol>,
    pub params: WaveformParams,
    pub rvp_present: bool,
    pub tdm: bool,
}

impl DataCube {
    pub const N_CHANNELS: usize = 2;

    pub fn n_pulses(&self) -> usize {
        self.samples.shape()[0]
    }

    pub fn n_fast(&self) -> usize {
        self.samples.shape()[1]
    }

    /// One receive channel as a `pulses x fast-time` view.
    pub fn channel(&self, chan: usize) -> ArrayView2<'_, Complex32> {
        self.samples.index_axis(ndarray::Axis(2), chan)
    }

    /// One receive channel promoted to f64 for processing.
    pub fn channel_f64(&self, chan: usize) -> ndarray::Array2<Complex64> {
        self.channel(chan)
            .mapv(|v| Complex64::new(v.re as f64, v.im as f64))
    }

    /// Total sample energy, accumulated in f64.
    pub fn energy(&self) -> f64 {
        self.samples
            .iter()
            .map(|v| v.re as f64 * v.re as f64 + v.im as f64 * v.im as f64)
            .sum()
    }

    /// Fast-time sample instants (symmetric, endpoints included).
    pub fn fast_time_axis(&self) -> Vec<f64> {
        self.params.fast_time_axis(self.n_fast())
    }

    /// Round-trip wavenumber of every fast-time sample.
    pub fn wavenumber_axis(&self) -> Vec<f64> {
        self.params.wavenumber_axis(self.n_fast())
    }
}

fn pulse_samples(
    scene: &Scene,
    x_n: f64,
    tx_pol: Pol,
    w: &WaveformParams,
    n_fast: usize,
    include_rvp: bool,
    taper: AmplitudeTaper,
) -> [Vec<Complex64>; 2] {
    let kr = w.wavenumber_axis(n_fast);
    let mut chans = [
        vec![Complex64::default(); n_fast],
        vec![Complex64::default(); n_fast],
    ];
    for sc in &scene.scatterers {
        let a_v = sc.s.coupling(tx_pol, Pol::V);
        let a_h = sc.s.coupling(tx_pol, Pol::H);
        if a_v.norm_sqr() == 0.0 && a_h.norm_sqr() == 0.0 {
            continue;
        }
        let r = range_history(sc, x_n);
        let taper_gain = match taper {
            AmplitudeTaper::Unity => 1.0,
            AmplitudeTaper::InverseSquare => 1.0 / (r * r),
        };
        let rvp = if include_rvp { w.rvp_phase(r) } else { 0.0 };
        for (m, &k) in kr.iter().enumerate() {
            let phase = -k * r + rvp;
            let e = Complex64::from_polar(taper_gain, phase);
            chans[Pol::V.rx_channel()][m] += a_v * e;
            chans[Pol::H.rx_channel()][m] += a_h * e;
        }
    }
    chans
}

/// Simulate a single dechirped pulse, returning one fast-time vector per
/// receive channel (index 0 = V receive, 1 = H receive).
pub fn simulate_pulse(
    scene: &Scene,
    x_n: f64,
    tx_pol: Pol,
    w: &WaveformParams,
    include_rvp: bool,
) -> Result<[Vec<Complex64>; 2], SimError> {
    scene.validate()?;
    let n_fast = w.n_fast();
    if n_fast < 2 {
        return Err(SimError::TooFewFastSamples { n_fast });
    }
    Ok(pulse_samples(
        scene,
        x_n,
        tx_pol,
        w,
        n_fast,
        include_rvp,
        AmplitudeTaper::Unity,
    ))
}

fn pulse_plan(positions: &[f64], opts: &SimOptions) -> Vec<(f64, Pol)> {
    if opts.tdm {
        positions
            .iter()
            .flat_map(|&x| [(x, Pol::H), (x, Pol::V)])
            .collect()
    } else {
        positions.iter().map(|&x| (x, opts.fixed_tx_pol)).collect()
    }
}

fn assemble_cube(
    plan: Vec<(f64, Pol)>,
    rows: Vec<[Vec<Complex64>; 2]>,
    n_fast: usize,
    w: &WaveformParams,
    opts: &SimOptions,
) -> DataCube {
    let n_pulses = plan.len();
    let mut samples = Array3::<Complex32>::zeros((n_pulses, n_fast, DataCube::N_CHANNELS));
    for (p, chans) in rows.into_iter().enumerate() {
        for (c, chan) in chans.into_iter().enumerate() {
            for (m, v) in chan.into_iter().enumerate() {
                samples[[p, m, c]] = Complex32::new(v.re as f32, v.im as f32);
            }
        }
    }
    DataCube {
        samples,
        pulse_positions: plan.iter().map(|(x, _)| *x).collect(),
        pulse_tx_pol: plan.iter().map(|(_, p)| *p).collect(),
        params: *w,
        rvp_present: opts.include_rvp,
        tdm: opts.tdm,
    }
}

fn check_spacing(positions: &[f64], w: &WaveformParams, opts: &SimOptions) {
    if let Some(theta_r) = opts.theta_r {
        let bound = max_spatial_step(w.f0, theta_r);
        let max_step = positions
            .windows(2)
            .map(|p| (p[1] - p[0]).abs())
            .fold(0.0f64, f64::max);
        if max_step > bound {
            log::warn!(
                "pulse spacing {max_step:.4} m exceeds the sampling bound {bound:.4} m; \
                 expect crossrange aliasing"
            );
        }
    }
}

fn validate(scene: &Scene, w: &WaveformParams) -> Result<usize, SimError> {
    scene.validate()?;
    let n_fast = w.n_fast();
    if n_fast < 2 {
        return Err(SimError::TooFewFastSamples { n_fast });
    }
    Ok(n_fast)
}

/// Simulate a full data cube along a track. Pulses are computed in parallel
/// when the `parallel` feature is on; output is identical to
/// [`simulate_cube_seq`].
pub fn simulate_cube(
    scene: &Scene,
    track: &Track,
    w: &WaveformParams,
    opts: &SimOptions,
) -> Result<DataCube, SimError> {
    let n_fast = validate(scene, w)?;
    let positions = track.positions(w.f_p);
    check_spacing(&positions, w, opts);
    let plan = pulse_plan(&positions, opts);

    #[cfg(feature = "parallel")]
    let rows: Vec<[Vec<Complex64>; 2]> = plan
        .par_iter()
        .map(|&(x, pol)| pulse_samples(scene, x, pol, w, n_fast, opts.include_rvp, opts.taper))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<[Vec<Complex64>; 2]> = plan
        .iter()
        .map(|&(x, pol)| pulse_samples(scene, x, pol, w, n_fast, opts.include_rvp, opts.taper))
        .collect();

    Ok(assemble_cube(plan, rows, n_fast, w, opts))
}

/// Single-threaded variant of [`simulate_cube`]; also the fallback used when
/// the `parallel` feature is disabled.
pub fn simulate_cube_seq(
    scene: &Scene,
    track: &Track,
    w: &WaveformParams,
    opts: &SimOptions,
) -> Result<DataCube, SimError> {
    let n_fast = validate(scene, w)?;
    let positions = track.positions(w.f_p);
    check_spacing(&positions, w, opts);
    let plan = pulse_plan(&positions, opts);
    let rows: Vec<[Vec<Complex64>; 2]> = plan
        .iter()
        .map(|&(x, pol)| pulse_samples(scene, x, pol, w, n_fast, opts.include_rvp, opts.taper))
        .collect();
    Ok(assemble_cube(plan, rows, n_fast, w, opts))
}

/// Additive noise specification: per-sample SNR relative to a unit-amplitude
/// scatterer, plus the RNG seed. `snr_db = f64::INFINITY` disables noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Add circularly symmetric complex Gaussian noise at the specified
/// per-sample SNR. Deterministic under the seed regardless of thread count.
pub fn add_noise(cube: &DataCube, noise: &NoiseSpec) -> DataCube {
    if noise.snr_db.is_infinite() && noise.snr_db > 0.0 {
        return cube.clone();
    }
    let variance = 10f64.powf(-noise.snr_db / 10.0);
    let sigma_q = (variance / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let normal = Normal::new(0.0, sigma_q).expect("valid sigma");
    let mut out = cube.clone();
    for v in out.samples.iter_mut() {
        let re: f64 = normal.sample(&mut rng);
        let im: f64 = normal.sample(&mut rng);
        *v = Complex32::new(v.re + re as f32, v.im + im as f32);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScatteringMatrix;
    use crate::SPEED_OF_LIGHT;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn one_target_scene(x: f64, y: f64) -> Scene {
        Scene::new(vec![PointScatterer::unit(x, y)])
    }

    /// Independent oracle: naive DFT magnitude at an arbitrary frequency.
    fn dft_mag(samples: &[Complex64], times: &[f64], freq: f64) -> f64 {
        let mut acc = Complex64::default();
        for (s, &t) in samples.iter().zip(times) {
            acc += s * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * freq * t);
        }
        acc.norm()
    }

    #[test]
    fn hh_scatterer_drives_only_h_channel() {
        let w = WaveformParams::default();
        let scene = one_target_scene(0.0, 12.0);
        let chans = simulate_pulse(&scene, 0.0, Pol::H, &w, false).unwrap();
        let h = &chans[Pol::H.rx_channel()];
        let v = &chans[Pol::V.rx_channel()];
        assert_eq!(h.len(), 100);
        for s in h {
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
        }
        assert!(v.iter().all(|s| s.norm() == 0.0));
    }

    #[test]
    fn beat_frequency_matches_dechirp_identity() {
        // Peak of the fast-time spectrum sits at -2 y beta / (c tau_pd); the
        // oracle scans a fine frequency grid with a naive DFT.
        let w = WaveformParams::default();
        let y = 15.0;
        let scene = one_target_scene(3.0, y);
        let chans = simulate_pulse(&scene, 3.0, Pol::H, &w, false).unwrap();
        let h = &chans[Pol::H.rx_channel()];
        let times = w.fast_time_axis(h.len());

        let expected = w.beat_frequency(y);
        let mut best = (0.0f64, 0.0f64);
        let mut f = -w.f_s / 2.0;
        while f < w.f_s / 2.0 {
            let m = dft_mag(h, &times, f);
            if m > best.1 {
                best = (f, m);
            }
            f += 25.0;
        }
        // Dechirp by conjugate transmit puts the tone on the negative side.
        assert_abs_diff_eq!(-best.0, expected, epsilon = 100.0);
        assert_abs_diff_eq!(expected, 2.0 * y * w.beta / (SPEED_OF_LIGHT * w.tau_pd), epsilon = 1e-9);
    }

    #[test]
    fn band_center_phase_matches_carrier_range_product() {
        // Odd n_fast so one sample sits exactly at t = 0.
        let w = WaveformParams::new(5.9e9, 200.0e6, 1.0e-3, 75.0, 101.0e3).unwrap();
        let scene = one_target_scene(2.0, 9.0);
        for x_n in [0.0, 1.0, 4.5] {
            let chans = simulate_pulse(&scene, x_n, Pol::H, &w, false).unwrap();
            let mid = chans[Pol::H.rx_channel()][w.n_fast() / 2];
            let r = range_history(&scene.scatterers[0], x_n);
            let want = -(4.0 * std::f64::consts::PI / SPEED_OF_LIGHT) * w.f0 * r;
            let diff = (mid.arg() - want).rem_euclid(2.0 * std::f64::consts::PI);
            let diff = diff.min(2.0 * std::f64::consts::PI - diff);
            assert_abs_diff_eq!(diff, 0.0, epsilon = 1e-5);
        }
    }

    #[test]
    fn per_pulse_energy_invariant_to_position() {
        let w = WaveformParams::default();
        let scene = one_target_scene(0.0, 20.0);
        let e0: f64 = simulate_pulse(&scene, -5.0, Pol::H, &w, false).unwrap()
            [Pol::H.rx_channel()]
        .iter()
        .map(|v| v.norm_sqr())
        .sum();
        for x in [0.0, 3.3, 11.0] {
            let e: f64 = simulate_pulse(&scene, x, Pol::H, &w, false).unwrap()
                [Pol::H.rx_channel()]
            .iter()
            .map(|v| v.norm_sqr())
            .sum();
            assert_relative_eq!(e, e0, max_relative = 1e-12);
            assert_relative_eq!(e, w.n_fast() as f64, max_relative = 1e-12);
        }
    }

    #[test]
    fn rvp_factor_matches_closed_form() {
        let w = WaveformParams::default();
        let y = 22.0;
        let scene = one_target_scene(0.0, y);
        let plain = simulate_pulse(&scene, 0.0, Pol::H, &w, false).unwrap();
        let with_rvp = simulate_pulse(&scene, 0.0, Pol::H, &w, true).unwrap();
        let ratio = with_rvp[1][7] / plain[1][7];
        assert_abs_diff_eq!(ratio.arg(), w.rvp_phase(y), epsilon = 1e-9);
        assert_abs_diff_eq!(ratio.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_scene_rejected() {
        let w = WaveformParams::default();
        let scene = Scene::new(vec![]);
        assert_eq!(
            simulate_pulse(&scene, 0.0, Pol::H, &w, false).unwrap_err(),
            SimError::EmptyScene
        );
        assert!(simulate_cube(&scene, &Track::Positions(vec![0.0]), &w, &SimOptions::default())
            .is_err());
    }

    #[test]
    fn empty_track_gives_valid_empty_cube() {
        let w = WaveformParams::default();
        let scene = one_target_scene(0.0, 10.0);
        let cube = simulate_cube(
            &scene,
            &Track::Uniform {
                speed: 2.25,
                n_positions: 0,
                start: 0.0,
            },
            &w,
            &SimOptions::default(),
        )
        .unwrap();
        assert_eq!(cube.n_pulses(), 0);
        assert_eq!(cube.n_fast(), 100);
        assert!(cube.pulse_positions.is_empty());
    }

    #[test]
    fn uniform_track_spacing_matches_operating_point() {
        let w = WaveformParams::default();
        let track = Track::Uniform {
            speed: 2.25,
            n_positions: 8,
            start: 0.0,
        };
        let pos = track.positions(w.f_p);
        for p in pos.windows(2) {
            assert_eq!(p[1] - p[0], 0.03);
        }
    }

    #[test]
    fn tdm_schedule_and_burst_pairing() {
        let w = WaveformParams::default();
        let scene = one_target_scene(0.0, 10.0);
        let opts = SimOptions {
            tdm: true,
            ..SimOptions::default()
        };
        let cube = simulate_cube(
            &scene,
            &Track::Uniform {
                speed: 2.25,
                n_positions: 5,
                start: 1.0,
            },
            &w,
            &opts,
        )
        .unwrap();
        assert_eq!(cube.n_pulses(), 10);
        for p in 0..10 {
            let want = if p % 2 == 0 { Pol::H } else { Pol::V };
            assert_eq!(cube.pulse_tx_pol[p], want);
        }
        // Pair members share a position; positions are non-decreasing.
        for i in 0..5 {
            assert_eq!(cube.pulse_positions[2 * i], cube.pulse_positions[2 * i + 1]);
        }
        for w2 in cube.pulse_positions.windows(2) {
            assert!(w2[1] >= w2[0]);
        }
    }

    #[test]
    fn tdm_hh_only_scene_leaves_v_pulses_dark() {
        let w = WaveformParams::default();
        let z = Complex64::new(0.0, 0.0);
        let s = ScatteringMatrix::new(Complex64::new(1.0, 0.0), z, z, z);
        let scene = Scene::new(vec![PointScatterer::new(0.0, 10.0, s).unwrap()]);
        let opts = SimOptions {
            tdm: true,
            ..SimOptions::default()
        };
        let cube = simulate_cube(
            &scene,
            &Track::Uniform {
                speed: 2.25,
                n_positions: 4,
                start: 0.0,
            },
            &w,
            &opts,
        )
        .unwrap();
        for p in (1..8).step_by(2) {
            for m in 0..cube.n_fast() {
                for c in 0..2 {
                    assert_eq!(cube.samples[[p, m, c]], Complex32::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn parallel_and_sequential_cubes_identical() {
        let w = WaveformParams::default();
        let scene = Scene::new(vec![
            PointScatterer::unit(0.0, 10.0),
            PointScatterer::unit(1.0, 17.0),
        ]);
        let track = Track::Uniform {
            speed: 2.25,
            n_positions: 16,
            start: -0.5,
        };
        let opts = SimOptions {
            tdm: true,
            include_rvp: true,
            ..SimOptions::default()
        };
        let a = simulate_cube(&scene, &track, &w, &opts).unwrap();
        let b = simulate_cube_seq(&scene, &track, &w, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inverse_square_taper_scales_amplitudes() {
        let w = WaveformParams::default();
        let scene = one_target_scene(0.0, 10.0);
        let opts = SimOptions {
            taper: AmplitudeTaper::InverseSquare,
            ..SimOptions::default()
        };
        let cube = simulate_cube(&scene, &Track::Positions(vec![0.0]), &w, &opts).unwrap();
        let amp = cube.samples[[0, 0, Pol::H.rx_channel()]].norm() as f64;
        assert_relative_eq!(amp, 1.0 / 100.0, max_relative = 1e-6);
    }

    #[test]
    fn infinite_snr_is_identity() {
        let w = WaveformParams::default();
        let scene = one_target_scene(0.0, 10.0);
        let cube = simulate_cube(&scene, &Track::Positions(vec![0.0, 0.03]), &w, &SimOptions::default())
            .unwrap();
        let noisy = add_noise(
            &cube,
            &NoiseSpec {
                snr_db: f64::INFINITY,
                seed: 7,
            },
        );
        assert_eq!(noisy, cube);
    }

    #[test]
    fn noise_is_deterministic_under_seed() {
        let w = WaveformParams::default();
        let scene = one_target_scene(0.0, 10.0);
        let cube = simulate_cube(&scene, &Track::Positions(vec![0.0, 0.03]), &w, &SimOptions::default())
            .unwrap();
        let spec = NoiseSpec {
            snr_db: 10.0,
            seed: 1234,
        };
        let a = add_noise(&cube, &spec);
        let b = add_noise(&cube, &spec);
        assert_eq!(a, b);
        let c = add_noise(
            &cube,
            &NoiseSpec {
                snr_db: 10.0,
                seed: 1235,
            },
        );
        assert_ne!(a, c);
    }

    #[test]
    fn zero_db_noise_variance_within_five_percent() {
        // >= 1e5 samples: 500 positions x 100 fast x 2 channels.
        let w = WaveformParams::default();
        let scene = one_target_scene(0.0, 10.0);
        let cube = simulate_cube(
            &scene,
            &Track::Uniform {
                speed: 2.25,
                n_positions: 500,
                start: 0.0,
            },
            &w,
            &SimOptions::default(),
        )
        .unwrap();
        let noisy = add_noise(
            &cube,
            &NoiseSpec {
                snr_db: 0.0,
                seed: 99,
            },
        );
        let mut acc = 0.0f64;
        let mut n = 0usize;
        for (a, b) in noisy.samples.iter().zip(cube.samples.iter()) {
            let d_re = (a.re - b.re) as f64;
            let d_im = (a.im - b.im) as f64;
            acc += d_re * d_re + d_im * d_im;
            n += 1;
        }
        assert!(n >= 100_000);
        let variance = acc / n as f64;
        assert!((variance - 1.0).abs() < 0.05, "variance ratio {variance}");
    }
}
