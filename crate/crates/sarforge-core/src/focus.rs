//! Range migration (omega-k) image formation.
//!
//! The chain turns a dechirped data cube into a focused complex image in
//! four steps, each exposed separately so the composition can be tested
//! stage by stage:
//!
//! 1. [`crossrange_transform`] — unitary DFT along the pulse axis, giving
//!    the scene spectrum on the `(k_x, k_r)` grid (DC-centered `k_x`).
//! 2. [`matched_filter`] — multiply by `exp{+j R_ref sqrt(k_r^2 - k_x^2)}`,
//!    shifting all ranges by `-R_ref`; evanescent bins (`k_x^2 >= k_r^2`)
//!    are zeroed and counted.
//! 3. [`stolt_interpolate`] — resample each `k_x` column from the warped
//!    support `k_y(k_r) = sqrt(k_r^2 - k_x^2)` onto a uniform `k_y` grid.
//! 4. [`image_invert`] — unitary 2-D inverse DFT, restoring absolute
//!    downrange by the `+R_ref` offset.
//!
//! Optional residual-video-phase compensation ([`rvp_compensate`]) and
//! fast-time windowing ([`window_fast_time`]) run before the transform.
//! Stolt columns are processed in parallel; the result does not depend on
//! thread count.

use std::fmt;

use ndarray::{Array2, Axis};
use num_complex::{Complex32, Complex64};

use crate::fft::{self, Dir};
use crate::image::{PolLabel, SarImage};
use crate::sim::DataCube;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Internal zero-pad factor for the fast-time FFT inside RVP compensation;
/// finer bin spacing shrinks the phase error on off-grid beat tones.
const RVP_COMP_PAD: usize = 4;

/// Errors from the focusing chain.
#[derive(Debug, Clone, PartialEq)]
pub enum FocusError {
    /// Pulse positions deviate from a uniform grid by more than 5% of the
    /// mean spacing; the RMA requires uniform sampling (use the
    /// backprojection oracle for wobbled tracks).
    NonuniformTrack { max_deviation: f64, tolerance: f64 },
    /// The uniform output grid missed the data support entirely.
    EmptySupport,
    /// The cube holds no pulses.
    EmptyCube,
}

impl fmt::Display for FocusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FocusError::NonuniformTrack {
                max_deviation,
                tolerance,
            } => write!(
                f,
                "track is not uniform: max spacing deviation {max_deviation:.4} m exceeds {tolerance:.4} m"
            ),
            FocusError::EmptySupport => write!(f, "output wavenumber grid misses the data support"),
            FocusError::EmptyCube => write!(f, "cube holds no pulses"),
        }
    }
}

impl std::error::Error for FocusError {}

/// Reference range for the matched filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceRange {
    Zero,
    /// Half the maximum unambiguous range; the usual pick for ground-based
    /// collection.
    HalfMax,
    Meters(f64),
}

impl ReferenceRange {
    pub fn resolve(&self, params: &crate::model::WaveformParams) -> f64 {
        match self {
            ReferenceRange::Zero => 0.0,
            ReferenceRange::HalfMax => params.max_unambiguous_range() / 2.0,
            ReferenceRange::Meters(r) => *r,
        }
    }
}

/// Fast-time (downrange) window applied before the crossrange transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    None,
    /// `w[m] = alpha - (1 - alpha) cos(2 pi m / (N-1))`; `alpha = 0.5` is
    /// Hann, `alpha = 0.54` Hamming.
    RaisedCosine { alpha: f64 },
}

impl Window {
    pub fn values(&self, n: usize) -> Vec<f64> {
        match self {
            Window::None => vec![1.0; n],
            Window::RaisedCosine { alpha } => (0..n)
                .map(|m| {
                    alpha
                        - (1.0 - alpha)
                            * (2.0 * std::f64::consts::PI * m as f64 / (n as f64 - 1.0)).cos()
                })
                .collect(),
        }
    }
}

/// Interpolator used by the Stolt resampling step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoltInterp {
    Linear,
    /// Windowed-sinc interpolation over `taps` neighbors in index space.
    TruncatedSinc { taps: usize },
}

/// Extent policy for the uniform output `k_y` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KyGridPolicy {
    /// Cover the attainable `sqrt(k_r^2 - k_x^2)` support over every
    /// retained `k_x` column, preserving wide-angle (fine crossrange) data.
    FullSupport,
    /// Cover only the `k_x = 0` support `[k_r_min, k_r_max]`; cheaper but
    /// discards data migrated below `k_r_min` by wide integration angles.
    CenterColumn,
}

/// Focusing configuration. Defaults: reference range at half the maximum
/// range, no window, linear Stolt interpolation over a 2x upsampled
/// fast-time grid, full-support output extent, no oversampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusConfig {
    pub r_ref: ReferenceRange,
    pub window: Window,
    pub stolt_interp: StoltInterp,
    pub ky_policy: KyGridPolicy,
    /// Band-limited fast-time upsampling factor applied before the Stolt
    /// mapping (>= 1).
    pub fast_upsample: usize,
    /// Zero-pad factor for the pulse axis ahead of the crossrange DFT (>= 1).
    pub zero_pad_crossrange: usize,
    /// Spectral zero-pad factor for the final 2-D inverse transform; raises
    /// pixel density without changing resolution (>= 1).
    pub image_oversample: usize,
    /// Compensate residual video phase automatically when the cube carries
    /// it.
    pub auto_rvp_compensate: bool,
}

impl Default for FocusConfig {
    fn default() -> Self {
        Self {
            r_ref: ReferenceRange::HalfMax,
            window: Window::None,
            stolt_interp: StoltInterp::Linear,
            ky_policy: KyGridPolicy::FullSupport,
            fast_upsample: 2,
            zero_pad_crossrange: 1,
            image_oversample: 1,
            auto_rvp_compensate: true,
        }
    }
}

/// Scene spectrum on the `(k_x, k_r)` grid, `k_x` DC-centered.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// `[k_x rows][k_r columns]`.
    pub data: Array2<Complex64>,
    pub kx: Vec<f64>,
    pub kr: Vec<f64>,
    /// Along-track position of the first pulse; image x axes are anchored
    /// here.
    pub x_start: f64,
    /// Pulse spacing (m).
    pub dx: f64,
    /// Evanescent bins zeroed by the matched filter.
    pub masked_evanescent: usize,
    /// Reference range applied by the matched filter, if any.
    pub r_ref: Option<f64>,
}

impl Spectrum {
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Spectrum after Stolt resampling, on a uniform `(k_x, k_y)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StoltSpectrum {
    /// `[k_x rows][k_y columns]`.
    pub data: Array2<Complex64>,
    pub kx: Vec<f64>,
    pub ky_start: f64,
    pub ky_step: f64,
    pub x_start: f64,
    pub dx: f64,
    pub r_ref: f64,
    /// Output bins outside the warped data support, set to zero.
    pub zeroed_out_of_support: usize,
    pub masked_evanescent: usize,
}

impl StoltSpectrum {
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Bookkeeping from a full focus run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusDiagnostics {
    pub r_ref: f64,
    pub masked_evanescent: usize,
    pub stolt_zeroed_bins: usize,
    pub cube_energy: f64,
    pub spectrum_energy: f64,
    pub stolt_energy: f64,
    pub image_energy: f64,
}

/// Remove the residual video phase by conjugate multiplication in the
/// fast-time Fourier domain: each bin's inferred range `R_k` contributes
/// phase `K (4 pi / c^2) R_k^2`, equivalently `pi nu_k^2 / K` in beat
/// frequency. No-op (with a warning) when the cube carries no RVP.
pub fn rvp_compensate(cube: &DataCube) -> DataCube {
    if !cube.rvp_present {
        log::warn!("rvp_compensate called on a cube without residual video phase; no-op");
        return cube.clone();
    }
    let n = cube.n_fast();
    let n_pulses = cube.n_pulses();
    let chirp_rate = cube.params.chirp_rate();
    let dt = cube.params.tau_pd / (n as f64 - 1.0);
    let padded = RVP_COMP_PAD * n;

    let mut planner = rustfft::FftPlanner::new();
    let fwd = planner.plan_fft_forward(padded);
    let inv = planner.plan_fft_inverse(padded);
    let correction: Vec<Complex64> = (0..padded)
        .map(|k| {
            let wrapped = if k <= padded / 2 {
                k as f64
            } else {
                k as f64 - padded as f64
            };
            let nu = wrapped / (padded as f64 * dt);
            Complex64::from_polar(1.0, -std::f64::consts::PI * nu * nu / chirp_rate)
        })
        .collect();

    let mut out = cube.clone();
    let mut buf = vec![Complex64::default(); padded];
    for p in 0..n_pulses {
        for c in 0..DataCube::N_CHANNELS {
            for m in 0..n {
                let v = cube.samples[[p, m, c]];
                buf[m] = Complex64::new(v.re as f64, v.im as f64);
            }
            buf[n..].fill(Complex64::default());
            fwd.process(&mut buf);
            for (v, corr) in buf.iter_mut().zip(&correction) {
                *v *= corr;
            }
            inv.process(&mut buf);
            let scale = 1.0 / padded as f64;
            for m in 0..n {
                let v = buf[m] * scale;
                out.samples[[p, m, c]] = Complex32::new(v.re as f32, v.im as f32);
            }
        }
    }
    out.rvp_present = false;
    out
}

/// Apply a fast-time window to every pulse of every channel.
pub fn window_fast_time(cube: &DataCube, window: &Window) -> DataCube {
    if matches!(window, Window::None) {
        return cube.clone();
    }
    let taps = window.values(cube.n_fast());
    let mut out = cube.clone();
    for p in 0..cube.n_pulses() {
        for (m, &w) in taps.iter().enumerate() {
            for c in 0..DataCube::N_CHANNELS {
                let v = cube.samples[[p, m, c]];
                out.samples[[p, m, c]] = Complex32::new(v.re * w as f32, v.im * w as f32);
            }
        }
    }
    out
}

/// Unitary DFT along the pulse axis of one receive channel. Fails with
/// [`FocusError::NonuniformTrack`] when pulse spacing deviates from the mean
/// by more than 5%.
pub fn crossrange_transform(
    cube: &DataCube,
    channel: usize,
    zero_pad: usize,
) -> Result<Spectrum, FocusError> {
    assert!(channel < DataCube::N_CHANNELS, "receive channel out of range");
    assert!(zero_pad >= 1);
    let n_pulses = cube.n_pulses();
    if n_pulses == 0 {
        return Err(FocusError::EmptyCube);
    }
    let dx = if n_pulses >= 2 {
        let first = cube.pulse_positions[0];
        let last = cube.pulse_positions[n_pulses - 1];
        let dx = (last - first) / (n_pulses - 1) as f64;
        let tolerance = 0.05 * dx.abs();
        let max_deviation = cube
            .pulse_positions
            .windows(2)
            .map(|p| (p[1] - p[0] - dx).abs())
            .fold(0.0f64, f64::max);
        if dx.abs() == 0.0 || max_deviation > tolerance {
            return Err(FocusError::NonuniformTrack {
                max_deviation,
                tolerance,
            });
        }
        dx
    } else {
        1.0
    };

    let n_padded = n_pulses * zero_pad;
    let n_fast = cube.n_fast();
    let mut data = Array2::<Complex64>::zeros((n_padded, n_fast));
    for p in 0..n_pulses {
        for m in 0..n_fast {
            let v = cube.samples[[p, m, channel]];
            data[[p, m]] = Complex64::new(v.re as f64, v.im as f64);
        }
    }
    fft::fft_cols(&mut data, Dir::Forward, true);
    let data = fft::fftshift(&data, Axis(0));
    Ok(Spectrum {
        data,
        kx: fft::centered_angular_freqs(n_padded, dx),
        kr: cube.wavenumber_axis(),
        x_start: cube.pulse_positions[0],
        dx,
        masked_evanescent: 0,
        r_ref: None,
    })
}

/// Reference-range matched filter: multiply every propagating bin by
/// `exp{+j r_ref sqrt(k_r^2 - k_x^2)}` and zero the evanescent region.
pub fn matched_filter(mut spec: Spectrum, r_ref: f64) -> Spectrum {
    let mut masked = 0usize;
    for (q, &kx) in spec.kx.clone().iter().enumerate() {
        for (m, &kr) in spec.kr.clone().iter().enumerate() {
            let radicand = kr * kr - kx * kx;
            if radicand <= 0.0 {
                spec.data[[q, m]] = Complex64::default();
                masked += 1;
            } else {
                spec.data[[q, m]] *= Complex64::from_polar(1.0, r_ref * radicand.sqrt());
            }
        }
    }
    spec.masked_evanescent += masked;
    spec.r_ref = Some(match spec.r_ref {
        Some(prev) => prev + r_ref,
        None => r_ref,
    });
    spec
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-12 {
        1.0
    } else {
        (std::f64::consts::PI * u).sin() / (std::f64::consts::PI * u)
    }
}

/// Resample one upsampled column from its warped support onto the uniform
/// grid. Returns the interpolated column and the count of zeroed bins.
fn resample_column(
    values: &[Complex64],
    support: &[f64],
    first_valid: usize,
    ky_start: f64,
    ky_step: f64,
    n_ky: usize,
    interp: StoltInterp,
) -> (Vec<Complex64>, usize) {
    let g = &support[first_valid..];
    let v = &values[first_valid..];
    let mut out = vec![Complex64::default(); n_ky];
    let mut zeroed = 0usize;
    if g.len() < 2 {
        return (out, n_ky);
    }
    let (g_lo, g_hi) = (g[0], g[g.len() - 1]);
    for (l, slot) in out.iter_mut().enumerate() {
        let u = ky_start + l as f64 * ky_step;
        if u < g_lo || u > g_hi {
            zeroed += 1;
            continue;
        }
        // Bracketing interval via binary search on the monotone support.
        let j = g.partition_point(|&gi| gi < u);
        if j == 0 {
            *slot = v[0];
            continue;
        }
        let (j0, j1) = (j - 1, j.min(g.len() - 1));
        let span = g[j1] - g[j0];
        let frac = if span > 0.0 { (u - g[j0]) / span } else { 0.0 };
        match interp {
            StoltInterp::Linear => {
                *slot = v[j0] * (1.0 - frac) + v[j1] * frac;
            }
            StoltInterp::TruncatedSinc { taps } => {
                let half = (taps / 2).max(1) as isize;
                let s = j0 as f64 + frac;
                let base = s.floor() as isize;
                let mut acc = Complex64::default();
                let mut wsum = 0.0;
                for k in (base - half + 1)..=(base + half) {
                    if k < 0 || k as usize >= v.len() {
                        continue;
                    }
                    let d = s - k as f64;
                    let win = 0.5 * (1.0 + (std::f64::consts::PI * d / half as f64).cos());
                    let w = sinc(d) * win;
                    acc += v[k as usize] * w;
                    wsum += w;
                }
                *slot = if wsum.abs() > 1e-12 { acc / wsum } else { Complex64::default() };
            }
        }
    }
    (out, zeroed)
}

/// Stolt interpolation: map every `k_x` column from `k_r` onto the uniform
/// `k_y = sqrt(k_r^2 - k_x^2)` grid.
pub fn stolt_interpolate(spec: &Spectrum, cfg: &FocusConfig) -> Result<StoltSpectrum, FocusError> {
    assert!(cfg.fast_upsample >= 1);
    let n_kx = spec.data.nrows();
    let n_kr = spec.kr.len();
    if n_kx == 0 || n_kr < 2 {
        return Err(FocusError::EmptyCube);
    }
    let dkr = (spec.kr[n_kr - 1] - spec.kr[0]) / (n_kr - 1) as f64;
    // Inclusive-endpoint upsampled grid: factor*(N-1)+1 samples.
    let n_up = cfg.fast_upsample * (n_kr - 1) + 1;
    let dkr_up = dkr / cfg.fast_upsample as f64;
    let kr_up: Vec<f64> = (0..n_up).map(|i| spec.kr[0] + i as f64 * dkr_up).collect();
    let kr_min = spec.kr[0];
    let kr_max = spec.kr[n_kr - 1];

    // Output grid extent.
    let ky_step = dkr_up;
    let (ky_start, n_ky) = match cfg.ky_policy {
        KyGridPolicy::CenterColumn => (kr_min, n_up),
        KyGridPolicy::FullSupport => {
            let kx_abs_max = spec.kx.iter().fold(0.0f64, |a, &k| a.max(k.abs()));
            // Grid floor: never chase support below 20% of the band bottom;
            // near-grazing columns carry no usable target energy.
            let kx_lim = kx_abs_max.min(0.98 * kr_min);
            let lo = (kr_min * kr_min - kx_lim * kx_lim).sqrt().max(0.2 * kr_min);
            let n_ky = ((kr_max - lo) / ky_step).ceil() as usize + 1;
            (kr_max - (n_ky - 1) as f64 * ky_step, n_ky)
        }
    };

    let rows: Vec<(Vec<Complex64>, usize)> = {
        let do_row = |(q, row): (usize, &[Complex64])| {
            let kx = spec.kx[q];
            let up = fft::fourier_upsample(row, cfg.fast_upsample);
            let up = &up[..n_up];
            let first_valid = kr_up.partition_point(|&kr| kr * kr - kx * kx <= 0.0);
            let support: Vec<f64> = kr_up
                .iter()
                .map(|&kr| {
                    let rad = kr * kr - kx * kx;
                    if rad > 0.0 {
                        rad.sqrt()
                    } else {
                        0.0
                    }
                })
                .collect();
            resample_column(
                up,
                &support,
                first_valid,
                ky_start,
                ky_step,
                n_ky,
                cfg.stolt_interp,
            )
        };
        let slice = spec
            .data
            .as_slice()
            .expect("spectrum stored in standard layout");
        #[cfg(feature = "parallel")]
        {
            slice
                .par_chunks(n_kr)
                .enumerate()
                .map(do_row)
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            slice.chunks(n_kr).enumerate().map(do_row).collect()
        }
    };

    let mut zeroed = 0usize;
    let mut any_support = false;
    let mut data = Array2::<Complex64>::zeros((n_kx, n_ky));
    for (q, (row, z)) in rows.into_iter().enumerate() {
        zeroed += z;
        if z < n_ky {
            any_support = true;
        }
        for (l, v) in row.into_iter().enumerate() {
            data[[q, l]] = v;
        }
    }
    if !any_support {
        return Err(FocusError::EmptySupport);
    }
    Ok(StoltSpectrum {
        data,
        kx: spec.kx.clone(),
        ky_start,
        ky_step,
        x_start: spec.x_start,
        dx: spec.dx,
        r_ref: spec.r_ref.unwrap_or(0.0),
        zeroed_out_of_support: zeroed,
        masked_evanescent: spec.masked_evanescent,
    })
}

/// Unitary 2-D inverse DFT of a uniform `(k_x, k_y)` spectrum. The downrange
/// axis is offset by `+r_ref` to restore absolute range and centered so the
/// unambiguous window spans `r_ref ± pi / dk_y`.
pub fn image_invert(st: &StoltSpectrum, oversample: usize, pol: Option<PolLabel>) -> SarImage {
    assert!(oversample >= 1);
    let n_kx = st.data.nrows();
    let n_ky = st.data.ncols();
    let nx = n_kx * oversample;
    let ny = n_ky * oversample;

    let mut padded = Array2::<Complex64>::zeros((nx, ny));
    // Center the k_x block so padding extends the centered grid outward;
    // k_y pads above the band, which only refines the y sampling.
    let x_off = nx / 2 - n_kx / 2;
    padded
        .slice_mut(ndarray::s![x_off..x_off + n_kx, 0..n_ky])
        .assign(&st.data);

    let mut work = fft::ifftshift(&padded, Axis(0));
    fft::fft_cols(&mut work, Dir::Inverse, true);
    fft::fft_rows(&mut work, Dir::Inverse, true);
    let work = fft::fftshift(&work, Axis(1));

    let x_step = st.dx * n_kx as f64 / nx as f64;
    let y_window = 2.0 * std::f64::consts::PI / st.ky_step;
    let y_step = y_window / ny as f64;
    let y_start = st.r_ref - (ny / 2) as f64 * y_step;

    let pixels = work.mapv(|v| Complex32::new(v.re as f32, v.im as f32));
    SarImage {
        pixels,
        x_start: st.x_start,
        x_step,
        y_start,
        y_step,
        pol,
        cal_constant: None,
    }
}

/// Full chain with diagnostics: optional RVP compensation and windowing,
/// then transform, matched filter, Stolt interpolation, inversion.
pub fn focus_with_diagnostics(
    cube: &DataCube,
    channel: usize,
    cfg: &FocusConfig,
) -> Result<(SarImage, FocusDiagnostics), FocusError> {
    let compensated;
    let cube = if cube.rvp_present && cfg.auto_rvp_compensate {
        compensated = rvp_compensate(cube);
        &compensated
    } else {
        cube
    };
    let windowed;
    let cube = if matches!(cfg.window, Window::None) {
        cube
    } else {
        windowed = window_fast_time(cube, &cfg.window);
        &windowed
    };

    let cube_energy = cube.channel_f64(channel).iter().map(|v| v.norm_sqr()).sum();
    let spec = crossrange_transform(cube, channel, cfg.zero_pad_crossrange)?;
    let r_ref = cfg.r_ref.resolve(&cube.params);
    let spec = matched_filter(spec, r_ref);
    let spectrum_energy = spec.energy();
    let st = stolt_interpolate(&spec, cfg)?;
    let stolt_energy = st.energy();
    let image = image_invert(&st, cfg.image_oversample, None);
    let image_energy = image.energy();
    Ok((
        image,
        FocusDiagnostics {
            r_ref,
            masked_evanescent: st.masked_evanescent,
            stolt_zeroed_bins: st.zeroed_out_of_support,
            cube_energy,
            spectrum_energy,
            stolt_energy,
            image_energy,
        },
    ))
}

/// Focus one receive channel of a cube into a complex image.
pub fn focus(cube: &DataCube, channel: usize, cfg: &FocusConfig) -> Result<SarImage, FocusError> {
    focus_with_diagnostics(cube, channel, cfg).map(|(img, _)| img)
}
