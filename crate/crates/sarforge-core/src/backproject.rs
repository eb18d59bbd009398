//! Time-domain backprojection focuser.
//!
//! Used as an independent, brute-force oracle for the frequency-domain
//! chain: it makes no uniform-sampling assumption, so it also handles the
//! wobbled tracks the RMA rejects. Per pulse the fast-time record is range
//! compressed with a zero-padded DFT; per pixel the profile is sampled at
//! the pixel's beat bin with quadratic complex interpolation and rotated by
//! `exp{+j k_c 2 R}` (`k_c = 2 pi f0 / c`) to cancel the received carrier
//! phase of the baseband model, then accumulated coherently.
//!
//! Pixels are computed in parallel; each pixel accumulates its pulses
//! sequentially, so results do not depend on thread count.

use std::fmt;

use ndarray::Array2;
use num_complex::{Complex32, Complex64};

use crate::image::{PolLabel, SarImage};
use crate::sim::DataCube;
use crate::SPEED_OF_LIGHT;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Zero-pad factor for the per-pulse range compression; the quadratic
/// interpolator rides on an 8x oversampled profile.
const RANGE_PROFILE_PAD: usize = 8;

/// Output raster specification in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackprojectGrid {
    pub x_start: f64,
    pub x_step: f64,
    pub nx: usize,
    pub y_start: f64,
    pub y_step: f64,
    pub ny: usize,
}

impl BackprojectGrid {
    /// Grid matching another image's axes, for cell-by-cell comparison.
    pub fn from_image(img: &SarImage) -> Self {
        Self {
            x_start: img.x_start,
            x_step: img.x_step,
            nx: img.nx(),
            y_start: img.y_start,
            y_step: img.y_step,
            ny: img.ny(),
        }
    }
}

/// Backprojection result: the focused image plus the count of pixels whose
/// range exceeded the unambiguous window for every pulse (flagged invalid
/// and left zero).
#[derive(Debug, Clone, PartialEq)]
pub struct BackprojectOutput {
    pub image: SarImage,
    pub invalid_pixels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackprojectError {
    EmptyCube,
}

impl fmt::Display for BackprojectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackprojectError::EmptyCube => write!(f, "cube holds no pulses"),
        }
    }
}

impl std::error::Error for BackprojectError {}

struct Profiles {
    /// Rotated range profiles, one per pulse.
    rows: Vec<Vec<Complex64>>,
    /// Fractional profile bin per meter of range.
    bins_per_meter: f64,
    /// Highest usable profile bin (ADC Nyquist).
    max_bin: f64,
    /// Carrier round-trip wavenumber `4 pi f0 / c`.
    k_carrier: f64,
}

/// Range-compress every pulse of one channel: zero-padded inverse DFT, then
/// a per-bin rotation that removes the fast-time reference offset so the
/// profile envelope is smooth in range.
fn range_profiles(cube: &DataCube, channel: usize) -> Profiles {
    let n = cube.n_fast();
    let n_pulses = cube.n_pulses();
    let padded = RANGE_PROFILE_PAD * n;
    let dt = cube.params.tau_pd / (n as f64 - 1.0);
    let chirp_rate = cube.params.chirp_rate();
    let t0 = -cube.params.tau_pd / 2.0;

    let mut planner = rustfft::FftPlanner::new();
    let inv = planner.plan_fft_inverse(padded);

    // exp(+j 2 pi nu_k t0) undoes the start-time reference per bin.
    let rotation: Vec<Complex64> = (0..padded)
        .map(|k| {
            let nu = k as f64 / (padded as f64 * dt);
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * nu * t0)
        })
        .collect();

    let compress = |p: usize| -> Vec<Complex64> {
        let mut buf = vec![Complex64::default(); padded];
        for m in 0..n {
            let v = cube.samples[[p, m, channel]];
            buf[m] = Complex64::new(v.re as f64, v.im as f64);
        }
        inv.process(&mut buf);
        for (v, rot) in buf.iter_mut().zip(&rotation) {
            *v *= rot;
        }
        buf
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<Complex64>> = (0..n_pulses).into_par_iter().map(compress).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<Complex64>> = (0..n_pulses).map(compress).collect();

    Profiles {
        rows,
        bins_per_meter: 2.0 * chirp_rate / SPEED_OF_LIGHT * padded as f64 * dt,
        max_bin: padded as f64 / 2.0 - 2.0,
        k_carrier: 4.0 * std::f64::consts::PI * cube.params.f0 / SPEED_OF_LIGHT,
    }
}

/// Quadratic (3-point Lagrange) complex interpolation of a profile at a
/// fractional bin.
fn sample_profile(profile: &[Complex64], u: f64) -> Complex64 {
    let n = profile.len();
    let j = (u.round() as isize).clamp(1, n as isize - 2) as usize;
    let d = u - j as f64;
    profile[j - 1] * (0.5 * d * (d - 1.0))
        + profile[j] * (1.0 - d * d)
        + profile[j + 1] * (0.5 * d * (d + 1.0))
}

fn pixel_value(
    profiles: &Profiles,
    positions: &[f64],
    x: f64,
    y: f64,
) -> (Complex64, bool) {
    let mut acc = Complex64::default();
    let mut contributed = false;
    for (row, &x_n) in profiles.rows.iter().zip(positions) {
        let dx = x - x_n;
        let r = (y * y + dx * dx).sqrt();
        let u = r * profiles.bins_per_meter;
        if u > profiles.max_bin {
            continue;
        }
        contributed = true;
        let v = sample_profile(row, u);
        acc += v * Complex64::from_polar(1.0, profiles.k_carrier * r);
    }
    (acc, contributed)
}

/// Accumulate the full-precision pixel values; shared by both public entry
/// points and by the in-module linearity test.
fn accumulate(
    cube: &DataCube,
    channel: usize,
    grid: &BackprojectGrid,
    parallel: bool,
) -> Result<(Vec<Complex64>, usize), BackprojectError> {
    assert!(channel < DataCube::N_CHANNELS, "receive channel out of range");
    if cube.n_pulses() == 0 {
        return Err(BackprojectError::EmptyCube);
    }
    let profiles = range_profiles(cube, channel);
    let positions = &cube.pulse_positions;
    let ny = grid.ny;

    let mut pixels = vec![Complex64::default(); grid.nx * ny];
    let mut valid = vec![false; grid.nx * ny];

    let fill_row = |(ix, (row, valid_row)): (usize, (&mut [Complex64], &mut [bool]))| {
        let x = grid.x_start + ix as f64 * grid.x_step;
        for iy in 0..ny {
            let y = grid.y_start + iy as f64 * grid.y_step;
            let (v, ok) = pixel_value(&profiles, positions, x, y);
            if ok {
                row[iy] = v;
                valid_row[iy] = true;
            }
        }
    };

    #[cfg(feature = "parallel")]
    if parallel {
        pixels
            .par_chunks_mut(ny)
            .zip(valid.par_chunks_mut(ny))
            .enumerate()
            .for_each(fill_row);
    } else {
        pixels
            .chunks_mut(ny)
            .zip(valid.chunks_mut(ny))
            .enumerate()
            .for_each(fill_row);
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = parallel;
        pixels
            .chunks_mut(ny)
            .zip(valid.chunks_mut(ny))
            .enumerate()
            .for_each(fill_row);
    }

    let invalid_pixels = valid.iter().filter(|v| !**v).count();
    Ok((pixels, invalid_pixels))
}

fn run(
    cube: &DataCube,
    channel: usize,
    grid: &BackprojectGrid,
    parallel: bool,
) -> Result<BackprojectOutput, BackprojectError> {
    let (pixels, invalid_pixels) = accumulate(cube, channel, grid, parallel)?;
    // Coherent gain of the matched accumulation: n_fast per pulse, summed
    // over pulses (the zero-pad does not raise the tone peak).
    let scale = 1.0 / (cube.n_pulses() as f64 * cube.n_fast() as f64);
    let data: Vec<Complex32> = pixels
        .into_iter()
        .map(|v| Complex32::new((v.re * scale) as f32, (v.im * scale) as f32))
        .collect();
    let image = SarImage {
        pixels: Array2::from_shape_vec((grid.nx, grid.ny), data).expect("grid shape"),
        x_start: grid.x_start,
        x_step: grid.x_step,
        y_start: grid.y_start,
        y_step: grid.y_step,
        pol: None,
        cal_constant: None,
    };
    Ok(BackprojectOutput {
        image,
        invalid_pixels,
    })
}

/// Backproject one receive channel onto the grid. Pixel-parallel under the
/// `parallel` feature.
pub fn backproject(
    cube: &DataCube,
    channel: usize,
    grid: &BackprojectGrid,
) -> Result<BackprojectOutput, BackprojectError> {
    run(cube, channel, grid, true)
}

/// Single-threaded variant of [`backproject`]; also the fallback when the
/// `parallel` feature is disabled.
pub fn backproject_seq(
    cube: &DataCube,
    channel: usize,
    grid: &BackprojectGrid,
) -> Result<BackprojectOutput, BackprojectError> {
    run(cube, channel, grid, false)
}

/// Attach a polarization label to a backprojected image.
pub fn label(mut out: BackprojectOutput, pol: PolLabel) -> BackprojectOutput {
    out.image.pol = Some(pol);
    out
}
