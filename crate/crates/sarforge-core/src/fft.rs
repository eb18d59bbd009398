//! Internal FFT helpers shared by the simulator, the focuser, and the
//! backprojection oracle: batched lane transforms over `ndarray` matrices,
//! DC-centering shifts, and periodic band-limited upsampling.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dir {
    Forward,
    Inverse,
}

/// In-place FFT of every row (axis 1 lanes) of `a`. With `unitary` set the
/// result is scaled by `1/sqrt(n)` so the transform preserves energy.
pub(crate) fn fft_rows(a: &mut Array2<Complex64>, dir: Dir, unitary: bool) {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return;
    }
    let mut planner = FftPlanner::new();
    let fft = match dir {
        Dir::Forward => planner.plan_fft_forward(n),
        Dir::Inverse => planner.plan_fft_inverse(n),
    };
    let scale = if unitary {
        1.0 / (n as f64).sqrt()
    } else {
        1.0
    };
    let scratch_len = fft.get_inplace_scratch_len();
    let slice = a
        .as_slice_mut()
        .expect("fft_rows requires standard-layout arrays");

    let run = |row: &mut [Complex64], scratch: &mut Vec<Complex64>| {
        fft.process_with_scratch(row, scratch);
        if scale != 1.0 {
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
    };

    #[cfg(feature = "parallel")]
    slice
        .par_chunks_mut(n)
        .for_each_init(|| vec![Complex64::default(); scratch_len], |s, row| run(row, s));

    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = vec![Complex64::default(); scratch_len];
        for row in slice.chunks_mut(n) {
            run(row, &mut scratch);
        }
    }
}

/// In-place FFT of every column (axis 0 lanes) of `a`, via transpose.
pub(crate) fn fft_cols(a: &mut Array2<Complex64>, dir: Dir, unitary: bool) {
    if a.nrows() == 0 || a.ncols() == 0 {
        return;
    }
    let mut t = a.t().as_standard_layout().into_owned();
    fft_rows(&mut t, dir, unitary);
    a.assign(&t.t());
}

/// Circularly roll `a` along `axis` by `shift` (positive moves content to
/// higher indices).
pub(crate) fn roll(a: &Array2<Complex64>, axis: Axis, shift: isize) -> Array2<Complex64> {
    let n = a.len_of(axis) as isize;
    if n == 0 {
        return a.clone();
    }
    let shift = shift.rem_euclid(n);
    let mut out = Array2::zeros(a.raw_dim());
    for (i, lane) in a.axis_iter(axis).enumerate() {
        let j = (i as isize + shift).rem_euclid(n) as usize;
        out.index_axis_mut(axis, j).assign(&lane);
    }
    out
}

/// Move DC (index 0) to the center index `n/2` along `axis`.
pub(crate) fn fftshift(a: &Array2<Complex64>, axis: Axis) -> Array2<Complex64> {
    let n = a.len_of(axis) as isize;
    roll(a, axis, n / 2)
}

/// Inverse of [`fftshift`].
pub(crate) fn ifftshift(a: &Array2<Complex64>, axis: Axis) -> Array2<Complex64> {
    let n = a.len_of(axis) as isize;
    roll(a, axis, -(n / 2))
}

/// DC-centered angular frequencies `2 pi (i - n/2) / (n d)` matching the row
/// order produced by [`fftshift`].
pub(crate) fn centered_angular_freqs(n: usize, d: f64) -> Vec<f64> {
    let half = (n / 2) as f64;
    (0..n)
        .map(|i| 2.0 * std::f64::consts::PI * (i as f64 - half) / (n as f64 * d))
        .collect()
}

/// Periodic band-limited upsampling by an integer factor: the result has
/// `factor * n` samples with `out[factor * m] == x[m]`, obtained by
/// zero-padding the spectrum (splitting the Nyquist bin for even `n`).
pub(crate) fn fourier_upsample(x: &[Complex64], factor: usize) -> Vec<Complex64> {
    assert!(factor >= 1);
    let n = x.len();
    if factor == 1 || n == 0 {
        return x.to_vec();
    }
    let m = n * factor;
    let mut planner = FftPlanner::new();
    let mut spec = x.to_vec();
    planner.plan_fft_forward(n).process(&mut spec);

    let mut padded = vec![Complex64::default(); m];
    let half = n / 2;
    if n % 2 == 0 {
        // Split the Nyquist bin across the two symmetric positions.
        padded[..half].copy_from_slice(&spec[..half]);
        let nyq = spec[half] * 0.5;
        padded[half] = nyq;
        padded[m - half] = nyq;
        padded[m - half + 1..].copy_from_slice(&spec[half + 1..]);
    } else {
        padded[..=half].copy_from_slice(&spec[..=half]);
        padded[m - half..].copy_from_slice(&spec[half + 1..]);
    }
    planner.plan_fft_inverse(m).process(&mut padded);
    let scale = 1.0 / n as f64;
    for v in padded.iter_mut() {
        *v *= scale;
    }
    padded
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rows_forward_matches_naive_dft() {
        let mut a = Array2::from_shape_vec(
            (2, 4),
            vec![
                c(1.0, 0.0),
                c(2.0, -1.0),
                c(0.0, 0.5),
                c(-1.0, 2.0),
                c(0.0, 0.0),
                c(1.0, 1.0),
                c(2.0, 2.0),
                c(3.0, 3.0),
            ],
        )
        .unwrap();
        let orig = a.clone();
        fft_rows(&mut a, Dir::Forward, false);
        for r in 0..2 {
            for k in 0..4 {
                let mut acc = Complex64::default();
                for m in 0..4 {
                    let ang = -2.0 * std::f64::consts::PI * (k * m) as f64 / 4.0;
                    acc += orig[[r, m]] * Complex64::from_polar(1.0, ang);
                }
                assert_abs_diff_eq!(a[[r, k]].re, acc.re, epsilon = 1e-12);
                assert_abs_diff_eq!(a[[r, k]].im, acc.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn unitary_round_trip_preserves_energy() {
        let mut a = Array2::from_shape_fn((3, 8), |(i, j)| c((i * j) as f64, (i + j) as f64));
        let orig = a.clone();
        let e0: f64 = a.iter().map(|v| v.norm_sqr()).sum();
        fft_rows(&mut a, Dir::Forward, true);
        let e1: f64 = a.iter().map(|v| v.norm_sqr()).sum();
        assert_abs_diff_eq!(e0, e1, epsilon = 1e-9);
        fft_rows(&mut a, Dir::Inverse, true);
        for (x, y) in a.iter().zip(orig.iter()) {
            assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-10);
            assert_abs_diff_eq!(x.im, y.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn cols_match_transposed_rows() {
        let mut a = Array2::from_shape_fn((5, 3), |(i, j)| c(i as f64, j as f64));
        let mut b = a.t().as_standard_layout().into_owned();
        fft_cols(&mut a, Dir::Forward, false);
        fft_rows(&mut b, Dir::Forward, false);
        for i in 0..5 {
            for j in 0..3 {
                assert_abs_diff_eq!(a[[i, j]].re, b[[j, i]].re, epsilon = 1e-12);
                assert_abs_diff_eq!(a[[i, j]].im, b[[j, i]].im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn shift_round_trip_and_dc_position() {
        for n in [4usize, 5, 6, 7] {
            let a = Array2::from_shape_fn((n, 1), |(i, _)| c(i as f64, 0.0));
            let s = fftshift(&a, Axis(0));
            assert_eq!(s[[n / 2, 0]].re, 0.0); // DC lands at n/2
            let back = ifftshift(&s, Axis(0));
            assert_eq!(back, a);
        }
    }

    #[test]
    fn centered_freqs_agree_with_shift() {
        let f = centered_angular_freqs(6, 0.5);
        assert_abs_diff_eq!(f[3], 0.0, epsilon = 1e-15);
        assert!(f[0] < 0.0 && f[5] > 0.0);
        assert_abs_diff_eq!(f[4] - f[3], 2.0 * std::f64::consts::PI / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn upsample_interpolates_tones_and_keeps_originals() {
        // In-band tone: upsampled values must match the continuous tone.
        let n = 16;
        let freq = 3.0; // cycles per record
        let x: Vec<Complex64> = (0..n)
            .map(|m| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * freq * m as f64 / n as f64))
            .collect();
        let up = fourier_upsample(&x, 4);
        assert_eq!(up.len(), 64);
        for m in 0..n {
            assert_abs_diff_eq!(up[4 * m].re, x[m].re, epsilon = 1e-10);
            assert_abs_diff_eq!(up[4 * m].im, x[m].im, epsilon = 1e-10);
        }
        for (i, v) in up.iter().enumerate() {
            let want = Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * freq * i as f64 / 64.0,
            );
            assert_abs_diff_eq!(v.re, want.re, epsilon = 1e-9);
            assert_abs_diff_eq!(v.im, want.im, epsilon = 1e-9);
        }
    }

    #[test]
    fn upsample_identity_for_factor_one() {
        let x = vec![c(1.0, 2.0), c(3.0, -4.0)];
        assert_eq!(fourier_upsample(&x, 1), x);
    }

    #[test]
    fn roll_small_matrix() {
        let a = array![[c(0.0, 0.0)], [c(1.0, 0.0)], [c(2.0, 0.0)]];
        let r = roll(&a, Axis(0), 1);
        assert_eq!(r[[0, 0]].re, 2.0);
        assert_eq!(r[[1, 0]].re, 0.0);
        assert_eq!(r[[2, 0]].re, 1.0);
    }
}
