//! Focused image raster plus the measurement helpers the tests and the
//! report command rely on: global/refined peak location, mainlobe null
//! finding, sidelobe levels, and region maxima.
//!
//! Pixels are indexed `[crossrange][downrange]` and both axes are uniform.

use ndarray::Array2;
use num_complex::Complex32;

/// Polarization label, transmit before receive (HV = H transmit, V receive).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolLabel {
    HH,
    HV,
    VH,
    VV,
}

impl PolLabel {
    pub fn code(self) -> u8 {
        match self {
            PolLabel::HH => 0,
            PolLabel::HV => 1,
            PolLabel::VH => 2,
            PolLabel::VV => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<PolLabel> {
        match code {
            0 => Some(PolLabel::HH),
            1 => Some(PolLabel::HV),
            2 => Some(PolLabel::VH),
            3 => Some(PolLabel::VV),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PolLabel::HH => "HH",
            PolLabel::HV => "HV",
            PolLabel::VH => "VH",
            PolLabel::VV => "VV",
        }
    }
}

/// Location and magnitude of an image peak on the pixel grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub ix: usize,
    pub iy: usize,
    /// World coordinates (m), sub-cell refined when requested.
    pub x: f64,
    pub y: f64,
    /// Linear magnitude.
    pub mag: f64,
}

/// Complex crossrange x downrange raster with uniform axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SarImage {
    /// Pixels indexed `[crossrange][downrange]`.
    pub pixels: Array2<Complex32>,
    pub x_start: f64,
    pub x_step: f64,
    pub y_start: f64,
    pub y_step: f64,
    pub pol: Option<PolLabel>,
    /// Cumulative power gain applied by radiometric calibration; `None`
    /// until calibrated. Once set, `|pixel|^2` reads directly in m^2.
    pub cal_constant: Option<f64>,
}

impl SarImage {
    pub fn nx(&self) -> usize {
        self.pixels.shape()[0]
    }

    pub fn ny(&self) -> usize {
        self.pixels.shape()[1]
    }

    pub fn x_at(&self, ix: usize) -> f64 {
        self.x_start + ix as f64 * self.x_step
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        self.y_start + iy as f64 * self.y_step
    }

    /// Nearest pixel indices for a world coordinate, clamped to the raster.
    pub fn index_of(&self, x: f64, y: f64) -> (usize, usize) {
        let ix = ((x - self.x_start) / self.x_step).round();
        let iy = ((y - self.y_start) / self.y_step).round();
        (
            ix.clamp(0.0, (self.nx().max(1) - 1) as f64) as usize,
            iy.clamp(0.0, (self.ny().max(1) - 1) as f64) as usize,
        )
    }

    pub fn mag(&self, ix: usize, iy: usize) -> f64 {
        let v = self.pixels[[ix, iy]];
        ((v.re as f64).powi(2) + (v.im as f64).powi(2)).sqrt()
    }

    fn power(&self, ix: usize, iy: usize) -> f64 {
        let v = self.pixels[[ix, iy]];
        (v.re as f64).powi(2) + (v.im as f64).powi(2)
    }

    pub fn energy(&self) -> f64 {
        self.pixels
            .iter()
            .map(|v| (v.re as f64).powi(2) + (v.im as f64).powi(2))
            .sum()
    }

    /// Global magnitude peak at pixel resolution.
    pub fn peak(&self) -> Peak {
        let mut best = (0usize, 0usize, -1.0f64);
        for ix in 0..self.nx() {
            for iy in 0..self.ny() {
                let p = self.power(ix, iy);
                if p > best.2 {
                    best = (ix, iy, p);
                }
            }
        }
        Peak {
            ix: best.0,
            iy: best.1,
            x: self.x_at(best.0),
            y: self.y_at(best.1),
            mag: best.2.max(0.0).sqrt(),
        }
    }

    /// Global peak with sub-cell refinement: a parabola is fitted to the
    /// log-power samples straddling the maximum along each axis.
    pub fn peak_refined(&self) -> Peak {
        self.refine_at(self.peak())
    }

    /// Sub-cell refinement of a local maximum found elsewhere (e.g. inside
    /// a search region).
    pub fn refine_at(&self, p: Peak) -> Peak {
        let dx = parabolic_peak_offset(
            self.power(p.ix.saturating_sub(1).max(0), p.iy),
            self.power(p.ix, p.iy),
            self.power((p.ix + 1).min(self.nx() - 1), p.iy),
            p.ix == 0 || p.ix + 1 == self.nx(),
        );
        let dy = parabolic_peak_offset(
            self.power(p.ix, p.iy.saturating_sub(1)),
            self.power(p.ix, p.iy),
            self.power(p.ix, (p.iy + 1).min(self.ny() - 1)),
            p.iy == 0 || p.iy + 1 == self.ny(),
        );
        Peak {
            x: self.x_at(p.ix) + dx * self.x_step,
            y: self.y_at(p.iy) + dy * self.y_step,
            ..p
        }
    }

    /// Largest magnitude within a 3x3 neighborhood of `(ix, iy)`.
    pub fn local_max_3x3(&self, ix: usize, iy: usize) -> Peak {
        let mut best = (ix, iy, self.power(ix, iy));
        for jx in ix.saturating_sub(1)..=(ix + 1).min(self.nx() - 1) {
            for jy in iy.saturating_sub(1)..=(iy + 1).min(self.ny() - 1) {
                let p = self.power(jx, jy);
                if p > best.2 {
                    best = (jx, jy, p);
                }
            }
        }
        Peak {
            ix: best.0,
            iy: best.1,
            x: self.x_at(best.0),
            y: self.y_at(best.1),
            mag: best.2.sqrt(),
        }
    }

    /// First nulls of the mainlobe around `(ix, iy)` along the downrange
    /// axis, as refined world-coordinate positions `(below, above)`.
    pub fn mainlobe_nulls_downrange(&self, ix: usize, iy: usize) -> Option<(f64, f64)> {
        let lo = self.walk_to_min(ix, iy, 0, -1)?;
        let hi = self.walk_to_min(ix, iy, 0, 1)?;
        Some((lo.1, hi.1))
    }

    /// First nulls of the mainlobe along the crossrange axis,
    /// `(left, right)` world coordinates.
    pub fn mainlobe_nulls_crossrange(&self, ix: usize, iy: usize) -> Option<(f64, f64)> {
        let lo = self.walk_to_min(ix, iy, -1, 0)?;
        let hi = self.walk_to_min(ix, iy, 1, 0)?;
        Some((lo.0, hi.0))
    }

    /// Peak magnitude of the first sidelobe beyond the mainlobe nulls along
    /// the downrange axis, in dB relative to the mainlobe.
    pub fn first_sidelobe_db_downrange(&self, ix: usize, iy: usize) -> Option<f64> {
        let peak_mag = self.mag(ix, iy);
        let mut worst = f64::NEG_INFINITY;
        for dir in [-1isize, 1] {
            let (_, _, min_idx) = self.walk_indices_to_min(ix as isize, iy as isize, 0, dir)?;
            // climb to the sidelobe max after the null
            let mut j = min_idx;
            let mut last = self.power(ix, j as usize);
            loop {
                let next = j + dir;
                if next < 0 || next as usize >= self.ny() {
                    break;
                }
                let p = self.power(ix, next as usize);
                if p < last {
                    break;
                }
                last = p;
                j = next;
            }
            worst = worst.max(20.0 * (last.sqrt() / peak_mag).log10());
        }
        if worst.is_finite() {
            Some(worst)
        } else {
            None
        }
    }

    /// Maximum magnitude outside a half-width box (in meters) centered at
    /// `(cx, cy)`. Used for isolation and alias-artifact measurements.
    pub fn max_outside_box(&self, cx: f64, cy: f64, half_x: f64, half_y: f64) -> f64 {
        let mut best = 0.0f64;
        for ix in 0..self.nx() {
            let x = self.x_at(ix);
            for iy in 0..self.ny() {
                let y = self.y_at(iy);
                if (x - cx).abs() <= half_x && (y - cy).abs() <= half_y {
                    continue;
                }
                best = best.max(self.power(ix, iy));
            }
        }
        best.sqrt()
    }

    /// Largest magnitude in a rectangular world-coordinate region,
    /// together with its location.
    pub fn max_in_region(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Option<Peak> {
        let mut best: Option<(usize, usize, f64)> = None;
        for ix in 0..self.nx() {
            let x = self.x_at(ix);
            if x < x0 || x > x1 {
                continue;
            }
            for iy in 0..self.ny() {
                let y = self.y_at(iy);
                if y < y0 || y > y1 {
                    continue;
                }
                let p = self.power(ix, iy);
                if best.map_or(true, |b| p > b.2) {
                    best = Some((ix, iy, p));
                }
            }
        }
        best.map(|(ix, iy, p)| Peak {
            ix,
            iy,
            x: self.x_at(ix),
            y: self.y_at(iy),
            mag: p.sqrt(),
        })
    }

    fn walk_indices_to_min(
        &self,
        ix: isize,
        iy: isize,
        step_x: isize,
        step_y: isize,
    ) -> Option<(isize, isize, isize)> {
        let mut cx = ix;
        let mut cy = iy;
        let mut last = self.power(cx as usize, cy as usize);
        loop {
            let nx = cx + step_x;
            let ny = cy + step_y;
            if nx < 0 || ny < 0 || nx as usize >= self.nx() || ny as usize >= self.ny() {
                return None; // ran off the raster before a null appeared
            }
            let p = self.power(nx as usize, ny as usize);
            if p > last {
                // (cx, cy) is the local minimum
                return Some((cx, cy, if step_x == 0 { cy } else { cx }));
            }
            last = p;
            cx = nx;
            cy = ny;
        }
    }

    /// Walk from `(ix, iy)` in the given direction to the first local power
    /// minimum and return its parabola-refined world coordinates.
    fn walk_to_min(&self, ix: usize, iy: usize, step_x: isize, step_y: isize) -> Option<(f64, f64)> {
        let (mx, my, _) = self.walk_indices_to_min(ix as isize, iy as isize, step_x, step_y)?;
        let (mx, my) = (mx as usize, my as usize);
        if step_y != 0 {
            let offset = parabolic_offset(
                self.power(mx, my - 1),
                self.power(mx, my),
                self.power(mx, my + 1),
                my == 0 || my + 1 == self.ny(),
            );
            Some((self.x_at(mx), self.y_at(my) + offset * self.y_step))
        } else {
            let offset = parabolic_offset(
                self.power(mx - 1, my),
                self.power(mx, my),
                self.power(mx + 1, my),
                mx == 0 || mx + 1 == self.nx(),
            );
            Some((self.x_at(mx) + offset * self.x_step, self.y_at(my)))
        }
    }
}

/// Sub-cell offset of a parabola through three equally spaced samples; zero
/// at raster edges or degenerate fits.
fn parabolic_offset(p_lo: f64, p_mid: f64, p_hi: f64, at_edge: bool) -> f64 {
    if at_edge {
        return 0.0;
    }
    let denom = p_lo - 2.0 * p_mid + p_hi;
    if denom.abs() < f64::EPSILON * (p_lo + p_mid + p_hi).abs() || denom == 0.0 {
        return 0.0;
    }
    (0.5 * (p_lo - p_hi) / denom).clamp(-0.5, 0.5)
}

/// Peak variant: fit the parabola to log power, which is exact for Gaussian
/// lobes and tighter for sinc mainlobes; falls back to the raw-power fit
/// when a neighbor sample is zero.
fn parabolic_peak_offset(p_lo: f64, p_mid: f64, p_hi: f64, at_edge: bool) -> f64 {
    if !at_edge && p_lo > 0.0 && p_mid > 0.0 && p_hi > 0.0 {
        parabolic_offset(p_lo.ln(), p_mid.ln(), p_hi.ln(), false)
    } else {
        parabolic_offset(p_lo, p_mid, p_hi, at_edge)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn image_from_fn(nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> SarImage {
        let x_start = -1.0;
        let y_start = 5.0;
        let step = 0.1;
        let pixels = Array2::from_shape_fn((nx, ny), |(ix, iy)| {
            let x = x_start + ix as f64 * step;
            let y = y_start + iy as f64 * step;
            Complex32::new(f(x, y) as f32, 0.0)
        });
        SarImage {
            pixels,
            x_start,
            x_step: step,
            y_start,
            y_step: step,
            pol: None,
            cal_constant: None,
        }
    }

    fn sinc(u: f64) -> f64 {
        if u.abs() < 1e-12 {
            1.0
        } else {
            (std::f64::consts::PI * u).sin() / (std::f64::consts::PI * u)
        }
    }

    #[test]
    fn refined_peak_finds_off_grid_maximum() {
        // Gaussian centered between pixels.
        let img = image_from_fn(41, 41, |x, y| {
            (-((x - 0.233f64).powi(2) + (y - 6.077f64).powi(2)) / 0.02).exp()
        });
        let p = img.peak_refined();
        assert_abs_diff_eq!(p.x, 0.233, epsilon = 5e-3);
        assert_abs_diff_eq!(p.y, 6.077, epsilon = 5e-3);
    }

    #[test]
    fn downrange_nulls_of_sinc_profile() {
        // Separable sinc with first nulls 0.5 m from the center.
        let img = image_from_fn(21, 81, |x, y| {
            sinc(x / 0.7) * sinc((y - 7.0) / 0.5)
        });
        let p = img.peak();
        let (lo, hi) = img.mainlobe_nulls_downrange(p.ix, p.iy).unwrap();
        assert_abs_diff_eq!(lo, 6.5, epsilon = 0.02);
        assert_abs_diff_eq!(hi, 7.5, epsilon = 0.02);
        // First sidelobe of an unweighted sinc: -13.26 dB.
        let sl = img.first_sidelobe_db_downrange(p.ix, p.iy).unwrap();
        assert_abs_diff_eq!(sl, -13.26, epsilon = 0.3);
    }

    #[test]
    fn region_and_exclusion_maxima() {
        let img = image_from_fn(31, 31, |x, y| {
            (-((x + 0.5f64).powi(2) + (y - 5.5f64).powi(2)) / 0.005).exp()
                + 0.25 * (-((x - 0.8f64).powi(2) + (y - 7.2f64).powi(2)) / 0.005).exp()
        });
        let main = img.peak();
        assert_abs_diff_eq!(main.x, -0.5, epsilon = 0.05);
        let ghost = img.max_outside_box(main.x, main.y, 0.5, 0.5);
        assert_abs_diff_eq!(ghost, 0.25, epsilon = 0.02);
        let region = img.max_in_region(0.5, 1.1, 6.8, 7.6).unwrap();
        assert_abs_diff_eq!(region.x, 0.8, epsilon = 0.05);
        assert_abs_diff_eq!(region.mag, 0.25, epsilon = 0.02);
    }

    #[test]
    fn pol_label_codes_round_trip() {
        for l in [PolLabel::HH, PolLabel::HV, PolLabel::VH, PolLabel::VV] {
            assert_eq!(PolLabel::from_code(l.code()), Some(l));
        }
        assert_eq!(PolLabel::from_code(200), None);
    }
}
