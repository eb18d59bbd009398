//! Bit-exact binary file formats for data cubes, images, and track error
//! statistics, plus 8-bit raster export.
//!
//! All multi-byte fields are little-endian. Layouts:
//!
//! **Cube** (`SARCUBE1`):
//! ```text
//! magic       8 x u8   "SARCUBE1"
//! n_pulses    u32
//! n_fast      u32
//! n_chan      u32      (always 2: channel 0 = V receive, 1 = H receive)
//! f0 beta tau_pd f_p f_s   5 x f64
//! rvp_present u8
//! tdm         u8
//! reserved    6 x u8   (zero)
//! pulse_positions   n_pulses x f64
//! pulse_tx_pol      n_pulses x u8   (0 = H, 1 = V)
//! samples           complex f32 (re, im) interleaved,
//!                   index ((pulse * n_fast + fast) * n_chan + chan)
//! ```
//!
//! **Image** (`SARIMG01`):
//! ```text
//! magic       8 x u8   "SARIMG01"
//! n_x n_y     2 x u32
//! x_start x_step y_start y_step   4 x f64
//! pol_label   u8       (0 HH, 1 HV, 2 VH, 3 VV, 255 unlabeled)
//! cal_flag    u8
//! reserved    6 x u8
//! cal_constant f64     (meaningful when cal_flag = 1)
//! pixels      complex f32 row-major, index (ix * n_y + iy)
//! ```
//!
//! **Stats** (`SARSTAT1`): fit scalars, the error and rate series, and the
//! four histograms, all f64/u32/u64.
//!
//! A file must contain exactly the header-derived byte count; trailing bytes
//! are rejected. Read errors carry the byte offset where parsing stopped.

use std::fmt;
use std::io::Write;
use std::path::Path;

use ndarray::{Array2, Array3};
use num_complex::Complex32;

use crate::image::{PolLabel, SarImage};
use crate::model::{Pol, WaveformParams};
use crate::sim::DataCube;
use crate::trajectory::{Histogram, TrackErrorStats};

pub const CUBE_MAGIC: &[u8; 8] = b"SARCUBE1";
pub const IMAGE_MAGIC: &[u8; 8] = b"SARIMG01";
pub const STATS_MAGIC: &[u8; 8] = b"SARSTAT1";

#[derive(Debug, Clone, PartialEq)]
pub enum FormatError {
    /// The magic prefix does not identify any known format.
    BadMagic { offset: u64 },
    /// Known format family but unsupported version byte.
    VersionMismatch { offset: u64, found: u8 },
    /// The file ended before the header-derived size.
    TruncatedFile { offset: u64 },
    /// Structurally invalid content (bad enum byte, trailing data, ...).
    Malformed { offset: u64, what: String },
    Io(String),
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::BadMagic { offset } => write!(f, "bad magic at byte {offset}"),
            FormatError::VersionMismatch { offset, found } => {
                write!(f, "unsupported format version {found:#04x} at byte {offset}")
            }
            FormatError::TruncatedFile { offset } => {
                write!(f, "file truncated at byte {offset}")
            }
            FormatError::Malformed { offset, what } => {
                write!(f, "malformed content at byte {offset}: {what}")
            }
            FormatError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> Self {
        FormatError::Io(e.to_string())
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> ByteReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, offset: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.offset + n > self.bytes.len() {
            return Err(FormatError::TruncatedFile {
                offset: self.bytes.len() as u64,
            });
        }
        let slice = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, FormatError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn finish(&self) -> Result<(), FormatError> {
        if self.offset != self.bytes.len() {
            return Err(FormatError::Malformed {
                offset: self.offset as u64,
                what: format!("{} trailing bytes", self.bytes.len() - self.offset),
            });
        }
        Ok(())
    }

    fn check_magic(&mut self, magic: &[u8; 8]) -> Result<(), FormatError> {
        let got = self.take(8)?;
        if got == magic {
            return Ok(());
        }
        // Same family, different trailing version byte.
        if got[..7] == magic[..7] {
            return Err(FormatError::VersionMismatch {
                offset: 7,
                found: got[7],
            });
        }
        Err(FormatError::BadMagic { offset: 0 })
    }
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_f32(out: &mut Vec<u8>, v: f32) {
    out.extend_from_slice(&v.to_le_bytes());
}

// ---------------------------------------------------------------------
// Cube format
// ---------------------------------------------------------------------

pub fn write_cube_bytes(cube: &DataCube) -> Vec<u8> {
    let n_pulses = cube.n_pulses();
    let n_fast = cube.n_fast();
    let n_chan = DataCube::N_CHANNELS;
    let mut out = Vec::with_capacity(68 + n_pulses * 9 + n_pulses * n_fast * n_chan * 8);
    out.extend_from_slice(CUBE_MAGIC);
    push_u32(&mut out, n_pulses as u32);
    push_u32(&mut out, n_fast as u32);
    push_u32(&mut out, n_chan as u32);
    push_f64(&mut out, cube.params.f0);
    push_f64(&mut out, cube.params.beta);
    push_f64(&mut out, cube.params.tau_pd);
    push_f64(&mut out, cube.params.f_p);
    push_f64(&mut out, cube.params.f_s);
    out.push(cube.rvp_present as u8);
    out.push(cube.tdm as u8);
    out.extend_from_slice(&[0u8; 6]);
    for &x in &cube.pulse_positions {
        push_f64(&mut out, x);
    }
    for &p in &cube.pulse_tx_pol {
        out.push(p.index() as u8);
    }
    for p in 0..n_pulses {
        for m in 0..n_fast {
            for c in 0..n_chan {
                let v = cube.samples[[p, m, c]];
                push_f32(&mut out, v.re);
                push_f32(&mut out, v.im);
            }
        }
    }
    out
}

pub fn read_cube_bytes(bytes: &[u8]) -> Result<DataCube, FormatError> {
    let mut r = ByteReader::new(bytes);
    r.check_magic(CUBE_MAGIC)?;
    let n_pulses = r.u32()? as usize;
    let n_fast = r.u32()? as usize;
    let n_chan = r.u32()? as usize;
    if n_chan != DataCube::N_CHANNELS {
        return Err(FormatError::Malformed {
            offset: (r.offset - 4) as u64,
            what: format!("n_chan must be 2, got {n_chan}"),
        });
    }
    let f0 = r.f64()?;
    let beta = r.f64()?;
    let tau_pd = r.f64()?;
    let f_p = r.f64()?;
    let f_s = r.f64()?;
    let rvp_present = r.u8()? != 0;
    let tdm = r.u8()? != 0;
    r.take(6)?;
    let mut pulse_positions = Vec::with_capacity(n_pulses);
    for _ in 0..n_pulses {
        pulse_positions.push(r.f64()?);
    }
    let mut pulse_tx_pol = Vec::with_capacity(n_pulses);
    for _ in 0..n_pulses {
        let offset = r.offset as u64;
        pulse_tx_pol.push(match r.u8()? {
            0 => Pol::H,
            1 => Pol::V,
            other => {
                return Err(FormatError::Malformed {
                    offset,
                    what: format!("transmit polarization byte {other}"),
                })
            }
        });
    }
    let mut samples = Array3::<Complex32>::zeros((n_pulses, n_fast, n_chan));
    for p in 0..n_pulses {
        for m in 0..n_fast {
            for c in 0..n_chan {
                let re = r.f32()?;
                let im = r.f32()?;
                samples[[p, m, c]] = Complex32::new(re, im);
            }
        }
    }
    r.finish()?;
    let params = WaveformParams {
        f0,
        beta,
        tau_pd,
        f_p,
        f_s,
    };
    Ok(DataCube {
        samples,
        pulse_positions,
        pulse_tx_pol,
        params,
        rvp_present,
        tdm,
    })
}

pub fn write_cube(path: &Path, cube: &DataCube) -> Result<(), FormatError> {
    let bytes = write_cube_bytes(cube);
    let mut file = std::fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

pub fn read_cube(path: &Path) -> Result<DataCube, FormatError> {
    let bytes = std::fs::read(path)?;
    read_cube_bytes(&bytes)
}

// ---------------------------------------------------------------------
// Image format
// ---------------------------------------------------------------------

const POL_UNLABELED: u8 = 255;

pub fn write_image_bytes(img: &SarImage) -> Vec<u8> {
    let nx = img.nx();
    let ny = img.ny();
    let mut out = Vec::with_capacity(64 + nx * ny * 8);
    out.extend_from_slice(IMAGE_MAGIC);
    push_u32(&mut out, nx as u32);
    push_u32(&mut out, ny as u32);
    push_f64(&mut out, img.x_start);
    push_f64(&mut out, img.x_step);
    push_f64(&mut out, img.y_start);
    push_f64(&mut out, img.y_step);
    out.push(img.pol.map_or(POL_UNLABELED, |p| p.code()));
    out.push(img.cal_constant.is_some() as u8);
    out.extend_from_slice(&[0u8; 6]);
    push_f64(&mut out, img.cal_constant.unwrap_or(0.0));
    for ix in 0..nx {
        for iy in 0..ny {
            let v = img.pixels[[ix, iy]];
            push_f32(&mut out, v.re);
            push_f32(&mut out, v.im);
        }
    }
    out
}

pub fn read_image_bytes(bytes: &[u8]) -> Result<SarImage, FormatError> {
    let mut r = ByteReader::new(bytes);
    r.check_magic(IMAGE_MAGIC)?;
    let nx = r.u32()? as usize;
    let ny = r.u32()? as usize;
    let x_start = r.f64()?;
    let x_step = r.f64()?;
    let y_start = r.f64()?;
    let y_step = r.f64()?;
    let pol_offset = r.offset as u64;
    let pol_byte = r.u8()?;
    let pol = if pol_byte == POL_UNLABELED {
        None
    } else {
        Some(PolLabel::from_code(pol_byte).ok_or(FormatError::Malformed {
            offset: pol_offset,
            what: format!("polarization label byte {pol_byte}"),
        })?)
    };
    let cal_flag = r.u8()? != 0;
    r.take(6)?;
    let cal_value = r.f64()?;
    let mut pixels = Array2::<Complex32>::zeros((nx, ny));
    for ix in 0..nx {
        for iy in 0..ny {
            let re = r.f32()?;
            let im = r.f32()?;
            pixels[[ix, iy]] = Complex32::new(re, im);
        }
    }
    r.finish()?;
    Ok(SarImage {
        pixels,
        x_start,
        x_step,
        y_start,
        y_step,
        pol,
        cal_constant: if cal_flag { Some(cal_value) } else { None },
    })
}

pub fn write_image(path: &Path, img: &SarImage) -> Result<(), FormatError> {
    let bytes = write_image_bytes(img);
    let mut file = std::fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

pub fn read_image(path: &Path) -> Result<SarImage, FormatError> {
    let bytes = std::fs::read(path)?;
    read_image_bytes(&bytes)
}

// ---------------------------------------------------------------------
// Stats format
// ---------------------------------------------------------------------

fn push_histogram(out: &mut Vec<u8>, h: &Histogram) {
    push_f64(out, h.start);
    push_f64(out, h.bin_width);
    push_u32(out, h.counts.len() as u32);
    for &c in &h.counts {
        push_u64(out, c);
    }
}

fn read_histogram(r: &mut ByteReader<'_>) -> Result<Histogram, FormatError> {
    let start = r.f64()?;
    let bin_width = r.f64()?;
    let n = r.u32()? as usize;
    let mut counts = Vec::with_capacity(n);
    for _ in 0..n {
        counts.push(r.u64()?);
    }
    Ok(Histogram {
        start,
        bin_width,
        counts,
    })
}

pub fn write_stats_bytes(stats: &TrackErrorStats) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(STATS_MAGIC);
    push_f64(&mut out, stats.v_fit);
    push_f64(&mut out, stats.heading_fit);
    push_f64(&mut out, stats.rmse);
    push_u32(&mut out, stats.along_errors.len() as u32);
    push_u32(&mut out, stats.along_rates.len() as u32);
    for series in [
        &stats.along_errors,
        &stats.cross_errors,
        &stats.along_rates,
        &stats.cross_rates,
    ] {
        for &v in series.iter() {
            push_f64(&mut out, v);
        }
    }
    for h in [
        &stats.along_hist,
        &stats.cross_hist,
        &stats.along_rate_hist,
        &stats.cross_rate_hist,
    ] {
        push_histogram(&mut out, h);
    }
    out
}

pub fn read_stats_bytes(bytes: &[u8]) -> Result<TrackErrorStats, FormatError> {
    let mut r = ByteReader::new(bytes);
    r.check_magic(STATS_MAGIC)?;
    let v_fit = r.f64()?;
    let heading_fit = r.f64()?;
    let rmse = r.f64()?;
    let n_errors = r.u32()? as usize;
    let n_rates = r.u32()? as usize;
    let mut series = |n: usize| -> Result<Vec<f64>, FormatError> {
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            v.push(r.f64()?);
        }
        Ok(v)
    };
    let along_errors = series(n_errors)?;
    let cross_errors = series(n_errors)?;
    let along_rates = series(n_rates)?;
    let cross_rates = series(n_rates)?;
    let along_hist = read_histogram(&mut r)?;
    let cross_hist = read_histogram(&mut r)?;
    let along_rate_hist = read_histogram(&mut r)?;
    let cross_rate_hist = read_histogram(&mut r)?;
    r.finish()?;
    Ok(TrackErrorStats {
        v_fit,
        heading_fit,
        rmse,
        along_errors,
        cross_errors,
        along_rates,
        cross_rates,
        along_hist,
        cross_hist,
        along_rate_hist,
        cross_rate_hist,
    })
}

pub fn write_stats(path: &Path, stats: &TrackErrorStats) -> Result<(), FormatError> {
    let bytes = write_stats_bytes(stats);
    let mut file = std::fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

pub fn read_stats(path: &Path) -> Result<TrackErrorStats, FormatError> {
    let bytes = std::fs::read(path)?;
    read_stats_bytes(&bytes)
}

// ---------------------------------------------------------------------
// Raster export
// ---------------------------------------------------------------------

/// Pixel mapping for [`export_raster`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterMode {
    /// Clamp `20 log10 |pixel|` into `[floor_db, ceil_db]` and map linearly
    /// onto 0..=255.
    MagnitudeDb,
    /// Map phase `[-pi, +pi]` linearly onto 0..=255; the dB bounds are
    /// ignored.
    Phase,
}

/// Render an image as an 8-bit binary PGM (P5). Rows run top-to-bottom in
/// decreasing downrange so larger `y` appears higher in the raster.
pub fn export_raster(img: &SarImage, mode: RasterMode, floor_db: f64, ceil_db: f64) -> Vec<u8> {
    assert!(
        ceil_db > floor_db,
        "raster ceiling must exceed the floor"
    );
    let nx = img.nx();
    let ny = img.ny();
    let mut out = Vec::with_capacity(32 + nx * ny);
    out.extend_from_slice(format!("P5\n{nx} {ny}\n255\n").as_bytes());
    for row in (0..ny).rev() {
        for ix in 0..nx {
            let v = img.pixels[[ix, row]];
            let byte = match mode {
                RasterMode::MagnitudeDb => {
                    let mag = ((v.re as f64).powi(2) + (v.im as f64).powi(2)).sqrt();
                    let db = if mag > 0.0 {
                        20.0 * mag.log10()
                    } else {
                        floor_db
                    };
                    let unit = ((db - floor_db) / (ceil_db - floor_db)).clamp(0.0, 1.0);
                    (unit * 255.0).round() as u8
                }
                RasterMode::Phase => {
                    let arg = (v.im as f64).atan2(v.re as f64);
                    let unit = (arg + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
                    (unit.clamp(0.0, 1.0) * 255.0).round() as u8
                }
            };
            out.push(byte);
        }
    }
    out
}

pub fn write_raster(
    path: &Path,
    img: &SarImage,
    mode: RasterMode,
    floor_db: f64,
    ceil_db: f64,
) -> Result<(), FormatError> {
    let bytes = export_raster(img, mode, floor_db, ceil_db);
    let mut file = std::fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}
