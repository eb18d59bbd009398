//! GNSS track ingestion and constant-velocity trajectory analysis.
//!
//! The motion model assumes the platform moves linearly at constant speed;
//! [`fit_constant_velocity`] estimates that model by least squares and
//! [`approximation_errors`] decomposes the per-sample deviations into
//! along-track and cross-track components (left of travel positive), their
//! first-difference rates, the positional approximation RMSE, and
//! histograms. [`synth_wobble`] generates deterministic band-limited
//! perturbed tracks for experiments.
//!
//! Track logs travel as CSV with header `t,east,north,up` (seconds and
//! meters, LF line endings).

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// One GNSS fix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSample {
    pub t: f64,
    pub east: f64,
    pub north: f64,
    pub up: f64,
}

/// A time-ordered position log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackLog {
    pub samples: Vec<TrackSample>,
    /// Free-text provenance.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrackError {
    TooFewSamples { got: usize },
    NonMonotonicTime { index: usize },
    /// Total displacement too small relative to the position noise for a
    /// meaningful constant-velocity fit.
    DegenerateTrack { displacement: f64, threshold: f64 },
    Parse { line: usize, message: String },
    Io(String),
}

impl fmt::Display for TrackError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrackError::TooFewSamples { got } => {
                write!(f, "track needs at least 2 samples, got {got}")
            }
            TrackError::NonMonotonicTime { index } => {
                write!(f, "track timestamps must be strictly increasing (sample {index})")
            }
            TrackError::DegenerateTrack {
                displacement,
                threshold,
            } => write!(
                f,
                "degenerate track: displacement {displacement:.4} m below threshold {threshold:.4} m"
            ),
            TrackError::Parse { line, message } => write!(f, "track CSV line {line}: {message}"),
            TrackError::Io(e) => write!(f, "track I/O: {e}"),
        }
    }
}

impl std::error::Error for TrackError {}

impl From<std::io::Error> for TrackError {
    fn from(e: std::io::Error) -> Self {
        TrackError::Io(e.to_string())
    }
}

impl TrackLog {
    pub fn new(samples: Vec<TrackSample>, source: impl Into<String>) -> Self {
        Self {
            samples,
            source: source.into(),
        }
    }

    pub fn validate(&self) -> Result<(), TrackError> {
        if self.samples.len() < 2 {
            return Err(TrackError::TooFewSamples {
                got: self.samples.len(),
            });
        }
        for (i, pair) in self.samples.windows(2).enumerate() {
            if pair[1].t <= pair[0].t {
                return Err(TrackError::NonMonotonicTime { index: i + 1 });
            }
        }
        Ok(())
    }

    /// Parse the `t,east,north,up` CSV format.
    pub fn read_csv<R: Read>(reader: R, source: impl Into<String>) -> Result<Self, TrackError> {
        let reader = BufReader::new(reader);
        let mut samples = Vec::new();
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(TrackError::Parse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        };
        if header.trim() != "t,east,north,up" {
            return Err(TrackError::Parse {
                line: 1,
                message: format!("expected header 't,east,north,up', got '{}'", header.trim()),
            });
        }
        for (idx, line) in lines {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').collect();
            if fields.len() != 4 {
                return Err(TrackError::Parse {
                    line: idx + 1,
                    message: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let mut vals = [0.0f64; 4];
            for (v, field) in vals.iter_mut().zip(&fields) {
                *v = field.trim().parse().map_err(|e| TrackError::Parse {
                    line: idx + 1,
                    message: format!("bad number '{field}': {e}"),
                })?;
            }
            samples.push(TrackSample {
                t: vals[0],
                east: vals[1],
                north: vals[2],
                up: vals[3],
            });
        }
        Ok(Self::new(samples, source))
    }

    pub fn read_csv_path(path: &Path) -> Result<Self, TrackError> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, path.display().to_string())
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<(), TrackError> {
        writer.write_all(b"t,east,north,up\n")?;
        for s in &self.samples {
            writeln!(writer, "{},{},{},{}", s.t, s.east, s.north, s.up)?;
        }
        Ok(())
    }
}

/// Constant-velocity motion model `p(t) = origin + velocity * t` in the
/// east/north plane (flat topography; `up` is ignored).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantVelocityFit {
    pub origin_east: f64,
    pub origin_north: f64,
    pub v_east: f64,
    pub v_north: f64,
}

impl ConstantVelocityFit {
    pub fn speed(&self) -> f64 {
        self.v_east.hypot(self.v_north)
    }

    /// Heading of travel, radians CCW from east.
    pub fn heading(&self) -> f64 {
        self.v_north.atan2(self.v_east)
    }

    pub fn position_at(&self, t: f64) -> (f64, f64) {
        (
            self.origin_east + self.v_east * t,
            self.origin_north + self.v_north * t,
        )
    }

    /// Unit along-track vector.
    pub fn along_unit(&self) -> (f64, f64) {
        let h = self.heading();
        (h.cos(), h.sin())
    }

    /// Unit cross-track vector, left of travel positive.
    pub fn cross_unit(&self) -> (f64, f64) {
        let h = self.heading();
        (-h.sin(), h.cos())
    }
}

/// Least-squares constant-velocity fit of an east/north track versus time.
pub fn fit_constant_velocity(log: &TrackLog) -> Result<ConstantVelocityFit, TrackError> {
    log.validate()?;
    let n = log.samples.len() as f64;
    let t_mean = log.samples.iter().map(|s| s.t).sum::<f64>() / n;
    let e_mean = log.samples.iter().map(|s| s.east).sum::<f64>() / n;
    let n_mean = log.samples.iter().map(|s| s.north).sum::<f64>() / n;
    let mut stt = 0.0;
    let mut ste = 0.0;
    let mut stn = 0.0;
    for s in &log.samples {
        let dt = s.t - t_mean;
        stt += dt * dt;
        ste += dt * (s.east - e_mean);
        stn += dt * (s.north - n_mean);
    }
    let (v_east, v_north) = if stt > 0.0 {
        (ste / stt, stn / stt)
    } else {
        (0.0, 0.0)
    };
    let fit = ConstantVelocityFit {
        origin_east: e_mean - v_east * t_mean,
        origin_north: n_mean - v_north * t_mean,
        v_east,
        v_north,
    };

    // Reject tracks whose displacement is buried in position noise.
    let duration = log.samples.last().unwrap().t - log.samples[0].t;
    let displacement = fit.speed() * duration;
    let residual_rms = {
        let mut acc = 0.0;
        for s in &log.samples {
            let (pe, pn) = fit.position_at(s.t);
            acc += (s.east - pe).powi(2) + (s.north - pn).powi(2);
        }
        (acc / n).sqrt()
    };
    let threshold = 10.0 * residual_rms.max(1e-9);
    if displacement < threshold {
        return Err(TrackError::DegenerateTrack {
            displacement,
            threshold,
        });
    }
    Ok(fit)
}

/// Histogram with uniform bins; counts always sum to the sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub start: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bin_width: f64) -> Self {
        assert!(bin_width > 0.0);
        if values.is_empty() {
            return Self {
                start: 0.0,
                bin_width,
                counts: vec![],
            };
        }
        let min = values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let max = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let start = (min / bin_width).floor() * bin_width;
        let n_bins = (((max - start) / bin_width).floor() as usize + 1).max(1);
        let mut counts = vec![0u64; n_bins];
        for &v in values {
            let idx = (((v - start) / bin_width).floor() as usize).min(n_bins - 1);
            counts[idx] += 1;
        }
        Self {
            start,
            bin_width,
            counts,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Per-sample deviation statistics of a track against its constant-velocity
/// model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackErrorStats {
    pub v_fit: f64,
    pub heading_fit: f64,
    /// `sqrt(mean(along^2 + cross^2))`.
    pub rmse: f64,
    pub along_errors: Vec<f64>,
    pub cross_errors: Vec<f64>,
    /// First differences of the errors over the log timestamps (m/s).
    pub along_rates: Vec<f64>,
    pub cross_rates: Vec<f64>,
    pub along_hist: Histogram,
    pub cross_hist: Histogram,
    pub along_rate_hist: Histogram,
    pub cross_rate_hist: Histogram,
}

/// Histogram bin widths for [`approximation_errors`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    /// Bin width for the error histograms (m).
    pub error_bin: f64,
    /// Bin width for the error-rate histograms (m/s).
    pub rate_bin: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            error_bin: 0.05,
            rate_bin: 0.05,
        }
    }
}

/// Signed along-/cross-track deviations of the log from the model, with
/// rates, RMSE, and histograms.
pub fn approximation_errors(
    log: &TrackLog,
    fit: &ConstantVelocityFit,
    hist: &HistogramSpec,
) -> TrackErrorStats {
    let along_unit = fit.along_unit();
    let cross_unit = fit.cross_unit();
    let n = log.samples.len();
    let mut along = Vec::with_capacity(n);
    let mut cross = Vec::with_capacity(n);
    for s in &log.samples {
        let (pe, pn) = fit.position_at(s.t);
        let de = s.east - pe;
        let dn = s.north - pn;
        along.push(de * along_unit.0 + dn * along_unit.1);
        cross.push(de * cross_unit.0 + dn * cross_unit.1);
    }
    let rmse = (along
        .iter()
        .zip(&cross)
        .map(|(a, c)| a * a + c * c)
        .sum::<f64>()
        / n as f64)
        .sqrt();

    let rates = |errors: &[f64]| -> Vec<f64> {
        errors
            .windows(2)
            .zip(log.samples.windows(2))
            .map(|(e, s)| (e[1] - e[0]) / (s[1].t - s[0].t))
            .collect()
    };
    let along_rates = rates(&along);
    let cross_rates = rates(&cross);

    TrackErrorStats {
        v_fit: fit.speed(),
        heading_fit: fit.heading(),
        rmse,
        along_hist: Histogram::from_values(&along, hist.error_bin),
        cross_hist: Histogram::from_values(&cross, hist.error_bin),
        along_rate_hist: Histogram::from_values(&along_rates, hist.rate_bin),
        cross_rate_hist: Histogram::from_values(&cross_rates, hist.rate_bin),
        along_errors: along,
        cross_errors: cross,
        along_rates,
        cross_rates,
    }
}

/// Stop-and-go pulse positions in the track frame: `x_n = n v_fit / f_p`,
/// starting at the origin.
pub fn pulse_positions(fit: &ConstantVelocityFit, f_p: f64, n_pulses: usize) -> Vec<f64> {
    assert!(f_p > 0.0);
    let v = fit.speed();
    (0..n_pulses).map(|n| n as f64 * v / f_p).collect()
}

/// Band-limited pseudo-random track perturbation parameters. Each component
/// sums eight seeded sinusoids with spatial wavelengths drawn around
/// `wavelength`, scaled to the requested RMS amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WobbleSpec {
    /// Along-track RMS amplitude (m).
    pub along_amp: f64,
    /// Cross-track RMS amplitude (m).
    pub cross_amp: f64,
    /// Central spatial wavelength of the perturbation band (m).
    pub wavelength: f64,
    pub seed: u64,
}

const WOBBLE_COMPONENTS: usize = 8;

/// Sample a perturbed track from a constant-velocity base model at `n`
/// uniform timestamps starting at `t_start`.
pub fn synth_wobble(
    fit: &ConstantVelocityFit,
    t_start: f64,
    dt: f64,
    n: usize,
    spec: &WobbleSpec,
) -> TrackLog {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw_band = |amp: f64| -> Vec<(f64, f64, f64)> {
        // (spatial frequency, phase, amplitude) triples
        (0..WOBBLE_COMPONENTS)
            .map(|_| {
                let wl = spec.wavelength * rng.gen_range(0.5..1.5);
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                let a = amp * (2.0 / WOBBLE_COMPONENTS as f64).sqrt();
                (std::f64::consts::TAU / wl, phase, a)
            })
            .collect()
    };
    let along_band = draw_band(spec.along_amp);
    let cross_band = draw_band(spec.cross_amp);

    let along_unit = fit.along_unit();
    let cross_unit = fit.cross_unit();
    let v = fit.speed();
    let samples = (0..n)
        .map(|i| {
            let t = t_start + i as f64 * dt;
            let s = v * (t - t_start); // distance along track
            let eval = |band: &[(f64, f64, f64)], amp: f64| -> f64 {
                if amp == 0.0 {
                    return 0.0;
                }
                band.iter()
                    .map(|&(k, phase, a)| a * (k * s + phase).sin())
                    .sum()
            };
            let da = eval(&along_band, spec.along_amp);
            let dc = eval(&cross_band, spec.cross_amp);
            let (pe, pn) = fit.position_at(t);
            TrackSample {
                t,
                east: pe + da * along_unit.0 + dc * cross_unit.0,
                north: pn + da * along_unit.1 + dc * cross_unit.1,
                up: 0.0,
            }
        })
        .collect();
    TrackLog::new(samples, format!("synthetic wobble seed {}", spec.seed))
}

/// Add seeded Gaussian position noise (per axis) to a log; sigma of 0.02 m
/// mimics an RTK-corrected receiver.
pub fn with_gnss_noise(log: &TrackLog, sigma: f64, seed: u64) -> TrackLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let mut out = log.clone();
    for s in out.samples.iter_mut() {
        s.east += normal.sample(&mut rng);
        s.north += normal.sample(&mut rng);
        s.up += normal.sample(&mut rng);
    }
    out.source = format!("{} + gnss noise {sigma} m", log.source);
    out
}
