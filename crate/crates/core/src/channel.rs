//! Propagation and noise: log-distance path loss, additive white noise at
//! the antenna, detector-referred DC/flicker noise, and in-band jammers.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::spectrum;
use crate::stream::IqStream;
use crate::{Error, Result};

/// Noise entering the receive chain.
///
/// `awgn_density` scales white noise referenced to the antenna. The DC
/// offset and flicker terms are baseband levels contributed by the envelope
/// detector itself; they are what the cyclic-frequency-shifting stage is
/// there to dodge, so they are injected at the detection stage rather than
/// at the antenna.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// In-band white noise power as a multiple of the noise floor.
    pub awgn_density: f64,
    /// Constant additive level at baseband (detector output units).
    pub dc_offset: f64,
    /// 1/f corner: flicker noise occupies (0, corner] Hz.
    pub flicker_corner_hz: f64,
    /// RMS amplitude of the flicker waveform (detector output units).
    pub flicker_gain: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { awgn_density: 1.0, dc_offset: 0.0, flicker_corner_hz: 0.0, flicker_gain: 0.0 }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("awgn_density", self.awgn_density),
            ("dc_offset", self.dc_offset),
            ("flicker_corner_hz", self.flicker_corner_hz),
            ("flicker_gain", self.flicker_gain),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("noise model {name} = {v} must be >= 0")));
            }
        }
        Ok(())
    }

    /// True when no baseband (detector) noise is configured.
    pub fn baseband_silent(&self) -> bool {
        self.dc_offset == 0.0 && (self.flicker_gain == 0.0 || self.flicker_corner_hz == 0.0)
    }
}

/// Everything needed to turn a distance into a received signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    /// Path loss at the 1 m reference distance, dB.
    pub pl0_db: f64,
    /// Log-distance path-loss exponent.
    pub pl_exponent: f64,
    /// Noise power in dBm within `noise_ref_bw_hz`.
    pub noise_floor_dbm: f64,
    /// Bandwidth the noise floor refers to (the chirp bandwidth).
    pub noise_ref_bw_hz: f64,
    pub rf_noise: NoiseModel,
}

pub const DEFAULT_TX_POWER_DBM: f64 = 20.0;
pub const DEFAULT_ANTENNA_GAIN_DBI: f64 = 3.0;
pub const DEFAULT_PL_EXPONENT: f64 = 2.7;
/// Receiver-sensitivity calibration point: RSS at 180 m.
pub const SENSITIVITY_RSS_DBM: f64 = -85.8;
pub const SENSITIVITY_DISTANCE_M: f64 = 180.0;

impl LinkBudget {
    /// Default budget for a given chirp bandwidth: 20 dBm + 3 dBi + 3 dBi,
    /// exponent 2.7, thermal floor `-174 + 10 log10(bw) + 6` dBm, and `pl0`
    /// solved so that RSS(180 m) = -85.8 dBm.
    pub fn default_for_bw(bw: f64) -> Self {
        let pl_exponent = DEFAULT_PL_EXPONENT;
        let pl0_db = calibrate_pl0(
            DEFAULT_TX_POWER_DBM + 2.0 * DEFAULT_ANTENNA_GAIN_DBI,
            pl_exponent,
            SENSITIVITY_RSS_DBM,
            SENSITIVITY_DISTANCE_M,
        );
        Self {
            tx_power_dbm: DEFAULT_TX_POWER_DBM,
            tx_gain_dbi: DEFAULT_ANTENNA_GAIN_DBI,
            rx_gain_dbi: DEFAULT_ANTENNA_GAIN_DBI,
            pl0_db,
            pl_exponent,
            noise_floor_dbm: -174.0 + 10.0 * bw.log10() + 6.0,
            noise_ref_bw_hz: bw,
            rf_noise: NoiseModel::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.6..=6.0).contains(&self.pl_exponent) {
            return Err(Error::Config(format!(
                "path-loss exponent {} outside [1.6, 6.0]",
                self.pl_exponent
            )));
        }
        if self.noise_floor_dbm >= self.tx_power_dbm {
            return Err(Error::Config("noise floor at or above tx power".into()));
        }
        if !(self.noise_ref_bw_hz.is_finite() && self.noise_ref_bw_hz > 0.0) {
            return Err(Error::Config("noise reference bandwidth must be positive".into()));
        }
        self.rf_noise.validate()
    }
}

/// Reference path loss that makes RSS hit `rss_target` at `distance`.
pub fn calibrate_pl0(eirp_plus_rx_db: f64, exponent: f64, rss_target: f64, distance: f64) -> f64 {
    eirp_plus_rx_db - rss_target - 10.0 * exponent * distance.log10()
}

/// Received signal strength at `distance` meters:
/// `tx + gains - pl0 - 10 n log10(d)`.
pub fn rss_dbm(link: &LinkBudget, distance: f64) -> Result<f64> {
    if !(distance >= 1.0) {
        return Err(Error::Domain(format!("distance {distance} m below the 1 m reference")));
    }
    Ok(link.tx_power_dbm + link.tx_gain_dbi + link.rx_gain_dbi
        - link.pl0_db
        - 10.0 * link.pl_exponent * distance.log10())
}

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Scale a transmitted stream to the power implied by [`rss_dbm`] and add
/// white complex Gaussian noise at the configured floor. Deterministic for
/// a given seed. Detector-referred DC/flicker terms are *not* added here;
/// see [`detector_noise`].
pub fn apply_channel(
    stream: &IqStream,
    link: &LinkBudget,
    distance: f64,
    seed: u64,
) -> Result<IqStream> {
    let rss = rss_dbm(link, distance)?;
    let p_in = stream.mean_power();
    let scale = if p_in > 0.0 { (dbm_to_mw(rss) / p_in).sqrt() } else { 0.0 };
    let mut out = stream.scaled(scale);

    let noise_mw = dbm_to_mw(link.noise_floor_dbm) * link.rf_noise.awgn_density;
    if noise_mw > 0.0 {
        // White across the whole simulated band: per-sample variance is the
        // density noise_mw / ref_bw times the sample rate.
        let var = noise_mw * (stream.rate / link.noise_ref_bw_hz);
        let sigma = (var / 2.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma).expect("sigma is finite");
        for s in out.samples.iter_mut() {
            *s += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    Ok(out)
}

/// Baseband noise contributed by the envelope detector: a DC offset plus
/// 1/f-shaped flicker noise below the corner frequency. The flicker
/// waveform is normalized to `flicker_gain` RMS. Deterministic per seed.
pub fn detector_noise(n: usize, rate: f64, noise: &NoiseModel, seed: u64) -> Vec<f64> {
    let mut out = vec![noise.dc_offset; n];
    if noise.flicker_gain > 0.0 && noise.flicker_corner_hz > 0.0 && n >= 4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut buf: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(normal.sample(&mut rng), 0.0))
            .collect();
        spectrum::fft_forward(&mut buf);
        let f_min = rate / n as f64;
        for (k, v) in buf.iter_mut().enumerate() {
            let f = spectrum::bin_freq(k, n, rate).abs();
            *v *= if f > noise.flicker_corner_hz || k == 0 {
                0.0
            } else {
                (noise.flicker_corner_hz / f.max(f_min)).sqrt()
            };
        }
        spectrum::fft_inverse(&mut buf);
        let rms = (buf.iter().map(|v| v.re * v.re).sum::<f64>() / n as f64).sqrt();
        if rms > 0.0 {
            let g = noise.flicker_gain / rms;
            for (o, v) in out.iter_mut().zip(buf.iter()) {
                *o += v.re * g;
            }
        }
    }
    out
}

/// In-band interference source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jammer {
    /// Center frequency relative to the carrier, Hz.
    pub center_offset_hz: f64,
    /// Power at the receiver, dBm. `-inf` disables the jammer.
    pub power_dbm: f64,
    pub kind: JammerKind,
    /// Width of a wideband jammer; `None` spans the whole simulated band.
    pub bandwidth_hz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JammerKind {
    Tone,
    Wideband,
}

/// Add a tone or band-limited noise at the configured offset and power.
pub fn inject_interferer(stream: &IqStream, jam: &Jammer, seed: u64) -> Result<IqStream> {
    if jam.center_offset_hz.abs() > stream.rate / 2.0 {
        return Err(Error::Config(format!(
            "jammer offset {} Hz outside the representable band +/-{} Hz",
            jam.center_offset_hz,
            stream.rate / 2.0
        )));
    }
    if !jam.power_dbm.is_finite() && jam.power_dbm < 0.0 {
        return Ok(stream.clone());
    }
    let power = dbm_to_mw(jam.power_dbm);
    let mut out = stream.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match jam.kind {
        JammerKind::Tone => {
            let amp = power.sqrt();
            let phi0: f64 = rng.gen_range(0.0..TAU);
            for (i, s) in out.samples.iter_mut().enumerate() {
                let ph = phi0 + TAU * jam.center_offset_hz * (i as f64 / stream.rate);
                *s += Complex64::from_polar(amp, ph);
            }
        }
        JammerKind::Wideband => {
            let n = out.samples.len();
            if n == 0 {
                return Ok(out);
            }
            let normal = Normal::new(0.0, 1.0).unwrap();
            let mut noise: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
                .collect();
            if let Some(bw) = jam.bandwidth_hz {
                let (lo, hi) = (jam.center_offset_hz - bw / 2.0, jam.center_offset_hz + bw / 2.0);
                spectrum::fft_forward(&mut noise);
                for (k, v) in noise.iter_mut().enumerate() {
                    let f = spectrum::bin_freq(k, n, stream.rate);
                    if f < lo || f > hi {
                        *v = Complex64::new(0.0, 0.0);
                    }
                }
                spectrum::fft_inverse(&mut noise);
            }
            let p = noise.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
            if p > 0.0 {
                let g = (power / p).sqrt();
                for (s, v) in out.samples.iter_mut().zip(noise.iter()) {
                    *s += v * g;
                }
            }
        }
    }
    Ok(out)
}
