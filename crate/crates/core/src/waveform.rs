//! LoRa chirp synthesis and analytic properties.
//!
//! A symbol is a linear frequency sweep starting at an offset set by the
//! symbol value; the frequency wraps back to zero once it reaches the
//! bandwidth. Streams are complex baseband referenced to the nominal
//! carrier, so a frequency of `f` here means `f_carrier + f` on the air.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::stream::{Domain, IqStream};
use crate::{Error, Result};

/// Modulation parameters a whole link shares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolParams {
    /// Spreading factor, 7..=12.
    pub sf: u8,
    /// Bandwidth in Hz: 125, 250 or 500 kHz.
    pub bw: f64,
    /// Bits encoded per chirp, 1..=5. Selects among `2^k_bits` initial
    /// frequency offsets.
    pub k_bits: u8,
    /// Nominal carrier frequency in Hz. Defaults to the lower edge of the
    /// SAW critical band.
    pub f_carrier: f64,
}

pub const DEFAULT_CARRIER_HZ: f64 = 433.5e6;
const VALID_BW: [f64; 3] = [125e3, 250e3, 500e3];

/// Quantities derived from [`SymbolParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolTiming {
    /// Symbol duration `2^sf / bw`, seconds.
    pub t_symbol: f64,
    /// Chirp slope `bw^2 / 2^sf`, Hz per second.
    pub slope: f64,
    /// Number of distinct symbol values, `2^k_bits`.
    pub bins: u32,
}

impl SymbolParams {
    pub fn new(sf: u8, bw: f64, k_bits: u8) -> Result<Self> {
        Self::with_carrier(sf, bw, k_bits, DEFAULT_CARRIER_HZ)
    }

    pub fn with_carrier(sf: u8, bw: f64, k_bits: u8, f_carrier: f64) -> Result<Self> {
        if !(7..=12).contains(&sf) {
            return Err(Error::Domain(format!("spreading factor {sf} outside 7..=12")));
        }
        if !VALID_BW.iter().any(|&b| (b - bw).abs() < 1e-6) {
            return Err(Error::Domain(format!("bandwidth {bw} Hz not one of 125/250/500 kHz")));
        }
        if !(1..=5).contains(&k_bits) || k_bits > sf {
            return Err(Error::Domain(format!("k_bits {k_bits} outside 1..=5 or above SF {sf}")));
        }
        if !(f_carrier.is_finite() && f_carrier > 0.0) {
            return Err(Error::Domain(format!("carrier {f_carrier} Hz not positive")));
        }
        Ok(Self { sf, bw, k_bits, f_carrier })
    }

    /// Symbol duration, slope and bin count.
    pub fn timing(&self) -> SymbolTiming {
        let chips = (1u64 << self.sf) as f64;
        SymbolTiming {
            t_symbol: chips / self.bw,
            slope: self.bw * self.bw / chips,
            bins: 1u32 << self.k_bits,
        }
    }

    /// Initial frequency offset of symbol `value`: `value * bw / 2^k_bits`.
    pub fn initial_offset(&self, value: u16) -> Result<f64> {
        let bins = 1u32 << self.k_bits;
        if u32::from(value) >= bins {
            return Err(Error::Domain(format!("symbol value {value} not below {bins}")));
        }
        Ok(f64::from(value) * self.bw / f64::from(bins))
    }

    /// Instant inside the symbol at which the transformed amplitude peaks:
    /// the sweep reaches `bw` at `T * (1 - value / 2^k_bits)`.
    pub fn peak_time(&self, value: u16) -> Result<f64> {
        let bins = 1u32 << self.k_bits;
        if u32::from(value) >= bins {
            return Err(Error::Domain(format!("symbol value {value} not below {bins}")));
        }
        Ok(self.timing().t_symbol * (1.0 - f64::from(value) / f64::from(bins)))
    }

    /// Instantaneous frequency offset at time `tau` into symbol `value`,
    /// with the wrap back to zero at `bw`.
    pub fn instantaneous_freq(&self, value: u16, tau: f64) -> Result<f64> {
        let f0 = self.initial_offset(value)?;
        Ok((f0 + self.timing().slope * tau).rem_euclid(self.bw))
    }
}

/// A frame: identical value-0 preamble chirps, a sync gap, then payload.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub params: SymbolParams,
    /// Symbol values, each in `[0, 2^k_bits)`.
    pub payload: Vec<u16>,
    /// Number of preamble up-chirps.
    pub preamble_len: usize,
    /// Gap between preamble and payload, in symbol times.
    pub sync_len: f64,
}

pub const DEFAULT_PREAMBLE_LEN: usize = 10;
pub const DEFAULT_SYNC_SYMBOLS: f64 = 2.25;

impl Frame {
    pub fn new(params: SymbolParams, payload: Vec<u16>) -> Result<Self> {
        let bins = params.timing().bins;
        if let Some(v) = payload.iter().find(|&&v| u32::from(v) >= bins) {
            return Err(Error::Domain(format!("payload value {v} not below {bins}")));
        }
        Ok(Self {
            params,
            payload,
            preamble_len: DEFAULT_PREAMBLE_LEN,
            sync_len: DEFAULT_SYNC_SYMBOLS,
        })
    }

    /// Total on-air duration in seconds.
    pub fn airtime(&self) -> f64 {
        (self.preamble_len as f64 + self.sync_len + self.payload.len() as f64)
            * self.params.timing().t_symbol
    }
}

fn check_rate(params: &SymbolParams, rate: f64) -> Result<()> {
    if rate < 2.0 * params.bw {
        return Err(Error::Config(format!(
            "rate {rate} Hz below 2*bw = {} Hz for the complex baseband representation",
            2.0 * params.bw
        )));
    }
    Ok(())
}

/// Synthesize one chirp as complex baseband with constant envelope
/// `amplitude`. The frequency follows `(F0 + slope*t) mod bw`; the wrap is
/// phase-continuous.
pub fn gen_chirp(params: &SymbolParams, value: u16, rate: f64, amplitude: f64) -> Result<IqStream> {
    check_rate(params, rate)?;
    let f0 = params.initial_offset(value)?;
    let timing = params.timing();
    let n = (timing.t_symbol * rate).round() as usize;
    let mut samples = Vec::with_capacity(n);
    let mut phase = 0.0f64;
    for i in 0..n {
        samples.push(Complex64::from_polar(amplitude, phase));
        let f = (f0 + timing.slope * (i as f64 / rate)).rem_euclid(params.bw);
        phase = (phase + TAU * f / rate) % TAU;
    }
    Ok(IqStream::new(rate, 0.0, Domain::PassbandEquivalent, samples))
}

/// First difference scaled by the sample rate. The output envelope tracks
/// the instantaneous frequency of the input; length shrinks by one.
pub fn differentiate(stream: &IqStream) -> Result<IqStream> {
    if stream.len() < 2 {
        return Err(Error::Domain("differentiate needs at least 2 samples".into()));
    }
    let samples = stream
        .samples
        .windows(2)
        .map(|w| (w[1] - w[0]) * stream.rate)
        .collect();
    Ok(IqStream::new(stream.rate, stream.t0, stream.domain, samples))
}

/// Synthesize a whole frame: `preamble_len` value-0 chirps, `sync_len`
/// symbol times of plain carrier (frequency 0), then the payload chirps.
/// Phase is continuous across every boundary.
pub fn build_frame(frame: &Frame, rate: f64, amplitude: f64) -> Result<IqStream> {
    check_rate(&frame.params, rate)?;
    let timing = frame.params.timing();
    let t_sym = timing.t_symbol;
    let preamble = frame.preamble_len as f64;
    let sync_end = (preamble + frame.sync_len) * t_sym;
    let total = frame.airtime();
    let n = (total * rate).round() as usize;

    // Frequencies of payload starts, precomputed once.
    let offsets: Vec<f64> = frame
        .payload
        .iter()
        .map(|&v| frame.params.initial_offset(v))
        .collect::<Result<_>>()?;

    let mut samples = Vec::with_capacity(n);
    let mut phase = 0.0f64;
    for i in 0..n {
        samples.push(Complex64::from_polar(amplitude, phase));
        let t = i as f64 / rate;
        let f = if t < preamble * t_sym {
            let tau = t % t_sym;
            (timing.slope * tau).rem_euclid(frame.params.bw)
        } else if t < sync_end {
            0.0
        } else {
            let rel = t - sync_end;
            let idx = (rel / t_sym) as usize;
            match offsets.get(idx) {
                Some(&f0) => (f0 + timing.slope * (rel - idx as f64 * t_sym))
                    .rem_euclid(frame.params.bw),
                None => 0.0,
            }
        };
        phase = (phase + TAU * f / rate) % TAU;
    }
    Ok(IqStream::new(rate, 0.0, Domain::PassbandEquivalent, samples))
}

/// Per-sample instantaneous-frequency estimate by phase differencing;
/// entry `n` estimates the frequency between samples `n` and `n+1`.
pub fn phase_diff_freq(stream: &IqStream) -> Vec<f64> {
    stream
        .samples
        .windows(2)
        .map(|w| (w[1] * w[0].conj()).arg() * stream.rate / TAU)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(sf: u8, bw: f64, k: u8) -> SymbolParams {
        SymbolParams::new(sf, bw, k).unwrap()
    }

    #[test]
    fn timing_sf7_bw500() {
        let t = params(7, 500e3, 2).timing();
        assert!((t.t_symbol - 256e-6).abs() < 1e-15);
        assert!((t.slope - 1.953125e9).abs() < 1e-3);
        assert_eq!(t.bins, 4);
    }

    #[test]
    fn timing_sf12_bw125() {
        let t = params(12, 125e3, 1).timing();
        assert!((t.t_symbol - 32.768e-3).abs() < 1e-12);
    }

    #[test]
    fn slope_times_t_is_bw() {
        // Cross-check by numerically integrating the sweep rate over one
        // symbol: the frequency must climb exactly one bandwidth.
        for sf in 7..=12u8 {
            for &bw in &[125e3, 250e3, 500e3] {
                let t = params(sf, bw, 1).timing();
                assert!((t.slope * t.t_symbol - bw).abs() < 1e-6);
                let steps = 10_000;
                let dt = t.t_symbol / steps as f64;
                let swept: f64 = (0..steps).map(|_| t.slope * dt).sum();
                assert!((swept - bw).abs() < 1e-3 * bw);
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(SymbolParams::new(6, 500e3, 1).is_err());
        assert!(SymbolParams::new(13, 500e3, 1).is_err());
        assert!(SymbolParams::new(7, 300e3, 1).is_err());
        assert!(SymbolParams::new(7, 500e3, 0).is_err());
        assert!(SymbolParams::new(7, 500e3, 6).is_err());
    }

    #[test]
    fn chirp_constant_envelope() {
        let p = params(7, 500e3, 2);
        let s = gen_chirp(&p, 3, 8.0 * p.bw, 2.5).unwrap();
        let mags = s.magnitudes();
        let max = mags.iter().cloned().fold(f64::MIN, f64::max);
        let min = mags.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min < 1e-9 * 2.5);
    }

    #[test]
    fn chirp_value_errors() {
        let p = params(7, 500e3, 2);
        assert!(matches!(gen_chirp(&p, 4, 8.0 * p.bw, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gen_chirp(&p, 0, 1.5 * p.bw, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn frequency_trajectory_matches_law() {
        let p = params(8, 250e3, 3);
        let rate = 8.0 * p.bw;
        for value in [0u16, 1, 5, 7] {
            let s = gen_chirp(&p, value, rate, 1.0).unwrap();
            let est = phase_diff_freq(&s);
            let wrap_t = p.peak_time(value).unwrap();
            for (n, &f_est) in est.iter().enumerate() {
                let t = n as f64 / rate;
                // Skip the two samples straddling the wrap instant.
                if (t - wrap_t).abs() < 2.0 / rate {
                    continue;
                }
                let f_true = p.instantaneous_freq(value, t).unwrap();
                // The estimator reads f mod rate into (-rate/2, rate/2].
                let err = (f_est - f_true).abs().min((f_est - f_true + rate).abs());
                assert!(
                    err < p.bw / 1000.0,
                    "value {value} sample {n}: est {f_est}, true {f_true}"
                );
            }
        }
    }

    #[test]
    fn chirp_wrap_time_matches_peak_time() {
        // value=3, K=2, sf=7, bw=500 kHz wraps at T*(1 - 3/4) = 64 us.
        let p = params(7, 500e3, 2);
        let rate = 8.0 * p.bw;
        let s = gen_chirp(&p, 3, rate, 1.0).unwrap();
        let est = phase_diff_freq(&s);
        let wrap_idx = est
            .windows(2)
            .position(|w| w[0] - w[1] > p.bw / 2.0)
            .expect("no wrap found") as f64;
        let wrap_t = (wrap_idx + 1.0) / rate;
        assert!((wrap_t - 64e-6).abs() <= 1.5 / rate, "wrap at {wrap_t}");
        assert!((p.peak_time(3).unwrap() - 64e-6).abs() < 1e-12);
    }

    #[test]
    fn peak_time_boundaries_and_spacing() {
        let p = params(9, 125e3, 4);
        let t = p.timing();
        assert!((p.peak_time(0).unwrap() - t.t_symbol).abs() < 1e-15);
        assert!((p.peak_time(8).unwrap() - t.t_symbol / 2.0).abs() < 1e-15);
        let times: Vec<f64> = (0..16).map(|v| p.peak_time(v).unwrap()).collect();
        for w in times.windows(2) {
            assert!((w[0] - w[1] - t.t_symbol / 16.0).abs() < 1e-12);
        }
        assert!(p.peak_time(16).is_err());
    }

    #[test]
    fn differentiate_envelope_tracks_frequency() {
        let rate = 64.0 * 500e3;
        let n = 4096;
        let tone = |f: f64| {
            let samples = (0..n)
                .map(|i| Complex64::from_polar(1.0, TAU * f * i as f64 / rate))
                .collect();
            IqStream::new(rate, 0.0, Domain::PassbandEquivalent, samples)
        };
        let env = |s: &IqStream| -> f64 {
            let d = differentiate(s).unwrap();
            d.magnitudes().iter().sum::<f64>() / d.len() as f64
        };
        let e1 = env(&tone(125e3));
        let e2 = env(&tone(250e3));
        assert!((e2 / e1 - 2.0).abs() < 0.02, "ratio {}", e2 / e1);
    }

    #[test]
    fn differentiate_chirp_monotone() {
        let p = params(7, 500e3, 1);
        let s = gen_chirp(&p, 0, 16.0 * p.bw, 1.0).unwrap();
        let d = differentiate(&s).unwrap();
        let mags = d.magnitudes();
        // Smooth out by comparing block means.
        let block = 64;
        let means: Vec<f64> = mags
            .chunks(block)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        for w in means.windows(2) {
            assert!(w[1] > w[0], "envelope not increasing: {w:?}");
        }
        let argmax = mags
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(argmax > mags.len() - block, "max not at symbol end: {argmax}");
    }

    #[test]
    fn differentiate_is_linear() {
        let p = params(7, 500e3, 2);
        let x = gen_chirp(&p, 1, 4.0 * p.bw, 1.0).unwrap();
        let y = gen_chirp(&p, 2, 4.0 * p.bw, 1.0).unwrap();
        let (a, b) = (1.7, -0.4);
        let combo = IqStream::new(
            x.rate,
            0.0,
            x.domain,
            x.samples.iter().zip(y.samples.iter()).map(|(u, v)| a * u + b * v).collect(),
        );
        let lhs = differentiate(&combo).unwrap();
        let dx = differentiate(&x).unwrap();
        let dy = differentiate(&y).unwrap();
        for i in 0..lhs.len() {
            let rhs = a * dx.samples[i] + b * dy.samples[i];
            assert!((lhs.samples[i] - rhs).norm() < 1e-6);
        }
        let short = IqStream::new(1.0, 0.0, Domain::PassbandEquivalent, vec![]);
        assert!(differentiate(&short).is_err());
    }

    #[test]
    fn frame_airtime_and_duration() {
        let p = params(7, 500e3, 2);
        let empty = Frame::new(p, vec![]).unwrap();
        assert!((empty.airtime() - 12.25 * 256e-6).abs() < 1e-12);

        let f = Frame::new(p, vec![1; 32]).unwrap();
        assert!((f.airtime() - 11.328e-3).abs() < 1e-9);
        let rate = 8.0 * p.bw;
        let s = build_frame(&f, rate, 1.0).unwrap();
        assert_eq!(s.len(), (f.airtime() * rate).round() as usize);

        let mags = s.magnitudes();
        let max = mags.iter().cloned().fold(f64::MIN, f64::max);
        let min = mags.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min < 1e-9);
    }

    #[test]
    fn frame_rejects_out_of_range_payload() {
        let p = params(7, 500e3, 2);
        assert!(Frame::new(p, vec![0, 4]).is_err());
    }
}
