//! FFT helpers: zero-phase frequency masks and periodogram band power.
//!
//! All filtering in the receive-chain models is done with FFT-domain masks.
//! Masks are zero-phase by construction, so envelope peaks and edges keep
//! their positions, which the peak-localization decoder relies on.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::stream::RealStream;
use crate::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward FFT.
pub fn fft_forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

/// In-place inverse FFT, normalized by 1/N.
pub fn fft_inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(buf));
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Frequency in Hz of FFT bin `k` for an N-point transform at `rate`,
/// mapped to (-rate/2, rate/2].
pub fn bin_freq(k: usize, n: usize, rate: f64) -> f64 {
    let k = k as f64;
    let n = n as f64;
    if k <= n / 2.0 {
        k * rate / n
    } else {
        (k - n) * rate / n
    }
}

/// Apply a real, even frequency mask `gain(|f|)` to a real stream.
///
/// The mask is evaluated on |f| so conjugate symmetry is preserved and the
/// output stays real.
pub fn filter_real(stream: &RealStream, gain: impl Fn(f64) -> f64) -> RealStream {
    if stream.samples.len() < 2 {
        return stream.clone();
    }
    let n = stream.samples.len();
    let mut buf: Vec<Complex64> =
        stream.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_forward(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= gain(bin_freq(k, n, stream.rate).abs());
    }
    fft_inverse(&mut buf);
    RealStream {
        rate: stream.rate,
        t0: stream.t0,
        domain: stream.domain,
        samples: buf.into_iter().map(|v| v.re).collect(),
    }
}

/// Low-pass mask with a raised-cosine transition band above `cutoff`.
///
/// The 10% transition band softens Gibbs ringing next to the sharp envelope
/// drop at the chirp wrap instant.
pub fn lowpass_gain(cutoff: f64) -> impl Fn(f64) -> f64 {
    let edge = cutoff * 1.1;
    move |f: f64| {
        if f <= cutoff {
            1.0
        } else if f >= edge {
            0.0
        } else {
            0.5 * (1.0 + (std::f64::consts::PI * (f - cutoff) / (edge - cutoff)).cos())
        }
    }
}

/// Band-pass mask over [lo, hi] with raised-cosine skirts of width `trans`.
pub fn bandpass_gain(lo: f64, hi: f64, trans: f64) -> impl Fn(f64) -> f64 {
    move |f: f64| {
        if f >= lo && f <= hi {
            1.0
        } else if f > lo - trans && f < lo {
            0.5 * (1.0 + (std::f64::consts::PI * (lo - f) / trans).cos())
        } else if f > hi && f < hi + trans {
            0.5 * (1.0 + (std::f64::consts::PI * (f - hi) / trans).cos())
        } else {
            0.0
        }
    }
}

/// Periodogram of a real stream over the positive-frequency bins,
/// normalized so that the sum over all (+/-) bins equals the mean power:
/// a sine of amplitude B contributes B^2/4 to its positive bin.
pub fn periodogram(stream: &RealStream) -> Vec<(f64, f64)> {
    let n = stream.samples.len();
    let mut buf: Vec<Complex64> =
        stream.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_forward(&mut buf);
    let norm = (n as f64) * (n as f64);
    buf.iter()
        .take(n / 2 + 1)
        .enumerate()
        .map(|(k, v)| (k as f64 * stream.rate / n as f64, v.norm_sqr() / norm))
        .collect()
}

/// Mean periodogram power of a real stream over the band `(lo, hi)` Hz.
///
/// Errors if the band is empty, inverted, or outside [0, rate/2].
pub fn band_power(stream: &RealStream, lo: f64, hi: f64) -> Result<f64> {
    if !(lo >= 0.0 && hi > lo && hi <= stream.rate / 2.0 + 1e-9) {
        return Err(Error::Domain(format!(
            "band [{lo}, {hi}] Hz is empty or outside Nyquist ({} Hz)",
            stream.rate / 2.0
        )));
    }
    if stream.samples.len() < 2 {
        return Err(Error::Domain("stream too short for a periodogram".into()));
    }
    let pxx = periodogram(stream);
    let vals: Vec<f64> =
        pxx.iter().filter(|(f, _)| *f >= lo && *f <= hi).map(|(_, p)| *p).collect();
    if vals.is_empty() {
        return Err(Error::Domain(format!(
            "band [{lo}, {hi}] Hz contains no FFT bins at this length"
        )));
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::Domain;
    use std::f64::consts::PI;

    fn tone(freq: f64, rate: f64, n: usize) -> RealStream {
        let samples = (0..n).map(|i| (2.0 * PI * freq * i as f64 / rate).sin()).collect();
        RealStream::new(rate, 0.0, Domain::Baseband, samples)
    }

    #[test]
    fn roundtrip_fft() {
        let mut buf: Vec<Complex64> =
            (0..64).map(|i| Complex64::new(i as f64, -(i as f64) / 3.0)).collect();
        let orig = buf.clone();
        fft_forward(&mut buf);
        fft_inverse(&mut buf);
        for (a, b) in buf.iter().zip(orig.iter()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn lowpass_keeps_low_removes_high() {
        let rate = 1000.0;
        let lo = tone(50.0, rate, 2048);
        let hi = tone(400.0, rate, 2048);
        let mixed = RealStream::new(
            rate,
            0.0,
            Domain::Baseband,
            lo.samples.iter().zip(hi.samples.iter()).map(|(a, b)| a + b).collect(),
        );
        let out = filter_real(&mixed, lowpass_gain(100.0));
        let low_p = band_power(&out, 40.0, 60.0).unwrap();
        let high_p = band_power(&out, 390.0, 410.0).unwrap();
        assert!(low_p / high_p > 1e6, "stopband leak: {}", high_p / low_p);
    }

    #[test]
    fn band_power_rejects_bad_bands() {
        let s = tone(50.0, 1000.0, 256);
        assert!(band_power(&s, 200.0, 100.0).is_err());
        assert!(band_power(&s, 0.0, 600.0).is_err());
    }

    #[test]
    fn bin_freq_wraps_negative() {
        assert!((bin_freq(1, 8, 800.0) - 100.0).abs() < 1e-12);
        assert!((bin_freq(7, 8, 800.0) + 100.0).abs() < 1e-12);
    }
}
