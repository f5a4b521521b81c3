//! Uniformly sampled signal containers shared by every stage of the chain.

use num_complex::Complex64;

/// Signal domain a stream lives in.
///
/// The simulation never carries the true 433 MHz passband; complex streams
/// tagged `PassbandEquivalent` hold frequency offsets relative to the
/// carrier, which is all the receive-chain models depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Complex envelope referenced to the nominal carrier.
    PassbandEquivalent,
    /// Real signal after envelope detection.
    Baseband,
    /// Comparator output.
    Binary,
}

/// A uniformly sampled waveform with its rate and start time.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream<T> {
    /// Samples per second.
    pub rate: f64,
    /// Time of the first sample, in seconds.
    pub t0: f64,
    pub domain: Domain,
    pub samples: Vec<T>,
}

/// Complex (I/Q) stream.
pub type IqStream = SampleStream<Complex64>;
/// Real-valued stream.
pub type RealStream = SampleStream<f64>;
/// One-bit stream out of the comparator.
pub type BitStream = SampleStream<bool>;

impl<T> SampleStream<T> {
    pub fn new(rate: f64, t0: f64, domain: Domain, samples: Vec<T>) -> Self {
        assert!(rate.is_finite() && rate > 0.0, "sample rate must be positive");
        Self { rate, t0, domain, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration covered by the samples, in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    /// Time of sample `idx`.
    pub fn time_at(&self, idx: usize) -> f64 {
        self.t0 + idx as f64 / self.rate
    }
}

impl IqStream {
    /// Mean of |s|^2 over the stream; zero for an empty stream.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Scale every sample amplitude by `g` (power scales by `g^2`).
    pub fn scaled(&self, g: f64) -> IqStream {
        IqStream {
            rate: self.rate,
            t0: self.t0,
            domain: self.domain,
            samples: self.samples.iter().map(|s| s * g).collect(),
        }
    }

    /// Amplitude scaling expressed in dB of power gain.
    pub fn scaled_db(&self, gain_db: f64) -> IqStream {
        self.scaled(10f64.powf(gain_db / 20.0))
    }

    /// Per-sample magnitude.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm()).collect()
    }
}

impl RealStream {
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }

    /// Largest sample value; `None` on an empty stream.
    pub fn peak(&self) -> Option<f64> {
        self.samples.iter().cloned().fold(None, |acc, v| match acc {
            None => Some(v),
            Some(a) => Some(a.max(v)),
        })
    }
}
