//! Link-level simulator for a SAW-based low-power LoRa downlink demodulator.
//!
//! The library models the full receive chain of a backscatter tag that
//! demodulates LoRa chirps without a down-converter or ADC: the chirp is
//! pushed through the monotonic skirt of a SAW filter (frequency-amplitude
//! transformation), envelope-detected with a square-law stage, optionally
//! routed through a cyclic-frequency-shifting stage that keeps the signal
//! off the noisy baseband during detection, quantized by a double-threshold
//! comparator, and decoded by localizing the trailing edge of the high run
//! inside each symbol window. On top of the PHY sits a small MAC feedback
//! loop (ACK-driven retransmission, slotted ALOHA, channel hopping, rate
//! adaptation) and a batch experiment harness that sweeps SF/BW/CR/distance
//! and emits BER/throughput/PRR/range tables as CSV.
//!
//! Everything is deterministic given a seed: trials derive per-trial seeds
//! from a base seed, and all aggregation is order-independent, so parallel
//! runs reproduce byte-identical reports.

pub mod channel;
pub mod demod;
pub mod experiment;
pub mod frontend;
pub mod mac;
pub mod spectrum;
pub mod stream;
pub mod waveform;

pub use stream::{BitStream, Domain, IqStream, RealStream, SampleStream};

/// Errors shared across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration value is inconsistent or unusable.
    #[error("configuration error: {0}")]
    Config(String),
    /// Threshold calibration produced unusable comparator levels.
    #[error("calibration error: {0}")]
    Calibration(String),
    /// A downlink command addressed a tag that does not exist.
    #[error("addressing error: {0}")]
    Addressing(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
