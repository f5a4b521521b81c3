//! Batch experiment orchestration: seeded Monte Carlo sweeps over
//! SF/BW/CR/distance, demodulation-range search, the ablation study, the
//! RLC feasibility calculator, and the MAC case studies.

pub mod config;
pub mod report;

pub use config::{ExperimentConfig, Resolved};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{apply_channel, inject_interferer, Jammer};
use crate::demod::{
    demodulate_frame, sampling_rates, CalPoint, DemodMode, ThresholdCalibration,
};
use crate::mac::{decode_command, encode_command, DownlinkCommand, DownlinkPath};
use crate::stream::IqStream;
use crate::waveform::{build_frame, Frame};
use crate::{Error, Result};

/// Derive an independent sub-seed for one role within a trial.
pub fn subseed(seed: u64, role: u64) -> u64 {
    // splitmix64 over (seed, role)
    let mut z = seed ^ role.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const ROLE_PAYLOAD: u64 = 1;
const ROLE_CHANNEL: u64 = 2;
const ROLE_DETECTOR: u64 = 3;
const ROLE_JAMMER: u64 = 4;

/// Link-level metrics for one (distance, mode) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub distance_m: f64,
    /// Wrong bits over total payload bits.
    pub ber: f64,
    /// Correctly decoded payload bits per second of airtime.
    pub throughput_bps: f64,
    /// Fraction of frames decoded without any symbol error.
    pub prr: f64,
    pub frames: u64,
}

/// Raw data rate `K bw / 2^sf` in bits per second.
pub fn raw_bit_rate(params: &crate::waveform::SymbolParams) -> f64 {
    f64::from(params.k_bits) * params.bw / (1u64 << params.sf) as f64
}

#[derive(Debug, Default, Clone, Copy)]
struct TrialCounts {
    bit_errors: u64,
    bits_total: u64,
    symbols_correct: u64,
    frames: u64,
    frames_ok: u64,
}

impl TrialCounts {
    fn merge(mut self, o: TrialCounts) -> TrialCounts {
        self.bit_errors += o.bit_errors;
        self.bits_total += o.bits_total;
        self.symbols_correct += o.symbols_correct;
        self.frames += o.frames;
        self.frames_ok += o.frames_ok;
        self
    }
}

/// Run closure under the rayon pool selected by `SAIYAN_SIM_THREADS`
/// (0 or unset = rayon's default).
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("SAIYAN_SIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

/// Auto-populate the per-distance threshold table from noiseless probe
/// frames pushed through the same chain and mode.
pub fn calibrate_thresholds(
    res: &Resolved,
    cfg: &ExperimentConfig,
    distances: &[f64],
) -> Result<ThresholdCalibration> {
    let mut quiet = res.clone();
    quiet.link.rf_noise.awgn_density = 0.0;
    // Probe with the deterministic detector offset only; flicker is
    // zero-mean and excluded from the offline measurement.
    quiet.chain.noise.awgn_density = 0.0;
    quiet.chain.noise.flicker_gain = 0.0;

    let mut frame = Frame::new(res.params, vec![0])?;
    frame.preamble_len = cfg.preamble_len;
    frame.sync_len = cfg.sync_symbols;
    let tx = build_frame(&frame, res.rate, 1.0)?;

    let mut table = Vec::with_capacity(distances.len());
    for &d in distances {
        let rx = apply_channel(&tx, &quiet.link, d, 0)?;
        let env = quiet.chain.detect(&rx, &res.params, res.mode)?;
        let a_max = env.peak().unwrap_or(0.0);
        if a_max <= 0.0 {
            return Err(Error::Calibration(format!("no envelope at distance {d} m")));
        }
        table.push((d, CalPoint { a_max, u_f: cfg.comparator.u_f }));
    }
    let first = table[0].1;
    Ok(ThresholdCalibration {
        a_max: first.a_max,
        g_db: cfg.comparator.g_db,
        u_f: first.u_f,
        table,
    })
}

fn run_one_trial(
    res: &Resolved,
    cfg: &ExperimentConfig,
    cal: &ThresholdCalibration,
    jammer: Option<&Jammer>,
    distance: f64,
    trial_seed: u64,
) -> TrialCounts {
    let params = &res.params;
    let bins = params.timing().bins;
    let k = u64::from(params.k_bits);

    let mut rng = ChaCha8Rng::seed_from_u64(subseed(trial_seed, ROLE_PAYLOAD));
    let payload: Vec<u16> =
        (0..cfg.payload_len).map(|_| rng.gen_range(0..bins) as u16).collect();

    let mut counts = TrialCounts {
        bits_total: k * payload.len() as u64,
        frames: 1,
        ..TrialCounts::default()
    };

    let decoded = (|| -> Result<Option<Vec<Option<u16>>>> {
        let mut frame = Frame::new(*params, payload.clone())?;
        frame.preamble_len = cfg.preamble_len;
        frame.sync_len = cfg.sync_symbols;
        let tx = build_frame(&frame, res.rate, 1.0)?;
        let mut rx = apply_channel(&tx, &res.link, distance, subseed(trial_seed, ROLE_CHANNEL))?;
        if let Some(jam) = jammer {
            rx = inject_interferer(&rx, jam, subseed(trial_seed, ROLE_JAMMER))?;
        }
        let mut chain = res.chain.clone();
        chain.noise_seed = subseed(trial_seed, ROLE_DETECTOR);
        demodulate_frame(&rx, params, res.mode, &cal.resolved_at(distance), &chain)
    })();

    match decoded {
        Ok(Some(symbols)) => {
            let mut frame_ok = true;
            for (i, &sent) in payload.iter().enumerate() {
                match symbols.get(i).copied().flatten() {
                    Some(got) if got == sent => counts.symbols_correct += 1,
                    // A wrong or erased symbol costs all K of its bits.
                    _ => {
                        counts.bit_errors += k;
                        frame_ok = false;
                    }
                }
            }
            counts.frames_ok += u64::from(frame_ok);
        }
        // Undetected frame: every payload bit is lost.
        Ok(None) | Err(_) => counts.bit_errors += counts.bits_total,
    }
    counts
}

/// One Monte Carlo point: `n_frames * repeats` seeded frames at a distance.
pub fn measure_point(
    res: &Resolved,
    cfg: &ExperimentConfig,
    cal: &ThresholdCalibration,
    jammer: Option<&Jammer>,
    distance: f64,
) -> Metrics {
    let total_frames = u64::from(cfg.n_frames) * u64::from(cfg.repeats.max(1));
    let counts = with_thread_pool(|| {
        (0..total_frames)
            .into_par_iter()
            .map(|t| {
                run_one_trial(res, cfg, cal, jammer, distance, cfg.seed.wrapping_add(t))
            })
            .reduce(TrialCounts::default, TrialCounts::merge)
    });

    let mut frame = Frame::new(res.params, vec![0; cfg.payload_len]).expect("validated");
    frame.preamble_len = cfg.preamble_len;
    frame.sync_len = cfg.sync_symbols;
    let airtime = frame.airtime() * counts.frames as f64;
    Metrics {
        distance_m: distance,
        ber: counts.bit_errors as f64 / counts.bits_total.max(1) as f64,
        throughput_bps: counts.symbols_correct as f64 * f64::from(res.params.k_bits) / airtime,
        prr: counts.frames_ok as f64 / counts.frames.max(1) as f64,
        frames: counts.frames,
    }
}

/// Sweep the configured distances.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Metrics>> {
    run_experiment_jammed(cfg, None)
}

pub fn run_experiment_jammed(cfg: &ExperimentConfig, jammer: Option<&Jammer>) -> Result<Vec<Metrics>> {
    let res = cfg.resolve()?;
    let cal = calibrate_thresholds(&res, cfg, &cfg.distances)?;
    Ok(cfg
        .distances
        .iter()
        .map(|&d| measure_point(&res, cfg, &cal, jammer, d))
        .collect())
}

/// BER threshold defining the demodulation range.
pub const RANGE_BER_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeResult {
    pub range_m: f64,
    /// True when BER never crossed 1% up to the configured maximum.
    pub capped: bool,
}

/// Largest distance keeping BER under 1%, found by bisection at 1 m
/// resolution. Reports 0 m when even the minimum distance fails.
pub fn demod_range(cfg: &ExperimentConfig, mode: DemodMode) -> Result<RangeResult> {
    let mut cfg = cfg.clone();
    cfg.mode = mode;
    // One rate for every mode keeps the stage comparison apples-to-apples.
    if cfg.oversampling.is_none() {
        cfg.oversampling = Some(20.0);
    }
    let res = cfg.resolve()?;

    let ber_at = |d: f64| -> Result<f64> {
        let cal = calibrate_thresholds(&res, &cfg, &[d])?;
        Ok(measure_point(&res, &cfg, &cal, None, d).ber)
    };

    let mut lo = 1.0f64;
    let mut hi = cfg.max_distance_m.max(2.0);
    if ber_at(lo)? >= RANGE_BER_THRESHOLD {
        return Ok(RangeResult { range_m: 0.0, capped: false });
    }
    if ber_at(hi)? < RANGE_BER_THRESHOLD {
        return Ok(RangeResult { range_m: hi, capped: true });
    }
    while hi - lo > 1.0 {
        let mid = ((lo + hi) / 2.0).floor();
        if ber_at(mid)? < RANGE_BER_THRESHOLD {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RangeResult { range_m: lo, capped: false })
}

/// Demodulation range of each receive-chain stage under one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AblationResult {
    pub vanilla_m: f64,
    pub shifted_m: f64,
    pub correlated_m: f64,
}

impl AblationResult {
    /// Range growth from the shift stage.
    pub fn shift_ratio(&self) -> f64 {
        self.shifted_m / self.vanilla_m
    }
    /// Further growth from the correlation fallback.
    pub fn correlation_ratio(&self) -> f64 {
        self.correlated_m / self.shifted_m
    }
}

pub fn ablation(cfg: &ExperimentConfig) -> Result<AblationResult> {
    Ok(AblationResult {
        vanilla_m: demod_range(cfg, DemodMode::Vanilla)?.range_m,
        shifted_m: demod_range(cfg, DemodMode::Shifted)?.range_m,
        correlated_m: demod_range(cfg, DemodMode::Correlated)?.range_m,
    })
}

/// Series capacitance a resonant tank would need for a given center
/// frequency and passband: `Q = w0/dw`, `C = 1/(Q w0 R)`, cross-checked
/// against the equivalent form `dw / (w0^2 R)`.
pub fn rlc_capacitance(f0: f64, delta_f: f64, r: f64) -> Result<f64> {
    for (name, v) in [("f0", f0), ("delta_f", delta_f), ("r", r)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} = {v} must be positive")));
        }
    }
    let w0 = std::f64::consts::TAU * f0;
    let dw = std::f64::consts::TAU * delta_f;
    let q = w0 / dw;
    let c1 = 1.0 / (q * w0 * r);
    let c2 = dw / (w0 * w0 * r);
    debug_assert!(((c1 - c2) / c1).abs() < 1e-12);
    Ok(c1)
}

/// Quoted capacitance figure printed next to the calculator output for
/// comparison (the formula evaluation above is the authoritative result).
pub const RLC_QUOTED_FIGURE: &str = "5.2e-14 pF";

/// Downlink delivery through the full demodulation pipeline: the command
/// becomes a frame, crosses the channel, and must decode intact.
pub struct SimulatedDownlink {
    res: Resolved,
    cfg: ExperimentConfig,
    cal: ThresholdCalibration,
    distance: f64,
}

impl SimulatedDownlink {
    pub fn new(cfg: &ExperimentConfig, distance: f64) -> Result<Self> {
        let mut cfg = cfg.clone();
        if cfg.oversampling.is_none() && cfg.mode != DemodMode::Vanilla {
            cfg.oversampling = Some(20.0);
        }
        let res = cfg.resolve()?;
        let cal = calibrate_thresholds(&res, &cfg, &[distance])?;
        Ok(Self { res, cfg, cal, distance })
    }
}

impl DownlinkPath for SimulatedDownlink {
    fn deliver(&self, cmd: &DownlinkCommand, seed: u64) -> Result<bool> {
        let params = &self.res.params;
        let symbols = encode_command(cmd, params.k_bits);
        let mut frame = Frame::new(*params, symbols)?;
        frame.preamble_len = self.cfg.preamble_len;
        frame.sync_len = self.cfg.sync_symbols;
        let tx = build_frame(&frame, self.res.rate, 1.0)?;
        let rx = apply_channel(&tx, &self.res.link, self.distance, subseed(seed, ROLE_CHANNEL))?;
        let mut chain = self.res.chain.clone();
        chain.noise_seed = subseed(seed, ROLE_DETECTOR);
        let decoded = demodulate_frame(
            &rx,
            params,
            self.res.mode,
            &self.cal.resolved_at(self.distance),
            &chain,
        )?;
        let Some(symbols) = decoded else { return Ok(false) };
        let values: Vec<u16> = symbols.into_iter().map(|s| s.unwrap_or(u16::MAX)).collect();
        Ok(decode_command(&values, params.k_bits).as_ref() == Some(cmd))
    }
}

/// Build a transmitted frame for ad-hoc pipeline work (tests, probes).
pub fn transmit_frame(res: &Resolved, payload: Vec<u16>) -> Result<IqStream> {
    let frame = Frame::new(res.params, payload)?;
    build_frame(&frame, res.rate, 1.0)
}

/// Ideal overhead-adjusted throughput for a payload length, bits/s.
pub fn ideal_throughput(params: &crate::waveform::SymbolParams, payload_len: usize) -> f64 {
    let l = payload_len as f64;
    raw_bit_rate(params) * l
        / (l + crate::waveform::DEFAULT_PREAMBLE_LEN as f64 + crate::waveform::DEFAULT_SYNC_SYMBOLS)
}

/// Theory and configured sampler rates for a whole (SF, K) grid, used by
/// the rate-table reports.
pub fn sampler_rate_grid(bw: f64) -> Vec<(u8, u8, f64, f64)> {
    let mut rows = Vec::new();
    for k in 1..=5u8 {
        for sf in 7..=12u8 {
            let p = crate::waveform::SymbolParams::new(sf, bw, k).expect("valid grid");
            let r = sampling_rates(&p);
            rows.push((sf, k, r.theory_hz, r.configured_hz));
        }
    }
    rows
}
