//! Quantization and decoding: the double-threshold comparator, the
//! low-power voltage sampler, preamble detection, peak localization, and
//! the correlation fallback.

use serde::{Deserialize, Serialize};

use crate::channel::NoiseModel;
use crate::frontend::{
    apply_saw, cyclic_shift, envelope_detect, DetectorNoise, EnvelopeDetectorConfig, SawResponse,
    ShiftConfig,
};
use crate::stream::{BitStream, Domain, IqStream, RealStream};
use crate::waveform::{gen_chirp, SymbolParams, DEFAULT_PREAMBLE_LEN, DEFAULT_SYNC_SYMBOLS};
use crate::{Error, Result};

/// Comparator thresholds, volts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparatorConfig {
    pub u_high: f64,
    pub u_low: f64,
}

impl ComparatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.u_low && self.u_low < self.u_high) {
            return Err(Error::Calibration(format!(
                "thresholds must satisfy 0 < u_low ({}) < u_high ({})",
                self.u_low, self.u_high
            )));
        }
        Ok(())
    }
}

/// One bit of comparator memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ComparatorState {
    pub last_output: bool,
}

/// The four-case double-threshold rule: from low the output rises only at
/// `u_high`; from high it falls only below `u_low`.
pub fn comparator_step(
    state: ComparatorState,
    a_i: f64,
    cfg: &ComparatorConfig,
) -> (bool, ComparatorState) {
    let out = if state.last_output { a_i >= cfg.u_low } else { a_i >= cfg.u_high };
    (out, ComparatorState { last_output: out })
}

/// Threshold calibration data: the gap `g_db` below the peak amplitude
/// `a_max` sets `u_high`, and `u_f` scales it down to `u_low`. The optional
/// table holds per-distance calibration points measured offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCalibration {
    /// Peak amplitude of the detected envelope at the calibration point.
    pub a_max: f64,
    /// Gap between `a_max` and `u_high` in dB.
    pub g_db: f64,
    /// `u_low / u_high`.
    pub u_f: f64,
    /// Distance (m) to `(a_max, u_f)` lookup, sorted by distance.
    #[serde(default)]
    pub table: Vec<(f64, CalPoint)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalPoint {
    pub a_max: f64,
    pub u_f: f64,
}

pub const DEFAULT_U_F: f64 = 0.8;

/// Target width of the comparator pulse, in sampler periods. Anything
/// under one period can fall between two sample instants and erase the
/// symbol outright.
pub const DEFAULT_EDGE_WIDTH_SAMPLES: f64 = 1.6;

/// Threshold gap derived from the SAW skirt geometry: the gap (in envelope
/// dB, which doubles the RF gain figures) that makes `u_high` cross
/// `DEFAULT_EDGE_WIDTH_SAMPLES` sampler periods before the wrap cliff.
/// A fixed few-dB gap cannot work across K: at K=1 the skirt's top few dB
/// span under a tenth of a sampler period, while at K=5 a wide gap floods
/// whole windows.
pub fn geometry_threshold_gap_db(
    params: &SymbolParams,
    saw: &crate::frontend::SawResponse,
) -> f64 {
    let samples_per_symbol = 3.2 * f64::from(params.timing().bins); // = 3.2 * 2^K
    let width_frac = (DEFAULT_EDGE_WIDTH_SAMPLES / samples_per_symbol).min(0.5);
    let top = params.f_carrier + params.bw;
    let crossing = top - params.bw * width_frac;
    let gap_rf = crate::frontend::saw_gain_db(saw, top) - crate::frontend::saw_gain_db(saw, crossing);
    // Squared envelope: RF dB count double. Floor keeps u_high strictly
    // below the peak even on a pathological flat table.
    (2.0 * gap_rf).max(0.1)
}

impl ThresholdCalibration {
    pub fn single(a_max: f64, g_db: f64, u_f: f64) -> Self {
        Self { a_max, g_db, u_f, table: Vec::new() }
    }

    /// Calibration resolved for a link distance: the nearest table bucket,
    /// or the inline point when no table is stored.
    pub fn resolved_at(&self, distance: f64) -> Self {
        let nearest = self
            .table
            .iter()
            .min_by(|a, b| {
                (a.0 - distance).abs().partial_cmp(&(b.0 - distance).abs()).unwrap()
            })
            .map(|(_, p)| *p);
        match nearest {
            Some(p) => Self::single(p.a_max, self.g_db, p.u_f),
            None => Self::single(self.a_max, self.g_db, self.u_f),
        }
    }
}

/// Derive the comparator thresholds: `u_high = a_max * 10^(-g/20)`,
/// `u_low = u_high * u_f`.
pub fn thresholds(cal: &ThresholdCalibration) -> Result<ComparatorConfig> {
    let u_high = cal.a_max * 10f64.powf(-cal.g_db / 20.0);
    let u_low = u_high * cal.u_f;
    let cfg = ComparatorConfig { u_high, u_low };
    cfg.validate()?;
    Ok(cfg)
}

/// Sampler rates for a symbol configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingRates {
    /// Nyquist bound `2 bw / 2^(sf - k)`.
    pub theory_hz: f64,
    /// Conservative rate actually used, `3.2 bw / 2^(sf - k)`.
    pub configured_hz: f64,
}

pub fn sampling_rates(params: &SymbolParams) -> SamplingRates {
    let denom = (1u64 << (params.sf - params.k_bits)) as f64;
    SamplingRates { theory_hz: 2.0 * params.bw / denom, configured_hz: 3.2 * params.bw / denom }
}

/// Decimate to the sampler rate (nearest-sample pick) and fold the
/// comparator over the samples, starting low.
pub fn quantize(stream: &RealStream, cfg: &ComparatorConfig, rate: f64) -> Result<BitStream> {
    if rate > stream.rate {
        return Err(Error::Config(format!(
            "sampler rate {rate} Hz above stream rate {} Hz",
            stream.rate
        )));
    }
    let n_out = (stream.len() as f64 * rate / stream.rate).floor() as usize;
    let mut bits = Vec::with_capacity(n_out);
    let mut state = ComparatorState::default();
    for m in 0..n_out {
        let idx = ((m as f64 * stream.rate / rate).round() as usize).min(stream.len() - 1);
        let (b, next) = comparator_step(state, stream.samples[idx], cfg);
        bits.push(b);
        state = next;
    }
    Ok(BitStream::new(rate, stream.t0, Domain::Binary, bits))
}

/// Trailing-edge positions (index of the first low sample after a high run).
fn trailing_edges(bits: &[bool]) -> Vec<f64> {
    let mut edges = Vec::new();
    for i in 1..bits.len() {
        if bits[i - 1] && !bits[i] {
            edges.push(i as f64);
        }
    }
    if *bits.last().unwrap_or(&false) {
        edges.push(bits.len() as f64);
    }
    edges
}

/// Match tolerance for preamble pulse spacing, in sampler samples. Looser
/// than the decoder's half-bin so edge jitter breaks payload symbols before
/// it breaks frame detection.
const PREAMBLE_EDGE_TOL: f64 = 2.2;

/// Find the preamble (value-0 chirps pulse at each symbol end) and return
/// the fractional sample offset of the first payload symbol, `none` when
/// fewer than `preamble_len - 2` of the pulses line up. Candidates must
/// also show a quiet sync gap: the idle-carrier stretch after the last
/// up-chirp carries no trailing edges, which screens out noise that
/// happens to imitate the pulse train.
pub fn detect_preamble(
    bits: &BitStream,
    params: &SymbolParams,
    preamble_len: usize,
    sync_len: f64,
) -> Option<f64> {
    let t_sym_samples = params.timing().t_symbol * bits.rate;
    let edges = trailing_edges(&bits.samples);
    if edges.is_empty() {
        return None;
    }
    let need = preamble_len.saturating_sub(2);
    let mut best: Option<(usize, f64)> = None; // (hits, anchor edge)
    for &e in &edges {
        let mut hits = 0;
        for i in 0..preamble_len {
            let target = e + i as f64 * t_sym_samples;
            if edges.iter().any(|&x| (x - target).abs() <= PREAMBLE_EDGE_TOL) {
                hits += 1;
            }
        }
        if hits < need {
            continue;
        }
        let gap_lo = e + (preamble_len as f64 - 1.0 + 0.3) * t_sym_samples;
        let gap_hi = e + (preamble_len as f64 - 1.0 + sync_len - 0.3) * t_sym_samples;
        if edges.iter().any(|&x| x > gap_lo && x < gap_hi) {
            continue;
        }
        // Every edge of a genuine preamble sits on the symbol grid; more
        // than a couple of stray edges in the span means noise.
        let span_hi = e + (preamble_len as f64 - 1.0) * t_sym_samples + PREAMBLE_EDGE_TOL;
        let off_grid = edges
            .iter()
            .filter(|&&x| x >= e - PREAMBLE_EDGE_TOL && x <= span_hi)
            .filter(|&&x| {
                let k = ((x - e) / t_sym_samples).round();
                (x - e - k * t_sym_samples).abs() > PREAMBLE_EDGE_TOL
            })
            .count();
        if off_grid > 2 {
            continue;
        }
        if best.map_or(true, |(h, _)| hits > h) {
            best = Some((hits, e));
        }
    }
    best.map(|(_, e)| e + (preamble_len as f64 - 1.0 + sync_len) * t_sym_samples)
}

/// Guard shifting the window used for edge collection, in sampler samples.
/// A value-0 symbol drops exactly at the window boundary; the guard keeps
/// that edge with its own window instead of leaking it to the next one.
const DECODE_EDGE_GUARD: f64 = 1.0;

/// Decode one symbol window by locating the trailing edge of the high run
/// (the wrap cliff): `value = round(2^K (1 - t_F / T)) mod 2^K`. Runs may
/// straddle window boundaries, so only a high-to-low transition counts;
/// ties go to the later edge. A window that is still high at its boundary
/// wrapped at exactly the boundary (value 0): when the next symbol starts
/// near the top of the skirt, the hysteresis hold bridges the cliff and no
/// transition fires inside the window at all. `None` flags an erasure.
pub fn decode_symbol(bits: &BitStream, window_start: f64, params: &SymbolParams) -> Option<u16> {
    let t_sym_samples = params.timing().t_symbol * bits.rate;
    let bins = params.timing().bins as f64;
    let begin = (window_start + DECODE_EDGE_GUARD).ceil().max(1.0) as usize;
    let end = ((window_start + t_sym_samples + DECODE_EDGE_GUARD).ceil() as usize)
        .min(bits.len());
    if begin >= end {
        return None;
    }
    match (begin..end).rev().find(|&i| bits.samples[i - 1] && !bits.samples[i]) {
        Some(edge) => {
            // The cliff sits between samples edge-1 and edge.
            let t_f = (edge as f64 - 0.5 - window_start) / t_sym_samples;
            let value = (bins * (1.0 - t_f)).round() as i64;
            Some((value.rem_euclid(bins as i64)) as u16)
        }
        None if bits.samples[end - 1] => Some(0),
        None => None,
    }
}

/// Normalized cross-correlation over all lags. The score is clamped to
/// [0, 1]; it reaches 1 only when the window is a positive scalar multiple
/// of the template.
pub fn correlate(stream: &RealStream, template: &RealStream) -> Result<(usize, f64)> {
    let (x, t) = (&stream.samples, &template.samples);
    if x.is_empty() || t.is_empty() {
        return Err(Error::Domain("correlate on empty input".into()));
    }
    if t.len() > x.len() {
        return Err(Error::Domain("template longer than stream".into()));
    }
    let t_norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
    if t_norm == 0.0 {
        return Err(Error::Domain("zero-energy template".into()));
    }
    let m = t.len();
    let mut window_energy: f64 = x[..m].iter().map(|v| v * v).sum();
    let mut best = (0usize, f64::NEG_INFINITY);
    for lag in 0..=x.len() - m {
        if lag > 0 {
            window_energy += x[lag + m - 1] * x[lag + m - 1] - x[lag - 1] * x[lag - 1];
        }
        let dot: f64 = x[lag..lag + m].iter().zip(t.iter()).map(|(a, b)| a * b).sum();
        let denom = window_energy.max(0.0).sqrt() * t_norm;
        let score = if denom > 0.0 { (dot / denom).clamp(0.0, 1.0) } else { 0.0 };
        if score > best.1 {
            best = (lag, score);
        }
    }
    Ok(best)
}

/// Normalized correlation at a fixed alignment (no lag search).
fn ncc_at(window: &[f64], template: &[f64]) -> f64 {
    let m = window.len().min(template.len());
    let dot: f64 = window[..m].iter().zip(&template[..m]).map(|(a, b)| a * b).sum();
    let ex: f64 = window[..m].iter().map(|v| v * v).sum();
    let et: f64 = template[..m].iter().map(|v| v * v).sum();
    let denom = (ex * et).sqrt();
    if denom > 0.0 {
        (dot / denom).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Which stages of the receive chain are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemodMode {
    /// SAW + envelope detector + comparator.
    Vanilla,
    /// Adds the cyclic-frequency shifting stage.
    Shifted,
    /// Shifted, plus correlation fallback for erased symbols.
    Correlated,
}

impl DemodMode {
    pub const ALL: [DemodMode; 3] = [DemodMode::Vanilla, DemodMode::Shifted, DemodMode::Correlated];

    pub fn name(&self) -> &'static str {
        match self {
            DemodMode::Vanilla => "vanilla",
            DemodMode::Shifted => "shifted",
            DemodMode::Correlated => "correlated",
        }
    }
}

impl std::str::FromStr for DemodMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vanilla" => Ok(DemodMode::Vanilla),
            "shifted" => Ok(DemodMode::Shifted),
            "correlated" => Ok(DemodMode::Correlated),
            other => Err(Error::Config(format!(
                "unknown mode '{other}' (expected vanilla|shifted|correlated)"
            ))),
        }
    }
}

/// Analog chain configuration shared by every frame of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverChain {
    pub saw: SawResponse,
    /// Low-noise amplifier between the SAW filter and the detector, dB.
    pub lna_gain_db: f64,
    pub env: EnvelopeDetectorConfig,
    pub shift: ShiftConfig,
    /// Detector-referred noise (DC + flicker). AWGN enters at the antenna
    /// via the channel model instead.
    pub noise: NoiseModel,
    pub noise_seed: u64,
    pub preamble_len: usize,
    pub sync_len: f64,
}

pub const DEFAULT_LNA_GAIN_DB: f64 = 20.0;

impl ReceiverChain {
    pub fn default_for(params: &SymbolParams) -> Self {
        Self {
            saw: SawResponse::default(),
            lna_gain_db: DEFAULT_LNA_GAIN_DB,
            env: EnvelopeDetectorConfig { k_att: 1.0, lpf_cutoff_hz: params.bw / 2.0 },
            shift: ShiftConfig::default_for_bw(params.bw),
            noise: NoiseModel::default(),
            noise_seed: 0,
            preamble_len: DEFAULT_PREAMBLE_LEN,
            sync_len: DEFAULT_SYNC_SYMBOLS,
        }
    }

    fn detector_noise(&self) -> Option<DetectorNoise<'_>> {
        if self.noise.baseband_silent() {
            None
        } else {
            Some(DetectorNoise { model: &self.noise, seed: self.noise_seed })
        }
    }

    /// Antenna-referred stream to detected envelope for the given mode.
    pub fn detect(&self, stream: &IqStream, params: &SymbolParams, mode: DemodMode) -> Result<RealStream> {
        let transformed = apply_saw(stream, &self.saw, params.f_carrier)?;
        let amplified = transformed.scaled_db(self.lna_gain_db);
        match mode {
            DemodMode::Vanilla => envelope_detect(&amplified, &self.env, self.detector_noise()),
            DemodMode::Shifted | DemodMode::Correlated => {
                cyclic_shift(&amplified, &self.shift, &self.env, self.detector_noise())
            }
        }
    }
}

/// Noiseless per-value envelope templates at the simulation rate, for the
/// correlation fallback.
pub fn chirp_templates(params: &SymbolParams, chain: &ReceiverChain, rate: f64) -> Result<Vec<Vec<f64>>> {
    let bins = params.timing().bins;
    let mut out = Vec::with_capacity(bins as usize);
    for v in 0..bins as u16 {
        let chirp = gen_chirp(params, v, rate, 1.0)?;
        let transformed = apply_saw(&chirp, &chain.saw, params.f_carrier)?;
        let env = envelope_detect(&transformed, &chain.env, None)?;
        out.push(env.samples);
    }
    Ok(out)
}

/// Full-frame demodulation. Returns `None` when no preamble is found;
/// otherwise one entry per payload window, with `None` marking a window
/// that stayed erased.
pub fn demodulate_frame(
    stream: &IqStream,
    params: &SymbolParams,
    mode: DemodMode,
    cal: &ThresholdCalibration,
    chain: &ReceiverChain,
) -> Result<Option<Vec<Option<u16>>>> {
    let envelope = chain.detect(stream, params, mode)?;
    let cmp = thresholds(cal)?;
    let rates = sampling_rates(params);
    let bits = quantize(&envelope, &cmp, rates.configured_hz)?;

    let offset = match detect_preamble(&bits, params, chain.preamble_len, chain.sync_len) {
        Some(o) => o,
        None => return Ok(None),
    };

    let t_sym_samples = params.timing().t_symbol * bits.rate;
    let n_windows = ((bits.len() as f64 - offset) / t_sym_samples).round().max(0.0) as usize;
    let mut symbols: Vec<Option<u16>> = (0..n_windows)
        .map(|i| decode_symbol(&bits, offset + i as f64 * t_sym_samples, params))
        .collect();

    if mode == DemodMode::Correlated && symbols.iter().any(Option::is_none) {
        let templates = chirp_templates(params, chain, stream.rate)?;
        let w = (params.timing().t_symbol * envelope.rate).round() as usize;
        let offset_env = offset / bits.rate * envelope.rate;
        let t_sym_env = params.timing().t_symbol * envelope.rate;
        for (i, slot) in symbols.iter_mut().enumerate() {
            if slot.is_some() {
                continue;
            }
            let begin = (offset_env + i as f64 * t_sym_env).round() as usize;
            if begin >= envelope.len() {
                continue;
            }
            let end = (begin + w).min(envelope.len());
            let window = &envelope.samples[begin..end];
            let best = templates
                .iter()
                .enumerate()
                .map(|(v, t)| (v as u16, ncc_at(window, t)))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            if let Some((v, score)) = best {
                if score > 0.0 {
                    *slot = Some(v);
                }
            }
        }
    }
    Ok(Some(symbols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::NoiseModel;
    use crate::waveform::{build_frame, Frame};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampling_rate_table_points() {
        let p = SymbolParams::new(7, 500e3, 1).unwrap();
        let r = sampling_rates(&p);
        assert!((r.theory_hz - 15_625.0).abs() < 1e-9);
        assert!((r.configured_hz - 25_000.0).abs() < 1e-9);

        let p = SymbolParams::new(12, 500e3, 1).unwrap();
        let r = sampling_rates(&p);
        assert!((r.theory_hz - 488.28125).abs() < 1e-9);
    }

    #[test]
    fn threshold_formulas() {
        let cal = ThresholdCalibration::single(1.0, 0.0, 0.5);
        assert!((thresholds(&cal).unwrap().u_high - 1.0).abs() < 1e-12);

        let cal = ThresholdCalibration::single(1.0, 6.0, 0.8);
        let cfg = thresholds(&cal).unwrap();
        assert!((cfg.u_high - 0.5012).abs() < 1e-4);
        assert!((cfg.u_low - 0.4010).abs() < 1e-4);

        assert!(thresholds(&ThresholdCalibration::single(1.0, 3.0, 1.2)).is_err());
        assert!(thresholds(&ThresholdCalibration::single(0.0, 3.0, 0.8)).is_err());
    }

    #[test]
    fn calibration_table_lookup() {
        let mut cal = ThresholdCalibration::single(1.0, 3.0, 0.8);
        cal.table = vec![
            (10.0, CalPoint { a_max: 2.0, u_f: 0.8 }),
            (50.0, CalPoint { a_max: 0.5, u_f: 0.7 }),
        ];
        let near = cal.resolved_at(12.0);
        assert_eq!(near.a_max, 2.0);
        let far = cal.resolved_at(45.0);
        assert_eq!((far.a_max, far.u_f), (0.5, 0.7));
    }

    #[test]
    fn comparator_eq3_cases() {
        let cfg = ComparatorConfig { u_high: 1.0, u_low: 0.5 };
        let low = ComparatorState { last_output: false };
        let high = ComparatorState { last_output: true };
        // (low, a >= U_H) -> high
        assert!(comparator_step(low, 1.2, &cfg).0);
        // (low, U_L <= a < U_H) -> low
        assert!(!comparator_step(low, 0.7, &cfg).0);
        // (high, U_L <= a < U_H) -> high (hysteresis hold)
        assert!(comparator_step(high, 0.7, &cfg).0);
        // (high, a < U_L) -> low
        assert!(!comparator_step(high, 0.4, &cfg).0);
    }

    fn count_runs(bits: &[bool]) -> usize {
        let mut runs = 0;
        let mut prev = false;
        for &b in bits {
            if b && !prev {
                runs += 1;
            }
            prev = b;
        }
        runs
    }

    fn quantize_full_rate(samples: Vec<f64>, cfg: &ComparatorConfig) -> Vec<bool> {
        let s = RealStream::new(1000.0, 0.0, Domain::Baseband, samples);
        quantize(&s, cfg, 1000.0).unwrap().samples
    }

    #[test]
    fn quantize_simple_shapes() {
        let cfg = ComparatorConfig { u_high: 0.8, u_low: 0.4 };
        let below: Vec<f64> = vec![0.3; 64];
        assert!(quantize_full_rate(below, &cfg).iter().all(|&b| !b));

        let ramp: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let bits = quantize_full_rate(ramp, &cfg);
        assert_eq!(count_runs(&bits), 1);
    }

    /// Envelope with a valley dipping between the two thresholds inside the
    /// high region, plus an early bump between them.
    fn dipping_envelope(u_low: f64, u_high: f64) -> Vec<f64> {
        let mid = (u_low + u_high) / 2.0;
        let mut v = vec![0.1; 10];
        v.extend(vec![mid; 5]); // pre-pulse: above U_L, below U_H
        v.extend(vec![0.1; 10]);
        v.extend(vec![u_high + 0.2; 8]); // high region
        v.extend(vec![mid; 4]); // dip between thresholds
        v.extend(vec![u_high + 0.2; 8]);
        v.extend(vec![0.1; 10]);
        v
    }

    #[test]
    fn double_threshold_beats_single() {
        let (u_low, u_high) = (0.4, 0.8);
        let env = dipping_envelope(u_low, u_high);

        let double = ComparatorConfig { u_high, u_low };
        assert_eq!(count_runs(&quantize_full_rate(env.clone(), &double)), 1);

        // Single high threshold: the dip splits the run.
        let only_high = ComparatorConfig { u_high, u_low: u_high };
        assert!(count_runs(&quantize_full_rate(env.clone(), &only_high)) >= 2);

        // Single low threshold: the pre-pulse makes a false early run.
        let only_low = ComparatorConfig { u_high: u_low, u_low };
        let bits = quantize_full_rate(env, &only_low);
        assert!(bits[12], "pre-pulse not flagged high by the low threshold");
        assert!(count_runs(&bits) >= 2);
    }

    #[test]
    fn quantize_rejects_upsampling() {
        let s = RealStream::new(100.0, 0.0, Domain::Baseband, vec![0.0; 10]);
        let cfg = ComparatorConfig { u_high: 1.0, u_low: 0.5 };
        assert!(quantize(&s, &cfg, 200.0).is_err());
    }

    /// Synthetic comparator output for a frame: one pulse ending at each
    /// preamble symbol boundary, then payload pulses.
    fn synthetic_preamble_bits(params: &SymbolParams, erase: Option<usize>) -> BitStream {
        let rate = sampling_rates(params).configured_hz;
        let t_sym = params.timing().t_symbol * rate;
        let total = (12.25 + 4.0) * t_sym;
        let mut bits = vec![false; total.ceil() as usize];
        for i in 0..10 {
            if erase == Some(i) {
                continue;
            }
            let end = ((i + 1) as f64 * t_sym).round() as usize;
            for j in end.saturating_sub(3)..end {
                bits[j] = true;
            }
        }
        BitStream::new(rate, 0.0, Domain::Binary, bits)
    }

    #[test]
    fn preamble_detection() {
        let p = SymbolParams::new(7, 500e3, 3).unwrap();
        let rate = sampling_rates(&p).configured_hz;
        let t_sym = p.timing().t_symbol * rate;

        let bits = synthetic_preamble_bits(&p, None);
        let offset = detect_preamble(&bits, &p, 10, 2.25).expect("preamble not found");
        assert!((offset - 12.25 * t_sym).abs() <= 1.0, "offset {offset}");

        // One erased pulse still detects (8-of-10 rule).
        let bits = synthetic_preamble_bits(&p, Some(4));
        assert!(detect_preamble(&bits, &p, 10, 2.25).is_some());

        // All-zero input: nothing to find.
        let zeros = BitStream::new(rate, 0.0, Domain::Binary, vec![false; 4000]);
        assert!(detect_preamble(&zeros, &p, 10, 2.25).is_none());
    }

    #[test]
    fn decode_symbol_mapping() {
        let p = SymbolParams::new(7, 500e3, 2).unwrap();
        let rate = sampling_rates(&p).configured_hz;
        let t_sym = p.timing().t_symbol * rate; // 12.8 samples

        let window = |t_f_frac: f64| {
            let mut bits = vec![false; t_sym.ceil() as usize + 2];
            let end = (t_f_frac * t_sym).round() as usize;
            for j in end.saturating_sub(3)..end {
                bits[j] = true;
            }
            BitStream::new(rate, 0.0, Domain::Binary, bits)
        };

        // t_F = T -> value 0; t_F = T/2, K=2 -> value 2.
        assert_eq!(decode_symbol(&window(1.0), 0.0, &p), Some(0));
        assert_eq!(decode_symbol(&window(0.5), 0.0, &p), Some(2));
        assert_eq!(decode_symbol(&window(0.75), 0.0, &p), Some(1));

        let empty = BitStream::new(rate, 0.0, Domain::Binary, vec![false; 20]);
        assert_eq!(decode_symbol(&empty, 0.0, &p), None);
    }

    #[test]
    fn rate_sufficiency_bins_spacing() {
        for sf in 7..=12u8 {
            for k in 1..=5u8.min(sf) {
                let p = SymbolParams::new(sf, 500e3, k).unwrap();
                let rate = sampling_rates(&p).configured_hz;
                let spacing = p.timing().t_symbol * rate / p.timing().bins as f64;
                assert!(spacing >= 3.0, "sf {sf} k {k}: spacing {spacing}");
            }
        }
    }

    #[test]
    fn correlate_self_and_shifted() {
        let template = RealStream::new(
            1000.0,
            0.0,
            Domain::Baseband,
            (0..64).map(|i| ((i as f64) * 0.3).sin().abs()).collect(),
        );
        let (lag, score) = correlate(&template, &template).unwrap();
        assert_eq!(lag, 0);
        assert!((score - 1.0).abs() < 1e-12);

        let mut delayed = vec![0.0; 17];
        delayed.extend_from_slice(&template.samples);
        delayed.extend(vec![0.0; 9]);
        let stream = RealStream::new(1000.0, 0.0, Domain::Baseband, delayed);
        let (lag, score) = correlate(&stream, &template).unwrap();
        assert_eq!(lag, 17);
        assert!((score - 1.0).abs() < 1e-12);

        let empty = RealStream::new(1000.0, 0.0, Domain::Baseband, vec![]);
        assert!(correlate(&empty, &template).is_err());
    }

    #[test]
    fn correlate_noise_false_alarm_rate() {
        let p = SymbolParams::new(7, 500e3, 2).unwrap();
        let chain = ReceiverChain::default_for(&p);
        let rate = 2.0 * p.bw;
        let template_samples = chirp_templates(&p, &chain, rate).unwrap().remove(0);
        let m = template_samples.len();
        let template = RealStream::new(rate, 0.0, Domain::Baseband, template_samples);

        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let trials = 10_000;
        let mut above = 0;
        for _ in 0..trials {
            let noise: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = RealStream::new(rate, 0.0, Domain::Baseband, noise);
            let (_, score) = correlate(&w, &template).unwrap();
            if score > 0.5 {
                above += 1;
            }
        }
        assert!(
            (above as f64) < 0.01 * trials as f64,
            "false alarms: {above}/{trials}"
        );
    }

    fn clean_cal(params: &SymbolParams, chain: &ReceiverChain, stream: &IqStream, mode: DemodMode) -> ThresholdCalibration {
        let mut quiet = chain.clone();
        quiet.noise = NoiseModel { awgn_density: 0.0, ..NoiseModel::default() };
        let env = quiet.detect(stream, params, mode).unwrap();
        ThresholdCalibration::single(env.peak().unwrap(), DEFAULT_THRESHOLD_GAP_DB, DEFAULT_U_F)
    }

    #[test]
    fn noiseless_roundtrip_vanilla() {
        let p = SymbolParams::new(7, 500e3, 2).unwrap();
        let rate = 8.0 * p.bw;
        let payload: Vec<u16> = vec![0, 1, 2, 3, 3, 2, 1, 0, 2, 0, 3, 1, 1, 0, 2, 3];
        let frame = Frame::new(p, payload.clone()).unwrap();
        let tx = build_frame(&frame, rate, 1.0).unwrap();
        let chain = ReceiverChain::default_for(&p);
        let cal = clean_cal(&p, &chain, &tx, DemodMode::Vanilla);

        let got = demodulate_frame(&tx, &p, DemodMode::Vanilla, &cal, &chain)
            .unwrap()
            .expect("preamble missed");
        let got: Vec<u16> = got.into_iter().map(|s| s.expect("erasure")).collect();
        assert_eq!(got, payload);
    }

    #[test]
    fn pure_noise_yields_none() {
        let p = SymbolParams::new(7, 500e3, 2).unwrap();
        let rate = 8.0 * p.bw;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples: Vec<num_complex::Complex64> = (0..40_000)
            .map(|_| num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let noise = IqStream::new(rate, 0.0, Domain::PassbandEquivalent, samples);
        let chain = ReceiverChain::default_for(&p);
        let cal = ThresholdCalibration::single(1.0, DEFAULT_THRESHOLD_GAP_DB, DEFAULT_U_F);
        let out = demodulate_frame(&noise, &p, DemodMode::Vanilla, &cal, &chain).unwrap();
        assert!(out.is_none());
    }
}
