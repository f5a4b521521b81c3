//! Experiment configuration: one JSON document with sections for the
//! symbol, link, noise, SAW, shift stage, comparator and MAC scenario.
//! Every field has a default, so `{}` is a valid config.

use serde::{Deserialize, Serialize};

use crate::channel::{calibrate_pl0, LinkBudget, NoiseModel};
use crate::demod::{
    DemodMode, ReceiverChain, DEFAULT_LNA_GAIN_DB, DEFAULT_THRESHOLD_GAP_DB, DEFAULT_U_F,
};
use crate::frontend::{
    EnvelopeDetectorConfig, SawResponse, ShiftConfig, DEFAULT_BAND_HI_HZ, DEFAULT_BAND_LO_HZ,
    DEFAULT_DELTA_PHI_RAD, DEFAULT_IF_GAIN_DB, DEFAULT_INSERTION_LOSS_DB,
};
use crate::waveform::{SymbolParams, DEFAULT_PREAMBLE_LEN, DEFAULT_SYNC_SYMBOLS};
use crate::{Error, Result};

/// Default detector-referred noise, in envelope-output units. The values
/// are calibrated so that the vanilla chain under the default link budget
/// runs out of range at a few tens of meters while the shifted chain,
/// which strips this baseband noise, reaches roughly twice as far.
pub const DEFAULT_DETECTOR_DC: f64 = 2.0e-5;
pub const DEFAULT_FLICKER_RMS: f64 = 1.2e-5;
/// White-noise multiplier on the thermal floor, folding in ambient RF and
/// receiver-referred noise beyond the 6 dB front-end figure.
pub const DEFAULT_AWGN_DENSITY: f64 = 4.0;

fn d_sf() -> u8 {
    7
}
fn d_bw() -> f64 {
    500e3
}
fn d_cr() -> u8 {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolSection {
    pub sf: u8,
    pub bw_hz: f64,
    /// Coding rate: bits per chirp (K).
    pub cr: u8,
    /// Carrier frequency; when omitted the chirp band is placed so it ends
    /// at the top of the SAW critical band, where the skirt is measured.
    pub f_carrier_hz: Option<f64>,
}

impl Default for SymbolSection {
    fn default() -> Self {
        Self { sf: d_sf(), bw_hz: d_bw(), cr: d_cr(), f_carrier_hz: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub pl_exponent: f64,
    /// Reference path loss; when omitted it is solved so RSS(180 m) is the
    /// -85.8 dBm sensitivity point.
    pub pl0_db: Option<f64>,
    /// Noise floor in the chirp bandwidth; default -174 + 10 log10(bw) + 6.
    pub noise_floor_dbm: Option<f64>,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            tx_power_dbm: 20.0,
            tx_gain_dbi: 3.0,
            rx_gain_dbi: 3.0,
            pl_exponent: 2.7,
            pl0_db: None,
            noise_floor_dbm: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub awgn_density: f64,
    pub dc_offset: f64,
    /// Defaults to bw/4: the flicker hump stays under a quarter of the
    /// chirp bandwidth.
    pub flicker_corner_hz: Option<f64>,
    pub flicker_gain: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            awgn_density: DEFAULT_AWGN_DENSITY,
            dc_offset: DEFAULT_DETECTOR_DC,
            flicker_corner_hz: None,
            flicker_gain: DEFAULT_FLICKER_RMS,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SawSection {
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    pub insertion_loss_db: f64,
    /// Inline `(frequency_hz, gain_db)` table; overrides the built-in skirt.
    pub gain_table: Option<Vec<(f64, f64)>>,
    /// CSV file of `frequency_hz,gain_db` rows, e.g. a measured filter.
    pub csv_path: Option<String>,
}

impl Default for SawSection {
    fn default() -> Self {
        Self {
            band_lo_hz: DEFAULT_BAND_LO_HZ,
            band_hi_hz: DEFAULT_BAND_HI_HZ,
            insertion_loss_db: DEFAULT_INSERTION_LOSS_DB,
            gain_table: None,
            csv_path: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShiftSection {
    /// IF clock; defaults to 4 bw.
    pub delta_f_hz: Option<f64>,
    pub delta_phi_rad: f64,
    pub if_gain_db: f64,
    /// IF band-pass width; defaults to 2 bw.
    pub if_bw_hz: Option<f64>,
    /// Final low-pass; defaults to bw/2.
    pub lpf_cutoff_hz: Option<f64>,
}

impl Default for ShiftSection {
    fn default() -> Self {
        Self {
            delta_f_hz: None,
            delta_phi_rad: DEFAULT_DELTA_PHI_RAD,
            if_gain_db: DEFAULT_IF_GAIN_DB,
            if_bw_hz: None,
            lpf_cutoff_hz: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparatorSection {
    /// Gap between the envelope peak and `u_high`, dB.
    pub g_db: f64,
    /// `u_low / u_high`.
    pub u_f: f64,
}

impl Default for ComparatorSection {
    fn default() -> Self {
        Self { g_db: DEFAULT_THRESHOLD_GAP_DB, u_f: DEFAULT_U_F }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub n_tags: usize,
    pub n_slots: usize,
    pub uplink_p: f64,
    pub max_retx: u32,
    pub jammed_p: f64,
    pub clean_p: f64,
    pub n_packets: u64,
    pub hop_window: u64,
    /// Distance of the downlink used to deliver MAC commands.
    pub downlink_distance_m: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            n_tags: 3,
            n_slots: 3,
            uplink_p: 0.456,
            max_retx: 3,
            jammed_p: 0.47,
            clean_p: 0.92,
            n_packets: 100_000,
            hop_window: 100,
            downlink_distance_m: 50.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub symbol: SymbolSection,
    pub link: LinkSection,
    pub noise: NoiseSection,
    pub saw: SawSection,
    pub shift: ShiftSection,
    pub comparator: ComparatorSection,
    pub scenario: ScenarioSection,

    pub mode: DemodMode,
    pub distances: Vec<f64>,
    /// Frames per (distance, repeat) cell.
    pub n_frames: u32,
    pub repeats: u32,
    pub payload_len: usize,
    pub seed: u64,
    /// Simulation rate as a multiple of bw; default 8, or 20 when the
    /// shift stage is active (its mixing products need the headroom).
    pub oversampling: Option<f64>,
    pub max_distance_m: f64,
    pub lna_gain_db: f64,
    pub k_att: f64,
    /// Envelope-detector low-pass; defaults to bw/2.
    pub env_lpf_cutoff_hz: Option<f64>,
    pub preamble_len: usize,
    pub sync_symbols: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            symbol: SymbolSection::default(),
            link: LinkSection::default(),
            noise: NoiseSection::default(),
            saw: SawSection::default(),
            shift: ShiftSection::default(),
            comparator: ComparatorSection::default(),
            scenario: ScenarioSection::default(),
            mode: DemodMode::Vanilla,
            distances: vec![10.0, 20.0, 50.0, 100.0, 150.0],
            n_frames: 100,
            repeats: 10,
            payload_len: 32,
            seed: 1,
            oversampling: None,
            max_distance_m: 400.0,
            lna_gain_db: DEFAULT_LNA_GAIN_DB,
            k_att: 1.0,
            env_lpf_cutoff_hz: None,
            preamble_len: DEFAULT_PREAMBLE_LEN,
            sync_symbols: DEFAULT_SYNC_SYMBOLS,
        }
    }
}

/// Paper-scale run: 1000 frames repeated 100 times per point.
pub const FULL_SCALE_FRAMES: u32 = 1000;
pub const FULL_SCALE_REPEATS: u32 = 100;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.resolve()?; // surface config errors at load time
        Ok(cfg)
    }

    /// Scale frame counts up to the full published workload.
    pub fn set_full_scale(&mut self) {
        self.n_frames = FULL_SCALE_FRAMES;
        self.repeats = FULL_SCALE_REPEATS;
    }

    /// Validate and materialize the runtime objects.
    pub fn resolve(&self) -> Result<Resolved> {
        let bw = self.symbol.bw_hz;
        let f_carrier = self.symbol.f_carrier_hz.unwrap_or(self.saw.band_hi_hz - bw);
        let params = SymbolParams::with_carrier(self.symbol.sf, bw, self.symbol.cr, f_carrier)?;

        let noise = NoiseModel {
            awgn_density: self.noise.awgn_density,
            dc_offset: self.noise.dc_offset,
            flicker_corner_hz: self.noise.flicker_corner_hz.unwrap_or(bw / 4.0),
            flicker_gain: self.noise.flicker_gain,
        };
        noise.validate()?;

        let eirp_rx = self.link.tx_power_dbm + self.link.tx_gain_dbi + self.link.rx_gain_dbi;
        let link = LinkBudget {
            tx_power_dbm: self.link.tx_power_dbm,
            tx_gain_dbi: self.link.tx_gain_dbi,
            rx_gain_dbi: self.link.rx_gain_dbi,
            pl0_db: self.link.pl0_db.unwrap_or_else(|| {
                calibrate_pl0(
                    eirp_rx,
                    self.link.pl_exponent,
                    crate::channel::SENSITIVITY_RSS_DBM,
                    crate::channel::SENSITIVITY_DISTANCE_M,
                )
            }),
            pl_exponent: self.link.pl_exponent,
            noise_floor_dbm: self
                .link
                .noise_floor_dbm
                .unwrap_or(-174.0 + 10.0 * bw.log10() + 6.0),
            noise_ref_bw_hz: bw,
            rf_noise: noise.clone(),
        };
        link.validate()?;

        let saw = match (&self.saw.csv_path, &self.saw.gain_table) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)?;
                SawResponse::from_csv(&text, self.saw.insertion_loss_db)?
            }
            (None, Some(table)) => {
                let resp = SawResponse {
                    band_lo_hz: self.saw.band_lo_hz,
                    band_hi_hz: self.saw.band_hi_hz,
                    gain_table: table.clone(),
                    insertion_loss_db: self.saw.insertion_loss_db,
                };
                resp.validate()?;
                resp
            }
            (None, None) => SawResponse {
                insertion_loss_db: self.saw.insertion_loss_db,
                ..SawResponse::default()
            },
        };

        let shift = ShiftConfig {
            delta_f_hz: self.shift.delta_f_hz.unwrap_or(4.0 * bw),
            delta_phi_rad: self.shift.delta_phi_rad,
            if_gain_db: self.shift.if_gain_db,
            if_bw_hz: self.shift.if_bw_hz.unwrap_or(2.0 * bw),
            lpf_cutoff_hz: self.shift.lpf_cutoff_hz.unwrap_or(bw / 2.0),
        };
        shift.validate(bw)?;

        if !(0.0 < self.comparator.u_f && self.comparator.u_f < 1.0) {
            return Err(Error::Config(format!(
                "comparator u_f {} must be in (0, 1)",
                self.comparator.u_f
            )));
        }
        if self.comparator.g_db <= 0.0 {
            return Err(Error::Config("comparator g_db must be positive".into()));
        }
        if self.distances.is_empty() {
            return Err(Error::Config("distances must not be empty".into()));
        }
        if self.n_frames < 1 {
            return Err(Error::Config("n_frames must be at least 1".into()));
        }
        if self.payload_len < 1 {
            return Err(Error::Config("payload_len must be at least 1".into()));
        }

        let osr = self.oversampling.unwrap_or(match self.mode {
            DemodMode::Vanilla => 8.0,
            _ => 20.0,
        });
        let rate = osr * bw;
        let needed = 2.0 * (2.0 * shift.delta_f_hz + shift.if_bw_hz / 2.0);
        if self.mode != DemodMode::Vanilla && rate < needed {
            return Err(Error::Config(format!(
                "oversampling {osr} x bw cannot carry the shift products; need >= {} x bw",
                (needed / bw).ceil()
            )));
        }

        let chain = ReceiverChain {
            saw,
            lna_gain_db: self.lna_gain_db,
            env: EnvelopeDetectorConfig {
                k_att: self.k_att,
                lpf_cutoff_hz: self.env_lpf_cutoff_hz.unwrap_or(bw / 2.0),
            },
            shift,
            noise,
            noise_seed: 0,
            preamble_len: self.preamble_len,
            sync_len: self.sync_symbols,
        };
        chain.env.validate(rate)?;

        Ok(Resolved { params, link, chain, rate, mode: self.mode })
    }
}

/// Runtime objects materialized from a config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: SymbolParams,
    pub link: LinkBudget,
    pub chain: ReceiverChain,
    /// Simulation sample rate, Hz.
    pub rate: f64,
    pub mode: DemodMode,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_is_a_valid_config() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        let res = cfg.resolve().unwrap();
        assert_eq!(res.params.sf, 7);
        assert!((res.rate - 8.0 * 500e3).abs() < 1e-9);
        // Sensitivity calibration baked into the default link.
        let rss = crate::channel::rss_dbm(&res.link, 180.0).unwrap();
        assert!((rss - (-85.8)).abs() < 0.1);
    }

    #[test]
    fn carrier_top_aligned_per_bandwidth() {
        for (bw, carrier) in [(500e3, 433.5e6), (250e3, 433.75e6), (125e3, 433.875e6)] {
            let mut cfg = ExperimentConfig::default();
            cfg.symbol.bw_hz = bw;
            let res = cfg.resolve().unwrap();
            assert!((res.params.f_carrier - carrier).abs() < 1.0, "bw {bw}");
        }
    }

    #[test]
    fn shifted_mode_gets_wider_rate() {
        let mut cfg = ExperimentConfig::default();
        cfg.mode = DemodMode::Shifted;
        let res = cfg.resolve().unwrap();
        assert!((res.rate - 20.0 * 500e3).abs() < 1e-9);

        cfg.oversampling = Some(8.0);
        assert!(cfg.resolve().is_err(), "8x cannot carry the shift products");
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ExperimentConfig::from_json("{\"typo\": 1}").is_err());
    }

    #[test]
    fn bad_sections_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.comparator.u_f = 1.5;
        assert!(cfg.resolve().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.distances.clear();
        assert!(cfg.resolve().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.noise.dc_offset = -1.0;
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn config_roundtrips_through_json() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&cfg).unwrap());
    }
}
