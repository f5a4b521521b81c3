//! CSV and manifest emission with byte-reproducible formatting: distances
//! as integer meters, ratios as 6-decimal fixed point, bit rates as
//! integers.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::experiment::{AblationResult, ExperimentConfig, Metrics};
use crate::mac::HopReport;
use crate::Result;

pub fn fmt_ratio(v: f64) -> String {
    format!("{v:.6}")
}

pub fn fmt_meters(v: f64) -> String {
    format!("{}", v.round() as i64)
}

pub fn fmt_bps(v: f64) -> String {
    format!("{}", v.round() as i64)
}

pub fn fmt_hz(v: f64) -> String {
    format!("{}", v.round() as i64)
}

/// `axis,distance_m,ber,throughput_bps` rows for a sweep over one axis.
pub fn sweep_csv(axis: &str, rows: &[(String, Metrics)]) -> String {
    let mut out = format!("{axis},distance_m,ber,throughput_bps\n");
    for (axis_value, m) in rows {
        let _ = writeln!(
            out,
            "{axis_value},{},{},{}",
            fmt_meters(m.distance_m),
            fmt_ratio(m.ber),
            fmt_bps(m.throughput_bps)
        );
    }
    out
}

/// `mode,sf,bw_hz,cr,distance_m,ber,throughput_bps,prr` rows.
pub fn metrics_csv(cfg: &ExperimentConfig, rows: &[Metrics]) -> String {
    let mut out = String::from("mode,sf,bw_hz,cr,distance_m,ber,throughput_bps,prr\n");
    for m in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cfg.mode.name(),
            cfg.symbol.sf,
            fmt_hz(cfg.symbol.bw_hz),
            cfg.symbol.cr,
            fmt_meters(m.distance_m),
            fmt_ratio(m.ber),
            fmt_bps(m.throughput_bps),
            fmt_ratio(m.prr)
        );
    }
    out
}

/// `mode,sf,bw_hz,cr,range_m` rows.
pub fn range_csv(cfg: &ExperimentConfig, rows: &[(&str, f64)]) -> String {
    let mut out = String::from("mode,sf,bw_hz,cr,range_m\n");
    for (mode, range) in rows {
        let _ = writeln!(
            out,
            "{mode},{},{},{},{}",
            cfg.symbol.sf,
            fmt_hz(cfg.symbol.bw_hz),
            cfg.symbol.cr,
            fmt_meters(*range)
        );
    }
    out
}

/// `stage,range_m,ratio_vs_prev` rows for the ablation study.
pub fn ablation_csv(ab: &AblationResult) -> String {
    let mut out = String::from("stage,range_m,ratio_vs_prev\n");
    let _ = writeln!(out, "vanilla,{},{}", fmt_meters(ab.vanilla_m), fmt_ratio(1.0));
    let _ = writeln!(
        out,
        "shifted,{},{}",
        fmt_meters(ab.shifted_m),
        fmt_ratio(ab.shift_ratio())
    );
    let _ = writeln!(
        out,
        "correlated,{},{}",
        fmt_meters(ab.correlated_m),
        fmt_ratio(ab.correlation_ratio())
    );
    out
}

/// `max_retx,prr,prr_expected` rows.
pub fn retransmit_csv(rows: &[(u32, f64, f64)]) -> String {
    let mut out = String::from("max_retx,prr,prr_expected\n");
    for (retx, prr, expected) in rows {
        let _ = writeln!(out, "{retx},{},{}", fmt_ratio(*prr), fmt_ratio(*expected));
    }
    out
}

/// `n_tags,n_slots,per_tag_success,analytic` rows.
pub fn aloha_csv(rows: &[(usize, usize, f64, f64)]) -> String {
    let mut out = String::from("n_tags,n_slots,per_tag_success,analytic\n");
    for (n, m, got, analytic) in rows {
        let _ = writeln!(out, "{n},{m},{},{}", fmt_ratio(*got), fmt_ratio(*analytic));
    }
    out
}

/// `phase,window,prr` rows: the per-window PRR supports of the two CDFs.
pub fn hop_csv(rep: &HopReport) -> String {
    let mut out = String::from("phase,window,prr\n");
    for (i, p) in rep.cdf_before.iter().enumerate() {
        let _ = writeln!(out, "before,{i},{}", fmt_ratio(*p));
    }
    for (i, p) in rep.cdf_after.iter().enumerate() {
        let _ = writeln!(out, "after,{i},{}", fmt_ratio(*p));
    }
    out
}

/// Run manifest: configuration hash, seed, and thread override.
pub fn manifest_json(cfg: &ExperimentConfig) -> String {
    let serialized = serde_json::to_string(cfg).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(serialized.as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let threads = std::env::var("SAIYAN_SIM_THREADS").unwrap_or_else(|_| "0".into());
    format!(
        "{{\n  \"config_sha256\": \"{hex}\",\n  \"seed\": {},\n  \"threads\": \"{threads}\"\n}}\n",
        cfg.seed
    )
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_formats_are_fixed() {
        assert_eq!(fmt_ratio(0.5), "0.500000");
        assert_eq!(fmt_meters(72.6), "73");
        assert_eq!(fmt_bps(19531.25), "19531");
    }

    #[test]
    fn sweep_header_matches_contract() {
        let m = Metrics {
            distance_m: 100.0,
            ber: 0.00185,
            throughput_bps: 18120.0,
            prr: 0.97,
            frames: 10,
        };
        let csv = sweep_csv("cr", &[("5".into(), m)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("cr,distance_m,ber,throughput_bps"));
        assert_eq!(lines.next(), Some("5,100,0.001850,18120"));
    }

    #[test]
    fn range_header_matches_contract() {
        let cfg = ExperimentConfig::default();
        let csv = range_csv(&cfg, &[("vanilla", 55.0)]);
        assert!(csv.starts_with("mode,sf,bw_hz,cr,range_m\n"));
        assert!(csv.contains("vanilla,7,500000,2,55"));
    }

    #[test]
    fn manifest_is_stable() {
        let cfg = ExperimentConfig::default();
        assert_eq!(manifest_json(&cfg), manifest_json(&cfg));
        let mut other = cfg.clone();
        other.seed = 2;
        assert_ne!(manifest_json(&cfg), manifest_json(&other));
    }
}
