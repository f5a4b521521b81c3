//! Downlink feedback loop: command dispatch, slotted-ALOHA coordination,
//! ACK-driven retransmission, and channel hopping / rate adaptation.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type TagId = u32;

/// Payload of a downlink packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommandKind {
    /// Ask for packet `seq` again.
    Retransmit(u16),
    /// Move to another channel.
    Hop(u8),
    /// Switch the modulation rate.
    Rate { sf: u8, k_bits: u8 },
    /// Turn an on-tag sensor on or off.
    SensorCtl(bool),
    Ack(u16),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Addressing {
    Unicast(TagId),
    Multicast(u32),
    Broadcast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DownlinkCommand {
    pub kind: CommandKind,
    pub addressing: Addressing,
}

/// Mutable per-tag state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagState {
    pub id: TagId,
    pub channel: u8,
    pub sf: u8,
    pub k_bits: u8,
    /// Slots left before this tag transmits; decremented once per carrier.
    pub slot_counter: u32,
    /// Uplink packets awaiting (re)transmission.
    pub pending: VecDeque<u16>,
    pub rng_seed: u64,
    pub group: u32,
    pub sensor_on: bool,
}

impl TagState {
    pub fn new(id: TagId, rng_seed: u64) -> Self {
        Self {
            id,
            channel: 0,
            sf: 7,
            k_bits: 1,
            slot_counter: 0,
            pending: VecDeque::new(),
            rng_seed,
            group: 0,
            sensor_on: true,
        }
    }
}

/// What a command did to one tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TagAction {
    pub tag: TagId,
    pub action: ActionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    HoppedTo(u8),
    RateSet { sf: u8, k_bits: u8 },
    EnqueuedRetx(u16),
    SensorSet(bool),
    AckCleared(u16),
}

fn apply_command(kind: CommandKind, tag: &mut TagState) -> TagAction {
    let action = match kind {
        CommandKind::Hop(ch) => {
            tag.channel = ch;
            ActionKind::HoppedTo(ch)
        }
        CommandKind::Rate { sf, k_bits } => {
            tag.sf = sf;
            tag.k_bits = k_bits;
            ActionKind::RateSet { sf, k_bits }
        }
        CommandKind::Retransmit(seq) => {
            tag.pending.push_back(seq);
            ActionKind::EnqueuedRetx(seq)
        }
        CommandKind::SensorCtl(on) => {
            tag.sensor_on = on;
            ActionKind::SensorSet(on)
        }
        CommandKind::Ack(seq) => {
            tag.pending.retain(|&s| s != seq);
            ActionKind::AckCleared(seq)
        }
    };
    TagAction { tag: tag.id, action }
}

/// Apply a downlink command to the addressed tags. Every tag in range
/// demodulates the packet, but only the addressed ones act.
pub fn dispatch_downlink(cmd: &DownlinkCommand, tags: &mut [TagState]) -> Result<Vec<TagAction>> {
    match cmd.addressing {
        Addressing::Unicast(id) => {
            let tag = tags
                .iter_mut()
                .find(|t| t.id == id)
                .ok_or_else(|| Error::Addressing(format!("unknown tag id {id}")))?;
            Ok(vec![apply_command(cmd.kind, tag)])
        }
        Addressing::Multicast(group) => Ok(tags
            .iter_mut()
            .filter(|t| t.group == group)
            .map(|t| apply_command(cmd.kind, t))
            .collect()),
        Addressing::Broadcast => {
            Ok(tags.iter_mut().map(|t| apply_command(cmd.kind, t)).collect())
        }
    }
}

/// Outcome of one slotted-ALOHA round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlohaRound {
    /// Transmissions per slot; sums to the number of tags.
    pub occupancy: Vec<u32>,
    /// Per-tag `(slot, success)`, success meaning the slot was exclusive.
    pub outcomes: Vec<(u32, bool)>,
}

/// One ALOHA round: each tag draws a uniform slot into its counter, the AP
/// signals each slot with a carrier, counters tick down on each carrier,
/// and a tag transmits when its counter reaches zero. A tag succeeds iff
/// its slot carried no other transmission.
pub fn slotted_aloha_round(n_tags: usize, n_slots: usize, rng_seed: u64) -> AlohaRound {
    assert!(n_tags >= 1 && n_slots >= 1, "need at least one tag and one slot");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut tags: Vec<TagState> = (0..n_tags)
        .map(|i| {
            let mut t = TagState::new(i as TagId, rng_seed ^ i as u64);
            t.slot_counter = rng.gen_range(0..n_slots as u32) + 1;
            t
        })
        .collect();

    let mut occupancy = vec![0u32; n_slots];
    let mut chosen = vec![0u32; n_tags];
    for slot in 0..n_slots as u32 {
        // Carrier from the AP marks the slot start; counters tick down and
        // a tag transmits the moment its counter reaches zero.
        for tag in tags.iter_mut() {
            if tag.slot_counter == 0 {
                continue;
            }
            tag.slot_counter -= 1;
            if tag.slot_counter == 0 {
                occupancy[slot as usize] += 1;
                chosen[tag.id as usize] = slot;
            }
        }
    }
    let outcomes = chosen
        .iter()
        .map(|&s| (s, occupancy[s as usize] == 1))
        .collect();
    AlohaRound { occupancy, outcomes }
}

/// How uplink and downlink deliveries are decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    /// Success probability of one uplink attempt, independent per attempt.
    pub uplink_success_prob: f64,
}

impl LinkModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.uplink_success_prob) {
            return Err(Error::Config(format!(
                "uplink probability {} outside [0, 1]",
                self.uplink_success_prob
            )));
        }
        Ok(())
    }
}

/// Delivery of a downlink command to a tag; the experiment layer provides
/// an implementation backed by the full demodulation pipeline.
pub trait DownlinkPath {
    fn deliver(&self, cmd: &DownlinkCommand, seed: u64) -> Result<bool>;
}

/// Downlink that always succeeds.
pub struct IdealDownlink;

impl DownlinkPath for IdealDownlink {
    fn deliver(&self, _cmd: &DownlinkCommand, _seed: u64) -> Result<bool> {
        Ok(true)
    }
}

/// Downlink that succeeds with a fixed probability.
pub struct LossyDownlink(pub f64);

impl DownlinkPath for LossyDownlink {
    fn deliver(&self, _cmd: &DownlinkCommand, seed: u64) -> Result<bool> {
        Ok(ChaCha8Rng::seed_from_u64(seed).gen_bool(self.0.clamp(0.0, 1.0)))
    }
}

/// ACK-driven retransmission: each packet is attempted up to `1 + max_retx`
/// times; it is delivered when any attempt lands. Returns the packet
/// reception ratio. Attempts are independent, so the expectation is
/// `1 - (1 - p)^(1 + max_retx)`.
pub fn feedback_retransmit(link: &LinkModel, max_retx: u32, n_packets: u64, rng_seed: u64) -> f64 {
    let p = link.uplink_success_prob;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut delivered = 0u64;
    for _ in 0..n_packets {
        for _ in 0..=max_retx {
            if rng.gen_bool(p) {
                delivered += 1;
                break;
            }
        }
    }
    delivered as f64 / n_packets as f64
}

/// Expected PRR under attempt independence.
pub fn retransmit_expectation(p: f64, max_retx: u32) -> f64 {
    1.0 - (1.0 - p).powi(max_retx as i32 + 1)
}

/// Result of a channel-hopping run.
#[derive(Debug, Clone, PartialEq)]
pub struct HopReport {
    pub prr_before: f64,
    pub prr_after: f64,
    /// Per-window PRRs while jammed, sorted ascending (a CDF support).
    pub cdf_before: Vec<f64>,
    /// Per-window PRRs after the hop, sorted ascending.
    pub cdf_after: Vec<f64>,
    pub median_before: f64,
    pub median_after: f64,
    pub hop_delivered: bool,
}

pub const DEFAULT_HOP_WINDOW: u64 = 100;

/// Median of an unsorted slice; 0 when empty.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Run `n_packets` under the jammed link, deliver a hop command through
/// `downlink`, and (when it lands) run `n_packets` more under the clean
/// link. PRR is tracked per window of `window` packets.
pub fn channel_hop_sim(
    jammed: &LinkModel,
    clean: &LinkModel,
    hop_trigger: &DownlinkCommand,
    downlink: &dyn DownlinkPath,
    n_packets: u64,
    window: u64,
    rng_seed: u64,
) -> Result<HopReport> {
    if !matches!(hop_trigger.kind, CommandKind::Hop(_)) {
        return Err(Error::Domain("hop trigger must be a Hop command".into()));
    }
    jammed.validate()?;
    clean.validate()?;
    let window = window.max(1);

    let run_phase = |p: f64, seed: u64| -> (f64, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut windows = Vec::new();
        let mut delivered_total = 0u64;
        let mut done = 0u64;
        while done < n_packets {
            let batch = window.min(n_packets - done);
            let ok = (0..batch).filter(|_| rng.gen_bool(p)).count() as u64;
            delivered_total += ok;
            windows.push(ok as f64 / batch as f64);
            done += batch;
        }
        (delivered_total as f64 / n_packets as f64, windows)
    };

    let (prr_before, mut before) = run_phase(jammed.uplink_success_prob, rng_seed);
    let hop_delivered = downlink.deliver(hop_trigger, rng_seed ^ 0x686f70)?;
    let (prr_after, mut after) = if hop_delivered {
        run_phase(clean.uplink_success_prob, rng_seed.wrapping_add(1))
    } else {
        run_phase(jammed.uplink_success_prob, rng_seed.wrapping_add(1))
    };

    before.sort_by(|a, b| a.partial_cmp(b).unwrap());
    after.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(HopReport {
        prr_before,
        prr_after,
        median_before: median(&before),
        median_after: median(&after),
        cdf_before: before,
        cdf_after: after,
        hop_delivered,
    })
}

/// SNR-threshold rate policy: entries sorted by rising threshold and rising
/// data rate (`k / 2^sf`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePolicy {
    /// `(min_snr_db, sf, k_bits)`.
    pub entries: Vec<(f64, u8, u8)>,
}

impl Default for RatePolicy {
    fn default() -> Self {
        Self {
            entries: vec![
                (-5.0, 12, 1),
                (0.0, 10, 2),
                (5.0, 9, 2),
                (10.0, 8, 4),
                (15.0, 7, 5),
            ],
        }
    }
}

impl RatePolicy {
    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Config("empty rate policy".into()));
        }
        let rate = |sf: u8, k: u8| f64::from(k) / (1u64 << sf) as f64;
        for w in self.entries.windows(2) {
            let ((t0, sf0, k0), (t1, sf1, k1)) = (w[0], w[1]);
            if t1 <= t0 || rate(sf1, k1) <= rate(sf0, k0) {
                return Err(Error::Config(
                    "rate policy must map rising SNR to rising data rate".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Pick the highest-throughput `(sf, k_bits)` whose threshold is at or
/// below the link quality; below every threshold, fall back to the slowest
/// entry.
pub fn rate_adapt(link_quality_db: f64, policy: &RatePolicy) -> Result<(u8, u8)> {
    policy.validate()?;
    let chosen = policy
        .entries
        .iter()
        .rev()
        .find(|(thr, _, _)| *thr <= link_quality_db)
        .or_else(|| policy.entries.first());
    let (_, sf, k) = chosen.expect("validated non-empty");
    Ok((*sf, *k))
}

/// Pack a command into `k_bits`-wide symbols for the downlink pipeline:
/// kind, argument, addressing and an XOR checksum byte.
pub fn encode_command(cmd: &DownlinkCommand, k_bits: u8) -> Vec<u16> {
    let (kind_tag, arg): (u8, u16) = match cmd.kind {
        CommandKind::Retransmit(s) => (0, s),
        CommandKind::Hop(ch) => (1, u16::from(ch)),
        CommandKind::Rate { sf, k_bits } => (2, u16::from(sf) << 8 | u16::from(k_bits)),
        CommandKind::SensorCtl(on) => (3, u16::from(on)),
        CommandKind::Ack(s) => (4, s),
    };
    let (addr_tag, addr): (u8, u32) = match cmd.addressing {
        Addressing::Unicast(id) => (0, id),
        Addressing::Multicast(g) => (1, g),
        Addressing::Broadcast => (2, 0),
    };
    let mut bytes = vec![
        kind_tag,
        (arg >> 8) as u8,
        arg as u8,
        addr_tag,
        (addr >> 8) as u8,
        addr as u8,
    ];
    let checksum = bytes.iter().fold(0u8, |a, b| a ^ b);
    bytes.push(checksum);

    let k = u32::from(k_bits);
    let mask = (1u32 << k) - 1;
    let total_bits = bytes.len() as u32 * 8;
    let n_symbols = (total_bits + k - 1) / k;
    let mut acc: u64 = 0;
    for b in &bytes {
        acc = acc << 8 | u64::from(*b);
    }
    acc <<= n_symbols * k - total_bits; // pad on the right
    (0..n_symbols)
        .rev()
        .map(|i| ((acc >> (i * k)) as u32 & mask) as u16)
        .collect()
}

/// Inverse of [`encode_command`]; `None` when the checksum fails or a tag
/// is unknown.
pub fn decode_command(symbols: &[u16], k_bits: u8) -> Option<DownlinkCommand> {
    let k = u32::from(k_bits);
    let total_bits = 7 * 8u32;
    let n_symbols = ((total_bits + k - 1) / k) as usize;
    if symbols.len() < n_symbols {
        return None;
    }
    let mut acc: u64 = 0;
    for &s in &symbols[..n_symbols] {
        acc = acc << k | u64::from(s);
    }
    acc >>= n_symbols as u32 * k - total_bits;
    let bytes: Vec<u8> = (0..7).rev().map(|i| (acc >> (i * 8)) as u8).collect();
    let checksum = bytes[..6].iter().fold(0u8, |a, b| a ^ b);
    if checksum != bytes[6] {
        return None;
    }
    let arg = u16::from(bytes[1]) << 8 | u16::from(bytes[2]);
    let addr = u32::from(bytes[4]) << 8 | u32::from(bytes[5]);
    let kind = match bytes[0] {
        0 => CommandKind::Retransmit(arg),
        1 => CommandKind::Hop(arg as u8),
        2 => CommandKind::Rate { sf: (arg >> 8) as u8, k_bits: arg as u8 },
        3 => CommandKind::SensorCtl(arg != 0),
        4 => CommandKind::Ack(arg),
        _ => return None,
    };
    let addressing = match bytes[3] {
        0 => Addressing::Unicast(addr),
        1 => Addressing::Multicast(addr),
        2 => Addressing::Broadcast,
        _ => return None,
    };
    Some(DownlinkCommand { kind, addressing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demod::sampling_rates;
    use crate::waveform::SymbolParams;

    fn ten_tags() -> Vec<TagState> {
        (0..10).map(|i| TagState::new(i, 1000 + u64::from(i))).collect()
    }

    #[test]
    fn unicast_touches_exactly_one_tag() {
        let mut tags = ten_tags();
        let before: Vec<_> = tags.iter().map(|t| t.pending.len()).collect();
        let cmd = DownlinkCommand {
            kind: CommandKind::Retransmit(42),
            addressing: Addressing::Unicast(3),
        };
        let actions = dispatch_downlink(&cmd, &mut tags).unwrap();
        assert_eq!(actions.len(), 1);
        for (i, t) in tags.iter().enumerate() {
            let grew = t.pending.len() - before[i];
            assert_eq!(grew, usize::from(i == 3), "tag {i}");
        }
    }

    #[test]
    fn broadcast_hop_moves_everyone() {
        let mut tags = ten_tags();
        let cmd =
            DownlinkCommand { kind: CommandKind::Hop(2), addressing: Addressing::Broadcast };
        dispatch_downlink(&cmd, &mut tags).unwrap();
        assert!(tags.iter().all(|t| t.channel == 2));
    }

    #[test]
    fn rate_command_updates_sampler() {
        let mut tags = ten_tags();
        let cmd = DownlinkCommand {
            kind: CommandKind::Rate { sf: 9, k_bits: 2 },
            addressing: Addressing::Unicast(0),
        };
        dispatch_downlink(&cmd, &mut tags).unwrap();
        let p = SymbolParams::new(tags[0].sf, 500e3, tags[0].k_bits).unwrap();
        let want = 3.2 * 500e3 / f64::from(1u32 << 7);
        assert!((sampling_rates(&p).configured_hz - want).abs() < 1e-9);
    }

    #[test]
    fn unknown_unicast_errors() {
        let mut tags = ten_tags();
        let cmd =
            DownlinkCommand { kind: CommandKind::Hop(1), addressing: Addressing::Unicast(99) };
        assert!(matches!(dispatch_downlink(&cmd, &mut tags), Err(Error::Addressing(_))));
    }

    #[test]
    fn ack_clears_pending() {
        let mut tags = ten_tags();
        tags[1].pending.extend([7, 9]);
        let cmd =
            DownlinkCommand { kind: CommandKind::Ack(7), addressing: Addressing::Unicast(1) };
        dispatch_downlink(&cmd, &mut tags).unwrap();
        assert_eq!(tags[1].pending, VecDeque::from([9]));
    }

    #[test]
    fn aloha_single_tag_always_wins() {
        for seed in 0..50 {
            let round = slotted_aloha_round(1, 4, seed);
            assert!(round.outcomes[0].1);
        }
    }

    #[test]
    fn aloha_conservation() {
        for seed in 0..200 {
            let (n, m) = (1 + (seed as usize % 12), 1 + (seed as usize % 7));
            let round = slotted_aloha_round(n, m, seed);
            assert_eq!(round.occupancy.iter().sum::<u32>() as usize, n);
            let successes = round.outcomes.iter().filter(|(_, ok)| *ok).count();
            let collided = round
                .outcomes
                .iter()
                .filter(|(s, _)| round.occupancy[*s as usize] > 1)
                .count();
            assert_eq!(successes + collided, n);
        }
    }

    #[test]
    fn aloha_all_three_succeed_probability() {
        let rounds = 100_000;
        let all_ok = (0..rounds)
            .filter(|&s| {
                slotted_aloha_round(3, 3, s).outcomes.iter().all(|(_, ok)| *ok)
            })
            .count();
        let got = all_ok as f64 / rounds as f64;
        assert!((got - 2.0 / 9.0).abs() < 0.01, "P(all succeed) = {got}");
    }

    #[test]
    fn retransmit_expectation_and_monotonicity() {
        let link = LinkModel { uplink_success_prob: 0.456 };
        let n = 100_000;
        let prr0 = feedback_retransmit(&link, 0, n, 5);
        assert!((prr0 - 0.456).abs() < 0.005, "PRR {prr0}");
        let mut prev = 0.0;
        for retx in 0..=4 {
            let prr = feedback_retransmit(&link, retx, n, 5);
            assert!(prr >= prev, "PRR not monotone at {retx} retx");
            assert!((prr - retransmit_expectation(0.456, retx)).abs() < 0.005);
            prev = prr;
        }
    }

    #[test]
    fn hop_lifts_median_and_is_deterministic() {
        let jam = LinkModel { uplink_success_prob: 0.47 };
        let clean = LinkModel { uplink_success_prob: 0.92 };
        let cmd = DownlinkCommand { kind: CommandKind::Hop(2), addressing: Addressing::Broadcast };
        let rep =
            channel_hop_sim(&jam, &clean, &cmd, &IdealDownlink, 10_000, 100, 77).unwrap();
        assert!(rep.hop_delivered);
        assert!((rep.median_before - 0.47).abs() < 0.02);
        assert!((rep.median_after - 0.92).abs() < 0.02);

        let rep2 =
            channel_hop_sim(&jam, &clean, &cmd, &IdealDownlink, 10_000, 100, 77).unwrap();
        assert_eq!(rep.cdf_before, rep2.cdf_before);
        assert_eq!(rep.cdf_after, rep2.cdf_after);
    }

    #[test]
    fn lost_hop_keeps_jammed_level() {
        let jam = LinkModel { uplink_success_prob: 0.47 };
        let clean = LinkModel { uplink_success_prob: 0.92 };
        let cmd = DownlinkCommand { kind: CommandKind::Hop(2), addressing: Addressing::Broadcast };
        let rep =
            channel_hop_sim(&jam, &clean, &cmd, &LossyDownlink(0.0), 10_000, 100, 77).unwrap();
        assert!(!rep.hop_delivered);
        assert!((rep.median_after - 0.47).abs() < 0.03);
    }

    #[test]
    fn non_hop_trigger_rejected() {
        let link = LinkModel { uplink_success_prob: 0.5 };
        let cmd =
            DownlinkCommand { kind: CommandKind::Ack(0), addressing: Addressing::Broadcast };
        assert!(channel_hop_sim(&link, &link, &cmd, &IdealDownlink, 10, 5, 0).is_err());
    }

    #[test]
    fn rate_adaptation_policy() {
        let policy = RatePolicy::default();
        assert_eq!(rate_adapt(100.0, &policy).unwrap(), (7, 5));
        assert_eq!(rate_adapt(-100.0, &policy).unwrap(), (12, 1));

        let mut prev_rate = 0.0;
        for snr10 in -100..300 {
            let (sf, k) = rate_adapt(f64::from(snr10) / 10.0, &policy).unwrap();
            let rate = f64::from(k) * 500e3 / (1u64 << sf) as f64;
            assert!(rate >= prev_rate, "data rate fell at snr {}", f64::from(snr10) / 10.0);
            prev_rate = rate;
        }

        assert!(rate_adapt(0.0, &RatePolicy { entries: vec![] }).is_err());
        let bad = RatePolicy { entries: vec![(0.0, 7, 5), (5.0, 12, 1)] };
        assert!(rate_adapt(0.0, &bad).is_err());
    }

    #[test]
    fn command_codec_roundtrip() {
        let commands = [
            DownlinkCommand {
                kind: CommandKind::Retransmit(513),
                addressing: Addressing::Unicast(7),
            },
            DownlinkCommand { kind: CommandKind::Hop(3), addressing: Addressing::Broadcast },
            DownlinkCommand {
                kind: CommandKind::Rate { sf: 10, k_bits: 4 },
                addressing: Addressing::Multicast(2),
            },
            DownlinkCommand {
                kind: CommandKind::SensorCtl(false),
                addressing: Addressing::Unicast(0),
            },
            DownlinkCommand { kind: CommandKind::Ack(9), addressing: Addressing::Unicast(65535) },
        ];
        for k_bits in 1..=5u8 {
            for cmd in &commands {
                let symbols = encode_command(cmd, k_bits);
                assert!(symbols.iter().all(|&s| u32::from(s) < 1 << k_bits));
                assert_eq!(decode_command(&symbols, k_bits), Some(*cmd), "k={k_bits}");
            }
        }
        // Corrupted symbol fails the checksum.
        let mut symbols = encode_command(&commands[0], 2);
        symbols[0] ^= 1;
        assert_eq!(decode_command(&symbols, 2), None);
    }
}
