//! Seeded Monte Carlo campaigns over many sessions.
//!
//! Session `i` of a campaign runs with seed [`session_seed`]`(master, i)`, so any
//! session can be reproduced on its own and the campaign result does not depend
//! on execution order. Sessions run on the current rayon pool; summaries are
//! collected in session order before aggregation.
//!
//! Output records (JSON lines or CSV) all carry `schema` = [`SCHEMA`].
//! Aggregates are pure functions of the per-session summaries.

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{detection_curve, AttackModel};
use crate::error::ConfigError;
use crate::protocol::{run_session, CheckPolicy, SessionConfig, SessionResult, Transcript};

pub const SCHEMA: &str = "swapkey/1";

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Checks per round reported by `attack` campaigns.
pub const DETECTION_KS: [u32; 4] = [1, 2, 4, 8];

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable per-session seed.
pub fn session_seed(master: u64, index: u64) -> u64 {
    mix(master ^ mix(index))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub sessions: usize,
    pub rounds: usize,
    pub check_fraction: f64,
    pub attack: AttackModel,
    pub master_seed: u64,
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sessions == 0 {
            return Err(ConfigError::NoSessions);
        }
        self.session_config(0).validate()
    }

    pub fn session_config(&self, index: usize) -> SessionConfig {
        SessionConfig::new(
            self.rounds,
            self.check_fraction,
            session_seed(self.master_seed, index as u64),
        )
        .with_attack(self.attack)
    }
}

/// Counts from one session; every aggregate is derived from these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub schema: String,
    pub record: String,
    pub session: usize,
    pub seed: u64,
    pub rounds: usize,
    pub checked: usize,
    pub check_matches: usize,
    pub mismatches: usize,
    pub aborted: bool,
    pub key_bits: usize,
    pub keys_agree: bool,
    pub eve_rounds: usize,
    pub eve_full_hits: usize,
    pub eve_certain_hits: usize,
    pub eve_known_bits: usize,
    pub eve_total_bits: usize,
    pub cross_side_rounds: usize,
    pub cross_side_matches: usize,
}

impl SessionSummary {
    pub fn from_result(session: usize, result: &SessionResult) -> Self {
        let stats = result.adversary_stats.clone().unwrap_or_default();
        SessionSummary {
            schema: SCHEMA.to_owned(),
            record: "session".to_owned(),
            session,
            seed: result.seed,
            rounds: result.rounds(),
            checked: result.detection.checked_rounds.len(),
            check_matches: result.detection.matches,
            mismatches: result.detection.mismatches,
            aborted: result.detection.aborted,
            key_bits: result.alice_key.len(),
            keys_agree: result.alice_key == result.bob_key,
            eve_rounds: stats.rounds,
            eve_full_hits: stats.full_round_hits,
            eve_certain_hits: stats.certain_hits,
            eve_known_bits: stats.known_bits,
            eve_total_bits: stats.total_bits,
            cross_side_rounds: stats.cross_side_rounds,
            cross_side_matches: stats.cross_side_matches,
        }
    }
}

/// A rate with its 95% normal-approximation half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
}

impl Estimate {
    /// Binomial proportion `hits / trials`; zero trials give 0 ± 0.
    pub fn proportion(hits: usize, trials: usize) -> Self {
        Self::scaled_proportion(hits, trials, 1.0)
    }

    fn scaled_proportion(hits: usize, trials: usize, scale: f64) -> Self {
        if trials == 0 {
            return Estimate {
                value: 0.0,
                half_width: 0.0,
            };
        }
        let n = trials as f64;
        let p = hits as f64 / n;
        Estimate {
            value: scale * p,
            half_width: scale * Z95 * (p * (1.0 - p) / n).sqrt(),
        }
    }

    pub fn contains(&self, x: f64, tolerance: f64) -> bool {
        (self.value - x).abs() <= tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionPoint {
    pub k: u32,
    /// `1 − m^k` from the campaign's own per-check match rate `m`.
    pub from_match_rate: f64,
    pub analytic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub schema: String,
    pub record: String,
    pub attack: AttackModel,
    pub sessions: usize,
    pub rounds: usize,
    pub key_bits: usize,
    /// Delivered key bits per round of four particles.
    pub key_rate: Estimate,
    pub aborted_sessions: usize,
    pub abort_rate: Estimate,
    pub checks: usize,
    pub check_match_rate: Estimate,
    pub eve_full_round_rate: Estimate,
    pub eve_certain_rate: Estimate,
    pub known_bit_fraction: f64,
    pub cross_side_match_rate: Estimate,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub detection: Vec<DetectionPoint>,
}

impl Aggregate {
    pub fn from_sessions(attack: AttackModel, sessions: &[SessionSummary]) -> Self {
        let sum = |f: fn(&SessionSummary) -> usize| sessions.iter().map(f).sum::<usize>();
        let rounds = sum(|s| s.rounds);
        let key_bits = sum(|s| s.key_bits);
        let aborted_sessions = sessions.iter().filter(|s| s.aborted).count();
        let checks = sum(|s| s.checked);
        let check_matches = sum(|s| s.check_matches);
        let eve_rounds = sum(|s| s.eve_rounds);
        let eve_total_bits = sum(|s| s.eve_total_bits);
        let check_match_rate = Estimate::proportion(check_matches, checks);
        let detection = if attack.is_active() {
            DETECTION_KS
                .iter()
                .map(|&k| DetectionPoint {
                    k,
                    from_match_rate: if checks == 0 {
                        0.0
                    } else {
                        1.0 - check_match_rate.value.powi(k as i32)
                    },
                    analytic: detection_curve(attack, k),
                })
                .collect()
        } else {
            Vec::new()
        };
        Aggregate {
            schema: SCHEMA.to_owned(),
            record: "aggregate".to_owned(),
            attack,
            sessions: sessions.len(),
            rounds,
            key_bits,
            // Each round delivers 6 bits or none.
            key_rate: Estimate::scaled_proportion(key_bits / 6, rounds, 6.0),
            aborted_sessions,
            abort_rate: Estimate::proportion(aborted_sessions, sessions.len()),
            checks,
            check_match_rate,
            eve_full_round_rate: Estimate::proportion(sum(|s| s.eve_full_hits), eve_rounds),
            eve_certain_rate: Estimate::proportion(sum(|s| s.eve_certain_hits), eve_rounds),
            known_bit_fraction: if eve_total_bits == 0 {
                0.0
            } else {
                sum(|s| s.eve_known_bits) as f64 / eve_total_bits as f64
            },
            cross_side_match_rate: Estimate::proportion(
                sum(|s| s.cross_side_matches),
                sum(|s| s.cross_side_rounds),
            ),
            detection,
        }
    }

    pub fn all_aborted(&self) -> bool {
        self.sessions > 0 && self.aborted_sessions == self.sessions
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub sessions: Vec<SessionSummary>,
    pub aggregate: Aggregate,
}

impl CampaignStats {
    pub fn from_sessions(attack: AttackModel, sessions: Vec<SessionSummary>) -> Self {
        let aggregate = Aggregate::from_sessions(attack, &sessions);
        CampaignStats {
            sessions,
            aggregate,
        }
    }
}

fn run_indexed<T, F>(spec: &CampaignSpec, f: F) -> Result<Vec<T>, ConfigError>
where
    T: Send,
    F: Fn(usize, SessionResult) -> T + Sync,
{
    spec.validate()?;
    (0..spec.sessions)
        .into_par_iter()
        .map(|i| run_session(&spec.session_config(i)).map(|r| f(i, r)))
        .collect()
}

pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignStats, ConfigError> {
    let sessions = run_indexed(spec, |i, r| SessionSummary::from_result(i, &r))?;
    Ok(CampaignStats::from_sessions(spec.attack, sessions))
}

/// [`run_campaign`], also keeping each session's classical transcript.
pub fn run_campaign_with_transcripts(
    spec: &CampaignSpec,
) -> Result<(CampaignStats, Vec<Transcript>), ConfigError> {
    let pairs = run_indexed(spec, |i, r| {
        (SessionSummary::from_result(i, &r), r.transcript)
    })?;
    let (sessions, transcripts) = pairs.into_iter().unzip();
    Ok((
        CampaignStats::from_sessions(spec.attack, sessions),
        transcripts,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub attack: AttackModel,
    pub k_values: Vec<u32>,
    pub trials: usize,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub schema: String,
    pub record: String,
    pub attack: AttackModel,
    pub k: u32,
    pub trials: usize,
    pub detected: usize,
    pub empirical: Estimate,
    pub analytic: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        if !self.attack.is_active() {
            return Err(ConfigError::AttackRequired);
        }
        self.attack.validate()?;
        Ok(())
    }
}

/// Empirical detection probability for sessions of exactly `k` rounds, all checked.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, ConfigError> {
    spec.validate()?;
    spec.k_values
        .iter()
        .map(|&k| {
            let k_seed = session_seed(spec.master_seed, u64::from(k));
            let detected = (0..spec.trials)
                .into_par_iter()
                .map(|t| {
                    if k == 0 {
                        return Ok(false);
                    }
                    let config =
                        SessionConfig::new(k as usize, 0.0, session_seed(k_seed, t as u64))
                            .with_attack(spec.attack)
                            .with_check(CheckPolicy::Count(k as usize));
                    run_session(&config).map(|r| r.detection.aborted)
                })
                .collect::<Result<Vec<bool>, _>>()?
                .into_iter()
                .filter(|&d| d)
                .count();
            Ok(SweepRow {
                schema: SCHEMA.to_owned(),
                record: "sweep".to_owned(),
                attack: spec.attack,
                k,
                trials: spec.trials,
                detected,
                empirical: Estimate::proportion(detected, spec.trials),
                analytic: detection_curve(spec.attack, k),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    JsonLines,
    Csv,
}

pub fn write_json_lines<W: io::Write, T: Serialize>(mut out: W, records: &[T]) -> io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Flat CSV row shared by session and aggregate records.
#[derive(Serialize)]
struct CampaignCsvRow<'a> {
    schema: &'a str,
    record: &'a str,
    session: Option<usize>,
    seed: Option<u64>,
    attack: &'a str,
    overlap: Option<f64>,
    rounds: usize,
    checked: usize,
    check_matches: usize,
    aborted: usize,
    key_bits: usize,
    key_rate: f64,
    key_rate_hw: Option<f64>,
    abort_rate: Option<f64>,
    abort_rate_hw: Option<f64>,
    check_match_rate: f64,
    check_match_rate_hw: Option<f64>,
    eve_full_round_rate: f64,
    eve_certain_rate: f64,
    known_bit_fraction: f64,
    cross_side_match_rate: f64,
}

fn rate(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn write_campaign<W: io::Write>(
    out: W,
    stats: &CampaignStats,
    format: OutputFormat,
) -> io::Result<()> {
    match format {
        OutputFormat::JsonLines => {
            let mut out = out;
            write_json_lines(&mut out, &stats.sessions)?;
            write_json_lines(&mut out, std::slice::from_ref(&stats.aggregate))
        }
        OutputFormat::Csv => {
            let agg = &stats.aggregate;
            let mut w = csv::Writer::from_writer(out);
            for s in &stats.sessions {
                w.serialize(CampaignCsvRow {
                    schema: &s.schema,
                    record: &s.record,
                    session: Some(s.session),
                    seed: Some(s.seed),
                    attack: agg.attack.name(),
                    overlap: agg.attack.overlap(),
                    rounds: s.rounds,
                    checked: s.checked,
                    check_matches: s.check_matches,
                    aborted: usize::from(s.aborted),
                    key_bits: s.key_bits,
                    key_rate: rate(s.key_bits, s.rounds),
                    key_rate_hw: None,
                    abort_rate: None,
                    abort_rate_hw: None,
                    check_match_rate: rate(s.check_matches, s.checked),
                    check_match_rate_hw: None,
                    eve_full_round_rate: rate(s.eve_full_hits, s.eve_rounds),
                    eve_certain_rate: rate(s.eve_certain_hits, s.eve_rounds),
                    known_bit_fraction: rate(s.eve_known_bits, s.eve_total_bits),
                    cross_side_match_rate: rate(s.cross_side_matches, s.cross_side_rounds),
                })?;
            }
            w.serialize(CampaignCsvRow {
                schema: &agg.schema,
                record: &agg.record,
                session: None,
                seed: None,
                attack: agg.attack.name(),
                overlap: agg.attack.overlap(),
                rounds: agg.rounds,
                checked: agg.checks,
                check_matches: stats.sessions.iter().map(|s| s.check_matches).sum(),
                aborted: agg.aborted_sessions,
                key_bits: agg.key_bits,
                key_rate: agg.key_rate.value,
                key_rate_hw: Some(agg.key_rate.half_width),
                abort_rate: Some(agg.abort_rate.value),
                abort_rate_hw: Some(agg.abort_rate.half_width),
                check_match_rate: agg.check_match_rate.value,
                check_match_rate_hw: Some(agg.check_match_rate.half_width),
                eve_full_round_rate: agg.eve_full_round_rate.value,
                eve_certain_rate: agg.eve_certain_rate.value,
                known_bit_fraction: agg.known_bit_fraction,
                cross_side_match_rate: agg.cross_side_match_rate.value,
            })?;
            w.flush()
        }
    }
}

#[derive(Serialize)]
struct SweepCsvRow<'a> {
    schema: &'a str,
    record: &'a str,
    attack: &'a str,
    overlap: Option<f64>,
    k: u32,
    trials: usize,
    detected: usize,
    empirical: f64,
    empirical_hw: f64,
    analytic: f64,
}

pub fn write_sweep<W: io::Write>(
    out: W,
    rows: &[SweepRow],
    format: OutputFormat,
) -> io::Result<()> {
    match format {
        OutputFormat::JsonLines => write_json_lines(out, rows),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(SweepCsvRow {
                    schema: &r.schema,
                    record: &r.record,
                    attack: r.attack.name(),
                    overlap: r.attack.overlap(),
                    k: r.k,
                    trials: r.trials,
                    detected: r.detected,
                    empirical: r.empirical.value,
                    empirical_hw: r.empirical.half_width,
                    analytic: r.analytic,
                })?;
            }
            w.flush()
        }
    }
}

/// Transcripts of a campaign as JSON lines, each entry tagged with its session.
pub fn write_transcripts<W: io::Write>(mut out: W, transcripts: &[Transcript]) -> io::Result<()> {
    #[derive(Serialize)]
    struct Tagged<'a> {
        schema: &'a str,
        session: usize,
        #[serde(flatten)]
        entry: &'a crate::protocol::TranscriptEntry,
    }
    for (session, t) in transcripts.iter().enumerate() {
        for entry in t.entries() {
            serde_json::to_writer(
                &mut out,
                &Tagged {
                    schema: SCHEMA,
                    session,
                    entry,
                },
            )?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}
