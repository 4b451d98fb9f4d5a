//! Classical-channel messages and the session transcript.
//!
//! The transcript is written as JSON lines, one [`TranscriptEntry`] per line:
//!
//! ```text
//! {"seq":0,"from":"alice","to":"bob","message":{"type":"measurement_done","round":0}}
//! {"seq":1,"from":"bob","to":"alice","message":{"type":"result_request","round":0}}
//! {"seq":2,"from":"alice","to":"bob","message":{"type":"result_announce","round":0,"outcome":"psi-"}}
//! ```
//!
//! `relayed_by` is present only when a party other than the endpoints carried
//! the message. Messages hold Bell labels and booleans only; Alice's local
//! operation has no representation here.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bell::BellLabel;
use crate::error::TranscriptError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
    Eve,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassicalMessage {
    /// Step 5: Alice has measured particles 1 and 3 (result withheld).
    MeasurementDone {
        round: usize,
    },
    /// Step 7: Bob asks for Alice's outcome.
    ResultRequest {
        round: usize,
    },
    /// Step 7: Alice's Bell outcome on particles 1 and 3.
    ResultAnnounce {
        round: usize,
        outcome: BellLabel,
    },
    /// Step 9: Bob publishes his residual for a check round.
    CheckReveal {
        round: usize,
        residual: BellLabel,
    },
    /// Alice's comparison against her expected residual.
    CheckVerdict {
        round: usize,
        matched: bool,
    },
    Abort {
        reason: String,
    },
}

impl ClassicalMessage {
    pub fn round(&self) -> Option<usize> {
        match *self {
            ClassicalMessage::MeasurementDone { round }
            | ClassicalMessage::ResultRequest { round }
            | ClassicalMessage::ResultAnnounce { round, .. }
            | ClassicalMessage::CheckReveal { round, .. }
            | ClassicalMessage::CheckVerdict { round, .. } => Some(round),
            ClassicalMessage::Abort { .. } => None,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ClassicalMessage::MeasurementDone { .. } => "MeasurementDone",
            ClassicalMessage::ResultRequest { .. } => "ResultRequest",
            ClassicalMessage::ResultAnnounce { .. } => "ResultAnnounce",
            ClassicalMessage::CheckReveal { .. } => "CheckReveal",
            ClassicalMessage::CheckVerdict { .. } => "CheckVerdict",
            ClassicalMessage::Abort { .. } => "Abort",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub seq: usize,
    pub from: Party,
    pub to: Party,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relayed_by: Option<Party>,
    pub message: ClassicalMessage,
}

/// Ordered log of everything sent over the classical channel.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send(&mut self, from: Party, to: Party, message: ClassicalMessage) {
        self.push(from, to, None, message);
    }

    pub fn relay(&mut self, from: Party, to: Party, via: Party, message: ClassicalMessage) {
        self.push(from, to, Some(via), message);
    }

    fn push(
        &mut self,
        from: Party,
        to: Party,
        relayed_by: Option<Party>,
        message: ClassicalMessage,
    ) {
        let seq = self.entries.len();
        self.entries.push(TranscriptEntry {
            seq,
            from,
            to,
            relayed_by,
            message,
        });
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Publicly announced outcomes, indexed by round.
    pub fn announcements(&self) -> Vec<(usize, BellLabel)> {
        self.entries
            .iter()
            .filter_map(|e| match e.message {
                ClassicalMessage::ResultAnnounce { round, outcome } => Some((round, outcome)),
                _ => None,
            })
            .collect()
    }

    pub fn is_aborted(&self) -> bool {
        self.entries
            .iter()
            .any(|e| matches!(e.message, ClassicalMessage::Abort { .. }))
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            // Entries contain only strings, integers and booleans.
            let line = serde_json::to_string(entry).expect("transcript entry serializes");
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn from_json_lines(text: &str) -> Result<Self, TranscriptError> {
        let entries = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| TranscriptError::Decode {
                    line: i + 1,
                    reason: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Transcript { entries })
    }

    /// Check per-round message causality:
    /// `MeasurementDone < ResultRequest < ResultAnnounce < CheckReveal < CheckVerdict`,
    /// each at most once, and nothing after `Abort`.
    pub fn validate(&self) -> Result<(), TranscriptError> {
        const ORDER: [&str; 5] = [
            "MeasurementDone",
            "ResultRequest",
            "ResultAnnounce",
            "CheckReveal",
            "CheckVerdict",
        ];
        // Index into ORDER of the last stage seen for each round.
        let mut stage: HashMap<usize, usize> = HashMap::new();
        let mut aborted = false;
        for entry in &self.entries {
            if aborted {
                return Err(TranscriptError::AfterAbort(entry.seq));
            }
            let Some(round) = entry.message.round() else {
                aborted = true;
                continue;
            };
            let kind = entry.message.kind();
            let pos = ORDER
                .iter()
                .position(|k| *k == kind)
                .expect("round message kind");
            let seen = stage.get(&round).copied();
            match seen {
                Some(s) if s >= pos => {
                    return Err(TranscriptError::Duplicate {
                        round,
                        message: kind,
                    })
                }
                _ => {}
            }
            let expected_prev = pos.checked_sub(1);
            if seen != expected_prev {
                return Err(TranscriptError::OutOfOrder {
                    round,
                    message: kind,
                    missing: ORDER[pos - 1],
                });
            }
            stage.insert(round, pos);
        }
        Ok(())
    }
}
