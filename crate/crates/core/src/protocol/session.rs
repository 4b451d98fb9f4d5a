use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::message::{ClassicalMessage, Party, Transcript};
use super::round::{alice_round, bob_round, AliceRound, BobPair, InitialPairs, RoundKey};
use crate::adversary::{self, AdversaryStats, AttackModel, EveRecord};
use crate::bell::{BellLabel, BitCode, PauliOp};
use crate::error::ConfigError;

/// Where Alice's local operations come from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PauliSource {
    #[default]
    UniformRandom,
    /// Certain-key payload, two bits per round in round order.
    Payload(Vec<bool>),
}

/// How step 9 picks the rounds Bob reveals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckPolicy {
    /// Each round independently with this probability.
    Fraction(f64),
    /// Exactly this many rounds, uniformly without replacement.
    Count(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub rounds: usize,
    pub check: CheckPolicy,
    pub seed: u64,
    pub pauli_source: PauliSource,
    pub attack: AttackModel,
}

impl SessionConfig {
    pub fn new(rounds: usize, check_fraction: f64, seed: u64) -> Self {
        SessionConfig {
            rounds,
            check: CheckPolicy::Fraction(check_fraction),
            seed,
            pauli_source: PauliSource::UniformRandom,
            attack: AttackModel::None,
        }
    }

    pub fn with_attack(mut self, attack: AttackModel) -> Self {
        self.attack = attack;
        self
    }

    pub fn with_payload(mut self, bits: Vec<bool>) -> Self {
        self.pauli_source = PauliSource::Payload(bits);
        self
    }

    pub fn with_check(mut self, check: CheckPolicy) -> Self {
        self.check = check;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.rounds == 0 {
            return Err(ConfigError::NoRounds);
        }
        match self.check {
            CheckPolicy::Fraction(f) if !(0.0..1.0).contains(&f) => {
                return Err(ConfigError::CheckFraction(f))
            }
            CheckPolicy::Count(count) if count > self.rounds => {
                return Err(ConfigError::CheckCount {
                    count,
                    rounds: self.rounds,
                })
            }
            _ => {}
        }
        if let PauliSource::Payload(bits) = &self.pauli_source {
            if bits.len() != 2 * self.rounds {
                return Err(ConfigError::PayloadLength {
                    expected: 2 * self.rounds,
                    actual: bits.len(),
                });
            }
        }
        self.attack.validate()?;
        Ok(())
    }
}

/// Full transcript of one round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_index: usize,
    /// Pair (1,2).
    pub initial_a: BellLabel,
    /// Pair (3,4).
    pub initial_b: BellLabel,
    pub pauli: PauliOp,
    pub announced_13: BellLabel,
    pub residual_24: BellLabel,
    pub imaginary_13: BellLabel,
    pub inferred_pauli: PauliOp,
    pub alice_bits: RoundKey,
    pub bob_bits: RoundKey,
}

impl RoundRecord {
    fn new(
        round_index: usize,
        alice: &AliceRound,
        residual: BellLabel,
        announced_to_bob: BellLabel,
    ) -> Self {
        let bob = bob_round(residual, announced_to_bob, alice.initial);
        RoundRecord {
            round_index,
            initial_a: alice.initial.a,
            initial_b: alice.initial.b,
            pauli: alice.pauli,
            announced_13: alice.announced,
            residual_24: residual,
            imaginary_13: bob.imaginary,
            inferred_pauli: bob.inferred_pauli,
            alice_bits: alice.key,
            bob_bits: bob.key,
        }
    }

    fn alice(&self) -> AliceRound {
        let initial = InitialPairs {
            a: self.initial_a,
            b: self.initial_b,
        };
        AliceRound::from_outcome(initial, self.pauli, self.announced_13)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub checked_rounds: Vec<usize>,
    pub matches: usize,
    pub mismatches: usize,
    pub aborted: bool,
}

/// Keys surviving step 9, plus the comparison report.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SiftOutcome {
    pub alice_key: Vec<bool>,
    pub bob_key: Vec<bool>,
    pub report: DetectionReport,
}

/// Step 9: Bob reveals the residuals of the selected rounds, Alice compares
/// them with her expectation, and any mismatch discards the whole key.
/// Checked rounds never enter the key.
pub fn sift_and_check<R: Rng + ?Sized>(
    records: &[RoundRecord],
    check: CheckPolicy,
    rng: &mut R,
    transcript: &mut Transcript,
) -> SiftOutcome {
    let n = records.len();
    let mut checked = vec![false; n];
    match check {
        CheckPolicy::Fraction(f) => {
            for slot in checked.iter_mut() {
                *slot = rng.random_bool(f);
            }
        }
        CheckPolicy::Count(k) => {
            for i in index::sample(rng, n, k.min(n)) {
                checked[i] = true;
            }
        }
    }

    let mut report = DetectionReport::default();
    for (record, _) in records.iter().zip(&checked).filter(|(_, &c)| c) {
        let round = record.round_index;
        transcript.send(
            Party::Bob,
            Party::Alice,
            ClassicalMessage::CheckReveal {
                round,
                residual: record.residual_24,
            },
        );
        let matched = record.alice().check(record.residual_24);
        transcript.send(
            Party::Alice,
            Party::Bob,
            ClassicalMessage::CheckVerdict { round, matched },
        );
        report.checked_rounds.push(round);
        if matched {
            report.matches += 1;
        } else {
            report.mismatches += 1;
        }
    }

    if report.mismatches > 0 {
        report.aborted = true;
        transcript.send(
            Party::Alice,
            Party::Bob,
            ClassicalMessage::Abort {
                reason: format!(
                    "{} of {} check rounds mismatched",
                    report.mismatches,
                    report.checked_rounds.len()
                ),
            },
        );
        return SiftOutcome {
            report,
            ..Default::default()
        };
    }

    let mut alice_key = Vec::with_capacity(6 * n);
    let mut bob_key = Vec::with_capacity(6 * n);
    for (record, _) in records.iter().zip(&checked).filter(|(_, &c)| !c) {
        alice_key.extend(record.alice_bits.bits());
        bob_key.extend(record.bob_bits.bits());
    }
    SiftOutcome {
        alice_key,
        bob_key,
        report,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub seed: u64,
    pub attack: AttackModel,
    pub alice_key: Vec<bool>,
    pub bob_key: Vec<bool>,
    pub detection: DetectionReport,
    pub per_round: Vec<RoundRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eve: Vec<EveRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary_stats: Option<AdversaryStats>,
    pub transcript: Transcript,
}

impl SessionResult {
    /// Certain bits Bob decoded, over every round in order (checked rounds included).
    pub fn bob_certain_bits(&self) -> Vec<bool> {
        self.per_round
            .iter()
            .flat_map(|r| r.inferred_pauli.code().bits())
            .collect()
    }

    pub fn rounds(&self) -> usize {
        self.per_round.len()
    }
}

fn next_pauli<R: Rng + ?Sized>(source: &PauliSource, round: usize, rng: &mut R) -> PauliOp {
    match source {
        PauliSource::UniformRandom => PauliOp::ALL[rng.random_range(0..4)],
        PauliSource::Payload(bits) => {
            PauliOp::from_code(BitCode::new(bits[2 * round], bits[2 * round + 1]))
        }
    }
}

/// Run all nine steps for `config.rounds` rounds under the configured attack.
///
/// Every random draw comes from one ChaCha stream seeded with `config.seed`,
/// so a config always produces the same result.
pub fn run_session(config: &SessionConfig) -> Result<SessionResult, ConfigError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial = InitialPairs::default();
    let mut transcript = Transcript::new();
    let mut records = Vec::with_capacity(config.rounds);
    let mut alice_rounds = Vec::with_capacity(config.rounds);
    let mut eve = Vec::new();

    for round in 0..config.rounds {
        let pauli = next_pauli(&config.pauli_source, round, &mut rng);

        // Steps 1-3 and the quantum channel.
        let (alice, bob_pair): (AliceRound, BobPair) = match config.attack {
            AttackModel::None | AttackModel::PassiveGuess => alice_round(&mut rng, pauli),
            AttackModel::EntangleSource { overlap } => {
                let (alice, pair, record) =
                    adversary::entangle_source_attack(round, pauli, overlap, &mut rng)
                        .expect("validated overlap gives a valid six-qubit register");
                eve.push(record);
                (alice, pair)
            }
            AttackModel::ManInTheMiddle => {
                let (alice, toward_eve) = alice_round(&mut rng, pauli);
                let (to_bob, record) = adversary::mitm_attack(round, &alice, toward_eve, &mut rng);
                eve.push(record);
                (alice, to_bob)
            }
        };

        // Steps 5-7 over the classical channel.
        let relay = matches!(config.attack, AttackModel::ManInTheMiddle).then_some(Party::Eve);
        let mut send = |from, to, message| match relay {
            Some(via) => transcript.relay(from, to, via, message),
            None => transcript.send(from, to, message),
        };
        send(
            Party::Alice,
            Party::Bob,
            ClassicalMessage::MeasurementDone { round },
        );
        let residual = bob_pair.measure();
        send(
            Party::Bob,
            Party::Alice,
            ClassicalMessage::ResultRequest { round },
        );
        send(
            Party::Alice,
            Party::Bob,
            ClassicalMessage::ResultAnnounce {
                round,
                outcome: alice.announced,
            },
        );

        // Step 8: Bob works from what he received (relayed verbatim under MITM).
        records.push(RoundRecord::new(round, &alice, residual, alice.announced));
        alice_rounds.push(alice);
    }

    let sift = sift_and_check(&records, config.check, &mut rng, &mut transcript);

    if config.attack == AttackModel::PassiveGuess {
        eve = adversary::passive_guess(&transcript, initial, &mut rng);
    }
    let adversary_stats = config
        .attack
        .is_active()
        .then(|| AdversaryStats::tally(config.attack, eve.iter().zip(&alice_rounds)));

    Ok(SessionResult {
        seed: config.seed,
        attack: config.attack,
        alice_key: sift.alice_key,
        bob_key: sift.bob_key,
        detection: sift.report,
        per_round: records,
        eve,
        adversary_stats,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{apply_pauli_first, infer_imaginary, swap_residual};

    fn payload(rounds: usize, seed: u64) -> Vec<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..2 * rounds).map(|_| rng.random_bool(0.5)).collect()
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            SessionConfig::new(0, 0.1, 1).validate(),
            Err(ConfigError::NoRounds)
        );
        assert_eq!(
            SessionConfig::new(5, 1.0, 1).validate(),
            Err(ConfigError::CheckFraction(1.0))
        );
        assert_eq!(
            SessionConfig::new(5, -0.1, 1).validate(),
            Err(ConfigError::CheckFraction(-0.1))
        );
        assert_eq!(
            SessionConfig::new(5, 0.0, 1)
                .with_payload(vec![true; 9])
                .validate(),
            Err(ConfigError::PayloadLength {
                expected: 10,
                actual: 9
            })
        );
        assert_eq!(
            SessionConfig::new(5, 0.0, 1)
                .with_check(CheckPolicy::Count(6))
                .validate(),
            Err(ConfigError::CheckCount {
                count: 6,
                rounds: 5
            })
        );
        assert!(SessionConfig::new(5, 0.0, 1)
            .with_attack(AttackModel::EntangleSource { overlap: -1.0 })
            .validate()
            .is_err());
        assert!(run_session(&SessionConfig::new(0, 0.0, 1)).is_err());
    }

    #[test]
    fn honest_session_agrees() {
        let result = run_session(&SessionConfig::new(1000, 0.2, 42)).unwrap();
        assert!(!result.detection.aborted);
        assert_eq!(result.detection.mismatches, 0);
        assert_eq!(result.alice_key, result.bob_key);
        let unchecked = 1000 - result.detection.checked_rounds.len();
        assert_eq!(result.alice_key.len(), 6 * unchecked);
        assert!(result.adversary_stats.is_none());
        assert!(result.eve.is_empty());
        result.transcript.validate().unwrap();
    }

    #[test]
    fn record_invariants_hold() {
        let result = run_session(&SessionConfig::new(300, 0.1, 3)).unwrap();
        for r in &result.per_round {
            assert_eq!(
                r.residual_24,
                swap_residual(
                    apply_pauli_first(r.pauli, r.initial_a),
                    r.initial_b,
                    r.announced_13
                )
            );
            assert_eq!(
                r.imaginary_13,
                infer_imaginary(r.initial_a, r.initial_b, r.residual_24)
            );
            let expect =
                RoundKey::from_codes(r.pauli.code(), r.residual_24.code(), r.announced_13.code());
            assert_eq!(r.bob_bits, expect);
            assert_eq!(r.alice_bits, expect);
        }
    }

    #[test]
    fn payload_is_delivered_as_certain_bits() {
        let bits = payload(250, 77);
        let result =
            run_session(&SessionConfig::new(250, 0.3, 5).with_payload(bits.clone())).unwrap();
        assert_eq!(result.bob_certain_bits(), bits);
        // Certain bits of each unchecked round lead its six-bit block.
        let checked: std::collections::HashSet<_> =
            result.detection.checked_rounds.iter().copied().collect();
        let expect_certain: Vec<bool> = (0..250)
            .filter(|r| !checked.contains(r))
            .flat_map(|r| [bits[2 * r], bits[2 * r + 1]])
            .collect();
        let got_certain: Vec<bool> = result
            .bob_key
            .chunks(6)
            .flat_map(|c| [c[0], c[1]])
            .collect();
        assert_eq!(got_certain, expect_certain);
    }

    #[test]
    fn zero_check_fraction_never_detects() {
        for attack in [AttackModel::ENTANGLE, AttackModel::ManInTheMiddle] {
            let r = run_session(&SessionConfig::new(200, 0.0, 9).with_attack(attack)).unwrap();
            assert!(r.detection.checked_rounds.is_empty());
            assert!(!r.detection.aborted);
            assert_eq!(r.alice_key.len(), 1200);
        }
    }

    #[test]
    fn entangle_source_aborts() {
        let r = run_session(&SessionConfig::new(1000, 0.25, 17).with_attack(AttackModel::ENTANGLE))
            .unwrap();
        assert!(r.detection.aborted);
        assert!(r.alice_key.is_empty() && r.bob_key.is_empty());
        assert!(r.transcript.is_aborted());
        r.transcript.validate().unwrap();
    }

    #[test]
    fn passive_never_aborts_and_records_eve() {
        let r =
            run_session(&SessionConfig::new(500, 0.5, 23).with_attack(AttackModel::PassiveGuess))
                .unwrap();
        assert!(!r.detection.aborted);
        assert_eq!(r.eve.len(), 500);
        let stats = r.adversary_stats.unwrap();
        assert_eq!(stats.rounds, 500);
        assert_eq!(stats.known_bits * 3, stats.total_bits);
    }

    #[test]
    fn mitm_relays_through_eve() {
        let r =
            run_session(&SessionConfig::new(50, 0.0, 4).with_attack(AttackModel::ManInTheMiddle))
                .unwrap();
        assert!(r
            .transcript
            .entries()
            .iter()
            .all(|e| e.relayed_by == Some(Party::Eve)));
        r.transcript.validate().unwrap();
    }

    #[test]
    fn exact_check_count() {
        let r = run_session(&SessionConfig::new(40, 0.0, 4).with_check(CheckPolicy::Count(40)))
            .unwrap();
        assert_eq!(r.detection.checked_rounds.len(), 40);
        assert!(r.alice_key.is_empty());
        assert!(!r.detection.aborted);
    }

    #[test]
    fn same_seed_same_bytes() {
        for attack in [
            AttackModel::None,
            AttackModel::PassiveGuess,
            AttackModel::ENTANGLE,
            AttackModel::ManInTheMiddle,
        ] {
            let config = SessionConfig::new(200, 0.2, 1234).with_attack(attack);
            let a = serde_json::to_string(&run_session(&config).unwrap()).unwrap();
            let b = serde_json::to_string(&run_session(&config).unwrap()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn randomized_residuals_match_a_quarter() {
        let mut result = run_session(&SessionConfig::new(10_000, 0.0, 8)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(800);
        for r in &mut result.per_round {
            r.residual_24 = BellLabel::ALL[rng.random_range(0..4)];
        }
        let sift = sift_and_check(
            &result.per_round,
            CheckPolicy::Fraction(0.5),
            &mut rng,
            &mut Transcript::new(),
        );
        let checked = sift.report.checked_rounds.len() as f64;
        assert!((sift.report.matches as f64 / checked - 0.25).abs() < 0.02);
        assert!(sift.report.aborted);
    }

    #[test]
    fn channel_never_carries_operations() {
        let r =
            run_session(&SessionConfig::new(100, 0.3, 2).with_attack(AttackModel::ManInTheMiddle))
                .unwrap();
        let text = r.transcript.to_json_lines();
        assert!(!text.contains("pauli"));
        for e in r.transcript.entries() {
            let v = serde_json::to_value(&e.message).unwrap();
            for (key, value) in v.as_object().unwrap() {
                if key == "type" || key == "reason" {
                    continue;
                }
                assert!(
                    value.is_u64()
                        || value.is_boolean()
                        || value
                            .as_str()
                            .is_some_and(|s| s.parse::<BellLabel>().is_ok()),
                    "{key}: {value}"
                );
            }
        }
    }
}
