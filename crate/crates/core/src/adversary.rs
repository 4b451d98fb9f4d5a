//! Eavesdropper models.
//!
//! * [`AttackModel::PassiveGuess`]: Eve reads the public channel and guesses
//!   Alice's local operation.
//! * [`AttackModel::EntangleSource`]: every source pair is replaced by
//!   `(|00⟩|α⟩ + |11⟩|β⟩)/√2` with Eve holding the third system. Simulated on
//!   the full six-qubit register.
//! * [`AttackModel::ManInTheMiddle`]: Eve shares `|φ⁺⟩` pairs with Alice and
//!   separate `|φ⁺⟩` pairs with Bob, and relays the classical messages
//!   unchanged.
//!
//! Eve's guesses are always scored against Alice's round key.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{apply_pauli_first, swap_residual, BellLabel, PauliOp};
use crate::error::{AttackError, StateError};
use crate::protocol::{
    alice_round_with_outcome, bob_round, AliceRound, BobPair, InitialPairs, RoundKey, Transcript,
};
use crate::statevector::StateVector;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum AttackModel {
    #[default]
    None,
    PassiveGuess,
    /// `overlap` is `⟨α|β⟩` of Eve's two ancilla states; 0 is the strongest attack.
    EntangleSource {
        overlap: f64,
    },
    ManInTheMiddle,
}

impl AttackModel {
    pub const ENTANGLE: AttackModel = AttackModel::EntangleSource { overlap: 0.0 };

    pub fn validate(&self) -> Result<(), AttackError> {
        match *self {
            AttackModel::EntangleSource { overlap } if !(0.0..=1.0).contains(&overlap) => {
                Err(AttackError::Overlap(overlap))
            }
            _ => Ok(()),
        }
    }

    pub fn is_active(&self) -> bool {
        !matches!(self, AttackModel::None)
    }

    /// Command-line name.
    pub fn name(&self) -> &'static str {
        match self {
            AttackModel::None => "none",
            AttackModel::PassiveGuess => "passive",
            AttackModel::EntangleSource { .. } => "entangle",
            AttackModel::ManInTheMiddle => "mitm",
        }
    }

    pub fn overlap(&self) -> Option<f64> {
        match *self {
            AttackModel::EntangleSource { overlap } => Some(overlap),
            _ => None,
        }
    }

    /// Probability that one checked round passes Alice's comparison.
    ///
    /// For the source attack each pair is effectively `|φ⁺⟩` with probability
    /// `(1+c)/2` and `|φ⁻⟩` otherwise; the residual is disturbed when exactly
    /// one of the two pairs flipped, giving a match probability of `(1+c²)/2`.
    pub fn check_match_probability(&self) -> f64 {
        match *self {
            AttackModel::None | AttackModel::PassiveGuess => 1.0,
            AttackModel::EntangleSource { overlap } => (1.0 + overlap * overlap) / 2.0,
            AttackModel::ManInTheMiddle => 0.25,
        }
    }
}

impl fmt::Display for AttackModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.overlap() {
            Some(c) => write!(f, "{}(overlap={c})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for AttackModel {
    type Err = AttackError;

    /// Parses the command-line names; `entangle` gets overlap 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(AttackModel::None),
            "passive" => Ok(AttackModel::PassiveGuess),
            "entangle" => Ok(AttackModel::ENTANGLE),
            "mitm" => Ok(AttackModel::ManInTheMiddle),
            _ => Err(AttackError::Unknown(s.to_owned())),
        }
    }
}

/// Analytic probability that at least one of `checks` checked rounds mismatches.
pub fn detection_curve(attack: AttackModel, checks: u32) -> f64 {
    if checks == 0 {
        return 0.0;
    }
    1.0 - attack.check_match_probability().powi(checks as i32)
}

/// What Eve holds after one round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EveRecord {
    pub round_index: usize,
    /// Eve's guess of Alice's six round-key bits.
    pub guessed_bits: Option<RoundKey>,
    /// Bits Eve can derive with certainty from her view.
    pub known_bits_mask: [bool; 6],
    /// Eve's own Bell outcomes, in the order she measured.
    pub eve_measurements: Vec<BellLabel>,
    /// Man-in-the-middle only: Eve's outcome on the pairs she shares with Bob.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob_side_outcome: Option<BellLabel>,
}

impl EveRecord {
    pub fn known_bits(&self) -> usize {
        self.known_bits_mask.iter().filter(|&&k| k).count()
    }
}

fn announced_only_mask() -> [bool; 6] {
    let mut mask = [false; 6];
    for i in RoundKey::ANNOUNCED_BITS {
        mask[i] = true;
    }
    mask
}

/// Eve's best guess of Alice's key given a guessed operation and the public
/// announcement.
fn key_for_guess(guess: PauliOp, initial: InitialPairs, announced: BellLabel) -> RoundKey {
    let residual = swap_residual(apply_pauli_first(guess, initial.a), initial.b, announced);
    RoundKey::from_codes(guess.code(), residual.code(), announced.code())
}

/// Passive eavesdropping on the public transcript: Eve learns every announced
/// outcome and guesses the operation uniformly.
pub fn passive_guess<R: Rng + ?Sized>(
    transcript: &Transcript,
    initial: InitialPairs,
    rng: &mut R,
) -> Vec<EveRecord> {
    transcript
        .announcements()
        .into_iter()
        .map(|(round_index, announced)| {
            let guess = PauliOp::ALL[rng.random_range(0..4)];
            EveRecord {
                round_index,
                guessed_bits: Some(key_for_guess(guess, initial, announced)),
                known_bits_mask: announced_only_mask(),
                eve_measurements: Vec::new(),
                bob_side_outcome: None,
            }
        })
        .collect()
}

/// Bell outcomes of one round on the six-qubit source-attack register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EntangledOutcomes {
    /// Particles 1 and 3.
    pub alice: BellLabel,
    /// Particles 2 and 4.
    pub bob: BellLabel,
    /// Eve's ancillas 5 and 6.
    pub eve: BellLabel,
}

/// Register layout: `[1, 2, 5, 3, 4, 6]`, i.e. each source contributes
/// (Alice, Bob, Eve) qubits in that order.
pub mod source_layout {
    pub const ALICE: (usize, usize) = (0, 3);
    pub const BOB: (usize, usize) = (1, 4);
    pub const EVE: (usize, usize) = (2, 5);
    pub const PARTICLE_1: usize = 0;
}

/// The six-qubit register after Alice's operation on particle 1.
pub fn entangled_register(pauli: PauliOp, overlap: f64) -> Result<StateVector, StateError> {
    let source = StateVector::entangled_source(overlap)?;
    source
        .tensor(&source)?
        .apply_pauli(source_layout::PARTICLE_1, pauli)
}

/// Alice, then Bob, then Eve measure their pairs in the Bell basis.
pub fn entangled_measurements<R: Rng + ?Sized>(
    pauli: PauliOp,
    overlap: f64,
    rng: &mut R,
) -> Result<EntangledOutcomes, StateError> {
    use source_layout::*;
    let state = entangled_register(pauli, overlap)?;
    let alice = state.bell_measure(ALICE.0, ALICE.1, rng)?;
    let bob = alice.post_state.bell_measure(BOB.0, BOB.1, rng)?;
    let eve = bob.post_state.bell_measure(EVE.0, EVE.1, rng)?;
    Ok(EntangledOutcomes {
        alice: alice.outcome,
        bob: bob.outcome,
        eve: eve.outcome,
    })
}

/// One round under the source attack.
///
/// With orthogonal ancillas the bit-flip parity is shared by all three pairs
/// and the phase parities sum to the operation's phase component, so Eve
/// learns the bit-flip half of Alice's operation exactly and guesses the
/// phase half.
pub fn entangle_source_attack<R: Rng + ?Sized>(
    round_index: usize,
    pauli: PauliOp,
    overlap: f64,
    rng: &mut R,
) -> Result<(AliceRound, BobPair, EveRecord), StateError> {
    let outcomes = entangled_measurements(pauli, overlap, rng)?;
    let initial = InitialPairs::default();
    let (alice, _) = alice_round_with_outcome(initial, pauli, outcomes.alice);

    let flip = outcomes.alice.x() ^ outcomes.eve.x();
    let phase = rng.random_bool(0.5);
    let guess = PauliOp::from_displacement(BellLabel::new(flip, phase));
    let eve = EveRecord {
        round_index,
        guessed_bits: Some(key_for_guess(guess, initial, outcomes.alice)),
        known_bits_mask: announced_only_mask(),
        eve_measurements: vec![outcomes.eve],
        bob_side_outcome: None,
    };
    Ok((alice, BobPair::new(outcomes.bob), eve))
}

/// One round under the man-in-the-middle attack.
///
/// `alice` ran against Eve's pairs and `toward_eve` is what Eve's particles 2
/// and 4 hold. Eve measures them, runs Bob's inference on Alice's relayed
/// announcement, and separately swaps her own pairs with Bob.
pub fn mitm_attack<R: Rng + ?Sized>(
    round_index: usize,
    alice: &AliceRound,
    toward_eve: BobPair,
    rng: &mut R,
) -> (BobPair, EveRecord) {
    let eve_residual = toward_eve.measure();
    let decoded = bob_round(eve_residual, alice.announced, alice.initial);

    // Eve's own |φ⁺⟩|φ⁺⟩ with Bob, no local operation.
    let bob_side = BellLabel::ALL[rng.random_range(0..4)];
    let (_, to_bob) =
        alice_round_with_outcome(InitialPairs::default(), PauliOp::Identity, bob_side);

    let eve = EveRecord {
        round_index,
        guessed_bits: Some(decoded.key),
        known_bits_mask: [true; 6],
        eve_measurements: vec![eve_residual, bob_side],
        bob_side_outcome: Some(bob_side),
    };
    (to_bob, eve)
}

/// Per-session eavesdropper tallies.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdversaryStats {
    pub attack: AttackModel,
    pub rounds: usize,
    /// Rounds where all six guessed bits equal Alice's key.
    pub full_round_hits: usize,
    /// Rounds where the two certain bits were guessed correctly.
    pub certain_hits: usize,
    pub known_bits: usize,
    pub total_bits: usize,
    pub cross_side_rounds: usize,
    /// Alice's outcome equal to Eve's Bob-side outcome.
    pub cross_side_matches: usize,
}

impl AdversaryStats {
    pub fn tally<'a>(
        attack: AttackModel,
        rounds: impl IntoIterator<Item = (&'a EveRecord, &'a AliceRound)>,
    ) -> Self {
        let mut stats = AdversaryStats {
            attack,
            ..Default::default()
        };
        for (eve, alice) in rounds {
            stats.rounds += 1;
            stats.total_bits += RoundKey::LEN;
            stats.known_bits += eve.known_bits();
            if let Some(guess) = eve.guessed_bits {
                stats.full_round_hits += usize::from(guess == alice.key);
                stats.certain_hits += usize::from(guess.certain() == alice.key.certain());
            }
            if let Some(outcome) = eve.bob_side_outcome {
                stats.cross_side_rounds += 1;
                stats.cross_side_matches += usize::from(outcome == alice.announced);
            }
        }
        stats
    }

    pub fn full_round_rate(&self) -> f64 {
        ratio(self.full_round_hits, self.rounds)
    }

    pub fn certain_rate(&self) -> f64 {
        ratio(self.certain_hits, self.rounds)
    }

    pub fn known_bit_fraction(&self) -> f64 {
        ratio(self.known_bits, self.total_bits)
    }

    pub fn cross_side_rate(&self) -> f64 {
        ratio(self.cross_side_matches, self.cross_side_rounds)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
