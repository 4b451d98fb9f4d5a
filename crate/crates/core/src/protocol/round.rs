use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{
    apply_pauli_first, infer_imaginary, infer_pauli, swap_distribution, swap_residual, BellLabel,
    BitCode, PauliOp,
};

/// The publicly known source states of pairs (1,2) and (3,4).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialPairs {
    pub a: BellLabel,
    pub b: BellLabel,
}

impl Default for InitialPairs {
    fn default() -> Self {
        InitialPairs {
            a: BellLabel::PHI_PLUS,
            b: BellLabel::PHI_PLUS,
        }
    }
}

/// Six key bits from one round, laid out as
/// `certain(2) ‖ residual-code(2) ‖ announced-code(2)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct RoundKey([bool; 6]);

impl RoundKey {
    pub const LEN: usize = 6;

    /// Bit positions holding the publicly announced outcome.
    pub const ANNOUNCED_BITS: std::ops::Range<usize> = 4..6;

    pub fn from_codes(certain: BitCode, residual: BitCode, announced: BitCode) -> Self {
        let [c0, c1] = certain.bits();
        let [r0, r1] = residual.bits();
        let [a0, a1] = announced.bits();
        RoundKey([c0, c1, r0, r1, a0, a1])
    }

    pub fn bits(&self) -> [bool; 6] {
        self.0
    }

    pub fn certain(&self) -> BitCode {
        BitCode::new(self.0[0], self.0[1])
    }

    pub fn residual(&self) -> BitCode {
        BitCode::new(self.0[2], self.0[3])
    }

    pub fn announced(&self) -> BitCode {
        BitCode::new(self.0[4], self.0[5])
    }
}

impl fmt::Display for RoundKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for RoundKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RoundKey({self})")
    }
}

impl Serialize for RoundKey {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RoundKey {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let mut bits = [false; 6];
        if s.len() != 6 {
            return Err(serde::de::Error::custom(format!(
                "expected 6 bits, got {s:?}"
            )));
        }
        for (slot, ch) in bits.iter_mut().zip(s.chars()) {
            *slot = match ch {
                '0' => false,
                '1' => true,
                _ => return Err(serde::de::Error::custom(format!("not a bit string: {s:?}"))),
            };
        }
        Ok(RoundKey(bits))
    }
}

/// Alice's view of a round once she has measured particles 1 and 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AliceRound {
    pub initial: InitialPairs,
    pub pauli: PauliOp,
    /// Her actual Bell outcome on particles 1 and 3.
    pub announced: BellLabel,
    /// What Bob's particles 2 and 4 must show on an undisturbed channel.
    pub expected_residual: BellLabel,
    /// The outcome particles 1 and 3 would have given without `pauli`.
    pub imaginary: BellLabel,
    pub key: RoundKey,
}

impl AliceRound {
    /// Steps 2 to 4 given the outcome of the step 3 measurement.
    pub fn from_outcome(initial: InitialPairs, pauli: PauliOp, announced: BellLabel) -> Self {
        let expected_residual =
            swap_residual(apply_pauli_first(pauli, initial.a), initial.b, announced);
        AliceRound {
            initial,
            pauli,
            announced,
            expected_residual,
            imaginary: infer_imaginary(initial.a, initial.b, expected_residual),
            key: RoundKey::from_codes(pauli.code(), expected_residual.code(), announced.code()),
        }
    }

    /// Step 9 comparison of a revealed residual.
    pub fn check(&self, revealed: BellLabel) -> bool {
        revealed == self.expected_residual
    }
}

/// Particles 2 and 4 as they reach Bob, described by the outcome his Bell
/// measurement will give.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BobPair(BellLabel);

impl BobPair {
    pub fn new(outcome: BellLabel) -> Self {
        BobPair(outcome)
    }

    /// Step 6 Bell measurement.
    pub fn measure(self) -> BellLabel {
        self.0
    }
}

/// Steps 1 to 5 on an honest channel with `|φ⁺⟩|φ⁺⟩` sources: the step 3 outcome
/// is drawn from the swapping distribution.
pub fn alice_round<R: Rng + ?Sized>(rng: &mut R, pauli: PauliOp) -> (AliceRound, BobPair) {
    let initial = InitialPairs::default();
    let branches = swap_distribution(apply_pauli_first(pauli, initial.a), initial.b);
    // Every branch has weight 1/4.
    let branch = branches[rng.random_range(0..branches.len())];
    alice_round_with_outcome(initial, pauli, branch.outcome)
}

/// [`alice_round`] with the measurement outcome forced.
pub fn alice_round_with_outcome(
    initial: InitialPairs,
    pauli: PauliOp,
    outcome: BellLabel,
) -> (AliceRound, BobPair) {
    let alice = AliceRound::from_outcome(initial, pauli, outcome);
    let pair = BobPair::new(alice.expected_residual);
    (alice, pair)
}

/// Bob's view of a round after step 8.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BobRound {
    pub residual: BellLabel,
    pub announced: BellLabel,
    pub imaginary: BellLabel,
    pub inferred_pauli: PauliOp,
    pub key: RoundKey,
}

/// Steps 6 to 8: infer Alice's operation and assemble the round key.
pub fn bob_round(residual: BellLabel, announced: BellLabel, initial: InitialPairs) -> BobRound {
    let inferred_pauli = infer_pauli(announced, residual, initial.a, initial.b);
    BobRound {
        residual,
        announced,
        imaginary: infer_imaginary(initial.a, initial.b, residual),
        inferred_pauli,
        key: RoundKey::from_codes(inferred_pauli.code(), residual.code(), announced.code()),
    }
}
