//! Closed-form algebra of Bell-state labels.
//!
//! A Bell state is identified, up to global phase, by the Pauli that maps
//! `|φ⁺⟩` onto it when applied to the first qubit:
//!
//! ```text
//!   label     (x, z)   code
//!   |φ⁺⟩      (0, 0)   00
//!   |ψ⁺⟩      (1, 0)   01
//!   |ψ⁻⟩      (1, 1)   10
//!   |φ⁻⟩      (0, 1)   11
//! ```
//!
//! `x` is the bit-flip component and `z` the phase-flip component. Under this
//! representation the four labels form the group Z₂ × Z₂, the local Paulis act
//! on it by translation, and entanglement swapping is a componentwise XOR of the
//! two source labels with the measured outcome.
//!
//! The two-bit codes shared by Alice and Bob are only used at the
//! encode/decode boundary ([`BellLabel::code`], [`PauliOp::code`]).

use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::ParseError;

/// Two ordered bits, `hi` first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitCode(u8);

impl BitCode {
    pub const ALL: [BitCode; 4] = [BitCode(0), BitCode(1), BitCode(2), BitCode(3)];

    pub const fn new(hi: bool, lo: bool) -> Self {
        BitCode(((hi as u8) << 1) | lo as u8)
    }

    /// Build from the integer value `0..=3`.
    pub fn from_value(value: u8) -> Option<Self> {
        (value < 4).then_some(BitCode(value))
    }

    pub const fn value(self) -> u8 {
        self.0
    }

    pub const fn hi(self) -> bool {
        self.0 & 0b10 != 0
    }

    pub const fn lo(self) -> bool {
        self.0 & 0b01 != 0
    }

    pub const fn bits(self) -> [bool; 2] {
        [self.hi(), self.lo()]
    }
}

impl fmt::Display for BitCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.hi() as u8, self.lo() as u8)
    }
}

impl FromStr for BitCode {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "00" => Ok(BitCode(0)),
            "01" => Ok(BitCode(1)),
            "10" => Ok(BitCode(2)),
            "11" => Ok(BitCode(3)),
            _ => Err(ParseError::BitCode(s.to_owned())),
        }
    }
}

/// One of the four Bell states, global phase discarded.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellLabel {
    x: bool,
    z: bool,
}

impl BellLabel {
    pub const PHI_PLUS: BellLabel = BellLabel::new(false, false);
    pub const PSI_PLUS: BellLabel = BellLabel::new(true, false);
    pub const PSI_MINUS: BellLabel = BellLabel::new(true, true);
    pub const PHI_MINUS: BellLabel = BellLabel::new(false, true);

    /// All labels in code order (00, 01, 10, 11).
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PHI_PLUS,
        BellLabel::PSI_PLUS,
        BellLabel::PSI_MINUS,
        BellLabel::PHI_MINUS,
    ];

    pub const fn new(x: bool, z: bool) -> Self {
        BellLabel { x, z }
    }

    /// Bit-flip component: set for the `ψ` states.
    pub const fn x(self) -> bool {
        self.x
    }

    /// Phase-flip component: set for the odd-parity (`−`) states.
    pub const fn z(self) -> bool {
        self.z
    }

    /// Position in [`BellLabel::ALL`]; equal to the value of [`BellLabel::code`].
    pub const fn index(self) -> usize {
        self.code().value() as usize
    }

    /// Alice and Bob's agreed encoding: `φ⁺→00, ψ⁺→01, ψ⁻→10, φ⁻→11`.
    pub const fn code(self) -> BitCode {
        BitCode::new(self.z, self.x ^ self.z)
    }

    pub const fn from_code(code: BitCode) -> Self {
        BellLabel::new(code.hi() ^ code.lo(), code.hi())
    }

    /// Short ASCII name used in serialized records.
    pub const fn name(self) -> &'static str {
        match (self.x, self.z) {
            (false, false) => "phi+",
            (true, false) => "psi+",
            (true, true) => "psi-",
            (false, true) => "phi-",
        }
    }
}

impl BitXor for BellLabel {
    type Output = BellLabel;

    fn bitxor(self, rhs: BellLabel) -> BellLabel {
        BellLabel::new(self.x ^ rhs.x, self.z ^ rhs.z)
    }
}

impl fmt::Debug for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let symbol = match (self.x, self.z) {
            (false, false) => "|φ⁺⟩",
            (true, false) => "|ψ⁺⟩",
            (true, true) => "|ψ⁻⟩",
            (false, true) => "|φ⁻⟩",
        };
        f.write_str(symbol)
    }
}

impl FromStr for BellLabel {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BellLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| ParseError::BellLabel(s.to_owned()))
    }
}

impl Serialize for BellLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for BellLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Alice's local operation on particle 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliOp {
    /// σ₀
    #[serde(rename = "I")]
    Identity,
    /// σ₁
    X,
    /// σ₂
    Y,
    /// σ₃
    Z,
}

impl PauliOp {
    /// All operations in code order (00, 01, 10, 11).
    pub const ALL: [PauliOp; 4] = [PauliOp::Identity, PauliOp::X, PauliOp::Y, PauliOp::Z];

    /// `σ₀→00, σ₁→01, σ₂→10, σ₃→11`.
    pub const fn code(self) -> BitCode {
        match self {
            PauliOp::Identity => BitCode::new(false, false),
            PauliOp::X => BitCode::new(false, true),
            PauliOp::Y => BitCode::new(true, false),
            PauliOp::Z => BitCode::new(true, true),
        }
    }

    pub const fn from_code(code: BitCode) -> Self {
        match code.value() {
            0 => PauliOp::Identity,
            1 => PauliOp::X,
            2 => PauliOp::Y,
            _ => PauliOp::Z,
        }
    }

    /// The label translation this operation induces on any Bell pair when it
    /// acts on one of the pair's qubits.
    pub const fn displacement(self) -> BellLabel {
        match self {
            PauliOp::Identity => BellLabel::PHI_PLUS,
            PauliOp::X => BellLabel::PSI_PLUS,
            PauliOp::Y => BellLabel::PSI_MINUS,
            PauliOp::Z => BellLabel::PHI_MINUS,
        }
    }

    /// Inverse of [`PauliOp::displacement`]; the Pauli group acts regularly on
    /// labels so every translation has exactly one operation.
    pub const fn from_displacement(shift: BellLabel) -> Self {
        match (shift.x(), shift.z()) {
            (false, false) => PauliOp::Identity,
            (true, false) => PauliOp::X,
            (true, true) => PauliOp::Y,
            (false, true) => PauliOp::Z,
        }
    }

    pub const fn index(self) -> usize {
        self.code().value() as usize
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PauliOp::Identity => "σ₀",
            PauliOp::X => "σ₁",
            PauliOp::Y => "σ₂",
            PauliOp::Z => "σ₃",
        })
    }
}

pub fn bell_to_code(label: BellLabel) -> BitCode {
    label.code()
}

pub fn code_to_bell(code: BitCode) -> BellLabel {
    BellLabel::from_code(code)
}

pub fn pauli_to_code(op: PauliOp) -> BitCode {
    op.code()
}

pub fn code_to_pauli(code: BitCode) -> PauliOp {
    PauliOp::from_code(code)
}

/// Label of the pair after `op` acts on its first qubit.
pub fn apply_pauli_first(op: PauliOp, pair: BellLabel) -> BellLabel {
    pair ^ op.displacement()
}

/// Label left on the two unmeasured particles after a Bell measurement on one
/// particle of `pair_a` and one of `pair_b` yields `outcome`.
pub fn swap_residual(pair_a: BellLabel, pair_b: BellLabel, outcome: BellLabel) -> BellLabel {
    pair_a ^ pair_b ^ outcome
}

/// One branch of an entanglement-swapping measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwapBranch {
    pub outcome: BellLabel,
    pub residual: BellLabel,
    pub probability: Ratio<u32>,
}

/// All four branches of swapping `pair_a` with `pair_b`, in outcome code order.
pub fn swap_distribution(pair_a: BellLabel, pair_b: BellLabel) -> [SwapBranch; 4] {
    BellLabel::ALL.map(|outcome| SwapBranch {
        outcome,
        residual: swap_residual(pair_a, pair_b, outcome),
        probability: Ratio::new(1, 4),
    })
}

/// The outcome particles 1 and 3 would have shown with no local operation,
/// given the residual observed on particles 2 and 4.
pub fn infer_imaginary(
    initial_a: BellLabel,
    initial_b: BellLabel,
    residual: BellLabel,
) -> BellLabel {
    initial_a ^ initial_b ^ residual
}

/// Recover the local operation from the announced outcome and Bob's residual.
///
/// The result is the unique `p` with
/// `swap_residual(apply_pauli_first(p, initial_a), initial_b, announced) == residual`.
pub fn infer_pauli(
    announced: BellLabel,
    residual: BellLabel,
    initial_a: BellLabel,
    initial_b: BellLabel,
) -> PauliOp {
    PauliOp::from_displacement(announced ^ residual ^ initial_a ^ initial_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use BellLabel as L;

    fn label() -> impl Strategy<Value = BellLabel> {
        (0usize..4).prop_map(|i| BellLabel::ALL[i])
    }

    fn pauli() -> impl Strategy<Value = PauliOp> {
        (0usize..4).prop_map(|i| PauliOp::ALL[i])
    }

    #[test]
    fn bell_code_table() {
        let expect = [
            (L::PHI_PLUS, "00"),
            (L::PSI_PLUS, "01"),
            (L::PSI_MINUS, "10"),
            (L::PHI_MINUS, "11"),
        ];
        for (label, code) in expect {
            assert_eq!(bell_to_code(label).to_string(), code, "{label:?}");
            assert_eq!(code_to_bell(code.parse().unwrap()), label);
        }
    }

    #[test]
    fn pauli_code_table() {
        assert_eq!(pauli_to_code(PauliOp::Identity).to_string(), "00");
        assert_eq!(pauli_to_code(PauliOp::X).to_string(), "01");
        assert_eq!(pauli_to_code(PauliOp::Y).to_string(), "10");
        assert_eq!(pauli_to_code(PauliOp::Z).to_string(), "11");
        for op in PauliOp::ALL {
            assert_eq!(code_to_pauli(op.code()), op);
        }
    }

    #[test]
    fn pauli_first_examples() {
        assert_eq!(apply_pauli_first(PauliOp::X, L::PHI_PLUS), L::PSI_PLUS);
        assert_eq!(apply_pauli_first(PauliOp::Y, L::PHI_PLUS), L::PSI_MINUS);
        assert_eq!(apply_pauli_first(PauliOp::Z, L::PHI_PLUS), L::PHI_MINUS);
        for l in L::ALL {
            assert_eq!(apply_pauli_first(PauliOp::Identity, l), l);
        }
    }

    #[test]
    fn four_ops_reach_every_label_once() {
        for l in L::ALL {
            let mut seen: Vec<_> = PauliOp::ALL
                .iter()
                .map(|&p| apply_pauli_first(p, l))
                .collect();
            seen.sort();
            let mut all = L::ALL.to_vec();
            all.sort();
            assert_eq!(seen, all);
        }
    }

    #[test]
    fn swap_residual_examples() {
        // |φ⁺⟩|ψ⁻⟩ measured with outcome φ⁺ leaves ψ⁻.
        assert_eq!(
            swap_residual(L::PHI_PLUS, L::PSI_MINUS, L::PHI_PLUS),
            L::PSI_MINUS
        );
        assert_eq!(
            swap_residual(L::PSI_PLUS, L::PHI_PLUS, L::PSI_MINUS),
            L::PHI_MINUS
        );
        for o in L::ALL {
            assert_eq!(swap_residual(L::PHI_PLUS, L::PHI_PLUS, o), o);
        }
    }

    #[test]
    fn swap_distribution_is_uniform_and_exhaustive() {
        for a in L::ALL {
            for b in L::ALL {
                let dist = swap_distribution(a, b);
                let total: Ratio<u32> = dist.iter().map(|br| br.probability).sum();
                assert_eq!(total, Ratio::from_integer(1));
                for (br, o) in dist.iter().zip(L::ALL) {
                    assert_eq!(br.outcome, o);
                    assert_eq!(br.probability, Ratio::new(1, 4));
                    assert_eq!(br.residual, swap_residual(a, b, o));
                }
            }
        }
        let diag = swap_distribution(L::PHI_PLUS, L::PHI_PLUS);
        assert!(diag.iter().all(|br| br.outcome == br.residual));
    }

    #[test]
    fn imaginary_examples() {
        let imag = infer_imaginary(L::PHI_PLUS, L::PHI_PLUS, L::PHI_MINUS);
        assert_eq!(imag, L::PHI_MINUS);
        assert_eq!(imag.code().to_string(), "11");
        assert_eq!(
            infer_imaginary(L::PHI_PLUS, L::PHI_PLUS, L::PHI_PLUS),
            L::PHI_PLUS
        );
    }

    #[test]
    fn pauli_inference_examples() {
        let op = infer_pauli(L::PSI_MINUS, L::PHI_MINUS, L::PHI_PLUS, L::PHI_PLUS);
        assert_eq!(op, PauliOp::X);
        assert_eq!(op.code().to_string(), "01");
        for l in L::ALL {
            assert_eq!(
                infer_pauli(l, l, L::PHI_PLUS, L::PHI_PLUS),
                PauliOp::Identity
            );
        }
    }

    #[test]
    fn label_names_parse() {
        for l in L::ALL {
            assert_eq!(l.name().parse::<BellLabel>().unwrap(), l);
        }
        assert!("phi".parse::<BellLabel>().is_err());
        assert!("2".parse::<BitCode>().is_err());
        assert_eq!(serde_json::to_string(&L::PSI_MINUS).unwrap(), "\"psi-\"");
    }

    // Brute-force enumeration of the forward protocol, independent of the XOR
    // shortcut used by `infer_pauli`: search for the operation that reproduces
    // the observed residual.
    #[test]
    fn inference_inverts_forward_protocol_exhaustively() {
        for a in L::ALL {
            for b in L::ALL {
                for p in PauliOp::ALL {
                    for o in L::ALL {
                        let residual = swap_residual(apply_pauli_first(p, a), b, o);
                        let candidates: Vec<_> = PauliOp::ALL
                            .into_iter()
                            .filter(|&q| swap_residual(apply_pauli_first(q, a), b, o) == residual)
                            .collect();
                        assert_eq!(candidates, vec![p]);
                        assert_eq!(infer_pauli(o, residual, a, b), p);
                    }
                }
            }
        }
    }

    #[test]
    fn imaginary_consistency_all_triples() {
        for a in L::ALL {
            for b in L::ALL {
                for o in L::ALL {
                    assert_eq!(infer_imaginary(a, b, swap_residual(a, b, o)), o);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn swap_is_componentwise_xor(a in label(), b in label(), o in label()) {
            let r = swap_residual(a, b, o);
            prop_assert_eq!(r.x(), a.x() ^ b.x() ^ o.x());
            prop_assert_eq!(r.z(), a.z() ^ b.z() ^ o.z());
        }

        #[test]
        fn pauli_action_is_involution(p in pauli(), l in label()) {
            prop_assert_eq!(apply_pauli_first(p, apply_pauli_first(p, l)), l);
        }

        #[test]
        fn codes_round_trip(v in 0u8..4) {
            let code = BitCode::from_value(v).unwrap();
            prop_assert_eq!(bell_to_code(code_to_bell(code)), code);
            prop_assert_eq!(pauli_to_code(code_to_pauli(code)), code);
        }

        #[test]
        fn label_xor_is_a_group(a in label(), b in label(), c in label()) {
            prop_assert_eq!((a ^ b) ^ c, a ^ (b ^ c));
            prop_assert_eq!(a ^ b, b ^ a);
            prop_assert_eq!(a ^ BellLabel::PHI_PLUS, a);
            prop_assert_eq!(a ^ a, BellLabel::PHI_PLUS);
        }
    }
}
