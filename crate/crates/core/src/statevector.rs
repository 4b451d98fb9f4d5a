//! Dense complex-amplitude simulator for small qubit registers.
//!
//! Qubit 0 is the most significant bit of the basis index, so for a two-qubit
//! state the amplitudes are ordered `|00⟩, |01⟩, |10⟩, |11⟩` with the first
//! qubit on the left. States are values: every operation returns a new state.
//!
//! This is the brute-force reference for [`crate::bell`] and the exact model of
//! the attacks that need more than label bookkeeping.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::bell::{BellLabel, PauliOp};
use crate::error::StateError;

pub const MAX_QUBITS: usize = 8;

/// Tolerance on the squared norm.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Tolerance for identifying a state up to global phase.
pub const IDENTIFY_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// Outcome of a Bell measurement on a qubit pair.
#[derive(Clone, Debug)]
pub struct MeasureResult {
    pub outcome: BellLabel,
    pub probability: f64,
    /// Full register with the measured pair collapsed onto `outcome`.
    pub post_state: StateVector,
}

/// Amplitudes `b[2i + j]` of a Bell state on `|i j⟩`.
fn bell_amplitudes(label: BellLabel) -> [f64; 4] {
    let h = FRAC_1_SQRT_2;
    let sign = if label.z() { -h } else { h };
    if label.x() {
        [0.0, h, sign, 0.0]
    } else {
        [h, 0.0, 0.0, sign]
    }
}

impl StateVector {
    /// Build from raw amplitudes, checking length and normalization.
    pub fn from_amplitudes(
        num_qubits: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, StateError> {
        check_capacity(num_qubits)?;
        let expected = 1usize << num_qubits;
        if amplitudes.len() != expected {
            return Err(StateError::Length {
                expected,
                actual: amplitudes.len(),
            });
        }
        let state = StateVector {
            num_qubits,
            amplitudes,
        };
        let n = state.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(StateError::NotNormalized(n));
        }
        Ok(state)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, StateError> {
        check_capacity(num_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        let len = amplitudes.len();
        *amplitudes.get_mut(index).ok_or(StateError::Length {
            expected: len,
            actual: index,
        })? = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Canonical two-qubit Bell state: `(|00⟩ ± |11⟩)/√2` or `(|01⟩ ± |10⟩)/√2`.
    pub fn bell_pair(label: BellLabel) -> Self {
        StateVector {
            num_qubits: 2,
            amplitudes: bell_amplitudes(label)
                .iter()
                .map(|&a| Complex64::new(a, 0.0))
                .collect(),
        }
    }

    /// Three-qubit source `(|00⟩|α⟩ + |11⟩|β⟩)/√2` with Eve's register as the
    /// last qubit, `α = |0⟩` and `β = c|0⟩ + √(1−c²)|1⟩` where `c = ⟨α|β⟩`.
    pub fn entangled_source(ancilla_overlap: f64) -> Result<Self, StateError> {
        if !(0.0..=1.0).contains(&ancilla_overlap) {
            return Err(StateError::OverlapOutOfRange(ancilla_overlap));
        }
        let c = ancilla_overlap;
        let s = (1.0 - c * c).max(0.0).sqrt();
        let h = FRAC_1_SQRT_2;
        let mut amplitudes = vec![ZERO; 8];
        amplitudes[0b000] = Complex64::new(h, 0.0);
        amplitudes[0b110] = Complex64::new(h * c, 0.0);
        amplitudes[0b111] = Complex64::new(h * s, 0.0);
        Ok(StateVector {
            num_qubits: 3,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiply every amplitude by `e^{iθ}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        StateVector {
            num_qubits: self.num_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
        }
    }

    /// Kronecker product; `self` supplies the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self, StateError> {
        let num_qubits = self.num_qubits + other.num_qubits;
        check_capacity(num_qubits)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn apply_pauli(&self, qubit: usize, op: PauliOp) -> Result<Self, StateError> {
        let mask = self.mask(qubit)?;
        let mut out = self.amplitudes.clone();
        let i = Complex64::i();
        for idx in (0..out.len()).filter(|idx| idx & mask == 0) {
            let (a0, a1) = (self.amplitudes[idx], self.amplitudes[idx | mask]);
            let (b0, b1) = match op {
                PauliOp::Identity => (a0, a1),
                PauliOp::X => (a1, a0),
                PauliOp::Y => (-i * a1, i * a0),
                PauliOp::Z => (a0, -a1),
            };
            out[idx] = b0;
            out[idx | mask] = b1;
        }
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amplitudes: out,
        })
    }

    /// Born-rule probabilities of projecting `(q1, q2)` onto each Bell state,
    /// indexed by [`BellLabel::index`].
    pub fn bell_probabilities(&self, q1: usize, q2: usize) -> Result<[f64; 4], StateError> {
        let (m1, m2) = self.pair_masks(q1, q2)?;
        let mut probs = [0.0; 4];
        for label in BellLabel::ALL {
            probs[label.index()] = self
                .bell_overlaps(m1, m2, label)
                .map(|c| c.norm_sqr())
                .sum();
        }
        Ok(probs)
    }

    /// Project `(q1, q2)` onto `label`. Returns the branch probability and the
    /// normalized post-measurement state, or `None` for an impossible branch.
    pub fn project_bell(
        &self,
        q1: usize,
        q2: usize,
        label: BellLabel,
    ) -> Result<(f64, Option<StateVector>), StateError> {
        let (m1, m2) = self.pair_masks(q1, q2)?;
        let overlaps: Vec<Complex64> = self.bell_overlaps(m1, m2, label).collect();
        let probability: f64 = overlaps.iter().map(|c| c.norm_sqr()).sum();
        if probability <= NORM_TOLERANCE {
            return Ok((probability, None));
        }
        let b = bell_amplitudes(label);
        let scale = probability.sqrt().recip();
        let mut amplitudes = vec![ZERO; self.amplitudes.len()];
        for (base, c) in self.pair_bases(m1, m2).zip(overlaps) {
            for (k, idx) in quad(base, m1, m2).into_iter().enumerate() {
                amplitudes[idx] = c * b[k] * scale;
            }
        }
        Ok((
            probability,
            Some(StateVector {
                num_qubits: self.num_qubits,
                amplitudes,
            }),
        ))
    }

    /// Sample a Bell measurement of `(q1, q2)`.
    pub fn bell_measure<R: Rng + ?Sized>(
        &self,
        q1: usize,
        q2: usize,
        rng: &mut R,
    ) -> Result<MeasureResult, StateError> {
        let probs = self.bell_probabilities(q1, q2)?;
        let draw: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
        let mut acc = 0.0;
        let mut chosen = None;
        for label in BellLabel::ALL {
            let p = probs[label.index()];
            if p <= NORM_TOLERANCE {
                continue;
            }
            chosen = Some(label);
            acc += p;
            if draw < acc {
                break;
            }
        }
        // A normalized state always has some branch above tolerance.
        let outcome = chosen.ok_or(StateError::NotNormalized(self.norm_sqr()))?;
        let (probability, post) = self.project_bell(q1, q2, outcome)?;
        Ok(MeasureResult {
            outcome,
            probability,
            post_state: post.ok_or(StateError::NotNormalized(probability))?,
        })
    }

    /// The Bell label of a two-qubit state, up to global phase.
    pub fn identify_bell(&self) -> Result<BellLabel, StateError> {
        if self.num_qubits != 2 {
            return Err(StateError::QubitCount {
                expected: 2,
                actual: self.num_qubits,
            });
        }
        BellLabel::ALL
            .into_iter()
            .find(|&l| self.equals_up_to_phase(&StateVector::bell_pair(l), IDENTIFY_TOLERANCE))
            .ok_or(StateError::NotBellState)
    }

    /// The label `(q1, q2)` is certain to show, if any.
    pub fn definite_bell(&self, q1: usize, q2: usize) -> Result<Option<BellLabel>, StateError> {
        let probs = self.bell_probabilities(q1, q2)?;
        Ok(BellLabel::ALL
            .into_iter()
            .find(|l| (probs[l.index()] - 1.0).abs() <= IDENTIFY_TOLERANCE))
    }

    /// `|⟨self|other⟩| = 1` within `tol`, for normalized states.
    pub fn equals_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        if self.num_qubits != other.num_qubits {
            return false;
        }
        let inner: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        (inner.norm() - 1.0).abs() <= tol
    }

    fn mask(&self, qubit: usize) -> Result<usize, StateError> {
        if qubit >= self.num_qubits {
            return Err(StateError::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(1 << (self.num_qubits - 1 - qubit))
    }

    fn pair_masks(&self, q1: usize, q2: usize) -> Result<(usize, usize), StateError> {
        if q1 == q2 {
            return Err(StateError::SameQubit(q1));
        }
        Ok((self.mask(q1)?, self.mask(q2)?))
    }

    /// Basis indices with both measured bits clear.
    fn pair_bases(&self, m1: usize, m2: usize) -> impl Iterator<Item = usize> {
        (0..self.amplitudes.len()).filter(move |idx| idx & (m1 | m2) == 0)
    }

    /// `⟨B| ⊗ I` applied to the state, one overlap per rest-of-register index.
    fn bell_overlaps(
        &self,
        m1: usize,
        m2: usize,
        label: BellLabel,
    ) -> impl Iterator<Item = Complex64> + '_ {
        let b = bell_amplitudes(label);
        self.pair_bases(m1, m2).map(move |base| {
            quad(base, m1, m2)
                .into_iter()
                .zip(b)
                .map(|(idx, bk)| self.amplitudes[idx] * bk)
                .sum()
        })
    }
}

/// Indices of `|00⟩, |01⟩, |10⟩, |11⟩` on the measured pair above `base`.
fn quad(base: usize, m1: usize, m2: usize) -> [usize; 4] {
    [base, base | m2, base | m1, base | m1 | m2]
}

fn check_capacity(num_qubits: usize) -> Result<(), StateError> {
    if num_qubits == 0 {
        return Err(StateError::Empty);
    }
    if num_qubits > MAX_QUBITS {
        return Err(StateError::Capacity {
            requested: num_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use BellLabel as L;

    const H: f64 = FRAC_1_SQRT_2;

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn assert_amps(state: &StateVector, expect: &[f64]) {
        for (a, e) in state.amplitudes().iter().zip(expect) {
            assert!(
                (a - Complex64::new(*e, 0.0)).norm() < 1e-12,
                "{:?} vs {:?}",
                state.amplitudes(),
                expect
            );
        }
    }

    #[test]
    fn bell_pair_amplitudes() {
        assert_amps(&StateVector::bell_pair(L::PHI_PLUS), &[H, 0.0, 0.0, H]);
        assert_amps(&StateVector::bell_pair(L::PSI_MINUS), &[0.0, H, -H, 0.0]);
        assert_amps(&StateVector::bell_pair(L::PSI_PLUS), &[0.0, H, H, 0.0]);
        assert_amps(&StateVector::bell_pair(L::PHI_MINUS), &[H, 0.0, 0.0, -H]);
        for l in L::ALL {
            assert_eq!(StateVector::bell_pair(l).identify_bell().unwrap(), l);
        }
    }

    #[test]
    fn identify_ignores_global_phase() {
        let s = StateVector::bell_pair(L::PHI_MINUS).with_global_phase(0.7);
        assert_eq!(s.identify_bell().unwrap(), L::PHI_MINUS);
    }

    #[test]
    fn identify_rejects_product_state() {
        let s = StateVector::from_amplitudes(2, re(&[H, H, 0.0, 0.0])).unwrap();
        assert_eq!(s.identify_bell(), Err(StateError::NotBellState));
        let three = StateVector::basis(3, 0).unwrap();
        assert!(matches!(
            three.identify_bell(),
            Err(StateError::QubitCount { .. })
        ));
    }

    #[test]
    fn tensor_matches_hand_expansion() {
        // |φ⁺⟩₁₂ ⊗ |ψ⁻⟩₃₄ = ½(|00⟩+|11⟩)(|01⟩−|10⟩)
        let s = StateVector::bell_pair(L::PHI_PLUS)
            .tensor(&StateVector::bell_pair(L::PSI_MINUS))
            .unwrap();
        let mut expect = [0.0; 16];
        expect[0b0001] = 0.5;
        expect[0b0010] = -0.5;
        expect[0b1101] = 0.5;
        expect[0b1110] = -0.5;
        assert_amps(&s, &expect);
    }

    #[test]
    fn tensor_capacity() {
        let five = StateVector::basis(5, 0).unwrap();
        let four = StateVector::basis(4, 0).unwrap();
        assert_eq!(
            five.tensor(&four),
            Err(StateError::Capacity {
                requested: 9,
                max: 8
            })
        );
        assert!(StateVector::basis(9, 0).is_err());
    }

    #[test]
    fn tensor_with_zero_keeps_magnitudes() {
        let s = StateVector::bell_pair(L::PSI_MINUS);
        let t = s.tensor(&StateVector::basis(1, 0).unwrap()).unwrap();
        let mut mags: Vec<f64> = t
            .amplitudes()
            .iter()
            .map(|a| a.norm())
            .filter(|m| *m > 0.0)
            .collect();
        mags.sort_by(f64::total_cmp);
        assert_eq!(mags.len(), 2);
        assert!(mags.iter().all(|m| (m - H).abs() < 1e-15));
    }

    #[test]
    fn pauli_x_turns_phi_plus_into_psi_plus() {
        let s = StateVector::bell_pair(L::PHI_PLUS)
            .apply_pauli(0, PauliOp::X)
            .unwrap();
        assert_eq!(s.identify_bell().unwrap(), L::PSI_PLUS);
    }

    #[test]
    fn pauli_y_on_phi_plus_is_psi_minus() {
        let s = StateVector::bell_pair(L::PHI_PLUS)
            .apply_pauli(0, PauliOp::Y)
            .unwrap();
        assert_eq!(s.identify_bell().unwrap(), L::PSI_MINUS);
    }

    #[test]
    fn pauli_identity_and_involution() {
        let s = StateVector::bell_pair(L::PSI_PLUS)
            .tensor(&StateVector::bell_pair(L::PHI_MINUS))
            .unwrap();
        for q in 0..4 {
            assert_eq!(s.apply_pauli(q, PauliOp::Identity).unwrap(), s);
            for op in PauliOp::ALL {
                let twice = s.apply_pauli(q, op).unwrap().apply_pauli(q, op).unwrap();
                assert!(twice.equals_up_to_phase(&s, 1e-12));
            }
        }
        assert_eq!(
            s.apply_pauli(4, PauliOp::X),
            Err(StateError::QubitOutOfRange {
                qubit: 4,
                num_qubits: 4
            })
        );
    }

    #[test]
    fn bell_probabilities_examples() {
        let phi = StateVector::bell_pair(L::PHI_PLUS);
        let s = phi.tensor(&phi).unwrap();
        let p = s.bell_probabilities(0, 2).unwrap();
        assert!(p.iter().all(|x| (x - 0.25).abs() < 1e-12));
        for l in L::ALL {
            let p = StateVector::bell_pair(l).bell_probabilities(0, 1).unwrap();
            assert!((p[l.index()] - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.bell_probabilities(1, 1), Err(StateError::SameQubit(1)));
        assert!(s.bell_probabilities(0, 7).is_err());
    }

    #[test]
    fn psi_plus_phi_plus_residuals() {
        // |ψ⁺⟩₁₂|φ⁺⟩₃₄ measured on 1,3: φ⁺→ψ⁺, φ⁻→ψ⁻, ψ⁺→φ⁺, ψ⁻→φ⁻ on 2,4.
        let s = StateVector::bell_pair(L::PSI_PLUS)
            .tensor(&StateVector::bell_pair(L::PHI_PLUS))
            .unwrap();
        let table = [
            (L::PHI_PLUS, L::PSI_PLUS),
            (L::PHI_MINUS, L::PSI_MINUS),
            (L::PSI_PLUS, L::PHI_PLUS),
            (L::PSI_MINUS, L::PHI_MINUS),
        ];
        for (outcome, residual) in table {
            let (p, post) = s.project_bell(0, 2, outcome).unwrap();
            assert!((p - 0.25).abs() < 1e-12);
            assert_eq!(post.unwrap().definite_bell(1, 3).unwrap(), Some(residual));
        }
    }

    #[test]
    fn measurement_collapses_in_place() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = StateVector::bell_pair(L::PHI_MINUS);
        let m = s.bell_measure(0, 1, &mut rng).unwrap();
        assert_eq!(m.outcome, L::PHI_MINUS);
        assert!((m.probability - 1.0).abs() < 1e-12);

        let phi = StateVector::bell_pair(L::PHI_PLUS);
        let big = phi.tensor(&phi).unwrap();
        for _ in 0..50 {
            let first = big.bell_measure(0, 2, &mut rng).unwrap();
            assert_eq!(first.post_state.num_qubits(), 4);
            assert!((first.post_state.norm_sqr() - 1.0).abs() < 1e-12);
            let again = first.post_state.bell_measure(0, 2, &mut rng).unwrap();
            assert_eq!(again.outcome, first.outcome);
            assert!((again.probability - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_frequencies_track_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // Unequal weights: (|0⟩ cos t + |1⟩ sin t) ⊗ |0⟩ has Bell weights cos²/2, sin²/2.
        let t: f64 = 0.4;
        let s = StateVector::from_amplitudes(2, re(&[t.cos(), 0.0, t.sin(), 0.0])).unwrap();
        let exact = s.bell_probabilities(0, 1).unwrap();
        let n = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[s.bell_measure(0, 1, &mut rng).unwrap().outcome.index()] += 1;
        }
        for k in 0..4 {
            let f = counts[k] as f64 / n as f64;
            assert!((f - exact[k]).abs() < 0.02, "{k}: {f} vs {}", exact[k]);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let phi = StateVector::bell_pair(L::PHI_PLUS);
        let s = phi.tensor(&phi).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64)
                .map(|_| s.bell_measure(0, 2, &mut rng).unwrap().outcome)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn entangled_source_limits() {
        let ghz = StateVector::entangled_source(0.0).unwrap();
        assert_amps(&ghz, &[H, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, H]);
        let none = StateVector::entangled_source(1.0).unwrap();
        let expect = StateVector::bell_pair(L::PHI_PLUS)
            .tensor(&StateVector::basis(1, 0).unwrap())
            .unwrap();
        assert!(none.equals_up_to_phase(&expect, 1e-12));
        let half = StateVector::entangled_source(0.5).unwrap();
        assert!((half.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(
            StateVector::entangled_source(1.5),
            Err(StateError::OverlapOutOfRange(1.5))
        );
        assert!(StateVector::entangled_source(-0.1).is_err());
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(matches!(
            StateVector::from_amplitudes(2, re(&[1.0, 1.0, 0.0, 0.0])),
            Err(StateError::NotNormalized(_))
        ));
        assert!(matches!(
            StateVector::from_amplitudes(2, re(&[1.0])),
            Err(StateError::Length {
                expected: 4,
                actual: 1
            })
        ));
    }

    fn random_state(seed: u64, num_qubits: usize) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<Complex64> = (0..1 << num_qubits)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        StateVector::from_amplitudes(num_qubits, raw.into_iter().map(|a| a / norm).collect())
            .unwrap()
    }

    proptest! {
        #[test]
        fn tensor_preserves_norm(sa in any::<u64>(), sb in any::<u64>(), na in 1usize..5, nb in 1usize..4) {
            let t = random_state(sa, na).tensor(&random_state(sb, nb)).unwrap();
            prop_assert!((t.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
        }

        #[test]
        fn paulis_and_projections_preserve_norm(seed in any::<u64>(), q in 0usize..4, op in 0usize..4, l in 0usize..4) {
            let s = random_state(seed, 4);
            let p = s.apply_pauli(q, PauliOp::ALL[op]).unwrap();
            prop_assert!((p.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
            let probs = s.bell_probabilities(q, (q + 1) % 4).unwrap();
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < NORM_TOLERANCE);
            if let (_, Some(post)) = s.project_bell(q, (q + 1) % 4, L::ALL[l]).unwrap() {
                prop_assert!((post.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
            }
        }
    }
}
