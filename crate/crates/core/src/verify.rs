//! Exhaustive cross-checks of the label algebra against the statevector oracle.
//!
//! Every check enumerates its full case space and reports the failing cases by
//! name; [`run_all`] is what `swapkey verify` prints.

use std::fmt;

use num_rational::Ratio;

use crate::bell::{
    apply_pauli_first, infer_imaginary, infer_pauli, swap_distribution, swap_residual, BellLabel,
    PauliOp,
};
use crate::statevector::StateVector;

use BellLabel as L;

/// Result of one named check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status}  {:<46} {:>4} cases", self.name, self.cases)?;
        for failure in &self.failures {
            write!(f, "\n      {failure}")?;
        }
        Ok(())
    }
}

struct Check {
    name: &'static str,
    cases: usize,
    failures: Vec<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            cases: 0,
            failures: Vec::new(),
        }
    }

    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(describe());
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name,
            cases: self.cases,
            failures: self.failures,
        }
    }
}

const QUARTER_TOLERANCE: f64 = 1e-12;

/// Qubits 0..3 hold particles 1..4.
fn four_particles(a: BellLabel, b: BellLabel) -> StateVector {
    StateVector::bell_pair(a)
        .tensor(&StateVector::bell_pair(b))
        .expect("four qubits fit")
}

/// Oracle branch: probability of `outcome` on `measured` and the label then
/// left on `residual`.
fn oracle_branch(
    state: &StateVector,
    measured: (usize, usize),
    residual: (usize, usize),
    outcome: BellLabel,
) -> (f64, Option<BellLabel>) {
    let (p, post) = state
        .project_bell(measured.0, measured.1, outcome)
        .expect("valid qubits");
    let label = post.and_then(|s| {
        s.definite_bell(residual.0, residual.1)
            .expect("valid qubits")
    });
    (p, label)
}

/// A literal swapping table: measured outcome → residual label.
fn table_check(
    name: &'static str,
    pair_a: BellLabel,
    pair_b: BellLabel,
    measured: (usize, usize),
    residual: (usize, usize),
    table: [(BellLabel, BellLabel); 4],
) -> CheckOutcome {
    let mut check = Check::new(name);
    let state = four_particles(pair_a, pair_b);
    for (outcome, expect) in table {
        let (p, got) = oracle_branch(&state, measured, residual, outcome);
        check.case((p - 0.25).abs() < QUARTER_TOLERANCE && got == Some(expect), || {
            format!("oracle: outcome {outcome:?} gives p={p}, residual {got:?}, table says {expect:?}")
        });
        let algebra = swap_residual(pair_a, pair_b, outcome);
        check.case(algebra == expect, || {
            format!("algebra: outcome {outcome:?} gives {algebra:?}, table says {expect:?}")
        });
    }
    check.finish()
}

/// `|φ⁺⟩₁₂|ψ⁻⟩₃₄`, measured on 2 and 3, residual on 1 and 4.
pub fn phi_plus_psi_minus_table() -> CheckOutcome {
    table_check(
        "swap table |φ⁺⟩₁₂|ψ⁻⟩₃₄ on (2,3)",
        L::PHI_PLUS,
        L::PSI_MINUS,
        (1, 2),
        (0, 3),
        [
            (L::PHI_PLUS, L::PSI_MINUS),
            (L::PHI_MINUS, L::PSI_PLUS),
            (L::PSI_PLUS, L::PHI_MINUS),
            (L::PSI_MINUS, L::PHI_PLUS),
        ],
    )
}

/// `|ψ⁺⟩₁₂|φ⁺⟩₃₄`, measured on 1 and 3.
pub fn psi_plus_phi_plus_table() -> CheckOutcome {
    table_check(
        "swap table |ψ⁺⟩₁₂|φ⁺⟩₃₄ on (1,3)",
        L::PSI_PLUS,
        L::PHI_PLUS,
        (0, 2),
        (1, 3),
        [
            (L::PHI_PLUS, L::PSI_PLUS),
            (L::PHI_MINUS, L::PSI_MINUS),
            (L::PSI_PLUS, L::PHI_PLUS),
            (L::PSI_MINUS, L::PHI_MINUS),
        ],
    )
}

/// `|φ⁺⟩₁₂|φ⁺⟩₃₄`, measured on 1 and 3: outcome and residual coincide.
pub fn diagonal_table() -> CheckOutcome {
    table_check(
        "swap table |φ⁺⟩₁₂|φ⁺⟩₃₄ on (1,3)",
        L::PHI_PLUS,
        L::PHI_PLUS,
        (0, 2),
        (1, 3),
        L::ALL.map(|l| (l, l)),
    )
}

fn oracle_equivalence(
    name: &'static str,
    measured: (usize, usize),
    residual: (usize, usize),
) -> CheckOutcome {
    let mut check = Check::new(name);
    for a in L::ALL {
        for b in L::ALL {
            let state = four_particles(a, b);
            let probs = state
                .bell_probabilities(measured.0, measured.1)
                .expect("valid qubits");
            for branch in swap_distribution(a, b) {
                let (p, got) = oracle_branch(&state, measured, residual, branch.outcome);
                let exact = branch.probability == Ratio::new(1, 4);
                let ok = exact
                    && (p - 0.25).abs() < QUARTER_TOLERANCE
                    && (probs[branch.outcome.index()] - p).abs() < QUARTER_TOLERANCE
                    && got == Some(branch.residual);
                check.case(ok, || {
                    format!(
                        "{a:?}⊗{b:?} outcome {:?}: oracle p={p} residual {got:?}, algebra p={} residual {:?}",
                        branch.outcome, branch.probability, branch.residual
                    )
                });
            }
        }
    }
    check.finish()
}

/// All 16 ordered pairs × 4 outcomes, measuring particles 1 and 3.
pub fn oracle_equivalence_13() -> CheckOutcome {
    oracle_equivalence(
        "oracle equivalence, measure (1,3) keep (2,4)",
        (0, 2),
        (1, 3),
    )
}

/// All 16 ordered pairs × 4 outcomes, measuring particles 2 and 3.
pub fn oracle_equivalence_23() -> CheckOutcome {
    oracle_equivalence(
        "oracle equivalence, measure (2,3) keep (1,4)",
        (1, 2),
        (0, 3),
    )
}

pub fn code_tables() -> CheckOutcome {
    let mut check = Check::new("bit encodings of labels and operations");
    let bell = [
        (L::PHI_PLUS, "00"),
        (L::PSI_PLUS, "01"),
        (L::PSI_MINUS, "10"),
        (L::PHI_MINUS, "11"),
    ];
    for (label, code) in bell {
        let got = label.code().to_string();
        check.case(got == code, || {
            format!("{label:?} encodes as {got}, expected {code}")
        });
        check.case(L::from_code(label.code()) == label, || {
            format!("{label:?} does not round-trip")
        });
    }
    let pauli = [
        (PauliOp::Identity, "00"),
        (PauliOp::X, "01"),
        (PauliOp::Y, "10"),
        (PauliOp::Z, "11"),
    ];
    for (op, code) in pauli {
        let got = op.code().to_string();
        check.case(got == code, || {
            format!("{op:?} encodes as {got}, expected {code}")
        });
        check.case(PauliOp::from_code(op.code()) == op, || {
            format!("{op:?} does not round-trip")
        });
    }
    check.finish()
}

/// Label action of each Pauli against the matrices, on either qubit of a pair.
pub fn pauli_action() -> CheckOutcome {
    let mut check = Check::new("Pauli label action vs oracle");
    for label in L::ALL {
        for op in PauliOp::ALL {
            for qubit in 0..2 {
                let state = StateVector::bell_pair(label)
                    .apply_pauli(qubit, op)
                    .expect("valid qubit");
                let got = state.identify_bell().ok();
                let expect = apply_pauli_first(op, label);
                check.case(got == Some(expect), || {
                    format!(
                        "{op:?} on qubit {qubit} of {label:?}: oracle {got:?}, algebra {expect:?}"
                    )
                });
            }
        }
    }
    check.finish()
}

pub fn xor_law() -> CheckOutcome {
    let mut check = Check::new("swap residual is componentwise XOR");
    for a in L::ALL {
        for b in L::ALL {
            for o in L::ALL {
                let r = swap_residual(a, b, o);
                let ok = r.x() == (a.x() ^ b.x() ^ o.x()) && r.z() == (a.z() ^ b.z() ^ o.z());
                check.case(ok, || format!("({a:?}, {b:?}, {o:?}) -> {r:?}"));
            }
        }
    }
    check.finish()
}

/// Forward protocol over all initial labels, operations and outcomes; the
/// inferences must undo it.
pub fn inference_round_trip() -> CheckOutcome {
    let mut check = Check::new("inference inverts the forward protocol");
    for a in L::ALL {
        for b in L::ALL {
            for op in PauliOp::ALL {
                for o in L::ALL {
                    let residual = swap_residual(apply_pauli_first(op, a), b, o);
                    let inferred = infer_pauli(o, residual, a, b);
                    check.case(inferred == op, || {
                        format!(
                            "initial ({a:?}, {b:?}) {op:?} outcome {o:?}: inferred {inferred:?}"
                        )
                    });
                }
            }
        }
    }
    for a in L::ALL {
        for b in L::ALL {
            for o in L::ALL {
                let imaginary = infer_imaginary(a, b, swap_residual(a, b, o));
                check.case(imaginary == o, || {
                    format!("imaginary for ({a:?}, {b:?}, {o:?}) is {imaginary:?}")
                });
            }
        }
    }
    check.finish()
}

pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        code_tables(),
        pauli_action(),
        phi_plus_psi_minus_table(),
        psi_plus_phi_plus_table(),
        diagonal_table(),
        oracle_equivalence_13(),
        oracle_equivalence_23(),
        xor_law(),
        inference_round_trip(),
    ]
}
