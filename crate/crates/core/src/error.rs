use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("unknown Bell label {0:?} (expected phi+, psi+, psi-, phi-)")]
    BellLabel(String),
    #[error("invalid two-bit code {0:?}")]
    BitCode(String),
}

/// Failures of the dense statevector simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("{requested} qubits exceeds the capacity of {max}")]
    Capacity { requested: usize, max: usize },
    #[error("a state needs at least one qubit")]
    Empty,
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("Bell measurement needs two distinct qubits, got {0} twice")]
    SameQubit(usize),
    #[error("expected {expected} amplitudes, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("expected a {expected}-qubit state, got {actual}")]
    QubitCount { expected: usize, actual: usize },
    #[error("not a Bell state")]
    NotBellState,
    #[error("ancilla overlap {0} outside [0, 1]")]
    OverlapOutOfRange(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("rounds must be positive")]
    NoRounds,
    #[error("check fraction {0} outside [0, 1)")]
    CheckFraction(f64),
    #[error("check count {count} exceeds {rounds} rounds")]
    CheckCount { count: usize, rounds: usize },
    #[error("payload has {actual} bits, expected 2 per round ({expected})")]
    PayloadLength { expected: usize, actual: usize },
    #[error("sessions must be positive")]
    NoSessions,
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error("this command needs an active attack model")]
    AttackRequired,
    #[error("trials per k must be positive")]
    NoTrials,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttackError {
    #[error("ancilla overlap {0} outside [0, 1]")]
    Overlap(f64),
    #[error("ancilla overlap only applies to the entangle attack, not {0}")]
    OverlapNotApplicable(&'static str),
    #[error("unknown attack model {0:?} (expected none, passive, entangle, mitm)")]
    Unknown(String),
}

/// Structural violations found in a classical-channel transcript.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranscriptError {
    #[error("round {round}: {message} before {missing}")]
    OutOfOrder {
        round: usize,
        message: &'static str,
        missing: &'static str,
    },
    #[error("round {round}: duplicate {message}")]
    Duplicate { round: usize, message: &'static str },
    #[error("message after abort at sequence {0}")]
    AfterAbort(usize),
    #[error("line {line}: {reason}")]
    Decode { line: usize, reason: String },
}
