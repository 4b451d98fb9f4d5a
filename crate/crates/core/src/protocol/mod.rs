//! The Alice/Bob key-distribution session.
//!
//! Per round Alice prepares `|φ⁺⟩₁₂|φ⁺⟩₃₄`, sends particles 2 and 4 to Bob,
//! applies her chosen Pauli to particle 1 and Bell-measures 1 and 3. Bob
//! Bell-measures 2 and 4, asks for Alice's outcome and recovers her operation.
//! Each round yields six key bits: the two "certain" bits of the operation,
//! then the codes of Bob's residual and of Alice's announced outcome.

mod message;
mod round;
mod session;

pub use message::{ClassicalMessage, Party, Transcript, TranscriptEntry};
pub use round::{
    alice_round, alice_round_with_outcome, bob_round, AliceRound, BobPair, BobRound, InitialPairs,
    RoundKey,
};
pub use session::{
    run_session, sift_and_check, CheckPolicy, DetectionReport, PauliSource, RoundRecord,
    SessionConfig, SessionResult, SiftOutcome,
};
