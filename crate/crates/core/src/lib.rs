//! Entanglement-swapping key distribution: Bell-label algebra, a dense
//! statevector oracle, the Alice/Bob session, eavesdropper models and a
//! seeded Monte Carlo campaign harness.

pub mod adversary;
pub mod bell;
pub mod campaign;
pub mod error;
pub mod protocol;
pub mod statevector;
pub mod verify;

pub use adversary::{detection_curve, AdversaryStats, AttackModel, EveRecord};
pub use bell::{BellLabel, BitCode, PauliOp};
pub use campaign::{run_campaign, run_sweep, CampaignSpec, CampaignStats, OutputFormat, SweepSpec};
pub use error::{AttackError, ConfigError, ParseError, StateError, TranscriptError};
pub use protocol::{run_session, RoundRecord, SessionConfig, SessionResult};
pub use statevector::StateVector;
