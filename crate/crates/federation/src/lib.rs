//! Federated random-forest training, prediction and participant revocation
//! over encrypted split thresholds.
//!
//! Every party is a state machine on a [`revfrf_transport::SimBus`]; the
//! [`Federation`] drives the center server's side of each protocol and owns
//! the bus. Party ids are fixed: [`CENTER`], [`COMPUTATION`],
//! [`KEY_GENERATION`], then participants from [`FIRST_PARTICIPANT`] upward.
//! Each party's key id is its party id.

mod center;
mod error;
mod keycenter;
pub mod message;
pub mod montecarlo;
mod participant;
mod provider;
mod roles;
mod split;
pub mod token;

pub use center::{ArchivedSplit, Federation, FederationSetup, Prediction, RevocationLevel, RevocationReport};
pub use error::{FederationError, Result};
pub use keycenter::KeyCenter;
pub use message::Message;
pub use participant::{Participant, ParticipantData};
pub use provider::ComputationProvider;
pub use roles::{Role, CENTER, COMPUTATION, FIRST_PARTICIPANT, KEY_GENERATION};
pub use split::{EncryptedForest, EncryptedSplit};
