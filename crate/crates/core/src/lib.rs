//! Sequential variable-length transmission over binary asymmetric channels
//! with full noiseless feedback.
//!
//! The transmitter runs a small-enough-difference (SED) encoder: at every
//! channel use it splits the message set into two groups whose posterior
//! masses are balanced against the capacity-achieving input distribution,
//! and sends the label of the group holding the true message. The receiver
//! performs Bayes updates and stops once one posterior reaches `1 - epsilon`.
//!
//! Modules:
//! - [`channel`]: BAC model, closed-form constants, capacity oracle, sampling.
//! - [`belief`]: posterior state, Bayes update, exact one-step drift.
//! - [`sed_encoder`]: the partitioning algorithms and the SED condition.
//! - [`session_sim`]: single sessions, Monte Carlo ensembles and sweeps.
//! - [`bounds`]: achievability and converse bounds on the average blocklength.
//! - [`first_passage`]: first-passage times of the confirmation-phase chain.

pub mod belief;
pub mod bounds;
pub mod channel;
pub mod error;
pub mod first_passage;
pub mod sed_encoder;
pub mod session_sim;
mod sorted_posterior;
mod numeric;

pub use belief::{BeliefState, Partition};
pub use bounds::BoundSet;
pub use channel::{ChannelSpec, ChannelStats, Relabel};
pub use error::{Error, Result};
pub use first_passage::FirstPassageProblem;
pub use sed_encoder::{Algorithm, EncoderConfig};
pub use session_sim::{SessionConfig, SimSummary, SweepRow, TrialRecord};
