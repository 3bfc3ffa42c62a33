//! Dialogue move selection from character type and conversational type.
//!
//! Candidate moves are scored by mixing three factors with simplex weights:
//! affinity with the speaker's own OCEAN character, affinity with the
//! estimated character of the interlocutor, and conformity to the
//! conversational type currently believed to be in force. Softmax turns the
//! scores into choice probabilities. The crate also keeps a per-participant
//! information state, runs scripted two-agent dialogues, and recovers the
//! weights from observed choices by maximum likelihood.

pub mod bakery;
pub mod convtype;
pub mod decision;
pub mod dialogue_state;
pub mod estimate;
pub mod io;
pub mod persona;
pub mod scenario;
pub mod sim;

pub use convtype::{Candidate, ConvTypeBelief, ConversationalType, ConversationalTypeDef, Transition};
pub use decision::{
    score_move, score_space, select_argmax, select_sample, softmax, DecisionFactors, MoveCandidate,
    ScoredMove, ScoredMoveSpace, Weights,
};
pub use dialogue_state::{Gameboard, InformationState, MoveRecord, PrivateState};
pub use estimate::{fit_gradient, fit_grid, log_likelihood, FitResult, Observation};
pub use persona::{cosine_similarity, ema_update, TraitVector};
pub use scenario::{Scenario, ScenarioFile};
pub use sim::{Termination, Trace, TraceEvent};
