//! Conversational types as deterministic labeled transition systems.
//!
//! A type names its dialogue states, the initial and final states, the
//! transitions licensed by move labels, the questions it puts up for
//! discussion, and optional graded conformity scores for particular moves.
//! [`ConvTypeBelief`] is a probability distribution over candidate types with
//! one of them marked active.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the sum of candidate probabilities.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

/// Likelihood floor used by [`bayes_update`]; keeps any candidate from being
/// eliminated by a single off-type move.
pub const LIKELIHOOD_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvTypeError {
    #[error("conversational type `{ty}` has no state `{state}`")]
    UnknownState { ty: String, state: String },

    #[error("conversational type `{ty}`: init state `{state}` is not among its states")]
    BadInitState { ty: String, state: String },

    #[error("conversational type `{ty}`: final state `{state}` is not among its states")]
    BadFinalState { ty: String, state: String },

    #[error("conversational type `{0}` has no final states")]
    NoFinalStates(String),

    #[error("conversational type `{ty}`: transition {from} --{label}--> {to} references an unknown state")]
    BadTransition {
        ty: String,
        from: String,
        label: String,
        to: String,
    },

    #[error("conversational type `{ty}`: duplicate transition from `{from}` on `{label}`")]
    DuplicateTransition { ty: String, from: String, label: String },

    #[error("conversational type `{ty}`: conformity for `{label}` is {value}, outside [-1, 1]")]
    ConformityOutOfRange { ty: String, label: String, value: f64 },

    #[error("belief has no candidates")]
    EmptyBelief,

    #[error("candidate probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("candidate probabilities sum to {0}, expected 1")]
    NotNormalized(f64),

    #[error("active index {index} out of range for {len} candidates")]
    BadActiveIndex { index: usize, len: usize },

    #[error("expected {expected} current states (one per candidate), got {got}")]
    StateCountMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    pub label: String,
    pub to: String,
}

/// Plain-data form of a conversational type, as written in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConversationalTypeDef {
    pub name: String,
    pub states: Vec<String>,
    pub init_state: String,
    pub final_states: Vec<String>,
    #[serde(default)]
    pub transitions: Vec<Transition>,
    #[serde(default)]
    pub qnud: Vec<String>,
    #[serde(default)]
    pub conformity: BTreeMap<String, f64>,
}

/// A validated conversational type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConversationalTypeDef", into = "ConversationalTypeDef")]
pub struct ConversationalType {
    def: ConversationalTypeDef,
    states: BTreeSet<String>,
    finals: BTreeSet<String>,
    table: HashMap<(String, String), String>,
}

/// Result of following a move label from a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advance {
    pub state: String,
    /// True when no transition matched and the machine stayed put.
    pub off_type: bool,
}

impl ConversationalType {
    pub fn new(def: ConversationalTypeDef) -> Result<Self, ConvTypeError> {
        let ty = def.name.clone();
        let states: BTreeSet<String> = def.states.iter().cloned().collect();
        if !states.contains(&def.init_state) {
            return Err(ConvTypeError::BadInitState {
                ty,
                state: def.init_state.clone(),
            });
        }
        if def.final_states.is_empty() {
            return Err(ConvTypeError::NoFinalStates(ty));
        }
        for f in &def.final_states {
            if !states.contains(f) {
                return Err(ConvTypeError::BadFinalState { ty, state: f.clone() });
            }
        }
        let mut table = HashMap::with_capacity(def.transitions.len());
        for t in &def.transitions {
            if !states.contains(&t.from) || !states.contains(&t.to) {
                return Err(ConvTypeError::BadTransition {
                    ty,
                    from: t.from.clone(),
                    label: t.label.clone(),
                    to: t.to.clone(),
                });
            }
            if table
                .insert((t.from.clone(), t.label.clone()), t.to.clone())
                .is_some()
            {
                return Err(ConvTypeError::DuplicateTransition {
                    ty,
                    from: t.from.clone(),
                    label: t.label.clone(),
                });
            }
        }
        for (label, &value) in &def.conformity {
            if !value.is_finite() || !(-1.0..=1.0).contains(&value) {
                return Err(ConvTypeError::ConformityOutOfRange {
                    ty,
                    label: label.clone(),
                    value,
                });
            }
        }
        let finals = def.final_states.iter().cloned().collect();
        Ok(Self {
            def,
            states,
            finals,
            table,
        })
    }

    pub fn name(&self) -> &str {
        &self.def.name
    }

    pub fn init_state(&self) -> &str {
        &self.def.init_state
    }

    pub fn states(&self) -> impl Iterator<Item = &str> {
        self.states.iter().map(String::as_str)
    }

    pub fn final_states(&self) -> impl Iterator<Item = &str> {
        self.finals.iter().map(String::as_str)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.def.transitions
    }

    pub fn qnud(&self) -> &[String] {
        &self.def.qnud
    }

    pub fn has_state(&self, state: &str) -> bool {
        self.states.contains(state)
    }

    pub fn def(&self) -> &ConversationalTypeDef {
        &self.def
    }

    fn check_state(&self, state: &str) -> Result<(), ConvTypeError> {
        if self.has_state(state) {
            Ok(())
        } else {
            Err(ConvTypeError::UnknownState {
                ty: self.def.name.clone(),
                state: state.to_owned(),
            })
        }
    }

    fn lookup(&self, state: &str, label: &str) -> Option<&String> {
        // HashMap<(String, String), _> can't be queried with borrowed pairs.
        self.table.get(&(state.to_owned(), label.to_owned()))
    }

    /// Degree in `[-1, 1]` to which `move_label` fits this type at `current_state`.
    ///
    /// Authored overrides win; otherwise +1 when a transition exists and -1
    /// when it does not.
    pub fn conformity(&self, move_label: &str, current_state: &str) -> Result<f64, ConvTypeError> {
        self.check_state(current_state)?;
        if let Some(&d) = self.def.conformity.get(move_label) {
            return Ok(d);
        }
        Ok(if self.lookup(current_state, move_label).is_some() {
            1.0
        } else {
            -1.0
        })
    }

    /// Follows the transition for `move_label`, or stays in place and flags
    /// the move as off-type.
    pub fn advance(&self, current_state: &str, move_label: &str) -> Result<Advance, ConvTypeError> {
        self.check_state(current_state)?;
        Ok(match self.lookup(current_state, move_label) {
            Some(to) => Advance {
                state: to.clone(),
                off_type: false,
            },
            None => Advance {
                state: current_state.to_owned(),
                off_type: true,
            },
        })
    }

    pub fn is_final(&self, state: &str) -> Result<bool, ConvTypeError> {
        self.check_state(state)?;
        Ok(self.finals.contains(state))
    }
}

impl TryFrom<ConversationalTypeDef> for ConversationalType {
    type Error = ConvTypeError;

    fn try_from(def: ConversationalTypeDef) -> Result<Self, Self::Error> {
        Self::new(def)
    }
}

impl From<ConversationalType> for ConversationalTypeDef {
    fn from(ct: ConversationalType) -> Self {
        ct.def
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub conv_type: Arc<ConversationalType>,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BeliefRepr {
    candidates: Vec<Candidate>,
    active_index: usize,
}

/// Distribution over candidate conversational types.
///
/// The active candidate is the type used for scoring; its probability mass
/// is the conversational-type confidence fed into move scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BeliefRepr", into = "BeliefRepr")]
pub struct ConvTypeBelief {
    candidates: Vec<Candidate>,
    active_index: usize,
}

impl ConvTypeBelief {
    pub fn new(candidates: Vec<Candidate>, active_index: usize) -> Result<Self, ConvTypeError> {
        if candidates.is_empty() {
            return Err(ConvTypeError::EmptyBelief);
        }
        if active_index >= candidates.len() {
            return Err(ConvTypeError::BadActiveIndex {
                index: active_index,
                len: candidates.len(),
            });
        }
        let mut sum = 0.0;
        for c in &candidates {
            if !c.probability.is_finite() || !(0.0..=1.0).contains(&c.probability) {
                return Err(ConvTypeError::ProbabilityOutOfRange(c.probability));
            }
            sum += c.probability;
        }
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(ConvTypeError::NotNormalized(sum));
        }
        Ok(Self {
            candidates,
            active_index,
        })
    }

    /// Single candidate holding all the mass.
    pub fn certain(conv_type: Arc<ConversationalType>) -> Self {
        Self {
            candidates: vec![Candidate {
                conv_type,
                probability: 1.0,
            }],
            active_index: 0,
        }
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn active_index(&self) -> usize {
        self.active_index
    }

    pub fn active(&self) -> &Candidate {
        &self.candidates[self.active_index]
    }

    pub fn active_type(&self) -> &ConversationalType {
        &self.active().conv_type
    }

    /// Probability that the active type classifies the interaction.
    pub fn conv_prob(&self) -> f64 {
        self.active().probability
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.candidates.iter().map(|c| c.probability).collect()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

impl TryFrom<BeliefRepr> for ConvTypeBelief {
    type Error = ConvTypeError;

    fn try_from(r: BeliefRepr) -> Result<Self, Self::Error> {
        Self::new(r.candidates, r.active_index)
    }
}

impl From<ConvTypeBelief> for BeliefRepr {
    fn from(b: ConvTypeBelief) -> Self {
        Self {
            candidates: b.candidates,
            active_index: b.active_index,
        }
    }
}

/// Maps a conformity score to an observation likelihood: `(d + 1) / 2`
/// clamped to `[LIKELIHOOD_FLOOR, 1]`.
pub fn conformity_likelihood(conformity: f64) -> f64 {
    ((conformity + 1.0) / 2.0).clamp(LIKELIHOOD_FLOOR, 1.0)
}

/// Posterior over candidate types after observing `move_label`.
///
/// `current_states[i]` is the state candidate `i` is tracking. The active
/// index is carried over unchanged.
pub fn bayes_update<S: AsRef<str>>(
    belief: &ConvTypeBelief,
    move_label: &str,
    current_states: &[S],
) -> Result<ConvTypeBelief, ConvTypeError> {
    if current_states.len() != belief.candidates.len() {
        return Err(ConvTypeError::StateCountMismatch {
            expected: belief.candidates.len(),
            got: current_states.len(),
        });
    }
    let mut unnormalized = Vec::with_capacity(belief.candidates.len());
    for (c, state) in belief.candidates.iter().zip(current_states) {
        let d = c.conv_type.conformity(move_label, state.as_ref())?;
        unnormalized.push(c.probability * conformity_likelihood(d));
    }
    let z: f64 = unnormalized.iter().sum();
    let candidates = belief
        .candidates
        .iter()
        .zip(unnormalized)
        .map(|(c, m)| Candidate {
            conv_type: Arc::clone(&c.conv_type),
            probability: (m / z).clamp(0.0, 1.0),
        })
        .collect();
    Ok(ConvTypeBelief {
        candidates,
        active_index: belief.active_index,
    })
}
