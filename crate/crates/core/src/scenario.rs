//! Scenario documents: conversational types with priors, two agents, the
//! scripted opening move, authored move spaces and the turn limit.
//!
//! [`ScenarioFile`] mirrors the JSON document one to one. [`Scenario`] is the
//! validated form with every cross-reference resolved. Validation errors name
//! the offending field path (`agents[1].weights`); syntax errors carry the
//! line and column reported by the JSON parser.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convtype::{Candidate, ConvTypeBelief, ConversationalType, ConversationalTypeDef};
use crate::decision::{DecisionError, Weights};
use crate::dialogue_state::{InformationState, MoveRecord, StateConfig, StateError};
use crate::persona::{self, TraitVector};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Syntax(#[from] serde_json::Error),

    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvTypeEntry {
    pub prior: f64,
    #[serde(rename = "type")]
    pub definition: ConversationalTypeDef,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsEntry {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Policy {
    #[default]
    Argmax,
    Sample {
        seed: u64,
    },
}

fn default_rate() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub name: String,
    pub self_character: [f64; 5],
    pub other_prior: [f64; 5],
    pub weights: WeightsEntry,
    #[serde(default = "default_rate")]
    pub update_rate: f64,
    #[serde(default)]
    pub goals: Vec<String>,
    #[serde(default)]
    pub policy: Policy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveEntry {
    pub label: String,
    #[serde(default)]
    pub text: String,
    /// Character reading of the move from the speaker's side.
    pub vector: [f64; 5],
    /// What the listener perceives; defaults to `vector`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<[f64; 5]>,
    /// Overrides the conformity derived from the active type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformity: Option<f64>,
    /// Replaces the computed score, for checking the softmax stage against
    /// externally fixed scores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pinned_rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpeningEntry {
    pub agent: String,
    #[serde(rename = "move")]
    pub move_: MoveEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveSpaceEntry {
    pub agent: String,
    pub state: String,
    pub moves: Vec<MoveEntry>,
}

/// The scenario document as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub conversational_types: Vec<ConvTypeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_type: Option<String>,
    #[serde(default)]
    pub normalize_weights: bool,
    pub agents: Vec<AgentEntry>,
    pub opening: OpeningEntry,
    pub move_spaces: Vec<MoveSpaceEntry>,
    pub max_turns: usize,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario is always serializable")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub name: String,
    pub self_character: TraitVector,
    pub other_prior: TraitVector,
    pub weights: Weights,
    pub update_rate: f64,
    pub goals: BTreeSet<String>,
    pub policy: Policy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMove {
    pub label: String,
    pub text: String,
    pub vector: TraitVector,
    pub observed: TraitVector,
    pub conformity: Option<f64>,
    pub pinned_rho: Option<f64>,
}

impl ScenarioMove {
    pub fn record(&self, speaker: &str) -> MoveRecord {
        MoveRecord {
            speaker: speaker.to_owned(),
            label: self.label.clone(),
            text: self.text.clone(),
            vector: self.vector,
        }
    }

    pub fn observed_record(&self, speaker: &str) -> MoveRecord {
        MoveRecord {
            vector: self.observed,
            ..self.record(speaker)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Opening {
    pub agent: usize,
    pub move_: ScenarioMove,
}

/// Validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub belief: ConvTypeBelief,
    pub agents: [AgentSpec; 2],
    pub opening: Opening,
    /// Keyed by `(agent index, conversational state)`.
    pub move_spaces: BTreeMap<(usize, String), Vec<ScenarioMove>>,
    pub max_turns: usize,
}

fn trait_vector(field: &str, raw: [f64; 5]) -> Result<TraitVector, ScenarioError> {
    persona::validate(&raw).map_err(|e| match e {
        persona::TraitError::OutOfRange { index, .. } | persona::TraitError::NonFinite { index } => {
            invalid(format!("{field}[{index}]"), e)
        }
        other => invalid(field, other),
    })?;
    Ok(TraitVector::new(raw).expect("validated above"))
}

fn scenario_move(field: &str, entry: &MoveEntry) -> Result<ScenarioMove, ScenarioError> {
    if entry.label.is_empty() {
        return Err(invalid(format!("{field}.label"), "move label must not be empty"));
    }
    let vector = trait_vector(&format!("{field}.vector"), entry.vector)?;
    let observed = match entry.observed {
        Some(raw) => trait_vector(&format!("{field}.observed"), raw)?,
        None => vector,
    };
    if let Some(d) = entry.conformity {
        if !d.is_finite() || !(-1.0..=1.0).contains(&d) {
            return Err(invalid(
                format!("{field}.conformity"),
                DecisionError::ConformityOutOfRange(d),
            ));
        }
    }
    if let Some(r) = entry.pinned_rho {
        if !r.is_finite() {
            return Err(invalid(format!("{field}.pinned_rho"), "score must be finite"));
        }
    }
    Ok(ScenarioMove {
        label: entry.label.clone(),
        text: entry.text.clone(),
        vector,
        observed,
        conformity: entry.conformity,
        pinned_rho: entry.pinned_rho,
    })
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        Self::from_file(&ScenarioFile::parse(text)?)
    }

    pub fn from_file(file: &ScenarioFile) -> Result<Self, ScenarioError> {
        if file.version != SCENARIO_VERSION {
            return Err(invalid(
                "version",
                format!(
                    "unsupported version {} (expected {SCENARIO_VERSION})",
                    file.version
                ),
            ));
        }
        if file.max_turns < 1 {
            return Err(invalid("max_turns", "must be at least 1"));
        }

        if file.conversational_types.is_empty() {
            return Err(invalid("conversational_types", "at least one type is required"));
        }
        let mut candidates = Vec::with_capacity(file.conversational_types.len());
        let mut names = BTreeSet::new();
        for (i, entry) in file.conversational_types.iter().enumerate() {
            let field = format!("conversational_types[{i}]");
            let ct = ConversationalType::new(entry.definition.clone())
                .map_err(|e| invalid(format!("{field}.type"), e))?;
            if !names.insert(ct.name().to_owned()) {
                return Err(invalid(
                    format!("{field}.type.name"),
                    format!("duplicate type `{}`", ct.name()),
                ));
            }
            if !entry.prior.is_finite() || !(0.0..=1.0).contains(&entry.prior) {
                return Err(invalid(
                    format!("{field}.prior"),
                    format!("{} outside [0, 1]", entry.prior),
                ));
            }
            candidates.push(Candidate {
                conv_type: Arc::new(ct),
                probability: entry.prior,
            });
        }
        let active_index = match &file.active_type {
            Some(name) => candidates
                .iter()
                .position(|c| c.conv_type.name() == name)
                .ok_or_else(|| invalid("active_type", format!("no conversational type named `{name}`")))?,
            None => 0,
        };
        let belief =
            ConvTypeBelief::new(candidates, active_index).map_err(|e| invalid("conversational_types", e))?;
        let active = belief.active_type();

        if file.agents.len() != 2 {
            return Err(invalid(
                "agents",
                format!("exactly two agents required, found {}", file.agents.len()),
            ));
        }
        let mut agents = Vec::with_capacity(2);
        for (i, a) in file.agents.iter().enumerate() {
            let field = format!("agents[{i}]");
            if a.name.is_empty() {
                return Err(invalid(format!("{field}.name"), "agent name must not be empty"));
            }
            let self_character = trait_vector(&format!("{field}.self_character"), a.self_character)?;
            let other_prior = trait_vector(&format!("{field}.other_prior"), a.other_prior)?;
            let WeightsEntry { alpha, beta, gamma } = a.weights;
            let weights = if file.normalize_weights {
                Weights::normalized(alpha, beta, gamma)
            } else {
                Weights::new(alpha, beta, gamma)
            }
            .map_err(|e| invalid(format!("{field}.weights"), e))?;
            if !(0.0..=1.0).contains(&a.update_rate) {
                return Err(invalid(
                    format!("{field}.update_rate"),
                    format!("{} outside [0, 1]", a.update_rate),
                ));
            }
            agents.push(AgentSpec {
                name: a.name.clone(),
                self_character,
                other_prior,
                weights,
                update_rate: a.update_rate,
                goals: a.goals.iter().cloned().collect(),
                policy: a.policy,
            });
        }
        if agents[0].name == agents[1].name {
            return Err(invalid(
                "agents[1].name",
                format!("duplicate agent `{}`", agents[1].name),
            ));
        }
        let agent_index = |field: &str, name: &str| {
            agents
                .iter()
                .position(|a| a.name == name)
                .ok_or_else(|| invalid(field, format!("no agent named `{name}`")))
        };

        let opening = Opening {
            agent: agent_index("opening.agent", &file.opening.agent)?,
            move_: scenario_move("opening.move", &file.opening.move_)?,
        };

        let mut move_spaces = BTreeMap::new();
        for (i, space) in file.move_spaces.iter().enumerate() {
            let field = format!("move_spaces[{i}]");
            let agent = agent_index(&format!("{field}.agent"), &space.agent)?;
            if !active.has_state(&space.state) {
                return Err(invalid(
                    format!("{field}.state"),
                    format!(
                        "conversational type `{}` has no state `{}`",
                        active.name(),
                        space.state
                    ),
                ));
            }
            if space.moves.is_empty() {
                return Err(invalid(format!("{field}.moves"), "move space must not be empty"));
            }
            let moves = space
                .moves
                .iter()
                .enumerate()
                .map(|(j, m)| scenario_move(&format!("{field}.moves[{j}]"), m))
                .collect::<Result<Vec<_>, _>>()?;
            if move_spaces.insert((agent, space.state.clone()), moves).is_some() {
                return Err(invalid(
                    field,
                    format!("duplicate move space for `{}` at `{}`", space.agent, space.state),
                ));
            }
        }

        let agents: [AgentSpec; 2] = agents.try_into().expect("length checked");
        Ok(Self {
            belief,
            agents,
            opening,
            move_spaces,
            max_turns: file.max_turns,
        })
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.name == name)
    }

    /// Fresh information state for agent `index`.
    pub fn initial_state(&self, index: usize) -> Result<InformationState, StateError> {
        let me = &self.agents[index];
        let other = &self.agents[1 - index];
        InformationState::new(StateConfig {
            owner: me.name.clone(),
            interlocutor: other.name.clone(),
            self_character: me.self_character,
            other_prior: me.other_prior,
            goals: me.goals.clone(),
            belief: self.belief.clone(),
            weights: me.weights,
            update_rate: me.update_rate,
        })
    }

    /// Replaces every sampling seed by `base + agent index`.
    pub fn with_seed(mut self, base: u64) -> Self {
        for (i, a) in self.agents.iter_mut().enumerate() {
            if let Policy::Sample { seed } = &mut a.policy {
                *seed = base.wrapping_add(i as u64);
            }
        }
        self
    }
}
