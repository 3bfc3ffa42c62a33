//! Scripted two-agent dialogue runner.
//!
//! After the scripted opening, agents alternate. On each turn the speaker
//! scores its authored move space for its current conversational state,
//! selects a move by its policy and records it on its own gameboard. The
//! listener then integrates the move, and a [`TraceEvent`] captures the
//! listener's updated state. A run ends when the listener reaches a final
//! state, the turn limit is hit, or the speaker has no move space for its
//! state.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{
    decision_factors, score_move, select_argmax, select_sample, DecisionError, MoveCandidate, ScoredMoveSpace,
};
use crate::dialogue_state::{InformationState, StateError};
use crate::persona::TraitVector;
use crate::scenario::{Policy, Scenario, ScenarioMove};

pub const TRACE_VERSION: u32 = 1;

/// Multiplier used to derive per-turn sampling seeds.
const TURN_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    State(#[from] StateError),

    #[error(transparent)]
    Decision(#[from] DecisionError),

    #[error(transparent)]
    ConvType(#[from] crate::convtype::ConvTypeError),

    #[error("replay diverged at turn {turn}: {what}")]
    ReplayMismatch { turn: usize, what: String },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    FinalState,
    TurnLimit,
    EmptyMoveSpace,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::FinalState => "final-state",
            Termination::TurnLimit => "turn-limit",
            Termination::EmptyMoveSpace => "empty-move-space",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub turn: usize,
    pub agent: String,
    /// Speaker's conversational state when it scored its moves.
    pub state: String,
    pub space: ScoredMoveSpace,
    pub selected: usize,
    /// Listener's state after integrating the move.
    pub conv_state: String,
    pub conv_prob: f64,
    pub other_character: TraitVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeningRecord {
    pub agent: String,
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub opening: OpeningRecord,
    pub events: Vec<TraceEvent>,
    pub termination: Termination,
}

/// One line of the machine-readable trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum TraceLine {
    Header { version: u32, opening: OpeningRecord },
    Event(TraceEvent),
    End { termination: Termination, turns: usize },
}

impl Trace {
    /// Line-delimited JSON: a header, one line per event, an end marker.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &TraceLine| {
            out.push_str(&serde_json::to_string(line).expect("trace lines serialize"));
            out.push('\n');
        };
        push(&TraceLine::Header {
            version: TRACE_VERSION,
            opening: self.opening.clone(),
        });
        for e in &self.events {
            push(&TraceLine::Event(e.clone()));
        }
        push(&TraceLine::End {
            termination: self.termination,
            turns: self.events.len(),
        });
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, SimError> {
        let fail = |line: usize, message: String| SimError::Format { line, message };
        let mut opening = None;
        let mut events = Vec::new();
        let mut end = None;
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            if end.is_some() {
                return Err(fail(n, "content after end marker".into()));
            }
            match serde_json::from_str::<TraceLine>(raw).map_err(|e| fail(n, e.to_string()))? {
                TraceLine::Header { version, opening: o } => {
                    if opening.is_some() || version != TRACE_VERSION {
                        return Err(fail(n, format!("unexpected header (version {version})")));
                    }
                    opening = Some(o);
                }
                TraceLine::Event(e) => {
                    if opening.is_none() {
                        return Err(fail(n, "event before header".into()));
                    }
                    if e.turn != events.len() {
                        return Err(fail(n, format!("turn {} out of sequence", e.turn)));
                    }
                    events.push(e);
                }
                TraceLine::End { termination, turns } => {
                    if turns != events.len() {
                        return Err(fail(
                            n,
                            format!("end marker claims {turns} turns, found {}", events.len()),
                        ));
                    }
                    end = Some(termination);
                }
            }
        }
        let lines = text.lines().count();
        Ok(Trace {
            opening: opening.ok_or_else(|| fail(1, "missing header".into()))?,
            events,
            termination: end.ok_or_else(|| fail(lines, "missing end marker".into()))?,
        })
    }

    /// Human-readable transcript.
    pub fn transcript(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{}: \"{}\" [{}]",
            self.opening.agent, self.opening.text, self.opening.label
        );
        for e in &self.events {
            let chosen = &e.space.entries()[e.selected];
            let _ = writeln!(
                out,
                "turn {:>2}  {}: \"{}\" [{}]  p={:.4}  state {} -> {}  conv_prob={:.4}",
                e.turn,
                e.agent,
                chosen.candidate.text,
                chosen.candidate.label,
                chosen.probability,
                e.state,
                e.conv_state,
                e.conv_prob,
            );
        }
        let n = self.events.len();
        let noun = if n == 1 { "turn" } else { "turns" };
        let _ = writeln!(out, "terminated: {} after {n} {noun}", self.termination.as_str());
        out
    }
}

/// Scores a scenario move space from `state`'s point of view at `conv_state`.
///
/// Conformity comes from the move's own override when present, otherwise
/// from the active conversational type. Pinned scores replace computed ones.
pub fn score_scenario_moves(
    moves: &[ScenarioMove],
    state: &InformationState,
    conv_state: &str,
) -> Result<ScoredMoveSpace, SimError> {
    let private = &state.private;
    let active = private.belief.active_type();
    let p = private.belief.conv_prob();
    let mut candidates = Vec::with_capacity(moves.len());
    let mut factors = Vec::with_capacity(moves.len());
    let mut scores = Vec::with_capacity(moves.len());
    for m in moves {
        let d = match m.conformity {
            Some(d) => d,
            None => active.conformity(&m.label, conv_state)?,
        };
        let candidate = MoveCandidate::new(m.label.clone(), m.text.clone(), m.vector, d)?;
        let f = decision_factors(&candidate, &private.self_character, &private.other_character, p)?;
        scores.push(m.pinned_rho.unwrap_or_else(|| score_move(&f, &private.weights)));
        factors.push(f);
        candidates.push(candidate);
    }
    Ok(ScoredMoveSpace::from_scores(candidates, factors, scores)?)
}

/// Seed used by a sampling policy on a given turn.
pub fn turn_seed(seed: u64, turn: usize) -> u64 {
    seed.wrapping_add((turn as u64).wrapping_mul(TURN_SEED_STRIDE))
}

fn select(policy: Policy, space: &ScoredMoveSpace, turn: usize) -> usize {
    match policy {
        Policy::Argmax => select_argmax(space),
        Policy::Sample { seed } => select_sample(space, turn_seed(seed, turn)),
    }
}

/// Runs the scenario with each agent's own policy.
pub fn run(scenario: &Scenario) -> Result<Trace, SimError> {
    drive(scenario, |agent, turn, space| {
        Ok(select(scenario.agents[agent].policy, space, turn))
    })
}

/// Re-runs a scenario forcing the recorded selections and checks that every
/// recorded listener value is reproduced exactly.
pub fn replay(scenario: &Scenario, trace: &Trace) -> Result<(), SimError> {
    let replayed = drive(scenario, |_, turn, space| {
        let event = trace.events.get(turn).ok_or_else(|| SimError::ReplayMismatch {
            turn,
            what: "trace ended before the run".into(),
        })?;
        if event.selected >= space.len() {
            return Err(SimError::ReplayMismatch {
                turn,
                what: format!(
                    "selected index {} outside move space of {}",
                    event.selected,
                    space.len()
                ),
            });
        }
        Ok(event.selected)
    })?;
    let mismatch = |turn, what: &str| {
        Err(SimError::ReplayMismatch {
            turn,
            what: what.into(),
        })
    };
    if replayed.events.len() != trace.events.len() {
        return mismatch(
            replayed.events.len().min(trace.events.len()),
            "different number of turns",
        );
    }
    for (a, b) in replayed.events.iter().zip(&trace.events) {
        if a.agent != b.agent || a.state != b.state {
            return mismatch(a.turn, "speaker or state");
        }
        if a.conv_state != b.conv_state {
            return mismatch(a.turn, "conv_state");
        }
        if a.conv_prob.to_bits() != b.conv_prob.to_bits() {
            return mismatch(a.turn, "conv_prob");
        }
        if a.other_character != b.other_character {
            return mismatch(a.turn, "other_character");
        }
    }
    if replayed.termination != trace.termination {
        return mismatch(trace.events.len(), "termination reason");
    }
    Ok(())
}

fn drive<F>(scenario: &Scenario, mut choose: F) -> Result<Trace, SimError>
where
    F: FnMut(usize, usize, &ScoredMoveSpace) -> Result<usize, SimError>,
{
    let mut states = [scenario.initial_state(0)?, scenario.initial_state(1)?];
    let opener = scenario.opening.agent;
    let opener_name = &scenario.agents[opener].name;
    let opening = &scenario.opening.move_;
    states[opener] = states[opener].record_own_move(&opening.record(opener_name))?;
    let first_listener = 1 - opener;
    states[first_listener] = states[first_listener].integrate_move(&opening.observed_record(opener_name))?;

    let mut trace = Trace {
        opening: OpeningRecord {
            agent: opener_name.clone(),
            label: opening.label.clone(),
            text: opening.text.clone(),
        },
        events: Vec::new(),
        termination: Termination::TurnLimit,
    };
    if states[first_listener].is_final()? {
        trace.termination = Termination::FinalState;
        return Ok(trace);
    }

    let mut speaker = first_listener;
    loop {
        let turn = trace.events.len();
        if turn >= scenario.max_turns {
            trace.termination = Termination::TurnLimit;
            break;
        }
        let listener = 1 - speaker;
        let speaker_name = scenario.agents[speaker].name.clone();
        let state = states[speaker].conv_state().to_owned();
        let Some(moves) = scenario.move_spaces.get(&(speaker, state.clone())) else {
            trace.termination = Termination::EmptyMoveSpace;
            break;
        };
        let space = score_scenario_moves(moves, &states[speaker], &state)?;
        let selected = choose(speaker, turn, &space)?;
        let chosen = &moves[selected];

        states[speaker] = states[speaker].record_own_move(&chosen.record(&speaker_name))?;
        states[listener] = states[listener].integrate_move(&chosen.observed_record(&speaker_name))?;

        let heard = &states[listener];
        trace.events.push(TraceEvent {
            turn,
            agent: speaker_name,
            state,
            space,
            selected,
            conv_state: heard.conv_state().to_owned(),
            conv_prob: heard.conv_prob(),
            other_character: heard.private.other_character,
        });
        if heard.is_final()? {
            trace.termination = Termination::FinalState;
            break;
        }
        speaker = listener;
    }
    Ok(trace)
}
