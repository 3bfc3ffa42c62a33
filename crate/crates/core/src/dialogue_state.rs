//! Per-participant information state: a private part holding character
//! estimates, goals, a one-level backup and the conversational-type belief,
//! plus a public dialogue gameboard.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convtype::{bayes_update, ConvTypeBelief, ConvTypeError};
use crate::decision::Weights;
use crate::persona::{ema_update, TraitError, TraitVector};

#[derive(Debug, Error)]
pub enum StateError {
    #[error(transparent)]
    Trait(#[from] TraitError),

    #[error(transparent)]
    ConvType(#[from] ConvTypeError),

    #[error("update rate {0} outside [0, 1]")]
    RateOutOfRange(f64),

    #[error("speaker and addressee must differ (both are `{0}`)")]
    SameParticipants(String),

    #[error("no snapshot to roll back to")]
    NoSnapshot,

    #[error("invalid move record: {0}")]
    InvalidMove(String),

    #[error("inconsistent state: {0}")]
    Inconsistent(String),

    #[error("malformed state text: {0}")]
    Parse(#[from] serde_json::Error),
}

/// A dialogue move as it appears on the gameboard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub speaker: String,
    pub label: String,
    pub text: String,
    /// Character reading of the move, as produced by an external predictor.
    pub vector: TraitVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gameboard {
    pub speaker: String,
    pub addressee: String,
    /// Number of integrated moves.
    pub utterance_time: u64,
    pub facts: BTreeSet<String>,
    /// Moves awaiting integration. Moves are integrated atomically, so this
    /// stays empty between updates.
    pub pending: Vec<MoveRecord>,
    /// Integrated moves, most recent first.
    pub moves: Vec<MoveRecord>,
    /// Questions under discussion in priority order.
    pub qud: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivateState {
    pub self_character: TraitVector,
    pub other_character: TraitVector,
    pub goals: BTreeSet<String>,
    /// Backup of the previous private state, one level deep.
    pub tmp: Option<Box<PrivateState>>,
    pub belief: ConvTypeBelief,
    pub weights: Weights,
    pub update_rate: f64,
}

impl PrivateState {
    fn snapshot(&self) -> PrivateState {
        PrivateState {
            tmp: None,
            ..self.clone()
        }
    }
}

/// Everything needed to open a dialogue from one participant's side.
#[derive(Debug, Clone)]
pub struct StateConfig {
    pub owner: String,
    pub interlocutor: String,
    pub self_character: TraitVector,
    pub other_prior: TraitVector,
    pub goals: BTreeSet<String>,
    pub belief: ConvTypeBelief,
    pub weights: Weights,
    pub update_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationState {
    pub owner: String,
    pub interlocutor: String,
    pub private: PrivateState,
    pub dgb: Gameboard,
    /// Current state within each candidate conversational type, aligned with
    /// `private.belief.candidates()`.
    pub conv_states: Vec<String>,
}

impl InformationState {
    pub fn new(config: StateConfig) -> Result<Self, StateError> {
        let StateConfig {
            owner,
            interlocutor,
            self_character,
            other_prior,
            goals,
            belief,
            weights,
            update_rate,
        } = config;
        if owner == interlocutor {
            return Err(StateError::SameParticipants(owner));
        }
        if !(0.0..=1.0).contains(&update_rate) {
            return Err(StateError::RateOutOfRange(update_rate));
        }
        let conv_states = belief
            .candidates()
            .iter()
            .map(|c| c.conv_type.init_state().to_owned())
            .collect();
        let qud = belief.active_type().qnud().to_vec();
        Ok(Self {
            dgb: Gameboard {
                speaker: interlocutor.clone(),
                addressee: owner.clone(),
                utterance_time: 0,
                facts: BTreeSet::new(),
                pending: Vec::new(),
                moves: Vec::new(),
                qud,
            },
            owner,
            interlocutor,
            private: PrivateState {
                self_character,
                other_character: other_prior,
                goals,
                tmp: None,
                belief,
                weights,
                update_rate,
            },
            conv_states,
        })
    }

    /// State of the active conversational type.
    pub fn conv_state(&self) -> &str {
        &self.conv_states[self.private.belief.active_index()]
    }

    pub fn conv_prob(&self) -> f64 {
        self.private.belief.conv_prob()
    }

    pub fn is_final(&self) -> Result<bool, StateError> {
        Ok(self.private.belief.active_type().is_final(self.conv_state())?)
    }

    fn advanced_states(&self, label: &str) -> Result<Vec<String>, StateError> {
        self.private
            .belief
            .candidates()
            .iter()
            .zip(&self.conv_states)
            .map(|(c, s)| Ok(c.conv_type.advance(s, label)?.state))
            .collect()
    }

    fn check_move(&self, incoming: &MoveRecord, expected_speaker: &str) -> Result<(), StateError> {
        if incoming.label.is_empty() {
            return Err(StateError::InvalidMove("empty move label".into()));
        }
        if incoming.speaker != expected_speaker {
            return Err(StateError::InvalidMove(format!(
                "move by `{}` where `{}` was expected",
                incoming.speaker, expected_speaker
            )));
        }
        Ok(())
    }

    /// Integrates a move made by the interlocutor.
    ///
    /// Order: snapshot the private state into `tmp`; push the move onto the
    /// gameboard; revise the other-character estimate; update the
    /// conversational-type belief against the pre-move states; advance every
    /// candidate's state. Off-type labels are accepted.
    pub fn integrate_move(&self, incoming: &MoveRecord) -> Result<Self, StateError> {
        self.check_move(incoming, &self.interlocutor)?;
        let mut next = self.clone();
        next.private.tmp = Some(Box::new(self.private.snapshot()));

        next.dgb.speaker = incoming.speaker.clone();
        next.dgb.addressee = self.owner.clone();
        next.dgb.moves.insert(0, incoming.clone());
        next.dgb.utterance_time += 1;

        next.private.other_character = ema_update(
            &self.private.other_character,
            &incoming.vector,
            self.private.update_rate,
        )?;
        next.private.belief = bayes_update(&self.private.belief, &incoming.label, &self.conv_states)?;
        next.conv_states = self.advanced_states(&incoming.label)?;
        Ok(next)
    }

    /// Records a move made by the owner. Only the gameboard and the
    /// conversational-type states change; the private part is untouched.
    pub fn record_own_move(&self, own: &MoveRecord) -> Result<Self, StateError> {
        self.check_move(own, &self.owner)?;
        let mut next = self.clone();
        next.dgb.speaker = self.owner.clone();
        next.dgb.addressee = self.interlocutor.clone();
        next.dgb.moves.insert(0, own.clone());
        next.dgb.utterance_time += 1;
        next.conv_states = self.advanced_states(&own.label)?;
        Ok(next)
    }

    /// Restores the private part from its backup. The gameboard and the
    /// conversational-type states are left as they are.
    pub fn rollback_to_tmp(&self) -> Result<Self, StateError> {
        let tmp = self.private.tmp.as_ref().ok_or(StateError::NoSnapshot)?;
        let mut next = self.clone();
        next.private = PrivateState {
            tmp: None,
            ..(**tmp).clone()
        };
        Ok(next)
    }

    pub fn validate(&self) -> Result<(), StateError> {
        if self.dgb.speaker == self.dgb.addressee {
            return Err(StateError::SameParticipants(self.dgb.speaker.clone()));
        }
        if self.dgb.utterance_time != self.dgb.moves.len() as u64 {
            return Err(StateError::Inconsistent(format!(
                "utterance_time {} but {} integrated moves",
                self.dgb.utterance_time,
                self.dgb.moves.len()
            )));
        }
        if !self.dgb.pending.is_empty() {
            return Err(StateError::Inconsistent("pending moves left undrained".into()));
        }
        if let Some(tmp) = &self.private.tmp {
            if tmp.tmp.is_some() {
                return Err(StateError::Inconsistent("nested snapshot".into()));
            }
        }
        let candidates = self.private.belief.candidates();
        if candidates.len() != self.conv_states.len() {
            return Err(StateError::Inconsistent(format!(
                "{} candidate types but {} tracked states",
                candidates.len(),
                self.conv_states.len()
            )));
        }
        for (c, s) in candidates.iter().zip(&self.conv_states) {
            if !c.conv_type.has_state(s) {
                return Err(ConvTypeError::UnknownState {
                    ty: c.conv_type.name().to_owned(),
                    state: s.clone(),
                }
                .into());
            }
        }
        Ok(())
    }

    /// Canonical text form: pretty JSON with fields in declaration order.
    pub fn to_canonical_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("information state is always serializable")
    }

    pub fn from_canonical_str(text: &str) -> Result<Self, StateError> {
        let state: Self = serde_json::from_str(text)?;
        state.validate()?;
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convtype::{Candidate, ConversationalType, ConversationalTypeDef, Transition};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn tv(c: [f64; 5]) -> TraitVector {
        TraitVector::new(c).unwrap()
    }

    fn bakery() -> Arc<ConversationalType> {
        let t = |f: &str, l: &str, to: &str| Transition {
            from: f.into(),
            label: l.into(),
            to: to.into(),
        };
        Arc::new(
            ConversationalType::new(ConversationalTypeDef {
                name: "bakery".into(),
                states: vec![
                    "init".into(),
                    "awaiting-price".into(),
                    "awaiting-payment".into(),
                    "done".into(),
                ],
                init_state: "init".into(),
                final_states: vec!["done".into()],
                transitions: vec![
                    t("init", "order", "awaiting-price"),
                    t("awaiting-price", "price-quote", "awaiting-payment"),
                    t("awaiting-payment", "pay", "done"),
                ],
                qnud: vec!["in-shop-buy".into(), "pay".into()],
                conformity: [("price-quote".to_owned(), 0.8)].into_iter().collect(),
            })
            .unwrap(),
        )
    }

    fn chat() -> Arc<ConversationalType> {
        Arc::new(
            ConversationalType::new(ConversationalTypeDef {
                name: "chat".into(),
                states: vec!["open".into()],
                init_state: "open".into(),
                final_states: vec!["open".into()],
                transitions: vec![],
                qnud: vec![],
                conformity: Default::default(),
            })
            .unwrap(),
        )
    }

    fn baker_state(rate: f64) -> InformationState {
        let belief = ConvTypeBelief::new(
            vec![
                Candidate {
                    conv_type: bakery(),
                    probability: 0.98,
                },
                Candidate {
                    conv_type: chat(),
                    probability: 0.02,
                },
            ],
            0,
        )
        .unwrap();
        InformationState::new(StateConfig {
            owner: "baker".into(),
            interlocutor: "customer".into(),
            self_character: tv([0.0, 0.3, 0.0, 0.0, 0.5]),
            other_prior: tv([0.0, 0.0, -0.1, -0.4, 0.2]),
            goals: ["sell-two-croissants".to_owned()].into_iter().collect(),
            belief,
            weights: Weights::new(0.1, 0.1, 0.8).unwrap(),
            update_rate: rate,
        })
        .unwrap()
    }

    fn customer_move(label: &str, v: [f64; 5]) -> MoveRecord {
        MoveRecord {
            speaker: "customer".into(),
            label: label.into(),
            text: String::new(),
            vector: tv(v),
        }
    }

    #[test]
    fn init_baker() {
        let s = baker_state(0.5);
        assert_eq!(s.dgb.utterance_time, 0);
        assert_eq!(s.conv_state(), "init");
        assert_eq!(s.conv_prob(), 0.98);
        assert!(s.private.tmp.is_none());
        assert_eq!(s.dgb.qud, vec!["in-shop-buy", "pay"]);
        s.validate().unwrap();
    }

    #[test]
    fn init_minimal_and_rejections() {
        let belief = ConvTypeBelief::certain(chat());
        let mk = |rate: f64, other: &str| {
            InformationState::new(StateConfig {
                owner: "a".into(),
                interlocutor: other.into(),
                self_character: TraitVector::ZERO,
                other_prior: TraitVector::ZERO,
                goals: BTreeSet::new(),
                belief: belief.clone(),
                weights: Weights::uniform(),
                update_rate: rate,
            })
        };
        assert!(mk(0.5, "b").is_ok());
        assert!(matches!(mk(1.5, "b"), Err(StateError::RateOutOfRange(_))));
        assert!(matches!(mk(0.5, "a"), Err(StateError::SameParticipants(_))));
        assert!(Weights::new(0.5, 0.5, 0.5).is_err());
    }

    #[test]
    fn hearing_the_order_keeps_estimate_at_fixed_point() {
        let s = baker_state(0.37);
        let next = s
            .integrate_move(&customer_move("order", [0.0, 0.0, -0.1, -0.4, 0.2]))
            .unwrap();
        assert_eq!(next.private.other_character, tv([0.0, 0.0, -0.1, -0.4, 0.2]));
        assert_eq!(next.conv_state(), "awaiting-price");
        assert_eq!(next.conv_states, vec!["awaiting-price", "open"]);
        // bakery licenses "order" (likelihood 1), chat does not (floor 0.01)
        let p = 0.98 / (0.98 + 0.02 * 0.01);
        assert!((next.conv_prob() - p).abs() < 1e-15);
        assert_eq!(next.dgb.speaker, "customer");
        assert_eq!(next.dgb.addressee, "baker");
        next.validate().unwrap();
        // input untouched
        assert_eq!(s.dgb.utterance_time, 0);
    }

    #[test]
    fn zero_rate_keeps_estimate() {
        let s = baker_state(0.0);
        let next = s
            .integrate_move(&customer_move("order", [1.0, 1.0, 1.0, 1.0, 1.0]))
            .unwrap();
        assert_eq!(next.private.other_character, s.private.other_character);
    }

    #[test]
    fn bookkeeping_contract() {
        let mut s = baker_state(0.5);
        for _ in 0..3 {
            s = s
                .integrate_move(&customer_move("chit-chat", [0.1, 0.0, 0.0, 0.0, 0.0]))
                .unwrap();
        }
        assert_eq!(s.dgb.utterance_time, 3);
        let before = s.private.other_character;
        let next = s
            .integrate_move(&customer_move("order", [0.5, 0.5, 0.5, 0.5, 0.5]))
            .unwrap();
        assert_eq!(next.dgb.utterance_time, 4);
        assert_eq!(next.private.tmp.as_ref().unwrap().other_character, before);
        assert_eq!(next.dgb.moves[0].label, "order");
    }

    #[test]
    fn rejects_structurally_invalid_moves() {
        let s = baker_state(0.5);
        assert!(matches!(
            s.integrate_move(&customer_move("", [0.0; 5])),
            Err(StateError::InvalidMove(_))
        ));
        let mut m = customer_move("order", [0.0; 5]);
        m.speaker = "baker".into();
        assert!(matches!(s.integrate_move(&m), Err(StateError::InvalidMove(_))));
    }

    #[test]
    fn rollback_examples() {
        let s = baker_state(0.5);
        assert!(matches!(s.rollback_to_tmp(), Err(StateError::NoSnapshot)));
        let one = s
            .integrate_move(&customer_move("order", [0.4, 0.0, 0.0, 0.0, 0.0]))
            .unwrap();
        let back = one.rollback_to_tmp().unwrap();
        assert_eq!(back.private, s.private);
        assert_eq!(back.dgb, one.dgb);
        let two = one
            .integrate_move(&customer_move("pay", [0.0, 0.4, 0.0, 0.0, 0.0]))
            .unwrap();
        let back = two.rollback_to_tmp().unwrap();
        let expected = PrivateState {
            tmp: None,
            ..one.private.clone()
        };
        assert_eq!(back.private, expected);
    }

    #[test]
    fn own_moves_leave_private_part_alone() {
        let s = baker_state(0.5)
            .integrate_move(&customer_move("order", [0.0, 0.0, -0.1, -0.4, 0.2]))
            .unwrap();
        let own = MoveRecord {
            speaker: "baker".into(),
            label: "price-quote".into(),
            text: "1.90".into(),
            vector: tv([0.0, 0.0, -0.1, -0.4, 0.2]),
        };
        let next = s.record_own_move(&own).unwrap();
        assert_eq!(next.private, s.private);
        assert_eq!(next.conv_state(), "awaiting-payment");
        assert_eq!(next.dgb.utterance_time, 2);
        assert_eq!(next.dgb.speaker, "baker");
    }

    #[test]
    fn canonical_text_round_trip() {
        let s = baker_state(0.5)
            .integrate_move(&customer_move("order", [0.3, -0.2, 0.1, 0.0, 0.7]))
            .unwrap();
        let text = s.to_canonical_string();
        let back = InformationState::from_canonical_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_canonical_string(), text);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn integrate_then_rollback_is_exact(
            rate in 0.0f64..=1.0,
            moves in prop::collection::vec(
                (prop::sample::select(vec!["order", "price-quote", "pay", "sing"]), prop::array::uniform5(-1.0f64..=1.0)),
                1..12,
            ),
        ) {
            let mut s = baker_state(rate);
            for (label, v) in moves {
                let before = s.private.to_owned();
                let before_text = serde_json::to_string(&PrivateState { tmp: None, ..before.clone() }).unwrap();
                let next = s.integrate_move(&customer_move(label, v)).unwrap();
                prop_assert_eq!(next.dgb.utterance_time as usize, next.dgb.moves.len());
                let total: f64 = next.private.belief.probabilities().iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
                prop_assert!(crate::persona::validate(next.private.other_character.components()).is_ok());
                next.validate().unwrap();
                let back = next.rollback_to_tmp().unwrap();
                prop_assert_eq!(serde_json::to_string(&back.private).unwrap(), before_text);
                s = next;
            }
        }
    }
}
