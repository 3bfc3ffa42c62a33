//! The bakery exchange: a customer orders two croissants and the baker picks
//! a reply. Constants here are shared by tests, benchmarks and fixtures.

use std::sync::Arc;

use crate::convtype::{Candidate, ConvTypeBelief, ConversationalType, ConversationalTypeDef, Transition};
use crate::decision::{decision_factors, DecisionFactors, MoveCandidate, Weights};
use crate::persona::TraitVector;
use crate::scenario::{
    AgentEntry, ConvTypeEntry, MoveEntry, MoveSpaceEntry, OpeningEntry, Policy, ScenarioFile, WeightsEntry,
    SCENARIO_VERSION,
};

/// Estimated character of the customer after hearing "2 croissants".
pub const CUSTOMER: [f64; 5] = [0.0, 0.0, -0.1, -0.4, 0.2];

/// Confidence that the exchange is a bakery transaction.
pub const CONV_PROB: f64 = 0.98;

/// `(label, text, character reading, conformity)` for the baker's replies.
pub const REPLIES: [(&str, &str, [f64; 5], f64); 4] = [
    ("price-quote", "1.90", [0.0, 0.0, -0.1, -0.4, 0.2], 0.8),
    (
        "eject-customer",
        "Get out of the bakery, you're not wearing a mask.",
        [0.3, -0.5, 0.0, -0.7, 0.8],
        -1.0,
    ),
    (
        "request-politeness",
        "Please would be nice.",
        [0.2, 0.0, 0.3, 0.7, -0.2],
        0.3,
    ),
    (
        "quote-and-request-politeness",
        "1.90 and please would be nice.",
        [0.5, 0.6, 0.4, 0.7, -0.4],
        0.7,
    ),
];

/// One baker configuration: own character and weights.
#[derive(Debug, Clone, Copy)]
pub struct Regime {
    pub baker: [f64; 5],
    pub weights: [f64; 3],
}

/// Conversational type dominates; neurotic, conscientious baker.
pub const REGIME_1: Regime = Regime {
    baker: [0.0, 0.3, 0.0, 0.0, 0.5],
    weights: [0.1, 0.1, 0.8],
};

/// More weight on an agreeable, conscientious baker's own character.
pub const REGIME_2: Regime = Regime {
    baker: [0.5, 0.7, 0.3, 0.8, -0.5],
    weights: [0.3, 0.1, 0.6],
};

/// Own character dominates; disagreeable, neurotic baker.
pub const REGIME_3: Regime = Regime {
    baker: [0.2, -0.3, 0.0, -0.5, 0.8],
    weights: [0.8, 0.1, 0.1],
};

impl Regime {
    pub fn baker_vector(&self) -> TraitVector {
        TraitVector::new(self.baker).expect("constant in range")
    }

    pub fn weights(&self) -> Weights {
        let [a, b, g] = self.weights;
        Weights::new(a, b, g).expect("constant on simplex")
    }

    /// Decision factor rows for the four replies.
    pub fn factor_rows(&self) -> Vec<DecisionFactors> {
        let baker = self.baker_vector();
        replies()
            .iter()
            .map(|m| decision_factors(m, &baker, &customer(), CONV_PROB).expect("valid inputs"))
            .collect()
    }
}

pub fn customer() -> TraitVector {
    TraitVector::new(CUSTOMER).expect("constant in range")
}

pub fn replies() -> Vec<MoveCandidate> {
    REPLIES
        .iter()
        .map(|(label, text, v, d)| {
            MoveCandidate::new(
                *label,
                *text,
                TraitVector::new(*v).expect("constant in range"),
                *d,
            )
            .expect("constant conformity in range")
        })
        .collect()
}

fn transition(from: &str, label: &str, to: &str) -> Transition {
    Transition {
        from: from.into(),
        label: label.into(),
        to: to.into(),
    }
}

/// Shop transaction: order, price, payment.
pub fn bakery_type() -> ConversationalType {
    ConversationalType::new(ConversationalTypeDef {
        name: "bakery".into(),
        states: ["init", "awaiting-price", "awaiting-payment", "done"]
            .map(String::from)
            .to_vec(),
        init_state: "init".into(),
        final_states: vec!["done".into()],
        transitions: vec![
            transition("init", "order", "awaiting-price"),
            transition("awaiting-price", "price-quote", "awaiting-payment"),
            transition(
                "awaiting-price",
                "quote-and-request-politeness",
                "awaiting-payment",
            ),
            transition("awaiting-payment", "pay", "done"),
        ],
        qnud: ["in-shop-buy", "customer", "baker", "pay"]
            .map(String::from)
            .to_vec(),
        conformity: REPLIES.iter().map(|(l, _, _, d)| (l.to_string(), *d)).collect(),
    })
    .expect("well-formed constant type")
}

/// Open-ended chat with no closing protocol.
pub fn chat_type() -> ConversationalType {
    ConversationalType::new(ConversationalTypeDef {
        name: "informal-chat".into(),
        states: vec!["open".into(), "closed".into()],
        init_state: "open".into(),
        final_states: vec!["closed".into()],
        transitions: vec![
            transition("open", "chat", "open"),
            transition("open", "goodbye", "closed"),
        ],
        qnud: Vec::new(),
        conformity: Default::default(),
    })
    .expect("well-formed constant type")
}

/// Bakery at 0.98, informal chat at 0.02, bakery active.
pub fn belief() -> ConvTypeBelief {
    ConvTypeBelief::new(
        vec![
            Candidate {
                conv_type: Arc::new(bakery_type()),
                probability: CONV_PROB,
            },
            Candidate {
                conv_type: Arc::new(chat_type()),
                probability: 1.0 - CONV_PROB,
            },
        ],
        0,
    )
    .expect("normalized constant belief")
}

fn entry(label: &str, text: &str, vector: [f64; 5]) -> MoveEntry {
    MoveEntry {
        label: label.into(),
        text: text.into(),
        vector,
        observed: None,
        conformity: None,
        pinned_rho: None,
    }
}

/// Complete two-agent scenario with the baker configured by `regime`.
///
/// The customer opens with "2 croissants" and samples its replies; the baker
/// answers by argmax. Paying from `awaiting-payment` reaches the final state.
pub fn scenario_file(regime: &Regime) -> ScenarioFile {
    let [alpha, beta, gamma] = regime.weights;
    ScenarioFile {
        version: SCENARIO_VERSION,
        conversational_types: vec![
            ConvTypeEntry {
                prior: CONV_PROB,
                definition: bakery_type().def().clone(),
            },
            ConvTypeEntry {
                prior: 1.0 - CONV_PROB,
                definition: chat_type().def().clone(),
            },
        ],
        active_type: None,
        normalize_weights: false,
        agents: vec![
            AgentEntry {
                name: "customer".into(),
                self_character: CUSTOMER,
                other_prior: [0.0; 5],
                weights: WeightsEntry {
                    alpha: 0.2,
                    beta: 0.2,
                    gamma: 0.6,
                },
                update_rate: 0.5,
                goals: vec!["buy-two-croissants".into()],
                policy: Policy::Sample { seed: 7 },
            },
            AgentEntry {
                name: "baker".into(),
                self_character: regime.baker,
                other_prior: CUSTOMER,
                weights: WeightsEntry { alpha, beta, gamma },
                update_rate: 0.5,
                goals: vec!["sell-two-croissants".into(), "obtain-price".into()],
                policy: Policy::Argmax,
            },
        ],
        opening: OpeningEntry {
            agent: "customer".into(),
            move_: entry("order", "2 croissants.", CUSTOMER),
        },
        move_spaces: vec![
            MoveSpaceEntry {
                agent: "baker".into(),
                state: "awaiting-price".into(),
                moves: REPLIES.iter().map(|(l, t, v, _)| entry(l, t, *v)).collect(),
            },
            MoveSpaceEntry {
                agent: "baker".into(),
                state: "awaiting-payment".into(),
                moves: vec![entry("repeat-price", "It's 1.90.", [0.0, 0.3, 0.0, -0.1, 0.3])],
            },
            MoveSpaceEntry {
                agent: "customer".into(),
                state: "awaiting-price".into(),
                moves: vec![
                    entry(
                        "apologize",
                        "Sorry. Two croissants, please.",
                        [0.0, 0.2, 0.0, 0.5, 0.1],
                    ),
                    entry("leave", "Forget it.", [0.0, -0.2, -0.2, -0.5, 0.4]),
                ],
            },
            MoveSpaceEntry {
                agent: "customer".into(),
                state: "awaiting-payment".into(),
                moves: vec![
                    entry("pay", "Here you go.", [0.0, 0.3, 0.0, 0.1, 0.0]),
                    entry("haggle", "1.50?", [0.0, 0.0, 0.2, -0.3, 0.3]),
                ],
            },
        ],
        max_turns: 10,
    }
}
