//! Move scoring: decision factors, linear scores, softmax and selection.
//!
//! Each candidate move is described by three factors: cosine affinity with
//! the speaker's own character, cosine affinity with the current estimate of
//! the interlocutor's character, and the move's conformity to the active
//! conversational type scaled by the confidence in that type. A [`Weights`]
//! triple on the probability simplex mixes them into a score, and a softmax
//! over the scores yields choice probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::persona::{cosine_similarity, TraitVector};

/// Tolerance on `alpha + beta + gamma == 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecisionError {
    #[error("weight {name} is {value}, must be a finite value >= 0")]
    NegativeWeight { name: &'static str, value: f64 },

    #[error("weights sum to {0}, violating the simplex constraint alpha + beta + gamma = 1")]
    NotOnSimplex(f64),

    #[error("conversational-type probability {0} outside [0, 1]")]
    ConvProbOutOfRange(f64),

    #[error("conformity {0} outside [-1, 1]")]
    ConformityOutOfRange(f64),

    #[error("move space is empty")]
    EmptyMoveSpace,

    #[error("score {index} is not finite")]
    NonFiniteScore { index: usize },

    #[error("expected {expected} scores, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct WeightsRepr {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

/// Mixing weights `(alpha, beta, gamma)` for self affinity, other affinity
/// and conversational-type conformity. Always on the probability simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightsRepr", into = "WeightsRepr")]
pub struct Weights {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl Weights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, DecisionError> {
        for (name, value) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !value.is_finite() || value < 0.0 {
                return Err(DecisionError::NegativeWeight { name, value });
            }
        }
        let sum = alpha + beta + gamma;
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(DecisionError::NotOnSimplex(sum));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// Rescales non-negative weights so they sum to one. Useful for
    /// hand-authored decimals such as `(0.33, 0.33, 0.33)`.
    pub fn normalized(alpha: f64, beta: f64, gamma: f64) -> Result<Self, DecisionError> {
        for (name, value) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !value.is_finite() || value < 0.0 {
                return Err(DecisionError::NegativeWeight { name, value });
            }
        }
        let sum = alpha + beta + gamma;
        if sum <= 0.0 {
            return Err(DecisionError::NotOnSimplex(sum));
        }
        Ok(Self {
            alpha: alpha / sum,
            beta: beta / sum,
            gamma: gamma / sum,
        })
    }

    pub fn uniform() -> Self {
        Self {
            alpha: 1.0 / 3.0,
            beta: 1.0 / 3.0,
            gamma: 1.0 / 3.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn l1_distance(&self, other: &Weights) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

impl TryFrom<WeightsRepr> for Weights {
    type Error = DecisionError;

    fn try_from(r: WeightsRepr) -> Result<Self, Self::Error> {
        Self::new(r.alpha, r.beta, r.gamma)
    }
}

impl From<Weights> for WeightsRepr {
    fn from(w: Weights) -> Self {
        Self {
            alpha: w.alpha,
            beta: w.beta,
            gamma: w.gamma,
        }
    }
}

/// One entry of a move space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveCandidate {
    pub label: String,
    pub text: String,
    pub vector: TraitVector,
    pub conformity: f64,
}

impl MoveCandidate {
    pub fn new(
        label: impl Into<String>,
        text: impl Into<String>,
        vector: TraitVector,
        conformity: f64,
    ) -> Result<Self, DecisionError> {
        if !conformity.is_finite() || !(-1.0..=1.0).contains(&conformity) {
            return Err(DecisionError::ConformityOutOfRange(conformity));
        }
        Ok(Self {
            label: label.into(),
            text: text.into(),
            vector,
            conformity,
        })
    }
}

/// One row of the decision factor matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionFactors {
    pub s_self: f64,
    pub s_other: f64,
    pub conf_mass: f64,
}

impl DecisionFactors {
    pub fn as_array(&self) -> [f64; 3] {
        [self.s_self, self.s_other, self.conf_mass]
    }
}

impl From<[f64; 3]> for DecisionFactors {
    fn from(a: [f64; 3]) -> Self {
        Self {
            s_self: a[0],
            s_other: a[1],
            conf_mass: a[2],
        }
    }
}

pub fn decision_factors(
    candidate: &MoveCandidate,
    self_char: &TraitVector,
    other_char: &TraitVector,
    conv_prob: f64,
) -> Result<DecisionFactors, DecisionError> {
    if !conv_prob.is_finite() || !(0.0..=1.0).contains(&conv_prob) {
        return Err(DecisionError::ConvProbOutOfRange(conv_prob));
    }
    if !candidate.conformity.is_finite() || !(-1.0..=1.0).contains(&candidate.conformity) {
        return Err(DecisionError::ConformityOutOfRange(candidate.conformity));
    }
    Ok(DecisionFactors {
        s_self: cosine_similarity(&candidate.vector, self_char),
        s_other: cosine_similarity(&candidate.vector, other_char),
        conf_mass: candidate.conformity * conv_prob,
    })
}

/// `alpha * s_self + beta * s_other + gamma * conf_mass`.
pub fn score_move(factors: &DecisionFactors, weights: &Weights) -> f64 {
    score_move_unconstrained(factors, weights.as_array())
}

/// Same linear form without requiring the coefficients to lie on the simplex.
pub fn score_move_unconstrained(factors: &DecisionFactors, coefficients: [f64; 3]) -> f64 {
    coefficients[0] * factors.s_self + coefficients[1] * factors.s_other + coefficients[2] * factors.conf_mass
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(scores: &[f64]) -> Result<Vec<f64>, DecisionError> {
    if scores.is_empty() {
        return Err(DecisionError::EmptyMoveSpace);
    }
    if let Some(index) = scores.iter().position(|s| !s.is_finite()) {
        return Err(DecisionError::NonFiniteScore { index });
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / z).collect())
}

/// `log softmax(scores)[index]`, computed without forming the probabilities.
pub fn log_softmax_at(scores: &[f64], index: usize) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln() + max;
    scores[index] - lse
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredMove {
    pub candidate: MoveCandidate,
    pub factors: DecisionFactors,
    pub rho: f64,
    pub probability: f64,
}

/// Scored move space; entries keep the order of the input moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoredMoveSpace {
    entries: Vec<ScoredMove>,
}

impl ScoredMoveSpace {
    /// Assembles a space from precomputed factors and scores; probabilities
    /// are the softmax of `scores`.
    pub fn from_scores(
        moves: Vec<MoveCandidate>,
        factors: Vec<DecisionFactors>,
        scores: Vec<f64>,
    ) -> Result<Self, DecisionError> {
        if moves.is_empty() {
            return Err(DecisionError::EmptyMoveSpace);
        }
        for got in [factors.len(), scores.len()] {
            if got != moves.len() {
                return Err(DecisionError::LengthMismatch {
                    expected: moves.len(),
                    got,
                });
            }
        }
        let probabilities = softmax(&scores)?;
        let entries = moves
            .into_iter()
            .zip(factors)
            .zip(scores)
            .zip(probabilities)
            .map(|(((candidate, factors), rho), probability)| ScoredMove {
                candidate,
                factors,
                rho,
                probability,
            })
            .collect();
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ScoredMove] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.rho).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.probability).collect()
    }

    pub fn factors(&self) -> Vec<DecisionFactors> {
        self.entries.iter().map(|e| e.factors).collect()
    }
}

pub fn score_space(
    moves: &[MoveCandidate],
    self_char: &TraitVector,
    other_char: &TraitVector,
    conv_prob: f64,
    weights: &Weights,
) -> Result<ScoredMoveSpace, DecisionError> {
    if moves.is_empty() {
        return Err(DecisionError::EmptyMoveSpace);
    }
    let factors = moves
        .iter()
        .map(|m| decision_factors(m, self_char, other_char, conv_prob))
        .collect::<Result<Vec<_>, _>>()?;
    let scores = factors.iter().map(|f| score_move(f, weights)).collect();
    ScoredMoveSpace::from_scores(moves.to_vec(), factors, scores)
}

/// Index of the most probable move; ties go to the lowest index.
pub fn select_argmax(space: &ScoredMoveSpace) -> usize {
    argmax(&space.probabilities())
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Draws an index from the space's distribution.
///
/// The generator is ChaCha8 seeded from `seed` via `SeedableRng::seed_from_u64`;
/// one uniform `f64` in `[0, 1)` is inverted through the cumulative
/// distribution.
pub fn select_sample(space: &ScoredMoveSpace, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_index(&space.probabilities(), rng.random::<f64>())
}

pub(crate) fn sample_index(probabilities: &[f64], u: f64) -> usize {
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tv(c: [f64; 5]) -> TraitVector {
        TraitVector::new(c).unwrap()
    }

    const OTHER: [f64; 5] = [0.0, 0.0, -0.1, -0.4, 0.2];
    const SELF_R1: [f64; 5] = [0.0, 0.3, 0.0, 0.0, 0.5];

    fn bakery_moves() -> Vec<MoveCandidate> {
        vec![
            MoveCandidate::new("price-quote", "1.90", tv(OTHER), 0.8).unwrap(),
            MoveCandidate::new(
                "eject-customer",
                "Get out of the bakery, you're not wearing a mask.",
                tv([0.3, -0.5, 0.0, -0.7, 0.8]),
                -1.0,
            )
            .unwrap(),
            MoveCandidate::new(
                "request-politeness",
                "Please would be nice.",
                tv([0.2, 0.0, 0.3, 0.7, -0.2]),
                0.3,
            )
            .unwrap(),
            MoveCandidate::new(
                "quote-and-request-politeness",
                "1.90 and please would be nice.",
                tv([0.5, 0.6, 0.4, 0.7, -0.4]),
                0.7,
            )
            .unwrap(),
        ]
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(0.1, 0.1, 0.8).is_ok());
        assert!(matches!(
            Weights::new(0.5, 0.5, 0.5),
            Err(DecisionError::NotOnSimplex(_))
        ));
        assert!(matches!(
            Weights::new(-0.1, 0.3, 0.8),
            Err(DecisionError::NegativeWeight { name: "alpha", .. })
        ));
        let w = Weights::normalized(0.33, 0.33, 0.33).unwrap();
        assert!((w.alpha() - 1.0 / 3.0).abs() < 1e-15);
        assert!(serde_json::from_str::<Weights>(r#"{"alpha":0.5,"beta":0.5,"gamma":0.5}"#).is_err());
    }

    #[test]
    fn factors_for_first_bakery_move() {
        let m = &bakery_moves()[0];
        let f = decision_factors(m, &tv(SELF_R1), &tv(OTHER), 0.98).unwrap();
        assert!((f.s_self - 0.3743).abs() < 1e-4);
        assert!((f.s_other - 1.0).abs() < 1e-12);
        assert!((f.conf_mass - 0.784).abs() < 1e-12);
    }

    #[test]
    fn factors_edge_cases() {
        let zero = MoveCandidate::new("z", "", TraitVector::ZERO, 0.5).unwrap();
        let f = decision_factors(&zero, &tv(SELF_R1), &tv(OTHER), 0.9).unwrap();
        assert_eq!((f.s_self, f.s_other), (0.0, 0.0));
        assert!((f.conf_mass - 0.45).abs() < 1e-15);
        let m = &bakery_moves()[1];
        let f = decision_factors(m, &tv(SELF_R1), &tv(OTHER), 0.0).unwrap();
        assert_eq!(f.conf_mass, 0.0);
        assert!(matches!(
            decision_factors(m, &tv(SELF_R1), &tv(OTHER), 1.2),
            Err(DecisionError::ConvProbOutOfRange(_))
        ));
    }

    #[test]
    fn scores_match_worked_example() {
        let w = Weights::new(0.1, 0.1, 0.8).unwrap();
        let space = score_space(&bakery_moves(), &tv(SELF_R1), &tv(OTHER), 0.98, &w).unwrap();
        let rho = space.scores();
        assert!((rho[0] - 0.7646).abs() < 1e-3);
        assert!((rho[1] - -0.6694).abs() < 1e-3);
        assert!((rho[2] - 0.1201).abs() < 1e-3);
        assert!((rho[3] - 0.4727).abs() < 1e-3);
        assert_eq!(select_argmax(&space), 0);
    }

    #[test]
    fn third_regime_scores() {
        let w = Weights::new(0.8, 0.1, 0.1).unwrap();
        let s = tv([0.2, -0.3, 0.0, -0.5, 0.8]);
        let space = score_space(&bakery_moves(), &s, &tv(OTHER), 0.98, &w).unwrap();
        for (got, want) in space.scores().iter().zip([0.8007, 0.7652, -0.5229, -0.5032]) {
            assert!((got - want).abs() < 1e-3, "{got} vs {want}");
        }
    }

    #[test]
    fn softmax_examples() {
        let p = softmax(&[0.7646, -0.7080, 0.1201, 0.4727]).unwrap();
        for (got, want) in p.iter().zip([0.3998, 0.0917, 0.2099, 0.2986]) {
            assert!((got - want).abs() < 5e-4);
        }
        let p = softmax(&[0.8007, 0.7652, -0.5229, -0.5032]).unwrap();
        for (got, want) in p.iter().zip([0.3996, 0.3856, 0.1064, 0.1085]) {
            assert!((got - want).abs() < 5e-4);
        }
        assert_eq!(softmax(&[0.3, 0.3]).unwrap(), vec![0.5, 0.5]);
        assert!(matches!(softmax(&[]), Err(DecisionError::EmptyMoveSpace)));
        assert!(matches!(
            softmax(&[0.0, f64::INFINITY]),
            Err(DecisionError::NonFiniteScore { index: 1 })
        ));
        assert!(softmax(&[1000.0, 999.0]).unwrap().iter().all(|p| p.is_finite()));
    }

    #[test]
    fn argmax_on_second_regime_and_ties() {
        let moves = bakery_moves();
        let f = vec![DecisionFactors::from([0.0; 3]); 4];
        let probs = [0.2677f64, 0.0915, 0.2613, 0.3795];
        let scores: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
        let space = ScoredMoveSpace::from_scores(moves.clone(), f.clone(), scores).unwrap();
        assert_eq!(select_argmax(&space), 3);
        let tied = ScoredMoveSpace::from_scores(moves, f, vec![0.0, 1.0, 1.0, 0.5]).unwrap();
        assert_eq!(select_argmax(&tied), 1);
    }

    #[test]
    fn single_move_space() {
        let w = Weights::uniform();
        let one = &bakery_moves()[..1];
        let space = score_space(one, &tv(SELF_R1), &tv(OTHER), 0.5, &w).unwrap();
        assert_eq!(space.probabilities(), vec![1.0]);
        for seed in 0..50 {
            assert_eq!(select_sample(&space, seed), 0);
        }
        assert!(matches!(
            score_space(&[], &tv(SELF_R1), &tv(OTHER), 0.5, &w),
            Err(DecisionError::EmptyMoveSpace)
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_matches_distribution() {
        let w = Weights::new(0.1, 0.1, 0.8).unwrap();
        let space = score_space(&bakery_moves(), &tv(SELF_R1), &tv(OTHER), 0.98, &w).unwrap();
        assert_eq!(select_sample(&space, 42), select_sample(&space, 42));
        let draws = 100_000u64;
        let hits = (0..draws).filter(|&s| select_sample(&space, s) == 0).count();
        let freq = hits as f64 / draws as f64;
        let analytic = space.probabilities()[0];
        assert!((freq - analytic).abs() < 0.01, "{freq} vs {analytic}");
        assert!((analytic - 0.3984).abs() < 5e-5);
    }

    #[test]
    fn sample_index_skips_zero_mass_tail() {
        assert_eq!(sample_index(&[0.5, 0.5, 0.0], 0.9999999999999999), 1);
        assert_eq!(sample_index(&[0.0, 1.0], 0.0), 1);
    }

    fn factor_row() -> impl Strategy<Value = DecisionFactors> {
        prop::array::uniform3(-1.0f64..=1.0).prop_map(DecisionFactors::from)
    }

    fn simplex() -> impl Strategy<Value = Weights> {
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            Weights::normalized(lo, hi - lo, 1.0 - hi).unwrap_or_else(|_| Weights::uniform())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn softmax_properties(scores in prop::collection::vec(-5.0f64..5.0, 1..8), k in -50.0f64..50.0) {
            let p = softmax(&scores).unwrap();
            prop_assert!(p.iter().all(|x| *x > 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let shifted: Vec<f64> = scores.iter().map(|s| s + k).collect();
            let q = softmax(&shifted).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            for i in 0..scores.len() {
                for j in 0..scores.len() {
                    if scores[i] > scores[j] {
                        prop_assert!(p[i] > p[j]);
                    }
                }
            }
        }

        #[test]
        fn rho_bounded(f in factor_row(), w in simplex()) {
            let r = score_move(&f, &w);
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
        }

        #[test]
        fn score_is_linear_in_weights(f in factor_row(), w1 in prop::array::uniform3(-2.0f64..2.0), w2 in prop::array::uniform3(-2.0f64..2.0)) {
            let sum = [w1[0] + w2[0], w1[1] + w2[1], w1[2] + w2[2]];
            let lhs = score_move_unconstrained(&f, w1) + score_move_unconstrained(&f, w2);
            prop_assert!((lhs - score_move_unconstrained(&f, sum)).abs() < 1e-12);
        }

        #[test]
        fn argmax_shift_invariant_and_lowest_on_ties(scores in prop::collection::vec(prop::sample::select(vec![-0.5, 0.0, 0.25, 0.5]), 1..8), k in -3.0f64..3.0) {
            let n = scores.len();
            let f = vec![DecisionFactors::from([0.0; 3]); n];
            let moves = vec![MoveCandidate::new("m", "", TraitVector::ZERO, 0.0).unwrap(); n];
            let space = ScoredMoveSpace::from_scores(moves.clone(), f.clone(), scores.clone()).unwrap();
            let shifted = ScoredMoveSpace::from_scores(moves, f, scores.iter().map(|s| s + k).collect()).unwrap();
            let best = select_argmax(&space);
            prop_assert_eq!(best, select_argmax(&shifted));
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(best, scores.iter().position(|s| *s == max).unwrap());
        }

        #[test]
        fn score_space_is_permutation_equivariant(
            rows in prop::collection::vec((prop::array::uniform5(-1.0f64..=1.0), -1.0f64..=1.0), 1..6),
            w in simplex(),
            seed in any::<u64>(),
        ) {
            let moves: Vec<MoveCandidate> = rows.iter().enumerate()
                .map(|(i, (v, d))| MoveCandidate::new(format!("m{i}"), "", tv(*v), *d).unwrap())
                .collect();
            let mut perm: Vec<usize> = (0..moves.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..perm.len()).rev() {
                perm.swap(i, rand::Rng::random_range(&mut rng, 0..=i));
            }
            let permuted: Vec<MoveCandidate> = perm.iter().map(|&i| moves[i].clone()).collect();
            let a = score_space(&moves, &tv(SELF_R1), &tv(OTHER), 0.7, &w).unwrap();
            let b = score_space(&permuted, &tv(SELF_R1), &tv(OTHER), 0.7, &w).unwrap();
            for (j, &i) in perm.iter().enumerate() {
                prop_assert_eq!(&a.entries()[i].candidate, &b.entries()[j].candidate);
                prop_assert_eq!(a.entries()[i].rho, b.entries()[j].rho);
                prop_assert!((a.entries()[i].probability - b.entries()[j].probability).abs() < 1e-15);
            }
        }
    }
}
