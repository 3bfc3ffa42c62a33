//! OCEAN character vectors and the arithmetic defined over them.
//!
//! A [`TraitVector`] holds the five Big Five scales in the fixed order
//! `[openness, conscientiousness, extroversion, agreeableness, neuroticism]`.
//! The same type carries a speaker's own character, the running estimate of
//! the interlocutor's character, and the character reading of a single move.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TRAIT_COUNT: usize = 5;

pub const TRAIT_NAMES: [&str; TRAIT_COUNT] = [
    "openness",
    "conscientiousness",
    "extroversion",
    "agreeableness",
    "neuroticism",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraitError {
    #[error("trait component {index} ({name}) is {value}, outside [-1, 1]", name = TRAIT_NAMES[*index])]
    OutOfRange { index: usize, value: f64 },

    #[error("trait component {index} ({name}) is not finite", name = TRAIT_NAMES[*index])]
    NonFinite { index: usize },

    #[error("update rate {0} outside [0, 1]")]
    RateOutOfRange(f64),
}

/// Five-component OCEAN vector with every component in `[-1, 1]`.
///
/// Serializes as a plain 5-element array; deserialization validates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 5]", into = "[f64; 5]")]
pub struct TraitVector([f64; TRAIT_COUNT]);

impl TraitVector {
    pub const ZERO: TraitVector = TraitVector([0.0; TRAIT_COUNT]);

    pub fn new(components: [f64; TRAIT_COUNT]) -> Result<Self, TraitError> {
        validate(&components)?;
        Ok(Self(components))
    }

    /// Builds a vector by clamping each component into `[-1, 1]`.
    /// Non-finite components are still rejected.
    pub fn clamped(components: [f64; TRAIT_COUNT]) -> Result<Self, TraitError> {
        let mut out = components;
        for (index, c) in out.iter_mut().enumerate() {
            if !c.is_finite() {
                return Err(TraitError::NonFinite { index });
            }
            *c = c.clamp(-1.0, 1.0);
        }
        Ok(Self(out))
    }

    pub fn components(&self) -> &[f64; TRAIT_COUNT] {
        &self.0
    }

    pub fn openness(&self) -> f64 {
        self.0[0]
    }

    pub fn conscientiousness(&self) -> f64 {
        self.0[1]
    }

    pub fn extroversion(&self) -> f64 {
        self.0[2]
    }

    pub fn agreeableness(&self) -> f64 {
        self.0[3]
    }

    pub fn neuroticism(&self) -> f64 {
        self.0[4]
    }

    pub fn dot(&self, other: &TraitVector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == 0.0)
    }
}

impl Default for TraitVector {
    fn default() -> Self {
        Self::ZERO
    }
}

impl TryFrom<[f64; 5]> for TraitVector {
    type Error = TraitError;

    fn try_from(value: [f64; 5]) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<TraitVector> for [f64; 5] {
    fn from(v: TraitVector) -> Self {
        v.0
    }
}

/// Accepts iff every component is finite and within `[-1, 1]`.
/// Reports the first offending index.
pub fn validate(components: &[f64; TRAIT_COUNT]) -> Result<(), TraitError> {
    for (index, &value) in components.iter().enumerate() {
        if !value.is_finite() {
            return Err(TraitError::NonFinite { index });
        }
        if !(-1.0..=1.0).contains(&value) {
            return Err(TraitError::OutOfRange { index, value });
        }
    }
    Ok(())
}

/// Cosine of the angle between two trait vectors.
///
/// Returns exactly `0.0` when either vector has zero norm, so a blank
/// personality contributes no affinity either way. The result is clamped to
/// `[-1, 1]` to absorb rounding.
pub fn cosine_similarity(a: &TraitVector, b: &TraitVector) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Componentwise exponential moving average `(1 - rate) * previous + rate * observed`.
///
/// The endpoints are exact: `rate == 0` returns `previous` and `rate == 1`
/// returns `observed` bit for bit.
pub fn ema_update(
    previous: &TraitVector,
    observed: &TraitVector,
    rate: f64,
) -> Result<TraitVector, TraitError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(TraitError::RateOutOfRange(rate));
    }
    if rate == 0.0 {
        return Ok(*previous);
    }
    if rate == 1.0 {
        return Ok(*observed);
    }
    let mut out = [0.0; TRAIT_COUNT];
    for (i, slot) in out.iter_mut().enumerate() {
        let (p, o) = (previous.0[i], observed.0[i]);
        // p + rate*(o - p) stays inside [min(p,o), max(p,o)] up to one ulp;
        // the extra clamp keeps it there exactly.
        *slot = (p + rate * (o - p)).clamp(p.min(o), p.max(o));
    }
    TraitVector::clamped(out)
}

/// Strategy for revising the estimate of the interlocutor's character after
/// observing one of their moves.
pub trait CharacterUpdate {
    fn update(&self, previous: &TraitVector, observed: &TraitVector) -> Result<TraitVector, TraitError>;
}

/// Exponential moving average with a fixed rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmaUpdate {
    pub rate: f64,
}

impl Default for EmaUpdate {
    fn default() -> Self {
        Self { rate: 0.5 }
    }
}

impl CharacterUpdate for EmaUpdate {
    fn update(&self, previous: &TraitVector, observed: &TraitVector) -> Result<TraitVector, TraitError> {
        ema_update(previous, observed, self.rate)
    }
}
