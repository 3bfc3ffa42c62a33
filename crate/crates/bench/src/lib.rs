//! Shared inputs for the benchmarks.

use charconv_core::bakery::{self, REGIME_1};
use charconv_core::estimate::{synthesize, SyntheticConfig};
use charconv_core::{MoveCandidate, Observation, Scenario, TraitVector, Weights};

/// The bundled bakery dialogue, regime 1.
pub fn bakery_scenario() -> Scenario {
    Scenario::from_file(&bakery::scenario_file(&REGIME_1)).expect("bakery scenario is valid")
}

/// `count` candidate moves with deterministic, spread-out trait readings.
pub fn move_space(count: usize) -> Vec<MoveCandidate> {
    (0..count)
        .map(|i| {
            let t = i as f64 + 1.0;
            let v = [0.0, 1.0, 2.0, 3.0, 4.0].map(|k: f64| (t * 0.7 + k * 1.3).sin());
            let d = (t * 0.37).cos();
            MoveCandidate::new(
                format!("m{i}"),
                "",
                TraitVector::new(v).expect("sin is in range"),
                d,
            )
            .expect("cos is in range")
        })
        .collect()
}

/// Synthetic choices over jittered regime-1 factor rows with planted weights
/// (0.1, 0.1, 0.8).
pub fn planted_observations(count: usize) -> Vec<Observation> {
    synthesize(&SyntheticConfig {
        planted: Weights::new(0.1, 0.1, 0.8).expect("on simplex"),
        base_rows: REGIME_1.factor_rows(),
        count,
        jitter: 0.2,
        seed: 0,
    })
}
