//! Recovering mixing weights from observed move choices.
//!
//! Each [`Observation`] lists the decision factor rows of the candidate
//! moves and which one was taken. Under the softmax choice model the
//! log-likelihood is concave in the weights, so a grid scan over the
//! 2-simplex finds the global optimum up to the grid resolution and
//! projected gradient ascent polishes it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{
    log_softmax_at, sample_index, score_move_unconstrained, softmax, DecisionFactors, Weights,
};

/// Grid values within this distance of the best are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Two non-adjacent grid optima closer than this make the fit non-identifiable.
pub const IDENTIFIABILITY_GAP: f64 = 1e-9;

/// L1 shift between consecutive window fits that is reported as a change point.
pub const CHANGE_POINT_THRESHOLD: f64 = 0.3;

pub const DEFAULT_GRID_STEP: f64 = 0.02;
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("no informative observations (every observation has a single candidate)")]
    NoInformativeObservations,

    #[error("observation has no candidates")]
    EmptyObservation,

    #[error("chosen index {chosen} out of range for {len} candidates")]
    ChosenOutOfRange { chosen: usize, len: usize },

    #[error("factor value {0} is not finite")]
    NonFiniteFactor(f64),

    #[error("grid step {0} outside (0, 0.5]")]
    BadStep(f64),

    #[error("window size must be at least 1")]
    BadWindow,

    #[error("prior concentration {0} must be >= 1")]
    BadPrior(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    factors: Vec<DecisionFactors>,
    chosen: usize,
}

impl Observation {
    pub fn new(factors: Vec<DecisionFactors>, chosen: usize) -> Result<Self, EstimateError> {
        if factors.is_empty() {
            return Err(EstimateError::EmptyObservation);
        }
        if chosen >= factors.len() {
            return Err(EstimateError::ChosenOutOfRange {
                chosen,
                len: factors.len(),
            });
        }
        for f in &factors {
            for v in f.as_array() {
                if !v.is_finite() {
                    return Err(EstimateError::NonFiniteFactor(v));
                }
            }
        }
        Ok(Self { factors, chosen })
    }

    pub fn factors(&self) -> &[DecisionFactors] {
        &self.factors
    }

    pub fn chosen(&self) -> usize {
        self.chosen
    }

    /// A single-candidate observation carries no information about the weights.
    pub fn is_informative(&self) -> bool {
        self.factors.len() >= 2
    }

    fn scores(&self, coefficients: [f64; 3]) -> Vec<f64> {
        self.factors
            .iter()
            .map(|f| score_move_unconstrained(f, coefficients))
            .collect()
    }
}

/// Symmetric-or-not Dirichlet log-prior on the weights, off unless requested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletPrior {
    concentration: [f64; 3],
}

impl DirichletPrior {
    pub fn new(concentration: [f64; 3]) -> Result<Self, EstimateError> {
        for c in concentration {
            if !c.is_finite() || c < 1.0 {
                return Err(EstimateError::BadPrior(c));
            }
        }
        Ok(Self { concentration })
    }

    pub fn log_density(&self, w: [f64; 3]) -> f64 {
        self.concentration
            .iter()
            .zip(w)
            .map(|(a, x)| if *a == 1.0 { 0.0 } else { (a - 1.0) * x.ln() })
            .sum()
    }

    fn gradient(&self, w: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for k in 0..3 {
            let a = self.concentration[k];
            if a != 1.0 {
                g[k] = (a - 1.0) / w[k].max(1e-12);
            }
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    pub prior: Option<DirichletPrior>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub weights: Weights,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub identifiable: bool,
}

/// Sum over observations of the log-probability of the chosen move.
pub fn log_likelihood(observations: &[Observation], weights: &Weights) -> f64 {
    log_likelihood_at(observations, weights.as_array())
}

fn log_likelihood_at(observations: &[Observation], w: [f64; 3]) -> f64 {
    observations
        .iter()
        .filter(|o| o.is_informative())
        .map(|o| log_softmax_at(&o.scores(w), o.chosen))
        .sum()
}

fn objective(observations: &[Observation], w: [f64; 3], options: &FitOptions) -> f64 {
    let ll = log_likelihood_at(observations, w);
    match &options.prior {
        Some(p) => ll + p.log_density(w),
        None => ll,
    }
}

/// Gradient of the log-likelihood with respect to the unconstrained weights.
pub fn log_likelihood_gradient(observations: &[Observation], w: [f64; 3]) -> [f64; 3] {
    let mut g = [0.0; 3];
    for o in observations.iter().filter(|o| o.is_informative()) {
        let p = softmax(&o.scores(w)).expect("validated observation");
        let chosen = o.factors[o.chosen].as_array();
        for k in 0..3 {
            let expected: f64 = o.factors.iter().zip(&p).map(|(f, pj)| pj * f.as_array()[k]).sum();
            g[k] += chosen[k] - expected;
        }
    }
    g
}

fn check_inputs(observations: &[Observation]) -> Result<(), EstimateError> {
    if observations.iter().any(Observation::is_informative) {
        Ok(())
    } else {
        Err(EstimateError::NoInformativeObservations)
    }
}

fn weights_from(w: [f64; 3]) -> Weights {
    let clamped = w.map(|x| x.max(0.0));
    Weights::normalized(clamped[0], clamped[1], clamped[2]).unwrap_or_else(|_| Weights::uniform())
}

/// Exhaustive scan of the simplex grid with spacing `step`.
pub fn fit_grid(observations: &[Observation], step: f64) -> Result<FitResult, EstimateError> {
    fit_grid_with(observations, step, &FitOptions::default())
}

pub fn fit_grid_with(
    observations: &[Observation],
    step: f64,
    options: &FitOptions,
) -> Result<FitResult, EstimateError> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(EstimateError::BadStep(step));
    }
    check_inputs(observations)?;

    let n = (1.0 / step + 1e-9).floor() as usize;
    let mut points: Vec<(usize, usize, [f64; 3], f64)> = Vec::new();
    for i in 0..=n {
        let alpha = i as f64 * step;
        let max_j = ((1.0 - alpha) / step + 1e-9).floor() as usize;
        for j in 0..=max_j {
            let beta = j as f64 * step;
            let gamma = (1.0 - alpha - beta).max(0.0);
            let w = [alpha, beta, gamma];
            points.push((i, j, w, objective(observations, w, options)));
        }
    }

    // Points are visited in lexicographic (alpha, beta) order, so keeping
    // the first of any tie implements the tie-break.
    let mut best = 0;
    for (k, p) in points.iter().enumerate().skip(1) {
        let incumbent = points[best].3;
        if p.3 > incumbent + TIE_TOLERANCE * incumbent.abs().max(1.0) {
            best = k;
        }
    }
    let (bi, bj, bw, bv) = points[best];
    let identifiable = !points.iter().any(|&(i, j, _, v)| {
        let adjacent = i.abs_diff(bi) <= 1 && j.abs_diff(bj) <= 1;
        !adjacent && (bv - v).abs() < IDENTIFIABILITY_GAP
    });
    let weights = weights_from(bw);
    Ok(FitResult {
        weights,
        log_likelihood: log_likelihood(observations, &weights),
        iterations: points.len(),
        converged: true,
        identifiable,
    })
}

/// Euclidean projection onto `{w : w >= 0, sum w = 1}`.
pub fn project_to_simplex(v: [f64; 3]) -> [f64; 3] {
    let mut u = v;
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumulative += uk;
        let t = (cumulative - 1.0) / (k as f64 + 1.0);
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

fn l2(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Projected gradient ascent started from the step-0.1 grid optimum.
pub fn fit_gradient(
    observations: &[Observation],
    max_iterations: usize,
    tolerance: f64,
) -> Result<FitResult, EstimateError> {
    fit_gradient_with(observations, max_iterations, tolerance, &FitOptions::default())
}

pub fn fit_gradient_with(
    observations: &[Observation],
    max_iterations: usize,
    tolerance: f64,
    options: &FitOptions,
) -> Result<FitResult, EstimateError> {
    let start = fit_grid_with(observations, 0.1, options)?;
    if max_iterations == 0 {
        return Ok(FitResult {
            iterations: 0,
            converged: false,
            ..start
        });
    }

    let informative = observations.iter().filter(|o| o.is_informative()).count();
    let mut step = 1.0 / informative as f64;
    let mut w = start.weights.as_array();
    let mut value = objective(observations, w, options);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iterations {
        iterations += 1;
        let mut g = log_likelihood_gradient(observations, w);
        if let Some(p) = &options.prior {
            let pg = p.gradient(w);
            for k in 0..3 {
                g[k] += pg[k];
            }
        }
        let candidate = project_to_simplex([w[0] + step * g[0], w[1] + step * g[1], w[2] + step * g[2]]);
        if l2(candidate, w) < tolerance {
            converged = true;
            break;
        }
        let candidate_value = objective(observations, candidate, options);
        if candidate_value > value {
            w = candidate;
            value = candidate_value;
        } else {
            step *= 0.5;
        }
    }

    let mut weights = weights_from(w);
    if objective(observations, weights.as_array(), options)
        < objective(observations, start.weights.as_array(), options)
    {
        weights = start.weights;
    }
    Ok(FitResult {
        weights,
        log_likelihood: log_likelihood(observations, &weights),
        iterations,
        converged,
        identifiable: start.identifiable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFit {
    pub start: usize,
    pub end: usize,
    pub weights: Weights,
    /// L1 distance from the previous window's weights.
    pub shift: Option<f64>,
    pub change_point: bool,
}

/// Fits disjoint consecutive windows and flags shifts above
/// [`CHANGE_POINT_THRESHOLD`]. Windows without informative observations are
/// skipped.
pub fn window_fits(
    observations: &[Observation],
    window: usize,
    step: f64,
) -> Result<Vec<WindowFit>, EstimateError> {
    if window == 0 {
        return Err(EstimateError::BadWindow);
    }
    let mut out: Vec<WindowFit> = Vec::new();
    for (k, chunk) in observations.chunks(window).enumerate() {
        let fit = match fit_grid(chunk, step) {
            Ok(f) => f,
            Err(EstimateError::NoInformativeObservations) => continue,
            Err(e) => return Err(e),
        };
        let shift = out.last().map(|prev| prev.weights.l1_distance(&fit.weights));
        out.push(WindowFit {
            start: k * window,
            end: k * window + chunk.len(),
            weights: fit.weights,
            shift,
            change_point: shift.is_some_and(|s| s > CHANGE_POINT_THRESHOLD),
        });
    }
    Ok(out)
}

/// Seeded generator of choices drawn from the softmax model.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub planted: Weights,
    pub base_rows: Vec<DecisionFactors>,
    pub count: usize,
    /// Half-width of the uniform perturbation added to each factor.
    pub jitter: f64,
    pub seed: u64,
}

/// Each observation perturbs `base_rows` by uniform noise in
/// `[-jitter, jitter]` (clamped to `[-1, 1]`) and draws the chosen index from
/// the softmax of the planted scores. Uses ChaCha8 seeded from `seed`.
pub fn synthesize(config: &SyntheticConfig) -> Vec<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let w = config.planted.as_array();
    (0..config.count)
        .map(|_| {
            let rows: Vec<DecisionFactors> = config
                .base_rows
                .iter()
                .map(|r| {
                    DecisionFactors::from(r.as_array().map(|x| {
                        let noise = if config.jitter > 0.0 {
                            rng.random_range(-config.jitter..=config.jitter)
                        } else {
                            0.0
                        };
                        (x + noise).clamp(-1.0, 1.0)
                    }))
                })
                .collect();
            let scores: Vec<f64> = rows.iter().map(|f| score_move_unconstrained(f, w)).collect();
            let p = softmax(&scores).expect("finite scores");
            let chosen = sample_index(&p, rng.random::<f64>());
            Observation::new(rows, chosen).expect("well-formed synthetic observation")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bakery::REGIME_1;
    use proptest::prelude::*;

    fn obs(rows: &[[f64; 3]], chosen: usize) -> Observation {
        Observation::new(rows.iter().map(|r| DecisionFactors::from(*r)).collect(), chosen).unwrap()
    }

    fn planted_dataset(count: usize, seed: u64) -> Vec<Observation> {
        synthesize(&SyntheticConfig {
            planted: REGIME_1.weights(),
            base_rows: REGIME_1.factor_rows(),
            count,
            jitter: 0.2,
            seed,
        })
    }

    #[test]
    fn observation_validation() {
        assert!(matches!(
            Observation::new(vec![], 0),
            Err(EstimateError::EmptyObservation)
        ));
        assert!(matches!(
            Observation::new(vec![DecisionFactors::from([0.0; 3])], 1),
            Err(EstimateError::ChosenOutOfRange { .. })
        ));
        assert!(Observation::new(vec![DecisionFactors::from([f64::NAN, 0.0, 0.0])], 0).is_err());
    }

    #[test]
    fn symmetric_candidates_give_log_half() {
        let o = vec![obs(&[[0.3, 0.1, -0.2], [0.3, 0.1, -0.2]], 1)];
        for w in [Weights::uniform(), Weights::new(1.0, 0.0, 0.0).unwrap()] {
            assert!((log_likelihood(&o, &w) - 0.5f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn bakery_choice_likelihood() {
        let rows = REGIME_1.factor_rows();
        let o = vec![Observation::new(rows.clone(), 0).unwrap()];
        let w = REGIME_1.weights();
        // oracle: explicit exp-normalization of the oracle scores
        let rho: Vec<f64> = rows
            .iter()
            .map(|f| 0.1 * f.s_self + 0.1 * f.s_other + 0.8 * f.conf_mass)
            .collect();
        let z: f64 = rho.iter().map(|r| r.exp()).sum();
        let expected = (rho[0].exp() / z).ln();
        assert!((log_likelihood(&o, &w) - expected).abs() < 1e-12);
    }

    #[test]
    fn single_candidate_observations() {
        let o = vec![obs(&[[0.3, 0.1, -0.2]], 0), obs(&[[1.0, 1.0, 1.0]], 0)];
        assert_eq!(log_likelihood(&o, &Weights::uniform()), 0.0);
        assert_eq!(fit_grid(&o, 0.02), Err(EstimateError::NoInformativeObservations));
        assert_eq!(
            fit_gradient(&o, 100, 1e-8),
            Err(EstimateError::NoInformativeObservations)
        );
    }

    #[test]
    fn grid_step_bounds() {
        let o = vec![obs(&[[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]], 0)];
        assert_eq!(fit_grid(&o, 0.0), Err(EstimateError::BadStep(0.0)));
        assert_eq!(fit_grid(&o, 0.6), Err(EstimateError::BadStep(0.6)));
        assert!(fit_grid(&o, 0.5).is_ok());
        assert!(fit_grid(&o, 0.3).is_ok());
    }

    #[test]
    fn identical_rows_are_not_identifiable() {
        let o: Vec<_> = (0..5)
            .map(|i| obs(&[[0.2, -0.4, 0.6], [0.2, -0.4, 0.6]], i % 2))
            .collect();
        let fit = fit_grid(&o, 0.02).unwrap();
        assert!(!fit.identifiable);
        assert_eq!(fit.weights.as_array(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn uniform_dominance_ties_break_to_gamma_vertex() {
        // candidate 0 leads by the same margin in every factor, so the score
        // gap is constant over the simplex and every grid point ties
        let o = vec![obs(&[[0.5, 0.5, 0.5], [-0.5, -0.5, -0.5]], 0)];
        let fit = fit_grid(&o, 0.02).unwrap();
        assert_eq!(fit.weights.as_array(), [0.0, 0.0, 1.0]);
        assert!(!fit.identifiable);
        // brute-force: every grid value equals the vertex value
        let v = log_likelihood(&o, &Weights::new(1.0, 0.0, 0.0).unwrap());
        for a in 0..=10 {
            for b in 0..=(10 - a) {
                let w = Weights::normalized(a as f64, b as f64, (10 - a - b) as f64).unwrap();
                assert!((log_likelihood(&o, &w) - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fit_result_reports_its_own_likelihood() {
        let o = planted_dataset(200, 3);
        for fit in [fit_grid(&o, 0.02).unwrap(), fit_gradient(&o, 1000, 1e-8).unwrap()] {
            assert!((fit.log_likelihood - log_likelihood(&o, &fit.weights)).abs() < 1e-9);
            assert!(fit.log_likelihood <= 0.0);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let o = planted_dataset(50, 11);
        let w = [0.2, 0.3, 0.5];
        let g = log_likelihood_gradient(&o, w);
        let h = 1e-6;
        for k in 0..3 {
            let mut up = w;
            let mut down = w;
            up[k] += h;
            down[k] -= h;
            let fd = (log_likelihood_at(&o, up) - log_likelihood_at(&o, down)) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-5, "{k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn gradient_never_worse_than_coarse_grid() {
        for seed in 0..5 {
            let o = planted_dataset(500, seed);
            let coarse = fit_grid(&o, 0.1).unwrap();
            let polished = fit_gradient(&o, 1000, 1e-8).unwrap();
            assert!(polished.log_likelihood >= coarse.log_likelihood);
            let fine = fit_grid(&o, 0.02).unwrap();
            assert!(polished.log_likelihood >= fine.log_likelihood - 1e-6);
        }
    }

    #[test]
    fn recovers_planted_weights_from_large_samples() {
        let planted = REGIME_1.weights();
        let o = planted_dataset(20_000, 1);
        let fit = fit_gradient(&o, 1000, 1e-8).unwrap();
        assert!(fit.weights.l1_distance(&planted) < 0.1, "{:?}", fit.weights);
    }

    #[test]
    fn vertex_optimum_is_reached_exactly() {
        // choices always follow the self-affinity factor
        let o: Vec<_> = (0..40)
            .map(|i| {
                let x = 0.1 + 0.02 * i as f64;
                obs(&[[x, 0.3, -0.2], [-x, 0.3, -0.2]], 0)
            })
            .collect();
        let fit = fit_gradient(&o, 1000, 1e-8).unwrap();
        assert!(fit.converged);
        assert!(fit.weights.l1_distance(&Weights::new(1.0, 0.0, 0.0).unwrap()) < 1e-6);
        let fine = fit_grid(&o, 0.005).unwrap();
        assert_eq!(fine.weights.as_array(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_iterations_returns_initializer() {
        let o = planted_dataset(100, 5);
        let start = fit_grid(&o, 0.1).unwrap();
        let fit = fit_gradient(&o, 0, 1e-8).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 0);
        assert_eq!(fit.weights, start.weights);
    }

    #[test]
    fn prior_pulls_toward_the_center() {
        let o = vec![obs(&[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]], 0)];
        let plain = fit_grid(&o, 0.02).unwrap();
        assert_eq!(plain.weights.as_array(), [1.0, 0.0, 0.0]);
        let options = FitOptions {
            prior: Some(DirichletPrior::new([2.0, 2.0, 2.0]).unwrap()),
        };
        let with_prior = fit_gradient_with(&o, 1000, 1e-8, &options).unwrap();
        assert!(with_prior.weights.alpha() < 1.0);
        assert!(with_prior.weights.beta() > 0.0);
        assert!(DirichletPrior::new([0.5, 1.0, 1.0]).is_err());
    }

    #[test]
    fn window_fits_flag_shifts() {
        let mut o = synthesize(&SyntheticConfig {
            planted: Weights::new(1.0, 0.0, 0.0).unwrap(),
            base_rows: REGIME_1.factor_rows(),
            count: 400,
            jitter: 1.0,
            seed: 2,
        });
        o.extend(synthesize(&SyntheticConfig {
            planted: Weights::new(0.0, 0.0, 1.0).unwrap(),
            base_rows: REGIME_1.factor_rows(),
            count: 400,
            jitter: 1.0,
            seed: 3,
        }));
        let fits = window_fits(&o, 400, 0.05).unwrap();
        assert_eq!(fits.len(), 2);
        assert!(fits[1].change_point);
        assert!(!fits[0].change_point);
        assert_eq!(window_fits(&o, 0, 0.05), Err(EstimateError::BadWindow));
    }

    #[test]
    fn projection_lands_on_simplex() {
        assert_eq!(project_to_simplex([0.2, 0.3, 0.5]), [0.2, 0.3, 0.5]);
        assert_eq!(project_to_simplex([2.0, 0.0, 0.0]), [1.0, 0.0, 0.0]);
        let p = project_to_simplex([0.5, 0.5, 0.5]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn recovery_improves_with_sample_size() {
        let planted = REGIME_1.weights();
        let median_error = |count: usize| {
            let mut errs: Vec<f64> = (0..10)
                .map(|seed| {
                    let o = planted_dataset(count, 1000 + seed);
                    fit_gradient(&o, 1000, 1e-8)
                        .unwrap()
                        .weights
                        .l1_distance(&planted)
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            (errs[4] + errs[5]) / 2.0
        };
        let small = median_error(100);
        let large = median_error(10_000);
        assert!(large <= small, "median L1 {large} at 10000 vs {small} at 100");
    }

    fn random_observations() -> impl Strategy<Value = Vec<Observation>> {
        prop::collection::vec(
            (
                prop::collection::vec(prop::array::uniform3(-1.0f64..=1.0), 2..5),
                any::<prop::sample::Index>(),
            ),
            1..8,
        )
        .prop_map(|raw| {
            raw.into_iter()
                .map(|(rows, idx)| {
                    let chosen = idx.index(rows.len());
                    Observation::new(rows.into_iter().map(DecisionFactors::from).collect(), chosen).unwrap()
                })
                .collect()
        })
    }

    fn simplex_point() -> impl Strategy<Value = [f64; 3]> {
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            [lo, hi - lo, 1.0 - hi]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn log_likelihood_is_concave(o in random_observations(), w1 in simplex_point(), w2 in simplex_point(), t in 0.0f64..=1.0) {
            let mix = [0, 1, 2].map(|k| t * w1[k] + (1.0 - t) * w2[k]);
            let lhs = log_likelihood_at(&o, mix);
            let rhs = t * log_likelihood_at(&o, w1) + (1.0 - t) * log_likelihood_at(&o, w2);
            prop_assert!(lhs >= rhs - 1e-9);
            prop_assert!(log_likelihood_at(&o, w1) <= 0.0);
        }

        #[test]
        fn log_likelihood_ignores_order(o in random_observations(), w in simplex_point()) {
            let mut reversed = o.clone();
            reversed.reverse();
            prop_assert!((log_likelihood_at(&o, w) - log_likelihood_at(&reversed, w)).abs() < 1e-9);
        }

        #[test]
        fn projection_is_feasible(v in prop::array::uniform3(-3.0f64..3.0)) {
            let p = project_to_simplex(v);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gradient_fit_stays_on_simplex(o in random_observations()) {
            let fit = fit_gradient(&o, 200, 1e-8).unwrap();
            let w = fit.weights.as_array();
            prop_assert!(w.iter().all(|x| *x >= -1e-12));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
