//! One TD(λ) learning step for each step-size strategy.
//!
//! Every step computes the TD error with the weights from before the step,
//! updates the eligibility trace and moves the weights along `δ·z`. The
//! strategies differ only in how the per-weight step-size is produced:
//!
//! * fixed: `α_i = exp(β_i)` with `β_i = ln α₀` never modified;
//! * TIDBD: `β` follows a meta-gradient through the meta-trace `H`;
//! * AlphaBound: one scalar step-size that can only shrink;
//! * RMSprop: `α₀ / (√v_i + ε)` from a running average of squared semi-gradients.

use crate::error::{Error, Result};
use crate::state::{AdapterConfig, AdapterKind, LearnerState, TraceMode};
use crate::types::{dot, FeatureVector, Transition};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    /// TD error of the step.
    pub delta: f64,
    /// Set when any of `w`, `β`, `H` (or the adapter auxiliaries) became
    /// non-finite, or `‖w‖∞` exceeded the configured bound.
    pub diverged: bool,
}

/// `R + γ'·w⊤φ(s') − w⊤φ(s)`.
pub fn td_error(state: &LearnerState, t: &Transition) -> Result<f64> {
    let v = dot(&state.w, &t.phi)?;
    if t.gamma_next == 0.0 {
        // No bootstrapping across a terminal boundary, even from a non-finite estimate.
        return Ok(t.reward - v);
    }
    Ok(t.reward + t.gamma_next * dot(&state.w, &t.phi_next)? - v)
}

#[inline]
fn trace_element(z: f64, phi: f64, decay: f64, mode: TraceMode) -> f64 {
    match mode {
        TraceMode::Accumulate => decay * z + phi,
        TraceMode::Replace if phi != 0.0 => phi,
        TraceMode::Replace => decay * z,
    }
}

/// Decays `z` by `γλ` and adds (accumulate) or writes (replace) `φ(s)`.
pub fn update_trace(
    z: &mut [f64],
    phi: &FeatureVector,
    gamma: f64,
    lambda: f64,
    mode: TraceMode,
) -> Result<()> {
    check_len(z.len(), phi.len())?;
    let decay = gamma * lambda;
    for (zi, p) in z.iter_mut().zip(phi.dense_iter()) {
        *zi = trace_element(*zi, p, decay, mode);
    }
    Ok(())
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

fn check_transition(state: &LearnerState, t: &Transition) -> Result<()> {
    check_len(state.len(), t.phi.len())?;
    check_len(state.len(), t.phi_next.len())
}

fn expect_kind(cfg: &AdapterConfig, ok: bool, op: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config("kind", format!("{op} cannot run a {} adapter", cfg.kind)))
    }
}

/// Tracks finiteness and `‖w‖∞` over the elements a step touches.
struct DivergenceWatch {
    bound: f64,
    bad: bool,
}

impl DivergenceWatch {
    fn new(bound: f64, delta: f64) -> Self {
        DivergenceWatch {
            bound,
            bad: !delta.is_finite(),
        }
    }

    #[inline]
    fn weight(&mut self, w: f64) {
        self.bad |= !(w.abs() <= self.bound);
    }

    #[inline]
    fn value(&mut self, x: f64) {
        self.bad |= !x.is_finite();
    }
}

/// One TIDBD(λ) step.
///
/// Per element, in order: `β_i += θδφ_i H_i`; `α_i = e^{β_i}`; trace update;
/// `w_i += α_i δ z_i`; `H_i ← H_i [1 − α_i φ_i z_i]⁺ + α_i δ z_i`.
pub fn tidbd_step(
    state: &mut LearnerState,
    t: &Transition,
    cfg: &AdapterConfig,
) -> Result<StepOutcome> {
    expect_kind(cfg, cfg.kind.is_tidbd(), "tidbd_step")?;
    check_transition(state, t)?;
    let delta = td_error(state, t)?;
    let decay = cfg.gamma * cfg.lambda;
    let mode = cfg.trace_mode();
    let theta = cfg.theta;
    let mut watch = DivergenceWatch::new(cfg.divergence_bound, delta);

    let LearnerState { w, z, beta, h, .. } = state;
    for (i, phi_i) in t.phi.dense_iter().enumerate() {
        let zi = trace_element(z[i], phi_i, decay, mode);
        z[i] = zi;
        if phi_i == 0.0 && zi == 0.0 {
            // β, w and H are all left exactly as they are.
            continue;
        }
        beta[i] += theta * delta * phi_i * h[i];
        let alpha = beta[i].exp();
        let update = alpha * delta * zi;
        w[i] += update;
        h[i] = h[i] * (1.0 - alpha * phi_i * zi).max(0.0) + update;
        watch.weight(w[i]);
        watch.value(beta[i]);
        watch.value(h[i]);
    }
    Ok(StepOutcome {
        delta,
        diverged: watch.bad,
    })
}

/// Ordinary TD(λ) with `α_i = exp(β_i)`, `β` never modified.
pub fn fixed_step(
    state: &mut LearnerState,
    t: &Transition,
    cfg: &AdapterConfig,
) -> Result<StepOutcome> {
    expect_kind(cfg, cfg.kind == AdapterKind::Fixed, "fixed_step")?;
    check_transition(state, t)?;
    let delta = td_error(state, t)?;
    let decay = cfg.gamma * cfg.lambda;
    let mode = cfg.trace_mode();
    let mut watch = DivergenceWatch::new(cfg.divergence_bound, delta);

    let LearnerState { w, z, beta, .. } = state;
    for (i, phi_i) in t.phi.dense_iter().enumerate() {
        let zi = trace_element(z[i], phi_i, decay, mode);
        z[i] = zi;
        if phi_i == 0.0 && zi == 0.0 {
            continue;
        }
        w[i] += beta[i].exp() * delta * zi;
        watch.weight(w[i]);
    }
    Ok(StepOutcome {
        delta,
        diverged: watch.bad,
    })
}

/// TD(λ) with a single shared step-size bounded by `1 / |z⊤(γ'φ(s') − φ(s))|`.
///
/// The bound `aux[0]` only ever shrinks; it is left alone when the
/// correlation term is non-negative.
pub fn alphabound_step(
    state: &mut LearnerState,
    t: &Transition,
    cfg: &AdapterConfig,
) -> Result<StepOutcome> {
    expect_kind(cfg, cfg.kind == AdapterKind::Alphabound, "alphabound_step")?;
    check_transition(state, t)?;
    if state.aux.len() != 1 {
        return Err(Error::LengthMismatch {
            expected: 1,
            actual: state.aux.len(),
        });
    }
    let delta = td_error(state, t)?;
    update_trace(&mut state.z, &t.phi, cfg.gamma, cfg.lambda, cfg.trace_mode())?;

    let correlation: f64 = state
        .z
        .iter()
        .zip(t.phi_next.dense_iter().zip(t.phi.dense_iter()))
        .map(|(zi, (next, cur))| zi * (t.gamma_next * next - cur))
        .sum();
    if correlation < 0.0 {
        state.aux[0] = state.aux[0].min(1.0 / correlation.abs());
    }
    let alpha = state.aux[0];

    let mut watch = DivergenceWatch::new(cfg.divergence_bound, delta);
    watch.value(alpha);
    for (wi, zi) in state.w.iter_mut().zip(&state.z) {
        if *zi != 0.0 {
            *wi += alpha * delta * zi;
            watch.weight(*wi);
        }
    }
    Ok(StepOutcome {
        delta,
        diverged: watch.bad,
    })
}

/// TD(λ) with RMSprop scaling of the trace-weighted semi-gradient `g_i = δ z_i`.
pub fn rmsprop_step(
    state: &mut LearnerState,
    t: &Transition,
    cfg: &AdapterConfig,
) -> Result<StepOutcome> {
    expect_kind(cfg, cfg.kind == AdapterKind::Rmsprop, "rmsprop_step")?;
    check_transition(state, t)?;
    check_len(state.len(), state.aux.len())?;
    let delta = td_error(state, t)?;
    let decay = cfg.gamma * cfg.lambda;
    let mode = cfg.trace_mode();
    let (rho, eps, alpha0) = (cfg.rho, cfg.epsilon, cfg.alpha0);
    let mut watch = DivergenceWatch::new(cfg.divergence_bound, delta);

    let LearnerState { w, z, aux: v, .. } = state;
    for (i, phi_i) in t.phi.dense_iter().enumerate() {
        let zi = trace_element(z[i], phi_i, decay, mode);
        z[i] = zi;
        let g = delta * zi;
        v[i] = rho * v[i] + (1.0 - rho) * g * g;
        if g != 0.0 {
            w[i] += alpha0 / (v[i].sqrt() + eps) * g;
            watch.weight(w[i]);
        }
        watch.value(v[i]);
    }
    Ok(StepOutcome {
        delta,
        diverged: watch.bad,
    })
}

/// Dispatches to the step function matching `cfg.kind`.
pub fn step(state: &mut LearnerState, t: &Transition, cfg: &AdapterConfig) -> Result<StepOutcome> {
    match cfg.kind {
        AdapterKind::Fixed => fixed_step(state, t, cfg),
        AdapterKind::TidbdAccumulate | AdapterKind::TidbdReplace => tidbd_step(state, t, cfg),
        AdapterKind::Alphabound => alphabound_step(state, t, cfg),
        AdapterKind::Rmsprop => rmsprop_step(state, t, cfg),
    }
}

/// A learner owning its state: steps through transitions, clears traces
/// after terminal transitions and latches the divergence flag.
#[derive(Clone, Debug)]
pub struct Learner {
    cfg: AdapterConfig,
    state: LearnerState,
    diverged: bool,
}

impl Learner {
    pub fn new(num_features: usize, cfg: AdapterConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Learner {
            state: LearnerState::new(num_features, &cfg),
            cfg,
            diverged: false,
        })
    }

    pub fn config(&self) -> &AdapterConfig {
        &self.cfg
    }

    pub fn state(&self) -> &LearnerState {
        &self.state
    }

    pub fn weights(&self) -> &[f64] {
        &self.state.w
    }

    pub fn diverged(&self) -> bool {
        self.diverged
    }

    pub fn predict(&self, phi: &FeatureVector) -> Result<f64> {
        dot(&self.state.w, phi)
    }

    pub fn step(&mut self, t: &Transition) -> Result<StepOutcome> {
        let outcome = step(&mut self.state, t, &self.cfg)?;
        self.diverged |= outcome.diverged;
        if t.is_terminal() {
            self.state.reset_episode();
        }
        Ok(outcome)
    }

    /// Current step-size of weight `i` as the adapter applies it.
    ///
    /// For RMSprop this is the effective `α₀ / (√v_i + ε)`; for AlphaBound the
    /// shared scalar.
    pub fn step_size(&self, i: usize) -> f64 {
        match self.cfg.kind {
            AdapterKind::Alphabound => self.state.aux[0],
            AdapterKind::Rmsprop => self.cfg.alpha0 / (self.state.aux[i].sqrt() + self.cfg.epsilon),
            _ => self.state.alpha(i),
        }
    }

    pub fn step_sizes(&self) -> Vec<f64> {
        (0..self.state.len()).map(|i| self.step_size(i)).collect()
    }

    /// Mean step-size over `indices`.
    pub fn mean_step_size(&self, indices: &[usize]) -> f64 {
        if indices.is_empty() {
            return f64::NAN;
        }
        indices.iter().map(|&i| self.step_size(i)).sum::<f64>() / indices.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(x: f64) -> FeatureVector {
        FeatureVector::dense(vec![x])
    }

    fn tr(phi: FeatureVector, r: f64, next: FeatureVector, g: f64) -> Transition {
        Transition::new(phi, r, next, g).unwrap()
    }

    #[test]
    fn td_error_zero_weights() {
        let cfg = AdapterConfig::fixed(0.1, 0.0, 0.9);
        let s = LearnerState::new(3, &cfg);
        let t = tr(FeatureVector::dense(vec![1.0, 2.0, 0.0]), 1.0, FeatureVector::zeros(3), 0.9);
        assert_eq!(td_error(&s, &t).unwrap(), 1.0);
    }

    #[test]
    fn td_error_self_consistent() {
        let cfg = AdapterConfig::fixed(0.1, 0.0, 1.0);
        let mut s = LearnerState::new(1, &cfg);
        s.w[0] = 1.0;
        let t = tr(scalar(1.0), 0.0, scalar(1.0), 1.0);
        assert_eq!(td_error(&s, &t).unwrap(), 0.0);
    }

    #[test]
    fn td_error_terminal_ignores_next() {
        let cfg = AdapterConfig::fixed(0.1, 0.0, 1.0);
        let mut s = LearnerState::new(1, &cfg);
        s.w[0] = 2.0;
        let t = tr(scalar(1.0), 3.0, scalar(1.0), 0.0);
        assert_eq!(td_error(&s, &t).unwrap(), 1.0);
    }

    #[test]
    fn accumulate_trace_formula() {
        let mut z = vec![0.5];
        update_trace(&mut z, &scalar(1.0), 0.9, 0.5, TraceMode::Accumulate).unwrap();
        assert!((z[0] - 1.225).abs() < 1e-15);
    }

    #[test]
    fn replace_trace_formula() {
        let mut z = vec![0.5, 0.2];
        let phi = FeatureVector::dense(vec![1.0, 0.0]);
        update_trace(&mut z, &phi, 0.9, 0.5, TraceMode::Replace).unwrap();
        assert_eq!(z[0], 1.0);
        assert!((z[1] - 0.09).abs() < 1e-15);
    }

    #[test]
    fn update_trace_checks_length() {
        let mut z = vec![0.0; 2];
        assert!(update_trace(&mut z, &FeatureVector::zeros(3), 0.9, 0.5, TraceMode::Replace).is_err());
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let cfg = AdapterConfig::fixed(0.1, 0.0, 0.9);
        let mut s = LearnerState::new(1, &cfg);
        let t = tr(scalar(1.0), 1.0, scalar(0.0), 0.0);
        assert!(tidbd_step(&mut s, &t, &cfg).is_err());
        assert!(rmsprop_step(&mut s, &t, &cfg).is_err());
        assert!(alphabound_step(&mut s, &t, &cfg).is_err());
    }

    #[test]
    fn fixed_single_multiply() {
        let cfg = AdapterConfig::fixed(0.1, 0.0, 0.0);
        let mut s = LearnerState::new(1, &cfg);
        let out = fixed_step(&mut s, &tr(scalar(1.0), 1.0, scalar(0.0), 0.0), &cfg).unwrap();
        assert_eq!(out.delta, 1.0);
        assert_eq!(s.z[0], 1.0);
        assert!((s.w[0] - 0.1).abs() < 1e-15);
        assert!(!out.diverged);
    }

    #[test]
    fn fixed_zero_step_size_never_moves() {
        let cfg = AdapterConfig::fixed(0.0, 0.5, 0.9);
        let mut learner = Learner::new(2, cfg).unwrap();
        let t = tr(FeatureVector::dense(vec![1.0, 0.5]), 3.0, FeatureVector::dense(vec![0.2, 1.0]), 0.9);
        for _ in 0..50 {
            let out = learner.step(&t).unwrap();
            assert!(!out.diverged);
        }
        assert_eq!(learner.weights(), &[0.0, 0.0]);
    }

    #[test]
    fn alphabound_halves_bound() {
        // z_after = (2, 2), γ'φ' − φ = (−1, −1) → c = −4.
        let cfg = AdapterConfig::alphabound(0.5, 0.0, 0.0);
        let mut s = LearnerState::new(2, &cfg);
        let phi = FeatureVector::dense(vec![2.0, 2.0]);
        let next = FeatureVector::dense(vec![2.0, 2.0]);
        let t = tr(phi, 1.0, next, 0.5);
        alphabound_step(&mut s, &t, &cfg).unwrap();
        assert_eq!(s.aux[0], 0.25);
        // δ = 1, w = 0.25·1·2
        assert_eq!(s.w, vec![0.5, 0.5]);

        let cfg = AdapterConfig::alphabound(0.1, 0.0, 0.0);
        let mut s = LearnerState::new(2, &cfg);
        alphabound_step(&mut s, &t, &cfg).unwrap();
        assert_eq!(s.aux[0], 0.1);
    }

    #[test]
    fn alphabound_skips_nonnegative_correlation() {
        let cfg = AdapterConfig::alphabound(1.0, 0.0, 1.0);
        let mut s = LearnerState::new(1, &cfg);
        // z = 1, γ'φ' − φ = 0
        alphabound_step(&mut s, &tr(scalar(1.0), 1.0, scalar(1.0), 1.0), &cfg).unwrap();
        assert_eq!(s.aux[0], 1.0);
    }

    #[test]
    fn rmsprop_first_step() {
        let cfg = AdapterConfig::rmsprop(0.1, 0.9, 0.0, 0.0);
        let mut learner = Learner::new(1, cfg).unwrap();
        learner.step(&tr(scalar(1.0), 1.0, scalar(0.0), 0.0)).unwrap();
        assert!((learner.state().aux[0] - 0.1).abs() < 1e-15);
        let eff = 0.1 / (0.1f64.sqrt() + 1e-8);
        assert!((learner.step_size(0) - eff).abs() < 1e-15);
        assert!((learner.weights()[0] - eff).abs() < 1e-15);
    }

    #[test]
    fn rmsprop_zero_gradient_decays_accumulator() {
        let cfg = AdapterConfig::rmsprop(0.1, 0.9, 0.0, 0.0);
        let mut s = LearnerState::new(2, &cfg);
        s.aux = vec![0.5, 0.5];
        s.w = vec![1.0, 2.0];
        let phi = FeatureVector::dense(vec![1.0, 0.0]);
        rmsprop_step(&mut s, &tr(phi, 1.0, FeatureVector::zeros(2), 0.0), &cfg).unwrap();
        assert_eq!(s.aux[1], 0.9 * 0.5);
        assert_eq!(s.w[1], 2.0);
    }

    #[test]
    fn rmsprop_constant_gradient_limit() {
        // Geometric-series oracle for v after k steps of constant g.
        let rho: f64 = 0.9;
        let g: f64 = 0.5;
        let mut v: f64 = 0.0;
        for _ in 0..200 {
            v = rho * v + (1.0 - rho) * g * g;
        }
        // Closed form of the recursion: g²(1 − ρ^k).
        let closed = g * g * (1.0 - rho.powi(200));
        assert!((v - closed).abs() < 1e-15);
        assert!((v - g * g).abs() < 1e-9);

        // A negligible α₀ keeps w ≈ 0, so δ (and g) stays at the reward.
        let cfg = AdapterConfig::rmsprop(1e-300, rho, 0.0, 0.0);
        let mut s = LearnerState::new(1, &cfg);
        let t = tr(scalar(1.0), g, scalar(0.0), 0.0);
        for _ in 0..200 {
            rmsprop_step(&mut s, &t, &cfg).unwrap();
        }
        assert!((s.aux[0] - g * g).abs() < 1e-9);
        let eff = cfg.alpha0 / (s.aux[0].sqrt() + cfg.epsilon);
        let limit = cfg.alpha0 / (g.abs() + cfg.epsilon);
        assert!(((eff - limit) / limit).abs() < 1e-8);
    }

    #[test]
    fn divergence_is_flagged() {
        let mut cfg = AdapterConfig::fixed(10.0, 0.0, 1.0);
        cfg.divergence_bound = 1e3;
        let mut learner = Learner::new(1, cfg).unwrap();
        let t = tr(scalar(1.0), 1.0, scalar(2.0), 1.0);
        let mut flagged = false;
        for _ in 0..20 {
            if learner.step(&t).unwrap().diverged {
                flagged = true;
                break;
            }
        }
        assert!(flagged);
        assert!(learner.diverged());
    }

    #[test]
    fn terminal_transition_clears_traces() {
        let cfg = AdapterConfig::tidbd(TraceMode::Accumulate, 0.1, 0.01, 0.9, 0.9);
        let mut learner = Learner::new(2, cfg).unwrap();
        let phi = FeatureVector::one_hot(2, 0).unwrap();
        learner.step(&tr(phi.clone(), -1.0, phi.clone(), 0.9)).unwrap();
        assert!(learner.state().z[0] > 0.0);
        learner.step(&tr(phi.clone(), -1.0, phi, 0.0)).unwrap();
        assert_eq!(learner.state().z, vec![0.0, 0.0]);
        assert!(learner.state().h[0] != 0.0);
    }

    fn random_transition(rng: &mut ChaCha8Rng, n: usize) -> Transition {
        let phi = FeatureVector::dense((0..n).map(|_| if rng.random_bool(0.5) { rng.random_range(-1.0..1.0) } else { 0.0 }).collect());
        let next = FeatureVector::dense((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
        tr(phi, rng.random_range(-2.0..2.0), next, 0.9)
    }

    #[test]
    fn zero_td_error_leaves_weights() {
        let n = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in AdapterKind::ALL {
            let cfg = AdapterConfig {
                theta: 0.1,
                rho: 0.9,
                ..AdapterConfig::new(kind, 0.1, 0.5, 0.9)
            };
            let mut s = LearnerState::new(n, &cfg);
            s.w = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            // Choose the reward that makes δ exactly zero for this w.
            let mut t = random_transition(&mut rng, n);
            t.reward = 0.0;
            t.reward = -td_error(&s, &t).unwrap();
            if td_error(&s, &t).unwrap() != 0.0 {
                continue;
            }
            let w0 = s.w.clone();
            let out = step(&mut s, &t, &cfg).unwrap();
            assert_eq!(out.delta, 0.0);
            assert_eq!(s.w, w0, "{kind}");
        }
    }

    #[test]
    fn tidbd_beta_frozen_without_meta_trace_or_activation() {
        let cfg = AdapterConfig::tidbd(TraceMode::Accumulate, 0.05, 0.5, 0.8, 0.9);
        let mut s = LearnerState::new(3, &cfg);
        let beta0 = s.beta.clone();
        // H = 0 initially: first step cannot move β.
        let t = tr(FeatureVector::dense(vec![1.0, 0.0, 0.5]), 2.0, FeatureVector::zeros(3), 0.9);
        tidbd_step(&mut s, &t, &cfg).unwrap();
        assert_eq!(s.beta, beta0);
        // Feature 1 is never active: its β stays put.
        for _ in 0..20 {
            tidbd_step(&mut s, &t, &cfg).unwrap();
        }
        assert_eq!(s.beta[1], beta0[1]);
        assert_ne!(s.beta[0], beta0[0]);
    }

    proptest! {
        #[test]
        fn replace_traces_stay_in_unit_interval(
            seed in any::<u64>(),
            gamma in 0.0f64..=1.0,
            lambda in 0.0f64..=1.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 8;
            let mut z = vec![0.0; n];
            for _ in 0..200 {
                let active: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.3)).collect();
                let phi = FeatureVector::binary(n, active).unwrap();
                update_trace(&mut z, &phi, gamma, lambda, TraceMode::Replace).unwrap();
                prop_assert!(z.iter().all(|x| (0.0..=1.0).contains(x)));
            }
        }

        #[test]
        fn accumulate_trace_recursion_is_exact(
            seed in any::<u64>(),
            gamma in 0.0f64..=1.0,
            lambda in 0.0f64..=1.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 5;
            let mut z = vec![0.0; n];
            for _ in 0..100 {
                let values: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let expected: Vec<f64> = z.iter().zip(&values).map(|(zi, p)| gamma * lambda * zi + p).collect();
                update_trace(&mut z, &FeatureVector::dense(values), gamma, lambda, TraceMode::Accumulate).unwrap();
                prop_assert_eq!(&z, &expected);
            }
        }

        #[test]
        fn alphabound_never_increases(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = AdapterConfig::alphabound(1.0, lambda, 0.9);
            let mut learner = Learner::new(6, cfg).unwrap();
            let mut prev = learner.step_size(0);
            for _ in 0..300 {
                let t = random_transition(&mut rng, 6);
                learner.step(&t).unwrap();
                let a = learner.step_size(0);
                prop_assert!(a <= prev);
                prev = a;
            }
        }

        #[test]
        fn rmsprop_accumulator_nonnegative(seed in any::<u64>(), rho in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = AdapterConfig::rmsprop(0.01, rho, 0.5, 0.9);
            let mut learner = Learner::new(6, cfg).unwrap();
            for _ in 0..300 {
                learner.step(&random_transition(&mut rng, 6)).unwrap();
                prop_assert!(learner.state().aux.iter().all(|v| *v >= 0.0));
            }
        }

        #[test]
        fn lengths_never_change(seed in any::<u64>(), k in 0usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kind = AdapterKind::ALL[k];
            let cfg = AdapterConfig { theta: 0.01, rho: 0.5, ..AdapterConfig::new(kind, 0.05, 0.5, 0.9) };
            let mut learner = Learner::new(7, cfg).unwrap();
            for _ in 0..50 {
                learner.step(&random_transition(&mut rng, 7)).unwrap();
            }
            let s = learner.state();
            prop_assert_eq!(s.w.len(), 7);
            prop_assert_eq!(s.z.len(), 7);
            prop_assert_eq!(s.beta.len(), 7);
            prop_assert_eq!(s.h.len(), 7);
            prop_assert!(learner.step_sizes().iter().all(|a| a.is_finite() && *a > 0.0));
        }
    }
}
