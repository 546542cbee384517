//! Global-best particle swarm optimization.
//!
//! All random draws for an iteration are generated up front from a single
//! ChaCha stream, and objective evaluations within an iteration run in
//! parallel. The trajectory therefore depends only on the seed, never on the
//! thread schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::neural::{self, Network, NeuralError, Termination, TrainReport, Workspace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsoError {
    #[error("invalid PSO configuration: {0}")]
    Config(String),
    #[error("objective returned {value} for particle {particle} at iteration {iteration}")]
    Objective { particle: usize, iteration: usize, value: f64 },
    #[error(transparent)]
    Network(#[from] NeuralError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub max_iterations: usize,
    pub inertia_start: f64,
    pub inertia_end: f64,
    pub cognitive_c1: f64,
    pub social_c2: f64,
    pub position_bounds: (f64, f64),
    /// Maximum speed per component as a fraction of the bound span.
    pub velocity_clamp: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 30,
            max_iterations: 200,
            inertia_start: 0.9,
            inertia_end: 0.4,
            cognitive_c1: 2.0,
            social_c2: 2.0,
            position_bounds: (-5.0, 5.0),
            velocity_clamp: 0.2,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<(), PsoError> {
        if self.swarm_size < 2 {
            return Err(PsoError::Config(format!("swarm_size must be at least 2, got {}", self.swarm_size)));
        }
        if self.max_iterations == 0 {
            return Err(PsoError::Config("max_iterations must be positive".into()));
        }
        let (lo, hi) = self.position_bounds;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(PsoError::Config(format!("bounds ({lo}, {hi}) are not an interval")));
        }
        if !(self.velocity_clamp > 0.0 && self.velocity_clamp <= 1.0) {
            return Err(PsoError::Config(format!("velocity_clamp {} outside (0, 1]", self.velocity_clamp)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoResult {
    pub best_position: Vec<f64>,
    pub best_value: f64,
    /// Global best after each iteration.
    pub value_history: Vec<f64>,
}

/// Minimizes `objective` over the bound box. See [`pso_minimize_from`] to
/// seed particle 0 at a known point.
pub fn pso_minimize<F>(objective: F, dimension: usize, config: &PsoConfig) -> Result<PsoResult, PsoError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pso_minimize_from(objective, dimension, config, None)
}

/// Like [`pso_minimize`], with an optional starting point for particle 0
/// (clipped into the bounds).
pub fn pso_minimize_from<F>(
    objective: F,
    dimension: usize,
    config: &PsoConfig,
    start: Option<&[f64]>,
) -> Result<PsoResult, PsoError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    if dimension == 0 {
        return Err(PsoError::Config("dimension must be at least 1".into()));
    }
    if start.is_some_and(|s| s.len() != dimension) {
        return Err(PsoError::Config("start point has the wrong dimension".into()));
    }
    let n = config.swarm_size;
    let (lo, hi) = config.position_bounds;
    let vmax = config.velocity_clamp * (hi - lo);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut positions: Vec<Vec<f64>> =
        (0..n).map(|_| (0..dimension).map(|_| rng.random_range(lo..=hi)).collect()).collect();
    let mut velocities: Vec<Vec<f64>> =
        (0..n).map(|_| (0..dimension).map(|_| rng.random_range(-vmax..=vmax)).collect()).collect();
    if let Some(s) = start {
        positions[0] = s.iter().map(|v| v.clamp(lo, hi)).collect();
    }

    let evaluate = |positions: &[Vec<f64>], iteration: usize| -> Result<Vec<f64>, PsoError> {
        let values: Vec<f64> = positions.par_iter().map(|p| objective(p)).collect();
        match values.iter().position(|v| !v.is_finite()) {
            Some(particle) => Err(PsoError::Objective { particle, iteration, value: values[particle] }),
            None => Ok(values),
        }
    };

    let values = evaluate(&positions, 0)?;
    let mut pbest = positions.clone();
    let mut pbest_val = values;
    let mut g = argmin(&pbest_val);
    let mut gbest = pbest[g].clone();
    let mut gbest_val = pbest_val[g];

    let mut history = Vec::with_capacity(config.max_iterations);
    let span = (config.max_iterations.max(2) - 1) as f64;
    let mut r1 = vec![0.0; n * dimension];
    let mut r2 = vec![0.0; n * dimension];
    for iteration in 1..=config.max_iterations {
        let w = config.inertia_start - (config.inertia_start - config.inertia_end) * (iteration - 1) as f64 / span;
        r1.iter_mut().for_each(|r| *r = rng.random::<f64>());
        r2.iter_mut().for_each(|r| *r = rng.random::<f64>());
        for i in 0..n {
            let (x, v) = (&mut positions[i], &mut velocities[i]);
            for d in 0..dimension {
                let k = i * dimension + d;
                let vel = w * v[d]
                    + config.cognitive_c1 * r1[k] * (pbest[i][d] - x[d])
                    + config.social_c2 * r2[k] * (gbest[d] - x[d]);
                v[d] = vel.clamp(-vmax, vmax);
                x[d] = (x[d] + v[d]).clamp(lo, hi);
            }
        }
        let values = evaluate(&positions, iteration)?;
        for i in 0..n {
            if values[i] < pbest_val[i] {
                pbest_val[i] = values[i];
                pbest[i].clone_from(&positions[i]);
            }
        }
        g = argmin(&pbest_val);
        if pbest_val[g] < gbest_val {
            gbest_val = pbest_val[g];
            gbest.clone_from(&pbest[g]);
        }
        history.push(gbest_val);
    }
    Ok(PsoResult { best_position: gbest, best_value: gbest_val, value_history: history })
}

fn argmin(values: &[f64]) -> usize {
    values.iter().enumerate().fold(0, |best, (i, &v)| if v < values[best] { i } else { best })
}

/// Trains `network` by minimizing its batch mse over flattened parameters.
///
/// Particle 0 starts at the network's current parameters. The report's
/// history is the swarm's global-best history with the starting mse prepended.
pub fn train_pso(
    network: &Network,
    inputs: &Matrix,
    targets: &Matrix,
    config: &PsoConfig,
) -> Result<(Network, TrainReport), PsoError> {
    let spec = network.spec().clone();
    neural::check_batch(&spec, inputs, targets)?;
    let dimension = network.parameter_count();
    if dimension == 0 {
        return Err(PsoError::Network(NeuralError::Spec("network has no parameters".into())));
    }
    let objective = |p: &[f64]| {
        let mut ws = Workspace::new(&spec);
        neural::batch_mse(&spec, p, inputs, targets, &mut ws)
    };
    let start = objective(network.parameters());
    let result = pso_minimize_from(objective, dimension, config, Some(network.parameters()))?;
    let trained = Network::from_parameters(&spec, result.best_position)?;
    let mut history = Vec::with_capacity(result.value_history.len() + 1);
    history.push(start);
    history.extend(result.value_history);
    let final_mse = result.best_value;
    Ok((
        trained,
        TrainReport {
            epochs_run: history.len() - 1,
            final_mse,
            mse_history: history,
            terminated_by: Termination::MaxEpochs,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_objective_has_flat_history() {
        let r = pso_minimize(|_| 7.0, 3, &PsoConfig { max_iterations: 10, ..Default::default() }).unwrap();
        assert_eq!(r.best_value, 7.0);
        assert!(r.value_history.iter().all(|&v| v == 7.0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            PsoConfig { swarm_size: 1, ..Default::default() },
            PsoConfig { position_bounds: (1.0, 1.0), ..Default::default() },
            PsoConfig { velocity_clamp: 0.0, ..Default::default() },
            PsoConfig { velocity_clamp: 1.5, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(pso_minimize(|_| 0.0, 2, &cfg), Err(PsoError::Config(_))));
        }
        assert!(matches!(pso_minimize(|_| 0.0, 0, &PsoConfig::default()), Err(PsoError::Config(_))));
    }

    #[test]
    fn non_finite_objective_names_the_particle() {
        let err = pso_minimize(|x| if x[0] > 0.0 { f64::NAN } else { 1.0 }, 1, &PsoConfig::default()).unwrap_err();
        assert!(matches!(err, PsoError::Objective { .. }));
    }

    #[test]
    fn history_tracks_best_value() {
        let cfg = PsoConfig { max_iterations: 50, seed: 3, ..Default::default() };
        let r = pso_minimize(|x| x.iter().map(|v| v * v).sum(), 4, &cfg).unwrap();
        assert_eq!(r.value_history.len(), 50);
        assert_eq!(*r.value_history.last().unwrap(), r.best_value);
    }
}
