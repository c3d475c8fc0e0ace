//! Particle swarm optimization of the kernel parameters (a, b, C).
//!
//! The search runs in log10 space because all three parameters are
//! scale-like. Updates are the standard synchronous form
//! `v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x)`, `x <- x + v`, with
//! positions clamped to the bounds and velocities to half the bound width.
//! Every random draw comes from a per-(iteration, particle) stream derived
//! from the master seed, so results do not depend on evaluation order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GaitError, Result};
use crate::kelm::KernelParams;
use crate::util::derive_seed;

pub const DIMENSIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    /// Inertia weight w.
    pub inertia: f64,
    /// Cognitive coefficient c1.
    pub cognitive: f64,
    /// Social coefficient c2.
    pub social: f64,
    /// Per-dimension (low, high) bounds on log10(a), log10(b), log10(C).
    pub bounds: [(f64, f64); DIMENSIONS],
    pub seed: u64,
}

impl Default for PsoConfig {
    /// Constriction-style coefficients, the standard stable setting.
    fn default() -> Self {
        PsoConfig {
            swarm_size: 20,
            iterations: 30,
            inertia: 0.7298,
            cognitive: 1.49618,
            social: 1.49618,
            bounds: [(-3.0, 3.0); DIMENSIONS],
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(GaitError::InvalidParameter(
                "swarm_size must be >= 1".into(),
            ));
        }
        if self.iterations == 0 {
            return Err(GaitError::InvalidParameter(
                "iterations must be >= 1".into(),
            ));
        }
        for (d, (lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo < hi) {
                return Err(GaitError::InvalidParameter(format!(
                    "bounds dimension {d}: low {lo} must be below high {hi}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Particle {
    position: [f64; DIMENSIONS],
    velocity: [f64; DIMENSIONS],
    best_position: [f64; DIMENSIONS],
    best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    pub best: KernelParams,
    /// Best position in log10 space.
    pub best_position: [f64; DIMENSIONS],
    pub best_fitness: f64,
    /// Global best after initialization and after each iteration;
    /// non-decreasing.
    pub history: Vec<f64>,
    /// Evaluations that returned a non-finite value (scored as -inf).
    pub non_finite_evals: usize,
}

pub fn params_from_log10(position: &[f64; DIMENSIONS]) -> KernelParams {
    KernelParams {
        a: 10f64.powf(position[0]),
        b: 10f64.powf(position[1]),
        c: 10f64.powf(position[2]),
    }
}

/// Runs the swarm against `fitness` (higher is better) and returns the best
/// parameters found, their fitness, and the per-iteration history.
pub fn pso_optimize<F>(fitness: F, config: &PsoConfig) -> Result<PsoOutcome>
where
    F: Fn(&KernelParams) -> f64,
{
    config.validate()?;
    let half_width: [f64; DIMENSIONS] = std::array::from_fn(|d| {
        let (lo, hi) = config.bounds[d];
        (hi - lo) / 2.0
    });
    let mut non_finite = 0usize;

    let eval = |position: &[f64; DIMENSIONS], non_finite: &mut usize| -> f64 {
        let value = fitness(&params_from_log10(position));
        if value.is_finite() {
            value
        } else {
            *non_finite += 1;
            f64::NEG_INFINITY
        }
    };

    // Initialization: iteration stream 0.
    let mut swarm = Vec::with_capacity(config.swarm_size);
    for p in 0..config.swarm_size {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0, p as u64));
        let mut position = [0.0; DIMENSIONS];
        let mut velocity = [0.0; DIMENSIONS];
        for d in 0..DIMENSIONS {
            let (lo, hi) = config.bounds[d];
            position[d] = rng.random_range(lo..hi);
            velocity[d] = rng.random_range(-half_width[d]..half_width[d]);
        }
        let f = eval(&position, &mut non_finite);
        swarm.push(Particle {
            position,
            velocity,
            best_position: position,
            best_fitness: f,
        });
    }

    let mut gbest = swarm
        .iter()
        .max_by(|a, b| a.best_fitness.total_cmp(&b.best_fitness))
        .expect("non-empty swarm")
        .clone();
    let mut history = vec![gbest.best_fitness];

    for iter in 1..=config.iterations {
        // Synchronous update: every particle sees the previous iteration's
        // global best, so evaluation order cannot matter.
        let gbest_position = gbest.best_position;
        for (p, particle) in swarm.iter_mut().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, iter as u64, p as u64));
            for d in 0..DIMENSIONS {
                let r1: f64 = rng.random_range(0.0..1.0);
                let r2: f64 = rng.random_range(0.0..1.0);
                let v = config.inertia * particle.velocity[d]
                    + config.cognitive * r1 * (particle.best_position[d] - particle.position[d])
                    + config.social * r2 * (gbest_position[d] - particle.position[d]);
                particle.velocity[d] = v.clamp(-half_width[d], half_width[d]);
                let (lo, hi) = config.bounds[d];
                particle.position[d] = (particle.position[d] + particle.velocity[d]).clamp(lo, hi);
            }
            let f = eval(&particle.position, &mut non_finite);
            if f > particle.best_fitness {
                particle.best_fitness = f;
                particle.best_position = particle.position;
            }
        }
        for particle in &swarm {
            if particle.best_fitness > gbest.best_fitness {
                gbest = particle.clone();
            }
        }
        history.push(gbest.best_fitness);
    }

    if gbest.best_fitness == f64::NEG_INFINITY {
        return Err(GaitError::Optimization(
            "every fitness evaluation was non-finite".into(),
        ));
    }
    Ok(PsoOutcome {
        best: params_from_log10(&gbest.best_position),
        best_position: gbest.best_position,
        best_fitness: gbest.best_fitness,
        history,
        non_finite_evals: non_finite,
    })
}
