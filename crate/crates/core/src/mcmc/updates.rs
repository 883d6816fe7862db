//! HMC leapfrog and random-walk Metropolis updates for one component's
//! conditional target.

use crate::mcmc::target::CompTarget;
use crate::mcmc::tuning::CompTuning;
use crate::scalar::wrap_angle;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Outcome of one component update.
#[derive(Debug, Clone)]
pub struct UpdateResult {
    pub position: Vec<f64>,
    pub accepted: bool,
    /// |H(q*, r*) − H(q, r)| for HMC transitions, 0 for RWMH.
    pub energy_error: f64,
    /// A non-finite gradient or target interrupted the trajectory.
    pub degenerate: bool,
}

fn wrap_mu_coords(q: &mut [f64], target: &CompTarget) {
    for i in target.layout.mu_range() {
        q[i] = wrap_angle(q[i]);
    }
}

/// One HMC update with identity mass matrix: momentum half-step, L leapfrog
/// drifts with full momentum kicks in between, closing half-step, then a
/// Metropolis accept/reject on the Hamiltonian change. The base step size is
/// jittered uniformly in (ε₀(1−δ), ε₀(1+δ)) once per call.
pub fn hmc_update<R: Rng>(
    target: &CompTarget,
    q0: &[f64],
    tuning: &CompTuning,
    rng: &mut R,
) -> UpdateResult {
    let d = q0.len();
    let delta = tuning.epsilon_jitter;
    let eps = tuning.epsilon * (1.0 - delta + 2.0 * delta * rng.random::<f64>());
    let l = tuning.leapfrog;

    let mut r: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    let u0 = -target.log_target(q0);
    let h0 = u0 + 0.5 * r.iter().map(|x| x * x).sum::<f64>();

    let reject = |degenerate: bool| UpdateResult {
        position: q0.to_vec(),
        accepted: false,
        energy_error: f64::INFINITY,
        degenerate,
    };

    if !h0.is_finite() {
        return reject(true);
    }
    let Some(g) = target.grad(q0) else {
        return reject(true);
    };
    let mut q = q0.to_vec();
    // r ← r − (ε/2)∇U(q) with ∇U = −∇ log target.
    for i in 0..d {
        r[i] += 0.5 * eps * g[i];
    }
    for step in 1..=l {
        for i in 0..d {
            q[i] += eps * r[i];
        }
        wrap_mu_coords(&mut q, target);
        let Some(g) = target.grad(&q) else {
            return reject(true);
        };
        let gamma = if step == l { 2.0 } else { 1.0 };
        for i in 0..d {
            r[i] += eps / gamma * g[i];
        }
    }
    let u1 = -target.log_target(&q);
    let h1 = u1 + 0.5 * r.iter().map(|x| x * x).sum::<f64>();
    if !h1.is_finite() {
        return reject(false);
    }
    let accepted = rng.random::<f64>().ln() < h0 - h1;
    UpdateResult {
        position: if accepted { q } else { q0.to_vec() },
        accepted,
        energy_error: (h1 - h0).abs(),
        degenerate: false,
    }
}

/// One random-walk Metropolis update: independent normal increments per
/// coordinate with the tuned scales, symmetric proposal.
pub fn rwmh_update<R: Rng>(
    target: &CompTarget,
    q0: &[f64],
    tuning: &CompTuning,
    rng: &mut R,
) -> UpdateResult {
    let mut q: Vec<f64> = q0
        .iter()
        .zip(&tuning.propscale)
        .map(|(&x, &s)| {
            let z: f64 = StandardNormal.sample(rng);
            x + s * z
        })
        .collect();
    wrap_mu_coords(&mut q, target);
    let l0 = target.log_target(q0);
    let l1 = target.log_target(&q);
    let accepted = l1.is_finite() && rng.random::<f64>().ln() < l1 - l0;
    UpdateResult {
        position: if accepted { q } else { q0.to_vec() },
        accepted,
        energy_error: 0.0,
        degenerate: false,
    }
}
