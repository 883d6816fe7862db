//! Per-component proposal tuning, adapted only during burn-in.
//!
//! HMC: the base step size ε is nudged toward the 60–90% acceptance band.
//! RWMH: a scalar factor is nudged toward the 20–30% band and each
//! coordinate's proposal scale is additionally rescaled by the running
//! standard deviation of that coordinate's sampled values.

use serde::Serialize;

/// Acceptance band targeted by the HMC step-size adaptation.
const HMC_BAND: (f64, f64) = (0.6, 0.9);
/// Acceptance band targeted by the RWMH proposal-scale adaptation.
const RWMH_BAND: (f64, f64) = (0.2, 0.3);

/// Component update algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hmc,
    Rwmh,
}

impl Method {
    pub fn parse(s: &str) -> crate::error::Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HMC" => Ok(Method::Hmc),
            "RWMH" => Ok(Method::Rwmh),
            other => Err(crate::error::Error::config(format!(
                "unknown method '{other}' (expected HMC or RWMH)"
            ))),
        }
    }
}

/// Static tuning configuration.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct TuningConfig {
    /// Initial HMC base step size ε₀.
    pub epsilon: f64,
    /// Number of leapfrog steps L.
    pub leapfrog: usize,
    /// Relative jitter δ: each iteration draws ε uniformly from
    /// (ε₀(1−δ), ε₀(1+δ)).
    pub epsilon_jitter: f64,
    /// Initial RWMH proposal standard deviation (per coordinate).
    pub propscale: f64,
    /// Burn-in adaptation cadence in iterations.
    pub tune_interval: usize,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            epsilon: 0.1,
            leapfrog: 10,
            epsilon_jitter: 0.1,
            propscale: 0.1,
            tune_interval: 100,
        }
    }
}

impl TuningConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        if self.epsilon <= 0.0
            || self.leapfrog < 2
            || !(0.0..1.0).contains(&self.epsilon_jitter)
            || self.propscale <= 0.0
            || self.tune_interval == 0
        {
            return Err(crate::error::Error::config(
                "tuning requires epsilon > 0, leapfrog >= 2, jitter in [0,1), propscale > 0",
            ));
        }
        Ok(())
    }
}

/// Mutable tuning state of one mixture component.
#[derive(Debug, Clone)]
pub struct CompTuning {
    pub epsilon: f64,
    pub leapfrog: usize,
    pub epsilon_jitter: f64,
    /// Effective per-coordinate RWMH proposal standard deviations.
    pub propscale: Vec<f64>,
    scale_factor: f64,
    window_accept: u32,
    window_total: u32,
    // Welford accumulators of the sampled position coordinates.
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
    pub frozen: bool,
}

impl CompTuning {
    pub fn new(cfg: &TuningConfig, dim: usize) -> Self {
        CompTuning {
            epsilon: cfg.epsilon,
            leapfrog: cfg.leapfrog,
            epsilon_jitter: cfg.epsilon_jitter,
            propscale: vec![cfg.propscale; dim],
            scale_factor: cfg.propscale,
            window_accept: 0,
            window_total: 0,
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
            frozen: false,
        }
    }

    /// Record one update outcome and the resulting position.
    pub fn observe(&mut self, accepted: bool, position: &[f64]) {
        if self.frozen {
            return;
        }
        self.window_total += 1;
        if accepted {
            self.window_accept += 1;
        }
        self.count += 1;
        for (i, &x) in position.iter().enumerate() {
            let delta = x - self.mean[i];
            self.mean[i] += delta / self.count as f64;
            self.m2[i] += delta * (x - self.mean[i]);
        }
    }

    pub fn window_rate(&self) -> Option<f64> {
        if self.window_total == 0 {
            None
        } else {
            Some(self.window_accept as f64 / self.window_total as f64)
        }
    }

    fn running_sd(&self, i: usize) -> Option<f64> {
        if self.count < 50 {
            return None;
        }
        let var = self.m2[i] / (self.count as f64 - 1.0);
        if var > 1e-16 {
            Some(var.sqrt())
        } else {
            None
        }
    }

    /// One adaptation step based on the acceptance window; called during
    /// burn-in every `tune_interval` iterations.
    pub fn autotune(&mut self, method: Method) {
        if self.frozen {
            return;
        }
        let Some(rate) = self.window_rate() else {
            return;
        };
        match method {
            Method::Hmc => {
                if rate > HMC_BAND.1 {
                    self.epsilon *= 1.1;
                } else if rate < HMC_BAND.0 {
                    self.epsilon *= 0.9;
                }
            }
            Method::Rwmh => {
                // Higher acceptance means steps are too small.
                if rate > RWMH_BAND.1 {
                    self.scale_factor *= 1.1;
                } else if rate < RWMH_BAND.0 {
                    self.scale_factor *= 0.9;
                }
                for i in 0..self.propscale.len() {
                    self.propscale[i] = match self.running_sd(i) {
                        Some(sd) => self.scale_factor * sd,
                        None => self.scale_factor,
                    };
                }
            }
        }
        self.window_accept = 0;
        self.window_total = 0;
    }

    /// Stop all adaptation (end of burn-in).
    pub fn freeze(&mut self) {
        self.frozen = true;
    }
}

/// One recorded adaptation event, for the tuning history of a chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneEvent {
    pub iteration: usize,
    pub component: usize,
    pub epsilon: f64,
    pub propscale: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuning(dim: usize) -> CompTuning {
        CompTuning::new(&TuningConfig::default(), dim)
    }

    #[test]
    fn full_acceptance_raises_epsilon() {
        let mut t = tuning(2);
        for _ in 0..100 {
            t.observe(true, &[0.0, 0.0]);
        }
        let before = t.epsilon;
        t.autotune(Method::Hmc);
        assert!(t.epsilon > before);
    }

    #[test]
    fn zero_acceptance_lowers_epsilon() {
        let mut t = tuning(2);
        for _ in 0..100 {
            t.observe(false, &[0.0, 0.0]);
        }
        let before = t.epsilon;
        t.autotune(Method::Hmc);
        assert!(t.epsilon < before);
    }

    #[test]
    fn rwmh_rescales_by_running_sd() {
        let mut t = tuning(1);
        for i in 0..200 {
            // Alternate around zero with sd ~ 2.
            let x = if i % 2 == 0 { 2.0 } else { -2.0 };
            t.observe(i % 4 == 0, &[x]);
        }
        t.autotune(Method::Rwmh);
        let sd = 2.0 * (200.0f64 / 199.0).sqrt();
        assert!((t.propscale[0] / t.scale_factor - sd).abs() < 1e-6);
    }

    #[test]
    fn frozen_tuning_never_moves() {
        let mut t = tuning(1);
        t.freeze();
        for _ in 0..100 {
            t.observe(true, &[1.0]);
        }
        let eps = t.epsilon;
        t.autotune(Method::Hmc);
        assert_eq!(t.epsilon, eps);
    }
}
