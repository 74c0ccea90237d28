use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrate::{integrate, Pattern, SimConfig, Targets};
use super::network::Network;

/// Fraction of each domain box used for random initial conditions.
pub const CENTRAL_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternHistogram {
    pub homogeneous: usize,
    pub checkerboard_on_off: usize,
    pub checkerboard_off_on: usize,
    pub other: usize,
}

impl PatternHistogram {
    fn add(&mut self, p: Pattern) {
        match p {
            Pattern::Homogeneous => self.homogeneous += 1,
            Pattern::CheckerboardOnOff => self.checkerboard_on_off += 1,
            Pattern::CheckerboardOffOn => self.checkerboard_off_on += 1,
            Pattern::Other => self.other += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub trials: usize,
    pub converged: usize,
    pub converged_fraction: f64,
    /// Classification of converged trials.
    pub histogram: PatternHistogram,
    pub max_residual: f64,
    pub failures: Vec<TrialFailure>,
}

/// Random initial network state for `trial`: each cell uniform over the
/// central part of the state box, from a per-trial stream of `seed`.
pub fn random_initial_state(net: &Network<'_>, seed: u64, trial: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let dom = net.model().state_domain();
    (0..net.cells()).flat_map(|_| dom.sample_central(&mut rng, CENTRAL_FRACTION)).collect()
}

/// Integrates `trials` random initial conditions in parallel; results are
/// aggregated in trial order.
pub fn ensemble_converge(net: &Network<'_>, cfg: &SimConfig, targets: &Targets, trials: usize, seed: u64) -> EnsembleStats {
    let cfg = SimConfig { record: false, ..*cfg };
    let results: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|trial| integrate(net, &random_initial_state(net, seed, trial), &cfg, targets))
        .collect();
    let mut stats = EnsembleStats {
        trials,
        converged: 0,
        converged_fraction: 0.0,
        histogram: PatternHistogram::default(),
        max_residual: 0.0,
        failures: Vec::new(),
    };
    for (trial, r) in results.into_iter().enumerate() {
        match r {
            Ok(r) => {
                stats.max_residual = stats.max_residual.max(r.residual);
                if r.converged {
                    stats.converged += 1;
                    stats.histogram.add(r.classification.pattern);
                }
            }
            Err(e) => stats.failures.push(TrialFailure {
                trial,
                error: e.to_string(),
            }),
        }
    }
    if trials > 0 {
        stats.converged_fraction = stats.converged as f64 / trials as f64;
    }
    stats
}
