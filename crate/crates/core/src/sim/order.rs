use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::CENTRAL_FRACTION;
use super::network::Network;
use crate::error::{Error, Result};
use crate::graph::Bipartition;
use crate::monotone::SignPattern;
use crate::ode::Rk4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrderConfig {
    pub horizon: f64,
    pub step: f64,
    /// Allowed order violation at every step.
    pub order_tol: f64,
    /// Gap required for strict order.
    pub strict_tol: f64,
}

impl Default for OrderConfig {
    fn default() -> Self {
        Self {
            horizon: 20.0,
            step: 0.01,
            order_tol: 1e-8,
            strict_tol: 1e-10,
        }
    }
}

/// Per-coordinate signs of the network order: `(-1)^{ε_j}` on cells of
/// `set_i`, the opposite sign on cells of `set_i_prime`.
pub fn network_signs(pattern: &SignPattern, bipartition: &Bipartition, cells: usize) -> Vec<f64> {
    let cell = pattern.state_signs();
    let side = bipartition.membership(cells);
    side.iter()
        .flat_map(|&in_i| cell.iter().map(move |s| if in_i { *s } else { -*s }))
        .collect()
}

/// Smallest signed gap `σ_k (b_k - a_k)`; `a ⪯ b` iff this is `>= -tol`.
pub fn min_signed_gap(signs: &[f64], a: &[f64], b: &[f64]) -> (usize, f64) {
    signs
        .iter()
        .zip(a.iter().zip(b))
        .map(|(s, (x, y))| s * (y - x))
        .enumerate()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap_or((0, 0.0))
}

/// Random pairs `a ⪯ b`: `a` uniform in the central box, `b = a + σ ⊙ r`
/// with `r >= 0` up to a tenth of each coordinate range; candidates that
/// leave the domain are redrawn.
pub fn sample_ordered_pairs(net: &Network<'_>, signs: &[f64], count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let dom = net.model().state_domain();
    let n = net.model().state_dim();
    let widths: Vec<f64> = dom.intervals.iter().map(|iv| iv.width()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 1000 * count.max(1) {
        attempts += 1;
        let a: Vec<f64> = (0..net.cells()).flat_map(|_| dom.sample_central(&mut rng, CENTRAL_FRACTION)).collect();
        let b: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(i, &v)| v + signs[i] * 0.1 * widths[i % n] * rng.random::<f64>())
            .collect();
        if b.chunks(n).all(|c| dom.contains(c, 0.0)) {
            out.push((a, b));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderWitness {
    pub pair: usize,
    pub time: f64,
    pub coordinate: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub pairs: usize,
    /// Pairs that were not ordered initially and were skipped.
    pub rejected: usize,
    pub violations: Vec<OrderWitness>,
    /// Distinct pairs checked for strict order at the final time.
    pub strict_checked: usize,
    /// Of those, pairs strictly ordered in every checked coordinate.
    pub strict_held: usize,
}

impl OrderReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// The first violation as an error.
    pub fn into_result(self) -> Result<Self> {
        match self.violations.first() {
            Some(w) => Err(Error::OrderViolation {
                pair: w.pair,
                time: w.time,
                coordinate: w.coordinate,
                gap: w.gap,
            }),
            None => Ok(self),
        }
    }
}

enum PairOutcome {
    Rejected,
    Checked { violation: Option<OrderWitness>, strict: Option<bool> },
}

/// Integrates each pair with RK4 in lockstep and checks the signed order
/// at every step. Strict order at the final time is checked on the
/// coordinates where `strict_mask` is true (per cell coordinate).
pub fn order_preservation_check(
    net: &Network<'_>,
    signs: &[f64],
    pairs: &[(Vec<f64>, Vec<f64>)],
    strict_mask: &[bool],
    cfg: &OrderConfig,
) -> Result<OrderReport> {
    let n = net.model().state_dim();
    let outcomes: Vec<Result<PairOutcome>> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, (a0, b0))| {
            net.check_len(a0)?;
            net.check_len(b0)?;
            let (_, gap0) = min_signed_gap(signs, a0, b0);
            if gap0 < -cfg.order_tol {
                return Ok(PairOutcome::Rejected);
            }
            let differs = a0.iter().zip(b0).any(|(x, y)| (x - y).abs() > cfg.strict_tol);
            let (mut a, mut b) = (a0.clone(), b0.clone());
            let rhs = |y: &[f64], out: &mut [f64]| net.rhs_unchecked(y, out);
            let (mut ra, mut rb) = (Rk4::new(a.len()), Rk4::new(b.len()));
            let total = (cfg.horizon / cfg.step).round() as usize;
            for s in 1..=total {
                ra.step(&rhs, &mut a, cfg.step);
                rb.step(&rhs, &mut b, cfg.step);
                let t = s as f64 * cfg.step;
                net.guard(&mut a, t)?;
                net.guard(&mut b, t)?;
                let (coord, gap) = min_signed_gap(signs, &a, &b);
                if gap < -cfg.order_tol {
                    return Ok(PairOutcome::Checked {
                        violation: Some(OrderWitness { pair: idx, time: t, coordinate: coord, gap }),
                        strict: None,
                    });
                }
            }
            let strict = differs.then(|| {
                (0..a.len())
                    .filter(|&k| strict_mask[k % n])
                    .all(|k| signs[k] * (b[k] - a[k]) > cfg.strict_tol)
            });
            Ok(PairOutcome::Checked { violation: None, strict })
        })
        .collect();
    let mut report = OrderReport {
        pairs: pairs.len(),
        rejected: 0,
        violations: Vec::new(),
        strict_checked: 0,
        strict_held: 0,
    };
    for o in outcomes {
        match o? {
            PairOutcome::Rejected => report.rejected += 1,
            PairOutcome::Checked { violation, strict } => {
                report.violations.extend(violation);
                if let Some(s) = strict {
                    report.strict_checked += 1;
                    report.strict_held += usize::from(s);
                }
            }
        }
    }
    Ok(report)
}
