//! Box domains with optional linear constraints, restrictions and sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative inset used for open interval ends when sampling.
const OPEN_INSET: f64 = 1e-3;
const MAX_SOBOL_INDEX: u32 = 1 << 16;

/// One coordinate range. `lo == hi` (closed) pins the coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub lo_open: bool,
    #[serde(default)]
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn pinned(value: f64) -> Self {
        Self::closed(value, value)
    }

    pub fn is_pinned(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Smallest and largest values used when sampling.
    fn sample_range(&self) -> (f64, f64) {
        let inset = OPEN_INSET * self.width();
        let lo = if self.lo_open { self.lo + inset } else { self.lo };
        let hi = if self.hi_open { self.hi - inset } else { self.hi };
        (lo, hi)
    }

    fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lo - tol && v <= self.hi + tol
    }
}

/// Constraint `coeffs · x >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
}

impl LinearConstraint {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Axis-aligned box intersected with homogeneous linear half-spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub intervals: Vec<Interval>,
    #[serde(default)]
    pub constraints: Vec<LinearConstraint>,
}

impl Domain {
    pub fn from_box(intervals: Vec<Interval>) -> Self {
        Self {
            intervals,
            constraints: Vec::new(),
        }
    }

    pub fn with_constraint(mut self, coeffs: Vec<f64>) -> Self {
        self.constraints.push(LinearConstraint { coeffs });
        self
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && self.intervals.iter().zip(x).all(|(iv, &v)| iv.contains(v, tol))
            && self.constraints.iter().all(|c| c.value(x) >= -tol)
    }

    pub fn upper(&self) -> Vec<f64> {
        self.intervals.iter().map(|iv| iv.hi).collect()
    }

    pub fn lower(&self) -> Vec<f64> {
        self.intervals.iter().map(|iv| iv.lo).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.intervals.iter().map(|iv| 0.5 * (iv.lo + iv.hi)).collect()
    }

    /// Clamps `x` into the box. Constraints are not enforced here.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, iv) in x.iter_mut().zip(&self.intervals) {
            *v = v.clamp(iv.lo, iv.hi);
        }
    }

    /// Largest violation of any bound or constraint (0 inside).
    pub fn violation(&self, x: &[f64]) -> (usize, f64) {
        let mut worst = (0, 0.0f64);
        for (i, (iv, &v)) in self.intervals.iter().zip(x).enumerate() {
            let d = (iv.lo - v).max(v - iv.hi);
            if d > worst.1 {
                worst = (i, d);
            }
        }
        for c in &self.constraints {
            let d = -c.value(x);
            if d > worst.1 {
                let coord = c.coeffs.iter().position(|&a| a < 0.0).unwrap_or(0);
                worst = (coord, d);
            }
        }
        worst
    }

    /// Cartesian product; constraints are padded with zeros.
    pub fn product(&self, other: &Domain) -> Domain {
        let (da, db) = (self.dim(), other.dim());
        let mut constraints = Vec::new();
        for c in &self.constraints {
            let mut coeffs = c.coeffs.clone();
            coeffs.resize(da + db, 0.0);
            constraints.push(LinearConstraint { coeffs });
        }
        for c in &other.constraints {
            let mut coeffs = vec![0.0; da];
            coeffs.extend_from_slice(&c.coeffs);
            constraints.push(LinearConstraint { coeffs });
        }
        Domain {
            intervals: self.intervals.iter().chain(&other.intervals).copied().collect(),
            constraints,
        }
    }

    /// Intersects with a restriction sub-box.
    pub fn restrict(&self, r: &Restriction) -> Result<Domain> {
        let mut out = self.clone();
        let bad = |index: usize, message: String| Error::Config {
            pointer: format!("restriction[{index}]"),
            message,
        };
        for b in &r.bounds {
            let iv = out
                .intervals
                .get_mut(b.index)
                .ok_or_else(|| bad(b.index, "coordinate index out of range".into()))?;
            if let Some(lo) = b.lo {
                if lo > iv.lo || (lo == iv.lo && b.lo_open) {
                    iv.lo = lo;
                    iv.lo_open = b.lo_open;
                }
            }
            if let Some(hi) = b.hi {
                if hi < iv.hi || (hi == iv.hi && b.hi_open) {
                    iv.hi = hi;
                    iv.hi_open = b.hi_open;
                }
            }
            if iv.lo > iv.hi || (iv.lo == iv.hi && (iv.lo_open || iv.hi_open)) {
                return Err(bad(b.index, "restricted interval is empty".into()));
            }
        }
        for p in &r.pins {
            let iv = out
                .intervals
                .get_mut(p.index)
                .ok_or_else(|| bad(p.index, "coordinate index out of range".into()))?;
            if !iv.contains(p.value, 0.0) {
                return Err(bad(p.index, format!("pin {} lies outside the domain", p.value)));
            }
            *iv = Interval::pinned(p.value);
        }
        Ok(out)
    }

    pub fn pinned(&self) -> Vec<bool> {
        self.intervals.iter().map(Interval::is_pinned).collect()
    }

    /// Deterministic sample set: every box corner that satisfies the
    /// constraints (for up to 12 free coordinates), then scrambled Sobol
    /// points until `count` points are collected in total.
    pub fn sample(&self, count: usize, seed: u32) -> Vec<Vec<f64>> {
        let ranges: Vec<(f64, f64)> = self.intervals.iter().map(Interval::sample_range).collect();
        let free: Vec<usize> = (0..ranges.len()).filter(|&i| ranges[i].0 < ranges[i].1).collect();
        let mut out = Vec::with_capacity(count);
        if free.len() <= 12 {
            for mask in 0u32..(1 << free.len()) {
                if out.len() >= count {
                    break;
                }
                let mut x: Vec<f64> = ranges.iter().map(|r| r.0).collect();
                for (bit, &i) in free.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        x[i] = ranges[i].1;
                    }
                }
                if self.constraints.iter().all(|c| c.value(&x) >= 0.0) {
                    out.push(x);
                }
            }
        }
        let mut index = 0u32;
        while out.len() < count && index < MAX_SOBOL_INDEX {
            let x: Vec<f64> = ranges
                .iter()
                .enumerate()
                .map(|(d, &(lo, hi))| {
                    let s = sobol_burley::sample(index, d as u32, seed) as f64;
                    lo + s * (hi - lo)
                })
                .collect();
            index += 1;
            if self.constraints.iter().all(|c| c.value(&x) >= 0.0) {
                out.push(x);
            }
        }
        out
    }

    /// Uniform point in the central `fraction` of the box, rejecting
    /// points that violate the constraints.
    pub fn sample_central<R: Rng + ?Sized>(&self, rng: &mut R, fraction: f64) -> Vec<f64> {
        let margin = 0.5 * (1.0 - fraction);
        for _ in 0..10_000 {
            let x: Vec<f64> = self
                .intervals
                .iter()
                .map(|iv| {
                    let w = iv.width();
                    if w == 0.0 {
                        iv.lo
                    } else {
                        iv.lo + w * (margin + fraction * rng.random::<f64>())
                    }
                })
                .collect();
            if self.constraints.iter().all(|c| c.value(&x) >= 0.0) {
                return x;
            }
        }
        self.center()
    }
}

/// Per-coordinate bound overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordBound {
    pub index: usize,
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default)]
    pub lo_open: bool,
    #[serde(default)]
    pub hi_open: bool,
}

/// Equality pin `x[index] = value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordPin {
    pub index: usize,
    pub value: f64,
}

/// Sub-box of the state domain on which sign conditions are evaluated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Restriction {
    #[serde(default)]
    pub bounds: Vec<CoordBound>,
    #[serde(default)]
    pub pins: Vec<CoordPin>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn notch_like() -> Domain {
        Domain::from_box(vec![Interval::closed(0.0, 1.0); 3]).with_constraint(vec![-1.0, 0.0, 1.0])
    }

    #[test]
    fn samples_respect_constraints_and_include_corners() {
        let d = notch_like();
        let pts = d.sample(200, 7);
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|p| d.contains(p, 0.0)));
        assert!(pts.contains(&vec![0.0, 0.0, 0.0]));
        assert!(!pts.contains(&vec![1.0, 0.0, 0.0]));
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = notch_like();
        assert_eq!(d.sample(64, 3), d.sample(64, 3));
        assert_ne!(d.sample(64, 3), d.sample(64, 4));
    }

    #[test]
    fn restriction_pins_and_open_bounds() {
        let r = Restriction {
            bounds: vec![CoordBound {
                index: 0,
                lo: Some(0.0),
                hi: None,
                lo_open: true,
                hi_open: false,
            }],
            pins: vec![CoordPin { index: 2, value: 1.0 }],
        };
        let d = notch_like().restrict(&r).unwrap();
        assert!(d.intervals[2].is_pinned());
        let pts = d.sample(50, 1);
        assert!(pts.iter().all(|p| p[0] > 0.0 && p[2] == 1.0));
        let bad = Restriction {
            bounds: vec![],
            pins: vec![CoordPin { index: 5, value: 0.0 }],
        };
        assert!(notch_like().restrict(&bad).is_err());
    }

    #[test]
    fn central_sampling_stays_inside() {
        let d = notch_like();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = d.sample_central(&mut rng, 0.8);
            assert!(d.contains(&x, 0.0));
            assert!(x.iter().all(|&v| (0.1..=0.9).contains(&v)));
        }
    }

    #[test]
    fn product_pads_constraints() {
        let p = notch_like().product(&Domain::from_box(vec![Interval::closed(0.0, 2.0)]));
        assert_eq!(p.dim(), 4);
        assert_eq!(p.constraints[0].coeffs, vec![-1.0, 0.0, 1.0, 0.0]);
    }
}
