use nalgebra::{DMatrix, DVector};

use super::Tolerances;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{Characteristic, Linearization};

/// Homogeneous steady state `x^i = x*`, `u* = T(u*)`, with the Jacobians
/// `A, B, C` at `(x*, u*)` and `ρ(T'(u*))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousState {
    pub u_star: Vec<f64>,
    pub x_star: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub t_prime: DMatrix<f64>,
    pub rho: f64,
}

impl HomogeneousState {
    pub fn linearization(&self) -> Linearization {
        Linearization {
            u: self.u_star.clone(),
            x: self.x_star.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
        }
    }

    fn from_linearization(lin: Linearization) -> Result<Self> {
        let t_prime = lin.dc_gain()?;
        let rho = signed_spectral_radius(&t_prime)?;
        Ok(Self {
            u_star: lin.u,
            x_star: lin.x,
            a: lin.a,
            b: lin.b,
            c: lin.c,
            t_prime,
            rho,
        })
    }
}

/// Solves `u* = T(u*)`.
///
/// Scalar characteristics use bisection on `T(u) - u` over `[0, T(0)]`,
/// which brackets the unique root whenever `T` is nonincreasing.
/// Multi-input characteristics use the damped iteration
/// `u <- (u + T(u)) / 2` from `T(0)/2` followed by a Newton polish;
/// there existence and uniqueness are not guaranteed and failure is
/// reported with the iterate trace.
pub fn find_homogeneous_fixed_point(c: &Characteristic<'_>, tol: &Tolerances) -> Result<HomogeneousState> {
    let u_star = if c.io_dim() == 1 {
        scalar_fixed_point(c, tol)?
    } else {
        vector_fixed_point(c, tol)?
    };
    HomogeneousState::from_linearization(c.linearize(&u_star)?)
}

fn scalar_fixed_point(c: &Characteristic<'_>, tol: &Tolerances) -> Result<Vec<f64>> {
    let t = |u: f64| -> Result<f64> { Ok(c.t(&[u])?[0]) };
    let phi = |u: f64| -> Result<f64> { Ok(t(u)? - u) };
    let hi0 = t(0.0)?;
    if hi0 <= 0.0 {
        return Ok(vec![0.0]);
    }
    let phi_hi = phi(hi0)?;
    if phi_hi == 0.0 {
        return Ok(vec![hi0]);
    }
    if phi_hi > 0.0 {
        return Err(Error::NoBracket);
    }
    let (mut lo, mut hi) = (0.0f64, hi0);
    let mut best = (f64::INFINITY, 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = phi(mid)?;
        if p.abs() < best.0 {
            best = (p.abs(), mid);
        }
        if p == 0.0 {
            break;
        }
        if p > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.0 <= tol.fp_tol {
        Ok(vec![best.1])
    } else {
        Err(Error::NoConvergence {
            what: "fixed-point bisection".into(),
            residual: best.0,
        })
    }
}

fn vector_fixed_point(c: &Characteristic<'_>, tol: &Tolerances) -> Result<Vec<f64>> {
    const ALPHA: f64 = 0.5;
    const MAX_ITER: usize = 2000;
    const TRACE_LEN: usize = 20;
    let m = c.io_dim();
    let mut u: Vec<f64> = c.t(&vec![0.0; m])?.iter().map(|v| 0.5 * v).collect();
    let mut trace = Vec::new();
    let mut res = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        let tu = c.t(&u)?;
        res = max_abs_diff(&tu, &u);
        if trace.len() == TRACE_LEN {
            trace.remove(0);
        }
        trace.push(u.clone());
        if res <= 1e-8 {
            break;
        }
        for (ui, ti) in u.iter_mut().zip(&tu) {
            *ui = (1.0 - ALPHA) * *ui + ALPHA * ti;
        }
    }
    // Newton on G(u) = T(u) - u, G' = T'(u) - I
    for _ in 0..50 {
        if res <= tol.fp_tol {
            return Ok(u);
        }
        let tu = c.t(&u)?;
        let g = DVector::from_iterator(m, tu.iter().zip(&u).map(|(t, x)| t - x));
        let jac = c.t_prime(&u)? - DMatrix::identity(m, m);
        let Some(step) = jac.lu().solve(&g) else { break };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(x, s)| x - alpha * s).collect();
            if let Ok(tt) = c.t(&trial) {
                let r = max_abs_diff(&tt, &trial);
                if r < res {
                    u = trial;
                    res = r;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if res <= tol.fp_tol {
        Ok(u)
    } else {
        Err(Error::MultiInputNoConvergence {
            iterations,
            residual: res,
            trace,
        })
    }
}

/// `ρ(M)`; nonpositive `M` goes through the Perron path on `-M`.
pub(super) fn signed_spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().all(|&v| v <= 0.0) {
        linalg::spectral_radius(&-m)
    } else {
        linalg::spectral_radius(m)
    }
}

pub(super) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cascade, HillParams, NotchMimo, Stage};

    #[test]
    fn golden_ratio_fixed_point() {
        // T(u) = 1/(1+u): single stage, inhibiting Hill with p = 1
        let m = Cascade::new(vec![1.0], vec![Stage::Hill(HillParams::inhibiting(1.0, 1.0, 1.0).unwrap())]).unwrap();
        let hs = find_homogeneous_fixed_point(&Characteristic::new(&m), &Tolerances::default()).unwrap();
        assert!((hs.u_star[0] - 0.6180339887498949).abs() < 1e-9);
        // T'(u*) = -1/(1+u*)^2 = -u*^2
        assert!((hs.rho - 0.3819660112501051).abs() < 1e-9);
    }

    #[test]
    fn constant_characteristic() {
        let m = Cascade::new(vec![1.0], vec![Stage::Constant { value: 2.5 }]).unwrap();
        let hs = find_homogeneous_fixed_point(&Characteristic::new(&m), &Tolerances::default()).unwrap();
        assert_eq!(hs.u_star, vec![2.5]);
        assert_eq!(hs.rho, 0.0);
    }

    #[test]
    fn increasing_characteristic_has_no_bracket() {
        // two inhibiting stages: T(0) = 1, T(1) = 1.6
        let m = Cascade::new(
            vec![1.0, 1.0],
            vec![
                Stage::Hill(HillParams::inhibiting(2.0, 1.0, 2.0).unwrap()),
                Stage::Hill(HillParams::inhibiting(1.0, 1.0, 2.0).unwrap()),
            ],
        )
        .unwrap();
        let err = find_homogeneous_fixed_point(&Characteristic::new(&m), &Tolerances::default());
        assert_eq!(err.unwrap_err(), Error::NoBracket);
    }

    #[test]
    fn notch_fixed_point_is_consistent() {
        let m = NotchMimo::new(1.0, 1.0, 1.0, HillParams::inhibiting(10.0, 0.3, 4.0).unwrap()).unwrap();
        let c = Characteristic::new(&m);
        let hs = find_homogeneous_fixed_point(&c, &Tolerances::default()).unwrap();
        let tu = c.t(&hs.u_star).unwrap();
        assert!(max_abs_diff(&tu, &hs.u_star) <= 1e-10);
        assert!(hs.t_prime.iter().all(|&v| v <= 1e-12));
        assert!(hs.rho > 1.0);
    }
}
