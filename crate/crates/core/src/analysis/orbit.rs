use nalgebra::{DMatrix, DVector};

use super::fixed_point::{max_abs_diff, signed_spectral_radius};
use super::Tolerances;
use crate::error::{Error, Result};
use crate::graph::{Bipartition, ContactGraph};
use crate::model::{Characteristic, Linearization};
use crate::sim::Network;

/// Grid size for the scan of `T(T(u)) - u`.
const SCAN_POINTS: usize = 512;

/// A period-two orbit `u1 = T(u2)`, `u2 = T(u1)` of the characteristic.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodTwoOrbit {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub t_prime1: DMatrix<f64>,
    pub t_prime2: DMatrix<f64>,
    /// `ρ(T'(u1) T'(u2))`.
    pub rho_product: f64,
    pub lin1: Linearization,
    pub lin2: Linearization,
    /// `max(|T(u1) - u2|, |T(u2) - u1|)`.
    pub residual: f64,
}

impl PeriodTwoOrbit {
    /// The same orbit with the roles of `u1` and `u2` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            u1: self.u2.clone(),
            u2: self.u1.clone(),
            x1: self.x2.clone(),
            x2: self.x1.clone(),
            t_prime1: self.t_prime2.clone(),
            t_prime2: self.t_prime1.clone(),
            rho_product: self.rho_product,
            lin1: self.lin2.clone(),
            lin2: self.lin1.clone(),
            residual: self.residual,
        }
    }
}

/// Checks a candidate pair and builds the orbit: residuals within
/// `fp_tol`, separation above `separation_tol`, Hurwitz `A` at both points.
pub fn verify_period_two(c: &Characteristic<'_>, u1: &[f64], u2: &[f64], tol: &Tolerances) -> Result<PeriodTwoOrbit> {
    let sep = max_abs_diff(u1, u2);
    if sep <= tol.separation_tol {
        return Err(Error::InvalidOrbit(format!(
            "points are not separated (|u1 - u2| = {sep:e})"
        )));
    }
    let lin1 = c.linearize(u1)?;
    let lin2 = c.linearize(u2)?;
    let y1 = c.model().eval_output(&lin1.x);
    let y2 = c.model().eval_output(&lin2.x);
    let residual = max_abs_diff(&y1, u2).max(max_abs_diff(&y2, u1));
    if residual > tol.fp_tol {
        return Err(Error::InvalidOrbit(format!("residual {residual:e} exceeds fp_tol")));
    }
    let t_prime1 = lin1.dc_gain()?;
    let t_prime2 = lin2.dc_gain()?;
    let rho_product = signed_product_radius(&t_prime1, &t_prime2)?;
    Ok(PeriodTwoOrbit {
        u1: u1.to_vec(),
        u2: u2.to_vec(),
        x1: lin1.x.clone(),
        x2: lin2.x.clone(),
        t_prime1,
        t_prime2,
        rho_product,
        lin1,
        lin2,
        residual,
    })
}

fn signed_product_radius(t1: &DMatrix<f64>, t2: &DMatrix<f64>) -> Result<f64> {
    // product of two nonpositive matrices is nonnegative
    signed_spectral_radius(&(t1 * t2))
}

/// Newton refinement of a candidate `(u1, u2)` on
/// `G(u1, u2) = (T(u2) - u1, T(u1) - u2)`, then verification.
pub fn refine_period_two(c: &Characteristic<'_>, u1: &[f64], u2: &[f64], tol: &Tolerances) -> Result<PeriodTwoOrbit> {
    let m = c.io_dim();
    if u1.len() != m || u2.len() != m {
        return Err(Error::DimensionMismatch("orbit candidate has wrong input dimension".into()));
    }
    let residual = |a: &[f64], b: &[f64]| -> Result<(Vec<f64>, f64)> {
        let (ta, tb) = (c.t(a)?, c.t(b)?);
        let g: Vec<f64> = tb.iter().zip(a).map(|(t, x)| t - x).chain(ta.iter().zip(b).map(|(t, x)| t - x)).collect();
        let r = g.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        Ok((g, r))
    };
    let (mut a, mut b) = (u1.to_vec(), u2.to_vec());
    let (mut g, mut res) = residual(&a, &b)?;
    for _ in 0..60 {
        if res <= 0.1 * tol.fp_tol {
            break;
        }
        let (ta, tb) = (c.t_prime(&a)?, c.t_prime(&b)?);
        let mut jac = -DMatrix::identity(2 * m, 2 * m);
        jac.view_mut((0, m), (m, m)).copy_from(&tb);
        jac.view_mut((m, 0), (m, m)).copy_from(&ta);
        let Some(step) = jac.lu().solve(&DVector::from_vec(g.clone())) else {
            break;
        };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let na: Vec<f64> = a.iter().zip(step.iter()).map(|(x, s)| x - alpha * s).collect();
            let nb: Vec<f64> = b.iter().zip(step.iter().skip(m)).map(|(x, s)| x - alpha * s).collect();
            if let Ok((ng, nr)) = residual(&na, &nb) {
                if nr < res {
                    (a, b, g, res) = (na, nb, ng, nr);
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
    verify_period_two(c, &a, &b, tol)
}

/// Searches a scalar characteristic for period-two orbits.
///
/// Scans `ψ(u) = T(T(u)) - u` on a uniform grid over `[0, T(0)]`, bisects
/// every sign change, discards roots that are fixed points of `T`, and
/// returns the orbit minimising `T'(u1) T'(u2)` with `u1 < u2`.
pub fn find_period_two(c: &Characteristic<'_>, tol: &Tolerances) -> Result<Option<PeriodTwoOrbit>> {
    if c.io_dim() != 1 {
        return Err(Error::ScalarOnly(c.io_dim()));
    }
    let t = |u: f64| -> Result<f64> { Ok(c.t(&[u])?[0]) };
    let psi = |u: f64| -> Result<f64> { Ok(t(t(u)?)? - u) };
    let hi = t(0.0)?;
    if hi <= 0.0 {
        return Ok(None);
    }
    let grid: Vec<f64> = (0..=SCAN_POINTS).map(|i| hi * i as f64 / SCAN_POINTS as f64).collect();
    let values = grid.iter().map(|&u| psi(u)).collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for i in 0..SCAN_POINTS {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            roots.push(grid[i]);
        } else if a * b < 0.0 {
            roots.push(bisect(&psi, grid[i], grid[i + 1], a)?);
        }
    }
    if values[SCAN_POINTS] == 0.0 {
        roots.push(grid[SCAN_POINTS]);
    }
    let mut best: Option<PeriodTwoOrbit> = None;
    for r in roots {
        let tr = t(r)?;
        if (tr - r).abs() <= tol.separation_tol || r > tr {
            continue;
        }
        let orbit = match verify_period_two(c, &[r], &[tr], tol) {
            Ok(o) => o,
            Err(Error::InvalidOrbit(_)) => match refine_period_two(c, &[r], &[tr], tol) {
                Ok(o) => o,
                Err(Error::InvalidOrbit(_)) => continue,
                Err(e) => return Err(e),
            },
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|b| orbit.rho_product < b.rho_product) {
            best = Some(orbit);
        }
    }
    Ok(best)
}

fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, f_lo: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let lo_positive = f_lo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (vl, vh) = (f(lo)?.abs(), f(hi)?.abs());
    Ok(if vl <= vh { lo } else { hi })
}

/// The two checkerboard steady states induced by a period-two orbit on a
/// bipartite graph, as flat cell-major network states.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkerboards {
    pub bipartition: Bipartition,
    /// `S(u1)` on `set_i`, `S(u2)` on `set_i_prime`.
    pub on_off: Vec<f64>,
    /// The swapped assignment.
    pub off_on: Vec<f64>,
    /// `||F(X)||_∞` of each state.
    pub residual_on_off: f64,
    pub residual_off_on: f64,
}

pub fn build_checkerboard(graph: &ContactGraph, orbit: &PeriodTwoOrbit, c: &Characteristic<'_>) -> Result<Checkerboards> {
    let bipartition = graph.bipartition().ok_or(Error::NotBipartite)?;
    let net = Network::new(graph, c.model());
    let side = bipartition.membership(graph.node_count());
    let assemble = |first: &[f64], second: &[f64]| -> Vec<f64> {
        side.iter().flat_map(|&in_i| if in_i { first } else { second }).copied().collect()
    };
    let on_off = assemble(&orbit.x1, &orbit.x2);
    let off_on = assemble(&orbit.x2, &orbit.x1);
    Ok(Checkerboards {
        residual_on_off: net.residual(&on_off),
        residual_off_on: net.residual(&off_on),
        bipartition,
        on_off,
        off_on,
    })
}
