use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::fixed_point::HomogeneousState;
use super::jacobian::{assemble_checkerboard_jacobian, assemble_homogeneous_jacobian, checkerboard_block, checkerboard_block_union, MAX_DENSE_DIM};
use super::orbit::PeriodTwoOrbit;
use super::Tolerances;
use crate::error::Result;
use crate::graph::{Bipartition, RandomWalkSpectrum};
use crate::linalg;

/// Eigenvalues of `P` above this count as positive for the checkerboard blocks.
const POSITIVE_EIG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    /// A sufficient criterion failed; nothing follows from it.
    CriterionNotMet,
    /// Within `margin_tol` of the threshold, or numerically undecided.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex<f64>> for ComplexValue {
    fn from(z: Complex<f64>) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Eigenvalues of one mode block: `A + λ BC` for the homogeneous state,
/// `[[A1, λ B1 C2], [λ B2 C1, A2]]` for a checkerboard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEigenvalues {
    pub lambda: f64,
    pub eigenvalues: Vec<ComplexValue>,
    pub max_real: f64,
}

impl ModeEigenvalues {
    fn new(lambda: f64, mut eigs: Vec<Complex<f64>>) -> Self {
        linalg::sort_complex(&mut eigs);
        Self {
            lambda,
            max_real: linalg::max_real_part(&eigs),
            eigenvalues: eigs.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub criterion: f64,
    pub threshold: f64,
    /// Verdict of the sufficient criterion alone.
    pub verdict: Verdict,
    /// Signed distance to the threshold, positive when the criterion holds.
    pub margin: f64,
    /// Verdict from the mode eigenvalue table.
    pub numerical_verdict: Verdict,
    pub modes: Vec<ModeEigenvalues>,
    /// Multiset distance between the full-Jacobian spectrum and the mode
    /// union; `None` above the dense-assembly limit.
    pub full_jacobian_distance: Option<f64>,
}

/// Verdict of the homogeneous instability criterion `λ_N ρ < -1`.
pub fn classify_instability(lambda_n: f64, rho: f64, margin_tol: f64) -> (Verdict, f64) {
    let margin = -1.0 - lambda_n * rho;
    let verdict = if margin.abs() < margin_tol {
        Verdict::Inconclusive
    } else if margin > 0.0 {
        Verdict::Unstable
    } else {
        Verdict::CriterionNotMet
    };
    (verdict, margin)
}

/// Verdict of the checkerboard criterion `ρ(T'(u1) T'(u2)) < 1`.
pub fn classify_checkerboard(rho_product: f64, margin_tol: f64) -> (Verdict, f64) {
    let margin = 1.0 - rho_product;
    let verdict = if margin.abs() < margin_tol {
        Verdict::Inconclusive
    } else if margin > 0.0 {
        Verdict::Stable
    } else {
        Verdict::CriterionNotMet
    };
    (verdict, margin)
}

fn numerical(max_real: f64, stab_tol: f64) -> Verdict {
    if max_real > stab_tol {
        Verdict::Unstable
    } else if max_real < -stab_tol {
        Verdict::Stable
    } else {
        Verdict::Inconclusive
    }
}

/// `eig(A + λ_k BC)` for every eigenvalue `λ_k` of `P`, in spectrum order.
pub fn mode_eigenvalues(hs: &HomogeneousState, spectrum: &RandomWalkSpectrum) -> Result<Vec<ModeEigenvalues>> {
    let bc = &hs.b * &hs.c;
    spectrum
        .eigenvalues
        .iter()
        .map(|&l| Ok(ModeEigenvalues::new(l, linalg::eigenvalues(&(&hs.a + &bc * l))?)))
        .collect()
}

/// Homogeneous instability test, with the per-mode table deciding
/// numerically when the criterion is not met.
pub fn instability_test(spectrum: &RandomWalkSpectrum, hs: &HomogeneousState, tol: &Tolerances) -> Result<StabilityVerdict> {
    let lambda_n = spectrum.lambda_min();
    let (verdict, margin) = classify_instability(lambda_n, hs.rho, tol.margin_tol);
    let modes = mode_eigenvalues(hs, spectrum)?;
    let max_real = modes.iter().map(|m| m.max_real).fold(f64::NEG_INFINITY, f64::max);
    let full_jacobian_distance = if spectrum.eigenvalues.len() * hs.a.nrows() <= MAX_DENSE_DIM {
        let j = assemble_homogeneous_jacobian(&spectrum.p, &hs.a, &hs.b, &hs.c)?;
        let full = linalg::eigenvalues(&j)?;
        let union: Vec<Complex<f64>> = modes
            .iter()
            .flat_map(|m| m.eigenvalues.iter().map(|z| Complex::new(z.re, z.im)))
            .collect();
        linalg::multiset_distance(&full, &union)
    } else {
        None
    };
    Ok(StabilityVerdict {
        criterion: lambda_n * hs.rho,
        threshold: -1.0,
        verdict,
        margin,
        numerical_verdict: numerical(max_real, tol.stab_tol),
        modes,
        full_jacobian_distance,
    })
}

/// Checkerboard stability test. The mode table holds one block per
/// positive eigenvalue of `P`; the numerical verdict also accounts for
/// `eig(A1)` and `eig(A2)`.
pub fn checkerboard_stability_test(
    orbit: &PeriodTwoOrbit,
    spectrum: &RandomWalkSpectrum,
    bipartition: &Bipartition,
    tol: &Tolerances,
) -> Result<StabilityVerdict> {
    let (verdict, margin) = classify_checkerboard(orbit.rho_product, tol.margin_tol);
    let mut modes = Vec::new();
    for &l in spectrum.eigenvalues.iter().filter(|&&l| l > POSITIVE_EIG_TOL) {
        modes.push(ModeEigenvalues::new(
            l,
            linalg::eigenvalues(&checkerboard_block(l, &orbit.lin1, &orbit.lin2))?,
        ));
    }
    let max_real = modes
        .iter()
        .map(|m| m.max_real)
        .chain([
            linalg::spectral_abscissa(&orbit.lin1.a)?,
            linalg::spectral_abscissa(&orbit.lin2.a)?,
        ])
        .fold(f64::NEG_INFINITY, f64::max);
    let full_jacobian_distance = if spectrum.eigenvalues.len() * orbit.lin1.a.nrows() <= MAX_DENSE_DIM {
        let j = assemble_checkerboard_jacobian(&spectrum.p, bipartition, &orbit.lin1, &orbit.lin2)?;
        let full = linalg::eigenvalues(&j)?;
        let union = checkerboard_block_union(&spectrum.eigenvalues, bipartition, &orbit.lin1, &orbit.lin2)?;
        linalg::multiset_distance(&full, &union)
    } else {
        None
    };
    Ok(StabilityVerdict {
        criterion: orbit.rho_product,
        threshold: 1.0,
        verdict,
        margin,
        numerical_verdict: numerical(max_real, tol.stab_tol),
        modes,
        full_jacobian_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{build_checkerboard, find_homogeneous_fixed_point, find_period_two};
    use crate::graph::ContactGraph;
    use crate::model::{Cascade, Characteristic, HillParams, Stage};

    fn cascade(a: f64) -> Cascade {
        Cascade::new(
            vec![1.0, 1.0],
            vec![
                Stage::Hill(HillParams::inhibiting(a, 1.0, 2.0).unwrap()),
                Stage::Linear { slope: 1.0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn criterion_arithmetic() {
        let (v, margin) = classify_instability(-1.0, 2.0, 1e-9);
        assert_eq!(v, Verdict::Unstable);
        assert_eq!(margin, 1.0);
        assert_eq!(classify_instability(-0.5, 1.5, 1e-9).0, Verdict::CriterionNotMet);
        assert_eq!(classify_instability(-1.0, 1.0, 1e-9).0, Verdict::Inconclusive);
        assert_eq!(classify_checkerboard(0.0, 1e-9).0, Verdict::Stable);
        assert_eq!(classify_checkerboard(1.0, 1e-9).0, Verdict::Inconclusive);
    }

    #[test]
    fn cycle4_cascade_is_unstable() {
        let m = cascade(9.0);
        let c = Characteristic::new(&m);
        let tol = Tolerances::default();
        let hs = find_homogeneous_fixed_point(&c, &tol).unwrap();
        let g = ContactGraph::cycle(4).unwrap();
        let spec = g.spectrum().unwrap();
        let v = instability_test(&spec, &hs, &tol).unwrap();
        assert_eq!(v.verdict, Verdict::Unstable);
        assert_eq!(v.numerical_verdict, Verdict::Unstable);
        assert!(v.modes.last().unwrap().max_real > 0.0);
        // A is a Jordan block here, so eigenvalues are only accurate to ~sqrt(eps)
        assert!(v.full_jacobian_distance.unwrap() < 1e-6, "{:?}", v.full_jacobian_distance);

        let o = find_period_two(&c, &tol).unwrap().unwrap();
        let bp = build_checkerboard(&g, &o, &c).unwrap().bipartition;
        let cv = checkerboard_stability_test(&o, &spec, &bp, &tol).unwrap();
        assert_eq!(cv.verdict, Verdict::Stable);
        assert_eq!(cv.numerical_verdict, Verdict::Stable);
        assert!(cv.full_jacobian_distance.unwrap() < 1e-6, "{:?}", cv.full_jacobian_distance);
    }

    #[test]
    fn triangle_criterion_not_met_in_weak_regime() {
        let m = cascade(1.0);
        let c = Characteristic::new(&m);
        let tol = Tolerances::default();
        let hs = find_homogeneous_fixed_point(&c, &tol).unwrap();
        let spec = ContactGraph::cycle(3).unwrap().spectrum().unwrap();
        let v = instability_test(&spec, &hs, &tol).unwrap();
        assert_eq!(v.verdict, Verdict::CriterionNotMet);
        assert_eq!(v.numerical_verdict, Verdict::Stable);
    }
}
