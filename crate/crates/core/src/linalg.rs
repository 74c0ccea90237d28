//! Dense linear-algebra helpers shared by the analysis and graph modules.

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

/// All eigenvalues of a general square matrix, via a real Schur decomposition.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenSolverFailure("non-finite matrix entry".into()));
    }
    let schur = Schur::try_new(m.clone(), EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::EigenSolverFailure("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues sorted descending.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::try_new(m.clone(), EIG_EPS, EIG_MAX_ITER).ok_or_else(|| {
        Error::EigenSolverFailure("symmetric QR iteration did not converge".into())
    })?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

pub fn max_real_part(eigs: &[Complex<f64>]) -> f64 {
    eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Largest eigenvalue real part of `m`.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> Result<f64> {
    Ok(max_real_part(&eigenvalues(m)?))
}

pub fn is_hurwitz(m: &DMatrix<f64>) -> Result<bool> {
    Ok(spectral_abscissa(m)? < 0.0)
}

/// Spectral radius `max |eig(m)|`.
///
/// Entrywise-nonnegative matrices go through power iteration on `m + I`
/// (the shift keeps the Perron root dominant even for periodic matrices);
/// anything else, or a power iteration that stalls, falls back to the
/// dense eigen-solver.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("spectral radius of a non-square matrix".into()));
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    if m.iter().all(|&v| v >= 0.0) {
        if let Some(r) = perron_root(m) {
            return Ok(r);
        }
    }
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn perron_root(m: &DMatrix<f64>) -> Option<f64> {
    let n = m.nrows();
    let shifted = m + DMatrix::<f64>::identity(n, n);
    let mut v = nalgebra::DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut estimate = 0.0;
    for _ in 0..5000 {
        let w = &shifted * &v;
        let norm = w.norm();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        let next = w / norm;
        // Rayleigh-type estimate of the shifted Perron root
        let lambda = next.dot(&(&shifted * &next)) / next.dot(&next);
        let change = (&next - &v).amax();
        v = next;
        if (lambda - estimate).abs() <= 1e-14 * lambda.abs().max(1.0) && change < 1e-12 {
            let r = lambda - 1.0;
            // residual check guards against a non-dominant fixed direction
            let resid = (&shifted * &v - &v * lambda).amax();
            return (resid < 1e-10 * lambda.abs().max(1.0)).then_some(r.max(0.0));
        }
        estimate = lambda;
    }
    None
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Sorts complex numbers by (real, imaginary).
pub fn sort_complex(values: &mut [Complex<f64>]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Largest distance in a greedy nearest-neighbour matching of two
/// equal-sized multisets; `None` when the sizes differ.
pub fn multiset_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut a = a.to_vec();
    sort_complex(&mut a);
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for z in &a {
        let (idx, dist) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        used[idx] = true;
        worst = worst.max(dist);
    }
    Some(worst)
}

/// Solves `a x = b` by LU; `None` if `a` is singular.
pub fn solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    a.clone().lu().solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_radius_trivial_cases() {
        assert_eq!(spectral_radius(&DMatrix::from_element(1, 1, 0.0)).unwrap(), 0.0);
        let perm = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((spectral_radius(&perm).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_general_matrix_uses_dense_path() {
        // rotation by 90 degrees scaled by 2: eigenvalues ±2i
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        assert!((spectral_radius(&m).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_matches_dense() {
        let m = DMatrix::from_row_slice(3, 3, &[0.1, 2.0, 0.0, 0.5, 0.0, 1.5, 0.3, 0.2, 0.0]);
        let dense = eigenvalues(&m).unwrap().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((spectral_radius(&m).unwrap() - dense).abs() < 1e-10);
    }

    #[test]
    fn multiset_distance_handles_permutations() {
        let a = [Complex::new(1.0, 0.0), Complex::new(-1.0, 2.0), Complex::new(-1.0, -2.0)];
        let b = [Complex::new(-1.0, -2.0), Complex::new(1.0, 1e-9), Complex::new(-1.0, 2.0)];
        assert!(multiset_distance(&a, &b).unwrap() < 1e-8);
        assert!(multiset_distance(&a, &b[..2]).is_none());
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let m = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(matches!(eigenvalues(&m), Err(Error::EigenSolverFailure(_))));
    }
}
