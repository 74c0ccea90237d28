use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Bipartition;
use crate::linalg;
use crate::model::Linearization;

/// Largest `N * n` for which dense network Jacobians are assembled.
pub const MAX_DENSE_DIM: usize = 10_000;

/// Eigenvalues of `P` above this count as positive in the block reduction.
const POSITIVE_EIG_TOL: f64 = 1e-9;

fn guard(dim: usize) -> Result<()> {
    if dim > MAX_DENSE_DIM {
        Err(Error::MemoryGuard(dim))
    } else {
        Ok(())
    }
}

fn check_square(name: &str, m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {}x{}, expected {n}x{n}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `I_N ⊗ A + P ⊗ (BC)`, the Jacobian of the network at a homogeneous
/// steady state with cell-major state ordering.
pub fn assemble_homogeneous_jacobian(
    p: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (big_n, n) = (p.nrows(), a.nrows());
    check_square("P", p, big_n)?;
    check_square("A", a, n)?;
    guard(big_n * n)?;
    let bc = b * c;
    check_square("BC", &bc, n)?;
    Ok(linalg::kron(&DMatrix::identity(big_n, big_n), a) + linalg::kron(p, &bc))
}

/// The checkerboard Jacobian
///
/// ```text
/// [ I ⊗ A1        P12 ⊗ B1 C2 ]
/// [ P21 ⊗ B2 C1   I ⊗ A2      ]
/// ```
///
/// with nodes reordered as `set_i` then `set_i_prime`; `lin1` is the
/// linearization at `S(u1)` (cells of `set_i`), `lin2` at `S(u2)`.
pub fn assemble_checkerboard_jacobian(
    p: &DMatrix<f64>,
    bipartition: &Bipartition,
    lin1: &Linearization,
    lin2: &Linearization,
) -> Result<DMatrix<f64>> {
    let big_n = p.nrows();
    check_square("P", p, big_n)?;
    let n = lin1.a.nrows();
    check_square("A2", &lin2.a, n)?;
    guard(big_n * n)?;
    let (i_set, ip_set) = (&bipartition.set_i, &bipartition.set_i_prime);
    if i_set.len() + ip_set.len() != big_n {
        return Err(Error::DimensionMismatch("bipartition does not cover the graph".into()));
    }
    let p12 = DMatrix::from_fn(i_set.len(), ip_set.len(), |r, c| p[(i_set[r], ip_set[c])]);
    let p21 = DMatrix::from_fn(ip_set.len(), i_set.len(), |r, c| p[(ip_set[r], i_set[c])]);
    let b1c2 = &lin1.b * &lin2.c;
    let b2c1 = &lin2.b * &lin1.c;
    let n1 = i_set.len() * n;
    let mut j = DMatrix::zeros(big_n * n, big_n * n);
    j.view_mut((0, 0), (n1, n1))
        .copy_from(&linalg::kron(&DMatrix::identity(i_set.len(), i_set.len()), &lin1.a));
    j.view_mut((0, n1), (n1, big_n * n - n1)).copy_from(&linalg::kron(&p12, &b1c2));
    j.view_mut((n1, 0), (big_n * n - n1, n1)).copy_from(&linalg::kron(&p21, &b2c1));
    j.view_mut((n1, n1), (big_n * n - n1, big_n * n - n1))
        .copy_from(&linalg::kron(&DMatrix::identity(ip_set.len(), ip_set.len()), &lin2.a));
    Ok(j)
}

/// Eigenvalues predicted by the block reduction of the checkerboard
/// Jacobian: `eig([[A1, λ B1 C2], [λ B2 C1, A2]])` for every positive
/// eigenvalue `λ` of `P`, plus `|I| - r` copies of `eig(A1)` and
/// `|I'| - r` copies of `eig(A2)`, with `r` the number of positive
/// eigenvalues.
pub fn checkerboard_block_union(
    eigenvalues: &[f64],
    bipartition: &Bipartition,
    lin1: &Linearization,
    lin2: &Linearization,
) -> Result<Vec<Complex<f64>>> {
    let positive: Vec<f64> = eigenvalues.iter().copied().filter(|&l| l > POSITIVE_EIG_TOL).collect();
    let r = positive.len();
    let (n3, n4) = (
        bipartition.set_i.len().checked_sub(r),
        bipartition.set_i_prime.len().checked_sub(r),
    );
    let (Some(n3), Some(n4)) = (n3, n4) else {
        return Err(Error::DimensionMismatch(
            "more positive eigenvalues than nodes in a bipartition side".into(),
        ));
    };
    let mut out = Vec::new();
    for &l in &positive {
        out.extend(linalg::eigenvalues(&checkerboard_block(l, lin1, lin2))?);
    }
    let eig_a1 = linalg::eigenvalues(&lin1.a)?;
    let eig_a2 = linalg::eigenvalues(&lin2.a)?;
    for _ in 0..n3 {
        out.extend_from_slice(&eig_a1);
    }
    for _ in 0..n4 {
        out.extend_from_slice(&eig_a2);
    }
    Ok(out)
}

/// `[[A1, λ B1 C2], [λ B2 C1, A2]]`.
pub(super) fn checkerboard_block(lambda: f64, lin1: &Linearization, lin2: &Linearization) -> DMatrix<f64> {
    let n = lin1.a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&lin1.a);
    m.view_mut((0, n), (n, n)).copy_from(&(&lin1.b * &lin2.c * lambda));
    m.view_mut((n, 0), (n, n)).copy_from(&(&lin2.b * &lin1.c * lambda));
    m.view_mut((n, n), (n, n)).copy_from(&lin2.a);
    m
}

/// Compares the dc-gain test `-(I + C A^{-1} B)` with the closed loop
/// `A + BC` of a linear system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositiveFeedbackCheck {
    /// Max real part of `eig(-(I + C A^{-1} B))`.
    pub dc_abscissa: f64,
    /// Max real part of `eig(A + BC)`.
    pub closed_loop_abscissa: f64,
}

impl PositiveFeedbackCheck {
    pub fn dc_hurwitz(&self) -> bool {
        self.dc_abscissa < 0.0
    }

    pub fn closed_loop_hurwitz(&self) -> bool {
        self.closed_loop_abscissa < 0.0
    }

    /// Both implications: dc Hurwitz implies closed loop Hurwitz, and a
    /// dc eigenvalue in the open right half-plane implies one for `A + BC`.
    pub fn consistent(&self) -> bool {
        let forward = !self.dc_hurwitz() || self.closed_loop_hurwitz();
        let backward = self.dc_abscissa <= 0.0 || self.closed_loop_abscissa > 0.0;
        forward && backward
    }
}

pub fn positive_feedback_check(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
) -> Result<PositiveFeedbackCheck> {
    let m = c.nrows();
    let ainv_b = linalg::solve(a, b).ok_or(Error::SingularA { det: a.determinant() })?;
    let dc = -(DMatrix::identity(m, m) + c * ainv_b);
    Ok(PositiveFeedbackCheck {
        dc_abscissa: linalg::spectral_abscissa(&dc)?,
        closed_loop_abscissa: linalg::spectral_abscissa(&(a + b * c))?,
    })
}
