//! Matrix functions with pinned branch and tolerance behavior: numeric rank,
//! the principal unitary logarithm, the positive polar factor, and the
//! Hermitian exponential / square root used by the holonomy relation.

use super::decomp::{eig_hermitian, eig_unitary, svd};
use super::{CMatrix, Complex64, Tolerance};
use crate::error::{Error, Result};

/// Number of singular values above `rank_rel * sigma_max`. Zero matrix has
/// rank 0.
pub fn numeric_rank(m: &CMatrix, tol: &Tolerance) -> Result<usize> {
    Ok(numeric_rank_detailed(m, tol)?.0)
}

/// Rank plus the decision margin: the smallest accepted and largest rejected
/// singular values. `Err(RankAmbiguous)` when a singular value falls within a
/// factor of 10 of the cutoff on either side.
pub fn numeric_rank_detailed(m: &CMatrix, tol: &Tolerance) -> Result<(usize, f64, f64)> {
    m.check_finite()?;
    let d = svd(m);
    let smax = d.sigma_max();
    if smax == 0.0 {
        return Ok((0, f64::INFINITY, 0.0));
    }
    let cutoff = tol.rank_rel * smax;
    let rank = d.sigma.iter().filter(|&&s| s > cutoff).count();
    let smallest_kept = if rank > 0 {
        d.sigma[rank - 1]
    } else {
        f64::INFINITY
    };
    let largest_dropped = d.sigma.get(rank).copied().unwrap_or(0.0);
    for &s in &d.sigma {
        if s > cutoff / 10.0 && s <= cutoff * 10.0 {
            return Err(Error::RankAmbiguous { sigma: s, cutoff });
        }
    }
    Ok((rank, smallest_kept, largest_dropped))
}

/// Principal logarithm of a unitary matrix, in the convention
/// U = exp(2 pi i delta) with delta Hermitian and spec(delta) in (-1/2, 1/2).
///
/// Refuses eigenvalues at -1 (`BranchAmbiguous`): there the exponential is
/// not locally invertible and no principal choice exists.
pub fn principal_log_unitary(u: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    u.check_finite()?;
    if !u.is_square() {
        return Err(Error::InvalidMatrix(
            "principal_log_unitary: not square".into(),
        ));
    }
    let defect = u.orthonormality_defect();
    if defect > tol.residual_abs.max(1e-12) * 10.0 {
        return Err(Error::InvalidMatrix(format!(
            "principal_log_unitary: unitarity defect {defect:e}"
        )));
    }
    let (evals, q) = eig_unitary(u);
    let mut thetas = Vec::with_capacity(evals.len());
    for ev in &evals {
        if (ev + Complex64::new(1.0, 0.0)).norm() <= tol.residual_abs {
            return Err(Error::BranchAmbiguous {
                eigenvalue: format!("{ev}"),
                tol: tol.residual_abs,
            });
        }
        // arg in (-pi, pi] -> delta eigenvalue in (-1/2, 1/2].
        thetas.push(ev.arg() / (2.0 * std::f64::consts::PI));
    }
    let delta = q.matmul(&CMatrix::diag_real(&thetas)).matmul(&q.adjoint());
    Ok(delta.hermitian_part())
}

/// exp(2 pi i delta) for Hermitian delta.
pub fn exp_2pi_i_hermitian(delta: &CMatrix) -> CMatrix {
    let (lam, q) = eig_hermitian(delta);
    let phases: Vec<Complex64> = lam
        .iter()
        .map(|&x| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x))
        .collect();
    q.matmul(&CMatrix::diag(&phases)).matmul(&q.adjoint())
}

/// Square root of a positive semi-definite Hermitian matrix of unit scale
/// (every use here is a block of the form I/2 +- delta). Eigenvalues below
/// 1e-12 relative to max(1, ||a||) are clamped to exactly zero first: the
/// square root amplifies their roundoff to ~1e-8, right at the rank cutoff.
pub fn hermitian_sqrt_psd(a: &CMatrix) -> CMatrix {
    let (lam, q) = eig_hermitian(a);
    let scale = lam.iter().fold(1.0f64, |m, &x| m.max(x.abs()));
    let roots: Vec<f64> = lam
        .iter()
        .map(|&x| if x <= 1e-12 * scale { 0.0 } else { x.sqrt() })
        .collect();
    q.matmul(&CMatrix::diag_real(&roots))
        .matmul(&q.adjoint())
        .hermitian_part()
}

/// Positive Hermitian factor H = (M M*)^{1/2} of the left polar decomposition
/// M = H W, W unitary. Requires M invertible within the rank tolerance.
pub fn polar_positive_factor(m: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    m.check_finite()?;
    if !m.is_square() {
        return Err(Error::InvalidMatrix(
            "polar_positive_factor: not square".into(),
        ));
    }
    let d = svd(m);
    let smax = d.sigma_max();
    let smin = d.sigma.last().copied().unwrap_or(0.0);
    if smin <= tol.rank_rel * smax || smax == 0.0 {
        return Err(Error::SingularMatrix {
            sigma_min: smin,
            cutoff: tol.rank_rel * smax,
        });
    }
    // H = U Sigma U* from M = U Sigma V*.
    let sig = CMatrix::diag_real(&d.sigma);
    Ok(d.u.matmul(&sig).matmul(&d.u.adjoint()).hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, random_matrix, SeededRng};

    #[test]
    fn rank_identity_and_zero() {
        let tol = Tolerance::default();
        assert_eq!(numeric_rank(&CMatrix::identity(3), &tol).unwrap(), 3);
        assert_eq!(numeric_rank(&CMatrix::zeros(2, 5), &tol).unwrap(), 0);
    }

    #[test]
    fn rank_tiny_singular_value() {
        let tol = Tolerance::default();
        let m = CMatrix::diag_real(&[1.0, 1e-12]);
        assert_eq!(numeric_rank(&m, &tol).unwrap(), 1);
    }

    #[test]
    fn rank_ambiguous_near_cutoff() {
        let tol = Tolerance::default();
        let m = CMatrix::diag_real(&[1.0, 3e-8]);
        assert!(matches!(
            numeric_rank(&m, &tol),
            Err(Error::RankAmbiguous { .. })
        ));
    }

    #[test]
    fn rank_invariant_under_unitaries() {
        let tol = Tolerance::default();
        let mut rng = SeededRng::new(3);
        let m = CMatrix::diag_real(&[2.0, 1.0, 0.0]);
        let u = haar_unitary(3, &mut rng);
        let v = haar_unitary(3, &mut rng);
        let conj = u.matmul(&m).matmul(&v);
        assert_eq!(numeric_rank(&conj, &tol).unwrap(), 2);
    }

    #[test]
    fn log_identity_is_zero() {
        let tol = Tolerance::default();
        let d = principal_log_unitary(&CMatrix::identity(4), &tol).unwrap();
        assert!(d.frobenius_norm() < 1e-12);
    }

    #[test]
    fn log_scalar_phase() {
        let tol = Tolerance::default();
        let u = CMatrix::diag(&[Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 0.3)]);
        let d = principal_log_unitary(&u, &tol).unwrap();
        assert!((d[(0, 0)].re - 0.3).abs() < 1e-12);
    }

    #[test]
    fn log_minus_one_is_branch_ambiguous() {
        let tol = Tolerance::default();
        let u = CMatrix::diag_real(&[-1.0]);
        assert!(matches!(
            principal_log_unitary(&u, &tol),
            Err(Error::BranchAmbiguous { .. })
        ));
    }

    #[test]
    fn log_exp_roundtrip() {
        let tol = Tolerance::default();
        let mut rng = SeededRng::new(5);
        for n in 1..=4 {
            let q = haar_unitary(n, &mut rng);
            let lam: Vec<f64> = (0..n)
                .map(|i| -0.45 + 0.9 * (i as f64 + 0.5) / n as f64)
                .collect();
            let delta = q.matmul(&CMatrix::diag_real(&lam)).matmul(&q.adjoint());
            let u = exp_2pi_i_hermitian(&delta);
            let back = principal_log_unitary(&u, &tol).unwrap();
            assert!(back.sub(&delta).frobenius_norm() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn polar_of_unitary_is_identity() {
        let tol = Tolerance::default();
        let mut rng = SeededRng::new(9);
        let u = haar_unitary(3, &mut rng);
        let h = polar_positive_factor(&u, &tol).unwrap();
        assert!(h.sub(&CMatrix::identity(3)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn polar_recovers_hermitian_factor() {
        let tol = Tolerance::default();
        let mut rng = SeededRng::new(10);
        let u = haar_unitary(3, &mut rng);
        // H positive definite
        let g = random_matrix(3, 3, &mut rng);
        let h = g
            .matmul(&g.adjoint())
            .add(&CMatrix::identity(3))
            .hermitian_part();
        let m = h.matmul(&u);
        let h2 = polar_positive_factor(&m, &tol).unwrap();
        assert!(h2.sub(&h).frobenius_norm() < 1e-9);
        // H^{-1} M is unitary
        let w = h2.inverse().unwrap().matmul(&m);
        assert!(w.orthonormality_defect() < 1e-9);
    }

    #[test]
    fn polar_rejects_singular() {
        let tol = Tolerance::default();
        let m = CMatrix::diag_real(&[1.0, 0.0]);
        assert!(matches!(
            polar_positive_factor(&m, &tol),
            Err(Error::SingularMatrix { .. })
        ));
    }
}
