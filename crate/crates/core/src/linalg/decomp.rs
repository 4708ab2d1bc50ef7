//! Decompositions: Jacobi SVD, Jacobi Hermitian eigensolver, unitary
//! eigendecomposition, thin QR, nullspaces, principal angles.
//!
//! One-sided Jacobi is used for the SVD because it delivers high relative
//! accuracy on the small singular values that rank decisions hinge on.

use super::{CMatrix, Complex64, ONE, ZERO};

const MAX_SWEEPS: usize = 64;
const JACOBI_EPS: f64 = 1e-15;

/// Full singular value decomposition A = U diag(sigma) V*.
///
/// `u` is rows x rows, `v` is cols x cols (both unitary); `sigma` has
/// min(rows, cols) entries in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }
}

/// One-sided Jacobi SVD with full U and V.
pub fn svd(a: &CMatrix) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return Svd {
            u: CMatrix::identity(m),
            sigma: vec![],
            v: CMatrix::identity(n),
        };
    }
    // Work on a square-or-tall copy so the right factor comes out full.
    let padded = m < n;
    let mut b = if padded {
        let mut p = CMatrix::zeros(n, n);
        p.set_block(0, 0, a);
        p
    } else {
        a.clone()
    };
    let (wm, wn) = (b.rows(), b.cols());
    let mut v = CMatrix::identity(wn);
    // Columns this small relative to the matrix are noise; rotating them
    // divides denormals by denormals and breaks the unitarity of V.
    let dead = (b.frobenius_norm() * 1e-150).max(f64::MIN_POSITIVE.sqrt());
    let dead2 = dead * dead;

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..wn {
            for q in p + 1..wn {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = ZERO;
                for i in 0..wm {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    app += bp.norm_sqr();
                    aqq += bq.norm_sqr();
                    apq += bp.conj() * bq;
                }
                if app <= dead2 || aqq <= dead2 {
                    continue;
                }
                if apq.norm() <= JACOBI_EPS * (app * aqq).sqrt() || apq.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                // Diagonalize the 2x2 Gram block [[app, apq], [conj(apq), aqq]].
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..wm {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    b[(i, p)] = bp * c - bq * phase.conj() * s;
                    b[(i, q)] = bp * phase * s + bq * c;
                }
                for i in 0..wn {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * phase.conj() * s;
                    v[(i, q)] = vp * phase * s + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // Column norms are the singular values; sort descending.
    let mut order: Vec<usize> = (0..wn).collect();
    let norms: Vec<f64> = (0..wn)
        .map(|j| (0..wm).map(|i| b[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let b = b.select_columns(&order);
    let v = v.select_columns(&order);
    let sigma_all: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    // Left vectors: normalized columns where sigma > 0, completed to a basis.
    let smax = sigma_all.first().copied().unwrap_or(0.0);
    let mut u_cols: Vec<Vec<Complex64>> = Vec::new();
    for (j, &s) in sigma_all.iter().enumerate() {
        if j >= m {
            break;
        }
        if s > smax * 1e-14 && s > 0.0 {
            u_cols.push((0..m).map(|i| b[(i, j)] / s).collect());
        }
    }
    let u = gram_schmidt_complete(m, &u_cols);

    let k = m.min(n);
    Svd {
        u,
        sigma: sigma_all[..k].to_vec(),
        v,
    }
}

/// Complete a set of (assumed orthonormal) columns to a full unitary basis of
/// C^dim by sweeping standard basis vectors through modified Gram-Schmidt.
pub fn gram_schmidt_complete(dim: usize, cols: &[Vec<Complex64>]) -> CMatrix {
    let mut basis: Vec<Vec<Complex64>> = cols.to_vec();
    let mut e = 0usize;
    while basis.len() < dim {
        assert!(e < dim, "gram_schmidt_complete: ran out of candidates");
        let mut cand: Vec<Complex64> = vec![ZERO; dim];
        cand[e] = ONE;
        e += 1;
        // Two passes of MGS for orthogonality at working precision.
        for _ in 0..2 {
            for b in &basis {
                let inner: Complex64 = b.iter().zip(&cand).map(|(x, y)| x.conj() * y).sum();
                for (ci, bi) in cand.iter_mut().zip(b) {
                    *ci -= inner * bi;
                }
            }
        }
        let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for ci in cand.iter_mut() {
                *ci /= norm;
            }
            basis.push(cand);
        }
    }
    CMatrix::from_fn(dim, dim, |i, j| basis[j][i])
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.
///
/// Returns eigenvalues in ascending order and the unitary Q with
/// A = Q diag(lambda) Q*.
pub fn eig_hermitian(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert!(a.is_square());
    let n = a.rows();
    let mut w = a.hermitian_part();
    let mut q = CMatrix::identity(n);
    let scale = w.frobenius_norm().max(1.0);

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for qq in p + 1..n {
                off += w[(p, qq)].norm_sqr();
            }
        }
        if off.sqrt() <= JACOBI_EPS * scale {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apq = w[(p, r)];
                if apq.norm() <= JACOBI_EPS * scale * 1e-2 {
                    continue;
                }
                let app = w[(p, p)].re;
                let aqq = w[(r, r)].re;
                // Phase out the off-diagonal entry, then a real rotation.
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // G: identity except G[p,p]=c e^{i phi}, G[p,r]=s e^{i phi},
                // G[r,p]=-s, G[r,r]=c; update W <- G* W G, Q <- Q G.
                let gpp = phase * c;
                let gpr = phase * s;
                let grp = Complex64::new(-s, 0.0);
                let grr = Complex64::new(c, 0.0);
                for i in 0..n {
                    let wip = w[(i, p)];
                    let wir = w[(i, r)];
                    w[(i, p)] = wip * gpp + wir * grp;
                    w[(i, r)] = wip * gpr + wir * grr;
                }
                for j in 0..n {
                    let wpj = w[(p, j)];
                    let wrj = w[(r, j)];
                    w[(p, j)] = gpp.conj() * wpj + grp.conj() * wrj;
                    w[(r, j)] = gpr.conj() * wpj + grr.conj() * wrj;
                }
                for i in 0..n {
                    let qip = q[(i, p)];
                    let qir = q[(i, r)];
                    q[(i, p)] = qip * gpp + qir * grp;
                    q[(i, r)] = qip * gpr + qir * grr;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
    let lam: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    (lam, q.select_columns(&order))
}

/// Eigendecomposition of a unitary matrix.
///
/// A unitary U is normal, so its Hermitian and skew parts commute; we
/// diagonalize Re(U) and split clustered eigenspaces with Im(U). Returns the
/// eigenvalues (on the unit circle) and a unitary Q with U = Q diag(ev) Q*.
pub fn eig_unitary(u: &CMatrix) -> (Vec<Complex64>, CMatrix) {
    assert!(u.is_square());
    let n = u.rows();
    let ua = u.adjoint();
    let c = CMatrix::from_fn(n, n, |i, j| 0.5 * (u[(i, j)] + ua[(i, j)]));
    let s = CMatrix::from_fn(n, n, |i, j| {
        (u[(i, j)] - ua[(i, j)]) / (2.0 * Complex64::i())
    });

    let (cvals, mut q) = eig_hermitian(&c);

    // Refine within clusters of equal Re-eigenvalue using the skew part.
    let cluster_tol = 1e-7;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (cvals[end] - cvals[end - 1]).abs() <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let idx: Vec<usize> = (start..end).collect();
            let qc = q.select_columns(&idx);
            let sc = qc.adjoint().matmul(&s).matmul(&qc);
            let (_, r) = eig_hermitian(&sc);
            let refined = qc.matmul(&r);
            for (k, j) in (start..end).enumerate() {
                for i in 0..n {
                    q[(i, j)] = refined[(i, k)];
                }
            }
        }
        start = end;
    }

    let d = q.adjoint().matmul(u).matmul(&q);
    let evals: Vec<Complex64> = (0..n).map(|i| d[(i, i)]).collect();
    (evals, q)
}

/// Thin QR by modified Gram-Schmidt with re-orthogonalization.
/// Returns (Q, R) with Q rows x cols orthonormal columns (requires full rank).
pub fn qr_thin(a: &CMatrix) -> (CMatrix, CMatrix) {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n);
    let mut q = a.clone();
    let mut r = CMatrix::zeros(n, n);
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let mut inner = ZERO;
                for i in 0..m {
                    inner += q[(i, k)].conj() * q[(i, j)];
                }
                r[(k, j)] += inner;
                for i in 0..m {
                    let v = q[(i, k)];
                    q[(i, j)] -= inner * v;
                }
            }
        }
        let norm = (0..m).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        r[(j, j)] = Complex64::new(norm, 0.0);
        assert!(norm > 0.0, "qr_thin: rank-deficient column {j}");
        for i in 0..m {
            q[(i, j)] /= norm;
        }
    }
    (q, r)
}

/// Orthonormal basis for the column span of `a`: the left singular vectors
/// with singular value above `rank_rel * sigma_max`.
pub fn orthonormal_columns(a: &CMatrix, rank_rel: f64) -> CMatrix {
    let d = svd(a);
    let smax = d.sigma_max();
    let r = d
        .sigma
        .iter()
        .filter(|&&s| s > rank_rel * smax && s > 0.0)
        .count();
    d.u.block(0, a.rows(), 0, r)
}

/// Like [`orthonormal_columns`] but with the cutoff floored at
/// `rank_rel * scale`: for inputs that are projections of unit-scale data,
/// a numerically-zero matrix must yield an empty basis, which a purely
/// relative cutoff cannot guarantee.
pub fn orthonormal_columns_floored(a: &CMatrix, rank_rel: f64, scale: f64) -> CMatrix {
    let d = svd(a);
    let cutoff = rank_rel * d.sigma_max().max(scale);
    let r = d.sigma.iter().filter(|&&s| s > cutoff).count();
    d.u.block(0, a.rows(), 0, r)
}

/// Orthonormal basis of the kernel of `a` (right singular vectors at zero).
pub fn nullspace(a: &CMatrix, rank_rel: f64) -> CMatrix {
    let d = svd(a);
    let smax = d.sigma_max();
    let n = a.cols();
    let r = d
        .sigma
        .iter()
        .filter(|&&s| s > rank_rel * smax && s > 0.0)
        .count();
    d.v.block(0, n, r, n)
}

/// Principal angles between the spans of two orthonormal-column matrices,
/// ascending. Both must sit in the same ambient space.
///
/// Cosines come from sigma(P* Q), sines from sigma((I - P P*) Q); angles
/// below 45 degrees use the sine route, which stays accurate where
/// acos(1 - eps) cannot.
pub fn principal_angles(p: &CMatrix, q: &CMatrix) -> Vec<f64> {
    assert_eq!(p.rows(), q.rows());
    let k = p.cols().min(q.cols());
    if k == 0 {
        return vec![];
    }
    let m = p.adjoint().matmul(q);
    let mut cosines = svd(&m).sigma; // descending
    cosines.iter_mut().for_each(|c| *c = c.clamp(0.0, 1.0));
    let compl = q.sub(&p.matmul(&p.adjoint().matmul(q)));
    let mut sines = svd(&compl).sigma; // descending
    sines.iter_mut().for_each(|s| *s = s.clamp(0.0, 1.0));
    sines.reverse(); // ascending; smallest sines pair with largest cosines
    (0..k)
        .map(|i| {
            let c = cosines[i];
            let s = sines
                .get(i)
                .copied()
                .unwrap_or_else(|| (1.0 - c * c).sqrt());
            if c * c > 0.5 {
                s.asin()
            } else {
                c.acos()
            }
        })
        .collect()
}

/// Largest principal angle (0 iff the subspaces coincide, when dims agree).
pub fn subspace_gap(p: &CMatrix, q: &CMatrix) -> f64 {
    if p.cols() != q.cols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if p.cols() == 0 {
        return 0.0;
    }
    principal_angles(p, q).last().copied().unwrap_or(0.0)
}
