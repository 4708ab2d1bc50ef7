//! The symplectic-holomorphic dictionary: induced flags and parabolic
//! degrees, the moduli-level moment map, the block normal form of a plane on
//! a moment level set, the Hecke weight shift, plane transfer, and the
//! explicit genus-zero two-point inverse.

use crate::error::{Error, Result};
use crate::framed::{FramedBundleModel, SubbundleWitness};
use crate::git_weights::{FramedEncoding, Verdict};
use crate::grassmann::{
    canonical_subspace_basis, complement_within, intersect_subspaces, moment_left, Plane,
};
use crate::linalg::orthonormal_columns;
use crate::linalg::{eig_hermitian, numeric_rank, CMatrix, Tolerance, I, ONE, ZERO};
use crate::rational::{rat, rat_int, rat_sign, Rat};
use num_complex::Complex64;
use num_traits::Zero;

/// Per-point quasi-parabolic data: a nested flag
/// F_0 <= F_1 <= ... <= F_n (F_{-1} = 0 and F_{n+1} = C^n implicit) with
/// weights 1/2 = a_0 >= a_1 >= ... >= a_n >= a_{n+1} = -1/2, the weight a_j
/// sitting on F_j / F_{j-1}.
#[derive(Debug, Clone)]
pub struct ParabolicData {
    pub n: usize,
    /// `flags[i][j]` = orthonormal basis of F_{i,j}, j = 0..=n.
    pub flags: Vec<Vec<CMatrix>>,
    /// `weights[i][j]`, j = 0..=n+1, exact rationals.
    pub weights: Vec<Vec<Rat>>,
}

impl ParabolicData {
    pub fn new(
        n: usize,
        flags: Vec<Vec<CMatrix>>,
        weights: Vec<Vec<Rat>>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if flags.len() != weights.len() || flags.is_empty() {
            return Err(Error::ShapeMismatch(
                "flag/weight point counts differ".into(),
            ));
        }
        let half = rat(1, 2);
        for (i, (fl, ws)) in flags.iter().zip(&weights).enumerate() {
            if fl.len() != n + 1 || ws.len() != n + 2 {
                return Err(Error::ShapeMismatch(format!(
                    "point {i}: flag/weight lengths"
                )));
            }
            if ws[0] != half || ws[n + 1] != -half {
                return Err(Error::InvalidMatrix(format!(
                    "point {i}: boundary weights must be +-1/2"
                )));
            }
            for w in ws.windows(2) {
                if w[0] < w[1] {
                    return Err(Error::InvalidMatrix(format!(
                        "point {i}: weights not decreasing"
                    )));
                }
            }
            for (j, f) in fl.iter().enumerate() {
                if f.rows() != n {
                    return Err(Error::ShapeMismatch(format!("point {i} flag {j}: ambient")));
                }
                let defect = f.orthonormality_defect();
                if defect > tol.residual_abs.max(1e-12) * 100.0 {
                    return Err(Error::InvalidFrame {
                        residual: defect,
                        tol: tol.residual_abs,
                    });
                }
                if j > 0 {
                    // nesting: F_{j-1} inside F_j
                    let prev = &fl[j - 1];
                    let proj = prev.sub(&f.matmul(&f.adjoint().matmul(prev)));
                    if proj.frobenius_norm() > tol.residual_abs.max(1e-12) * 100.0 {
                        return Err(Error::InvalidMatrix(format!(
                            "point {i}: flag not nested at {j}"
                        )));
                    }
                }
            }
        }
        Ok(ParabolicData { n, flags, weights })
    }

    pub fn ell(&self) -> usize {
        self.flags.len()
    }

    /// Flag dimensions at point i: dim F_{i,j} for j = 0..=n.
    pub fn dims(&self, i: usize) -> Vec<usize> {
        self.flags[i].iter().map(|f| f.cols()).collect()
    }

    /// Standard-position flags with prescribed dimensions.
    pub fn standard(
        n: usize,
        dims: &[Vec<usize>],
        weights: Vec<Vec<Rat>>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let flags = dims
            .iter()
            .map(|dd| {
                dd.iter()
                    .map(|&d| CMatrix::from_fn(n, d, |r, c| if r == c { ONE } else { ZERO }))
                    .collect()
            })
            .collect();
        ParabolicData::new(n, flags, weights, tol)
    }
}

/// Induced flag of a framing plane g in E + C^n:
/// F_j = Pi(g intersect R^{-1}(C^j)) for the standard flag C^j in the
/// framing summand, j = 0..n; F_0 = E cap g and F_n = Pi(g).
pub fn induced_flag(g: &Plane, tol: &Tolerance) -> Result<Vec<CMatrix>> {
    let n = g.dim_first();
    if g.dim_second() != n || g.k() != n {
        return Err(Error::ShapeMismatch(
            "induced flag needs an n-plane in C^n + C^n".into(),
        ));
    }
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        // R^{-1}(C^j) = E + span(e_1..e_j)
        let sub = CMatrix::from_fn(2 * n, n + j, |r, c| {
            if c < n {
                if r == c {
                    ONE
                } else {
                    ZERO
                }
            } else if r == n + (c - n) {
                ONE
            } else {
                ZERO
            }
        });
        let meet = intersect_subspaces(g.basis(), &sub, tol);
        // project to E and orthonormalize
        let pi = meet.block(0, n, 0, meet.cols());
        out.push(canonical_subspace_basis(&pi, tol));
    }
    Ok(out)
}

/// Parabolic degree delta0 + sum_i sum_j dim(F_j/F_{j-1}) a_j, exact. Flag
/// dims run j = 0..=n with the ambient dimension closing the top quotient.
pub fn pardeg(delta0: i64, ambient: usize, flag_dims: &[Vec<usize>], weights: &[Vec<Rat>]) -> Rat {
    let mut acc = rat_int(delta0 as i128);
    for (dims, ws) in flag_dims.iter().zip(weights) {
        let n_steps = dims.len();
        for j in 0..n_steps {
            let prev = if j == 0 { 0 } else { dims[j - 1] };
            acc += rat_int((dims[j] - prev) as i128) * ws[j];
        }
        acc += rat_int((ambient - dims[n_steps - 1]) as i128) * ws[n_steps];
    }
    acc
}

pub fn pardeg_of(data: &ParabolicData, delta0: i64) -> Rat {
    let dims: Vec<Vec<usize>> = (0..data.ell()).map(|i| data.dims(i)).collect();
    pardeg(delta0, data.n, &dims, &data.weights)
}

/// Parabolic semistability over a witness list: slopes
/// pardeg(E')/n' <= pardeg(E)/n with induced flags F'_j = F_j cap E'.
pub fn parabolic_semistable(
    model: &FramedBundleModel,
    data: &ParabolicData,
    witnesses: &[SubbundleWitness],
    tol: &Tolerance,
) -> Result<Verdict> {
    if data.ell() != model.ell || data.n != model.n {
        return Err(Error::ShapeMismatch(
            "parabolic data does not match model".into(),
        ));
    }
    let total = pardeg_of(data, model.delta0);
    let slope = total / rat_int(model.n as i128);
    let mut strict = true;
    for wit in witnesses {
        if wit.fibers.len() != model.ell {
            return Err(Error::ShapeMismatch("witness fiber count".into()));
        }
        let mut dims = Vec::with_capacity(model.ell);
        for (i, fiber) in wit.fibers.iter().enumerate() {
            let dd: Result<Vec<usize>> = data.flags[i]
                .iter()
                .map(|f| {
                    let meet = intersect_subspaces(f, fiber, tol);
                    // rank decision already made inside intersect; re-check
                    numeric_rank(&meet, tol)
                })
                .collect();
            dims.push(dd?);
        }
        let sub = pardeg(wit.delta0_prime, wit.n_prime, &dims, &data.weights);
        let sub_slope = sub / rat_int(wit.n_prime as i128);
        match rat_sign(&(slope - sub_slope)) {
            -1 => return Ok(Verdict::Unstable),
            0 => strict = false,
            _ => {}
        }
    }
    Ok(if strict {
        Verdict::Stable
    } else {
        Verdict::Semistable
    })
}

/// Weights read off a Hermitian moment value: eigenvalues sorted weakly
/// decreasing, clustered at 1e-7 into the blocks n_{i,j}.
pub fn weights_from_moment(delta: &CMatrix) -> (Vec<f64>, Vec<usize>) {
    let (mut lam, _) = eig_hermitian(delta);
    lam.reverse();
    let mut blocks = Vec::new();
    let mut start = 0;
    for j in 1..=lam.len() {
        if j == lam.len() || (lam[j] - lam[j - 1]).abs() > 1e-7 {
            blocks.push(j - start);
            start = j;
        }
    }
    (lam, blocks)
}

/// Per-point moment map of the encoded framed bundle for the U(n)^l action:
/// (i/2)(-I + 2 d_i d_i*) where d_i is the C^n block of the beta_i frame;
/// on graphs of xi_i: V -> C^n this is (i/2)(I - xi xi*)(I + xi xi*)^{-1}.
pub fn moduli_moment(enc: &FramedEncoding) -> Vec<CMatrix> {
    let n = enc.n;
    let p = enc.p;
    enc.beta
        .iter()
        .map(|b| {
            let d = b.basis().block(p, p + n, 0, b.k());
            let dds = d.matmul(&d.adjoint());
            CMatrix::identity(n)
                .scale(-ONE)
                .add(&dds.scale(Complex64::new(2.0, 0.0)))
                .scale(0.5 * I)
        })
        .collect()
}

/// Result of the block normal form of a plane on a moment level set: the
/// annihilator rows in the pattern
///
///   rho* = [ 0  0  0 | I  0  0 ]     s rows
///          [ 0  M  0 | 0  D  0 ]     r rows,  M = (I/2 - d^)^{1/2},
///          [ 0  0  I | 0  0  0 ]     t rows,  D = (I/2 + d^)^{1/2},
///
/// horizontal blocks of sizes (s, r, t | s, r, t), d^ the interior diagonal
/// of delta. `e_side` is the unitary change of basis applied to E; the
/// source C^n is never rotated (delta stays fixed). Equal-eigenvalue blocks
/// of d^ retain a residual unitary freedom, recorded in `cluster_sizes`.
#[derive(Debug, Clone)]
pub struct NormalFormResult {
    pub rho_star: CMatrix,
    pub s: usize,
    pub r: usize,
    pub t: usize,
    /// Diagonal of M.
    pub m_diag: Vec<f64>,
    /// Interior eigenvalues of delta (weakly decreasing).
    pub delta_hat: Vec<f64>,
    /// Interior cluster sizes (equal-eigenvalue blocks).
    pub cluster_sizes: Vec<usize>,
    /// Unitary basis change on E.
    pub e_side: CMatrix,
    /// || rho* . diag(e_side*, I) . basis(plane) ||, the certification that
    /// the pattern annihilates the input plane.
    pub residual: f64,
}

const WEIGHT_CLUSTER_TOL: f64 = 1e-7;

/// Normal form of a plane whose left moment map equals i*delta, for delta
/// diagonal with weakly decreasing entries in [-1/2, 1/2]. Executes the
/// normalization: split E by the induced flag pieces (g cap E, the middle,
/// the complement of Pi(g)), pair each interior source direction with its
/// E-side partner inside the plane, and scale to the displayed pattern.
pub fn normal_form(plane: &Plane, delta: &CMatrix, tol: &Tolerance) -> Result<NormalFormResult> {
    let n = plane.dim_first();
    if plane.dim_second() != n || plane.k() != n {
        return Err(Error::ShapeMismatch(
            "normal form needs an n-plane in C^n + C^n".into(),
        ));
    }
    if !delta.is_square() || delta.rows() != n {
        return Err(Error::ShapeMismatch("delta must be n x n".into()));
    }
    // delta diagonal, real, weakly decreasing, in [-1/2, 1/2]
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && delta[(i, j)].norm() > 1e-10 {
                return Err(Error::InvalidMatrix("delta must be diagonal".into()));
            }
        }
        let d = delta[(i, i)];
        if d.im.abs() > 1e-10 || d.re < -0.5 - 1e-9 || d.re > 0.5 + 1e-9 {
            return Err(Error::InvalidMatrix(
                "delta diagonal out of [-1/2, 1/2]".into(),
            ));
        }
        diag.push(d.re.clamp(-0.5, 0.5));
    }
    if diag.windows(2).any(|w| w[0] < w[1] - 1e-12) {
        return Err(Error::InvalidMatrix(
            "delta diagonal must be weakly decreasing".into(),
        ));
    }

    // moment level check: moment_left(plane) = i * delta
    let mu = moment_left(plane, tol);
    let level_residual = mu.sub(&delta.scale(I)).frobenius_norm();
    let level_tol = tol.residual_abs.max(1e-8);
    if level_residual > level_tol {
        return Err(Error::MomentMismatch {
            residual: level_residual,
            tol: level_tol,
        });
    }

    let s = diag
        .iter()
        .filter(|&&x| x > 0.5 - WEIGHT_CLUSTER_TOL)
        .count();
    let t = diag
        .iter()
        .filter(|&&x| x < -0.5 + WEIGHT_CLUSTER_TOL)
        .count();
    let r = n - s - t;
    let delta_hat: Vec<f64> = diag[s..s + r].to_vec();
    let mut cluster_sizes = Vec::new();
    let mut start = 0;
    for j in 1..=r {
        if j == r || (delta_hat[j] - delta_hat[j - 1]).abs() > WEIGHT_CLUSTER_TOL {
            cluster_sizes.push(j - start);
            start = j;
        }
    }

    // E-side pieces: P0 = g cap E, the flag middle, T0 = E minus Pi(g)
    let first_summand = CMatrix::from_fn(2 * n, n, |i, j| if i == j { ONE } else { ZERO });
    let p0_embedded = intersect_subspaces(plane.basis(), &first_summand, tol);
    let p0 = canonical_subspace_basis(&p0_embedded.block(0, n, 0, p0_embedded.cols()), tol);
    if p0.cols() != s {
        return Err(Error::MomentMismatch {
            residual: (p0.cols() as f64 - s as f64).abs(),
            tol: 0.5,
        });
    }
    let pi_g = orthonormal_columns(&plane.basis().block(0, n, 0, n), tol.rank_rel);
    let t0 = canonical_subspace_basis(&complement_within(&CMatrix::identity(n), &pi_g, tol), tol);
    if t0.cols() != t {
        return Err(Error::MomentMismatch {
            residual: (t0.cols() as f64 - t as f64).abs(),
            tol: 0.5,
        });
    }

    // Pair each interior source direction e_{s+j} with its E-side partner:
    // the plane meets (E - P0) + C e_{s+j} in the line
    // ( -(1/2 + d^_j)^{1/2} w_j, (1/2 - d^_j)^{1/2} e_{s+j} ); P0 must be
    // projected away since it always sits inside E.
    let p0_perp = complement_within(&CMatrix::identity(n), &p0, tol);
    let mut w_cols: Vec<Vec<Complex64>> = Vec::with_capacity(r);
    for j in 0..r {
        let src = s + j;
        let cols = p0_perp.cols();
        let mut sub = CMatrix::zeros(2 * n, cols + 1);
        for c in 0..cols {
            for i in 0..n {
                sub[(i, c)] = p0_perp[(i, c)];
            }
        }
        sub[(n + src, cols)] = ONE;
        let meet = intersect_subspaces(plane.basis(), &sub, tol);
        if meet.cols() != 1 {
            return Err(Error::MomentMismatch {
                residual: meet.cols() as f64,
                tol: 1.0,
            });
        }
        // normalize the source coefficient to the positive real axis
        let coeff = meet[(n + src, 0)];
        if coeff.norm() < 1e-10 {
            return Err(Error::MomentMismatch {
                residual: coeff.norm(),
                tol: 1e-10,
            });
        }
        let phase = coeff.conj() / coeff.norm();
        let e_part: Vec<Complex64> = (0..n).map(|i| meet[(i, 0)] * phase).collect();
        let norm = e_part.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::MomentMismatch {
                residual: norm,
                tol: 1e-12,
            });
        }
        // kernel vector is (-(1/2+d)^{1/2} w, (1/2-d)^{1/2} e): flip the sign
        w_cols.push(e_part.iter().map(|z| -z / norm).collect());
    }

    // assemble the E-side unitary [P0 | W' | T0]
    let mut e_side = CMatrix::zeros(n, n);
    for (j, col) in (0..s).zip(0..) {
        let _ = col;
        e_side.set_column(j, &p0.column(j));
    }
    for (j, w) in w_cols.iter().enumerate() {
        e_side.set_column(s + j, w);
    }
    for j in 0..t {
        e_side.set_column(s + r + j, &t0.column(j));
    }
    let defect = e_side.orthonormality_defect();
    if defect > 1e-7 {
        return Err(Error::MomentMismatch {
            residual: defect,
            tol: 1e-7,
        });
    }

    // the pattern, exact in the adapted basis
    let mut rho = CMatrix::zeros(n, 2 * n);
    let mut m_diag = Vec::with_capacity(r);
    for i in 0..s {
        rho[(i, n + i)] = ONE;
    }
    for j in 0..r {
        let m = (0.5 - delta_hat[j]).max(0.0).sqrt();
        let d = (0.5 + delta_hat[j]).max(0.0).sqrt();
        rho[(s + j, s + j)] = Complex64::new(m, 0.0);
        rho[(s + j, n + s + j)] = Complex64::new(d, 0.0);
        m_diag.push(m);
    }
    for i in 0..t {
        rho[(s + r + i, s + r + i)] = ONE;
    }

    // certify: the pattern annihilates the plane in the adapted coordinates
    let mut adapt = CMatrix::identity(2 * n);
    adapt.set_block(0, 0, &e_side.adjoint());
    let residual = rho.matmul(&adapt).matmul(plane.basis()).frobenius_norm();
    let cert_tol = tol.residual_abs.max(1e-8) * 10.0;
    if residual > cert_tol {
        return Err(Error::MomentMismatch {
            residual,
            tol: cert_tol,
        });
    }

    Ok(NormalFormResult {
        rho_star: rho,
        s,
        r,
        t,
        m_diag,
        delta_hat,
        cluster_sizes,
        e_side,
        residual,
    })
}

/// The normalized plane: kernel of the pattern in standard position.
pub fn normal_form_plane(result: &NormalFormResult, tol: &Tolerance) -> Result<Plane> {
    let n = result.s + result.r + result.t;
    let kernel = crate::linalg::nullspace(&result.rho_star, tol.rank_rel);
    Plane::from_orthonormal_basis(n, n, kernel, tol)
}

/// Reconstruct the original plane from the normal form: undo the E-side
/// change of basis on the pattern kernel.
pub fn normal_form_reconstruct(result: &NormalFormResult, tol: &Tolerance) -> Result<Plane> {
    let standard = normal_form_plane(result, tol)?;
    Ok(standard.act_first(&result.e_side))
}

/// Hecke shift at one point: remove the +1/2 block F_0 (dimension s > 0),
/// append a -1/2 block of the same dimension, and raise the degree by s.
/// The parabolic degree is preserved exactly.
pub fn hecke_shift(
    data: &ParabolicData,
    delta0: i64,
    point: usize,
    tol: &Tolerance,
) -> Result<(ParabolicData, i64)> {
    if point >= data.ell() {
        return Err(Error::ShapeMismatch("point index out of range".into()));
    }
    let n = data.n;
    let dims = data.dims(point);
    let s = dims[0];
    if s == 0 {
        return Err(Error::NothingToShift(point));
    }
    // new dims: F~_0 = 0, F~_j = F_j - s; weights unchanged (the new -1/2
    // block has multiplicity t + s, captured by the smaller top dimension)
    let mut all_dims: Vec<Vec<usize>> = (0..data.ell()).map(|i| data.dims(i)).collect();
    all_dims[point] = std::iter::once(0)
        .chain(dims.iter().skip(1).map(|&d| d - s))
        .collect();
    let shifted = ParabolicData::standard(n, &all_dims, data.weights.clone(), tol)?;
    // keep the untouched points' actual flags
    let mut flags = shifted.flags;
    for (i, f) in flags.iter_mut().enumerate() {
        if i != point {
            f.clone_from(&data.flags[i]);
        }
    }
    let out = ParabolicData::new(n, flags, data.weights.clone(), tol)?;
    Ok((out, delta0 + s as i64))
}

/// The genus-zero two-point chart: from an invertible gamma_2, the rescaled
/// moment value delta = (I - g2* g2)(I + g2* g2)^{-1} (eigenvalues in
/// (-1, 1)) and the positive Hermitian gamma_1 = (g2* g2)^{-1/2} solving
/// (-I + g1* g1)(I + g1* g1)^{-1} = delta.
pub fn genus0_two_point_normalize(gamma2: &CMatrix, tol: &Tolerance) -> Result<(CMatrix, CMatrix)> {
    gamma2.check_finite()?;
    if !gamma2.is_square() {
        return Err(Error::ShapeMismatch("gamma_2 must be square".into()));
    }
    let _n = gamma2.rows();
    let h = gamma2.adjoint().matmul(gamma2).hermitian_part();
    let (lam, q) = eig_hermitian(&h);
    if lam
        .iter()
        .any(|&x| x <= tol.rank_rel * lam.last().copied().unwrap_or(1.0))
    {
        return Err(Error::BoundaryDegenerate(-1.0));
    }
    let delta_eigs: Vec<f64> = lam.iter().map(|&x| (1.0 - x) / (1.0 + x)).collect();
    if delta_eigs.iter().any(|&d| d.abs() >= 1.0 - 1e-12) {
        return Err(Error::BoundaryDegenerate(delta_eigs[0]));
    }
    let delta = q
        .matmul(&CMatrix::diag_real(&delta_eigs))
        .matmul(&q.adjoint())
        .hermitian_part();
    let inv_roots: Vec<f64> = lam.iter().map(|&x| 1.0 / x.sqrt()).collect();
    let gamma1 = q
        .matmul(&CMatrix::diag_real(&inv_roots))
        .matmul(&q.adjoint())
        .hermitian_part();
    Ok((delta, gamma1))
}

/// Transfer a framing plane from the flat-bundle model to the fiber: the
/// graph factor gamma = gamma~ . z^{-delta} . f is evaluated structurally,
/// the z-rescaling being absorbed into the renormalized Hermitian form. On
/// the plane this is conjugation of the basis by diag(f*, I); the invariants
/// gamma gamma* (hence the left moment) and (s, t) are unchanged.
pub fn transfer_plane(
    g_tilde: &Plane,
    delta: &CMatrix,
    f: &CMatrix,
    tol: &Tolerance,
) -> Result<Plane> {
    let n = g_tilde.dim_first();
    if g_tilde.dim_second() != n || f.rows() != n || !f.is_square() {
        return Err(Error::ShapeMismatch(
            "transfer needs square framing data".into(),
        ));
    }
    if f.orthonormality_defect() > tol.residual_abs.max(1e-12) * 100.0 {
        return Err(Error::InvalidMatrix("f must be unitary".into()));
    }
    if !delta.is_hermitian(tol.residual_abs.max(1e-12) * 100.0) {
        return Err(Error::InvalidMatrix("delta must be Hermitian".into()));
    }
    let (lam, _) = eig_hermitian(delta);
    if lam
        .iter()
        .any(|&x| !(-0.5 - 1e-9..=0.5 + 1e-9).contains(&x))
    {
        return Err(Error::InvalidMatrix(
            "delta eigenvalues outside [-1/2, 1/2]".into(),
        ));
    }
    Ok(g_tilde.act_first(&f.adjoint()))
}

/// Vertex of the weight simplex: a_0 = ... = a_k = 1/2, the rest -1/2.
pub fn vertex_weights(n: usize, k: usize) -> Vec<Rat> {
    let half = rat(1, 2);
    (0..n + 2)
        .map(|j| if j <= k { half } else { -half })
        .collect()
}

/// Parabolic data induced by the framing planes of a model, with the given
/// per-point weight vectors.
pub fn induced_parabolic(
    model: &FramedBundleModel,
    weights: Vec<Vec<Rat>>,
    tol: &Tolerance,
) -> Result<ParabolicData> {
    let flags: Result<Vec<Vec<CMatrix>>> = model.g.iter().map(|g| induced_flag(g, tol)).collect();
    ParabolicData::new(model.n, flags?, weights, tol)
}

/// Zero interior weights: [1/2, 0, ..., 0, -1/2].
pub fn zero_interior_weights(n: usize) -> Vec<Rat> {
    let half = rat(1, 2);
    (0..n + 2)
        .map(|j| {
            if j == 0 {
                half
            } else if j == n + 1 {
                -half
            } else {
                Rat::zero()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framed::Certificate;
    use crate::linalg::{haar_unitary, random_matrix, SeededRng};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn induced_flag_of_identity_graph() {
        let g = Plane::from_graph(&CMatrix::identity(3), &tol()).unwrap();
        let flag = induced_flag(&g, &tol()).unwrap();
        let dims: Vec<usize> = flag.iter().map(|f| f.cols()).collect();
        assert_eq!(dims, vec![0, 1, 2, 3]);
        // F_j = C^j standard
        for (j, fj) in flag.iter().enumerate().skip(1) {
            for c in 0..j {
                let col = fj.column(c);
                assert!((col[c].norm() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn induced_flag_of_fiber_summand() {
        // g = E: s = n, flag constant equal to E
        let basis = CMatrix::from_fn(4, 2, |i, j| if i == j { ONE } else { ZERO });
        let g = Plane::from_orthonormal_basis(2, 2, basis, &tol()).unwrap();
        let flag = induced_flag(&g, &tol()).unwrap();
        let dims: Vec<usize> = flag.iter().map(|f| f.cols()).collect();
        assert_eq!(dims, vec![2, 2, 2]);
    }

    #[test]
    fn induced_flag_mixed_intersections() {
        // n = 3 plane with s = 1, t = 1: flag dims interpolate 1, ..., 2, 3
        let mut span = CMatrix::zeros(6, 3);
        span[(0, 0)] = ONE; // e_1 of E: contributes s = 1
        span[(5, 1)] = ONE; // e_3 of the framing: contributes t = 1
        span[(1, 2)] = ONE; // e_2 + framing e_1: the graph part
        span[(3, 2)] = ONE;
        let g = Plane::from_span(3, 3, &span, &tol()).unwrap();
        let (s, t) = g.intersection_dims(&tol()).unwrap();
        assert_eq!((s, t), (1, 1));
        let flag = induced_flag(&g, &tol()).unwrap();
        let dims: Vec<usize> = flag.iter().map(|f| f.cols()).collect();
        // F_0 = g cap E (dim 1); the framing flag steps pick up the graph
        // direction at j = 1 and nothing new after; F_3 = Pi(g) has dim 2
        assert_eq!(dims[0], 1);
        assert_eq!(dims[3], 2);
        for w in dims.windows(2) {
            assert!(w[0] <= w[1]);
        }
        // cross-check each dim against the direct intersection rank
        for (j, d) in dims.iter().enumerate() {
            let sub = CMatrix::from_fn(6, 3 + j, |r, c| {
                if c < 3 {
                    if r == c {
                        ONE
                    } else {
                        ZERO
                    }
                } else if r == 3 + (c - 3) {
                    ONE
                } else {
                    ZERO
                }
            });
            let meet = intersect_subspaces(g.basis(), &sub, &tol());
            let pi = meet.block(0, 3, 0, meet.cols());
            let direct = crate::linalg::orthonormal_columns(&pi, tol().rank_rel).cols();
            assert_eq!(*d, direct, "j={j}");
        }
    }

    #[test]
    fn moduli_moment_fiber_summand() {
        // beta plane = fiber summand: d d* = I, moment = +(i/2) I
        let n = 2;
        let basis = CMatrix::from_fn(2 * n, n, |i, j| if i == n + j { ONE } else { ZERO });
        let beta = Plane::from_orthonormal_basis(n, n, basis, &tol()).unwrap();
        let d = beta.basis().block(n, 2 * n, 0, n);
        let dds = d.matmul(&d.adjoint());
        let mm = CMatrix::identity(n)
            .scale(-ONE)
            .add(&dds.scale(num_complex::Complex64::new(2.0, 0.0)))
            .scale(0.5 * I);
        let expect = CMatrix::identity(n).scale(0.5 * I);
        assert!(mm.sub(&expect).frobenius_norm() < 1e-12);
    }

    #[test]
    fn genus0_identity_input() {
        let (delta, gamma1) = genus0_two_point_normalize(&CMatrix::identity(3), &tol()).unwrap();
        assert!(delta.frobenius_norm() < 1e-12);
        assert!(gamma1.sub(&CMatrix::identity(3)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn pardeg_examples() {
        // n=1, l=1, weight 1/2 on F_0 of dim 1: delta0 + 1/2
        let f = vec![vec![CMatrix::identity(1), CMatrix::identity(1)]];
        let w = vec![vec![rat(1, 2), rat(1, 2), rat(-1, 2)]];
        let data = ParabolicData::new(1, f, w, &tol()).unwrap();
        assert_eq!(pardeg_of(&data, 3), rat_int(3) + rat(1, 2));

        // zero interior weights, s = t = 0: pardeg = delta0
        let g = Plane::from_graph(&CMatrix::identity(2), &tol()).unwrap();
        let flags = vec![induced_flag(&g, &tol()).unwrap()];
        let data = ParabolicData::new(2, flags, vec![zero_interior_weights(2)], &tol()).unwrap();
        assert_eq!(pardeg_of(&data, 5), rat_int(5));
    }

    #[test]
    fn hecke_preserves_pardeg() {
        // n=1, weight (1/2): delta0 + 1/2 = (delta0 + 1) - 1/2
        let f = vec![vec![CMatrix::identity(1), CMatrix::identity(1)]];
        let w = vec![vec![rat(1, 2), rat(1, 2), rat(-1, 2)]];
        let data = ParabolicData::new(1, f, w, &tol()).unwrap();
        let before = pardeg_of(&data, 0);
        let (shifted, d0) = hecke_shift(&data, 0, 0, &tol()).unwrap();
        assert_eq!(d0, 1);
        assert_eq!(pardeg_of(&shifted, d0), before);

        // n=2, weights (1/2, a, -1/2) with F_0 of dim 1
        let dims = vec![vec![1usize, 1, 2]];
        let w = vec![vec![rat(1, 2), rat(1, 4), rat(-1, 2), rat(-1, 2)]];
        let data = ParabolicData::standard(2, &dims, w, &tol()).unwrap();
        let before = pardeg_of(&data, 2);
        let (shifted, d0) = hecke_shift(&data, 2, 0, &tol()).unwrap();
        assert_eq!(d0, 3);
        assert_eq!(pardeg_of(&shifted, d0), before);
        assert_eq!(shifted.dims(0), vec![0, 0, 1]);
    }

    #[test]
    fn hecke_requires_top_block() {
        let g = Plane::from_graph(&CMatrix::identity(2), &tol()).unwrap();
        let flags = vec![induced_flag(&g, &tol()).unwrap()];
        let data = ParabolicData::new(2, flags, vec![zero_interior_weights(2)], &tol()).unwrap();
        assert!(matches!(
            hecke_shift(&data, 0, 0, &tol()),
            Err(Error::NothingToShift(0))
        ));
    }

    #[test]
    fn moduli_moment_routes_agree() {
        // identity evaluations: xi = gamma, so the moment equals the plane's
        // left moment
        let mut rng = SeededRng::new(9);
        let n = 2;
        let gamma = random_matrix(n, n, &mut rng);
        let g = Plane::from_graph(&gamma, &tol()).unwrap();
        let enc = FramedEncoding::from_fiber_planes(
            vec![CMatrix::identity(n)],
            std::slice::from_ref(&g),
            0,
            0,
            10_000,
            &tol(),
        )
        .unwrap();
        let mm = moduli_moment(&enc);
        let direct = moment_left(&g, &tol());
        assert!(mm[0].sub(&direct).frobenius_norm() < 1e-10);

        // unitary graph: moment vanishes
        let gu = Plane::from_graph(&haar_unitary(n, &mut rng), &tol()).unwrap();
        let enc = FramedEncoding::from_fiber_planes(
            vec![CMatrix::identity(n)],
            &[gu],
            0,
            0,
            10_000,
            &tol(),
        )
        .unwrap();
        assert!(moduli_moment(&enc)[0].frobenius_norm() < 1e-10);
    }

    /// Build a plane on the moment level of a given diagonal delta:
    /// kernel of the pattern, rotated by a random E-side unitary.
    fn level_plane(diag: &[f64], rng: &mut SeededRng) -> (Plane, CMatrix) {
        let n = diag.len();
        let delta = CMatrix::diag_real(diag);
        let half = CMatrix::identity(n).scale(Complex64::new(0.5, 0.0));
        let b_star = hermitian_sqrt_psd(&half.sub(&delta));
        let d_star = hermitian_sqrt_psd(&half.add(&delta));
        let g = Plane::from_annihilator(&b_star, &d_star, &tol()).unwrap();
        let u = haar_unitary(n, rng);
        (g.act_first(&u), delta)
    }

    use crate::linalg::hermitian_sqrt_psd;

    #[test]
    fn normal_form_of_zero_delta() {
        let mut rng = SeededRng::new(15);
        let (g, delta) = level_plane(&[0.0, 0.0], &mut rng);
        let nf = normal_form(&g, &delta, &tol()).unwrap();
        assert_eq!((nf.s, nf.r, nf.t), (0, 2, 0));
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..2 {
            assert!((nf.m_diag[j] - inv_sqrt2).abs() < 1e-10);
            assert!((nf.rho_star[(j, 2 + j)].re - inv_sqrt2).abs() < 1e-10);
        }
        assert!(nf.residual < 1e-9);
    }

    #[test]
    fn normal_form_generic_and_boundary() {
        let mut rng = SeededRng::new(16);
        // distinct interior eigenvalues
        let (g, delta) = level_plane(&[0.3, 0.1, -0.2], &mut rng);
        let nf = normal_form(&g, &delta, &tol()).unwrap();
        assert_eq!((nf.s, nf.r, nf.t), (0, 3, 0));
        for j in 0..3 {
            let want = (0.5_f64 - nf.delta_hat[j]).sqrt();
            assert!((nf.m_diag[j] - want).abs() < 1e-10);
        }
        // boundary blocks: one +1/2 and one -1/2 eigenvalue
        let (g, delta) = level_plane(&[0.5, 0.1, -0.5], &mut rng);
        let nf = normal_form(&g, &delta, &tol()).unwrap();
        assert_eq!((nf.s, nf.r, nf.t), (1, 1, 1));
        assert!((nf.rho_star[(0, 3)].re - 1.0).abs() < 1e-9);
        assert!((nf.rho_star[(2, 2)].re - 1.0).abs() < 1e-9);
        assert!(nf.residual < 1e-8);
    }

    #[test]
    fn normal_form_idempotent() {
        let mut rng = SeededRng::new(17);
        let (g, delta) = level_plane(&[0.25, 0.25, -0.1], &mut rng);
        let nf = normal_form(&g, &delta, &tol()).unwrap();
        // the reconstruction undoes the E-side change of basis
        let recon = normal_form_reconstruct(&nf, &tol()).unwrap();
        assert!(g.gap(&recon) < 1e-8, "reconstruction gap {}", g.gap(&recon));
        // re-running on the normalized plane is the identity
        let std_pos = normal_form_plane(&nf, &tol()).unwrap();
        let nf2 = normal_form(&std_pos, &delta, &tol()).unwrap();
        assert!(nf2.rho_star.sub(&nf.rho_star).frobenius_norm() < 1e-9);
        assert!(
            nf2.e_side.sub(&CMatrix::identity(3)).frobenius_norm() < 1e-7,
            "e_side defect {}",
            nf2.e_side.sub(&CMatrix::identity(3)).frobenius_norm()
        );
    }

    #[test]
    fn normal_form_moment_mismatch() {
        let mut rng = SeededRng::new(18);
        let (g, _) = level_plane(&[0.3, -0.3], &mut rng);
        let wrong = CMatrix::diag_real(&[0.1, 0.0]);
        assert!(matches!(
            normal_form(&g, &wrong, &tol()),
            Err(Error::MomentMismatch { .. })
        ));
    }

    #[test]
    fn reconstruction_up_to_stabilizer() {
        // two planes with the same moment and flag differ by a
        // flag-stabilizing unitary on E
        let mut rng = SeededRng::new(19);
        let (g1, delta) = level_plane(&[0.2, 0.2, -0.3], &mut rng);
        // stabilizer of the flag pieces: block-diagonal in the adapted frame
        let nf1 = normal_form(&g1, &delta, &tol()).unwrap();
        let mut stab = CMatrix::zeros(3, 3);
        let u2 = haar_unitary(2, &mut rng);
        stab.set_block(0, 0, &u2);
        let u1 = haar_unitary(1, &mut rng);
        stab.set_block(2, 2, &u1);
        let gstab = nf1.e_side.matmul(&stab).matmul(&nf1.e_side.adjoint());
        let g2 = g1.act_first(&gstab);
        let nf2 = normal_form(&g2, &delta, &tol()).unwrap();
        assert!(nf2.rho_star.sub(&nf1.rho_star).frobenius_norm() < 1e-9);
        // the relating element preserves each flag piece
        // rel need not equal gstab exactly (within-cluster freedom), but it
        // must stabilize the adapted blocks
        let rel = nf2.e_side.matmul(&nf1.e_side.adjoint());
        let in_frame = nf1.e_side.adjoint().matmul(&rel).matmul(&nf1.e_side);
        for i in 0..3 {
            for j in 0..3 {
                let in_cluster = (i < 2) == (j < 2);
                if !in_cluster {
                    assert!(in_frame[(i, j)].norm() < 1e-7, "off-block at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn genus0_two_point_scalar() {
        let (delta, gamma1) =
            genus0_two_point_normalize(&CMatrix::diag_real(&[2.0]), &tol()).unwrap();
        assert!((delta[(0, 0)].re + 0.6).abs() < 1e-12);
        assert!((gamma1[(0, 0)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn genus0_two_point_residual() {
        let mut rng = SeededRng::new(21);
        for n in 1..=3 {
            let g2 = random_matrix(n, n, &mut rng)
                .add(&CMatrix::identity(n).scale(Complex64::new(2.0, 0.0)));
            let (delta, g1) = genus0_two_point_normalize(&g2, &tol()).unwrap();
            // (-I + g1* g1)(I + g1* g1)^{-1} = delta
            let gsg = g1.adjoint().matmul(&g1);
            let lhs = CMatrix::identity(n)
                .scale(-ONE)
                .add(&gsg)
                .matmul(&CMatrix::identity(n).add(&gsg).inverse().unwrap());
            assert!(lhs.sub(&delta).frobenius_norm() < 1e-9, "n={n}");
            // and = -(-I + g2* g2)(I + g2* g2)^{-1}
            let gsg2 = g2.adjoint().matmul(&g2);
            let rhs = CMatrix::identity(n)
                .scale(-ONE)
                .add(&gsg2)
                .matmul(&CMatrix::identity(n).add(&gsg2).inverse().unwrap())
                .scale(-ONE);
            assert!(lhs.sub(&rhs).frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn genus0_rejects_singular() {
        let g2 = CMatrix::diag_real(&[1.0, 0.0]);
        assert!(matches!(
            genus0_two_point_normalize(&g2, &tol()),
            Err(Error::BoundaryDegenerate(_))
        ));
    }

    #[test]
    fn transfer_preserves_structure() {
        let mut rng = SeededRng::new(22);
        let n = 3;
        let gamma = random_matrix(n, n, &mut rng);
        let g = Plane::from_graph(&gamma, &tol()).unwrap();
        let f = haar_unitary(n, &mut rng);
        let delta = CMatrix::zeros(n, n);
        // identity transfer
        let same = transfer_plane(&g, &delta, &CMatrix::identity(n), &tol()).unwrap();
        assert!(g.gap(&same) < 1e-12);
        // moment_left preserved, s and t preserved
        let moved = transfer_plane(&g, &delta, &f, &tol()).unwrap();
        let m1 = moment_left(&g, &tol());
        let m2 = moment_left(&moved, &tol());
        assert!(m1.sub(&m2).frobenius_norm() < 1e-9);
        assert_eq!(
            g.intersection_dims(&tol()).unwrap(),
            moved.intersection_dims(&tol()).unwrap()
        );
        // graph law: new graph map is gamma . f
        let got = moved.to_graph(&tol()).unwrap();
        let want = gamma.matmul(&f);
        assert!(got.sub(&want).frobenius_norm() < 1e-9);
    }

    #[test]
    fn parabolic_semistable_rank2_split() {
        // rank-2 split (0,0), graph framings, zero interior weights, l=2:
        // every rank-1 witness has slope 0 vs slope 0: strictly semistable
        let mut rng = SeededRng::new(23);
        let g: Vec<Plane> = (0..2)
            .map(|_| Plane::from_graph(&haar_unitary(2, &mut rng), &tol()).unwrap())
            .collect();
        let model = FramedBundleModel::new(0, 2, 0, g, Some(vec![0, 0]), &tol()).unwrap();
        let data = induced_parabolic(&model, vec![zero_interior_weights(2); 2], &tol()).unwrap();
        let wits = crate::framed::enumerate_witnesses_genus0(&model, 2, 5, &tol()).unwrap();
        let verdict = parabolic_semistable(&model, &data, &wits, &tol()).unwrap();
        assert_eq!(verdict, Verdict::Semistable);
        // rank 1: no proper witnesses, vacuously stable
        let g1 = vec![Plane::from_graph(&CMatrix::identity(1), &tol()).unwrap()];
        let m1 = FramedBundleModel::new(0, 1, 0, g1, Some(vec![0]), &tol()).unwrap();
        let d1 = induced_parabolic(&m1, vec![zero_interior_weights(1)], &tol()).unwrap();
        assert_eq!(
            parabolic_semistable(&m1, &d1, &[], &tol()).unwrap(),
            Verdict::Stable
        );
    }

    #[test]
    fn vertex_stability_implies_framed() {
        // spot-check of the vertex property on one configuration
        let mut rng = SeededRng::new(29);
        let n = 2;
        let g: Vec<Plane> = (0..2)
            .map(|_| Plane::from_graph(&haar_unitary(n, &mut rng), &tol()).unwrap())
            .collect();
        let model = FramedBundleModel::new(0, n, 0, g, Some(vec![0, 0]), &tol()).unwrap();
        let wits = crate::framed::enumerate_witnesses_genus0(&model, 2, 31, &tol()).unwrap();
        let mut all_vertices_ok = true;
        for k0 in 0..=n {
            for k1 in 0..=n {
                let weights = vec![vertex_weights(n, k0), vertex_weights(n, k1)];
                let data = induced_parabolic(&model, weights, &tol()).unwrap();
                let v = parabolic_semistable(&model, &data, &wits, &tol()).unwrap();
                if v == Verdict::Unstable {
                    all_vertices_ok = false;
                }
            }
        }
        if all_vertices_ok {
            let rep = crate::framed::check_semistable(&model, &wits, Certificate::Sampled, &tol())
                .unwrap();
            assert_ne!(rep.verdict, Verdict::Unstable);
        }
    }
}
