//! Generalized parabolic bundles: a rank-n bundle with an n-plane in
//! E_{p_i} + E_{q_i} over each point pair, modeling descent to a nodal
//! curve. Composition glues framed planes at p and q over the shared
//! framing space,
//!
//!   g = R((g^p + g^q) cap (E_p + E_q + Diagonal)),
//!
//! defined when R^p(g^p) + R^q(g^q) = C^n and g^p cap C^n cap g^q = 0; for
//! graphs it is the graph of f^q o f^p. The same composition exists on
//! Pluecker vectors (contraction of the wedge against the framing covolume)
//! and in the unitary normalization of moment-level annihilator rows.

use crate::error::{Error, Result};
use crate::git_weights::Verdict;
use crate::grassmann::{binomial, intersect_subspaces, subsets_lex, Plane, PluckerVector};
use crate::linalg::{
    eig_hermitian, gram_schmidt_complete, numeric_rank, orthonormal_columns, CMatrix, Tolerance,
    ONE, ZERO,
};
use crate::rational::{rat_int, rat_sign, Rat};
use num_complex::Complex64;

/// An n-plane in E_p + E_q = C^n + C^n over a point pair.
#[derive(Debug, Clone)]
pub struct GPBPlane(pub Plane);

impl GPBPlane {
    pub fn new(plane: Plane) -> Result<Self> {
        let n = plane.dim_first();
        if plane.dim_second() != n || plane.k() != n {
            return Err(Error::ShapeMismatch(
                "GPB plane must be an n-plane in C^n + C^n".into(),
            ));
        }
        Ok(GPBPlane(plane))
    }
}

/// A generalized parabolic bundle: rank, degree, genus, and one plane per
/// point pair. The weights are fixed at (1/2, -1/2).
#[derive(Debug, Clone)]
pub struct GPBundle {
    pub genus: usize,
    pub n: usize,
    pub delta0: i64,
    pub ell: usize,
    pub planes: Vec<GPBPlane>,
}

impl GPBundle {
    pub fn new(genus: usize, n: usize, delta0: i64, planes: Vec<GPBPlane>) -> Result<Self> {
        let ell = planes.len();
        for (i, p) in planes.iter().enumerate() {
            if p.0.dim_first() != n {
                return Err(Error::ShapeMismatch(format!("plane {i} rank")));
            }
        }
        Ok(GPBundle {
            genus,
            n,
            delta0,
            ell,
            planes,
        })
    }
}

/// Subbundle witness over point pairs: fibers at every p_i and q_i.
#[derive(Debug, Clone)]
pub struct PairWitness {
    pub n_prime: usize,
    pub delta0_prime: i64,
    pub fibers_p: Vec<CMatrix>,
    pub fibers_q: Vec<CMatrix>,
}

impl PairWitness {
    pub fn new(
        n_prime: usize,
        delta0_prime: i64,
        fibers_p: Vec<CMatrix>,
        fibers_q: Vec<CMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if n_prime == 0 || fibers_p.len() != fibers_q.len() {
            return Err(Error::ShapeMismatch("pair witness shape".into()));
        }
        for f in fibers_p.iter().chain(&fibers_q) {
            if f.cols() != n_prime {
                return Err(Error::ShapeMismatch("pair witness fiber rank".into()));
            }
            let defect = f.orthonormality_defect();
            if defect > tol.residual_abs.max(1e-12) * 10.0 {
                return Err(Error::InvalidFrame {
                    residual: defect,
                    tol: tol.residual_abs,
                });
            }
        }
        Ok(PairWitness {
            n_prime,
            delta0_prime,
            fibers_p,
            fibers_q,
        })
    }
}

/// Compose framed planes at a point pair into a GPB plane. Coordinates on
/// C^{4n} are (e_p, e_q, b_p, b_q); the intersection of g^p + g^q with
/// E_p + E_q + Diagonal is projected to (e_p, e_q).
pub fn compose_planes(gp: &Plane, gq: &Plane, tol: &Tolerance) -> Result<GPBPlane> {
    let n = gp.dim_first();
    if gp.dim_second() != n
        || gq.dim_first() != n
        || gq.dim_second() != n
        || gp.k() != n
        || gq.k() != n
    {
        return Err(Error::ShapeMismatch(
            "composition needs two n-planes in C^n + C^n".into(),
        ));
    }
    // condition (1): the framing projections span C^n
    let rp = gp.basis().block(n, 2 * n, 0, n);
    let rq = gq.basis().block(n, 2 * n, 0, n);
    let span = numeric_rank(&rp.hstack(&rq), tol)?;
    if span < n {
        return Err(Error::SpanDeficient { got: span, need: n });
    }

    // A = g^p + g^q in (e_p, e_q, b_p, b_q) coordinates
    let mut a = CMatrix::zeros(4 * n, 2 * n);
    for c in 0..n {
        for i in 0..n {
            a[(i, c)] = gp.basis()[(i, c)]; // e_p block
            a[(2 * n + i, c)] = gp.basis()[(n + i, c)]; // b_p block
            a[(n + i, n + c)] = gq.basis()[(i, c)]; // e_q block
            a[(3 * n + i, n + c)] = gq.basis()[(n + i, c)]; // b_q block
        }
    }
    // B = E_p + E_q + Diagonal
    let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut b = CMatrix::zeros(4 * n, 3 * n);
    for i in 0..n {
        b[(i, i)] = ONE;
        b[(n + i, n + i)] = ONE;
        b[(2 * n + i, 2 * n + i)] = inv_sqrt2;
        b[(3 * n + i, 2 * n + i)] = inv_sqrt2;
    }
    let meet = intersect_subspaces(&a, &b, tol);
    if meet.cols() != n {
        return Err(Error::SpanDeficient {
            got: 5 * n - meet.cols(),
            need: 4 * n,
        });
    }
    // condition (2): the projection to (e_p, e_q) keeps full dimension
    let projected = meet.block(0, 2 * n, 0, n);
    let rank = numeric_rank(&projected, tol)?;
    if rank < n {
        return Err(Error::DiagonalKernel(n - rank));
    }
    GPBPlane::new(Plane::from_span(n, n, &projected, tol)?)
}

/// Pluecker-level composition: project beta_p wedge beta_q onto the
/// Lambda^n(V*) (x) Lambda^n(C^n) summand and contract the framing
/// covolume. Ambient indices 0..p are V*, p..p+n the framing C^n.
pub fn plucker_compose(
    beta_p: &PluckerVector,
    beta_q: &PluckerVector,
    tol: &Tolerance,
) -> Result<PluckerVector> {
    if beta_p.ambient != beta_q.ambient || beta_p.k != beta_q.k {
        return Err(Error::ShapeMismatch("Pluecker operands disagree".into()));
    }
    let amb = beta_p.ambient;
    let nk = beta_p.k;
    let p = amb - nk; // dim V*
    if binomial(amb, 2 * nk) > crate::grassmann::PLUCKER_CAP {
        return Err(Error::TooLarge(binomial(amb, 2 * nk)));
    }

    let subsets_n = subsets_lex(amb, nk);
    let index_of: std::collections::HashMap<Vec<usize>, usize> = subsets_lex(amb, 2 * nk)
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    let mut wedge = vec![ZERO; index_of.len()];

    for (si, s) in subsets_n.iter().enumerate() {
        let a = beta_p.coords[si];
        if a.norm() == 0.0 {
            continue;
        }
        for (ti, t) in subsets_n.iter().enumerate() {
            let b = beta_q.coords[ti];
            if b.norm() == 0.0 {
                continue;
            }
            if s.iter().any(|x| t.contains(x)) {
                continue;
            }
            let mut merged: Vec<usize> = s.iter().chain(t.iter()).copied().collect();
            // sign of the sort permutation
            let mut sign = 1.0;
            for i in 0..merged.len() {
                for j in i + 1..merged.len() {
                    if merged[i] > merged[j] {
                        sign = -sign;
                    }
                }
            }
            merged.sort_unstable();
            let idx = index_of[&merged];
            wedge[idx] += a * b * Complex64::new(sign, 0.0);
        }
    }

    let wedge_max = wedge.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = beta_p
        .coords
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    if wedge_max <= tol.residual_abs.max(1e-10) * scale {
        return Err(Error::SpanDeficient { got: 0, need: nk });
    }

    // keep monomials containing the full framing block {p, .., p+n-1};
    // in ascending order they factor as e_{U_V} ^ e_{C-full}, so the
    // contraction is coefficient extraction up to one global sign.
    let framing: Vec<usize> = (p..amb).collect();
    let out_subsets = subsets_lex(p, nk);
    let mut coords = Vec::with_capacity(out_subsets.len());
    for uv in &out_subsets {
        let mut merged: Vec<usize> = uv.iter().copied().chain(framing.iter().copied()).collect();
        merged.sort_unstable();
        coords.push(wedge[index_of[&merged]]);
    }
    let out_max = coords.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if out_max <= tol.residual_abs.max(1e-10) * wedge_max {
        return Err(Error::DiagonalKernel(0));
    }
    Ok(PluckerVector {
        ambient: p,
        k: nk,
        coords,
    }
    .normalize())
}

/// Parabolic degree of a subbundle witness against a GPB:
/// pardeg(E') = delta0' + sum_i (dim((E'_p + E'_q) cap g_i) - n'). The full
/// bundle uses n' = n and fibers equal to everything.
pub fn gpb_pardeg(bundle: &GPBundle, wit: &PairWitness, tol: &Tolerance) -> Result<Rat> {
    if wit.fibers_p.len() != bundle.ell {
        return Err(Error::ShapeMismatch("witness pair count".into()));
    }
    let n = bundle.n;
    let mut acc = rat_int(wit.delta0_prime as i128);
    for i in 0..bundle.ell {
        let mut fibers = CMatrix::zeros(2 * n, 2 * wit.n_prime);
        fibers.set_block(0, 0, &wit.fibers_p[i]);
        fibers.set_block(n, wit.n_prime, &wit.fibers_q[i]);
        let meet = intersect_subspaces(&fibers, bundle.planes[i].0.basis(), tol);
        acc = acc + rat_int(meet.cols() as i128) - rat_int(wit.n_prime as i128);
    }
    Ok(acc)
}

/// Parabolic degree of the full bundle: delta0 (the planes meet E_p + E_q
/// in full dimension).
pub fn gpb_pardeg_full(bundle: &GPBundle) -> Rat {
    rat_int(bundle.delta0 as i128)
}

/// Degree bound under which semistable (not just stable) GPBs still admit
/// the framed factorization through a point pair: delta0 <= 2 ell + n/2.
pub fn semistable_degree_bound_ok(bundle: &GPBundle) -> bool {
    rat_int(2 * bundle.delta0 as i128)
        <= rat_int(4 * bundle.ell as i128) + rat_int(bundle.n as i128)
}

/// Slope semistability pardeg(E')/n' <= pardeg(E)/n over the witness list.
pub fn gpb_semistable(
    bundle: &GPBundle,
    witnesses: &[PairWitness],
    tol: &Tolerance,
) -> Result<Verdict> {
    let slope = gpb_pardeg_full(bundle) / rat_int(bundle.n as i128);
    let mut strict = true;
    for wit in witnesses {
        let sub_slope = gpb_pardeg(bundle, wit, tol)? / rat_int(wit.n_prime as i128);
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

/// Unitary composition of two moment-level framed planes given by
/// orthonormal annihilator rows (b_p*, d_p*), (b_q*, d_q*) with
/// d_p d_p* + d_q d_q* = I. Returns the composed plane's orthonormal rows
/// over (E_p, E_q) and the diagonal D = spec(d_p d_p*).
///
/// The normalization diagonalizes d_p d_p* to D, takes unitaries u_p, u_q
/// with u d_p u_p^{-1} = D^{1/2}, u d_q u_q^{-1} = (I-D)^{1/2}, and forms
/// ((I-D)^2 + D^2)^{-1/2} ( (I-D)^{1/2} u_p b_p* , -D^{1/2} u_q b_q* ).
/// D entries at 0 or 1 route the corresponding row through from one side.
pub fn unitary_compose(
    bp_star: &CMatrix,
    dp_star: &CMatrix,
    bq_star: &CMatrix,
    dq_star: &CMatrix,
    tol: &Tolerance,
) -> Result<(CMatrix, Vec<f64>)> {
    let n = dp_star.rows();
    for m in [bp_star, dp_star, bq_star, dq_star] {
        if m.rows() != n || m.cols() != n {
            return Err(Error::ShapeMismatch(
                "unitary_compose needs n x n blocks".into(),
            ));
        }
    }
    for (b, d) in [(bp_star, dp_star), (bq_star, dq_star)] {
        let rows = b.hstack(d);
        let defect = rows.adjoint().orthonormality_defect();
        if defect > tol.residual_abs.max(1e-12) * 100.0 {
            return Err(Error::InvalidFrame {
                residual: defect,
                tol: tol.residual_abs,
            });
        }
    }
    // moment constraint d_p d_p* + d_q d_q* = I
    let dpp = dp_star.adjoint().matmul(dp_star);
    let dqq = dq_star.adjoint().matmul(dq_star);
    let residual = dpp.add(&dqq).sub(&CMatrix::identity(n)).frobenius_norm();
    let mtol = tol.residual_abs.max(1e-9) * 100.0;
    if residual > mtol {
        return Err(Error::MomentMismatch {
            residual,
            tol: mtol,
        });
    }

    let (lam, u_frame) = eig_hermitian(&dpp);
    let u = u_frame.adjoint(); // u dpp u^{-1} = diag(lam)
    let d_diag: Vec<f64> = lam.iter().map(|&x| x.clamp(0.0, 1.0)).collect();

    let boundary = 1e-9;
    // u_p rows: normalized rows of u d_p, completed where D_j ~ 0
    let x_p = u.matmul(&dp_star.adjoint()); // u d_p
    let x_q = u.matmul(&dq_star.adjoint()); // u d_q
    let build_rows = |x: &CMatrix, scale: &dyn Fn(usize) -> f64| -> CMatrix {
        let mut known: Vec<Vec<Complex64>> = Vec::new();
        let mut which = Vec::new();
        for j in 0..n {
            let s = scale(j);
            if s > boundary {
                let row: Vec<Complex64> = (0..n).map(|c| x[(j, c)].conj() / s.sqrt()).collect();
                known.push(row);
                which.push(j);
            }
        }
        // complete to a unitary for the boundary rows
        let full = gram_schmidt_complete(n, &known);
        let mut rows = CMatrix::zeros(n, n);
        let mut next_extra = known.len();
        let mut taken = vec![false; n];
        for (kidx, &j) in which.iter().enumerate() {
            for c in 0..n {
                rows[(j, c)] = full[(c, kidx)].conj();
            }
            taken[j] = true;
        }
        for j in 0..n {
            if !taken[j] {
                for c in 0..n {
                    rows[(j, c)] = full[(c, next_extra)].conj();
                }
                next_extra += 1;
            }
        }
        rows
    };
    let u_p = build_rows(&x_p, &|j| d_diag[j]);
    let u_q = build_rows(&x_q, &|j| 1.0 - d_diag[j]);

    let mut rows = CMatrix::zeros(n, 2 * n);
    let left = u_p.matmul(bp_star);
    let right = u_q.matmul(bq_star);
    for j in 0..n {
        let d = d_diag[j];
        let norm = ((1.0 - d) * (1.0 - d) + d * d).sqrt();
        let cl = (1.0 - d).sqrt() / norm;
        let cr = -d.sqrt() / norm;
        for c in 0..n {
            rows[(j, c)] = left[(j, c)] * Complex64::new(cl, 0.0);
            rows[(j, n + c)] = right[(j, c)] * Complex64::new(cr, 0.0);
        }
    }
    let defect = rows.adjoint().orthonormality_defect();
    if defect > tol.residual_abs.max(1e-9) * 100.0 {
        return Err(Error::InvalidFrame {
            residual: defect,
            tol: tol.residual_abs,
        });
    }
    Ok((rows, d_diag))
}

/// Certificate of instability from a common framing vector: the
/// one-parameter subgroup putting weight p+n-1 on the common dual direction
/// and -1 on every other dual basis vector of V* and C^n* drives all
/// coordinates of (alpha, beta_p, beta_q) to zero.
#[derive(Debug, Clone)]
pub struct DestabilizingCertificate {
    /// Dual-basis weight on e_1* (the common direction).
    pub weight_common: i64,
    /// Dual-basis weight elsewhere.
    pub weight_rest: i64,
    /// Minimum monomial weight of alpha, beta_p, beta_q (all equal n here:
    /// no nonzero monomial contains e_1*).
    pub min_weights: [i64; 3],
    /// The Hilbert-Mumford weight -min, negative iff destabilizing.
    pub hm_weight: i64,
}

/// Build the destabilizing 1-PS certificate for a pair of framed planes
/// sharing a nonzero framing vector. `p_dim` is dim V of the ambient
/// encoding; `common` is the shared vector of C^n.
pub fn find_destabilizing_1ps(
    gp: &Plane,
    gq: &Plane,
    p_dim: usize,
    common: &[Complex64],
    tol: &Tolerance,
) -> Result<DestabilizingCertificate> {
    let n = gp.dim_second();
    if common.len() != n {
        return Err(Error::ShapeMismatch("common vector length".into()));
    }
    let norm: f64 = common.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::InvalidMatrix("common vector must be nonzero".into()));
    }
    // membership of (0, common) in both planes
    for (name, g) in [("g_p", gp), ("g_q", gq)] {
        let mut v = CMatrix::zeros(2 * n, 1);
        for i in 0..n {
            v[(n + i, 0)] = common[i] / norm;
        }
        let proj = g.basis().matmul(&g.basis().adjoint().matmul(&v));
        let residual = proj.sub(&v).frobenius_norm();
        if residual > tol.residual_abs.max(1e-9) * 100.0 {
            return Err(Error::InvalidMatrix(format!(
                "common vector not in {name} (residual {residual:e})"
            )));
        }
    }
    // every annihilator functional kills (0, e_1), so no nonzero monomial
    // of alpha, beta_p, beta_q contains e_1*: minimum weights are all n
    let weight_common = (p_dim + n - 1) as i64;
    let min_w = n as i64;
    Ok(DestabilizingCertificate {
        weight_common,
        weight_rest: -1,
        min_weights: [min_w, min_w, min_w],
        hm_weight: -min_w,
    })
}

/// Plane in E + C^n parametrized from the framing side: span of the columns
/// of (f; I) for f: C^n -> E.
pub fn plane_from_cograph(f: &CMatrix, tol: &Tolerance) -> Result<Plane> {
    let n = f.cols();
    let m = f.rows();
    let span = f.vstack(&CMatrix::identity(n));
    let basis = orthonormal_columns(&span, tol.rank_rel);
    Plane::from_orthonormal_basis(m, n, basis, tol)
}
