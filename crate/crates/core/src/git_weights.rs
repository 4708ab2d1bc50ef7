//! Hilbert-Mumford weight calculus for the SL(V) and C* actions on encoded
//! framed bundles.
//!
//! A pair (E, g) with p = h^0(E) is encoded as evaluation maps
//! ev_i: V -> E_{p_i} together with n-planes beta_i in V* + C^n. A
//! one-parameter subgroup probe is the choice of a p'-dimensional subspace
//! W of V; its weights are
//!
//!   w_{W,alpha}  = p n' - p' n,
//!   w_{W,beta_i} = p t'_i - p' t_i + r'_i (p - p'),
//!   w_W          = w_alpha + eta * sum_i w_beta_i,   eta = 1/(k - g + 1/2),
//!
//! where (s', t', r', m') are the per-point invariants of E_W = ev(W)
//! against the framing plane. All weights are exact integers/rationals.

use crate::error::{Error, Result};
use crate::exact::QMatrix;
use crate::grassmann::Plane;
use crate::linalg::{self, numeric_rank, orthonormal_columns, CMatrix, Tolerance};
use crate::rational::{rat, rat_int, rat_sign, Rat, RatWire};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// The (alpha, beta) datum of an encoded framed bundle: V = C^p with
/// evaluation maps onto the fibers and framing planes in V* + C^n.
#[derive(Debug, Clone)]
pub struct FramedEncoding {
    pub p: usize,
    pub n: usize,
    pub ell: usize,
    /// Evaluation maps V -> E_{p_i}, each n x p and surjective.
    pub ev: Vec<CMatrix>,
    /// Framing planes beta_i in V* + C^n, each of dimension n.
    pub beta: Vec<Plane>,
    pub delta0: i64,
    pub genus: usize,
    /// The twisting integer k entering eta = 1/(k - g + 1/2).
    pub twist_k: i64,
}

impl FramedEncoding {
    pub fn new(
        ev: Vec<CMatrix>,
        beta: Vec<Plane>,
        delta0: i64,
        genus: usize,
        twist_k: i64,
        tol: &Tolerance,
    ) -> Result<Self> {
        if ev.is_empty() || ev.len() != beta.len() {
            return Err(Error::ShapeMismatch("ev/beta length mismatch".into()));
        }
        let n = ev[0].rows();
        let p = ev[0].cols();
        for (i, e) in ev.iter().enumerate() {
            if e.rows() != n || e.cols() != p {
                return Err(Error::ShapeMismatch(format!("ev[{i}] shape")));
            }
            // generically generated by sections: each evaluation surjective
            if numeric_rank(e, tol)? != n {
                return Err(Error::InvalidMatrix(format!("ev[{i}] not surjective")));
            }
        }
        for (i, b) in beta.iter().enumerate() {
            if b.dim_first() != p || b.dim_second() != n || b.k() != n {
                return Err(Error::ShapeMismatch(format!("beta[{i}] shape")));
            }
            // ker(ev_i) must lie in the kernel of beta_i: the V*-components
            // of the framing functionals vanish on ker(ev_i).
            let kernel = linalg::nullspace(&ev[i], tol.rank_rel);
            let v_block = b.basis().block(0, p, 0, n);
            let residual = v_block.adjoint().matmul(&kernel).frobenius_norm();
            if residual > tol.residual_abs.max(1e-12) * 100.0 {
                return Err(Error::InvalidFrame {
                    residual,
                    tol: tol.residual_abs,
                });
            }
        }
        Ok(FramedEncoding {
            p,
            n,
            ell: ev.len(),
            ev,
            beta,
            delta0,
            genus,
            twist_k,
        })
    }

    /// Encode fiber planes g_i in E_{p_i} + C^n through the evaluation maps:
    /// beta_i is the orthocomplement of the pullback of g_i to V + C^n.
    pub fn from_fiber_planes(
        ev: Vec<CMatrix>,
        planes: &[Plane],
        delta0: i64,
        genus: usize,
        twist_k: i64,
        tol: &Tolerance,
    ) -> Result<Self> {
        let mut beta = Vec::with_capacity(planes.len());
        for (e, g) in ev.iter().zip(planes) {
            let p = e.cols();
            let n = e.rows();
            if g.dim_first() != n || g.dim_second() != n || g.k() != n {
                return Err(Error::ShapeMismatch(
                    "fiber plane must be an n-plane in C^n + C^n".into(),
                ));
            }
            let (b_star, d_star) = g.annihilator(tol);
            // rows of the pulled-back annihilator: (b* ev | d*)
            let pulled = b_star.matmul(e).hstack(&d_star);
            let basis = orthonormal_columns(&pulled.adjoint(), tol.rank_rel);
            beta.push(Plane::from_orthonormal_basis(p, n, basis, tol)?);
        }
        FramedEncoding::new(ev, beta, delta0, genus, twist_k, tol)
    }

    /// Recover the fiber plane g_i = (ev_i + id)(ker beta_i) in C^n + C^n.
    pub fn fiber_plane(&self, i: usize, tol: &Tolerance) -> Result<Plane> {
        let ghat = linalg::nullspace(&self.beta[i].basis().adjoint(), tol.rank_rel);
        let top = self.ev[i].matmul(&ghat.block(0, self.p, 0, ghat.cols()));
        let bottom = ghat.block(self.p, self.p + self.n, 0, ghat.cols());
        Plane::from_span(self.n, self.n, &top.vstack(&bottom), tol)
    }

    /// eta = 1/(k - g + 1/2) as an exact rational.
    pub fn eta(&self) -> Rat {
        rat(2, 2 * self.twist_k as i128 - 2 * self.genus as i128 + 1)
    }
}

/// A one-parameter-subgroup probe: W with orthonormal columns, together with
/// the rank and degree of the subsheaf it generates. n' and delta0' are
/// witness inputs: the subsheaf E_W is not recoverable from the finite
/// encoding alone.
#[derive(Debug, Clone)]
pub struct SubspaceWitness {
    pub w: CMatrix,
    pub n_prime: usize,
    pub delta0_prime: i64,
}

impl SubspaceWitness {
    pub fn new(w: CMatrix, n_prime: usize, delta0_prime: i64, tol: &Tolerance) -> Result<Self> {
        let defect = w.orthonormality_defect();
        if defect > tol.residual_abs.max(1e-12) * 10.0 {
            return Err(Error::InvalidFrame {
                residual: defect,
                tol: tol.residual_abs,
            });
        }
        if w.cols() == 0 || n_prime == 0 {
            return Err(Error::ShapeMismatch(
                "witness must have p' >= 1, n' >= 1".into(),
            ));
        }
        Ok(SubspaceWitness {
            w,
            n_prime,
            delta0_prime,
        })
    }
}

/// Per-point invariants of E_W against a framing plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointInvariants {
    pub s: usize,
    pub t: usize,
    pub r: usize,
    pub m: usize,
}

/// The full weight report for one witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightReport {
    pub p: usize,
    pub p_prime: usize,
    pub n: usize,
    pub n_prime: usize,
    pub delta0: i64,
    pub delta0_prime: i64,
    pub genus: usize,
    pub twist_k: i64,
    pub w_alpha: i64,
    pub w_beta: Vec<i64>,
    pub per_point: Vec<PointInvariants>,
    /// t_i of the ambient framing planes.
    pub t_full: Vec<usize>,
    pub w_w: RatWire,
    pub w_w_k: RatWire,
    pub w_w_inf: RatWire,
    pub w_w_a: RatWire,
}

/// w_{W,alpha} = n'(p - p') - (n - n')p' = pn' - p'n.
pub fn alpha_weight(p: usize, p_prime: usize, n: usize, n_prime: usize) -> i64 {
    debug_assert!(p_prime <= p && n_prime <= n);
    (p as i64) * (n_prime as i64) - (p_prime as i64) * (n as i64)
}

/// w_{W,beta_i} = t'(p - p') - (t - t')p' + r'(p - p') = pt' - p't + r'(p - p').
pub fn beta_weight(p: usize, p_prime: usize, t: usize, t_prime: usize, r_prime: usize) -> i64 {
    debug_assert!(t_prime <= t);
    let (p, pp, t, tp, rp) = (
        p as i64,
        p_prime as i64,
        t as i64,
        t_prime as i64,
        r_prime as i64,
    );
    p * tp - pp * t + rp * (p - pp)
}

/// Numeric-rank route to the per-point invariants of E_{W,p_i} = ev_i(W):
///   m' = dim(E_{W,p_i}),
///   s' = dim(E_{W,p_i} cap g_i),
///   t' = dim(E_{W,p_i} / (E_{W,p_i} cap Pi(g_i))),
///   r' = m' - s' - t'.
pub fn echelon_invariants(
    beta_i: &Plane,
    w: &CMatrix,
    ev_i: &CMatrix,
    tol: &Tolerance,
) -> Result<PointInvariants> {
    let p = ev_i.cols();
    let n = ev_i.rows();
    // g_i = (ev + id)(ker beta_i)
    let ghat = linalg::nullspace(&beta_i.basis().adjoint(), tol.rank_rel);
    let top = ev_i.matmul(&ghat.block(0, p, 0, ghat.cols()));
    let bottom = ghat.block(p, p + n, 0, ghat.cols());
    let g = Plane::from_span(n, n, &top.vstack(&bottom), tol)?;

    let ewp = orthonormal_columns(&ev_i.matmul(w), tol.rank_rel);
    let m_prime = numeric_rank(&ev_i.matmul(w), tol)?;
    debug_assert_eq!(ewp.cols(), m_prime);

    // embed E_{W,p_i} into C^{2n} as the first summand
    let embedded = ewp.vstack(&CMatrix::zeros(n, ewp.cols()));
    let s_prime = intersection_dim(&embedded, g.basis(), tol)?;

    // Pi(g): span of the first-block components of g
    let pi_g = orthonormal_columns(&g.basis().block(0, n, 0, g.k()), tol.rank_rel);
    let cap = intersection_dim(&ewp, &pi_g, tol)?;
    let t_prime = m_prime - cap;
    if s_prime + t_prime > m_prime {
        return Err(Error::InvalidMatrix(format!(
            "inconsistent invariants s'={s_prime} t'={t_prime} m'={m_prime}"
        )));
    }
    Ok(PointInvariants {
        s: s_prime,
        t: t_prime,
        r: m_prime - s_prime - t_prime,
        m: m_prime,
    })
}

fn intersection_dim(a: &CMatrix, b: &CMatrix, tol: &Tolerance) -> Result<usize> {
    if a.cols() == 0 || b.cols() == 0 {
        return Ok(0);
    }
    let joint = numeric_rank(&a.hstack(b), tol)?;
    Ok(a.cols() + b.cols() - joint)
}

/// Exact echelon route, the cross-check oracle for [`echelon_invariants`].
/// `b_rows` are the V*-components of the framing functionals (n rows over Q
/// in a basis whose first `p_prime` vectors span W), the first `t` of which
/// are the pure-V* wedge factors. Returns (t', r').
///
/// Stage 1: reduce rows 1..t, leading indices c_1 < ... < c_t.
/// Stage 2: clear those columns from the rest, reduce, read their leading
/// indices. t' and r' count leading indices <= p' in each stage.
pub fn echelon_invariants_exact(b_rows: &QMatrix, t: usize, p_prime: usize) -> (usize, usize) {
    let n = b_rows.rows();
    assert!(t <= n);
    let pure = sub_rows(b_rows, 0, t);
    let (pure_rref, pure_pivots) = pure.rref();
    assert_eq!(
        pure_pivots.len(),
        t,
        "pure wedge factors must be independent"
    );

    // clear the pivot columns of the pure block from the mixed rows
    let mut mixed = sub_rows(b_rows, t, n);
    for mi in 0..mixed.rows() {
        for (prow, &pc) in pure_pivots.iter().enumerate() {
            let f = mixed[(mi, pc)];
            if !f.is_zero() {
                for j in 0..mixed.cols() {
                    let v = pure_rref[(prow, j)];
                    mixed[(mi, j)] -= f * v;
                }
            }
        }
    }
    let (_, mixed_pivots) = mixed.rref();

    let t_prime = pure_pivots.iter().filter(|&&c| c < p_prime).count();
    let r_prime = mixed_pivots.iter().filter(|&&c| c < p_prime).count();
    (t_prime, r_prime)
}

fn sub_rows(m: &QMatrix, r0: usize, r1: usize) -> QMatrix {
    let mut out = QMatrix::zeros(r1 - r0, m.cols());
    for i in r0..r1 {
        for j in 0..m.cols() {
            out[(i - r0, j)] = m[(i, j)];
        }
    }
    out
}

/// Assemble the six weight quantities for one witness.
pub fn w_report(
    enc: &FramedEncoding,
    wit: &SubspaceWitness,
    tol: &Tolerance,
) -> Result<WeightReport> {
    let p = enc.p;
    let p_prime = wit.w.cols();
    let n = enc.n;
    let n_prime = wit.n_prime;
    if p_prime > p || n_prime > n {
        return Err(Error::ShapeMismatch("witness larger than ambient".into()));
    }

    let mut per_point = Vec::with_capacity(enc.ell);
    let mut t_full = Vec::with_capacity(enc.ell);
    let mut w_beta = Vec::with_capacity(enc.ell);
    for i in 0..enc.ell {
        let inv = echelon_invariants(&enc.beta[i], &wit.w, &enc.ev[i], tol)?;
        let g = enc.fiber_plane(i, tol)?;
        let (_, t_i) = g.intersection_dims(tol)?;
        w_beta.push(beta_weight(p, p_prime, t_i, inv.t, inv.r));
        t_full.push(t_i);
        per_point.push(inv);
    }
    let w_alpha = alpha_weight(p, p_prime, n, n_prime);

    let eta = enc.eta();
    let beta_sum: i128 = w_beta.iter().map(|&x| x as i128).sum();
    let w_w = rat_int(w_alpha as i128) + eta * rat_int(beta_sum);

    let (w_w_k, w_w_inf, w_w_a) = k_weights(
        enc.delta0,
        wit.delta0_prime,
        n,
        n_prime,
        enc.genus,
        enc.twist_k,
        &per_point,
        &t_full,
    );

    Ok(WeightReport {
        p,
        p_prime,
        n,
        n_prime,
        delta0: enc.delta0,
        delta0_prime: wit.delta0_prime,
        genus: enc.genus,
        twist_k: enc.twist_k,
        w_alpha,
        w_beta,
        per_point,
        t_full,
        w_w: w_w.into(),
        w_w_k: w_w_k.into(),
        w_w_inf: w_w_inf.into(),
        w_w_a: w_w_a.into(),
    })
}

/// The k-, infinity- and A-weights from the displayed expansions, exact.
#[allow(clippy::too_many_arguments)]
pub fn k_weights(
    delta0: i64,
    delta0_prime: i64,
    n: usize,
    n_prime: usize,
    genus: usize,
    k: i64,
    per_point: &[PointInvariants],
    t_full: &[usize],
) -> (Rat, Rat, Rat) {
    let d0 = rat_int(delta0 as i128);
    let d0p = rat_int(delta0_prime as i128);
    let nn = rat_int(n as i128);
    let np = rat_int(n_prime as i128);
    let g = rat_int(genus as i128);
    let kk = rat_int(k as i128);
    let one = rat_int(1);
    let half = rat(1, 2);

    let slope_diff = d0 / nn - d0p / np;
    let mut sum_frac = Rat::zero(); // sum [(r'+t')/n' - (r'+t)/n]
    let mut sum_rt_over_n = Rat::zero(); // sum (r'+t)/n
    let mut sum_k_term = Rat::zero();
    for (inv, &t) in per_point.iter().zip(t_full) {
        let rtp = rat_int((inv.r + inv.t) as i128) / np;
        let rt = rat_int((inv.r + t) as i128) / nn;
        sum_frac = sum_frac + rtp - rt;
        sum_rt_over_n += rt;
        sum_k_term = sum_k_term + (d0 / nn) * rtp - (d0p / np) * rt + (one - g) * (rtp - rt);
    }
    let w_inf = slope_diff + sum_frac;
    let w_k = w_inf + (sum_k_term + (half - g) * slope_diff) / kk;
    let w_a = slope_diff * (-d0 / nn + sum_rt_over_n - half);
    (w_k, w_inf, w_a)
}

/// Contribution of one witness to the stability verdict, per the branching
/// of the k-weight in terms of the limit weight and the A-weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessClass {
    /// w_inf > 0, or w_inf = 0 with w_A > 0: strictly positive k-weight.
    Positive,
    /// w_inf = 0 and w_A = 0: the k-weight vanishes identically.
    StrictlySemistable,
    /// w_inf < 0, or w_inf = 0 with w_A < 0: destabilizing.
    Violating,
}

pub fn classify_k_stability(report: &WeightReport) -> WitnessClass {
    let w_inf: Rat = report.w_w_inf.into();
    let w_a: Rat = report.w_w_a.into();
    match rat_sign(&w_inf) {
        1 => WitnessClass::Positive,
        -1 => WitnessClass::Violating,
        _ => match rat_sign(&w_a) {
            1 => WitnessClass::Positive,
            -1 => WitnessClass::Violating,
            _ => WitnessClass::StrictlySemistable,
        },
    }
}

/// Stability verdicts shared across the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Semistable,
    Unstable,
}

/// Outcome of the C* test, with the limiting normalized weight pair
/// (n - gamma sum s_i, -n + gamma sum (n - t_i)).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CstarReport {
    pub verdict: Verdict,
    pub weight_s: RatWire,
    pub weight_t: RatWire,
    pub gamma: RatWire,
    pub mu: RatWire,
}

/// C*-action classification: stable iff
/// sum s_i < ln/2 - delta0 and sum t_i < ln/2 + delta0, semistable with
/// non-strict bounds. Valid in the degree range 2|delta0| <= ln - 1.
pub fn cstar_classify(
    n: usize,
    ell: usize,
    delta0: i64,
    s: &[usize],
    t: &[usize],
) -> Result<CstarReport> {
    if s.len() != ell || t.len() != ell {
        return Err(Error::ShapeMismatch("s/t length != ell".into()));
    }
    let ln = (ell * n) as i64;
    if ln == 2 * delta0 {
        return Err(Error::ParameterSingular(ln));
    }
    if 2 * delta0.abs() > ln - 1 {
        return Err(Error::UnsupportedModel(format!(
            "degree {delta0} outside -[(ln-1)/2] .. [(ln-1)/2] for ln={ln}"
        )));
    }
    let gamma = rat(2 * n as i128, (ln - 2 * delta0) as i128);
    let mu = gamma * rat_int(ell as i128) - rat_int(2) - rat(delta0 as i128, n as i128);
    let sum_s: i128 = s.iter().map(|&x| x as i128).sum();
    let sum_t: i128 = t.iter().map(|&x| x as i128).sum();
    let nn = rat_int(n as i128);

    let weight_s = nn - gamma * rat_int(sum_s);
    let weight_t = -nn + gamma * (rat_int((ell * n) as i128) - rat_int(sum_t));

    let verdict = match (rat_sign(&weight_s), rat_sign(&weight_t)) {
        (1, 1) => Verdict::Stable,
        (a, b) if a >= 0 && b >= 0 => Verdict::Semistable,
        _ => Verdict::Unstable,
    };
    Ok(CstarReport {
        verdict,
        weight_s: weight_s.into(),
        weight_t: weight_t.into(),
        gamma: gamma.into(),
        mu: mu.into(),
    })
}
