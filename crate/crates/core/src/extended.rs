//! The extended representation variety EM_n of a genus-g surface with ell
//! punctures, and its Grassmannian extension GM_{n,delta0}.
//!
//! A point of EM_n is a tuple of unitary holonomies A_j, B_j, C_i and
//! Hermitian matrices delta_i with eigenvalues in [-1/2, 1/2] satisfying
//!
//!   (prod_j [A_j, B_j]) e^{2 pi i d_1} C_2 e^{2 pi i d_2} C_2^{-1} ...
//!       C_l e^{2 pi i d_l} C_l^{-1} = I,          `[A,B] = ABA^{-1}B^{-1}`.
//!
//! GM points augment this with planes in C^n + C^n cut out by orthonormal
//! rows (b_i*, d_i*), constrained to the zero level
//! delta_i = (1/2)(I - 2 b_i b_i*).

use crate::error::{Error, Result};
use crate::grassmann::Plane;
use crate::linalg::{
    eig_hermitian, exp_2pi_i_hermitian, haar_unitary, hermitian_sqrt_psd, numeric_rank,
    principal_log_unitary, random_hermitian_with_spectrum, CMatrix, SeededRng, Tolerance, I,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tuple of holonomies and residue matrices. C_1 = I by convention (the
/// defining relation has no C_1); `c[0]` is kept as the identity.
#[derive(Debug, Clone)]
pub struct EMPoint {
    pub n: usize,
    pub genus: usize,
    pub ell: usize,
    pub a: Vec<CMatrix>,
    pub b: Vec<CMatrix>,
    pub c: Vec<CMatrix>,
    /// Hermitian delta_i; the skew-Hermitian residue of the connection is
    /// i*delta_i.
    pub delta: Vec<CMatrix>,
}

impl EMPoint {
    pub fn new(
        n: usize,
        genus: usize,
        a: Vec<CMatrix>,
        b: Vec<CMatrix>,
        c: Vec<CMatrix>,
        delta: Vec<CMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let ell = delta.len();
        if a.len() != genus || b.len() != genus || c.len() != ell || ell == 0 {
            return Err(Error::ShapeMismatch("holonomy tuple lengths".into()));
        }
        let check_unitary = |m: &CMatrix, what: &str| -> Result<()> {
            if !m.is_square() || m.rows() != n {
                return Err(Error::ShapeMismatch(format!("{what} must be {n}x{n}")));
            }
            let defect = m.orthonormality_defect();
            if defect > tol.residual_abs.max(1e-12) * 100.0 {
                return Err(Error::InvalidMatrix(format!(
                    "{what} not unitary ({defect:e})"
                )));
            }
            Ok(())
        };
        for (j, m) in a.iter().enumerate() {
            check_unitary(m, &format!("A[{j}]"))?;
        }
        for (j, m) in b.iter().enumerate() {
            check_unitary(m, &format!("B[{j}]"))?;
        }
        for (i, m) in c.iter().enumerate() {
            check_unitary(m, &format!("C[{i}]"))?;
        }
        for (i, d) in delta.iter().enumerate() {
            if !d.is_hermitian(tol.residual_abs.max(1e-12) * 100.0) || d.rows() != n {
                return Err(Error::InvalidMatrix(format!("delta[{i}] not Hermitian")));
            }
            let (lam, _) = eig_hermitian(d);
            if lam
                .iter()
                .any(|&x| !(-0.5 - 1e-9..=0.5 + 1e-9).contains(&x))
            {
                return Err(Error::InvalidMatrix(format!(
                    "delta[{i}] eigenvalues outside [-1/2, 1/2]"
                )));
            }
        }
        Ok(EMPoint {
            n,
            genus,
            ell,
            a,
            b,
            c,
            delta,
        })
    }

    /// Left-hand side of the defining relation.
    pub fn relation_lhs(&self) -> CMatrix {
        let n = self.n;
        let mut acc = CMatrix::identity(n);
        for j in 0..self.genus {
            acc = acc.matmul(&commutator(&self.a[j], &self.b[j]));
        }
        for i in 0..self.ell {
            let e = exp_2pi_i_hermitian(&self.delta[i]);
            if i == 0 {
                acc = acc.matmul(&e);
            } else {
                acc = acc
                    .matmul(&self.c[i])
                    .matmul(&e)
                    .matmul(&self.c[i].adjoint());
            }
        }
        acc
    }

    /// Conjugate the whole tuple by a fixed unitary (the diagonal part of
    /// the U(n)^l action).
    pub fn conjugate(&self, u: &CMatrix) -> EMPoint {
        let conj = |m: &CMatrix| u.matmul(m).matmul(&u.adjoint());
        EMPoint {
            n: self.n,
            genus: self.genus,
            ell: self.ell,
            a: self.a.iter().map(conj).collect(),
            b: self.b.iter().map(conj).collect(),
            c: self.c.iter().map(conj).collect(),
            delta: self.delta.iter().map(conj).collect(),
        }
    }
}

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    // unitary inputs: inverse = adjoint
    a.matmul(b).matmul(&a.adjoint()).matmul(&b.adjoint())
}

/// Frobenius norm of (relation LHS - I).
pub fn relation_residual(pt: &EMPoint) -> f64 {
    pt.relation_lhs()
        .sub(&CMatrix::identity(pt.n))
        .frobenius_norm()
}

/// Solve the relation for delta_1: isolate its exponential and take the
/// principal logarithm. `BranchAmbiguous` if the isolated unitary has an
/// eigenvalue at -1.
pub fn solve_delta1(pt: &EMPoint, tol: &Tolerance) -> Result<EMPoint> {
    let n = pt.n;
    let mut head = CMatrix::identity(n);
    for j in 0..pt.genus {
        head = head.matmul(&commutator(&pt.a[j], &pt.b[j]));
    }
    let mut tail = CMatrix::identity(n);
    for i in 1..pt.ell {
        let e = exp_2pi_i_hermitian(&pt.delta[i]);
        tail = tail.matmul(&pt.c[i]).matmul(&e).matmul(&pt.c[i].adjoint());
    }
    // head * X * tail = I  =>  X = head^{-1} tail^{-1} = (tail * head)^H
    let isolated = tail.matmul(&head).adjoint();
    let delta1 = principal_log_unitary(&isolated, tol)?;
    let mut out = pt.clone();
    out.delta[0] = delta1;
    Ok(out)
}

/// Moment map of the U(n)^l action: the stored (delta_1, ..., delta_l),
/// Hermitian convention.
pub fn em_moment(pt: &EMPoint) -> Vec<CMatrix> {
    pt.delta.clone()
}

/// EM point with framing planes cut out by orthonormal rows (b_i*, d_i*).
#[derive(Debug, Clone)]
pub struct GMPoint {
    pub em: EMPoint,
    pub b_star: Vec<CMatrix>,
    pub d_star: Vec<CMatrix>,
}

impl GMPoint {
    pub fn new(
        em: EMPoint,
        b_star: Vec<CMatrix>,
        d_star: Vec<CMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if b_star.len() != em.ell || d_star.len() != em.ell {
            return Err(Error::ShapeMismatch("plane count != ell".into()));
        }
        for i in 0..em.ell {
            let rows = b_star[i].hstack(&d_star[i]);
            if rows.rows() != em.n || rows.cols() != 2 * em.n {
                return Err(Error::ShapeMismatch(format!("plane {i} rows shape")));
            }
            let defect = rows.adjoint().orthonormality_defect();
            if defect > tol.residual_abs.max(1e-12) * 100.0 {
                return Err(Error::InvalidFrame {
                    residual: defect,
                    tol: tol.residual_abs,
                });
            }
        }
        Ok(GMPoint { em, b_star, d_star })
    }

    /// The i-th framing plane as a Plane in C^n + C^n.
    pub fn plane(&self, i: usize, tol: &Tolerance) -> Result<Plane> {
        Plane::from_annihilator(&self.b_star[i], &self.d_star[i], tol)
    }
}

/// Max over i of || delta_i - (1/2)(I - 2 b_i b_i*) ||_F, the distance to
/// the zero level of the combined moment map.
pub fn gm_level_residual(pt: &GMPoint) -> f64 {
    let n = pt.em.n;
    let mut worst: f64 = 0.0;
    for i in 0..pt.em.ell {
        let bbs = pt.b_star[i].adjoint().matmul(&pt.b_star[i]);
        let level = CMatrix::identity(n)
            .sub(&bbs.scale(Complex64::new(2.0, 0.0)))
            .scale(Complex64::new(0.5, 0.0));
        worst = worst.max(pt.em.delta[i].sub(&level).frobenius_norm());
    }
    worst
}

/// Residual moment map of the right U(n)^l action on the quotient:
/// (i/2)(I - 2 d_i d_i*) per point.
pub fn gm_right_moment(pt: &GMPoint) -> Vec<CMatrix> {
    let n = pt.em.n;
    (0..pt.em.ell)
        .map(|i| {
            let dds = pt.d_star[i].adjoint().matmul(&pt.d_star[i]);
            CMatrix::identity(n)
                .sub(&dds.scale(Complex64::new(2.0, 0.0)))
                .scale(0.5 * I)
        })
        .collect()
}

/// Trace and degree bookkeeping on a (near-)solved point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceReport {
    pub trace_sum: f64,
    pub nearest_integer: i64,
    /// |trace_sum - nearest integer| < 1e-8
    pub integral: bool,
    /// trace_sum = -delta0
    pub matches_degree: bool,
    /// sum tr(I/2 + delta_i) = n*l/2 - delta0
    pub shifted_identity: bool,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    /// sum s_i <= l*n/2 - delta0
    pub s_bound: bool,
    /// sum t_i <= l*n/2 + delta0
    pub t_bound: bool,
}

const EIG_COUNT_TOL: f64 = 1e-8;

/// Eigenvalue multiplicities of delta at +1/2 and -1/2.
pub fn boundary_multiplicities(delta: &CMatrix) -> (usize, usize) {
    let (lam, _) = eig_hermitian(delta);
    let s = lam
        .iter()
        .filter(|&&x| (x - 0.5).abs() < EIG_COUNT_TOL)
        .count();
    let t = lam
        .iter()
        .filter(|&&x| (x + 0.5).abs() < EIG_COUNT_TOL)
        .count();
    (s, t)
}

pub fn trace_checks(pt: &GMPoint, delta0: i64) -> TraceReport {
    let n = pt.em.n as f64;
    let ell = pt.em.ell as f64;
    let trace_sum: f64 = pt.em.delta.iter().map(|d| d.trace().re).sum();
    let nearest = trace_sum.round() as i64;
    let integral = (trace_sum - nearest as f64).abs() < 1e-8;
    let matches_degree = (trace_sum + delta0 as f64).abs() < 1e-8;
    let shifted = (n * ell / 2.0 + trace_sum) - (n * ell / 2.0 - delta0 as f64);
    let shifted_identity = shifted.abs() < 1e-8;
    let mut s = Vec::new();
    let mut t = Vec::new();
    for d in &pt.em.delta {
        let (si, ti) = boundary_multiplicities(d);
        s.push(si);
        t.push(ti);
    }
    let sum_s: usize = s.iter().sum();
    let sum_t: usize = t.iter().sum();
    let s_bound = 2.0 * sum_s as f64 <= ell * n - 2.0 * delta0 as f64 + 1e-12;
    let t_bound = 2.0 * sum_t as f64 <= ell * n + 2.0 * delta0 as f64 + 1e-12;
    TraceReport {
        trace_sum,
        nearest_integer: nearest,
        integral,
        matches_degree,
        shifted_identity,
        s,
        t,
        s_bound,
        t_bound,
    }
}

/// Smoothness hypotheses as checkable predicates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothnessFlags {
    /// Some delta_i has all eigenvalues in the open interval (-1/2, 1/2).
    pub interior_residue: bool,
    /// Some eigenvalue of some delta_i is not +-1/2.
    pub non_boundary_eigenvalue: bool,
    /// No common invariant subspace (randomized word test, Burnside rank).
    pub irreducible: bool,
}

/// Evaluate the two eigenvalue clauses and an irreducibility test. The
/// holonomy algebra is probed with seeded random words of depth <= 6; full
/// matrix algebra (rank n^2 of the vectorized span) means irreducible.
pub fn smoothness_hypotheses(pt: &GMPoint, seed: u64, tol: &Tolerance) -> Result<SmoothnessFlags> {
    let n = pt.em.n;
    let mut interior = false;
    let mut non_boundary = false;
    for d in &pt.em.delta {
        let (lam, _) = eig_hermitian(d);
        if lam.iter().all(|&x| x.abs() < 0.5 - EIG_COUNT_TOL) {
            interior = true;
        }
        if lam.iter().any(|&x| (x.abs() - 0.5).abs() > EIG_COUNT_TOL) {
            non_boundary = true;
        }
    }

    // generators of the holonomy representation
    let mut gens: Vec<CMatrix> = Vec::new();
    gens.extend(pt.em.a.iter().cloned());
    gens.extend(pt.em.b.iter().cloned());
    for i in 0..pt.em.ell {
        let e = exp_2pi_i_hermitian(&pt.em.delta[i]);
        if i == 0 {
            gens.push(e);
        } else {
            gens.push(pt.em.c[i].matmul(&e).matmul(&pt.em.c[i].adjoint()));
        }
    }
    let mut rng = SeededRng::new(seed);
    let word_count = 4 * n * n + 4;
    let mut stacked = CMatrix::zeros(word_count + 1, n * n);
    // include the identity
    for k in 0..n {
        stacked[(0, k * n + k)] = crate::linalg::ONE;
    }
    for w in 0..word_count {
        let depth = 1 + rng.below(6);
        let mut word = CMatrix::identity(n);
        for _ in 0..depth {
            word = word.matmul(&gens[rng.below(gens.len())]);
        }
        for r in 0..n {
            for c in 0..n {
                stacked[(w + 1, r * n + c)] = word[(r, c)];
            }
        }
    }
    let irreducible = numeric_rank(&stacked, tol)? == n * n;
    Ok(SmoothnessFlags {
        interior_residue: interior,
        non_boundary_eigenvalue: non_boundary,
        irreducible,
    })
}

/// Seeded random GM point with prescribed degree: Haar holonomies, random
/// interior residues for i >= 2, delta_1 solved from the relation, and the
/// framing built on the moment level set. The total trace is steered to
/// -delta0 by scalar shifts of the free residues (re-solving delta_1 after
/// each shift); `InfeasibleDegree` when delta0 is out of reach.
pub fn random_gm_point(
    n: usize,
    genus: usize,
    ell: usize,
    delta0: i64,
    seed: u64,
    tol: &Tolerance,
) -> Result<GMPoint> {
    if ell == 0 {
        return Err(Error::ShapeMismatch("need at least one puncture".into()));
    }
    if 2 * delta0.unsigned_abs() as usize >= ell * n {
        return Err(Error::InfeasibleDegree { delta0, ell, n });
    }
    let mut rng = SeededRng::new(seed);
    let branch_margin = 0.02;

    for _attempt in 0..256 {
        let a: Vec<CMatrix> = (0..genus).map(|_| haar_unitary(n, &mut rng)).collect();
        let b: Vec<CMatrix> = (0..genus).map(|_| haar_unitary(n, &mut rng)).collect();
        let mut c: Vec<CMatrix> = vec![CMatrix::identity(n)];
        for _ in 1..ell {
            c.push(haar_unitary(n, &mut rng));
        }
        // base spectra in (-0.22, 0.22) for the free residues
        let mut base: Vec<CMatrix> = vec![CMatrix::zeros(n, n)];
        for _ in 1..ell {
            let spec: Vec<f64> = (0..n).map(|_| rng.uniform_in(-0.22, 0.22)).collect();
            base.push(random_hermitian_with_spectrum(&spec, &mut rng));
        }

        // scan a common scalar shift of the free residues, center-out: the
        // trace sum is locally constant in the shift and steps by an integer
        // each time an eigenvalue of the isolated unitary winds past the
        // branch cut, so the unshifted draw usually already hits the target
        let shifts: Vec<f64> = if ell == 1 {
            vec![0.0]
        } else {
            let mut v = vec![0.0];
            for k in 1..=60 {
                v.push(0.004 * k as f64);
                v.push(-0.004 * k as f64);
            }
            v
        };
        'shift: for &cshift in &shifts {
            let mut delta: Vec<CMatrix> = base.clone();
            for d in delta.iter_mut().skip(1) {
                *d = d.add(&CMatrix::identity(n).scale(Complex64::new(cshift, 0.0)));
            }
            let probe = EMPoint {
                n,
                genus,
                ell,
                a: a.clone(),
                b: b.clone(),
                c: c.clone(),
                delta,
            };
            let solved = match solve_delta1(&probe, tol) {
                Ok(s) => s,
                Err(_) => continue 'shift,
            };
            // keep clear of the branch cut and of the level-set boundary
            let (lam, _) = eig_hermitian(&solved.delta[0]);
            if lam.iter().any(|&x| x.abs() > 0.5 - branch_margin) {
                continue 'shift;
            }
            let total: f64 = solved.delta.iter().map(|d| d.trace().re).sum();
            if (total + delta0 as f64).abs() > 1e-8 {
                continue 'shift;
            }
            if relation_residual(&solved) > tol.residual_abs.max(1e-10) {
                continue 'shift;
            }
            // planes on the level set: b* = (I/2 - delta)^{1/2},
            // d* = (I/2 + delta)^{1/2}
            let mut b_star = Vec::with_capacity(ell);
            let mut d_star = Vec::with_capacity(ell);
            for d in &solved.delta {
                let half = CMatrix::identity(n).scale(Complex64::new(0.5, 0.0));
                b_star.push(hermitian_sqrt_psd(&half.sub(d)));
                d_star.push(hermitian_sqrt_psd(&half.add(d)));
            }
            let em = EMPoint::new(n, genus, solved.a, solved.b, solved.c, solved.delta, tol)?;
            return GMPoint::new(em, b_star, d_star, tol);
        }
    }
    Err(Error::InfeasibleDegree { delta0, ell, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn identity_point(n: usize, genus: usize, ell: usize) -> EMPoint {
        EMPoint::new(
            n,
            genus,
            vec![CMatrix::identity(n); genus],
            vec![CMatrix::identity(n); genus],
            vec![CMatrix::identity(n); ell],
            vec![CMatrix::zeros(n, n); ell],
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn identity_relation_holds() {
        let pt = identity_point(2, 1, 2);
        assert!(relation_residual(&pt) < 1e-14);
    }

    #[test]
    fn opposite_residues_cancel() {
        // g=0, l=2, C_2 = I, delta_1 = -delta_2
        let mut rng = SeededRng::new(3);
        let d = random_hermitian_with_spectrum(&[0.3, -0.1], &mut rng);
        let pt = EMPoint::new(
            2,
            0,
            vec![],
            vec![],
            vec![CMatrix::identity(2), CMatrix::identity(2)],
            vec![d.scale(Complex64::new(-1.0, 0.0)), d],
            &tol(),
        )
        .unwrap();
        assert!(relation_residual(&pt) < 1e-12);
    }

    #[test]
    fn solve_delta1_roundtrip() {
        let mut rng = SeededRng::new(5);
        for (n, genus, ell) in [(2usize, 1usize, 1usize), (3, 0, 2), (2, 2, 2)] {
            let a: Vec<CMatrix> = (0..genus).map(|_| haar_unitary(n, &mut rng)).collect();
            let b: Vec<CMatrix> = (0..genus).map(|_| haar_unitary(n, &mut rng)).collect();
            let mut c = vec![CMatrix::identity(n)];
            for _ in 1..ell {
                c.push(haar_unitary(n, &mut rng));
            }
            let mut delta = vec![CMatrix::zeros(n, n)];
            for _ in 1..ell {
                let spec: Vec<f64> = (0..n).map(|_| rng.uniform_in(-0.4, 0.4)).collect();
                delta.push(random_hermitian_with_spectrum(&spec, &mut rng));
            }
            let pt = EMPoint {
                n,
                genus,
                ell,
                a,
                b,
                c,
                delta,
            };
            let solved = solve_delta1(&pt, &tol()).unwrap();
            assert!(
                relation_residual(&solved) < 1e-10,
                "n={n} g={genus} l={ell}: {}",
                relation_residual(&solved)
            );
        }
    }

    #[test]
    fn commuting_handles_give_zero_delta() {
        // g=1, l=1 with commuting A, B: [A,B] = I so delta_1 = 0
        let a = CMatrix::diag(&[
            Complex64::from_polar(1.0, 0.4),
            Complex64::from_polar(1.0, -0.9),
        ]);
        let b = CMatrix::diag(&[
            Complex64::from_polar(1.0, 1.3),
            Complex64::from_polar(1.0, 0.2),
        ]);
        let pt = EMPoint {
            n: 2,
            genus: 1,
            ell: 1,
            a: vec![a],
            b: vec![b],
            c: vec![CMatrix::identity(2)],
            delta: vec![CMatrix::zeros(2, 2)],
        };
        let solved = solve_delta1(&pt, &tol()).unwrap();
        assert!(solved.delta[0].frobenius_norm() < 1e-12);
    }

    #[test]
    fn branch_ambiguous_at_half() {
        // g=0, l=2, C_2 = I, delta_2 with eigenvalue 1/2: the isolated
        // exponential has eigenvalue -1.
        let pt = EMPoint {
            n: 1,
            genus: 0,
            ell: 2,
            a: vec![],
            b: vec![],
            c: vec![CMatrix::identity(1), CMatrix::identity(1)],
            delta: vec![CMatrix::zeros(1, 1), CMatrix::diag_real(&[0.5])],
        };
        assert!(matches!(
            solve_delta1(&pt, &tol()),
            Err(Error::BranchAmbiguous { .. })
        ));
    }

    #[test]
    fn equivariance_under_global_conjugation() {
        let mut rng = SeededRng::new(11);
        let pt = random_gm_point(2, 1, 2, 0, 17, &tol()).unwrap();
        let u = haar_unitary(2, &mut rng);
        let conj = pt.em.conjugate(&u);
        assert!(relation_residual(&conj) < 1e-9);
        for (orig, moved) in em_moment(&pt.em).iter().zip(em_moment(&conj)) {
            let expect = u.matmul(orig).matmul(&u.adjoint());
            assert!(moved.sub(&expect).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn determinant_identity() {
        let pt = random_gm_point(3, 1, 2, 1, 23, &tol()).unwrap();
        let lhs = pt.em.relation_lhs();
        let tr: f64 = pt.em.delta.iter().map(|d| d.trace().re).sum();
        let expect = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * tr);
        assert!((lhs.det() - expect).norm() < 1e-9);
        // integrality follows
        assert!((tr - tr.round()).abs() < 1e-9);
    }

    #[test]
    fn gm_level_and_b_zero_case() {
        // b* = 0 rows forces delta = I/2 on the level set
        let n = 2;
        let em = EMPoint {
            n,
            genus: 0,
            ell: 1,
            a: vec![],
            b: vec![],
            c: vec![CMatrix::identity(n)],
            delta: vec![CMatrix::identity(n).scale(Complex64::new(0.5, 0.0))],
        };
        let pt = GMPoint::new(
            em,
            vec![CMatrix::zeros(n, n)],
            vec![CMatrix::identity(n)],
            &tol(),
        )
        .unwrap();
        assert!(gm_level_residual(&pt) < 1e-14);
        // and with delta = 0 instead the residual is ||I/2|| > 0
        let mut bad = pt.clone();
        bad.em.delta[0] = CMatrix::zeros(n, n);
        assert!(gm_level_residual(&bad) > 0.5);
    }

    #[test]
    fn constructed_level_point_is_exact() {
        let pt = random_gm_point(2, 0, 2, 0, 31, &tol()).unwrap();
        assert!(gm_level_residual(&pt) < 1e-12);
        assert!(relation_residual(&pt.em) < 1e-10);
        // right moment agrees with -moment_left of the plane
        let planes_moment = gm_right_moment(&pt);
        for (i, pm) in planes_moment.iter().enumerate() {
            let plane = pt.plane(i, &tol()).unwrap();
            let ml = crate::grassmann::moment_left(&plane, &tol());
            assert!(
                pm.add(&ml).frobenius_norm() < 1e-9,
                "sign convention: gm_right_moment = -moment_left"
            );
        }
    }

    #[test]
    fn level_set_eigenspace_identity() {
        let pt = random_gm_point(3, 1, 2, -1, 41, &tol()).unwrap();
        for i in 0..pt.em.ell {
            let (s_eig, t_eig) = boundary_multiplicities(&pt.em.delta[i]);
            let n = pt.em.n;
            let rank_b = numeric_rank(&pt.b_star[i], &tol()).unwrap();
            let rank_d = numeric_rank(&pt.d_star[i], &tol()).unwrap();
            assert_eq!(s_eig, n - rank_b, "s_i = dim ker b*");
            assert_eq!(t_eig, n - rank_d, "t_i = dim ker d*");
        }
    }

    #[test]
    fn trace_checks_report() {
        // n=1, l=2, delta = (1/2, 1/2): sum 1 => delta0 = -1
        let em = EMPoint {
            n: 1,
            genus: 0,
            ell: 2,
            a: vec![],
            b: vec![],
            c: vec![CMatrix::identity(1), CMatrix::identity(1)],
            delta: vec![CMatrix::diag_real(&[0.5]), CMatrix::diag_real(&[0.5])],
        };
        let b_star = vec![CMatrix::zeros(1, 1), CMatrix::zeros(1, 1)];
        let d_star = vec![CMatrix::identity(1), CMatrix::identity(1)];
        let pt = GMPoint::new(em, b_star, d_star, &tol()).unwrap();
        let rep = trace_checks(&pt, -1);
        assert!(rep.integral && rep.matches_degree && rep.shifted_identity);
        assert_eq!(rep.s, vec![1, 1]);
        assert_eq!(rep.t, vec![0, 0]);
        assert!(rep.s_bound && rep.t_bound);
    }

    #[test]
    fn smoothness_flags() {
        let pt = random_gm_point(2, 1, 2, 0, 53, &tol()).unwrap();
        let flags = smoothness_hypotheses(&pt, 7, &tol()).unwrap();
        assert!(flags.interior_residue);
        assert!(flags.non_boundary_eigenvalue);
        assert!(flags.irreducible);

        // block-diagonal tuple: common invariant subspace
        let e1 = CMatrix::diag(&[
            Complex64::from_polar(1.0, 0.7),
            Complex64::from_polar(1.0, -0.3),
        ]);
        let em = EMPoint {
            n: 2,
            genus: 1,
            ell: 1,
            a: vec![e1.clone()],
            b: vec![e1],
            c: vec![CMatrix::identity(2)],
            delta: vec![CMatrix::zeros(2, 2)],
        };
        let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let pt = GMPoint::new(
            em,
            vec![CMatrix::identity(2).scale(inv_sqrt2)],
            vec![CMatrix::identity(2).scale(inv_sqrt2)],
            &tol(),
        )
        .unwrap();
        let flags = smoothness_hypotheses(&pt, 7, &tol()).unwrap();
        assert!(!flags.irreducible);

        // all residues at I/2: both eigenvalue clauses fail
        let em = EMPoint {
            n: 2,
            genus: 0,
            ell: 1,
            a: vec![],
            b: vec![],
            c: vec![CMatrix::identity(2)],
            delta: vec![CMatrix::identity(2).scale(Complex64::new(0.5, 0.0))],
        };
        let pt = GMPoint::new(
            em,
            vec![CMatrix::zeros(2, 2)],
            vec![CMatrix::identity(2)],
            &tol(),
        )
        .unwrap();
        let flags = smoothness_hypotheses(&pt, 7, &tol()).unwrap();
        assert!(!flags.interior_residue && !flags.non_boundary_eigenvalue);
    }

    #[test]
    fn random_point_simple_cases() {
        // n=1, g=1, l=1, delta0=0: commutators of scalars are trivial, so
        // delta_1 = 0 forced.
        let pt = random_gm_point(1, 1, 1, 0, 61, &tol()).unwrap();
        assert!(pt.em.delta[0].frobenius_norm() < 1e-12);
        // out-of-range degree
        assert!(matches!(
            random_gm_point(1, 0, 1, 1, 3, &tol()),
            Err(Error::InfeasibleDegree { .. })
        ));
        assert!(matches!(
            random_gm_point(2, 0, 1, 2, 3, &tol()),
            Err(Error::InfeasibleDegree { .. })
        ));
    }

    #[test]
    fn random_point_nonzero_degree() {
        // handles (g >= 1) let the isolated unitary wind past the branch
        // cut, so nonzero degrees are reachable with interior spectra
        for delta0 in [-1i64, 1] {
            let pt = random_gm_point(2, 1, 2, delta0, 71, &tol()).unwrap();
            let rep = trace_checks(&pt, delta0);
            assert!(rep.integral && rep.matches_degree, "delta0={delta0}");
            assert!(gm_level_residual(&pt) < 1e-12);
        }
        // at genus 0 one more puncture is needed: l = 3, n = 1
        let pt = random_gm_point(1, 0, 3, 1, 83, &tol()).unwrap();
        assert!(trace_checks(&pt, 1).matches_degree);
    }
}
