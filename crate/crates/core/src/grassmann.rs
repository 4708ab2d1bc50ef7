//! Planes in a split space C^m + C^n: representation conversions (graph,
//! orthonormal annihilator rows, orthonormal basis, Pluecker vector),
//! intersection invariants (s, t), and the two Grassmannian moment maps
//!
//!   mu_1(b*, d*) = (i/2)(-I + 2 b b*)   for U(m) x {I}  ("right"),
//!   mu_2(b*, d*) = (i/2)(-I + 2 d d*)   for {I} x U(n)  ("left"),
//!
//! which on graphs of gamma: C^m -> C^n equal
//! (i/2)(-I + g*g)(I + g*g)^{-1} and (i/2)(I - gg*)(I + gg*)^{-1}.

use crate::error::{Error, Result};
use crate::linalg::{
    self, nullspace, numeric_rank, orthonormal_columns, principal_angles, CMatrix, Tolerance, I,
};
use num_complex::Complex64;

/// A k-plane in C^m + C^n, stored as an orthonormal basis. The canonical
/// representation is the basis; graph, annihilator and Pluecker forms are
/// derived views.
#[derive(Debug, Clone)]
pub struct Plane {
    dim_first: usize,
    dim_second: usize,
    basis: CMatrix,
}

impl Plane {
    /// Wrap an already-orthonormal basis. Fails with `InvalidFrame` if the
    /// columns are not orthonormal within `residual_abs`.
    pub fn from_orthonormal_basis(
        m: usize,
        n: usize,
        basis: CMatrix,
        tol: &Tolerance,
    ) -> Result<Plane> {
        if basis.rows() != m + n {
            return Err(Error::ShapeMismatch(format!(
                "basis has {} rows, ambient is {}",
                basis.rows(),
                m + n
            )));
        }
        basis.check_finite()?;
        let defect = basis.orthonormality_defect();
        if defect > tol.residual_abs.max(1e-12) * 10.0 {
            return Err(Error::InvalidFrame {
                residual: defect,
                tol: tol.residual_abs,
            });
        }
        Ok(Plane {
            dim_first: m,
            dim_second: n,
            basis,
        })
    }

    /// Span of arbitrary columns; the plane dimension is the numeric rank.
    pub fn from_span(m: usize, n: usize, span: &CMatrix, tol: &Tolerance) -> Result<Plane> {
        span.check_finite()?;
        if span.rows() != m + n {
            return Err(Error::ShapeMismatch(format!(
                "span has {} rows, ambient is {}",
                span.rows(),
                m + n
            )));
        }
        let basis = orthonormal_columns(span, tol.rank_rel);
        Ok(Plane {
            dim_first: m,
            dim_second: n,
            basis,
        })
    }

    /// Graph of gamma: C^m -> C^n, the m-plane spanned by the columns of
    /// (I; gamma)(I + gamma* gamma)^{-1/2}.
    pub fn from_graph(gamma: &CMatrix, tol: &Tolerance) -> Result<Plane> {
        gamma.check_finite()?;
        let (n, m) = (gamma.rows(), gamma.cols());
        let stacked = CMatrix::identity(m).vstack(gamma);
        let basis = orthonormal_columns(&stacked, tol.rank_rel);
        debug_assert_eq!(basis.cols(), m);
        Ok(Plane {
            dim_first: m,
            dim_second: n,
            basis,
        })
    }

    /// The m-plane annihilated by the n orthonormal rows of (b*, d*), with
    /// b* of shape n x m and d* of shape n x n.
    pub fn from_annihilator(b_star: &CMatrix, d_star: &CMatrix, tol: &Tolerance) -> Result<Plane> {
        b_star.check_finite()?;
        d_star.check_finite()?;
        if b_star.rows() != d_star.rows() {
            return Err(Error::ShapeMismatch(
                "annihilator blocks disagree on row count".into(),
            ));
        }
        let rows = b_star.hstack(d_star);
        let defect = rows.adjoint().orthonormality_defect();
        if defect > tol.residual_abs.max(1e-12) * 10.0 {
            return Err(Error::InvalidFrame {
                residual: defect,
                tol: tol.residual_abs,
            });
        }
        let kernel = nullspace(&rows, tol.rank_rel);
        Ok(Plane {
            dim_first: b_star.cols(),
            dim_second: d_star.cols(),
            basis: kernel,
        })
    }

    pub fn dim_first(&self) -> usize {
        self.dim_first
    }

    pub fn dim_second(&self) -> usize {
        self.dim_second
    }

    pub fn ambient(&self) -> usize {
        self.dim_first + self.dim_second
    }

    /// Plane dimension k.
    pub fn k(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Orthonormal annihilator rows (b*, d*): the (m+n-k) x (m+n) matrix of
    /// row functionals vanishing on the plane, split into the two blocks.
    pub fn annihilator(&self, tol: &Tolerance) -> (CMatrix, CMatrix) {
        let compl = nullspace(&self.basis.adjoint(), tol.rank_rel);
        let rows = compl.adjoint();
        (
            rows.block(0, rows.rows(), 0, self.dim_first),
            rows.block(0, rows.rows(), self.dim_first, self.ambient()),
        )
    }

    /// s = dim(g intersect C^m x 0), t = dim(g intersect 0 x C^n).
    pub fn intersection_dims(&self, tol: &Tolerance) -> Result<(usize, usize)> {
        let k = self.k();
        let m = self.dim_first;
        let n = self.dim_second;
        // dim(U cap W) = dim U + dim W - rank([B_U | B_W])
        let first = CMatrix::from_fn(
            m + n,
            m,
            |i, j| {
                if i == j {
                    linalg::ONE
                } else {
                    linalg::ZERO
                }
            },
        );
        let second = CMatrix::from_fn(m + n, n, |i, j| {
            if i == m + j {
                linalg::ONE
            } else {
                linalg::ZERO
            }
        });
        let s = k + m - numeric_rank(&self.basis.hstack(&first), tol)?;
        let t = k + n - numeric_rank(&self.basis.hstack(&second), tol)?;
        Ok((s, t))
    }

    /// Graph map gamma with g = graph(gamma), defined when s = 0 and k = m.
    pub fn to_graph(&self, tol: &Tolerance) -> Result<CMatrix> {
        let m = self.dim_first;
        if self.k() != m {
            return Err(Error::ShapeMismatch(format!(
                "graph extraction needs k = m, got k={} m={}",
                self.k(),
                m
            )));
        }
        let top = self.basis.block(0, m, 0, m);
        let bottom = self.basis.block(m, self.ambient(), 0, m);
        let d = linalg::svd(&top);
        let smin = d.sigma.last().copied().unwrap_or(0.0);
        if smin <= tol.rank_rel * d.sigma_max().max(1.0) {
            return Err(Error::SingularMatrix {
                sigma_min: smin,
                cutoff: tol.rank_rel,
            });
        }
        // gamma = bottom * top^{-1}
        Ok(bottom.matmul(&top.inverse()?))
    }

    /// Unitary action u on the first summand: g -> diag(u, I) g.
    pub fn act_first(&self, u: &CMatrix) -> Plane {
        assert_eq!(u.rows(), self.dim_first);
        let mut big = CMatrix::identity(self.ambient());
        big.set_block(0, 0, u);
        Plane {
            dim_first: self.dim_first,
            dim_second: self.dim_second,
            basis: big.matmul(&self.basis),
        }
    }

    /// Unitary action u on the second summand: g -> diag(I, u) g.
    pub fn act_second(&self, u: &CMatrix) -> Plane {
        assert_eq!(u.rows(), self.dim_second);
        let mut big = CMatrix::identity(self.ambient());
        big.set_block(self.dim_first, self.dim_first, u);
        Plane {
            dim_first: self.dim_first,
            dim_second: self.dim_second,
            basis: big.matmul(&self.basis),
        }
    }

    /// Largest principal angle to another plane of the same dimension.
    pub fn gap(&self, other: &Plane) -> f64 {
        linalg::subspace_gap(&self.basis, &other.basis)
    }

    pub fn principal_angles_to(&self, other: &Plane) -> Vec<f64> {
        principal_angles(&self.basis, &other.basis)
    }
}

/// Moment map for the U(m) x {I} action ("right" action on the first
/// summand): (i/2)(-I + 2 b b*) from the annihilator frame. Skew-Hermitian
/// m x m with spec(-i mu) in [-1/2, 1/2].
pub fn moment_right(g: &Plane, tol: &Tolerance) -> CMatrix {
    let (b_star, _) = g.annihilator(tol);
    let b = b_star.adjoint(); // m x (amb - k)
    let m = g.dim_first();
    let bbs = b.matmul(&b.adjoint());
    CMatrix::identity(m)
        .scale(-linalg::ONE)
        .add(&bbs.scale(Complex64::new(2.0, 0.0)))
        .scale(0.5 * I)
}

/// Moment map for the {I} x U(n) action ("left" action on the second
/// summand): (i/2)(-I + 2 d d*). Skew-Hermitian n x n.
pub fn moment_left(g: &Plane, tol: &Tolerance) -> CMatrix {
    let (_, d_star) = g.annihilator(tol);
    let d = d_star.adjoint(); // n x (amb - k)
    let n = g.dim_second();
    let dds = d.matmul(&d.adjoint());
    CMatrix::identity(n)
        .scale(-linalg::ONE)
        .add(&dds.scale(Complex64::new(2.0, 0.0)))
        .scale(0.5 * I)
}

/// Graph-form right moment map (i/2)(-I + g*g)(I + g*g)^{-1}; independent
/// route used to cross-check the annihilator form.
pub fn moment_right_graph(gamma: &CMatrix) -> Result<CMatrix> {
    let m = gamma.cols();
    let gsg = gamma.adjoint().matmul(gamma);
    let num = CMatrix::identity(m).scale(-linalg::ONE).add(&gsg);
    let den = CMatrix::identity(m).add(&gsg);
    Ok(num.matmul(&den.inverse()?).scale(0.5 * I))
}

/// Graph-form left moment map (i/2)(I - gg*)(I + gg*)^{-1}.
pub fn moment_left_graph(gamma: &CMatrix) -> Result<CMatrix> {
    let n = gamma.rows();
    let ggs = gamma.matmul(&gamma.adjoint());
    let num = CMatrix::identity(n).sub(&ggs);
    let den = CMatrix::identity(n).add(&ggs);
    Ok(num.matmul(&den.inverse()?).scale(0.5 * I))
}

/// Hermitian -i*mu, the form whose eigenvalues live in [-1/2, 1/2].
pub fn hermitian_moment(mu: &CMatrix) -> CMatrix {
    mu.scale(-I).hermitian_part()
}

/// Pluecker vector of a k-plane: the k x k minors of the basis matrix over
/// lexicographically ordered row subsets, normalized to unit norm with the
/// first nonzero coordinate real positive.
#[derive(Debug, Clone)]
pub struct PluckerVector {
    pub ambient: usize,
    pub k: usize,
    pub coords: Vec<Complex64>,
}

/// Desk-scale cap on choose(ambient, k).
pub const PLUCKER_CAP: u64 = 1_000_000;

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    for i in 0..k {
        num = num * (n - i) as u128 / (i + 1) as u128;
    }
    num as u64
}

/// All k-subsets of {0..n-1} in lexicographic order.
pub fn subsets_lex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn minor(m: &CMatrix, rows: &[usize]) -> Complex64 {
    let k = rows.len();
    CMatrix::from_fn(k, k, |i, j| m[(rows[i], j)]).det()
}

/// Orthonormal basis of span(A) intersect span(B), both given by
/// orthonormal-column matrices in the same ambient space.
pub fn intersect_subspaces(a: &CMatrix, b: &CMatrix, tol: &Tolerance) -> CMatrix {
    if a.cols() == 0 || b.cols() == 0 {
        return CMatrix::zeros(a.rows(), 0);
    }
    // x = A u = B v  <=>  [A | -B] (u; v) = 0
    let stacked = a.hstack(&b.scale(-linalg::ONE));
    let null = nullspace(&stacked, tol.rank_rel);
    let u_part = null.block(0, a.cols(), 0, null.cols());
    orthonormal_columns(&a.matmul(&u_part), tol.rank_rel)
}

/// Orthonormal complement of span(B) inside span(A), assuming B is a
/// subspace of A (both orthonormal columns).
pub fn complement_within(a: &CMatrix, b: &CMatrix, tol: &Tolerance) -> CMatrix {
    // project A's columns off span(B); the inputs are orthonormal, so the
    // surviving directions have unit scale and the cutoff can be floored
    let proj = a.sub(&b.matmul(&b.adjoint().matmul(a)));
    linalg::orthonormal_columns_floored(&proj, tol.rank_rel, 1.0)
}

/// Deterministic orthonormal basis of a span that prefers standard basis
/// vectors: greedy pivoting on the projector diagonal, lowest index on ties.
/// If the span is a coordinate subspace this returns exactly those standard
/// vectors, in index order.
pub fn canonical_subspace_basis(span: &CMatrix, tol: &Tolerance) -> CMatrix {
    let k = orthonormal_columns(span, tol.rank_rel).cols();
    let n = span.rows();
    let ortho = orthonormal_columns(span, tol.rank_rel);
    let proj = ortho.matmul(&ortho.adjoint());
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    for _ in 0..k {
        // residual projection of each standard vector off the chosen basis
        let mut best = (0usize, -1.0f64);
        let mut cands: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        for e in 0..n {
            let mut v = proj.column(e);
            for b in &basis {
                let inner: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= inner * bi;
                }
            }
            let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if norm2 > best.1 + 1e-12 {
                best = (e, norm2);
            }
            cands.push(v);
        }
        let mut v = cands.swap_remove(best.0);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // fix the phase: largest component rotated to the positive real axis
        let lead = v
            .iter()
            .max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap())
            .copied()
            .unwrap_or(linalg::ONE);
        let phase = if lead.norm() > 0.0 {
            lead.conj() / lead.norm()
        } else {
            linalg::ONE
        };
        for vi in v.iter_mut() {
            *vi = *vi * phase / norm;
        }
        basis.push(v);
    }
    CMatrix::from_fn(n, k, |i, j| basis[j][i])
}

impl PluckerVector {
    /// Canonical projective gauge: unit norm, first coordinate of
    /// non-negligible modulus rotated to the positive real axis.
    pub fn normalize(mut self) -> PluckerVector {
        let norm = self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for z in self.coords.iter_mut() {
                *z /= norm;
            }
        }
        let maxmod = self.coords.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(lead) = self
            .coords
            .iter()
            .find(|z| z.norm() > 1e-12 * maxmod.max(1e-300))
        {
            let phase = lead / lead.norm();
            let rot = phase.conj();
            for z in self.coords.iter_mut() {
                *z *= rot;
            }
        }
        self
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Projective distance: 1 - |<a, b>| / (|a||b|). Zero iff equal rays.
    pub fn projective_distance(&self, other: &PluckerVector) -> f64 {
        assert_eq!(self.coords.len(), other.coords.len());
        let inner: Complex64 = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let na = self.norm();
        let nb = other.norm();
        if na == 0.0 || nb == 0.0 {
            return 1.0;
        }
        1.0 - inner.norm() / (na * nb)
    }
}

/// Pluecker coordinates of a plane. `TooLarge` past the desk-scale cap.
pub fn plucker(g: &Plane) -> Result<PluckerVector> {
    let amb = g.ambient();
    let k = g.k();
    let count = binomial(amb, k);
    if count > PLUCKER_CAP {
        return Err(Error::TooLarge(count));
    }
    let coords: Vec<Complex64> = subsets_lex(amb, k)
        .iter()
        .map(|rows| minor(g.basis(), rows))
        .collect();
    Ok(PluckerVector {
        ambient: amb,
        k,
        coords,
    }
    .normalize())
}
