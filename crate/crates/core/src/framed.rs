//! Discrete models of Grassmannian-framed bundles (E, g) and their
//! semistability. Stability is certified against an explicit witness list:
//! the quantifier "for every subbundle" is infinite, so verdicts are
//! relative to the witnesses supplied, and only genus-0 split models get an
//! automatic enumerator.
//!
//! For a subbundle witness of rank n' and degree delta0',
//!
//!   S1 = d0/n - d0'/n' + sum_i [ (n'-s'_i)/n' - (n'-s'_i-t'_i+t_i)/n ],
//!   S2 = (d0/n - d0'/n') (-d0/n + sum_i (n'-s'_i-t'_i+t_i)/n - 1/2),
//!
//! and (E, g) is semistable iff sum s_i <= ln/2 - d0, sum t_i <= ln/2 + d0,
//! S1 >= 0 for every subbundle, with S2 >= 0 whenever S1 = 0.

use crate::error::{Error, Result};
use crate::git_weights::Verdict;
use crate::grassmann::Plane;
use crate::linalg::{
    haar_unitary, numeric_rank, orthonormal_columns, CMatrix, SeededRng, Tolerance,
};
use crate::rational::{rat, rat_int, rat_sign, Rat, RatWire};
use serde::{Deserialize, Serialize};

/// Discrete model of a Grassmannian-framed bundle: rank, degree, genus, the
/// fiber framing planes, and optionally a genus-0 splitting type
/// E = O(a_1) + ... + O(a_n).
#[derive(Debug, Clone)]
pub struct FramedBundleModel {
    pub genus: usize,
    pub n: usize,
    pub delta0: i64,
    pub ell: usize,
    /// Framing planes g_i, n-planes in E_{p_i} + C^n = C^n + C^n.
    pub g: Vec<Plane>,
    /// Splitting type a_1 >= ... >= a_n with sum = delta0 (genus 0 only).
    pub split_type: Option<Vec<i64>>,
}

impl FramedBundleModel {
    pub fn new(
        genus: usize,
        n: usize,
        delta0: i64,
        g: Vec<Plane>,
        split_type: Option<Vec<i64>>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let ell = g.len();
        for (i, gi) in g.iter().enumerate() {
            if gi.dim_first() != n || gi.dim_second() != n || gi.k() != n {
                return Err(Error::ShapeMismatch(format!(
                    "g[{i}] must be an n-plane in C^{{2n}}"
                )));
            }
            let (s, t) = gi.intersection_dims(tol)?;
            if s + t > n {
                return Err(Error::InvalidMatrix(format!("g[{i}]: s + t > n")));
            }
        }
        if let Some(a) = &split_type {
            if genus != 0 {
                return Err(Error::UnsupportedModel(
                    "split type requires genus 0".into(),
                ));
            }
            if a.len() != n || a.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::UnsupportedModel(
                    "split type must be descending of length n".into(),
                ));
            }
            if a.iter().sum::<i64>() != delta0 {
                return Err(Error::UnsupportedModel(
                    "split type must sum to delta0".into(),
                ));
            }
        }
        Ok(FramedBundleModel {
            genus,
            n,
            delta0,
            ell,
            g,
            split_type,
        })
    }

    /// Per-point (s_i, t_i) of the framing planes.
    pub fn framing_dims(&self, tol: &Tolerance) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut s = Vec::with_capacity(self.ell);
        let mut t = Vec::with_capacity(self.ell);
        for gi in &self.g {
            let (si, ti) = gi.intersection_dims(tol)?;
            s.push(si);
            t.push(ti);
        }
        Ok((s, t))
    }
}

/// A candidate subbundle: rank, degree, and its fiber at each marked point.
#[derive(Debug, Clone)]
pub struct SubbundleWitness {
    pub n_prime: usize,
    pub delta0_prime: i64,
    /// Orthonormal n x n' bases of the fibers E'_{p_i} in C^n.
    pub fibers: Vec<CMatrix>,
}

impl SubbundleWitness {
    pub fn new(
        n_prime: usize,
        delta0_prime: i64,
        fibers: Vec<CMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if n_prime == 0 {
            return Err(Error::ShapeMismatch("witness rank must be >= 1".into()));
        }
        for (i, f) in fibers.iter().enumerate() {
            if f.cols() != n_prime {
                return Err(Error::ShapeMismatch(format!("fiber {i} has wrong rank")));
            }
            let defect = f.orthonormality_defect();
            if defect > tol.residual_abs.max(1e-12) * 10.0 {
                return Err(Error::InvalidFrame {
                    residual: defect,
                    tol: tol.residual_abs,
                });
            }
        }
        Ok(SubbundleWitness {
            n_prime,
            delta0_prime,
            fibers,
        })
    }
}

/// Per-point s'_i = dim(g_i cap E'_{p_i}) and
/// t'_i = dim(E'_{p_i} / (Pi(g_i) cap E'_{p_i})).
pub fn subbundle_invariants(
    model: &FramedBundleModel,
    wit: &SubbundleWitness,
    tol: &Tolerance,
) -> Result<Vec<(usize, usize)>> {
    if wit.fibers.len() != model.ell {
        return Err(Error::ShapeMismatch("witness fiber count != ell".into()));
    }
    let n = model.n;
    let mut out = Vec::with_capacity(model.ell);
    for (gi, fiber) in model.g.iter().zip(&wit.fibers) {
        // embed the fiber in C^{2n} as the first summand
        let embedded = fiber.vstack(&CMatrix::zeros(n, fiber.cols()));
        let s = intersection_dim(&embedded, gi.basis(), tol)?;
        let pi_g = orthonormal_columns(&gi.basis().block(0, n, 0, gi.k()), tol.rank_rel);
        let cap = intersection_dim(fiber, &pi_g, tol)?;
        out.push((s, wit.n_prime - cap));
    }
    Ok(out)
}

fn intersection_dim(a: &CMatrix, b: &CMatrix, tol: &Tolerance) -> Result<usize> {
    if a.cols() == 0 || b.cols() == 0 {
        return Ok(0);
    }
    let joint = numeric_rank(&a.hstack(b), tol)?;
    Ok(a.cols() + b.cols() - joint)
}

/// The subbundle slope functional S1, exact.
pub fn s1(model: &FramedBundleModel, wit: &SubbundleWitness, tol: &Tolerance) -> Result<Rat> {
    let inv = subbundle_invariants(model, wit, tol)?;
    let (_, t_full) = model.framing_dims(tol)?;
    Ok(s1_from_counts(
        model.delta0,
        wit.delta0_prime,
        model.n,
        wit.n_prime,
        &inv,
        &t_full,
    ))
}

pub fn s1_from_counts(
    delta0: i64,
    delta0_prime: i64,
    n: usize,
    n_prime: usize,
    inv: &[(usize, usize)],
    t_full: &[usize],
) -> Rat {
    let nn = rat_int(n as i128);
    let np = rat_int(n_prime as i128);
    let mut acc = rat(delta0 as i128, n as i128) - rat(delta0_prime as i128, n_prime as i128);
    for (&(sp, tp), &t) in inv.iter().zip(t_full) {
        acc = acc + rat_int((n_prime - sp) as i128) / np
            - (rat_int((n_prime - sp - tp) as i128) + rat_int(t as i128)) / nn;
    }
    acc
}

/// The tie-break functional S2, exact.
pub fn s2(model: &FramedBundleModel, wit: &SubbundleWitness, tol: &Tolerance) -> Result<Rat> {
    let inv = subbundle_invariants(model, wit, tol)?;
    let (_, t_full) = model.framing_dims(tol)?;
    Ok(s2_from_counts(
        model.delta0,
        wit.delta0_prime,
        model.n,
        wit.n_prime,
        &inv,
        &t_full,
    ))
}

pub fn s2_from_counts(
    delta0: i64,
    delta0_prime: i64,
    n: usize,
    n_prime: usize,
    inv: &[(usize, usize)],
    t_full: &[usize],
) -> Rat {
    let nn = rat_int(n as i128);
    let slope_diff = rat(delta0 as i128, n as i128) - rat(delta0_prime as i128, n_prime as i128);
    let mut bracket = -rat(delta0 as i128, n as i128) - rat(1, 2);
    for (&(sp, tp), &t) in inv.iter().zip(t_full) {
        bracket += (rat_int((n_prime - sp - tp) as i128) + rat_int(t as i128)) / nn;
    }
    slope_diff * bracket
}

/// How complete the witness list is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    /// Witnesses cover the full enumeration the model admits.
    Exhaustive,
    /// Randomized or user-supplied list: Unstable verdicts are sound,
    /// (semi)stable verdicts are relative to the list.
    Sampled,
    /// No witnesses supplied for a model that needs them.
    Incomplete,
}

/// Verdict plus the first violating witness, if any.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub certificate: Certificate,
    pub certificate_size: usize,
    /// Index into the witness list of a violator, with its S1/S2 values.
    pub violating_witness: Option<ViolationInfo>,
    pub sum_s: usize,
    pub sum_t: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViolationInfo {
    pub index: usize,
    pub s1: RatWire,
    pub s2: RatWire,
}

/// Semistability per the defining inequalities: the two C* bounds must hold,
/// every witness must have S1 >= 0, and S2 >= 0 whenever S1 = 0. Stable
/// needs the C* bounds strict and S2 > 0 at any S1 = 0 witness.
pub fn check_semistable(
    model: &FramedBundleModel,
    witnesses: &[SubbundleWitness],
    certificate: Certificate,
    tol: &Tolerance,
) -> Result<StabilityReport> {
    let (s, t) = model.framing_dims(tol)?;
    let sum_s: usize = s.iter().sum();
    let sum_t: usize = t.iter().sum();
    let ln = (model.ell * model.n) as i128;
    let s_bound = rat(ln, 2) - rat_int(model.delta0 as i128);
    let t_bound = rat(ln, 2) + rat_int(model.delta0 as i128);
    let s_excess = s_bound - rat_int(sum_s as i128);
    let t_excess = t_bound - rat_int(sum_t as i128);

    let certificate = if witnesses.is_empty() && model.n > 1 {
        Certificate::Incomplete
    } else {
        certificate
    };

    if rat_sign(&s_excess) < 0 || rat_sign(&t_excess) < 0 {
        return Ok(StabilityReport {
            verdict: Verdict::Unstable,
            certificate,
            certificate_size: witnesses.len(),
            violating_witness: None,
            sum_s,
            sum_t,
        });
    }

    let mut strict = rat_sign(&s_excess) > 0 && rat_sign(&t_excess) > 0;
    for (idx, wit) in witnesses.iter().enumerate() {
        let s1v = s1(model, wit, tol)?;
        let s2v = s2(model, wit, tol)?;
        match rat_sign(&s1v) {
            -1 => {
                return Ok(StabilityReport {
                    verdict: Verdict::Unstable,
                    certificate,
                    certificate_size: witnesses.len(),
                    violating_witness: Some(ViolationInfo {
                        index: idx,
                        s1: s1v.into(),
                        s2: s2v.into(),
                    }),
                    sum_s,
                    sum_t,
                })
            }
            0 => match rat_sign(&s2v) {
                -1 => {
                    return Ok(StabilityReport {
                        verdict: Verdict::Unstable,
                        certificate,
                        certificate_size: witnesses.len(),
                        violating_witness: Some(ViolationInfo {
                            index: idx,
                            s1: s1v.into(),
                            s2: s2v.into(),
                        }),
                        sum_s,
                        sum_t,
                    })
                }
                0 => strict = false,
                _ => {}
            },
            _ => {}
        }
    }

    Ok(StabilityReport {
        verdict: if strict {
            Verdict::Stable
        } else {
            Verdict::Semistable
        },
        certificate,
        certificate_size: witnesses.len(),
        violating_witness: None,
        sum_s,
        sum_t,
    })
}

/// Pseudo-semistability: S1 >= 0 over the witness list, nothing else.
pub fn pseudo_semistable(
    model: &FramedBundleModel,
    witnesses: &[SubbundleWitness],
    tol: &Tolerance,
) -> Result<bool> {
    for wit in witnesses {
        if rat_sign(&s1(model, wit, tol)?) < 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Which cohomological conclusions the slope bound licenses:
/// delta/n > 2g - 2 + (n-1)l gives H^1 = 0, and
/// delta/n > 2g - 1 + (n-1)l gives global generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeBoundReport {
    pub slope: RatWire,
    pub h1_threshold: i64,
    pub global_gen_threshold: i64,
    pub h1_vanishes: bool,
    pub globally_generated: bool,
}

pub fn slope_bound_check(model: &FramedBundleModel) -> SlopeBoundReport {
    let slope = rat(model.delta0 as i128, model.n as i128);
    let h1_threshold = 2 * model.genus as i64 - 2 + (model.n as i64 - 1) * model.ell as i64;
    let gg_threshold = h1_threshold + 1;
    SlopeBoundReport {
        slope: slope.into(),
        h1_threshold,
        global_gen_threshold: gg_threshold,
        h1_vanishes: slope > rat_int(h1_threshold as i128),
        globally_generated: slope > rat_int(gg_threshold as i128),
    }
}

/// Enumerate subbundle witnesses for a genus-0 split model: for each rank n',
/// the coordinate subbundles of the splitting, plus `samples` randomized
/// fiber configurations per degree in the window
/// [max degree - n*ell, max degree]. Deterministic given the seed.
pub fn enumerate_witnesses_genus0(
    model: &FramedBundleModel,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<Vec<SubbundleWitness>> {
    let Some(split) = &model.split_type else {
        return Err(Error::UnsupportedModel(
            "witness enumeration requires a split type".into(),
        ));
    };
    let n = model.n;
    let mut rng = SeededRng::new(seed);
    let mut out = Vec::new();
    for n_prime in 1..n {
        // coordinate subbundles: every n'-subset of the summands
        for subset in crate::grassmann::subsets_lex(n, n_prime) {
            let degree: i64 = subset.iter().map(|&j| split[j]).sum();
            let fiber = CMatrix::from_fn(n, n_prime, |i, j| {
                if i == subset[j] {
                    crate::linalg::ONE
                } else {
                    crate::linalg::ZERO
                }
            });
            out.push(SubbundleWitness::new(
                n_prime,
                degree,
                vec![fiber; model.ell],
                tol,
            )?);
        }
        // randomized fibers over the degree window below the maximum
        let max_degree: i64 = split.iter().take(n_prime).sum();
        let window = (n * model.ell) as i64;
        for degree in (max_degree - window)..=max_degree {
            for _ in 0..samples {
                let fibers: Vec<CMatrix> = (0..model.ell)
                    .map(|_| haar_unitary(n, &mut rng).block(0, n, 0, n_prime))
                    .collect();
                out.push(SubbundleWitness::new(n_prime, degree, fibers, tol)?);
            }
        }
    }
    Ok(out)
}
