//! Command implementations for the gmstab CLI: the worked examples (line
//! bundles, genus-zero two-point, one-point), the GM-to-framed pipeline,
//! and deterministic report rendering.

use gmstab_core::correspond::{
    induced_flag, normal_form, parabolic_semistable, pardeg_of, transfer_plane, ParabolicData,
};
use gmstab_core::error::{Error, Result};
use gmstab_core::extended::{
    boundary_multiplicities, gm_level_residual, relation_residual, smoothness_hypotheses,
    trace_checks, GMPoint,
};
use gmstab_core::framed::{
    check_semistable, enumerate_witnesses_genus0, Certificate, FramedBundleModel,
};
use gmstab_core::git_weights::{cstar_classify, Verdict};
use gmstab_core::grassmann::Plane;
use gmstab_core::linalg::{eig_hermitian, numeric_rank, CMatrix, SeededRng, Tolerance};
use gmstab_core::rational::{rat, Rat, RatWire};
use gmstab_core::wire::{ParabolicWire, PlaneWire};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Format a float with 12 significant digits, the report convention for
/// quantities that are not exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

/// One (s, t) stratum of the line-bundle example.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stratum {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub verdict: Verdict,
}

/// Line-bundle example (n = 1): the feasible (s, t) patterns under
/// sum s_i <= l/2 - delta0 and sum t_i <= l/2 + delta0, the count by
/// (sum s, sum t), and the complex dimension l - 1 of the quotient fiber.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineBundleReport {
    pub ell: usize,
    pub delta0: i64,
    pub quotient_dim: usize,
    pub strata: Vec<Stratum>,
    /// (sum_s, sum_t, count) triples, lexicographic.
    pub counts: Vec<(usize, usize, usize)>,
    /// max sum s_i and max sum t_i over semistable patterns
    pub max_sum_s: usize,
    pub max_sum_t: usize,
    /// every s_i = 0 is forced
    pub s_identically_zero: bool,
}

pub fn cmd_example_line_bundles(ell: usize, delta0: i64) -> Result<LineBundleReport> {
    if ell == 0 {
        return Err(Error::ShapeMismatch("need at least one point".into()));
    }
    let half_l = rat(ell as i128, 2);
    let s_bound = half_l - gmstab_core::rational::rat_int(delta0 as i128);
    let t_bound = half_l + gmstab_core::rational::rat_int(delta0 as i128);
    let mut strata = Vec::new();
    let mut counts = std::collections::BTreeMap::new();
    let mut max_s = 0usize;
    let mut max_t = 0usize;
    // enumerate s_i, t_i in {0,1}, s_i + t_i <= 1: 3 states per point
    let states = 3usize.pow(ell as u32);
    for code in 0..states {
        let mut c = code;
        let mut s = vec![0usize; ell];
        let mut t = vec![0usize; ell];
        for i in 0..ell {
            match c % 3 {
                1 => s[i] = 1,
                2 => t[i] = 1,
                _ => {}
            }
            c /= 3;
        }
        let sum_s: usize = s.iter().sum();
        let sum_t: usize = t.iter().sum();
        let feasible = Rat::from(gmstab_core::rational::rat_int(sum_s as i128)) <= s_bound
            && Rat::from(gmstab_core::rational::rat_int(sum_t as i128)) <= t_bound;
        if !feasible {
            // cross-check: the classifier must agree on infeasibility
            if let Ok(rep) = cstar_classify(1, ell, delta0, &s, &t) {
                if rep.verdict != Verdict::Unstable {
                    return Err(Error::InvalidMatrix(
                        "stratification disagrees with cstar_classify".into(),
                    ));
                }
            }
            continue;
        }
        let rep = cstar_classify(1, ell, delta0, &s, &t)?;
        if rep.verdict == Verdict::Unstable {
            return Err(Error::InvalidMatrix(
                "stratification disagrees with cstar_classify".into(),
            ));
        }
        max_s = max_s.max(sum_s);
        max_t = max_t.max(sum_t);
        *counts.entry((sum_s, sum_t)).or_insert(0usize) += 1;
        strata.push(Stratum {
            s,
            t,
            verdict: rep.verdict,
        });
    }
    Ok(LineBundleReport {
        ell,
        delta0,
        quotient_dim: ell - 1,
        counts: counts.into_iter().map(|((a, b), c)| (a, b, c)).collect(),
        max_sum_s: max_s,
        max_sum_t: max_t,
        s_identically_zero: max_s == 0,
        strata,
    })
}

/// Genus-zero two-point example: sample gamma_2, normalize, verify the
/// two-sided moment equality, and measure the chart rank by finite
/// differences of the normalization map gamma_2 -> (gamma_1, gamma_2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Genus0Report {
    pub n: usize,
    pub seed: u64,
    pub moment_residual: f64,
    pub chart_rank: usize,
    pub expected_rank: usize,
}

pub fn cmd_example_genus0(n: usize, seed: u64, tol: &Tolerance) -> Result<Genus0Report> {
    if n > 6 {
        return Err(Error::TooLarge(n as u64));
    }
    let mut rng = SeededRng::new(seed);
    // keep clear of the boundary: a shifted Gaussian draw is invertible
    let g2 = gmstab_core::linalg::random_matrix(n, n, &mut rng)
        .add(&CMatrix::identity(n).scale(Complex64::new(2.0, 0.0)));
    let (delta, gamma1) = gmstab_core::correspond::genus0_two_point_normalize(&g2, tol)?;

    // residual of delta(gamma_1) = -delta(gamma_2), both rescaled forms
    let rescaled = |g: &CMatrix| -> Result<CMatrix> {
        let h = g.adjoint().matmul(g);
        let num = CMatrix::identity(n)
            .scale(-gmstab_core::linalg::ONE)
            .add(&h);
        let den = CMatrix::identity(n).add(&h);
        Ok(num.matmul(&den.inverse()?))
    };
    let lhs = rescaled(&gamma1)?;
    let moment_residual = lhs
        .sub(&delta)
        .frobenius_norm()
        .max(lhs.add(&rescaled(&g2)?).frobenius_norm());

    // finite-difference Jacobian of gamma_2 -> (gamma_1, gamma_2)
    let pack = |m: &CMatrix| -> Vec<f64> { m.data().iter().flat_map(|z| [z.re, z.im]).collect() };
    let eval = |g: &CMatrix| -> Result<Vec<f64>> {
        let (_, g1) = gmstab_core::correspond::genus0_two_point_normalize(g, tol)?;
        let mut v = pack(&g1);
        v.extend(pack(g));
        Ok(v)
    };
    let dim_in = 2 * n * n;
    let base = pack(&g2);
    let step = 1e-5;
    let mut jac = CMatrix::zeros(4 * n * n, dim_in);
    for j in 0..dim_in {
        let perturb = |sign: f64| -> Result<Vec<f64>> {
            let mut coords = base.clone();
            coords[j] += sign * step;
            let m = CMatrix::from_fn(n, n, |r, c| {
                let idx = 2 * (r * n + c);
                Complex64::new(coords[idx], coords[idx + 1])
            });
            eval(&m)
        };
        let plus = perturb(1.0)?;
        let minus = perturb(-1.0)?;
        for i in 0..4 * n * n {
            jac[(i, j)] = Complex64::new((plus[i] - minus[i]) / (2.0 * step), 0.0);
        }
    }
    // finite differences carry O(step^2) noise; rank at a matched cutoff
    let fd_tol = Tolerance::new(1e-6, tol.residual_abs)?;
    let chart_rank = numeric_rank(&jac, &fd_tol)?;
    Ok(Genus0Report {
        n,
        seed,
        moment_residual,
        chart_rank,
        expected_rank: 2 * n * n,
    })
}

/// One-point example: the feasible (s_1, t_1) region under
/// s_1 <= n/2 - delta0, t_1 <= n/2 + delta0, s_1 + t_1 <= n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OnePointReport {
    pub n: usize,
    pub delta0: i64,
    pub region: Vec<(usize, usize)>,
    pub t1_forced_zero: bool,
    pub max_s1: usize,
    pub fiber_dim: usize,
}

pub fn cmd_example_one_point(n: usize, delta0: i64) -> Result<OnePointReport> {
    if 2 * delta0.unsigned_abs() as usize > n.saturating_sub(1) {
        return Err(Error::UnsupportedModel(format!(
            "one-point degree must satisfy |delta0| <= (n-1)/2, got {delta0}"
        )));
    }
    let mut region = Vec::new();
    let mut max_s1 = 0;
    let mut max_t1 = 0;
    for s1 in 0..=n {
        for t1 in 0..=n - s1 {
            // 2 s_1 <= n - 2 delta0 and 2 t_1 <= n + 2 delta0
            if 2 * s1 as i64 <= n as i64 - 2 * delta0 && 2 * t1 as i64 <= n as i64 + 2 * delta0 {
                region.push((s1, t1));
                max_s1 = max_s1.max(s1);
                max_t1 = max_t1.max(t1);
            }
        }
    }
    Ok(OnePointReport {
        n,
        delta0,
        region,
        t1_forced_zero: max_t1 == 0,
        max_s1,
        fiber_dim: n * n - 1,
    })
}

/// Rational approximation of a moment eigenvalue: boundary and zero values
/// snap exactly, everything else rounds to the fixed 1e-6 grid. A shared
/// small denominator keeps parabolic-degree arithmetic far from overflow
/// even when many weights are summed.
pub fn rationalize_weight(x: f64) -> Rat {
    use gmstab_core::rational::rat_int;
    if (x - 0.5).abs() < 1e-8 {
        return rat(1, 2);
    }
    if (x + 0.5).abs() < 1e-8 {
        return rat(-1, 2);
    }
    if x.abs() < 1e-8 {
        return Rat::from(rat_int(0));
    }
    rat((x * 1e6).round() as i128, 1_000_000)
}

/// Per-point output of the correspondence: weights read off the residue,
/// the diagonalizing framing, and the transferred plane with its flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrespondPointReport {
    pub weights: Vec<RatWire>,
    pub s: usize,
    pub t: usize,
    pub transferred_plane: PlaneWire,
    pub flag_dims: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrespondReport {
    pub n: usize,
    pub ell: usize,
    pub points: Vec<CorrespondPointReport>,
    pub parabolic: ParabolicWire,
    pub pardeg: RatWire,
}

/// Run the local correspondence on a GM point: diagonalize each residue
/// (weights sorted weakly decreasing), transfer the framing plane through
/// the diagonalizing unitary, and assemble the induced parabolic data.
pub fn cmd_correspond(pt: &GMPoint, delta0: i64, tol: &Tolerance) -> Result<CorrespondReport> {
    let n = pt.em.n;
    let mut points = Vec::with_capacity(pt.em.ell);
    let mut flags = Vec::with_capacity(pt.em.ell);
    let mut weight_rows = Vec::with_capacity(pt.em.ell);
    for i in 0..pt.em.ell {
        let (lam, q) = eig_hermitian(&pt.em.delta[i]);
        // descending order: the diagonalizing framing f = Q_rev^H
        let order: Vec<usize> = (0..n).rev().collect();
        let q_desc = q.select_columns(&order);
        let f = q_desc.adjoint();
        let weights_desc: Vec<f64> = order.iter().map(|&j| lam[j]).collect();

        let g_tilde = pt.plane(i, tol)?;
        let delta_diag = CMatrix::diag_real(&weights_desc);
        let moved = transfer_plane(&g_tilde, &delta_diag, &f, tol)?;
        let (s, t) = moved.intersection_dims(tol)?;
        let flag = induced_flag(&moved, tol)?;
        let flag_dims: Vec<usize> = flag.iter().map(|m| m.cols()).collect();

        let mut ws: Vec<Rat> = Vec::with_capacity(n + 2);
        ws.push(rat(1, 2));
        for &x in &weights_desc {
            ws.push(rationalize_weight(x));
        }
        ws.push(rat(-1, 2));
        points.push(CorrespondPointReport {
            weights: ws.iter().map(|&w| RatWire::from(w)).collect(),
            s,
            t,
            transferred_plane: (&moved).into(),
            flag_dims,
        });
        flags.push(flag);
        weight_rows.push(ws);
    }
    let data = ParabolicData::new(n, flags, weight_rows, tol)?;
    let pd = pardeg_of(&data, delta0);
    Ok(CorrespondReport {
        n,
        ell: pt.em.ell,
        points,
        parabolic: ParabolicWire::from_data(&data),
        pardeg: pd.into(),
    })
}

/// Full pipeline on a GM point: relation and level residuals, trace and
/// degree checks, smoothness flags, the correspondence, and stability
/// verdicts (C* bounds exactly; framed/parabolic over enumerated witnesses
/// for genus-zero models).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    pub relation_residual: f64,
    pub level_residual: f64,
    pub trace_integral: bool,
    pub trace_matches_degree: bool,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub smooth_interior: bool,
    pub smooth_irreducible: bool,
    pub cstar_verdict: Verdict,
    pub framed_verdict: Option<Verdict>,
    pub parabolic_verdict: Option<Verdict>,
    pub certificate: Option<Certificate>,
    pub correspond: CorrespondReport,
}

pub fn cmd_pipeline(
    pt: &GMPoint,
    delta0: i64,
    seed: u64,
    tol: &Tolerance,
) -> Result<PipelineReport> {
    let relation = relation_residual(&pt.em);
    let level = gm_level_residual(pt);
    let traces = trace_checks(pt, delta0);
    let smooth = smoothness_hypotheses(pt, seed, tol)?;
    let n = pt.em.n;
    let ell = pt.em.ell;

    let mut s = Vec::with_capacity(ell);
    let mut t = Vec::with_capacity(ell);
    for d in &pt.em.delta {
        let (si, ti) = boundary_multiplicities(d);
        s.push(si);
        t.push(ti);
    }
    let cstar = cstar_classify(n, ell, delta0, &s, &t)?;
    let correspond = cmd_correspond(pt, delta0, tol)?;

    // framed and parabolic verdicts over genus-zero enumerable witnesses
    let (framed_verdict, parabolic_verdict, certificate) = if pt.em.genus == 0 {
        // balanced split type summing to delta0
        let base = delta0.div_euclid(n as i64);
        let rem = delta0.rem_euclid(n as i64) as usize;
        let split: Vec<i64> = (0..n)
            .map(|j| if j < rem { base + 1 } else { base })
            .collect();
        let planes: Vec<Plane> = (0..ell)
            .map(|i| {
                let w = &correspond.points[i].transferred_plane;
                w.to_plane(tol)
            })
            .collect::<Result<_>>()?;
        let model = FramedBundleModel::new(0, n, delta0, planes, Some(split), tol)?;
        let wits = enumerate_witnesses_genus0(&model, 4, seed, tol)?;
        let rep = check_semistable(&model, &wits, Certificate::Sampled, tol)?;
        let parabolic = correspond.parabolic.to_data(tol)?;
        let pv = parabolic_semistable(&model, &parabolic, &wits, tol)?;
        (Some(rep.verdict), Some(pv), Some(rep.certificate))
    } else {
        (None, None, None)
    };

    Ok(PipelineReport {
        relation_residual: relation,
        level_residual: level,
        trace_integral: traces.integral,
        trace_matches_degree: traces.matches_degree,
        s,
        t,
        smooth_interior: smooth.interior_residue,
        smooth_irreducible: smooth.irreducible,
        cstar_verdict: cstar.verdict,
        framed_verdict,
        parabolic_verdict,
        certificate,
        correspond,
    })
}

/// Normal-form command payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub s: usize,
    pub r: usize,
    pub t: usize,
    pub m_diag: Vec<f64>,
    pub rho_star: gmstab_core::wire::MatrixWire,
    pub e_side: gmstab_core::wire::MatrixWire,
    pub residual: f64,
    pub cluster_sizes: Vec<usize>,
}

pub fn cmd_normal_form(
    plane: &Plane,
    delta: &CMatrix,
    tol: &Tolerance,
) -> Result<NormalFormReport> {
    let nf = normal_form(plane, delta, tol)?;
    Ok(NormalFormReport {
        s: nf.s,
        r: nf.r,
        t: nf.t,
        m_diag: nf.m_diag.clone(),
        rho_star: (&nf.rho_star).into(),
        e_side: (&nf.e_side).into(),
        residual: nf.residual,
        cluster_sizes: nf.cluster_sizes,
    })
}
