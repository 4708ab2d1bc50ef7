//! Wire formats shared by every module and the CLI. Matrices are text
//! objects with `rows`, `cols`, and a flat row-major array of `[re, im]`
//! pairs; exact rationals are `{num, den}` integer pairs.

use crate::correspond::ParabolicData;
use crate::error::{Error, Result};
use crate::extended::{EMPoint, GMPoint};
use crate::framed::{FramedBundleModel, SubbundleWitness};
use crate::gpb::{GPBPlane, GPBundle};
use crate::grassmann::{Plane, PluckerVector};
use crate::linalg::{CMatrix, Tolerance};
use crate::rational::{Rat, RatWire};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixWire {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixWire {
    fn from(m: &CMatrix) -> Self {
        MatrixWire {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<&MatrixWire> for CMatrix {
    type Error = Error;
    fn try_from(w: &MatrixWire) -> Result<CMatrix> {
        if w.entries.len() != w.rows * w.cols {
            return Err(Error::ShapeMismatch(format!(
                "matrix wire: {} entries for {}x{}",
                w.entries.len(),
                w.rows,
                w.cols
            )));
        }
        let m = CMatrix::from_fn(w.rows, w.cols, |i, j| {
            let [re, im] = w.entries[i * w.cols + j];
            Complex64::new(re, im)
        });
        m.check_finite()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaneWire {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub basis: MatrixWire,
}

impl From<&Plane> for PlaneWire {
    fn from(p: &Plane) -> Self {
        PlaneWire {
            m: p.dim_first(),
            n: p.dim_second(),
            k: p.k(),
            basis: p.basis().into(),
        }
    }
}

impl PlaneWire {
    pub fn to_plane(&self, tol: &Tolerance) -> Result<Plane> {
        let basis = CMatrix::try_from(&self.basis)?;
        if basis.cols() != self.k {
            return Err(Error::ShapeMismatch(
                "plane wire: k != basis columns".into(),
            ));
        }
        Plane::from_orthonormal_basis(self.m, self.n, basis, tol)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PluckerWire {
    pub k: usize,
    pub coords: Vec<[f64; 2]>,
}

impl From<&PluckerVector> for PluckerWire {
    fn from(p: &PluckerVector) -> Self {
        PluckerWire {
            k: p.k,
            coords: p.coords.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl PluckerWire {
    pub fn to_plucker(&self) -> Result<PluckerVector> {
        // recover the ambient dimension from the coordinate count
        let len = self.coords.len() as u64;
        let ambient = (self.k..=self.k + 64)
            .find(|&amb| crate::grassmann::binomial(amb, self.k) == len)
            .ok_or_else(|| Error::ShapeMismatch("Pluecker wire: bad coordinate count".into()))?;
        Ok(PluckerVector {
            ambient,
            k: self.k,
            coords: self
                .coords
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnihilatorWire {
    pub b_star: MatrixWire,
    pub d_star: MatrixWire,
}

/// GM point file: holonomies, residues, and framing planes by rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GMPointWire {
    pub n: usize,
    pub genus: usize,
    pub ell: usize,
    pub delta0: i64,
    pub a: Vec<MatrixWire>,
    pub b: Vec<MatrixWire>,
    pub c: Vec<MatrixWire>,
    pub delta: Vec<MatrixWire>,
    pub planes: Vec<AnnihilatorWire>,
}

impl GMPointWire {
    pub fn from_point(pt: &GMPoint, delta0: i64) -> Self {
        GMPointWire {
            n: pt.em.n,
            genus: pt.em.genus,
            ell: pt.em.ell,
            delta0,
            a: pt.em.a.iter().map(Into::into).collect(),
            b: pt.em.b.iter().map(Into::into).collect(),
            c: pt.em.c.iter().map(Into::into).collect(),
            delta: pt.em.delta.iter().map(Into::into).collect(),
            planes: (0..pt.em.ell)
                .map(|i| AnnihilatorWire {
                    b_star: (&pt.b_star[i]).into(),
                    d_star: (&pt.d_star[i]).into(),
                })
                .collect(),
        }
    }

    pub fn to_point(&self, tol: &Tolerance) -> Result<GMPoint> {
        let conv = |v: &[MatrixWire]| -> Result<Vec<CMatrix>> {
            v.iter().map(CMatrix::try_from).collect()
        };
        let em = EMPoint::new(
            self.n,
            self.genus,
            conv(&self.a)?,
            conv(&self.b)?,
            conv(&self.c)?,
            conv(&self.delta)?,
            tol,
        )?;
        let b_star: Result<Vec<CMatrix>> = self
            .planes
            .iter()
            .map(|p| CMatrix::try_from(&p.b_star))
            .collect();
        let d_star: Result<Vec<CMatrix>> = self
            .planes
            .iter()
            .map(|p| CMatrix::try_from(&p.d_star))
            .collect();
        GMPoint::new(em, b_star?, d_star?, tol)
    }

    /// EM-only view (planes ignored), e.g. for `em` subcommands.
    pub fn to_em_point(&self, tol: &Tolerance) -> Result<EMPoint> {
        let conv = |v: &[MatrixWire]| -> Result<Vec<CMatrix>> {
            v.iter().map(CMatrix::try_from).collect()
        };
        EMPoint::new(
            self.n,
            self.genus,
            conv(&self.a)?,
            conv(&self.b)?,
            conv(&self.c)?,
            conv(&self.delta)?,
            tol,
        )
    }
}

/// Framed bundle model file: discrete invariants plus framing planes; the
/// witness list shares the format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FramedModelWire {
    pub genus: usize,
    pub n: usize,
    pub delta0: i64,
    pub planes: Vec<PlaneWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_type: Option<Vec<i64>>,
}

impl FramedModelWire {
    pub fn from_model(m: &FramedBundleModel) -> Self {
        FramedModelWire {
            genus: m.genus,
            n: m.n,
            delta0: m.delta0,
            planes: m.g.iter().map(Into::into).collect(),
            split_type: m.split_type.clone(),
        }
    }

    pub fn to_model(&self, tol: &Tolerance) -> Result<FramedBundleModel> {
        let g: Result<Vec<Plane>> = self.planes.iter().map(|p| p.to_plane(tol)).collect();
        FramedBundleModel::new(
            self.genus,
            self.n,
            self.delta0,
            g?,
            self.split_type.clone(),
            tol,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessWire {
    pub n_prime: usize,
    pub delta0_prime: i64,
    pub fibers: Vec<MatrixWire>,
}

impl WitnessWire {
    pub fn from_witness(w: &SubbundleWitness) -> Self {
        WitnessWire {
            n_prime: w.n_prime,
            delta0_prime: w.delta0_prime,
            fibers: w.fibers.iter().map(Into::into).collect(),
        }
    }

    pub fn to_witness(&self, tol: &Tolerance) -> Result<SubbundleWitness> {
        let fibers: Result<Vec<CMatrix>> = self.fibers.iter().map(CMatrix::try_from).collect();
        SubbundleWitness::new(self.n_prime, self.delta0_prime, fibers?, tol)
    }
}

/// Subspace probe for the weight calculus: W with orthonormal columns plus
/// the witnessed rank and degree of the subsheaf it generates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceWitnessWire {
    pub w: MatrixWire,
    pub n_prime: usize,
    pub delta0_prime: i64,
}

impl SubspaceWitnessWire {
    pub fn from_witness(w: &crate::git_weights::SubspaceWitness) -> Self {
        SubspaceWitnessWire {
            w: (&w.w).into(),
            n_prime: w.n_prime,
            delta0_prime: w.delta0_prime,
        }
    }

    pub fn to_witness(&self, tol: &Tolerance) -> Result<crate::git_weights::SubspaceWitness> {
        crate::git_weights::SubspaceWitness::new(
            CMatrix::try_from(&self.w)?,
            self.n_prime,
            self.delta0_prime,
            tol,
        )
    }
}

/// GPB file: the framed format over point pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GPBundleWire {
    pub genus: usize,
    pub n: usize,
    pub delta0: i64,
    /// Planes in E_{p_i} + E_{q_i}.
    pub pair_planes: Vec<PlaneWire>,
}

impl GPBundleWire {
    pub fn from_bundle(b: &GPBundle) -> Self {
        GPBundleWire {
            genus: b.genus,
            n: b.n,
            delta0: b.delta0,
            pair_planes: b.planes.iter().map(|p| (&p.0).into()).collect(),
        }
    }

    pub fn to_bundle(&self, tol: &Tolerance) -> Result<GPBundle> {
        let planes: Result<Vec<GPBPlane>> = self
            .pair_planes
            .iter()
            .map(|p| GPBPlane::new(p.to_plane(tol)?))
            .collect();
        GPBundle::new(self.genus, self.n, self.delta0, planes?)
    }
}

/// Parabolic data file: nested flag bases and exact weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParabolicWire {
    pub n: usize,
    pub flags: Vec<Vec<MatrixWire>>,
    pub weights: Vec<Vec<RatWire>>,
}

impl ParabolicWire {
    pub fn from_data(d: &ParabolicData) -> Self {
        ParabolicWire {
            n: d.n,
            flags: d
                .flags
                .iter()
                .map(|fl| fl.iter().map(Into::into).collect())
                .collect(),
            weights: d
                .weights
                .iter()
                .map(|ws| ws.iter().map(|&w| RatWire::from(w)).collect())
                .collect(),
        }
    }

    pub fn to_data(&self, tol: &Tolerance) -> Result<ParabolicData> {
        let flags: Result<Vec<Vec<CMatrix>>> = self
            .flags
            .iter()
            .map(|fl| fl.iter().map(CMatrix::try_from).collect())
            .collect();
        let weights: Vec<Vec<Rat>> = self
            .weights
            .iter()
            .map(|ws| ws.iter().map(|&w| Rat::from(w)).collect())
            .collect();
        ParabolicData::new(self.n, flags?, weights, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extended::random_gm_point;
    use crate::linalg::{haar_unitary, SeededRng};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn matrix_roundtrip() {
        let mut rng = SeededRng::new(1);
        let m = haar_unitary(3, &mut rng);
        let w: MatrixWire = (&m).into();
        let back = CMatrix::try_from(&w).unwrap();
        assert_eq!(m, back);
        // json text roundtrip too
        let text = serde_json::to_string(&w).unwrap();
        let w2: MatrixWire = serde_json::from_str(&text).unwrap();
        assert_eq!(CMatrix::try_from(&w2).unwrap(), m);
    }

    #[test]
    fn gm_point_roundtrip() {
        let pt = random_gm_point(2, 1, 2, 0, 7, &tol()).unwrap();
        let wire = GMPointWire::from_point(&pt, 0);
        let text = serde_json::to_string_pretty(&wire).unwrap();
        let back: GMPointWire = serde_json::from_str(&text).unwrap();
        let pt2 = back.to_point(&tol()).unwrap();
        assert!(crate::extended::gm_level_residual(&pt2) < 1e-10);
        assert_eq!(pt.em.delta.len(), pt2.em.delta.len());
    }

    #[test]
    fn plucker_wire_recovers_ambient() {
        let mut rng = SeededRng::new(2);
        let u = haar_unitary(4, &mut rng);
        let basis = u.block(0, 4, 0, 2);
        let p = Plane::from_orthonormal_basis(2, 2, basis, &tol()).unwrap();
        let pl = crate::grassmann::plucker(&p).unwrap();
        let w: PluckerWire = (&pl).into();
        let back = w.to_plucker().unwrap();
        assert_eq!(back.ambient, 4);
        assert!(pl.projective_distance(&back) < 1e-14);
    }

    #[test]
    fn malformed_matrix_rejected() {
        let w = MatrixWire {
            rows: 2,
            cols: 2,
            entries: vec![[1.0, 0.0]; 3],
        };
        assert!(CMatrix::try_from(&w).is_err());
    }
}
