//! Contraction maps with derivatives, finite systems, word compositions.
//!
//! Maps are affine or perturbed-affine (affine part plus a degree-bounded
//! polynomial). Construction certifies, once and for all: containment of the
//! image in the unit ball, a Lipschitz bound `L < 1` on the Jacobian norm,
//! invertibility of the Jacobian, and a Hölder bound on `x ↦ Df(x)`.
//! Everything downstream (distortion constants, covers, brackets) consumes
//! these certified numbers instead of re-sampling.

mod dynamics;
mod word;

pub use dynamics::{attractor, d0_distance, g1_distance, hutchinson, AttractorGrid, D0Estimate};
pub(crate) use dynamics::parallelotope_intersects_box as parallelotope_box_overlap;
pub use word::{ComposedMap, Word};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FractalError, Result};
use crate::linalg::{affine_apply, singular_range, Pt};

/// Construction-time verification nets, coarser in higher dimension.
fn verification_eps(dim: usize) -> f64 {
    match dim {
        1 => 2e-3,
        2 => 3e-2,
        _ => 1e-1,
    }
}

/// One monomial term of a vector-valued polynomial perturbation:
/// `x ↦ coef * Π_i x_i^exps_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub exps: Vec<u32>,
    pub coef: Vec<f64>,
}

/// Polynomial perturbation of bounded degree.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub terms: Vec<PolyTerm>,
}

impl Poly {
    fn validate(&self, dim: usize) -> Result<()> {
        for t in &self.terms {
            if t.exps.len() != dim || t.coef.len() != dim {
                return Err(FractalError::InvalidMap(
                    "perturbation term length does not match dim".into(),
                ));
            }
            if !t.coef.iter().all(|c| c.is_finite()) {
                return Err(FractalError::InvalidMap(
                    "non-finite perturbation coefficient".into(),
                ));
            }
        }
        Ok(())
    }

    fn eval_add(&self, x: &Pt, out: &mut [f64; 3]) {
        for t in &self.terms {
            let mut mono = 1.0;
            for (i, &e) in t.exps.iter().enumerate() {
                mono *= x.c[i].powi(e as i32);
            }
            for (k, &c) in t.coef.iter().enumerate() {
                out[k] += c * mono;
            }
        }
    }

    fn jacobian_add(&self, x: &Pt, out: &mut DMatrix<f64>) {
        let dim = out.nrows();
        for t in &self.terms {
            for j in 0..dim {
                let e_j = t.exps[j];
                if e_j == 0 {
                    continue;
                }
                let mut mono = e_j as f64 * x.c[j].powi(e_j as i32 - 1);
                for (i, &e) in t.exps.iter().enumerate() {
                    if i != j {
                        mono *= x.c[i].powi(e as i32);
                    }
                }
                for k in 0..dim {
                    out[(k, j)] += t.coef[k] * mono;
                }
            }
        }
    }

    /// Certified bound on `‖Dp(x)‖` over the unit ball:
    /// each term contributes `|coef| * |exps|`.
    fn lip_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| norm2(&t.coef) * norm2_u32(&t.exps))
            .sum()
    }

    /// Certified Lipschitz bound on `x ↦ Dp(x)` over the unit ball:
    /// each term contributes `|coef| * |exps|^2`.
    fn holder_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| norm2(&t.coef) * norm2_u32(&t.exps).powi(2))
            .sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.iter().all(|t| t.coef.iter().all(|&c| c == 0.0))
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm2_u32(v: &[u32]) -> f64 {
    v.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt()
}

/// A contracting diffeomorphism of the closed unit ball with an α-Hölder
/// derivative and certified constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionMap {
    dim: usize,
    a: DMatrix<f64>,
    b: DVector<f64>,
    poly: Option<Poly>,
    lipschitz: f64,
    holder_alpha: f64,
    holder_const: f64,
    /// Certified upper bound on `sup_x ‖(Df|_x)^{-1}‖`.
    inv_norm_sup: f64,
    /// Certified lower bound on `inf_x σ_min(Df|_x)`.
    jac_inf: f64,
    /// Certified upper bound on `sup_x |f(x)|`.
    image_norm_sup: f64,
}

impl ContractionMap {
    pub fn affine(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        Self::build(a, b, None)
    }

    pub fn perturbed(a: DMatrix<f64>, b: DVector<f64>, poly: Poly) -> Result<Self> {
        if poly.is_trivial() {
            return Self::build(a, b, None);
        }
        Self::build(a, b, Some(poly))
    }

    fn build(a: DMatrix<f64>, b: DVector<f64>, poly: Option<Poly>) -> Result<Self> {
        let dim = a.nrows();
        if !(1..=3).contains(&dim) || a.ncols() != dim || b.len() != dim {
            return Err(FractalError::InvalidMap(format!(
                "matrix must be square of side 1..=3 with matching translation, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if let Some(p) = &poly {
            p.validate(dim)?;
        }
        let (a_smax, a_smin) = singular_range(&a);
        let (p_lip, p_holder) = poly
            .as_ref()
            .map(|p| (p.lip_bound(), p.holder_bound()))
            .unwrap_or((0.0, 0.0));

        // coefficient-level Lipschitz certificate, refined by the net below
        let lip_coarse = a_smax + p_lip;
        if lip_coarse >= 1.0 {
            return Err(FractalError::InvalidMap(format!(
                "Jacobian norm bound {lip_coarse:.6} is not < 1"
            )));
        }

        let eps = verification_eps(dim);
        let net = crate::geometry::unit_ball_net(dim, eps);
        let mut sup_sigma = 0.0f64;
        let mut inf_sigma = f64::INFINITY;
        let mut sup_image = 0.0f64;
        let probe = ContractionMap {
            dim,
            a: a.clone(),
            b: b.clone(),
            poly: poly.clone(),
            lipschitz: lip_coarse,
            holder_alpha: 1.0,
            holder_const: p_holder,
            inv_norm_sup: f64::INFINITY,
            jac_inf: 0.0,
            image_norm_sup: f64::INFINITY,
        };
        if poly.is_some() {
            for x in net.points() {
                let j = probe.jacobian(x);
                let (hi, lo) = singular_range(&j);
                sup_sigma = sup_sigma.max(hi);
                inf_sigma = inf_sigma.min(lo);
                sup_image = sup_image.max(probe.eval(*x).norm());
            }
        } else {
            sup_sigma = a_smax;
            inf_sigma = a_smin;
            for x in net.points() {
                sup_image = sup_image.max(probe.eval(*x).norm());
            }
        }

        // Hölder modulus turns the net values into certified bounds
        let sigma_sup_cert = (sup_sigma + p_holder * eps).min(lip_coarse);
        let sigma_inf_cert = inf_sigma - p_holder * eps;
        let image_cert = (sup_image + lip_coarse * eps).min(a_smax + b.norm() + p_lip);

        if sigma_inf_cert <= 0.0 {
            return Err(FractalError::InvalidMap(format!(
                "Jacobian not certifiably invertible (sigma_min bound {sigma_inf_cert:.3e})"
            )));
        }
        if sigma_sup_cert >= 1.0 {
            return Err(FractalError::InvalidMap(format!(
                "certified Jacobian norm {sigma_sup_cert:.6} is not < 1"
            )));
        }
        if image_cert > 1.0 + 1e-12 {
            return Err(FractalError::InvalidMap(format!(
                "image leaves the unit ball (certified sup |f(x)| = {image_cert:.6})"
            )));
        }

        Ok(ContractionMap {
            dim,
            a,
            b,
            poly,
            lipschitz: sigma_sup_cert,
            holder_alpha: 1.0,
            holder_const: p_holder,
            inv_norm_sup: 1.0 / sigma_inf_cert,
            jac_inf: sigma_inf_cert,
            image_norm_sup: image_cert,
        })
    }

    /// 1-D affine shorthand `x ↦ slope x + offset`.
    pub fn affine_1d(slope: f64, offset: f64) -> Result<Self> {
        Self::affine(
            DMatrix::from_row_slice(1, 1, &[slope]),
            DVector::from_row_slice(&[offset]),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_affine(&self) -> bool {
        self.poly.is_none()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn holder_alpha(&self) -> f64 {
        self.holder_alpha
    }

    pub fn holder_const(&self) -> f64 {
        self.holder_const
    }

    pub fn inv_norm_sup(&self) -> f64 {
        self.inv_norm_sup
    }

    pub fn jac_inf(&self) -> f64 {
        self.jac_inf
    }

    pub fn eval(&self, x: Pt) -> Pt {
        let mut y = affine_apply(&self.a, &self.b, &x);
        if let Some(p) = &self.poly {
            p.eval_add(&x, &mut y.c);
        }
        y
    }

    pub fn jacobian(&self, x: &Pt) -> DMatrix<f64> {
        let mut j = self.a.clone();
        if let Some(p) = &self.poly {
            p.jacobian_add(x, &mut j);
        }
        j
    }

    /// Exact image of a closed interval (1-D only; diffeomorphisms of the
    /// line are monotone, so endpoints suffice).
    pub fn interval_image(&self, lo: f64, hi: f64) -> (f64, f64) {
        debug_assert_eq!(self.dim, 1);
        let a = self.eval(Pt::new(1, [lo, 0.0, 0.0])).c[0];
        let b = self.eval(Pt::new(1, [hi, 0.0, 0.0])).c[0];
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

/// A finite ordered family of contraction maps in a common ambient
/// dimension; the induced set map is `A ↦ ∪_j f_j(A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct System {
    dim: usize,
    maps: Vec<ContractionMap>,
    lipschitz: f64,
    alpha: f64,
}

impl System {
    pub fn new(maps: Vec<ContractionMap>) -> Result<Self> {
        let Some(first) = maps.first() else {
            return Err(FractalError::Domain("system needs at least one map".into()));
        };
        let dim = first.dim();
        if maps.iter().any(|m| m.dim() != dim) {
            return Err(FractalError::Domain(
                "all maps must share the ambient dimension".into(),
            ));
        }
        let lipschitz = maps.iter().map(|m| m.lipschitz()).fold(0.0, f64::max);
        let alpha = maps
            .iter()
            .map(|m| m.holder_alpha())
            .fold(f64::INFINITY, f64::min);
        debug_assert!(lipschitz < 1.0);
        Ok(System {
            dim,
            maps,
            lipschitz,
            alpha,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn maps(&self) -> &[ContractionMap] {
        &self.maps
    }

    pub fn map(&self, i: usize) -> &ContractionMap {
        &self.maps[i]
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Common Lipschitz bound (max over maps).
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Common Hölder exponent (min over maps).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Max over maps of the Hölder constant of the derivative.
    pub fn holder_const(&self) -> f64 {
        self.maps.iter().map(|m| m.holder_const()).fold(0.0, f64::max)
    }

    /// Certified `sup ‖(Df)^{-1}‖` over maps and the ball.
    pub fn inv_norm_sup(&self) -> f64 {
        self.maps
            .iter()
            .map(|m| m.inv_norm_sup())
            .fold(0.0, f64::max)
    }

    /// Certified `inf σ_min(Df)` over maps and the ball.
    pub fn jac_inf(&self) -> f64 {
        self.maps
            .iter()
            .map(|m| m.jac_inf())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_affine(&self) -> bool {
        self.maps.iter().all(|m| m.is_affine())
    }

    pub fn word(&self, indices: Vec<usize>) -> Result<Word> {
        Word::new(self, indices)
    }

    pub fn compose<'a>(&'a self, word: &'a Word) -> ComposedMap<'a> {
        ComposedMap::new(self, word)
    }

    pub fn from_spec(spec: &SystemSpec) -> Result<System> {
        let maps = spec
            .maps
            .iter()
            .map(|m| m.build(spec.dim))
            .collect::<Result<Vec<_>>>()?;
        let sys = System::new(maps)?;
        if sys.dim() != spec.dim {
            return Err(FractalError::Domain("spec dim mismatch".into()));
        }
        Ok(sys)
    }

    pub fn from_json(s: &str) -> Result<System> {
        let spec: SystemSpec = serde_json::from_str(s)?;
        System::from_spec(&spec)
    }

    pub fn to_spec(&self) -> SystemSpec {
        SystemSpec {
            dim: self.dim,
            maps: self
                .maps
                .iter()
                .map(|m| {
                    let a = (0..self.dim)
                        .map(|r| (0..self.dim).map(|c| m.a[(r, c)]).collect())
                        .collect();
                    let b = m.b.iter().copied().collect();
                    match &m.poly {
                        None => MapSpec::Affine { a, b },
                        Some(p) => MapSpec::Perturbed {
                            a,
                            b,
                            poly: p.clone(),
                        },
                    }
                })
                .collect(),
        }
    }
}

/// JSON wire format for systems.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemSpec {
    pub dim: usize,
    pub maps: Vec<MapSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapSpec {
    Affine {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Perturbed {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        poly: Poly,
    },
}

impl MapSpec {
    fn build(&self, dim: usize) -> Result<ContractionMap> {
        let (a, b, poly) = match self {
            MapSpec::Affine { a, b } => (a, b, None),
            MapSpec::Perturbed { a, b, poly } => (a, b, Some(poly.clone())),
        };
        if a.len() != dim || a.iter().any(|row| row.len() != dim) || b.len() != dim {
            return Err(FractalError::InvalidMap(
                "matrix/translation shape does not match dim".into(),
            ));
        }
        let flat: Vec<f64> = a.iter().flatten().copied().collect();
        let am = DMatrix::from_row_slice(dim, dim, &flat);
        let bv = DVector::from_row_slice(b);
        match poly {
            None => ContractionMap::affine(am, bv),
            Some(p) => ContractionMap::perturbed(am, bv, p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn third_map(offset: f64) -> ContractionMap {
        ContractionMap::affine_1d(1.0 / 3.0, offset).unwrap()
    }

    #[test]
    fn affine_certificates() {
        let m = third_map(1.0 / 3.0);
        assert!((m.lipschitz() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.holder_const(), 0.0);
        assert!((m.inv_norm_sup() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_expanding_map() {
        assert!(ContractionMap::affine_1d(1.1, 0.0).is_err());
    }

    #[test]
    fn rejects_singular_map() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let b = DVector::from_row_slice(&[0.0, 0.0]);
        assert!(ContractionMap::affine(a, b).is_err());
    }

    #[test]
    fn rejects_escaping_map() {
        // x/3 + 0.9 sends 1 to 1.2333
        assert!(ContractionMap::affine_1d(1.0 / 3.0, 0.9).is_err());
    }

    #[test]
    fn accepts_boundary_tiling_maps() {
        // x/2 ± 1/2 tile the interval; images touch the ball boundary
        assert!(ContractionMap::affine_1d(0.5, 0.5).is_ok());
        assert!(ContractionMap::affine_1d(0.5, -0.5).is_ok());
    }

    #[test]
    fn perturbed_certificates_cover_truth() {
        // f(x) = x/3 + 0.02 x^2: true sup |f'| = 1/3 + 0.04
        let poly = Poly {
            terms: vec![PolyTerm {
                exps: vec![2],
                coef: vec![0.02],
            }],
        };
        let m = ContractionMap::perturbed(
            DMatrix::from_row_slice(1, 1, &[1.0 / 3.0]),
            DVector::from_row_slice(&[0.0]),
            poly,
        )
        .unwrap();
        let true_sup = 1.0 / 3.0 + 0.04;
        assert!(m.lipschitz() >= true_sup - 1e-12 && m.lipschitz() <= true_sup + 1e-3);
        // true Lipschitz constant of f' is 0.04; certificate must dominate
        assert!(m.holder_const() >= 0.04);
        // inverse norm certificate dominates 1/min|f'| = 1/(1/3 - 0.04)
        assert!(m.inv_norm_sup() >= 1.0 / (1.0 / 3.0 - 0.04) - 1e-9);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let poly = Poly {
            terms: vec![
                PolyTerm {
                    exps: vec![2, 0],
                    coef: vec![0.01, -0.02],
                },
                PolyTerm {
                    exps: vec![1, 1],
                    coef: vec![0.0, 0.015],
                },
            ],
        };
        let m = ContractionMap::perturbed(
            DMatrix::from_row_slice(2, 2, &[0.3, -0.1, 0.05, 0.25]),
            DVector::from_row_slice(&[0.1, -0.05]),
            poly,
        )
        .unwrap();
        let x = Pt::new(2, [0.3, -0.4, 0.0]);
        let j = m.jacobian(&x);
        let h = 1e-6;
        for col in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp.c[col] += h;
            xm.c[col] -= h;
            let fp = m.eval(xp);
            let fm = m.eval(xm);
            for row in 0..2 {
                let fd = (fp.c[row] - fm.c[row]) / (2.0 * h);
                assert!((j[(row, col)] - fd).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn system_json_round_trip() {
        let json = r#"{
            "dim": 1,
            "maps": [
                {"kind": "affine", "A": [[0.3333333333333333]], "b": [0.0]},
                {"kind": "perturbed", "A": [[0.3333333333333333]], "b": [0.0],
                 "poly": {"terms": [{"exps": [2], "coef": [0.02]}]}}
            ]
        }"#;
        let sys = System::from_json(json).unwrap();
        assert_eq!(sys.len(), 2);
        assert!(!sys.is_affine());
        let spec = sys.to_spec();
        let back = System::from_spec(&spec).unwrap();
        assert_eq!(back.len(), 2);
        assert!((back.lipschitz() - sys.lipschitz()).abs() < 1e-15);
    }

    #[test]
    fn system_requires_common_dim() {
        let m1 = third_map(0.0);
        let a = DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, 0.3]);
        let b = DVector::from_row_slice(&[0.0, 0.0]);
        let m2 = ContractionMap::affine(a, b).unwrap();
        assert!(System::new(vec![m1, m2]).is_err());
        assert!(System::new(vec![]).is_err());
    }
}
