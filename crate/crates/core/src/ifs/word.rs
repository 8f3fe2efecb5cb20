//! Words over the map alphabet and the compositions they encode.
//!
//! A word `j1..jm` encodes `f_{jm} ∘ ... ∘ f_{j1}`: the first letter acts
//! first. The empty word is the identity.

use nalgebra::{DMatrix, DVector};

use crate::error::{FractalError, Result};
use crate::linalg::Pt;

use super::System;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    indices: Vec<usize>,
}

impl Word {
    pub fn new(system: &System, indices: Vec<usize>) -> Result<Self> {
        for &i in &indices {
            if i >= system.len() {
                return Err(FractalError::Domain(format!(
                    "word letter {i} out of range for a {}-map system",
                    system.len()
                )));
            }
        }
        Ok(Word { indices })
    }

    pub fn empty() -> Self {
        Word { indices: vec![] }
    }

    pub(crate) fn from_indices_unchecked(indices: Vec<usize>) -> Self {
        Word { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The word whose composition is `f_self ∘ f_g`, i.e. `g` acts first.
    pub fn precomposed_with(&self, g: usize) -> Word {
        let mut ix = Vec::with_capacity(self.indices.len() + 1);
        ix.push(g);
        ix.extend_from_slice(&self.indices);
        Word { indices: ix }
    }

    /// The word whose composition is `f_after ∘ f_self`: `self` acts first.
    pub fn then(&self, after: &Word) -> Word {
        let mut ix = self.indices.clone();
        ix.extend_from_slice(&after.indices);
        Word { indices: ix }
    }
}

/// Evaluable handle for the composition a word encodes.
pub struct ComposedMap<'a> {
    system: &'a System,
    word: &'a Word,
}

impl<'a> ComposedMap<'a> {
    pub fn new(system: &'a System, word: &'a Word) -> Self {
        ComposedMap { system, word }
    }

    pub fn word(&self) -> &Word {
        self.word
    }

    pub fn eval(&self, x: Pt) -> Pt {
        let mut y = x;
        for &i in self.word.indices() {
            y = self.system.map(i).eval(y);
        }
        y
    }

    /// The orbit `x0, x1, .., xm` under successive letters.
    pub fn orbit(&self, x: Pt) -> Vec<Pt> {
        let mut out = Vec::with_capacity(self.word.len() + 1);
        out.push(x);
        let mut y = x;
        for &i in self.word.indices() {
            y = self.system.map(i).eval(y);
            out.push(y);
        }
        out
    }

    /// Chain-rule Jacobian of the composition at `x`: the product of the
    /// letter Jacobians evaluated along the orbit.
    pub fn jacobian(&self, x: &Pt) -> DMatrix<f64> {
        let dim = self.system.dim();
        let mut j = DMatrix::identity(dim, dim);
        let mut y = *x;
        for &i in self.word.indices() {
            j = self.system.map(i).jacobian(&y) * j;
            y = self.system.map(i).eval(y);
        }
        j
    }

    /// Exact matrix and translation of the composition; `None` unless every
    /// letter is affine.
    pub fn affine_product(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        let dim = self.system.dim();
        let mut a = DMatrix::identity(dim, dim);
        let mut b = DVector::zeros(dim);
        for &i in self.word.indices() {
            let m = self.system.map(i);
            if !m.is_affine() {
                return None;
            }
            a = m.matrix() * a;
            b = m.matrix() * b + m.translation();
        }
        Some((a, b))
    }

    /// Product of the letter Lipschitz bounds.
    pub fn lipschitz_product(&self) -> f64 {
        self.word
            .indices()
            .iter()
            .map(|&i| self.system.map(i).lipschitz())
            .product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::ContractionMap;

    fn cantor_like() -> System {
        System::new(vec![
            ContractionMap::affine_1d(1.0 / 3.0, 0.0).unwrap(),
            ContractionMap::affine_1d(1.0 / 3.0, 2.0 / 3.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn empty_word_is_identity() {
        let sys = cantor_like();
        let w = Word::empty();
        let c = sys.compose(&w);
        let x = Pt::new(1, [0.37, 0.0, 0.0]);
        assert_eq!(c.eval(x), x);
        let j = c.jacobian(&x);
        assert_eq!(j[(0, 0)], 1.0);
    }

    #[test]
    fn one_d_word_jacobian_is_slope_power() {
        let sys = cantor_like();
        let w = sys.word(vec![0, 1, 0, 1]).unwrap();
        let c = sys.compose(&w);
        let j = c.jacobian(&Pt::new(1, [0.2, 0.0, 0.0]));
        assert!((j[(0, 0)] - (1.0f64 / 81.0)).abs() < 1e-15);
    }

    #[test]
    fn word_order_matches_function_composition() {
        // word [0, 1]: f1 ∘ f0; on x=0: f0(0)=0, f1(0)=2/3
        let sys = cantor_like();
        let w = sys.word(vec![0, 1]).unwrap();
        let y = sys.compose(&w).eval(Pt::new(1, [0.0, 0.0, 0.0]));
        assert!((y.c[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn affine_product_matches_naive_multiplication() {
        use nalgebra::{DMatrix, DVector};
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut maps = Vec::new();
        for _ in 0..3 {
            let a = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-0.3..0.3));
            let b = DVector::from_fn(2, |_, _| rng.gen_range(-0.2..0.2));
            match ContractionMap::affine(a, b) {
                Ok(m) => maps.push(m),
                Err(_) => maps.push(
                    ContractionMap::affine(
                        DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.0, 0.2]),
                        DVector::zeros(2),
                    )
                    .unwrap(),
                ),
            }
        }
        let sys = System::new(maps).unwrap();
        let w = sys.word(vec![2, 0, 1, 1, 2]).unwrap();
        let (a, b) = sys.compose(&w).affine_product().unwrap();
        // naive: left-to-right product A_{j_m} ... A_{j_1}
        let mut an = DMatrix::identity(2, 2);
        for &i in w.indices().iter().rev() {
            an *= sys.map(i).matrix();
        }
        assert!((&a - &an).norm() < 1e-14);
        // translation agrees with evaluating at 0
        let y = sys.compose(&w).eval(Pt::new(2, [0.0, 0.0, 0.0]));
        assert!((b[0] - y.c[0]).abs() < 1e-14 && (b[1] - y.c[1]).abs() < 1e-14);
        // and the chain-rule Jacobian equals the product matrix
        let j = sys.compose(&w).jacobian(&Pt::new(2, [0.1, -0.2, 0.0]));
        assert!((&j - &a).norm() < 1e-14);
    }

    #[test]
    fn rejects_out_of_range_letters() {
        let sys = cantor_like();
        assert!(sys.word(vec![0, 2]).is_err());
    }
}
