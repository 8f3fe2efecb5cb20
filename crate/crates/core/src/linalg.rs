//! Small fixed-dimension helpers shared by the geometry and map code.
//!
//! Points live in ambient dimension 1..=3 and are stored in a fixed
//! `[f64; 3]` so grid scans stay allocation-free. Matrices use
//! `nalgebra::DMatrix`; singular values and inverses go through nalgebra.

use nalgebra::{DMatrix, DVector};

pub const MAX_DIM: usize = 3;

/// A point of the ambient space, valid in coordinates `0..dim`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pt {
    pub dim: usize,
    pub c: [f64; 3],
}

impl Pt {
    pub fn new(dim: usize, c: [f64; 3]) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&dim));
        Pt { dim, c }
    }

    pub fn zero(dim: usize) -> Self {
        Pt::new(dim, [0.0; 3])
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut c = [0.0; 3];
        c[..xs.len()].copy_from_slice(xs);
        Pt::new(xs.len(), c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &Pt) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            let d = self.c[i] - other.c[i];
            s += d * d;
        }
        s.sqrt()
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_row_slice(self.coords())
    }
}

/// Largest and smallest singular value of a square matrix.
pub fn singular_range(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.singular_values();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for v in sv.iter() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    (hi, lo)
}

/// Operator norm (largest singular value).
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    singular_range(m).0
}

/// `y = a * x + b` without allocating, using only the leading `dim` block.
pub fn affine_apply(a: &DMatrix<f64>, b: &DVector<f64>, x: &Pt) -> Pt {
    let dim = x.dim;
    let mut out = [0.0; 3];
    for r in 0..dim {
        let mut acc = b[r];
        for c in 0..dim {
            acc += a[(r, c)] * x.c[c];
        }
        out[r] = acc;
    }
    Pt::new(dim, out)
}

/// Least-squares line fit, returning `(slope, intercept, residual)` where
/// residual is the RMS of vertical deviations.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = if denom.abs() < 1e-300 {
        0.0
    } else {
        (n * sxy - sx * sy) / denom
    };
    let intercept = (sy - slope * sx) / n;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_range_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25]);
        let (hi, lo) = singular_range(&m);
        assert!((hi - 0.5).abs() < 1e-14);
        assert!((lo - 0.25).abs() < 1e-14);
    }

    #[test]
    fn affine_apply_matches_nalgebra() {
        let a = DMatrix::from_row_slice(2, 2, &[0.2, -0.1, 0.3, 0.15]);
        let b = DVector::from_row_slice(&[0.05, -0.07]);
        let x = Pt::new(2, [0.3, -0.8, 0.0]);
        let y = affine_apply(&a, &b, &x);
        let want = &a * x.to_dvector() + &b;
        assert!((y.c[0] - want[0]).abs() < 1e-15);
        assert!((y.c[1] - want[1]).abs() < 1e-15);
    }

    #[test]
    fn line_fit_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (s, i, r) = line_fit(&xs, &ys);
        assert!((s - 2.0).abs() < 1e-12);
        assert!((i - 1.0).abs() < 1e-12);
        assert!(r < 1e-12);
    }
}
