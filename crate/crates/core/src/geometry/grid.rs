//! Dyadic occupancy grids on `[-1,1]^n`, clipped to the closed unit ball.
//!
//! At level `m` each axis carries `2^(m+1)` cells of width `2^-m`. Cells are
//! half-open boxes `[lo, lo+h)` (the last cell per axis is closed so the
//! point `1.0` has a home). A cell is representable only if its closed box
//! intersects the closed unit ball.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{FractalError, Result};
use crate::linalg::Pt;

/// Per-axis cell index tuple; unused axes are zero.
pub type CellIx = [u32; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct GridSet {
    dim: usize,
    level: u32,
    /// Sorted lexicographically, duplicate-free.
    cells: Vec<CellIx>,
}

impl GridSet {
    /// Cell width at `level`.
    pub fn cell_width(level: u32) -> f64 {
        (2.0f64).powi(-(level as i32))
    }

    /// Cells per axis at `level`.
    pub fn cells_per_axis(level: u32) -> u32 {
        1u32 << (level + 1)
    }

    pub fn new(dim: usize, level: u32, mut cells: Vec<CellIx>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(FractalError::Domain(format!(
                "ambient dimension {dim} not in 1..=3"
            )));
        }
        if level > 24 {
            return Err(FractalError::Domain(format!("grid level {level} too deep")));
        }
        let n = Self::cells_per_axis(level);
        for c in &cells {
            for (ax, &i) in c.iter().enumerate().take(dim) {
                if i >= n {
                    return Err(FractalError::Domain(format!(
                        "cell index {i} out of range on axis {ax} at level {level}"
                    )));
                }
            }
            for &i in &c[dim..] {
                if i != 0 {
                    return Err(FractalError::Domain(
                        "unused cell index axes must be zero".into(),
                    ));
                }
            }
            if !cell_intersects_ball(dim, level, c) {
                return Err(FractalError::Domain(
                    "cell lies outside the closed unit ball".into(),
                ));
            }
        }
        cells.sort_unstable();
        cells.dedup();
        Ok(GridSet { dim, level, cells })
    }

    /// All cells meeting the closed unit ball.
    pub fn full_ball(dim: usize, level: u32) -> Self {
        let n = GridSet::cells_per_axis(level);
        let mut cells = Vec::new();
        let mut ix: CellIx = [0; 3];
        fill_rec(dim, level, n, 0, &mut ix, &mut cells);
        GridSet {
            dim,
            level,
            cells,
        }
    }

    /// The single cell containing `p`.
    pub fn singleton(level: u32, p: &Pt) -> Result<Self> {
        let ix = index_of(p, level);
        GridSet::new(p.dim, level, vec![ix])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cells(&self) -> &[CellIx] {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn contains_cell(&self, c: &CellIx) -> bool {
        self.cells.binary_search(c).is_ok()
    }

    pub fn width(&self) -> f64 {
        Self::cell_width(self.level)
    }

    /// Half length of a cell diagonal.
    pub fn half_diag(&self) -> f64 {
        0.5 * self.width() * (self.dim as f64).sqrt()
    }

    /// Full cell diagonal; the uncertainty of center-based grid metrics.
    pub fn diag(&self) -> f64 {
        self.width() * (self.dim as f64).sqrt()
    }

    pub fn cell_low(&self, c: &CellIx) -> Pt {
        let h = self.width();
        let mut lo = [0.0; 3];
        for ax in 0..self.dim {
            lo[ax] = -1.0 + c[ax] as f64 * h;
        }
        Pt::new(self.dim, lo)
    }

    pub fn cell_center(&self, c: &CellIx) -> Pt {
        let h = self.width();
        let mut lo = self.cell_low(c);
        for ax in 0..self.dim {
            lo.c[ax] += 0.5 * h;
        }
        lo
    }

    pub fn centers(&self) -> Vec<Pt> {
        self.cells.iter().map(|c| self.cell_center(c)).collect()
    }

    /// Total volume of the occupied cells.
    pub fn volume(&self) -> f64 {
        self.cells.len() as f64 * self.width().powi(self.dim as i32)
    }

    /// Occupied cells with at least one missing face neighbour (cells at the
    /// edge of the representable range count as boundary).
    pub fn boundary_cells(&self) -> Vec<CellIx> {
        let n = Self::cells_per_axis(self.level);
        let mut out = Vec::new();
        for c in &self.cells {
            let mut boundary = false;
            'axes: for ax in 0..self.dim {
                for step in [-1i64, 1] {
                    let v = c[ax] as i64 + step;
                    if v < 0 || v >= n as i64 {
                        boundary = true;
                        break 'axes;
                    }
                    let mut nb = *c;
                    nb[ax] = v as u32;
                    if !cell_intersects_ball(self.dim, self.level, &nb)
                        || !self.contains_cell(&nb)
                    {
                        boundary = true;
                        break 'axes;
                    }
                }
            }
            if boundary {
                out.push(*c);
            }
        }
        out
    }

    /// Maximal runs of consecutive occupied cells (1-D only), as closed
    /// intervals `[lo, hi]`.
    pub fn runs_1d(&self) -> Vec<(f64, f64)> {
        assert_eq!(self.dim, 1);
        let h = self.width();
        let mut out: Vec<(f64, f64)> = Vec::new();
        for c in &self.cells {
            let lo = -1.0 + c[0] as f64 * h;
            match out.last_mut() {
                Some(last) if (last.1 - lo).abs() < 0.25 * h => last.1 = lo + h,
                _ => out.push((lo, lo + h)),
            }
        }
        out
    }

    /// Union with another grid of the same shape.
    pub fn union(&self, other: &GridSet) -> Result<GridSet> {
        self.check_same_shape(other)?;
        let mut cells = self.cells.clone();
        cells.extend_from_slice(&other.cells);
        cells.sort_unstable();
        cells.dedup();
        Ok(GridSet {
            dim: self.dim,
            level: self.level,
            cells,
        })
    }

    pub fn check_same_shape(&self, other: &GridSet) -> Result<()> {
        if self.dim != other.dim || self.level != other.level {
            return Err(FractalError::RepresentationMismatch(format!(
                "grid {}d level {} vs {}d level {}",
                self.dim, self.level, other.dim, other.level
            )));
        }
        Ok(())
    }

    /// Build from raw cell indices assumed valid (internal fast path).
    pub(crate) fn from_cells_unchecked(dim: usize, level: u32, mut cells: Vec<CellIx>) -> Self {
        cells.sort_unstable();
        cells.dedup();
        GridSet { dim, level, cells }
    }

    /// Dilate by `r` cells in Chebyshev distance (used for measure collars).
    pub fn dilate_cells(&self, r: u32) -> GridSet {
        if r == 0 {
            return self.clone();
        }
        let n = Self::cells_per_axis(self.level) as i64;
        let r = r as i64;
        let mut cells = Vec::new();
        let mut offs: Vec<[i64; 3]> = Vec::new();
        collect_offsets(self.dim, r, &mut offs);
        for c in &self.cells {
            for off in &offs {
                let mut nb = [0u32; 3];
                let mut ok = true;
                for ax in 0..self.dim {
                    let v = c[ax] as i64 + off[ax];
                    if v < 0 || v >= n {
                        ok = false;
                        break;
                    }
                    nb[ax] = v as u32;
                }
                if ok && cell_intersects_ball(self.dim, self.level, &nb) {
                    cells.push(nb);
                }
            }
        }
        GridSet::from_cells_unchecked(self.dim, self.level, cells)
    }

    pub fn to_json(&self) -> String {
        let dto = GridDto {
            dim: self.dim,
            level: self.level,
            cells: self
                .cells
                .iter()
                .map(|c| c[..self.dim].to_vec())
                .collect(),
        };
        serde_json::to_string_pretty(&dto).expect("grid serialization")
    }

    pub fn from_json(s: &str) -> Result<GridSet> {
        let dto: GridDto = serde_json::from_str(s)?;
        let cells = dto
            .cells
            .iter()
            .map(|v| {
                if v.len() != dto.dim {
                    return Err(FractalError::Domain(
                        "cell tuple length does not match dim".into(),
                    ));
                }
                let mut c = [0u32; 3];
                c[..v.len()].copy_from_slice(v);
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        GridSet::new(dto.dim, dto.level, cells)
    }

    /// Binary PGM (P5) raster, one pixel per cell, occupied = 0, empty = 255.
    /// 1-D grids render as a single row; rows run from high to low second
    /// coordinate so images match the usual orientation.
    pub fn write_pgm<W: Write>(&self, w: &mut W) -> Result<()> {
        if self.dim > 2 {
            return Err(FractalError::Unsupported(
                "PGM export supports 1-D and 2-D grids".into(),
            ));
        }
        let n = Self::cells_per_axis(self.level) as usize;
        let (width, height) = if self.dim == 1 { (n, 1) } else { (n, n) };
        write!(w, "P5\n{width} {height}\n255\n")?;
        let mut row = vec![255u8; width];
        if self.dim == 1 {
            for c in &self.cells {
                row[c[0] as usize] = 0;
            }
            w.write_all(&row)?;
        } else {
            for y in (0..n as u32).rev() {
                row.fill(255);
                for c in &self.cells {
                    if c[1] == y {
                        row[c[0] as usize] = 0;
                    }
                }
                w.write_all(&row)?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct GridDto {
    dim: usize,
    level: u32,
    cells: Vec<Vec<u32>>,
}

fn fill_rec(dim: usize, level: u32, n: u32, ax: usize, ix: &mut CellIx, out: &mut Vec<CellIx>) {
    if ax == dim {
        if cell_intersects_ball(dim, level, ix) {
            out.push(*ix);
        }
        return;
    }
    for i in 0..n {
        ix[ax] = i;
        fill_rec(dim, level, n, ax + 1, ix, out);
    }
    ix[ax] = 0;
}

fn collect_offsets(dim: usize, r: i64, out: &mut Vec<[i64; 3]>) {
    let mut off = [0i64; 3];
    fn rec(dim: usize, r: i64, ax: usize, off: &mut [i64; 3], out: &mut Vec<[i64; 3]>) {
        if ax == dim {
            out.push(*off);
            return;
        }
        for v in -r..=r {
            off[ax] = v;
            rec(dim, r, ax + 1, off, out);
        }
        off[ax] = 0;
    }
    rec(dim, r, 0, &mut off, out);
}

/// Distance from the origin to the closed cell box is at most 1.
pub fn cell_intersects_ball(dim: usize, level: u32, c: &CellIx) -> bool {
    let h = GridSet::cell_width(level);
    let mut d2 = 0.0;
    for &i in c.iter().take(dim) {
        let lo = -1.0 + i as f64 * h;
        let hi = lo + h;
        let t = lo.max(-hi).max(0.0);
        d2 += t * t;
    }
    d2 <= 1.0 + 1e-12
}

/// Index of the cell containing `p` (half-open convention, clamped so the
/// boundary point 1.0 lands in the last cell).
pub fn index_of(p: &Pt, level: u32) -> CellIx {
    let h = GridSet::cell_width(level);
    let n = GridSet::cells_per_axis(level);
    let mut ix = [0u32; 3];
    for ax in 0..p.dim {
        let raw = ((p.c[ax] + 1.0) / h).floor();
        ix[ax] = (raw.max(0.0) as u32).min(n - 1);
    }
    ix
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_ball_1d_counts() {
        let g = GridSet::full_ball(1, 3);
        assert_eq!(g.len(), 16);
        assert!((g.volume() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ball_clip_2d_drops_corners() {
        let g = GridSet::full_ball(2, 4);
        // corner cell [31,31] has its nearest point at (~0.9375, 0.9375),
        // norm > 1, so it must be clipped
        assert!(!g.contains_cell(&[31, 31, 0]));
        assert!(g.contains_cell(&[15, 15, 0]));
        let disc_area = std::f64::consts::PI;
        let v = g.volume();
        assert!(v > disc_area && v < disc_area + 0.5, "volume {v}");
    }

    #[test]
    fn index_round_trip() {
        let g = GridSet::full_ball(1, 5);
        for c in g.cells() {
            let center = g.cell_center(c);
            assert_eq!(index_of(&center, 5), *c);
        }
    }

    #[test]
    fn runs_merge_adjacent() {
        let g = GridSet::new(1, 2, vec![[0, 0, 0], [1, 0, 0], [3, 0, 0]]).unwrap();
        let runs = g.runs_1d();
        assert_eq!(runs.len(), 2);
        assert!((runs[0].0 + 1.0).abs() < 1e-12);
        assert!((runs[0].1 + 0.5).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let g = GridSet::new(2, 3, vec![[1, 2, 0], [5, 5, 0]]).unwrap();
        let s = g.to_json();
        let back = GridSet::from_json(&s).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn pgm_header() {
        let g = GridSet::full_ball(2, 2);
        let mut buf = Vec::new();
        g.write_pgm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P5\n8 8\n255\n"));
        assert_eq!(buf.len(), b"P5\n8 8\n255\n".len() + 64);
    }
}
