//! Compact-set representations on the closed unit ball, the Hausdorff
//! metric, ε-neighborhoods and diameters.
//!
//! Two representations are provided: dyadic occupancy grids ([`GridSet`])
//! and finite ε-nets ([`PointCloud`]). Grid metrics are measured between
//! cell centers and carry an explicit one-cell-diagonal uncertainty;
//! cloud metrics are exact over the stored samples.

mod cloud;
mod grid;
pub mod hausdorff;

pub use cloud::{unit_ball_net, PointCloud};
pub use grid::{cell_intersects_ball, index_of, CellIx, GridSet};

use crate::error::{FractalError, Result};
use crate::linalg::Pt;

/// A compact-set representation.
#[derive(Clone, Debug, PartialEq)]
pub enum SetRep {
    Grid(GridSet),
    Cloud(PointCloud),
}

impl SetRep {
    pub fn dim(&self) -> usize {
        match self {
            SetRep::Grid(g) => g.dim(),
            SetRep::Cloud(c) => c.dim(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SetRep::Grid(g) => g.is_empty(),
            SetRep::Cloud(c) => c.is_empty(),
        }
    }

    pub fn as_grid(&self) -> Option<&GridSet> {
        match self {
            SetRep::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_cloud(&self) -> Option<&PointCloud> {
        match self {
            SetRep::Cloud(c) => Some(c),
            _ => None,
        }
    }

    pub fn union(&self, other: &SetRep) -> Result<SetRep> {
        match (self, other) {
            (SetRep::Grid(a), SetRep::Grid(b)) => Ok(SetRep::Grid(a.union(b)?)),
            (SetRep::Cloud(a), SetRep::Cloud(b)) => Ok(SetRep::Cloud(a.union(b)?)),
            _ => Err(FractalError::RepresentationMismatch(
                "cannot mix grid and cloud".into(),
            )),
        }
    }
}

/// An open ball of the ambient space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: Pt,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Pt, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(FractalError::Domain("ball radius must be positive".into()));
        }
        if center.norm() + radius > 1.0 + 1e-12 {
            return Err(FractalError::Domain(
                "ball must stay inside the unit ball".into(),
            ));
        }
        Ok(Ball { center, radius })
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }
}

/// A measured length together with its representation uncertainty.
/// Inequality checks downstream must add `slack` to stay sound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HdEstimate {
    pub value: f64,
    pub slack: f64,
}

/// Hausdorff distance between two representations of the same kind.
///
/// Point clouds: exact max-min over the samples, symmetric, zero iff the
/// point sets coincide. Grids: distance between cell centers with a
/// one-cell-diagonal slack.
pub fn hausdorff_distance(a: &SetRep, b: &SetRep) -> Result<HdEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(FractalError::EmptySet("hausdorff_distance".into()));
    }
    match (a, b) {
        (SetRep::Cloud(x), SetRep::Cloud(y)) => {
            x.check_same_shape(y)?;
            Ok(HdEstimate {
                value: hausdorff::symmetric(x.points(), y.points()),
                slack: 0.0,
            })
        }
        (SetRep::Grid(x), SetRep::Grid(y)) => {
            x.check_same_shape(y)?;
            let value = if x == y {
                0.0
            } else {
                hausdorff::symmetric(&x.centers(), &y.centers())
            };
            Ok(HdEstimate {
                value,
                slack: x.diag(),
            })
        }
        _ => Err(FractalError::RepresentationMismatch(
            "cannot compare grid with cloud".into(),
        )),
    }
}

/// The ε-neighborhood of `a` inside the unit ball, in the same
/// representation.
///
/// Grids return `a` plus every cell that provably lies inside the true
/// ε-neighborhood of the occupied region (center distance + half diagonal
/// within eps). This under-inclusion keeps `N_{e1+e2}(A) ⊇ N_{e2}(N_{e1}(A))`
/// and `eps = 0 ↦ A` simultaneously true, which the naive
/// center-within-eps rule violates.
pub fn epsilon_neighborhood(a: &SetRep, eps: f64) -> Result<SetRep> {
    if eps < 0.0 {
        return Err(FractalError::Domain(
            "negative neighborhood radius".into(),
        ));
    }
    match a {
        SetRep::Cloud(c) => {
            // a finite net stays a net of the fattened set with coarser ε
            Ok(SetRep::Cloud(PointCloud::new(
                c.dim(),
                c.points().to_vec(),
                c.resolution() + eps,
            )?))
        }
        SetRep::Grid(g) => Ok(SetRep::Grid(grid_neighborhood(g, eps))),
    }
}

fn grid_neighborhood(g: &GridSet, eps: f64) -> GridSet {
    let h = g.width();
    let dim = g.dim();
    let reach = eps - g.half_diag();
    if reach < 0.0 || g.is_empty() {
        return g.clone();
    }
    // offsets d such that the candidate center (occupied box + d*h) is within
    // `reach` of the occupied box; the distance depends only on d
    let r = (reach / h).ceil() as i64 + 1;
    let mut offsets: Vec<[i64; 3]> = Vec::new();
    let mut off = [0i64; 3];
    collect_rec(dim, r, 0, &mut off, &mut |o: &[i64; 3]| {
        let mut d2 = 0.0;
        for &v in o.iter().take(dim) {
            let t = (v.abs() as f64 * h - 0.5 * h).max(0.0);
            d2 += t * t;
        }
        if d2.sqrt() <= reach {
            offsets.push(*o);
        }
    });
    let n = GridSet::cells_per_axis(g.level()) as i64;
    let mut cells = g.cells().to_vec();
    for c in g.cells() {
        for o in &offsets {
            let mut nb = [0u32; 3];
            let mut ok = true;
            for ax in 0..dim {
                let v = c[ax] as i64 + o[ax];
                if v < 0 || v >= n {
                    ok = false;
                    break;
                }
                nb[ax] = v as u32;
            }
            if ok && cell_intersects_ball(dim, g.level(), &nb) {
                cells.push(nb);
            }
        }
    }
    GridSet::from_cells_unchecked(dim, g.level(), cells)
}

fn collect_rec<F: FnMut(&[i64; 3])>(dim: usize, r: i64, ax: usize, off: &mut [i64; 3], f: &mut F) {
    if ax == dim {
        f(off);
        return;
    }
    for v in -r..=r {
        off[ax] = v;
        collect_rec(dim, r, ax + 1, off, f);
    }
    off[ax] = 0;
}

/// Maximum pairwise distance. Point clouds are exact over the samples;
/// grids report the exact diameter of the occupied cell union (an upper
/// estimate for the represented set).
pub fn diameter(a: &SetRep) -> Result<f64> {
    if a.is_empty() {
        return Err(FractalError::EmptySet("diameter".into()));
    }
    match a {
        SetRep::Cloud(c) => {
            let pts = c.points();
            let mut best = 0.0f64;
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    best = best.max(pts[i].dist(&pts[j]));
                }
            }
            Ok(best)
        }
        SetRep::Grid(g) => Ok(grid_diameter(g)),
    }
}

fn grid_diameter(g: &GridSet) -> f64 {
    if g.dim() == 1 {
        let c = g.cells();
        let h = g.width();
        let lo = -1.0 + c[0][0] as f64 * h;
        let hi = -1.0 + (c[c.len() - 1][0] + 1) as f64 * h;
        return hi - lo;
    }
    // diameter extremes lie on boundary cells; compare farthest corners
    let cells = g.boundary_cells();
    let h = g.width();
    let dim = g.dim();
    let mut best = 0.0f64;
    for i in 0..cells.len() {
        let a = g.cell_low(&cells[i]);
        for b_ix in cells.iter().skip(i) {
            let b = g.cell_low(b_ix);
            let mut d2 = 0.0;
            for ax in 0..dim {
                let lo_a = a.c[ax];
                let lo_b = b.c[ax];
                let t = (lo_b + h - lo_a).abs().max((lo_a + h - lo_b).abs());
                d2 += t * t;
            }
            best = best.max(d2.sqrt());
        }
    }
    best
}

/// Residual of the union subadditivity inequality
/// `Hd(∪A_i, ∪B_i) ≤ sup_i Hd(A_i, B_i)`.
#[derive(Clone, Copy, Debug)]
pub struct SubadditivityResidual {
    /// `Hd(∪A, ∪B) − sup_i Hd(A_i, B_i)`; at most `slack` when the
    /// inequality holds for the represented sets.
    pub residual: f64,
    pub slack: f64,
}

pub fn union_subadditivity_check(
    parts_a: &[SetRep],
    parts_b: &[SetRep],
) -> Result<SubadditivityResidual> {
    if parts_a.len() != parts_b.len() || parts_a.is_empty() {
        return Err(FractalError::Domain(
            "part lists must be nonempty and of equal length".into(),
        ));
    }
    let mut sup = 0.0f64;
    let mut part_slack = 0.0f64;
    for (a, b) in parts_a.iter().zip(parts_b) {
        let e = hausdorff_distance(a, b)?;
        sup = sup.max(e.value);
        part_slack = part_slack.max(e.slack);
    }
    let mut ua = parts_a[0].clone();
    let mut ub = parts_b[0].clone();
    for p in &parts_a[1..] {
        ua = ua.union(p)?;
    }
    for p in &parts_b[1..] {
        ub = ub.union(p)?;
    }
    let whole = hausdorff_distance(&ua, &ub)?;
    Ok(SubadditivityResidual {
        residual: whole.value - sup,
        slack: whole.slack + part_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn cloud_of(dim: usize, pts: &[&[f64]]) -> SetRep {
        SetRep::Cloud(
            PointCloud::new(dim, pts.iter().map(|p| Pt::from_slice(p)).collect(), 0.1).unwrap(),
        )
    }

    fn random_cloud(rng: &mut rand_chacha::ChaCha8Rng, dim: usize, n: usize) -> SetRep {
        let pts: Vec<Pt> = (0..n)
            .map(|_| {
                let mut c = [0.0; 3];
                for a in c.iter_mut().take(dim) {
                    *a = rng.gen_range(-0.65..0.65);
                }
                Pt::new(dim, c)
            })
            .collect();
        SetRep::Cloud(PointCloud::new(dim, pts, 0.05).unwrap())
    }

    #[test]
    fn identity_is_zero() {
        let a = cloud_of(1, &[&[0.3], &[-0.4]]);
        let d = hausdorff_distance(&a, &a).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn singleton_distance() {
        let a = cloud_of(1, &[&[0.0]]);
        let b = cloud_of(1, &[&[0.5]]);
        assert!((hausdorff_distance(&a, &b).unwrap().value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_pair_brute_force_value() {
        // A = {-0.5, 0.5}, B = {-0.5}: directed A->B = 1.0, B->A = 0 => 1.0
        let a = cloud_of(1, &[&[-0.5], &[0.5]]);
        let b = cloud_of(1, &[&[-0.5]]);
        assert!((hausdorff_distance(&a, &b).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let a = random_cloud(&mut rng, 2, 30);
            let b = random_cloud(&mut rng, 2, 25);
            let c = random_cloud(&mut rng, 2, 35);
            let ab = hausdorff_distance(&a, &b).unwrap().value;
            let ba = hausdorff_distance(&b, &a).unwrap().value;
            assert_eq!(ab, ba);
            let ac = hausdorff_distance(&a, &c).unwrap().value;
            let bc = hausdorff_distance(&b, &c).unwrap().value;
            assert!(ac <= ab + bc + 1e-12);
        }
    }

    #[test]
    fn grid_distance_carries_diag_slack() {
        let g1 = SetRep::Grid(GridSet::new(1, 4, vec![[16, 0, 0]]).unwrap());
        let g2 = SetRep::Grid(GridSet::new(1, 4, vec![[24, 0, 0]]).unwrap());
        let e = hausdorff_distance(&g1, &g2).unwrap();
        assert!((e.value - 0.5).abs() < 1e-12); // centers 0.03125 vs 0.53125
        assert!((e.slack - GridSet::cell_width(4)).abs() < 1e-15);
    }

    #[test]
    fn mismatch_errors() {
        let g = SetRep::Grid(GridSet::full_ball(1, 2));
        let c = cloud_of(1, &[&[0.0]]);
        assert!(hausdorff_distance(&g, &c).is_err());
        let g5 = SetRep::Grid(GridSet::full_ball(1, 5));
        assert!(hausdorff_distance(&g, &g5).is_err());
    }

    #[test]
    fn neighborhood_eps_zero_is_identity() {
        let g = SetRep::Grid(GridSet::new(1, 4, vec![[16, 0, 0]]).unwrap());
        assert_eq!(epsilon_neighborhood(&g, 0.0).unwrap(), g);
        assert!(epsilon_neighborhood(&g, -0.1).is_err());
    }

    #[test]
    fn neighborhood_covers_stated_interval() {
        // cell containing 0 at level 4, eps = 0.25 -> cells covering [-0.25, 0.25]
        let g = GridSet::new(1, 4, vec![[16, 0, 0]]).unwrap();
        let nb = match epsilon_neighborhood(&SetRep::Grid(g), 0.25).unwrap() {
            SetRep::Grid(g) => g,
            _ => unreachable!(),
        };
        let runs = nb.runs_1d();
        assert_eq!(runs.len(), 1);
        assert!(runs[0].0 <= -0.25 + 1e-12 && runs[0].1 >= 0.25 - 1e-12);
    }

    #[test]
    fn neighborhood_monotone_and_nested() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let mut cells = Vec::new();
            for _ in 0..6 {
                cells.push([rng.gen_range(0u32..64), rng.gen_range(0u32..64), 0]);
            }
            let cells: Vec<_> = cells
                .into_iter()
                .filter(|c| cell_intersects_ball(2, 5, c))
                .collect();
            if cells.is_empty() {
                continue;
            }
            let a = SetRep::Grid(GridSet::new(2, 5, cells).unwrap());
            let n18 = epsilon_neighborhood(&a, 0.125).unwrap();
            let n14 = epsilon_neighborhood(&a, 0.25).unwrap();
            let composed = epsilon_neighborhood(&n18, 0.125).unwrap();
            let subset = |x: &SetRep, y: &SetRep| {
                let (gx, gy) = (x.as_grid().unwrap(), y.as_grid().unwrap());
                gx.cells().iter().all(|c| gy.contains_cell(c))
            };
            assert!(subset(&a, &n18), "A ⊆ N(A)");
            assert!(subset(&n18, &n14), "N_{{1/8}}(A) ⊆ N_{{1/4}}(A)");
            assert!(subset(&composed, &n14), "N∘N ⊆ N_{{e1+e2}}");
        }
    }

    #[test]
    fn diameter_examples() {
        let single = cloud_of(2, &[&[0.1, 0.2]]);
        assert_eq!(diameter(&single).unwrap(), 0.0);
        let pair = cloud_of(1, &[&[-1.0], &[1.0]]);
        assert!((diameter(&pair).unwrap() - 2.0).abs() < 1e-15);
        let square = cloud_of(2, &[&[0.0, 0.0], &[0.5, 0.0], &[0.0, 0.5], &[0.5, 0.5]]);
        assert!((diameter(&square).unwrap() - 0.5 * 2.0f64.sqrt()).abs() < 1e-15);
        let empty = SetRep::Cloud(PointCloud::new(1, vec![], 0.1).unwrap());
        assert!(diameter(&empty).is_err());
    }

    #[test]
    fn grid_diameter_full_ball() {
        let g = SetRep::Grid(GridSet::full_ball(1, 6));
        assert!((diameter(&g).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn subadditivity_on_random_clouds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let parts_a: Vec<SetRep> = (0..3).map(|_| random_cloud(&mut rng, 2, 20)).collect();
            // B_i = A_i jittered by up to 0.02
            let parts_b: Vec<SetRep> = parts_a
                .iter()
                .map(|a| {
                    let c = a.as_cloud().unwrap();
                    let pts = c
                        .points()
                        .iter()
                        .map(|p| {
                            let mut q = *p;
                            for ax in 0..2 {
                                q.c[ax] += rng.gen_range(-0.02..0.02);
                            }
                            q
                        })
                        .collect();
                    SetRep::Cloud(PointCloud::new(2, pts, 0.05).unwrap())
                })
                .collect();
            let r = union_subadditivity_check(&parts_a, &parts_b).unwrap();
            assert!(r.residual <= r.slack + 1e-12, "residual {}", r.residual);
        }
    }

    #[test]
    fn subadditivity_identical_parts() {
        let a = cloud_of(1, &[&[0.1], &[0.4]]);
        let b = cloud_of(1, &[&[-0.3]]);
        let r = union_subadditivity_check(
            &[a.clone(), b.clone()],
            &[a, b],
        )
        .unwrap();
        assert_eq!(r.residual, 0.0 - 0.0);
    }
}
