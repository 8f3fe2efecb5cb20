//! Directed and symmetric Hausdorff distances between finite point sets.
//!
//! The reference algorithm is the exact max-min double loop with an
//! early-abandon test (a point cannot raise the running maximum once any
//! partner within that maximum is found). Above `HASH_THRESHOLD` points the
//! target set is bucketed into a uniform spatial hash; results are identical.

use std::collections::HashMap;

use crate::linalg::Pt;

pub const HASH_THRESHOLD: usize = 10_000;

/// max over `from` of the distance to the nearest point of `to`.
pub fn directed(from: &[Pt], to: &[Pt]) -> f64 {
    assert!(!from.is_empty() && !to.is_empty());
    if to.len() > HASH_THRESHOLD {
        return directed_hashed(from, to);
    }
    let mut max = 0.0f64;
    for a in from {
        let mut best = f64::INFINITY;
        for b in to {
            let d = a.dist(b);
            if d < best {
                best = d;
                if best <= max {
                    break;
                }
            }
        }
        if best > max {
            max = best;
        }
    }
    max
}

/// Symmetric Hausdorff distance between finite point sets.
pub fn symmetric(a: &[Pt], b: &[Pt]) -> f64 {
    directed(a, b).max(directed(b, a))
}

struct SpatialHash {
    dim: usize,
    cell: f64,
    origin: [f64; 3],
    buckets: HashMap<[i32; 3], Vec<u32>>,
}

impl SpatialHash {
    fn build(points: &[Pt]) -> Self {
        let dim = points[0].dim;
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for a in 0..dim {
                lo[a] = lo[a].min(p.c[a]);
                hi[a] = hi[a].max(p.c[a]);
            }
        }
        let mut vol = 1.0;
        for a in 0..dim {
            vol *= (hi[a] - lo[a]).max(1e-9);
        }
        // aim for a handful of points per bucket
        let cell = (vol * 4.0 / points.len() as f64)
            .powf(1.0 / dim as f64)
            .max(1e-9);
        let mut buckets: HashMap<[i32; 3], Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets
                .entry(Self::key_of(dim, cell, &lo, p))
                .or_default()
                .push(i as u32);
        }
        SpatialHash {
            dim,
            cell,
            origin: lo,
            buckets,
        }
    }

    fn key_of(dim: usize, cell: f64, origin: &[f64; 3], p: &Pt) -> [i32; 3] {
        let mut k = [0i32; 3];
        for a in 0..dim {
            k[a] = ((p.c[a] - origin[a]) / cell).floor() as i32;
        }
        k
    }

    /// Exact nearest-neighbour distance from `q`, or any value `<= abandon`
    /// as soon as one partner at most `abandon` away is found.
    fn nn_dist(&self, points: &[Pt], q: &Pt, abandon: f64) -> f64 {
        let key = Self::key_of(self.dim, self.cell, &self.origin, q);
        let mut best = f64::INFINITY;
        let mut ring = 0i32;
        loop {
            // points in buckets at Chebyshev ring r are at least (r-1)*cell away
            if best.min(abandon) < (ring - 1).max(0) as f64 * self.cell {
                return best;
            }
            let mut any_bucket = false;
            self.for_ring(&key, ring, |bk| {
                if let Some(ids) = self.buckets.get(&bk) {
                    any_bucket = true;
                    for &i in ids {
                        let d = q.dist(&points[i as usize]);
                        if d < best {
                            best = d;
                        }
                    }
                }
            });
            if best <= abandon {
                return best;
            }
            if !any_bucket && ring as f64 * self.cell > 4.0 && best < f64::INFINITY {
                return best;
            }
            ring += 1;
            if ring > 2_000_000 {
                return best;
            }
        }
    }

    fn for_ring<F: FnMut([i32; 3])>(&self, key: &[i32; 3], r: i32, mut f: F) {
        match self.dim {
            1 => {
                if r == 0 {
                    f(*key);
                } else {
                    f([key[0] - r, 0, 0]);
                    f([key[0] + r, 0, 0]);
                }
            }
            2 => {
                for dx in -r..=r {
                    for dy in -r..=r {
                        if dx.abs().max(dy.abs()) == r {
                            f([key[0] + dx, key[1] + dy, 0]);
                        }
                    }
                }
            }
            _ => {
                for dx in -r..=r {
                    for dy in -r..=r {
                        for dz in -r..=r {
                            if dx.abs().max(dy.abs()).max(dz.abs()) == r {
                                f([key[0] + dx, key[1] + dy, key[2] + dz]);
                            }
                        }
                    }
                }
            }
        }
    }
}

fn directed_hashed(from: &[Pt], to: &[Pt]) -> f64 {
    let hash = SpatialHash::build(to);
    let mut max = 0.0f64;
    for a in from {
        let d = hash.nn_dist(to, a, max);
        if d > max {
            max = d;
        }
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn brute_directed(from: &[Pt], to: &[Pt]) -> f64 {
        from.iter()
            .map(|a| {
                to.iter()
                    .map(|b| a.dist(b))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for dim in 1..=3usize {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng, n: usize| -> Vec<Pt> {
                (0..n)
                    .map(|_| {
                        let mut c = [0.0; 3];
                        for a in c.iter_mut().take(dim) {
                            *a = rng.gen_range(-0.7..0.7);
                        }
                        Pt::new(dim, c)
                    })
                    .collect()
            };
            let a = mk(&mut rng, 120);
            let b = mk(&mut rng, 75);
            assert!((directed(&a, &b) - brute_directed(&a, &b)).abs() < 1e-14);
            assert!((symmetric(&a, &b) - symmetric(&b, &a)).abs() == 0.0);
        }
    }

    #[test]
    fn hashed_path_matches() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mk = |rng: &mut rand_chacha::ChaCha8Rng, n: usize| -> Vec<Pt> {
            (0..n)
                .map(|_| Pt::new(2, [rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9), 0.0]))
                .collect()
        };
        let a = mk(&mut rng, 400);
        let b = mk(&mut rng, 12_000); // forces the spatial hash
        assert!((directed(&a, &b) - brute_directed(&a, &b)).abs() < 1e-14);
    }
}
