//! Finite point clouds acting as ε-nets of compact subsets of the unit ball.

use serde::{Deserialize, Serialize};

use crate::error::{FractalError, Result};
use crate::linalg::Pt;

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Pt>,
    /// Guaranteed ε such that the cloud is an ε-net of the set it represents.
    resolution: f64,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<Pt>, resolution: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(FractalError::Domain(format!(
                "ambient dimension {dim} not in 1..=3"
            )));
        }
        if !(resolution > 0.0) {
            return Err(FractalError::Domain("resolution must be positive".into()));
        }
        for p in &points {
            if p.dim != dim {
                return Err(FractalError::Domain("point dimension mismatch".into()));
            }
            if p.norm() > 1.0 + 1e-12 {
                return Err(FractalError::Domain(format!(
                    "point outside the unit ball (|x| = {})",
                    p.norm()
                )));
            }
        }
        Ok(PointCloud {
            dim,
            points,
            resolution,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Pt] {
        &self.points
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn check_same_shape(&self, other: &PointCloud) -> Result<()> {
        if self.dim != other.dim {
            return Err(FractalError::RepresentationMismatch(format!(
                "cloud {}d vs {}d",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn union(&self, other: &PointCloud) -> Result<PointCloud> {
        self.check_same_shape(other)?;
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        PointCloud::new(self.dim, points, self.resolution.max(other.resolution))
    }

    pub fn to_json(&self) -> String {
        let dto = CloudDto {
            dim: self.dim,
            resolution: self.resolution,
            points: self
                .points
                .iter()
                .map(|p| p.coords().to_vec())
                .collect(),
        };
        serde_json::to_string_pretty(&dto).expect("cloud serialization")
    }

    pub fn from_json(s: &str) -> Result<PointCloud> {
        let dto: CloudDto = serde_json::from_str(s)?;
        let points = dto
            .points
            .iter()
            .map(|v| {
                if v.len() != dto.dim {
                    return Err(FractalError::Domain(
                        "point length does not match dim".into(),
                    ));
                }
                Ok(Pt::from_slice(v))
            })
            .collect::<Result<Vec<_>>>()?;
        PointCloud::new(dto.dim, points, dto.resolution)
    }
}

#[derive(Serialize, Deserialize)]
struct CloudDto {
    dim: usize,
    resolution: f64,
    points: Vec<Vec<f64>>,
}

/// Deterministic ε-net of the closed unit ball: lattice points of step
/// `eps / sqrt(dim)`, with out-of-ball lattice points projected onto the
/// sphere, which keeps the net property near the boundary.
pub fn unit_ball_net(dim: usize, eps: f64) -> PointCloud {
    assert!(eps > 0.0);
    let step = eps / (dim as f64).sqrt();
    let n = (2.0 / step).ceil() as i64 + 1;
    let mut points = Vec::new();
    let mut ix = [0i64; 3];
    fn rec(dim: usize, n: i64, step: f64, ax: usize, ix: &mut [i64; 3], out: &mut Vec<Pt>) {
        if ax == dim {
            let mut c = [0.0; 3];
            for a in 0..dim {
                c[a] = (-1.0 + ix[a] as f64 * step).min(1.0);
            }
            let mut p = Pt::new(dim, c);
            let r = p.norm();
            if r > 1.0 {
                // project onto the sphere; only near-boundary cells land here
                if r > 1.0 + step * (dim as f64).sqrt() {
                    return;
                }
                for a in 0..dim {
                    p.c[a] /= r;
                }
            }
            out.push(p);
            return;
        }
        for i in 0..=n {
            ix[ax] = i;
            rec(dim, n, step, ax + 1, ix, out);
        }
    }
    rec(dim, n, step, 0, &mut ix, &mut points);
    // projection can produce near-duplicates; keep them, they are harmless
    PointCloud::new(dim, points, eps).expect("net construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn net_covers_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=2usize {
            let eps = 0.15;
            let net = unit_ball_net(dim, eps);
            for _ in 0..200 {
                // rejection-sample a point of the ball
                let p = loop {
                    let mut c = [0.0; 3];
                    for a in c.iter_mut().take(dim) {
                        *a = rng.gen_range(-1.0..1.0);
                    }
                    let p = Pt::new(dim, c);
                    if p.norm() <= 1.0 {
                        break p;
                    }
                };
                let d = net
                    .points()
                    .iter()
                    .map(|q| q.dist(&p))
                    .fold(f64::INFINITY, f64::min);
                assert!(d <= eps + 1e-12, "dim {dim}: gap {d} > eps {eps}");
            }
        }
    }

    #[test]
    fn rejects_outside_ball() {
        let p = Pt::new(1, [1.5, 0.0, 0.0]);
        assert!(PointCloud::new(1, vec![p], 0.1).is_err());
    }
}
