//! Exact unions of closed intervals on the line.
//!
//! The 1-D attractor path iterates the Hutchinson operator on these unions
//! directly, which keeps self-similar examples lattice-exact instead of
//! inflating by a grid cell per step.

/// Sorted, pairwise disjoint closed intervals. Touching intervals are merged.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalSet {
    ivs: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(mut ivs: Vec<(f64, f64)>) -> Self {
        ivs.retain(|&(a, b)| b >= a);
        ivs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(ivs.len());
        for (a, b) in ivs {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        IntervalSet { ivs: out }
    }

    pub fn whole(lo: f64, hi: f64) -> Self {
        IntervalSet { ivs: vec![(lo, hi)] }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.ivs
    }

    pub fn len(&self) -> usize {
        self.ivs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.ivs.iter().map(|(a, b)| b - a).sum()
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        if self.ivs.is_empty() {
            None
        } else {
            Some((self.ivs[0].0, self.ivs[self.ivs.len() - 1].1))
        }
    }

    pub fn contains_point(&self, x: f64) -> bool {
        self.ivs
            .binary_search_by(|&(a, b)| {
                if x < a {
                    std::cmp::Ordering::Greater
                } else if x > b {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    /// Whether `[lo, hi]` is entirely inside one stored interval.
    pub fn contains_interval(&self, lo: f64, hi: f64) -> bool {
        match self.ivs.binary_search_by(|&(a, _)| a.total_cmp(&lo)) {
            Ok(i) => hi <= self.ivs[i].1,
            Err(0) => false,
            Err(i) => lo >= self.ivs[i - 1].0 && hi <= self.ivs[i - 1].1,
        }
    }

    /// Distance from `x` to the set (0 when inside).
    pub fn distance_to(&self, x: f64) -> f64 {
        if self.is_empty() {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        for &(a, b) in &self.ivs {
            if x < a {
                best = best.min(a - x);
                break; // sorted: later intervals only farther
            } else if x <= b {
                return 0.0;
            } else {
                best = best.min(x - b);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_touching_and_overlapping() {
        let s = IntervalSet::new(vec![(0.4, 0.6), (0.0, 0.2), (0.2, 0.3)]);
        assert_eq!(s.intervals(), &[(0.0, 0.3), (0.4, 0.6)]);
        assert!((s.total_length() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn membership_and_distance() {
        let s = IntervalSet::new(vec![(0.0, 0.25), (0.5, 1.0)]);
        assert!(s.contains_point(0.25));
        assert!(!s.contains_point(0.3));
        assert!(s.contains_interval(0.6, 0.9));
        assert!(!s.contains_interval(0.2, 0.6));
        assert!((s.distance_to(0.375) - 0.125).abs() < 1e-15);
        assert_eq!(s.distance_to(0.75), 0.0);
        assert!((s.distance_to(-0.5) - 0.5).abs() < 1e-15);
    }
}
