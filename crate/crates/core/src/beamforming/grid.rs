use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform direction-cosine sampling `u ∈ [u_min, u_max]`, `v ∈ [v_min, v_max]`
/// with both end points included. Samples are stored `u`-major: index
/// `i * n_v + j` holds `(u_i, v_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularGrid {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub n_u: usize,
    pub n_v: usize,
}

impl AngularGrid {
    /// `n × n` samples over the whole `[-1, 1]²` square.
    pub fn full(n: usize) -> Self {
        Self {
            u_min: -1.0,
            u_max: 1.0,
            v_min: -1.0,
            v_max: 1.0,
            n_u: n,
            n_v: n,
        }
    }

    /// `n × n` samples over a square window of half-width `half_width`
    /// around `center`, clipped to `[-1, 1]²`.
    pub fn around(center: (f64, f64), half_width: f64, n: usize) -> Self {
        Self {
            u_min: (center.0 - half_width).max(-1.0),
            u_max: (center.0 + half_width).min(1.0),
            v_min: (center.1 - half_width).max(-1.0),
            v_max: (center.1 + half_width).min(1.0),
            n_u: n,
            n_v: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |a: f64, b: f64| a.is_finite() && b.is_finite() && -1.0 <= a && a <= b && b <= 1.0;
        if !in_range(self.u_min, self.u_max) || !in_range(self.v_min, self.v_max) {
            return Err(Error::Domain(format!(
                "grid ranges must satisfy -1 <= min <= max <= 1, got u [{}, {}], v [{}, {}]",
                self.u_min, self.u_max, self.v_min, self.v_max
            )));
        }
        if self.n_u == 0 || self.n_v == 0 {
            return Err(Error::Domain("grid must have at least one sample per axis".into()));
        }
        if (self.n_u == 1 && self.u_min != self.u_max) || (self.n_v == 1 && self.v_min != self.v_max) {
            return Err(Error::Domain("a single-sample axis needs min == max".into()));
        }
        Ok(())
    }

    fn sample(min: f64, max: f64, n: usize, i: usize) -> f64 {
        if n == 1 {
            min
        } else if i + 1 == n {
            max
        } else {
            min + (max - min) * (i as f64 / (n - 1) as f64)
        }
    }

    pub fn u(&self, i: usize) -> f64 {
        Self::sample(self.u_min, self.u_max, self.n_u, i)
    }

    pub fn v(&self, j: usize) -> f64 {
        Self::sample(self.v_min, self.v_max, self.n_v, j)
    }

    pub fn du(&self) -> f64 {
        if self.n_u > 1 {
            (self.u_max - self.u_min) / (self.n_u - 1) as f64
        } else {
            0.0
        }
    }

    pub fn dv(&self) -> f64 {
        if self.n_v > 1 {
            (self.v_max - self.v_min) / (self.n_v - 1) as f64
        } else {
            0.0
        }
    }

    pub fn len(&self) -> usize {
        self.n_u * self.n_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_v + j
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.n_v, index % self.n_v)
    }

    /// Whether sample `(i, j)` lies in the visible region `u² + v² ≤ 1`.
    #[inline]
    pub fn is_visible(&self, i: usize, j: usize) -> bool {
        let (u, v) = (self.u(i), self.v(j));
        u * u + v * v <= 1.0
    }

    /// Visible-region mask in sample order.
    pub fn visible_mask(&self) -> Vec<bool> {
        (0..self.n_u)
            .flat_map(|i| (0..self.n_v).map(move |j| (i, j)))
            .map(|(i, j)| self.is_visible(i, j))
            .collect()
    }

    /// Grid sample nearest to `(u, v)`, or `None` if the point lies outside
    /// the grid rectangle (by more than half a cell).
    pub fn nearest(&self, u: f64, v: f64) -> Option<(usize, usize)> {
        let axis = |x: f64, min: f64, max: f64, n: usize, step: f64| -> Option<usize> {
            if n == 1 {
                return ((x - min).abs() <= f64::EPSILON).then_some(0);
            }
            if x < min - step / 2.0 || x > max + step / 2.0 {
                return None;
            }
            Some((((x - min) / step).round().max(0.0) as usize).min(n - 1))
        };
        Some((
            axis(u, self.u_min, self.u_max, self.n_u, self.du())?,
            axis(v, self.v_min, self.v_max, self.n_v, self.dv())?,
        ))
    }

    /// True when the grid spans the whole `[-1, 1]²` square.
    pub fn covers_visible_region(&self) -> bool {
        self.u_min <= -1.0 && self.u_max >= 1.0 && self.v_min <= -1.0 && self.v_max >= 1.0
    }
}

impl Default for AngularGrid {
    fn default() -> Self {
        Self::full(1024)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn includes_boundary_points() {
        let g = AngularGrid::full(1024);
        assert_eq!(g.u(0), -1.0);
        assert_eq!(g.u(1023), 1.0);
        assert_eq!(g.v(1023), 1.0);
        let h = AngularGrid::full(5);
        let us: Vec<f64> = (0..5).map(|i| h.u(i)).collect();
        assert_eq!(us, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        for w in us.windows(2) {
            assert!((w[1] - w[0] - h.du()).abs() < 1e-15);
        }
    }

    #[test]
    fn visible_mask_excludes_corners() {
        let g = AngularGrid::full(5);
        assert!(g.is_visible(2, 2));
        assert!(g.is_visible(0, 2));
        assert!(!g.is_visible(0, 0));
        assert_eq!(g.visible_mask().iter().filter(|&&m| m).count(), 13);
    }

    #[test]
    fn nearest_sample() {
        let g = AngularGrid::full(5);
        assert_eq!(g.nearest(0.1, -0.6), Some((2, 1)));
        assert_eq!(g.nearest(1.2, 0.0), Some((4, 2)));
        assert_eq!(g.nearest(1.3, 0.0), None);
    }

    #[test]
    fn rejects_bad_ranges() {
        let mut g = AngularGrid::full(8);
        g.u_max = 1.5;
        assert!(g.validate().is_err());
        let g = AngularGrid { n_u: 0, ..AngularGrid::full(8) };
        assert!(g.validate().is_err());
    }
}
