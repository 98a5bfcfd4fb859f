use super::{GeometryGenerator, GeometrySpec};
use crate::error::{Error, Result};

/// `nx × ny` platform grid at pitch `spacing_m`, used for both dense
/// half-wavelength lattices and sparse square swarms.
#[derive(Debug, Clone, Copy, Default)]
pub struct RectangularGenerator;

impl RectangularGenerator {
    fn dims(spec: &GeometrySpec) -> Result<(usize, usize)> {
        if let Some([nx, ny]) = spec.grid_dims {
            if nx * ny != spec.n_platforms {
                return Err(Error::Config(format!(
                    "grid_dims {nx}x{ny} does not match n_platforms = {}",
                    spec.n_platforms
                )));
            }
            return Ok((nx, ny));
        }
        let side = (spec.n_platforms as f64).sqrt().round() as usize;
        if side * side != spec.n_platforms {
            return Err(Error::Config(format!(
                "n_platforms = {} is not a perfect square; set grid_dims = [nx, ny]",
                spec.n_platforms
            )));
        }
        Ok((side, side))
    }
}

impl GeometryGenerator for RectangularGenerator {
    fn name(&self) -> &'static str {
        "rectangular"
    }

    fn platform_layout(&self, spec: &GeometrySpec) -> Result<(Vec<[f64; 2]>, Vec<i32>)> {
        let (nx, ny) = Self::dims(spec)?;
        let d = spec.spacing_m;
        let x0 = (nx as f64 - 1.0) / 2.0;
        let y0 = (ny as f64 - 1.0) / 2.0;
        let centers: Vec<[f64; 2]> = (0..ny)
            .flat_map(|iy| (0..nx).map(move |ix| [(ix as f64 - x0) * d, (iy as f64 - y0) * d]))
            .collect();
        let arms = vec![-1; centers.len()];
        Ok((centers, arms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{compute_stats, generate};

    const LAMBDA: f64 = 0.15;

    fn freq() -> f64 {
        crate::SPEED_OF_LIGHT / LAMBDA
    }

    #[test]
    fn single_platform_at_origin() {
        let g = generate(&GeometrySpec::lattice(1, 1, LAMBDA / 2.0, freq())).unwrap();
        assert_eq!(g.positions(), &[[0.0, 0.0]]);
    }

    #[test]
    fn two_by_two_is_symmetric() {
        let g = generate(&GeometrySpec::lattice(2, 2, 0.075, freq())).unwrap();
        let expected = [[-0.0375, -0.0375], [0.0375, -0.0375], [-0.0375, 0.0375], [0.0375, 0.0375]];
        for (p, e) in g.positions().iter().zip(expected) {
            assert!((p[0] - e[0]).abs() < 1e-15 && (p[1] - e[1]).abs() < 1e-15, "{p:?}");
        }
        assert!(g.arms().iter().all(|&a| a == -1));
    }

    #[test]
    fn non_square_count_needs_dims() {
        let mut spec = GeometrySpec::lattice(4, 3, 0.075, freq());
        spec.grid_dims = None;
        assert!(matches!(generate(&spec), Err(Error::Config(_))));
        spec.grid_dims = Some([4, 3]);
        assert_eq!(generate(&spec).unwrap().len(), 12);
        spec.grid_dims = Some([5, 3]);
        assert!(matches!(generate(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn dense_lattice_stats() {
        let g = generate(&GeometrySpec::lattice(32, 32, LAMBDA / 2.0, freq())).unwrap();
        let s = compute_stats(&g).unwrap();
        // direct arithmetic over the generated coordinates
        let xs: Vec<f64> = g.positions().iter().map(|p| p[0]).collect();
        let span = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
        assert!((span - 31.0 * 0.075).abs() < 1e-12);
        assert!((s.d_ave.unwrap() - 0.075).abs() < 1e-12);
        assert!((s.aperture_diameter - 31.0 * 0.075 * 2f64.sqrt()).abs() < 1e-12);
        assert!((s.aperture_diameter - 3.288).abs() < 1e-3);
    }

    #[test]
    fn subarrays_expand_each_platform() {
        let spec = GeometrySpec::lattice(3, 3, 1.0, freq()).with_radiators(4);
        let g = generate(&spec).unwrap();
        assert_eq!(g.len(), 36);
        assert_eq!(g.platforms().iter().filter(|&&p| p == 4).count(), 4);
        let s = compute_stats(&g).unwrap();
        assert!((s.d_ave.unwrap() - LAMBDA / 2.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_subarrays_rejected() {
        // 3x3 subarray spans 2·λ/2 = 0.15 m; a 0.2 m pitch leaves a 0.05 m gap
        let spec = GeometrySpec::lattice(2, 2, 0.2, freq())
            .with_radiators(9)
            .with_min_spacing(0.075);
        assert!(matches!(generate(&spec), Err(Error::SubarrayOverlap { .. })));
        let spec = GeometrySpec::lattice(2, 2, 0.225, freq())
            .with_radiators(9)
            .with_min_spacing(0.075);
        assert!(generate(&spec).is_ok());
    }
}
