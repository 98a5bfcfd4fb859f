//! Element layouts for monolithic and distributed arrays.
//!
//! A [`GeometrySpec`] names a layout family (`kind`) plus its parameters; the
//! matching [`GeometryGenerator`] is looked up by name in a
//! [`GeneratorRegistry`] and produces an [`ArrayGeometry`]. Every built-in
//! generator recenters its output on the origin and validates the minimum
//! spacing before returning.

mod hull;
mod lattice;
mod spiral;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hull::{convex_hull, polygon_area};
pub use lattice::RectangularGenerator;
pub use spiral::{ElsaGenerator, SunflowerGenerator, GOLDEN_ANGLE};

/// Relative slack applied to minimum-spacing checks so that lattices whose
/// pitch equals `min_spacing_m` are not rejected by rounding.
pub const SPACING_TOLERANCE: f64 = 1e-9;

/// Parametric description of an array layout.
///
/// `n_platforms` platforms each carry `radiators_per_platform` radiators, so
/// the realized array has `n_platforms * radiators_per_platform` elements.
/// Which of the length parameters matter depends on `kind`:
///
/// | kind                  | uses                                                        |
/// |-----------------------|-------------------------------------------------------------|
/// | `rectangular-lattice` | `spacing_m` (pitch), optional `grid_dims`                   |
/// | `sparse-square`       | same as above, with a pitch well above λ/2                  |
/// | `sunflower`           | `radial_scale_m`                                            |
/// | `elsa`                | `radial_scale_m`, `growth_rate`, `n_arms`, `spacing_m` (arm step) |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub kind: String,
    pub n_platforms: usize,
    pub radiators_per_platform: usize,
    /// Explicit `[nx, ny]` platform grid for the rectangular kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_dims: Option<[usize; 2]>,
    pub spacing_m: f64,
    pub radial_scale_m: f64,
    pub n_arms: usize,
    pub growth_rate: f64,
    pub min_spacing_m: f64,
    pub frequency_hz: f64,
}

impl GeometrySpec {
    fn base(kind: &str, n_platforms: usize, frequency_hz: f64) -> Self {
        let lambda = crate::wavelength(frequency_hz);
        Self {
            kind: kind.to_string(),
            n_platforms,
            radiators_per_platform: 1,
            grid_dims: None,
            spacing_m: lambda / 2.0,
            radial_scale_m: lambda,
            n_arms: 1,
            growth_rate: 0.1,
            min_spacing_m: lambda / 2.0,
            frequency_hz,
        }
    }

    /// `nx × ny` platforms at pitch `spacing_m`. Pitches above λ/2 are
    /// reported as `sparse-square`.
    pub fn lattice(nx: usize, ny: usize, spacing_m: f64, frequency_hz: f64) -> Self {
        let lambda = crate::wavelength(frequency_hz);
        let kind = if spacing_m > lambda / 2.0 * (1.0 + SPACING_TOLERANCE) {
            "sparse-square"
        } else {
            "rectangular-lattice"
        };
        let mut spec = Self::base(kind, nx * ny, frequency_hz);
        spec.grid_dims = Some([nx, ny]);
        spec.spacing_m = spacing_m;
        spec.min_spacing_m = spacing_m.min(lambda / 2.0);
        spec
    }

    pub fn sunflower(n_platforms: usize, radial_scale_m: f64, frequency_hz: f64) -> Self {
        let mut spec = Self::base("sunflower", n_platforms, frequency_hz);
        spec.radial_scale_m = radial_scale_m;
        spec
    }

    /// Multi-arm logarithmic spiral: arms start at `radial_scale_m`, grow as
    /// `exp(growth_rate·θ)`, and place elements `arm_step_m` apart.
    pub fn elsa(
        n_platforms: usize,
        n_arms: usize,
        growth_rate: f64,
        radial_scale_m: f64,
        arm_step_m: f64,
        frequency_hz: f64,
    ) -> Self {
        let mut spec = Self::base("elsa", n_platforms, frequency_hz);
        spec.n_arms = n_arms;
        spec.growth_rate = growth_rate;
        spec.radial_scale_m = radial_scale_m;
        spec.spacing_m = arm_step_m;
        spec
    }

    pub fn with_min_spacing(mut self, min_spacing_m: f64) -> Self {
        self.min_spacing_m = min_spacing_m;
        self
    }

    pub fn with_radiators(mut self, radiators_per_platform: usize) -> Self {
        self.radiators_per_platform = radiators_per_platform;
        self
    }

    pub fn wavelength(&self) -> f64 {
        crate::wavelength(self.frequency_hz)
    }

    /// Total element count `N = N_p · N_r`.
    pub fn n_elements(&self) -> usize {
        self.n_platforms * self.radiators_per_platform
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be a positive finite number, got {v}")))
            }
        };
        if self.n_platforms == 0 {
            return Err(Error::Config("n_platforms must be at least 1".into()));
        }
        if self.radiators_per_platform == 0 {
            return Err(Error::Config("radiators_per_platform must be at least 1".into()));
        }
        if self.n_arms == 0 {
            return Err(Error::Config("n_arms must be at least 1".into()));
        }
        positive("spacing_m", self.spacing_m)?;
        positive("radial_scale_m", self.radial_scale_m)?;
        positive("growth_rate", self.growth_rate)?;
        positive("min_spacing_m", self.min_spacing_m)?;
        positive("frequency_hz", self.frequency_hz)?;
        Ok(())
    }
}

/// Realized element positions on the `z = 0` plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<[f64; 2]>,
    platforms: Vec<usize>,
    arms: Vec<i32>,
    wavelength: f64,
    spec: GeometrySpec,
}

impl ArrayGeometry {
    /// Wraps arbitrary positions (one platform per element, no arm). Positions
    /// are taken as given; no recentering or spacing check is applied.
    pub fn from_positions(positions: Vec<[f64; 2]>, wavelength: f64) -> Self {
        let n = positions.len();
        let mut spec = GeometrySpec::base("custom", n.max(1), crate::SPEED_OF_LIGHT / wavelength);
        spec.n_platforms = n;
        Self {
            platforms: (0..n).collect(),
            arms: vec![-1; n],
            positions,
            wavelength,
            spec,
        }
    }

    /// Same element bookkeeping with new positions, e.g. after jitter.
    pub fn with_positions(&self, positions: Vec<[f64; 2]>) -> Self {
        assert_eq!(positions.len(), self.positions.len(), "element count must not change");
        Self {
            positions,
            platforms: self.platforms.clone(),
            arms: self.arms.clone(),
            wavelength: self.wavelength,
            spec: self.spec.clone(),
        }
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn platforms(&self) -> &[usize] {
        &self.platforms
    }

    pub fn arms(&self) -> &[i32] {
        &self.arms
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn frequency_hz(&self) -> f64 {
        self.spec.frequency_hz
    }

    pub fn spec(&self) -> &GeometrySpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn centroid(&self) -> [f64; 2] {
        centroid(&self.positions)
    }

    /// Distance of every element from the centroid.
    pub fn radial_distances(&self) -> Vec<f64> {
        let [cx, cy] = self.centroid();
        self.positions
            .iter()
            .map(|p| (p[0] - cx).hypot(p[1] - cy))
            .collect()
    }
}

/// Summary statistics of a layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryStats {
    /// Mean nearest-neighbor distance, absent for a single element.
    pub d_ave: Option<f64>,
    pub aperture_diameter: f64,
    /// Convex-hull area of the positions.
    pub virtual_aperture: f64,
    pub n_elements: usize,
}

/// A named layout family.
pub trait GeometryGenerator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Platform-center layout before subarray expansion. Returns positions and
    /// the arm index of each platform (-1 when the family has no arms).
    fn platform_layout(&self, spec: &GeometrySpec) -> Result<(Vec<[f64; 2]>, Vec<i32>)>;

    /// Full pipeline: platform layout, subarray expansion, recentering and
    /// spacing validation.
    fn generate(&self, spec: &GeometrySpec) -> Result<ArrayGeometry> {
        spec.validate()?;
        let (centers, arms) = self.platform_layout(spec)?;
        realize(spec, centers, arms)
    }
}

/// Name → generator lookup used by configuration-driven callers.
pub struct GeneratorRegistry {
    generators: BTreeMap<String, Box<dyn GeometryGenerator>>,
}

impl fmt::Debug for GeneratorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorRegistry")
            .field("kinds", &self.names())
            .finish()
    }
}

impl Default for GeneratorRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

impl GeneratorRegistry {
    pub fn empty() -> Self {
        Self {
            generators: BTreeMap::new(),
        }
    }

    pub fn with_builtin() -> Self {
        let mut registry = Self::empty();
        registry.register("rectangular-lattice", Box::new(RectangularGenerator));
        registry.register("sparse-square", Box::new(RectangularGenerator));
        registry.register("sunflower", Box::new(SunflowerGenerator));
        registry.register("elsa", Box::new(ElsaGenerator));
        registry
    }

    /// Registers `generator` under `kind`, replacing any previous entry.
    pub fn register(&mut self, kind: &str, generator: Box<dyn GeometryGenerator>) {
        self.generators.insert(kind.to_string(), generator);
    }

    pub fn get(&self, kind: &str) -> Result<&dyn GeometryGenerator> {
        self.generators
            .get(kind)
            .map(|g| g.as_ref())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown geometry kind `{kind}`; known kinds: {}",
                    self.names().join(", ")
                ))
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.generators.keys().map(String::as_str).collect()
    }

    pub fn generate(&self, spec: &GeometrySpec) -> Result<ArrayGeometry> {
        self.get(&spec.kind)?.generate(spec)
    }
}

/// Generates `spec` with the built-in registry.
pub fn generate(spec: &GeometrySpec) -> Result<ArrayGeometry> {
    GeneratorRegistry::with_builtin().generate(spec)
}

fn centroid(points: &[[f64; 2]]) -> [f64; 2] {
    if points.is_empty() {
        return [0.0, 0.0];
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
    [sx / n, sy / n]
}

fn recenter(points: &mut [[f64; 2]]) {
    let [cx, cy] = centroid(points);
    for p in points.iter_mut() {
        p[0] -= cx;
        p[1] -= cy;
    }
}

/// Offsets of a tight λ/2-pitch near-square subarray, centered on zero.
/// Columns are `ceil(sqrt(n))`; rows fill row-major.
pub fn subarray_offsets(n: usize, wavelength: f64) -> Vec<[f64; 2]> {
    let pitch = wavelength / 2.0;
    let cols = (n as f64).sqrt().ceil() as usize;
    let mut offsets: Vec<[f64; 2]> = (0..n)
        .map(|m| [(m % cols) as f64 * pitch, (m / cols) as f64 * pitch])
        .collect();
    recenter(&mut offsets);
    offsets
}

fn realize(spec: &GeometrySpec, centers: Vec<[f64; 2]>, arms: Vec<i32>) -> Result<ArrayGeometry> {
    let lambda = spec.wavelength();
    let required = spec.min_spacing_m * (1.0 - SPACING_TOLERANCE);
    if let Some((i, j, d)) = closest_pair(&centers, |_, _| true) {
        if d < required {
            return Err(Error::Spacing {
                first: i,
                second: j,
                distance: d,
                required: spec.min_spacing_m,
            });
        }
    }

    let n_r = spec.radiators_per_platform;
    let offsets = subarray_offsets(n_r, lambda);
    let mut positions = Vec::with_capacity(centers.len() * n_r);
    let mut platforms = Vec::with_capacity(centers.len() * n_r);
    let mut element_arms = Vec::with_capacity(centers.len() * n_r);
    for (p, (c, arm)) in centers.iter().zip(&arms).enumerate() {
        for o in &offsets {
            positions.push([c[0] + o[0], c[1] + o[1]]);
            platforms.push(p);
            element_arms.push(*arm);
        }
    }

    if n_r > 1 {
        let half = lambda / 2.0;
        if let Some((_, _, d)) = closest_pair(&positions, |a, b| platforms[a] != platforms[b]) {
            if d < half * (1.0 - SPACING_TOLERANCE) {
                let footprint = offsets
                    .iter()
                    .flat_map(|a| offsets.iter().map(move |b| (a[0] - b[0]).hypot(a[1] - b[1])))
                    .fold(0.0, f64::max);
                let pitch = closest_pair(&centers, |_, _| true).map_or(0.0, |c| c.2);
                return Err(Error::SubarrayOverlap { footprint, pitch });
            }
        }
    }

    recenter(&mut positions);
    Ok(ArrayGeometry {
        positions,
        platforms,
        arms: element_arms,
        wavelength: lambda,
        spec: spec.clone(),
    })
}

/// Closest pair among points admitted by `admit(i, j)`, by an x-sorted sweep.
/// Returns original indices `(i, j)` with `i < j` and their distance.
pub(crate) fn closest_pair(
    points: &[[f64; 2]],
    admit: impl Fn(usize, usize) -> bool,
) -> Option<(usize, usize, f64)> {
    if points.len() < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
    let mut best: Option<(usize, usize, f64)> = None;
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            let dx = points[j][0] - points[i][0];
            if let Some((_, _, bd)) = best {
                if dx > bd {
                    break;
                }
            }
            if !admit(i, j) {
                continue;
            }
            let d = dx.hypot(points[j][1] - points[i][1]);
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            match best {
                Some((bi, bj, bd)) if d > bd || (d == bd && (a, b) >= (bi, bj)) => {}
                _ => best = Some((a, b, d)),
            }
        }
    }
    best
}

/// Distance from every point to its nearest other point.
pub fn nearest_neighbor_distances(points: &[[f64; 2]]) -> Vec<f64> {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
    let mut best = vec![f64::INFINITY; n];
    for (k, &i) in order.iter().enumerate() {
        let p = points[i];
        let mut nearest = f64::INFINITY;
        // scan outwards in x until the x gap alone exceeds the best distance
        for &j in &order[k + 1..] {
            let dx = points[j][0] - p[0];
            if dx > nearest {
                break;
            }
            nearest = nearest.min(dx.hypot(points[j][1] - p[1]));
        }
        for &j in order[..k].iter().rev() {
            let dx = p[0] - points[j][0];
            if dx > nearest {
                break;
            }
            nearest = nearest.min(dx.hypot(points[j][1] - p[1]));
        }
        best[i] = nearest;
    }
    best
}

/// Layout statistics: mean nearest-neighbor distance, max pairwise distance
/// and convex-hull area.
pub fn compute_stats(geom: &ArrayGeometry) -> Result<GeometryStats> {
    let pts = geom.positions();
    if pts.is_empty() {
        return Err(Error::Domain("geometry has no elements".into()));
    }
    let d_ave = if pts.len() > 1 {
        let nn = nearest_neighbor_distances(pts);
        Some(nn.iter().sum::<f64>() / nn.len() as f64)
    } else {
        None
    };
    let hull = convex_hull(pts);
    let mut diameter: f64 = 0.0;
    for (k, a) in hull.iter().enumerate() {
        for b in &hull[k + 1..] {
            diameter = diameter.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    Ok(GeometryStats {
        d_ave,
        aperture_diameter: diameter,
        virtual_aperture: polygon_area(&hull),
        n_elements: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const F: f64 = 2.0e9;
    const LAMBDA: f64 = 0.15;

    fn brute_nn(points: &[[f64; 2]]) -> Vec<f64> {
        points
            .iter()
            .enumerate()
            .map(|(i, a)| {
                points
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn stats_two_points() {
        let g = ArrayGeometry::from_positions(vec![[0.0, 0.0], [1.0, 0.0]], LAMBDA);
        let s = compute_stats(&g).unwrap();
        assert_eq!(s.d_ave, Some(1.0));
        assert_eq!(s.aperture_diameter, 1.0);
        assert_eq!(s.virtual_aperture, 0.0);
        assert_eq!(s.n_elements, 2);
    }

    #[test]
    fn stats_unit_square() {
        let g = ArrayGeometry::from_positions(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], LAMBDA);
        let s = compute_stats(&g).unwrap();
        assert_eq!(s.d_ave, Some(1.0));
        assert!((s.aperture_diameter - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.virtual_aperture - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stats_single_element_has_no_d_ave() {
        let g = ArrayGeometry::from_positions(vec![[0.3, -0.2]], LAMBDA);
        let s = compute_stats(&g).unwrap();
        assert_eq!(s.d_ave, None);
        assert_eq!(s.aperture_diameter, 0.0);
        assert_eq!(s.virtual_aperture, 0.0);
    }

    #[test]
    fn stats_empty_is_error() {
        let g = ArrayGeometry::from_positions(vec![], LAMBDA);
        assert!(compute_stats(&g).is_err());
    }

    #[test]
    fn nearest_neighbor_sweep_matches_brute_force() {
        // deterministic scatter with clustered and isolated points
        let pts: Vec<[f64; 2]> = (0..300)
            .map(|i| {
                let t = i as f64;
                [(t * 1.618).sin() * 10.0 + (i % 7) as f64, (t * 0.77).cos() * 4.0 * (i % 3) as f64]
            })
            .collect();
        let fast = nearest_neighbor_distances(&pts);
        let slow = brute_nn(&pts);
        for (a, b) in fast.iter().zip(&slow) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn closest_pair_names_lowest_indices() {
        let pts = vec![[0.0, 0.0], [5.0, 0.0], [5.1, 0.0], [9.0, 0.0]];
        let (i, j, d) = closest_pair(&pts, |_, _| true).unwrap();
        assert_eq!((i, j), (1, 2));
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn registry_rejects_unknown_kind() {
        let reg = GeneratorRegistry::with_builtin();
        let mut spec = GeometrySpec::sunflower(10, 1.0, F);
        spec.kind = "hexagonal".into();
        let err = reg.generate(&spec).unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("hexagonal")));
        assert_eq!(reg.names(), vec!["elsa", "rectangular-lattice", "sparse-square", "sunflower"]);
    }

    #[test]
    fn invalid_spec_values_rejected() {
        let mut spec = GeometrySpec::sunflower(10, 1.0, F);
        spec.radial_scale_m = 0.0;
        assert!(matches!(generate(&spec), Err(Error::Config(_))));
        let mut spec = GeometrySpec::sunflower(10, 1.0, F);
        spec.n_platforms = 0;
        assert!(matches!(generate(&spec), Err(Error::Config(_))));
        let mut spec = GeometrySpec::elsa(10, 2, 0.1, 1.0, 1.0, F);
        spec.n_arms = 0;
        assert!(matches!(generate(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn subarray_offsets_are_centered_half_wave() {
        let o = subarray_offsets(4, 0.15);
        assert_eq!(o.len(), 4);
        let c = centroid(&o);
        assert!(c[0].abs() < 1e-15 && c[1].abs() < 1e-15);
        assert!((o[1][0] - o[0][0] - 0.075).abs() < 1e-15);
        assert_eq!(subarray_offsets(1, 0.15), vec![[0.0, 0.0]]);
    }
}
