use std::f64::consts::PI;

use super::{GeometryGenerator, GeometrySpec};
use crate::error::{Error, Result};

/// Golden angle `2π(1 − 1/ϕ) = π(3 − √5)` in radians.
pub const GOLDEN_ANGLE: f64 = PI * (3.0 - 2.236_067_977_499_79);

/// Upper bound on θ candidates tried while stepping along the spiral arms.
pub const MAX_CANDIDATE_STEPS: usize = 1_000_000;

/// Golden-angle (Vogel) sunflower: platform `n = 1..=N_p` sits at radius
/// `radial_scale·√n` and azimuth `n·γ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SunflowerGenerator;

impl GeometryGenerator for SunflowerGenerator {
    fn name(&self) -> &'static str {
        "sunflower"
    }

    fn platform_layout(&self, spec: &GeometrySpec) -> Result<(Vec<[f64; 2]>, Vec<i32>)> {
        let centers = (1..=spec.n_platforms)
            .map(|n| {
                let r = spec.radial_scale_m * (n as f64).sqrt();
                let phi = n as f64 * GOLDEN_ANGLE;
                [r * phi.cos(), r * phi.sin()]
            })
            .collect::<Vec<_>>();
        let arms = vec![0; centers.len()];
        Ok((centers, arms))
    }
}

/// Multi-arm logarithmic spiral.
///
/// Arm 0 follows `r(θ) = radial_scale·exp(b·θ)` from `θ = 0`. Each next
/// element is placed at the first θ where the chord to the previous element
/// reaches `max(spacing_m, min_spacing_m)`. Arm `k` is arm 0 rotated by
/// `2πk/n_arms`. When `N_p` is not a multiple of `n_arms`, the first
/// `N_p mod n_arms` arms carry one extra element.
#[derive(Debug, Clone, Copy, Default)]
pub struct ElsaGenerator;

impl ElsaGenerator {
    /// Elements per arm.
    pub fn arm_counts(n_platforms: usize, n_arms: usize) -> Vec<usize> {
        (0..n_arms)
            .map(|k| n_platforms / n_arms + usize::from(k < n_platforms % n_arms))
            .collect()
    }

    /// Positions along arm 0.
    fn base_arm(spec: &GeometrySpec, count: usize) -> Result<Vec<[f64; 2]>> {
        let a = spec.radial_scale_m;
        let b = spec.growth_rate;
        let step = spec.spacing_m.max(spec.min_spacing_m);
        let point = |theta: f64| {
            let r = a * (b * theta).exp();
            [r * theta.cos(), r * theta.sin()]
        };
        let chord = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]);

        let mut arm = Vec::with_capacity(count);
        if count == 0 {
            return Ok(arm);
        }
        let mut theta = 0.0_f64;
        arm.push(point(theta));
        let mut candidates = 0usize;
        while arm.len() < count {
            let last = *arm.last().unwrap();
            let r = a * (b * theta).exp();
            // march in increments short enough not to skip past the first
            // crossing, then bisect the bracket
            let increment = (step / (r * (1.0 + b * b).sqrt()) / 4.0).min(PI / 16.0);
            let mut lo = theta;
            let mut hi = theta;
            loop {
                candidates += 1;
                if candidates > MAX_CANDIDATE_STEPS {
                    return Err(Error::Synthesis(format!(
                        "no placement with {step} m element step after {MAX_CANDIDATE_STEPS} candidate steps \
                         (radial_scale = {a} m, growth_rate = {b}); increase growth_rate or radial_scale"
                    )));
                }
                hi += increment;
                if chord(point(hi), last) >= step {
                    break;
                }
                lo = hi;
            }
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if chord(point(mid), last) >= step {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            theta = hi;
            arm.push(point(theta));
        }
        Ok(arm)
    }
}

impl GeometryGenerator for ElsaGenerator {
    fn name(&self) -> &'static str {
        "elsa"
    }

    fn platform_layout(&self, spec: &GeometrySpec) -> Result<(Vec<[f64; 2]>, Vec<i32>)> {
        let counts = Self::arm_counts(spec.n_platforms, spec.n_arms);
        let base = Self::base_arm(spec, counts[0])?;
        let mut centers = Vec::with_capacity(spec.n_platforms);
        let mut arms = Vec::with_capacity(spec.n_platforms);
        for (k, &count) in counts.iter().enumerate() {
            let angle = 2.0 * PI * k as f64 / spec.n_arms as f64;
            let (s, c) = angle.sin_cos();
            for p in &base[..count] {
                centers.push([c * p[0] - s * p[1], s * p[0] + c * p[1]]);
                arms.push(k as i32);
            }
        }
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
    fn golden_angle_constant() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((GOLDEN_ANGLE - 2.0 * PI * (1.0 - 1.0 / phi)).abs() < 1e-14);
        assert!((GOLDEN_ANGLE - 2.399963).abs() < 1e-6);
    }

    #[test]
    fn sunflower_single_platform() {
        let spec = GeometrySpec::sunflower(1, 0.7, freq());
        let (raw, _) = SunflowerGenerator.platform_layout(&spec).unwrap();
        assert!(((raw[0][0]).hypot(raw[0][1]) - 0.7).abs() < 1e-15);
        let g = generate(&spec).unwrap();
        assert_eq!(g.positions(), &[[0.0, 0.0]]);
    }

    #[test]
    fn sunflower_consecutive_azimuth_step() {
        let spec = GeometrySpec::sunflower(50, 1.0, freq());
        let (raw, _) = SunflowerGenerator.platform_layout(&spec).unwrap();
        for w in raw.windows(2) {
            let d = (w[1][1].atan2(w[1][0]) - w[0][1].atan2(w[0][0])).rem_euclid(2.0 * PI);
            assert!((d - GOLDEN_ANGLE).abs() < 1e-9, "{d}");
        }
    }

    #[test]
    fn sunflower_spacing_violation_names_pair() {
        let spec = GeometrySpec::sunflower(30, 0.1, freq()).with_min_spacing(1.0);
        match generate(&spec) {
            Err(Error::Spacing { first, second, distance, required }) => {
                assert!(first < second);
                assert!(distance < required);
            }
            other => panic!("expected spacing error, got {other:?}"),
        }
    }

    #[test]
    fn elsa_single_arm_radii_increase() {
        let spec = GeometrySpec::elsa(60, 1, 0.2, 1.0, 0.5, freq()).with_min_spacing(0.5);
        let g = generate(&spec).unwrap();
        let (raw, arms) = ElsaGenerator.platform_layout(&spec).unwrap();
        assert!(arms.iter().all(|&a| a == 0));
        let radii: Vec<f64> = raw.iter().map(|p| p[0].hypot(p[1])).collect();
        assert!(radii.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.len(), 60);
    }

    #[test]
    fn elsa_consecutive_elements_at_step() {
        let spec = GeometrySpec::elsa(40, 1, 0.15, 2.0, 0.9, freq()).with_min_spacing(0.5);
        let (raw, _) = ElsaGenerator.platform_layout(&spec).unwrap();
        for w in raw.windows(2) {
            let d = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            assert!(d >= 0.9 && d < 0.9 * (1.0 + 1e-9), "{d}");
        }
    }

    #[test]
    fn elsa_remainder_goes_to_first_arms() {
        assert_eq!(ElsaGenerator::arm_counts(12, 5), vec![3, 3, 2, 2, 2]);
        let spec = GeometrySpec::elsa(12, 5, 0.3, 3.0, 0.75, freq());
        let g = generate(&spec).unwrap();
        let per_arm: Vec<usize> = (0..5).map(|k| g.arms().iter().filter(|&&a| a == k).count()).collect();
        assert_eq!(per_arm, vec![3, 3, 2, 2, 2]);
    }

    #[test]
    fn elsa_five_fold_symmetry() {
        let spec = GeometrySpec::elsa(500, 5, 0.1, 45.0 * LAMBDA, 10.0 * LAMBDA, freq())
            .with_min_spacing(5.0 * LAMBDA);
        let g = generate(&spec).unwrap();
        let (s, c) = (2.0 * PI / 5.0).sin_cos();
        let pts = g.positions();
        for p in pts {
            let q = [c * p[0] - s * p[1], s * p[0] + c * p[1]];
            let nearest = pts
                .iter()
                .map(|r| (r[0] - q[0]).hypot(r[1] - q[1]))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-9, "rotated point {q:?} unmatched by {nearest}");
        }
    }

    #[test]
    fn elsa_unreachable_step_is_synthesis_failure() {
        // a near-circular arm of radius λ can never open a 10λ chord
        let spec = GeometrySpec::elsa(10, 1, 1e-9, LAMBDA, 10.0 * LAMBDA, freq());
        assert!(matches!(generate(&spec), Err(Error::Synthesis(_))));
    }

    #[test]
    fn elsa_inner_arms_too_close_is_spacing_error() {
        let spec = GeometrySpec::elsa(100, 8, 0.1, 2.0 * LAMBDA, 10.0 * LAMBDA, freq())
            .with_min_spacing(5.0 * LAMBDA);
        assert!(matches!(generate(&spec), Err(Error::Spacing { .. })));
    }

    #[test]
    fn sunflower_d_ave_calibration() {
        let target = 10.0 * LAMBDA;
        let unit = generate(&GeometrySpec::sunflower(200, 1.0, freq())).unwrap();
        let scale = target / compute_stats(&unit).unwrap().d_ave.unwrap();
        let g = generate(&GeometrySpec::sunflower(200, scale, freq())).unwrap();
        // independent O(N²) nearest-neighbor oracle
        let pts = g.positions();
        let mean_nn = pts
            .iter()
            .enumerate()
            .map(|(i, a)| {
                pts.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / pts.len() as f64;
        assert!((mean_nn - target).abs() / target < 0.05, "{mean_nn}");
    }
}
