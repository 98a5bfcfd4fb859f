use std::f64::consts::FRAC_1_SQRT_2;

use crate::beamforming::{AngularGrid, Pattern};
use crate::error::{Error, Result};

use super::{angle_between, refine_max, AnalysisConfig};

/// Refined lobe levels closer than this (relative) count as tied.
const TIE_TOLERANCE: f64 = 1e-9;
/// Lobes sampled within this many dB of the grid maximum are refined before
/// the main lobe is chosen.
const PEAK_CANDIDATE_DB: f64 = 1.0;
/// Bisection steps on a half-power crossing.
const CROSSING_BISECTIONS: usize = 60;

/// Main-lobe description.
#[derive(Debug, Clone)]
pub struct MainLobe {
    /// Grid sample at the top of the main lobe.
    pub peak_index: (usize, usize),
    /// Direction of that sample.
    pub peak_direction: (f64, f64),
    /// Off-grid maximum (equal to `peak_direction` without refinement).
    pub refined_direction: (f64, f64),
    /// `|AF|` at the maximum, unnormalized.
    pub peak_level: f64,
    /// Half-power beamwidths along the u and v cuts, radians.
    pub hpbw_u: f64,
    pub hpbw_v: f64,
    /// Half-power crossings `(low, high)` along each cut, direction cosines.
    pub crossings_u: (f64, f64),
    pub crossings_v: (f64, f64),
    pub(crate) mask: Vec<bool>,
    pub(crate) maxima: Vec<usize>,
}

impl MainLobe {
    /// Half of the half-power width in direction-cosine units.
    pub fn half_width_u(&self) -> f64 {
        0.5 * (self.crossings_u.1 - self.crossings_u.0)
    }

    pub fn half_width_v(&self) -> f64 {
        0.5 * (self.crossings_v.1 - self.crossings_v.0)
    }

    /// Main-lobe membership per grid sample.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Grid indices of the pattern's local maxima (8-neighbourhood, plateaus
    /// represented by their lowest index).
    pub fn local_maxima(&self) -> &[usize] {
        &self.maxima
    }
}

/// Steepest-ascent forest over the visible samples. Each sample points to its
/// highest strictly-greater neighbour, or failing that to a lower-index
/// neighbour of equal level, or to itself (a local maximum).
struct Ascent {
    parent: Vec<usize>,
}

impl Ascent {
    fn new(grid: &AngularGrid, mags: &[f64], visible: &[bool]) -> Self {
        let (n_u, n_v) = (grid.n_u, grid.n_v);
        let mut parent: Vec<usize> = (0..mags.len()).collect();
        for i in 0..n_u {
            for j in 0..n_v {
                let idx = grid.index(i, j);
                if !visible[idx] {
                    continue;
                }
                let level = mags[idx];
                let mut up: Option<usize> = None;
                let mut flat: Option<usize> = None;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let (ni, nj) = (i as i64 + di, j as i64 + dj);
                        if ni < 0 || nj < 0 || ni >= n_u as i64 || nj >= n_v as i64 {
                            continue;
                        }
                        let nidx = grid.index(ni as usize, nj as usize);
                        if !visible[nidx] {
                            continue;
                        }
                        let m = mags[nidx];
                        if m > level {
                            if up.is_none_or(|u| m > mags[u]) {
                                up = Some(nidx);
                            }
                        } else if m == level && nidx < idx && flat.is_none_or(|f| nidx < f) {
                            flat = Some(nidx);
                        }
                    }
                }
                parent[idx] = up.or(flat).unwrap_or(idx);
            }
        }
        Self { parent }
    }

    fn maxima(&self, visible: &[bool]) -> Vec<usize> {
        (0..self.parent.len())
            .filter(|&i| visible[i] && self.parent[i] == i)
            .collect()
    }

    /// Local maximum reached from every sample.
    fn roots(&self) -> Vec<usize> {
        const UNSET: usize = usize::MAX;
        let mut root = vec![UNSET; self.parent.len()];
        let mut path = Vec::new();
        for start in 0..self.parent.len() {
            let mut at = start;
            while root[at] == UNSET && self.parent[at] != at {
                path.push(at);
                at = self.parent[at];
            }
            let r = if root[at] == UNSET { at } else { root[at] };
            root[at] = r;
            for p in path.drain(..) {
                root[p] = r;
            }
        }
        root
    }
}

/// Locates the main lobe, its half-power widths and its mask.
///
/// The main lobe is the highest maximum of `|AF|`. With refinement enabled,
/// every lobe sampled within 1 dB of the grid maximum is refined by direct
/// evaluation, and lobes whose refined levels tie (periodic lattices) are
/// resolved toward the steering direction, then toward the lowest grid index.
/// Without refinement the peak is the grid argmax, ties to the lowest u then v
/// index.
///
/// The mask is the ellipse centred on the peak with semi-axes
/// `mask_factor` times the half-power half-widths, joined with every sample
/// whose steepest-ascent path ends at the peak.
pub fn measure_main_lobe(p: &Pattern, cfg: &AnalysisConfig) -> Result<MainLobe> {
    let grid = p.grid();
    let visible = p.visible();
    let mags: Vec<f64> = p.samples().iter().map(|s| s.norm()).collect();

    let mut argmax: Option<usize> = None;
    for (idx, &m) in mags.iter().enumerate() {
        if visible[idx] && argmax.is_none_or(|a| m > mags[a]) {
            argmax = Some(idx);
        }
    }
    let argmax = argmax.ok_or_else(|| Error::Domain("pattern grid has no visible samples".into()))?;
    if mags[argmax] <= 0.0 || !mags[argmax].is_finite() {
        return Err(Error::Domain("pattern is identically zero over the visible region".into()));
    }

    let ascent = Ascent::new(grid, &mags, visible);
    let maxima = ascent.maxima(visible);
    let cell = (grid.du(), grid.dv());

    let (peak_idx, refined_direction, peak_level) = if cfg.refine {
        let floor = mags[argmax] * 10f64.powf(-PEAK_CANDIDATE_DB / 20.0);
        let steer = p.steer_direction();
        let mut best: Option<(usize, (f64, f64), f64)> = None;
        for &idx in maxima.iter().filter(|&&i| mags[i] >= floor) {
            let (i, j) = grid.coords(idx);
            let (dir, level) = refine_max(p.source(), (grid.u(i), grid.v(j)), cell);
            let better = match best {
                None => true,
                Some((bidx, _, blevel)) => {
                    if (level - blevel).abs() <= TIE_TOLERANCE * blevel.max(level) {
                        let (bi, bj) = grid.coords(bidx);
                        let d = (grid.u(i) - steer.0).hypot(grid.v(j) - steer.1);
                        let bd = (grid.u(bi) - steer.0).hypot(grid.v(bj) - steer.1);
                        d < bd || (d == bd && idx < bidx)
                    } else {
                        level > blevel
                    }
                }
            };
            if better {
                best = Some((idx, dir, level));
            }
        }
        best.expect("grid argmax is a local maximum")
    } else {
        let (i, j) = grid.coords(argmax);
        (argmax, (grid.u(i), grid.v(j)), mags[argmax])
    };

    let (pi, pj) = grid.coords(peak_idx);
    let target = peak_level * FRAC_1_SQRT_2;
    let crossings_u = if cfg.refine {
        direct_crossings(p, refined_direction, Axis::U, target)?
    } else {
        grid_crossings(p, &mags, (pi, pj), Axis::U, target)?
    };
    let crossings_v = if cfg.refine {
        direct_crossings(p, refined_direction, Axis::V, target)?
    } else {
        grid_crossings(p, &mags, (pi, pj), Axis::V, target)?
    };
    let hpbw_u = angle_between((crossings_u.0, refined_direction.1), (crossings_u.1, refined_direction.1));
    let hpbw_v = angle_between((refined_direction.0, crossings_v.0), (refined_direction.0, crossings_v.1));

    let au = cfg.mask_factor * 0.5 * (crossings_u.1 - crossings_u.0);
    let av = cfg.mask_factor * 0.5 * (crossings_v.1 - crossings_v.0);
    let roots = ascent.roots();
    let mask: Vec<bool> = (0..mags.len())
        .map(|idx| {
            if !visible[idx] {
                return false;
            }
            if roots[idx] == peak_idx {
                return true;
            }
            let (i, j) = grid.coords(idx);
            let x = (grid.u(i) - refined_direction.0) / au;
            let y = (grid.v(j) - refined_direction.1) / av;
            x * x + y * y <= 1.0
        })
        .collect();

    Ok(MainLobe {
        peak_index: (pi, pj),
        peak_direction: (grid.u(pi), grid.v(pj)),
        refined_direction,
        peak_level,
        hpbw_u,
        hpbw_v,
        crossings_u,
        crossings_v,
        mask,
        maxima,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Axis {
    U,
    V,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::U => "u",
            Axis::V => "v",
        }
    }
}

fn too_wide(axis: Axis) -> Error {
    Error::BeamTooWide(format!(
        "half-power contour along the {} cut is not bracketed inside the grid",
        axis.name()
    ))
}

/// Half-power crossings on either side of `peak` along one cut, by outward
/// stepping at the grid pitch and bisection on direct evaluation.
fn direct_crossings(p: &Pattern, peak: (f64, f64), axis: Axis, target: f64) -> Result<(f64, f64)> {
    let grid = p.grid();
    let (step, lo_bound, hi_bound) = match axis {
        Axis::U => (grid.du(), grid.u_min, grid.u_max),
        Axis::V => (grid.dv(), grid.v_min, grid.v_max),
    };
    if step <= 0.0 {
        return Err(too_wide(axis));
    }
    let at = |x: f64| match axis {
        Axis::U => (x, peak.1),
        Axis::V => (peak.0, x),
    };
    let level = |x: f64| {
        let (u, v) = at(x);
        p.source().evaluate(u, v).norm()
    };
    let visible = |x: f64| {
        let (u, v) = at(x);
        u * u + v * v <= 1.0
    };
    let center = match axis {
        Axis::U => peak.0,
        Axis::V => peak.1,
    };
    let side = |sign: f64| -> Result<f64> {
        let mut inside = center;
        loop {
            let next = inside + sign * step;
            if next < lo_bound || next > hi_bound || !visible(next) {
                return Err(too_wide(axis));
            }
            if level(next) < target {
                let (mut a, mut b) = (inside, next);
                for _ in 0..CROSSING_BISECTIONS {
                    let m = 0.5 * (a + b);
                    if level(m) >= target {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                return Ok(0.5 * (a + b));
            }
            inside = next;
        }
    };
    let low = side(-1.0)?;
    let high = side(1.0)?;
    Ok((low, high))
}

/// Half-power crossings along the grid row/column through the peak sample,
/// linearly interpolating `20·log10|AF|` between bracketing samples.
fn grid_crossings(p: &Pattern, mags: &[f64], peak: (usize, usize), axis: Axis, target: f64) -> Result<(f64, f64)> {
    let grid = p.grid();
    let (n, pos) = match axis {
        Axis::U => (grid.n_u, peak.0),
        Axis::V => (grid.n_v, peak.1),
    };
    let sample = |k: usize| -> Option<(f64, f64)> {
        let (i, j) = match axis {
            Axis::U => (k, peak.1),
            Axis::V => (peak.0, k),
        };
        let idx = grid.index(i, j);
        p.visible()[idx].then(|| {
            let x = match axis {
                Axis::U => grid.u(i),
                Axis::V => grid.v(j),
            };
            (x, mags[idx])
        })
    };
    let target_db = 20.0 * target.log10();
    let db = |m: f64| 20.0 * m.max(f64::MIN_POSITIVE).log10();
    let side = |sign: i64| -> Result<f64> {
        let mut k = pos as i64;
        let (mut x0, mut m0) = sample(pos).ok_or_else(|| too_wide(axis))?;
        loop {
            k += sign;
            if k < 0 || k >= n as i64 {
                return Err(too_wide(axis));
            }
            let (x1, m1) = sample(k as usize).ok_or_else(|| too_wide(axis))?;
            if m1 < target {
                let (d0, d1) = (db(m0), db(m1));
                let t = (d0 - target_db) / (d0 - d1);
                return Ok(x0 + t * (x1 - x0));
            }
            (x0, m0) = (x1, m1);
        }
    };
    let low = side(-1)?;
    let high = side(1)?;
    Ok((low, high))
}
