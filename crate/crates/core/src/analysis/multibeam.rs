use crate::beamforming::Pattern;
use crate::error::{Error, Result};

/// Co-channel carrier-to-interference ratio per beam, dB.
///
/// Entry `i` compares `|AF_i|²` with `Σ_{j≠i} |AF_j|²`, all sampled at the
/// grid point nearest beam `i`'s center. Entries are absent for a single beam
/// and when the interference vanishes.
pub fn cochannel_ci(patterns: &[Pattern], centers: &[(f64, f64)]) -> Result<Vec<Option<f64>>> {
    if patterns.len() != centers.len() {
        return Err(Error::Domain(format!(
            "{} patterns but {} beam centers",
            patterns.len(),
            centers.len()
        )));
    }
    let Some(first) = patterns.first() else {
        return Ok(Vec::new());
    };
    let grid = first.grid();
    if patterns.iter().any(|p| p.grid() != grid) {
        return Err(Error::Domain("multi-beam patterns must share one grid".into()));
    }
    centers
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| {
            if !(u * u + v * v <= 1.0) {
                return Err(Error::Domain(format!("beam center ({u}, {v}) lies outside the visible region")));
            }
            let (a, b) = grid
                .nearest(u, v)
                .ok_or_else(|| Error::Domain(format!("beam center ({u}, {v}) lies outside the grid")))?;
            let idx = grid.index(a, b);
            let carrier = patterns[i].samples()[idx].norm_sqr();
            let interference: f64 = patterns
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, p)| p.samples()[idx].norm_sqr())
                .sum();
            Ok((patterns.len() > 1 && interference > 0.0)
                .then(|| 10.0 * (carrier / interference).log10()))
        })
        .collect()
}
