//! Dense array-factor summation.
//!
//! `exp(j·k·(x·u + y·v))` factors into `exp(j·k·x·u) · exp(j·k·y·v)`, so the
//! per-element phase terms are tabulated once per grid row and column and the
//! inner loop is a complex multiply-accumulate. Each output sample accumulates
//! its terms in element-index order from zero; tiling only changes which
//! samples are computed together, never the arithmetic of one sample.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{AngularGrid, ElementModel};

const ROW_BLOCK: usize = 8;
const COL_BLOCK: usize = 128;

pub(super) fn array_factor(
    positions: &[[f64; 2]],
    weights: &[Complex64],
    k: f64,
    grid: &AngularGrid,
    element: &dyn ElementModel,
) -> Vec<Complex64> {
    let n = positions.len();
    let (n_u, n_v) = (grid.n_u, grid.n_v);

    // column phase table, element-major: [e * n_v + j]
    let mut col_re = vec![0.0; n * n_v];
    let mut col_im = vec![0.0; n * n_v];
    col_re
        .par_chunks_mut(n_v)
        .zip(col_im.par_chunks_mut(n_v))
        .zip(positions.par_iter())
        .for_each(|((re, im), p)| {
            for j in 0..n_v {
                let (s, c) = (k * p[1] * grid.v(j)).sin_cos();
                re[j] = c;
                im[j] = s;
            }
        });

    let mut out = vec![Complex64::new(0.0, 0.0); n_u * n_v];
    out.par_chunks_mut(ROW_BLOCK * n_v)
        .enumerate()
        .for_each(|(block, chunk)| {
            let i0 = block * ROW_BLOCK;
            let rows = chunk.len() / n_v;

            // weighted row phase terms, row-major: [r * n + e]
            let mut row_re = vec![0.0; rows * n];
            let mut row_im = vec![0.0; rows * n];
            for r in 0..rows {
                let u = grid.u(i0 + r);
                for (e, (p, w)) in positions.iter().zip(weights).enumerate() {
                    let (s, c) = (k * p[0] * u).sin_cos();
                    row_re[r * n + e] = w.re * c - w.im * s;
                    row_im[r * n + e] = w.re * s + w.im * c;
                }
            }

            let mut acc_re = [[0.0f64; COL_BLOCK]; ROW_BLOCK];
            let mut acc_im = [[0.0f64; COL_BLOCK]; ROW_BLOCK];
            for j0 in (0..n_v).step_by(COL_BLOCK) {
                let width = COL_BLOCK.min(n_v - j0);
                for r in 0..rows {
                    acc_re[r][..width].fill(0.0);
                    acc_im[r][..width].fill(0.0);
                }
                for e in 0..n {
                    let cre = &col_re[e * n_v + j0..e * n_v + j0 + width];
                    let cim = &col_im[e * n_v + j0..e * n_v + j0 + width];
                    for r in 0..rows {
                        let a = row_re[r * n + e];
                        let b = row_im[r * n + e];
                        let are = &mut acc_re[r][..width];
                        let aim = &mut acc_im[r][..width];
                        for t in 0..width {
                            are[t] += a * cre[t] - b * cim[t];
                            aim[t] += a * cim[t] + b * cre[t];
                        }
                    }
                }
                for r in 0..rows {
                    let u = grid.u(i0 + r);
                    for t in 0..width {
                        let g = element.field(u, grid.v(j0 + t));
                        chunk[r * n_v + j0 + t] = Complex64::new(acc_re[r][t] * g, acc_im[r][t] * g);
                    }
                }
            }
        });
    out
}
