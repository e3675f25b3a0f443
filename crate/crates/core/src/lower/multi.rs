//! Lower levels with m ≥ 2: grid scans with projected Newton polishing.

use nalgebra::{DMatrix, DVector};

use super::stationarity_residual_grad;
use crate::error::Result;
use crate::expr::Expr;
use crate::geometry::BOUND_TOL;
use crate::problems::BoxSet;

/// All grid points of a tensor grid, first axis slowest.
pub(super) fn tensor_grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    pts
}

/// Flat indices of the axis neighbors of `idx` in a grid with `shape`.
pub(super) fn neighbors(idx: usize, shape: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(2 * shape.len());
    let mut stride = 1;
    for d in (0..shape.len()).rev() {
        let coord = (idx / stride) % shape[d];
        if coord > 0 {
            out.push(idx - stride);
        }
        if coord + 1 < shape[d] {
            out.push(idx + stride);
        }
        stride *= shape[d];
    }
    out
}

fn clamp(y: &mut [f64], win: &[(f64, f64)]) {
    for (v, (lo, hi)) in y.iter_mut().zip(win) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Projected Newton descent on f over the window box.
pub(super) fn polish_min(f: &Expr, x: &[f64], y0: &[f64], win: &[(f64, f64)]) -> Result<(Vec<f64>, f64)> {
    let m = y0.len();
    let mut y = y0.to_vec();
    let mut fy = f.eval_xy(x, &y)?;
    for _ in 0..50 {
        let d = f.diff_y(x, &y)?;
        let g = &d.gradient;
        let free: Vec<usize> = (0..m)
            .filter(|&i| !((y[i] <= win[i].0 + BOUND_TOL && g[i] > 0.0) || (y[i] >= win[i].1 - BOUND_TOL && g[i] < 0.0)))
            .collect();
        if free.iter().all(|&i| g[i].abs() <= 1e-13) {
            break;
        }
        let hff = DMatrix::from_fn(free.len(), free.len(), |a, b| d.hessian[(free[a], free[b])]);
        let gf = DVector::from_iterator(free.len(), free.iter().map(|&i| g[i]));
        let step_f = match hff.clone().cholesky() {
            Some(ch) => -ch.solve(&gf),
            None => -gf.clone(),
        };
        let mut p = vec![0.0; m];
        for (k, &i) in free.iter().enumerate() {
            p[i] = step_f[k];
        }
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let mut cand: Vec<f64> = y.iter().zip(&p).map(|(a, b)| a + t * b).collect();
            clamp(&mut cand, win);
            let fc = f.eval_xy(x, &cand)?;
            if fc < fy {
                y = cand;
                fy = fc;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok((y, fy))
}

/// Newton on the box-stationarity system starting from `y0`; returns the
/// point and its residual.
pub(super) fn polish_stationary(
    f: &Expr,
    x: &[f64],
    y0: &[f64],
    y_box: &BoxSet,
    win: &[(f64, f64)],
) -> Result<(Vec<f64>, f64)> {
    let m = y0.len();
    let mut y = y0.to_vec();
    let mut best = (y.clone(), f64::INFINITY);
    for _ in 0..50 {
        let d = f.diff_y(x, &y)?;
        let g: Vec<f64> = d.gradient.iter().copied().collect();
        let r = stationarity_residual_grad(y_box, &y, &g);
        if r < best.1 {
            best = (y.clone(), r);
        }
        if r <= 1e-13 {
            break;
        }
        let free: Vec<usize> = (0..m)
            .filter(|&i| {
                !((y_box.at_lower(i, y[i], BOUND_TOL) && g[i] >= 0.0) || (y_box.at_upper(i, y[i], BOUND_TOL) && g[i] <= 0.0))
            })
            .collect();
        let hff = DMatrix::from_fn(free.len(), free.len(), |a, b| d.hessian[(free[a], free[b])]);
        let gf = DVector::from_iterator(free.len(), free.iter().map(|&i| g[i]));
        let Some(step) = hff.lu().solve(&gf) else { break };
        for (k, &i) in free.iter().enumerate() {
            y[i] -= step[k];
        }
        y_box.project(&mut y);
        clamp(&mut y, win);
    }
    Ok(best)
}
