//! Tiny exact solvers for sign-constrained linear systems by support
//! enumeration. Only meant for a handful of unknowns.

use nalgebra::{DMatrix, DVector};

use crate::geometry::Tag;
use crate::linalg::{combinations, rank};

const RANK_TOL: f64 = 1e-10;

/// Columns of `a` after splitting free variables into ± parts and flipping
/// nonpositive ones, so that all unknowns are nonnegative.
struct Split {
    cols: Vec<(usize, f64)>,
}

impl Split {
    fn new(tags: &[Tag]) -> Split {
        let mut cols = Vec::new();
        for (i, t) in tags.iter().enumerate() {
            match t {
                Tag::Zero => {}
                Tag::Free => {
                    cols.push((i, 1.0));
                    cols.push((i, -1.0));
                }
                Tag::NonNeg => cols.push((i, 1.0)),
                Tag::NonPos => cols.push((i, -1.0)),
            }
        }
        Split { cols }
    }

    fn matrix(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(a.nrows(), self.cols.len(), |r, c| {
            let (j, s) = self.cols[c];
            s * a[(r, j)]
        })
    }

    fn unsplit(&self, p: &DVector<f64>, dim: usize) -> Vec<f64> {
        let mut w = vec![0.0; dim];
        for (c, &(j, s)) in self.cols.iter().enumerate() {
            w[j] += s * p[c];
        }
        w
    }
}

/// Least squares on the columns `sub`; `None` unless they are independent.
fn ls_on(a: &DMatrix<f64>, b: &DVector<f64>, sub: &[usize]) -> Option<DVector<f64>> {
    let m = a.select_columns(sub);
    if rank(&m, RANK_TOL) != sub.len() {
        return None;
    }
    m.svd(true, true).solve(b, 1e-14).ok()
}

/// `min ‖A w − b‖₂` over w with per-coordinate sign tags.
///
/// The projection of b onto a finitely generated cone is a conic combination
/// of linearly independent generators, so enumerating independent supports
/// and keeping the nonnegative least-squares solutions is exact.
pub fn sign_constrained_ls(a: &DMatrix<f64>, b: &DVector<f64>, tags: &[Tag]) -> (Vec<f64>, f64) {
    let split = Split::new(tags);
    let sa = split.matrix(a);
    let k = sa.ncols();
    let r = if k == 0 { 0 } else { rank(&sa, RANK_TOL) };
    let mut best = (DVector::zeros(k), b.norm());
    for size in 1..=r {
        for sub in combinations(k, size) {
            let Some(ps) = ls_on(&sa, b, &sub) else { continue };
            if ps.iter().any(|v| *v < -1e-12) {
                continue;
            }
            let mut p = DVector::zeros(k);
            for (&c, &v) in sub.iter().zip(ps.iter()) {
                p[c] = v.max(0.0);
            }
            let res = (&sa * &p - b).norm();
            if res < best.1 - 1e-15 {
                best = (p, res);
            }
        }
    }
    (split.unsplit(&best.0, tags.len()), best.1)
}

/// A nonzero w with `A w = 0` and the sign tags, if one exists.
///
/// Normalizing the split unknowns to sum one turns the cone into a polytope;
/// a nonzero solution exists iff some vertex maps to a nonzero w (vertices
/// with p⁺ = p⁻ on a free coordinate map to zero and are skipped).
pub fn nontrivial_kernel(a: &DMatrix<f64>, tags: &[Tag], tol: f64) -> Option<Vec<f64>> {
    let split = Split::new(tags);
    let sa = split.matrix(a);
    let k = sa.ncols();
    if k == 0 {
        return None;
    }
    let rows = sa.nrows();
    let aug = DMatrix::from_fn(rows + 1, k, |r, c| if r < rows { sa[(r, c)] } else { 1.0 });
    let mut rhs = DVector::zeros(rows + 1);
    rhs[rows] = 1.0;
    let r = rank(&aug, RANK_TOL);
    for size in 1..=r {
        for sub in combinations(k, size) {
            let Some(ps) = ls_on(&aug, &rhs, &sub) else { continue };
            if ps.iter().any(|v| *v < -1e-12) {
                continue;
            }
            let mut p = DVector::zeros(k);
            for (&c, &v) in sub.iter().zip(ps.iter()) {
                p[c] = v.max(0.0);
            }
            if (&aug * &p - &rhs).norm() > tol {
                continue;
            }
            let w = split.unsplit(&p, tags.len());
            let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1e-9 {
                return Some(w.iter().map(|v| v / n).collect());
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_projects_onto_orthant() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, -2.0]);
        let (w, r) = sign_constrained_ls(&a, &b, &[Tag::NonNeg, Tag::NonNeg]);
        assert_eq!(w, vec![1.0, 0.0]);
        assert!((r - 2.0).abs() < 1e-12);
        let (w, r) = sign_constrained_ls(&a, &b, &[Tag::NonNeg, Tag::Free]);
        assert!(r < 1e-12 && (w[1] + 2.0).abs() < 1e-12);
        let (w, _) = sign_constrained_ls(&a, &b, &[Tag::Zero, Tag::NonPos]);
        assert!(w[0] == 0.0 && (w[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_detection() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(nontrivial_kernel(&a, &[Tag::NonNeg, Tag::NonNeg], 1e-10).is_none());
        let w = nontrivial_kernel(&a, &[Tag::NonNeg, Tag::NonPos], 1e-10).unwrap();
        assert!((w[0] + w[1]).abs() < 1e-12 && w[0] > 0.0);
        // Free-only with injective A: the p⁺ = p⁻ vertex must not count.
        let a = DMatrix::identity(2, 2);
        assert!(nontrivial_kernel(&a, &[Tag::Free, Tag::Free], 1e-10).is_none());
    }
}
