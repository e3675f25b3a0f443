//! Cones for boxes `Y = Π[a_i, b_i]` and for the graph of `N_Y`.
//!
//! For an interval the graph is `({a}×ℝ₋) ∪ ([a,b]×{0}) ∪ ({b}×ℝ₊)`, with the
//! vertical pieces dropped at infinite endpoints. Coordinates in the graph
//! space are `(y, ξ)`; for boxes they are ordered `(y_1..y_m, ξ_1..ξ_m)`.

use super::cone::{ConeUnion, PolyCone, SignedCoordinateCone, Tag};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::problems::BoxSet;
use Tag::*;

/// Distance at which a coordinate counts as sitting on a bound.
pub const BOUND_TOL: f64 = 1e-9;
/// Magnitude below which a gradient / normal component counts as zero.
pub const ZERO_TOL: f64 = 1e-8;

/// One closed piece `y_range × ξ_range` of the interval graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphPiece {
    pub y: (f64, f64),
    pub xi: (f64, f64),
}

impl GraphPiece {
    pub fn contains(&self, y: f64, xi: f64, tol: f64) -> bool {
        y >= self.y.0 - tol && y <= self.y.1 + tol && xi >= self.xi.0 - tol && xi <= self.xi.1 + tol
    }

    pub fn project(&self, y: f64, xi: f64) -> (f64, f64) {
        (y.clamp(self.y.0, self.y.1), xi.clamp(self.xi.0, self.xi.1))
    }
}

pub fn graph_pieces_interval(a: f64, b: f64) -> Vec<GraphPiece> {
    const INF: f64 = f64::INFINITY;
    if a == b {
        return vec![GraphPiece { y: (a, a), xi: (-INF, INF) }];
    }
    let mut out = Vec::new();
    if a.is_finite() {
        out.push(GraphPiece { y: (a, a), xi: (-INF, 0.0) });
    }
    out.push(GraphPiece { y: (a, b), xi: (0.0, 0.0) });
    if b.is_finite() {
        out.push(GraphPiece { y: (b, b), xi: (0.0, INF) });
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Loc {
    /// Degenerate interval: the graph is the vertical line {a}×ℝ.
    Line,
    /// Relative interior of a vertical piece.
    Vertical,
    Horizontal,
    LeftCorner,
    RightCorner,
}

fn locate(a: f64, b: f64, y: f64, xi: f64) -> Result<Loc> {
    let off = || Error::NotOnGraph(format!("(y, ξ) = ({y}, {xi}) for Y = [{a}, {b}]"));
    if a == b {
        return if (y - a).abs() <= BOUND_TOL { Ok(Loc::Line) } else { Err(off()) };
    }
    let at_a = a.is_finite() && (y - a).abs() <= BOUND_TOL;
    let at_b = b.is_finite() && (y - b).abs() <= BOUND_TOL;
    let sign = if xi < -ZERO_TOL {
        -1
    } else if xi > ZERO_TOL {
        1
    } else {
        0
    };
    match (at_a, at_b, sign) {
        (true, _, -1) => Ok(Loc::Vertical),
        (true, _, 0) => Ok(Loc::LeftCorner),
        (_, true, 1) => Ok(Loc::Vertical),
        (_, true, 0) => Ok(Loc::RightCorner),
        (false, false, 0) if y > a && y < b => Ok(Loc::Horizontal),
        _ => Err(off()),
    }
}

fn limiting_tags(loc: Loc) -> Vec<[Tag; 2]> {
    match loc {
        Loc::Line | Loc::Vertical => vec![[Free, Zero]],
        Loc::Horizontal => vec![[Zero, Free]],
        Loc::LeftCorner => vec![[NonPos, NonNeg], [Free, Zero], [Zero, Free]],
        Loc::RightCorner => vec![[NonNeg, NonPos], [Free, Zero], [Zero, Free]],
    }
}

fn tangent_tags(loc: Loc) -> Vec<[Tag; 2]> {
    match loc {
        Loc::Line | Loc::Vertical => vec![[Zero, Free]],
        Loc::Horizontal => vec![[Free, Zero]],
        Loc::LeftCorner => vec![[NonNeg, Zero], [Zero, NonPos]],
        Loc::RightCorner => vec![[NonPos, Zero], [Zero, NonNeg]],
    }
}

/// Sign of each component of the normalized direction (0 when negligible).
fn signs(w: &[f64]) -> Option<[i8; 2]> {
    let n = norm(w);
    if n == 0.0 {
        return None;
    }
    let s = |v: f64| {
        if v / n > 1e-9 {
            1
        } else if v / n < -1e-9 {
            -1
        } else {
            0
        }
    };
    Some([s(w[0]), s(w[1])])
}

fn directional_tags(loc: Loc, w: &[f64]) -> Vec<[Tag; 2]> {
    let Some(s) = signs(w) else {
        return limiting_tags(loc);
    };
    let piece = match (loc, s) {
        (Loc::Line | Loc::Vertical, [0, _]) => Some([Free, Zero]),
        (Loc::Horizontal, [_, 0]) => Some([Zero, Free]),
        (Loc::LeftCorner, [1, 0]) | (Loc::RightCorner, [-1, 0]) => Some([Zero, Free]),
        (Loc::LeftCorner, [0, -1]) | (Loc::RightCorner, [0, 1]) => Some([Free, Zero]),
        _ => None,
    };
    piece.into_iter().collect()
}

fn union2(tags: &[[Tag; 2]]) -> ConeUnion {
    let pieces: Vec<SignedCoordinateCone> = tags.iter().map(|t| SignedCoordinateCone::new(t.to_vec())).collect();
    ConeUnion::from_signed(2, &pieces)
}

/// Limiting normal cone to gph N_[a,b] at (y, ξ), in (μ, ν) coordinates.
pub fn limiting_graph_normal_interval(a: f64, b: f64, y: f64, xi: f64) -> Result<ConeUnion> {
    Ok(union2(&limiting_tags(locate(a, b, y, xi)?)))
}

/// Directional normal cone to gph N_[a,b] at (y, ξ) in direction w ∈ ℝ².
pub fn directional_graph_normal_interval(a: f64, b: f64, y: f64, xi: f64, w: [f64; 2]) -> Result<ConeUnion> {
    Ok(union2(&directional_tags(locate(a, b, y, xi)?, &w)))
}

/// Tangent cone to gph N_[a,b] at (y, ξ), in (v, η) coordinates.
pub fn interval_graph_tangent(a: f64, b: f64, y: f64, xi: f64) -> Result<ConeUnion> {
    Ok(union2(&tangent_tags(locate(a, b, y, xi)?)))
}

/// Cartesian product of per-coordinate unions, reordered so the first m
/// coordinates come from the first factor of each pair.
fn box_product(per_coord: &[Vec<[Tag; 2]>]) -> Vec<SignedCoordinateCone> {
    let m = per_coord.len();
    let mut out: Vec<Vec<[Tag; 2]>> = vec![Vec::new()];
    for opts in per_coord {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(*o);
                    p
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|pairs| {
            let mut tags = Vec::with_capacity(2 * m);
            tags.extend(pairs.iter().map(|p| p[0]));
            tags.extend(pairs.iter().map(|p| p[1]));
            SignedCoordinateCone::new(tags)
        })
        .collect()
}

fn check_graph_dims(y_box: &BoxSet, y: &[f64], xi: &[f64]) -> Result<()> {
    if y.len() != y_box.dim() || xi.len() != y_box.dim() {
        return Err(Error::Dimension(format!("graph point needs {} + {} entries", y_box.dim(), y_box.dim())));
    }
    Ok(())
}

/// Normal cone pieces to gph N_Y at (y, ξ), limiting when `w` is `None`,
/// directional otherwise (`w` ordered like the graph point). Pieces are in
/// lexicographic case-table order.
pub fn graph_normal_box_pieces(
    y_box: &BoxSet,
    y: &[f64],
    xi: &[f64],
    w: Option<&[f64]>,
) -> Result<Vec<SignedCoordinateCone>> {
    check_graph_dims(y_box, y, xi)?;
    let m = y.len();
    if let Some(w) = w {
        if w.len() != 2 * m {
            return Err(Error::Dimension(format!("direction needs {} entries", 2 * m)));
        }
    }
    let mut per = Vec::with_capacity(m);
    for i in 0..m {
        let loc = locate(y_box.lower[i], y_box.upper[i], y[i], xi[i])?;
        per.push(match w {
            None => limiting_tags(loc),
            Some(w) => directional_tags(loc, &[w[i], w[m + i]]),
        });
    }
    Ok(box_product(&per))
}

pub fn graph_normal_box(y_box: &BoxSet, y: &[f64], xi: &[f64], w: Option<&[f64]>) -> Result<ConeUnion> {
    let pieces = graph_normal_box_pieces(y_box, y, xi, w)?;
    Ok(ConeUnion::from_signed(2 * y.len(), &pieces))
}

pub fn graph_tangent_box_pieces(y_box: &BoxSet, y: &[f64], xi: &[f64]) -> Result<Vec<SignedCoordinateCone>> {
    check_graph_dims(y_box, y, xi)?;
    let per = (0..y.len())
        .map(|i| locate(y_box.lower[i], y_box.upper[i], y[i], xi[i]).map(tangent_tags))
        .collect::<Result<Vec<_>>>()?;
    Ok(box_product(&per))
}

pub fn graph_tangent_box(y_box: &BoxSet, y: &[f64], xi: &[f64]) -> Result<ConeUnion> {
    let pieces = graph_tangent_box_pieces(y_box, y, xi)?;
    Ok(ConeUnion::from_signed(2 * y.len(), &pieces))
}

fn check_in_box(y_box: &BoxSet, y: &[f64]) -> Result<()> {
    if !y_box.contains(y, 1e-12) {
        return Err(Error::NotInBox(format!("{y:?}")));
    }
    Ok(())
}

pub fn tangent_cone_box(y_box: &BoxSet, y: &[f64]) -> Result<SignedCoordinateCone> {
    check_in_box(y_box, y)?;
    Ok(SignedCoordinateCone::new(
        (0..y.len())
            .map(|i| {
                let (lo, hi) = (y_box.at_lower(i, y[i], BOUND_TOL), y_box.at_upper(i, y[i], BOUND_TOL));
                match (lo, hi) {
                    (true, true) => Zero,
                    (true, false) => NonNeg,
                    (false, true) => NonPos,
                    (false, false) => Free,
                }
            })
            .collect(),
    ))
}

/// Polar of the tangent cone.
pub fn normal_cone_box(y_box: &BoxSet, y: &[f64]) -> Result<SignedCoordinateCone> {
    let t = tangent_cone_box(y_box, y)?;
    Ok(SignedCoordinateCone::new(
        t.tags
            .iter()
            .map(|t| match t {
                Zero => Free,
                Free => Zero,
                NonNeg => NonPos,
                NonPos => NonNeg,
            })
            .collect(),
    ))
}

/// `K_Y(y, -g) = T_Y(y) ∩ {g}^⊥` coordinate-wise.
pub fn critical_cone(y_box: &BoxSet, y: &[f64], g: &[f64]) -> Result<SignedCoordinateCone> {
    let mut k = tangent_cone_box(y_box, y)?;
    if g.len() != y.len() {
        return Err(Error::Dimension("gradient length differs from m".into()));
    }
    for (t, gi) in k.tags.iter_mut().zip(g) {
        if gi.abs() > ZERO_TOL {
            *t = Zero;
        }
    }
    Ok(k)
}

/// `N_Y(y; d) = N_Y(y) ∩ {d}^⊥` for `d ∈ T_Y(y)`; `None` when d is not tangent.
pub fn directional_normal_convex_box(y_box: &BoxSet, y: &[f64], d: &[f64]) -> Result<Option<PolyCone>> {
    let t = tangent_cone_box(y_box, y)?;
    if d.len() != y.len() {
        return Err(Error::Dimension("direction length differs from m".into()));
    }
    let scale = norm(d).max(1e-300);
    let dz: Vec<f64> = d.iter().map(|v| if (v / scale).abs() <= 1e-10 { 0.0 } else { *v }).collect();
    if !t.contains(&dz, 0.0) {
        return Ok(None);
    }
    let mut n = normal_cone_box(y_box, y)?;
    // μ ∈ N and d ∈ T give μ_i d_i ≤ 0 termwise, so ⟨μ, d⟩ = 0 forces μ_i = 0 where d_i ≠ 0.
    for (tag, di) in n.tags.iter_mut().zip(&dz) {
        if *di != 0.0 {
            *tag = Zero;
        }
    }
    let cone = n.to_poly();
    Ok(Some(if norm(&dz) > 0.0 { cone.with_equality(dz) } else { cone }))
}
