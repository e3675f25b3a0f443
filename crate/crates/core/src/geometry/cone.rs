//! Convex polyhedral cones kept in both representations, and finite unions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{combinations, dot, norm, null_space, rank, rows_matrix};

/// Halfspace/equality membership tolerance.
pub const MEMBER_TOL: f64 = 1e-10;
/// Largest ambient dimension for double-description conversions.
pub const MAX_DD_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Zero,
    Free,
    NonNeg,
    NonPos,
}

/// Product of per-coordinate sets {0}, ℝ, ℝ₊, ℝ₋.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedCoordinateCone {
    pub tags: Vec<Tag>,
}

impl SignedCoordinateCone {
    pub fn new(tags: Vec<Tag>) -> Self {
        SignedCoordinateCone { tags }
    }

    pub fn dim(&self) -> usize {
        self.tags.len()
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        z.len() == self.dim()
            && self.tags.iter().zip(z).all(|(t, v)| match t {
                Tag::Zero => v.abs() <= tol,
                Tag::Free => true,
                Tag::NonNeg => *v >= -tol,
                Tag::NonPos => *v <= tol,
            })
    }

    pub fn is_zero(&self) -> bool {
        self.tags.iter().all(|t| *t == Tag::Zero)
    }

    pub fn to_poly(&self) -> PolyCone {
        let d = self.dim();
        let e = |i: usize, s: f64| {
            let mut v = vec![0.0; d];
            v[i] = s;
            v
        };
        let mut c = PolyCone { dim: d, generators: vec![], halfspaces: vec![], equalities: vec![] };
        for (i, t) in self.tags.iter().enumerate() {
            match t {
                Tag::Zero => c.equalities.push(e(i, 1.0)),
                Tag::Free => {
                    c.generators.push(e(i, 1.0));
                    c.generators.push(e(i, -1.0));
                }
                Tag::NonNeg => {
                    c.generators.push(e(i, 1.0));
                    c.halfspaces.push(e(i, -1.0));
                }
                Tag::NonPos => {
                    c.generators.push(e(i, -1.0));
                    c.halfspaces.push(e(i, 1.0));
                }
            }
        }
        c
    }

    /// Faces of the cone: every coordinate-wise choice of a face of its factor
    /// (ℝ₊ has faces {0} and ℝ₊). Each face is again a signed coordinate cone.
    pub fn faces(&self) -> Vec<SignedCoordinateCone> {
        let mut out = vec![Vec::new()];
        for t in &self.tags {
            let opts: &[Tag] = match t {
                Tag::Zero => &[Tag::Zero],
                Tag::Free => &[Tag::Free],
                Tag::NonNeg => &[Tag::Zero, Tag::NonNeg],
                Tag::NonPos => &[Tag::Zero, Tag::NonPos],
            };
            out = out
                .into_iter()
                .flat_map(|p: Vec<Tag>| {
                    opts.iter().map(move |o| {
                        let mut q = p.clone();
                        q.push(*o);
                        q
                    })
                })
                .collect();
        }
        out.into_iter().map(SignedCoordinateCone::new).collect()
    }
}

/// `cone(generators)` = `{z : ⟨a, z⟩ ≤ 0 ∀ a ∈ halfspaces, ⟨e, z⟩ = 0 ∀ e ∈ equalities}`.
/// Lines appear as a pair of opposite generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyCone {
    pub dim: usize,
    pub generators: Vec<Vec<f64>>,
    pub halfspaces: Vec<Vec<f64>>,
    pub equalities: Vec<Vec<f64>>,
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

fn push_unique(list: &mut Vec<Vec<f64>>, v: Vec<f64>) {
    if !list.iter().any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() <= 1e-9)) {
        list.push(v);
    }
}

/// Facet description of `cone(gens)` in ℝ^dim: (halfspaces, equalities).
fn facets(dim: usize, gens: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let gens: Vec<Vec<f64>> = gens.iter().filter(|g| norm(g) > 1e-14).map(|g| unit(g)).collect();
    let gm = rows_matrix(&gens, dim);
    let r = rank(&gm, 1e-10);
    let complement = null_space(&gm, 1e-10);
    let equalities: Vec<Vec<f64>> =
        (0..complement.ncols()).map(|j| complement.column(j).iter().copied().collect()).collect();
    let mut halfspaces = Vec::new();
    if r == 0 {
        return (halfspaces, equalities);
    }
    for subset in combinations(gens.len(), r - 1) {
        let mut rows: Vec<Vec<f64>> = subset.iter().map(|&i| gens[i].clone()).collect();
        if rank(&rows_matrix(&rows, dim), 1e-10) != r - 1 {
            continue;
        }
        rows.extend(equalities.iter().cloned());
        let ns = null_space(&rows_matrix(&rows, dim), 1e-10);
        if ns.ncols() != 1 {
            continue;
        }
        let a: Vec<f64> = ns.column(0).iter().copied().collect();
        let signs: Vec<f64> = gens.iter().map(|g| dot(g, &a)).collect();
        if signs.iter().all(|s| *s <= 1e-10) {
            push_unique(&mut halfspaces, a);
        } else if signs.iter().all(|s| *s >= -1e-10) {
            push_unique(&mut halfspaces, a.iter().map(|x| -x).collect());
        }
    }
    (halfspaces, equalities)
}

impl PolyCone {
    pub fn zero(dim: usize) -> PolyCone {
        SignedCoordinateCone::new(vec![Tag::Zero; dim]).to_poly()
    }

    pub fn full(dim: usize) -> PolyCone {
        SignedCoordinateCone::new(vec![Tag::Free; dim]).to_poly()
    }

    /// Build from generators; the halfspace form is computed (dim ≤ 4).
    pub fn from_generators(dim: usize, generators: Vec<Vec<f64>>) -> Result<PolyCone> {
        if dim > MAX_DD_DIM {
            return Err(Error::DimensionTooLarge(dim, MAX_DD_DIM));
        }
        if generators.iter().any(|g| g.len() != dim) {
            return Err(Error::Dimension("generator length differs from ambient dimension".into()));
        }
        let (halfspaces, equalities) = facets(dim, &generators);
        let generators = generators.into_iter().filter(|g| norm(g) > 1e-14).collect();
        Ok(PolyCone { dim, generators, halfspaces, equalities })
    }

    /// Build from `⟨a,z⟩ ≤ 0`, `⟨e,z⟩ = 0`; generators come from the polar (dim ≤ 4).
    pub fn from_halfspaces(dim: usize, halfspaces: Vec<Vec<f64>>, equalities: Vec<Vec<f64>>) -> Result<PolyCone> {
        if dim > MAX_DD_DIM {
            return Err(Error::DimensionTooLarge(dim, MAX_DD_DIM));
        }
        let mut polar_gens = halfspaces.clone();
        for e in &equalities {
            polar_gens.push(e.clone());
            polar_gens.push(e.iter().map(|x| -x).collect());
        }
        let (ph, pe) = facets(dim, &polar_gens);
        let mut generators = ph;
        for e in pe {
            generators.push(e.iter().map(|x| -x).collect());
            generators.push(e);
        }
        Ok(PolyCone { dim, generators, halfspaces, equalities })
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        let scale = norm(z).max(1.0);
        z.len() == self.dim
            && self.halfspaces.iter().all(|a| dot(a, z) <= tol * scale * norm(a).max(1.0))
            && self.equalities.iter().all(|e| dot(e, z).abs() <= tol * scale * norm(e).max(1.0))
    }

    pub fn contains_cone(&self, other: &PolyCone, tol: f64) -> bool {
        other.generators.iter().all(|g| self.contains(g, tol))
    }

    pub fn same_set(&self, other: &PolyCone, tol: f64) -> bool {
        self.contains_cone(other, tol) && other.contains_cone(self, tol)
    }

    /// Every generator satisfies every constraint.
    pub fn is_dual_consistent(&self, tol: f64) -> bool {
        self.contains_cone(self, tol)
    }

    pub fn polar(&self) -> Result<PolyCone> {
        let mut gens = self.halfspaces.clone();
        for e in &self.equalities {
            gens.push(e.clone());
            gens.push(e.iter().map(|x| -x).collect());
        }
        PolyCone::from_generators(self.dim, gens)
    }

    pub fn product(&self, other: &PolyCone) -> PolyCone {
        let d = self.dim + other.dim;
        let left = |v: &Vec<f64>| {
            let mut w = v.clone();
            w.resize(d, 0.0);
            w
        };
        let right = |v: &Vec<f64>| {
            let mut w = vec![0.0; self.dim];
            w.extend_from_slice(v);
            w
        };
        PolyCone {
            dim: d,
            generators: self.generators.iter().map(left).chain(other.generators.iter().map(right)).collect(),
            halfspaces: self.halfspaces.iter().map(left).chain(other.halfspaces.iter().map(right)).collect(),
            equalities: self.equalities.iter().map(left).chain(other.equalities.iter().map(right)).collect(),
        }
    }

    /// Reorder coordinates: new coordinate k is old coordinate `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> PolyCone {
        let p = |v: &Vec<f64>| perm.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        PolyCone {
            dim: self.dim,
            generators: self.generators.iter().map(p).collect(),
            halfspaces: self.halfspaces.iter().map(p).collect(),
            equalities: self.equalities.iter().map(p).collect(),
        }
    }

    /// Add `⟨d, z⟩ = 0`.
    pub fn with_equality(mut self, d: Vec<f64>) -> PolyCone {
        self.equalities.push(d);
        self
    }
}

/// Finite union of convex polyhedral cones; no pieces means the empty set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeUnion {
    pub dim: usize,
    pub pieces: Vec<PolyCone>,
}

impl ConeUnion {
    pub fn empty(dim: usize) -> ConeUnion {
        ConeUnion { dim, pieces: Vec::new() }
    }

    pub fn single(c: PolyCone) -> ConeUnion {
        ConeUnion { dim: c.dim, pieces: vec![c] }
    }

    pub fn from_signed(dim: usize, pieces: &[SignedCoordinateCone]) -> ConeUnion {
        ConeUnion { dim, pieces: pieces.iter().map(|s| s.to_poly()).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        self.pieces.iter().any(|p| p.contains(z, tol))
    }

    /// Index of the first piece containing `z`.
    pub fn piece_of(&self, z: &[f64], tol: f64) -> Option<usize> {
        self.pieces.iter().position(|p| p.contains(z, tol))
    }

    /// Every piece of `other` lies inside some piece of `self`.
    pub fn contains_union(&self, other: &ConeUnion, tol: f64) -> bool {
        other.pieces.iter().all(|q| self.pieces.iter().any(|p| p.contains_cone(q, tol)))
    }

    /// Drop pieces contained in another piece (keeping the earliest of equal pieces).
    pub fn prune(mut self) -> ConeUnion {
        let mut keep: Vec<PolyCone> = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let dominated = self.pieces.iter().enumerate().any(|(j, q)| {
                j != i && q.contains_cone(p, MEMBER_TOL) && (!p.contains_cone(q, MEMBER_TOL) || j < i)
            });
            if !dominated {
                keep.push(p.clone());
            }
        }
        self.pieces = keep;
        self
    }

    pub fn is_nonredundant(&self) -> bool {
        self.clone().prune().pieces.len() == self.pieces.len()
    }

    pub fn product(&self, other: &ConeUnion) -> ConeUnion {
        let mut pieces = Vec::with_capacity(self.pieces.len() * other.pieces.len());
        for a in &self.pieces {
            for b in &other.pieces {
                pieces.push(a.product(b));
            }
        }
        ConeUnion { dim: self.dim + other.dim, pieces }
    }

    pub fn permute(&self, perm: &[usize]) -> ConeUnion {
        ConeUnion { dim: self.dim, pieces: self.pieces.iter().map(|p| p.permute(perm)).collect() }
    }
}
