//! Constraint qualifications and directional KKT certificates for the
//! single-level reformulation
//!
//!   min F(x, y)  s.t.  G(x, y) ≤ 0,  Φ(x, y) := (y, −∇_y f(x, y)) ∈ gph N_Y.
//!
//! Multipliers are ordered (μ₁..μ_m, ν₁..ν_m, β); stationarity reads
//! `0 = ∇F + ∇Φᵀ(μ, ν) + ∇G_Iᵀ β_I`.

mod lp;

pub use lp::{nontrivial_kernel, sign_constrained_ls};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::EvalPoint;
use crate::geometry::{graph_normal_box_pieces, graph_tangent_box_pieces, SignedCoordinateCone, Tag};
use crate::linalg::{dot, inf_norm, norm};
use crate::lower::stationarity_residual;
use crate::problems::BilevelProblem;
use crate::regularity::Verdict;

/// Feasibility tolerance for G and for stationarity of ȳ.
pub const FEAS_TOL: f64 = 1e-8;
/// `∇G_i(u, v) ≤ LIN_TOL` for active i.
pub const LIN_TOL: f64 = 1e-10;
pub const CRITICAL_TOL: f64 = 1e-8;
pub const KKT_TOL: f64 = 1e-6;
pub const CQ_TOL: f64 = 1e-8;

/// Derivative data of the reformulation at one point.
#[derive(Clone, Debug)]
pub struct ConstraintJacobian {
    pub n: usize,
    pub m: usize,
    /// `(y, −∇_y f)`.
    pub phi: Vec<f64>,
    /// `∇Φ`, 2m × (n+m): `[[0, I], [−f_yx, −f_yy]]`.
    pub phi_jac: DMatrix<f64>,
    pub g: Vec<f64>,
    /// `∇G`, q × (n+m).
    pub g_jac: DMatrix<f64>,
    pub grad_upper: Vec<f64>,
}

impl ConstraintJacobian {
    /// `[∇Φ; ∇G]`.
    pub fn stacked(&self) -> DMatrix<f64> {
        let (r, c) = (2 * self.m + self.g.len(), self.n + self.m);
        DMatrix::from_fn(r, c, |i, j| if i < 2 * self.m { self.phi_jac[(i, j)] } else { self.g_jac[(i - 2 * self.m, j)] })
    }

    pub fn phi_dir(&self, d: &[f64]) -> Vec<f64> {
        (&self.phi_jac * DVector::from_column_slice(d)).iter().copied().collect()
    }

    pub fn g_dir(&self, i: usize, d: &[f64]) -> f64 {
        self.g_jac.row(i).iter().zip(d).map(|(a, b)| a * b).sum()
    }

    pub fn active(&self) -> Vec<usize> {
        (0..self.g.len()).filter(|&i| self.g[i] >= -FEAS_TOL).collect()
    }

    pub fn y(&self) -> &[f64] {
        &self.phi[..self.m]
    }

    pub fn xi(&self) -> &[f64] {
        &self.phi[self.m..]
    }
}

pub fn constraint_jacobian(prob: &BilevelProblem, point: &EvalPoint) -> Result<ConstraintJacobian> {
    prob.check_point(point)?;
    let (n, m) = (prob.n, prob.m);
    let low = prob.lower.differentiate(point)?;
    let up = prob.upper.differentiate(point)?;
    let mut phi_jac = DMatrix::zeros(2 * m, n + m);
    for i in 0..m {
        phi_jac[(i, n + i)] = 1.0;
        for j in 0..n + m {
            phi_jac[(m + i, j)] = -low.hessian[(n + i, j)];
        }
    }
    let mut phi = point.y.clone();
    phi.extend((0..m).map(|i| -low.gradient[n + i]));
    let gs = prob.constraints.iter().map(|g| g.differentiate(point)).collect::<Result<Vec<_>>>()?;
    let g_jac = DMatrix::from_fn(gs.len(), n + m, |i, j| gs[i].gradient[j]);
    Ok(ConstraintJacobian {
        n,
        m,
        phi,
        phi_jac,
        g: gs.iter().map(|d| d.value).collect(),
        g_jac,
        grad_upper: up.gradient.iter().copied().collect(),
    })
}

/// Max abs deviation of `[∇Φ; ∇G]` from central differences of (Φ, G).
pub fn jacobian_fd_error(prob: &BilevelProblem, point: &EvalPoint, h: f64) -> Result<f64> {
    let jac = constraint_jacobian(prob, point)?.stacked();
    let values = |z: &DVector<f64>| -> Result<Vec<f64>> {
        let p = EvalPoint::from_stacked(z, prob.n);
        let d = prob.lower.diff_y(&p.x, &p.y)?;
        let mut v = p.y.clone();
        v.extend(d.gradient.iter().map(|g| -g));
        for g in &prob.constraints {
            v.push(g.evaluate(&p)?);
        }
        Ok(v)
    };
    let z = point.stacked();
    let mut err: f64 = 0.0;
    for j in 0..z.len() {
        let (mut zp, mut zm) = (z.clone(), z.clone());
        zp[j] += h;
        zm[j] -= h;
        let (vp, vm) = (values(&zp)?, values(&zm)?);
        for i in 0..vp.len() {
            err = err.max(((vp[i] - vm[i]) / (2.0 * h) - jac[(i, j)]).abs());
        }
    }
    Ok(err)
}

fn require_feasible(prob: &BilevelProblem, point: &EvalPoint, jac: &ConstraintJacobian) -> Result<()> {
    if !prob.y_box.contains(&point.y, 1e-12) {
        return Err(Error::Infeasible(format!("y = {:?} is outside Y", point.y)));
    }
    if let Some(i) = (0..jac.g.len()).find(|&i| jac.g[i] > FEAS_TOL) {
        return Err(Error::Infeasible(format!("G{} = {:e} > 0", i + 1, jac.g[i])));
    }
    let r = stationarity_residual(prob, &point.x, &point.y)?;
    if r > FEAS_TOL {
        return Err(Error::Infeasible(format!("lower-level stationarity residual {r:e}")));
    }
    Ok(())
}

fn stack_dir(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().chain(v).copied().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizedCheck {
    pub contains: bool,
    pub active: Vec<usize>,
    /// `∇G_i(u, v)` for the active i.
    pub active_derivatives: Vec<f64>,
    /// `∇Φ(u, v)`, the direction handed to the graph cones.
    pub phi_direction: Vec<f64>,
    /// Index of the first tangent piece of gph N_Y containing it.
    pub tangent_piece: Option<usize>,
}

fn phi_tol(w: &[f64]) -> f64 {
    1e-9 * norm(w).max(1.0)
}

/// (u, v) ∈ L(x̄, ȳ).
pub fn linearized_cone_contains(prob: &BilevelProblem, point: &EvalPoint, u: &[f64], v: &[f64]) -> Result<LinearizedCheck> {
    let jac = constraint_jacobian(prob, point)?;
    require_feasible(prob, point, &jac)?;
    if u.len() != prob.n || v.len() != prob.m {
        return Err(Error::Dimension("direction must have n + m entries".into()));
    }
    linearized_with(&prob.y_box, &jac, &stack_dir(u, v))
}

fn linearized_with(y_box: &crate::problems::BoxSet, jac: &ConstraintJacobian, d: &[f64]) -> Result<LinearizedCheck> {
    let active = jac.active();
    let active_derivatives: Vec<f64> = active.iter().map(|&i| jac.g_dir(i, d)).collect();
    let w = jac.phi_dir(d);
    let pieces = graph_tangent_box_pieces(y_box, jac.y(), jac.xi())?;
    let tol = phi_tol(&w);
    let tangent_piece = pieces.iter().position(|p| p.contains(&w, tol));
    let g_ok = active_derivatives.iter().all(|v| *v <= LIN_TOL * norm(d).max(1.0));
    Ok(LinearizedCheck {
        contains: g_ok && tangent_piece.is_some(),
        active,
        active_derivatives,
        phi_direction: w,
        tangent_piece,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalBranch {
    Interior,
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalSearch {
    pub u: Vec<f64>,
    pub branch: CriticalBranch,
    /// The critical v, when one exists.
    pub v: Option<Vec<f64>>,
    /// `∇F(x̄, ȳ)(u, v)` for the returned v, or for the interior formula's v.
    pub upper_derivative: Option<f64>,
    pub reason: Option<String>,
}

/// Find v with (u, v) ∈ L and ∇F(x̄, ȳ)(u, v) = 0.
pub fn find_critical_direction(prob: &BilevelProblem, point: &EvalPoint, u: &[f64]) -> Result<CriticalSearch> {
    let jac = constraint_jacobian(prob, point)?;
    require_feasible(prob, point, &jac)?;
    if u.len() != prob.n {
        return Err(Error::Dimension("u must have n entries".into()));
    }
    let (n, m) = (prob.n, prob.m);
    let fyx = jac.phi_jac.view((m, 0), (m, n)).map(|v| -v);
    let fyy = jac.phi_jac.view((m, n), (m, m)).map(|v| -v);
    let du = |v: &[f64]| dot(&jac.grad_upper, &stack_dir(u, v));
    if prob.y_box.interior(&point.y, 1e-9) {
        let rhs = -(&fyx * DVector::from_column_slice(u));
        let v = fyy.clone().lu().solve(&rhs).ok_or_else(|| Error::Singular("∇²_yy f".into()))?;
        if fyy.clone().singular_values().min() < 1e-12 * fyy.norm().max(1.0) {
            return Err(Error::Singular("∇²_yy f".into()));
        }
        let v: Vec<f64> = v.iter().copied().collect();
        let dval = du(&v);
        let scale = norm(&jac.grad_upper).max(1.0) * norm(&stack_dir(u, &v)).max(1.0);
        let lin = linearized_with(&prob.y_box, &jac, &stack_dir(u, &v))?;
        let (ok, reason) = if dval.abs() > CRITICAL_TOL * scale {
            (false, Some(format!("∇F(u,v) = {} ≠ 0", crate::format::g12(dval))))
        } else if !lin.contains {
            (false, Some("(u, v) is not in the linearized cone".to_string()))
        } else {
            (true, None)
        };
        return Ok(CriticalSearch {
            u: u.to_vec(),
            branch: CriticalBranch::Interior,
            v: ok.then_some(v),
            upper_derivative: Some(dval),
            reason,
        });
    }
    // Boundary: per tangent piece, the admissible v form a polyhedron;
    // homogenize with s ≥ 0 and look for a generator with s > 0.
    let pieces = graph_tangent_box_pieces(&prob.y_box, jac.y(), jac.xi())?;
    let active = jac.active();
    let dim = m + 1;
    for piece in &pieces {
        let mut eqs: Vec<Vec<f64>> = Vec::new();
        let mut halves: Vec<Vec<f64>> = Vec::new();
        // Linear form of (s, v) ↦ ℓ(s u, v) for a row ℓ over (x, y).
        let form = |row: &[f64]| -> Vec<f64> {
            let mut r = vec![dot(&row[..n], u)];
            r.extend_from_slice(&row[n..]);
            r
        };
        for (k, tag) in piece.tags.iter().enumerate() {
            let row: Vec<f64> = jac.phi_jac.row(k).iter().copied().collect();
            let f = form(&row);
            match tag {
                Tag::Zero => eqs.push(f),
                Tag::Free => {}
                Tag::NonNeg => halves.push(f.iter().map(|v| -v).collect()),
                Tag::NonPos => halves.push(f),
            }
        }
        for &i in &active {
            halves.push(form(&jac.g_jac.row(i).iter().copied().collect::<Vec<_>>()));
        }
        eqs.push(form(&jac.grad_upper));
        let mut s = vec![0.0; dim];
        s[0] = -1.0;
        halves.push(s);
        let cone = crate::geometry::PolyCone::from_halfspaces(dim, halves, eqs)?;
        if let Some(g) = cone.generators.iter().filter(|g| g[0] > 1e-9).min_by(|a, b| {
            (norm(&a[1..]) / a[0]).partial_cmp(&(norm(&b[1..]) / b[0])).unwrap()
        }) {
            let v: Vec<f64> = g[1..].iter().map(|x| x / g[0]).collect();
            return Ok(CriticalSearch {
                u: u.to_vec(),
                branch: CriticalBranch::Boundary,
                upper_derivative: Some(du(&v)),
                v: Some(v),
                reason: None,
            });
        }
    }
    Ok(CriticalSearch {
        u: u.to_vec(),
        branch: CriticalBranch::Boundary,
        v: None,
        upper_derivative: None,
        reason: Some("no tangent piece admits a critical v".into()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CqKind {
    Nnamcq,
    Foscms,
    AffinePolyhedral,
    Assumed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    /// Full length q; zero off the active set.
    pub beta: Vec<f64>,
    /// ‖∇Φᵀ(μ,ν) + ∇Gᵀβ‖∞ (plus ∇F for KKT multipliers).
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CqEvidence {
    pub kind: CqKind,
    pub direction: Option<(Vec<f64>, Vec<f64>)>,
    pub verdict: Verdict,
    /// Unit-norm abnormal multiplier when the CQ fails.
    pub violating: Option<Multipliers>,
    pub pieces_examined: usize,
    /// Subregularity modulus; existence-style CQs never compute it.
    pub kappa: Option<f64>,
}

impl CqEvidence {
    pub fn assumed() -> CqEvidence {
        CqEvidence { kind: CqKind::Assumed, direction: None, verdict: Verdict::Holds, violating: None, pieces_examined: 0, kappa: None }
    }

    pub fn established(&self) -> bool {
        self.verdict.holds()
    }
}

/// Coefficient matrix of (μ, ν, β_used) in the adjoint: (n+m) × (2m + |used|).
fn adjoint_matrix(jac: &ConstraintJacobian, used: &[usize]) -> DMatrix<f64> {
    let (m, c) = (jac.m, jac.n + jac.m);
    DMatrix::from_fn(c, 2 * m + used.len(), |r, k| {
        if k < 2 * m {
            jac.phi_jac[(k, r)]
        } else {
            jac.g_jac[(used[k - 2 * m], r)]
        }
    })
}

fn unpack(jac: &ConstraintJacobian, used: &[usize], w: &[f64], residual: f64) -> Multipliers {
    let m = jac.m;
    let mut beta = vec![0.0; jac.g.len()];
    for (k, &i) in used.iter().enumerate() {
        beta[i] = w[2 * m + k];
    }
    Multipliers { mu: w[..m].to_vec(), nu: w[m..2 * m].to_vec(), beta, residual }
}

fn piece_tags(piece: &SignedCoordinateCone, nbeta: usize) -> Vec<Tag> {
    let mut t = piece.tags.clone();
    t.extend(std::iter::repeat_n(Tag::NonNeg, nbeta));
    t
}

fn abnormal_search(
    jac: &ConstraintJacobian,
    pieces: &[SignedCoordinateCone],
    used: &[usize],
) -> (Option<Multipliers>, usize) {
    let a = adjoint_matrix(jac, used);
    for (k, piece) in pieces.iter().enumerate() {
        if let Some(w) = nontrivial_kernel(&a, &piece_tags(piece, used.len()), 1e-10) {
            let res = inf_norm(&(&a * DVector::from_vec(w.clone())).iter().copied().collect::<Vec<_>>());
            return (Some(unpack(jac, used, &w, res)), k + 1);
        }
    }
    (None, pieces.len())
}

/// No nonzero abnormal multiplier over the limiting normal cone of gph N_Y.
pub fn check_nnamcq(prob: &BilevelProblem, point: &EvalPoint) -> Result<CqEvidence> {
    let jac = constraint_jacobian(prob, point)?;
    require_feasible(prob, point, &jac)?;
    let pieces = graph_normal_box_pieces(&prob.y_box, jac.y(), jac.xi(), None)?;
    let (violating, pieces_examined) = abnormal_search(&jac, &pieces, &jac.active());
    Ok(CqEvidence {
        kind: CqKind::Nnamcq,
        direction: None,
        verdict: Verdict::from_bool(violating.is_none()),
        violating,
        pieces_examined,
        kappa: None,
    })
}

/// Active constraints with ∇G_i(u, v) = 0 (the others carry β_i = 0).
fn directional_active(jac: &ConstraintJacobian, d: &[f64]) -> Vec<usize> {
    jac.active().into_iter().filter(|&i| jac.g_dir(i, d) >= -LIN_TOL * norm(d).max(1.0)).collect()
}

/// Directional variant in direction (u, v) ∈ L.
pub fn check_foscms(prob: &BilevelProblem, point: &EvalPoint, u: &[f64], v: &[f64]) -> Result<CqEvidence> {
    let jac = constraint_jacobian(prob, point)?;
    require_feasible(prob, point, &jac)?;
    let d = stack_dir(u, v);
    if d.len() != prob.n + prob.m {
        return Err(Error::Dimension("direction must have n + m entries".into()));
    }
    let lin = linearized_with(&prob.y_box, &jac, &d)?;
    if !lin.contains {
        return Err(Error::NotInLinearizedCone);
    }
    let pieces = graph_normal_box_pieces(&prob.y_box, jac.y(), jac.xi(), Some(&lin.phi_direction))?;
    let (violating, pieces_examined) = abnormal_search(&jac, &pieces, &directional_active(&jac, &d));
    Ok(CqEvidence {
        kind: CqKind::Foscms,
        direction: Some((u.to_vec(), v.to_vec())),
        verdict: Verdict::from_bool(violating.is_none()),
        violating,
        pieces_examined,
        kappa: None,
    })
}

/// G affine, f quadratic (so Φ is affine) and Y a box (so gph N_Y is polyhedral).
pub fn detect_affine_polyhedral(prob: &BilevelProblem) -> bool {
    prob.constraints.iter().all(|g| g.degree().is_some_and(|d| d <= 1)) && prob.lower.degree().is_some_and(|d| d <= 2)
}

pub fn affine_polyhedral_evidence(prob: &BilevelProblem) -> CqEvidence {
    CqEvidence {
        kind: CqKind::AffinePolyhedral,
        direction: None,
        verdict: Verdict::from_bool(detect_affine_polyhedral(prob)),
        violating: None,
        pieces_examined: 0,
        kappa: None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// ‖∇F + ∇Φᵀ(μ,ν) + ∇Gᵀβ‖∞.
    pub stationarity: f64,
    /// Per (x, y) row.
    pub rows: Vec<f64>,
    /// max |β_i G_i|.
    pub beta_g: f64,
    /// max |β_i ∇G_i(u, v)|.
    pub beta_dg: f64,
    pub beta_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktCertificate {
    pub point: EvalPoint,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub beta: Vec<f64>,
    pub active_set: Vec<usize>,
    pub residuals: Residuals,
    pub piece: usize,
    pub piece_tags: Vec<Tag>,
    /// All pieces admitting multipliers.
    pub passing_pieces: Vec<usize>,
    pub cq: CqEvidence,
    pub tolerance: f64,
}

fn residuals(jac: &ConstraintJacobian, mu: &[f64], nu: &[f64], beta: &[f64], d: &[f64]) -> Residuals {
    let lam: Vec<f64> = mu.iter().chain(nu).copied().collect();
    let mut r = DVector::from_vec(jac.grad_upper.clone());
    r += jac.phi_jac.transpose() * DVector::from_vec(lam);
    if !beta.is_empty() {
        r += jac.g_jac.transpose() * DVector::from_column_slice(beta);
    }
    let rows: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    Residuals {
        stationarity: rows.iter().copied().fold(0.0, f64::max),
        rows,
        beta_g: (0..beta.len()).map(|i| (beta[i] * jac.g[i]).abs()).fold(0.0, f64::max),
        beta_dg: (0..beta.len()).map(|i| (beta[i] * jac.g_dir(i, d)).abs()).fold(0.0, f64::max),
        beta_min: beta.iter().copied().fold(0.0, f64::min),
    }
}

impl KktCertificate {
    /// Recompute every residual from fresh derivatives.
    pub fn reverify(&self, prob: &BilevelProblem) -> Result<Residuals> {
        let jac = constraint_jacobian(prob, &self.point)?;
        Ok(residuals(&jac, &self.mu, &self.nu, &self.beta, &stack_dir(&self.u, &self.v)))
    }

    pub fn piece_contains_multipliers(&self) -> bool {
        let lam: Vec<f64> = self.mu.iter().chain(&self.nu).copied().collect();
        SignedCoordinateCone::new(self.piece_tags.clone()).contains(&lam, 0.0)
    }
}

fn certify_over(
    prob: &BilevelProblem,
    point: &EvalPoint,
    u: &[f64],
    v: &[f64],
    cq: CqEvidence,
    restrict_interior: bool,
) -> Result<KktCertificate> {
    let jac = constraint_jacobian(prob, point)?;
    require_feasible(prob, point, &jac)?;
    let d = stack_dir(u, v);
    if d.len() != prob.n + prob.m {
        return Err(Error::Dimension("direction must have n + m entries".into()));
    }
    let lin = linearized_with(&prob.y_box, &jac, &d)?;
    if !lin.contains {
        return Err(Error::NotInLinearizedCone);
    }
    let dval = dot(&jac.grad_upper, &d);
    if dval.abs() > CRITICAL_TOL * norm(&jac.grad_upper).max(1.0) * norm(&d).max(1.0) {
        return Err(Error::NotCritical(dval));
    }
    if !(cq.established() || cq.kind == CqKind::Assumed) {
        return Err(Error::CqNotEstablished);
    }
    let m = prob.m;
    let pieces = if restrict_interior {
        let mut t = vec![Tag::Zero; m];
        t.extend(vec![Tag::Free; m]);
        vec![SignedCoordinateCone::new(t)]
    } else {
        graph_normal_box_pieces(&prob.y_box, jac.y(), jac.xi(), Some(&lin.phi_direction))?
    };
    let used = directional_active(&jac, &d);
    let a = adjoint_matrix(&jac, &used);
    let b = -DVector::from_vec(jac.grad_upper.clone());
    let mut found: Vec<(usize, Multipliers)> = Vec::new();
    let mut best = f64::INFINITY;
    for (k, piece) in pieces.iter().enumerate() {
        let (w, _) = sign_constrained_ls(&a, &b, &piece_tags(piece, used.len()));
        let mult = unpack(&jac, &used, &w, 0.0);
        let res = residuals(&jac, &mult.mu, &mult.nu, &mult.beta, &d);
        best = best.min(res.stationarity);
        if res.stationarity <= KKT_TOL {
            found.push((k, Multipliers { residual: res.stationarity, ..mult }));
        }
    }
    let Some((piece, mult)) = found.first().cloned() else {
        return Err(Error::NoMultipliers(best));
    };
    let residuals = residuals(&jac, &mult.mu, &mult.nu, &mult.beta, &d);
    Ok(KktCertificate {
        point: point.clone(),
        u: u.to_vec(),
        v: v.to_vec(),
        mu: mult.mu,
        nu: mult.nu,
        beta: mult.beta,
        active_set: jac.active(),
        residuals,
        piece,
        piece_tags: pieces[piece].tags.clone(),
        passing_pieces: found.iter().map(|f| f.0).collect(),
        cq,
        tolerance: KKT_TOL,
    })
}

/// Multipliers in the directional normal cone of gph N_Y along ∇Φ(u, v).
pub fn certify_directional_kkt(
    prob: &BilevelProblem,
    point: &EvalPoint,
    u: &[f64],
    v: &[f64],
    cq: CqEvidence,
) -> Result<KktCertificate> {
    certify_over(prob, point, u, v, cq, false)
}

/// Interior ȳ: μ = 0 and ν free.
pub fn certify_interior(
    prob: &BilevelProblem,
    point: &EvalPoint,
    u: &[f64],
    v: &[f64],
    cq: CqEvidence,
) -> Result<KktCertificate> {
    prob.check_point(point)?;
    if !prob.y_box.interior(&point.y, 1e-9) {
        return Err(Error::NotInterior);
    }
    certify_over(prob, point, u, v, cq, true)
}
