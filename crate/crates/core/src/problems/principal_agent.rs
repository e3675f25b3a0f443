//! Moral-hazard contract design as a bilevel program: the principal picks
//! wages x, the agent picks an action y minimizing negative expected utility.

use super::{BilevelProblem, BoxSet};
use crate::error::{Error, Result};
use crate::expr::{EvalPoint, Expr, Node, Var};

#[derive(Clone, Debug)]
pub struct PrincipalAgentSpec {
    /// Output values π_j.
    pub outputs: Vec<f64>,
    /// P(s_j | y), expressions in `y1..ym` (n = 0).
    pub probabilities: Vec<Expr>,
    /// Agent utility of a wage, an expression in `x1` (n = 1, m = 0).
    pub agent_utility: Expr,
    /// Principal utility of retained output, an expression in `x1`.
    pub principal_utility: Expr,
    /// Effort cost, an expression in `y1..ym`.
    pub cost: Expr,
    /// Reservation utility Ū.
    pub reservation: f64,
    pub wage_box: Vec<(f64, f64)>,
    pub action_box: BoxSet,
}

const SIMPLEX_SUM_TOL: f64 = 1e-8;
const SIMPLEX_NEG_TOL: f64 = 1e-10;

fn action_grid(b: &BoxSet) -> Vec<Vec<f64>> {
    let per_axis = match b.dim() {
        1 => 201,
        2 => 41,
        _ => 11,
    };
    let win = b.window(super::DEFAULT_WINDOW);
    let mut pts = vec![Vec::new()];
    for &(lo, hi) in &win {
        let mut next = Vec::with_capacity(pts.len() * per_axis);
        for p in &pts {
            for k in 0..per_axis {
                let mut q = p.clone();
                q.push(lo + (hi - lo) * k as f64 / (per_axis - 1) as f64);
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

fn check_simplex(spec: &PrincipalAgentSpec) -> Result<()> {
    let mut worst: Option<(f64, Vec<f64>, f64, f64)> = None;
    for y in action_grid(&spec.action_box) {
        let probs: Vec<f64> =
            spec.probabilities.iter().map(|p| p.eval_xy(&[], &y)).collect::<Result<_>>()?;
        let sum: f64 = probs.iter().sum();
        let min = probs.iter().cloned().fold(f64::INFINITY, f64::min);
        let badness = ((sum - 1.0).abs() - SIMPLEX_SUM_TOL).max(-min - SIMPLEX_NEG_TOL);
        if badness > 0.0 && worst.as_ref().is_none_or(|w| badness > w.0) {
            worst = Some((badness, y, sum, min));
        }
    }
    match worst {
        Some((_, y, sum, min)) => Err(Error::Simplex { y, sum, min }),
        None => Ok(()),
    }
}

/// Wages are the upper variables x_1..x_{n_s}; the agent's action is y.
/// F = −Σ v(π_j − x_j) P_j(y), f = −Σ u(x_j) P_j(y) + c(y), G = {f + Ū}.
pub fn build_principal_agent(spec: &PrincipalAgentSpec) -> Result<BilevelProblem> {
    let ns = spec.outputs.len();
    let m = spec.action_box.dim();
    if ns == 0 || spec.probabilities.len() != ns || spec.wage_box.len() != ns {
        return Err(Error::Dimension(format!(
            "{ns} outputs, {} probabilities, {} wage bounds",
            spec.probabilities.len(),
            spec.wage_box.len()
        )));
    }
    for (what, e, n_e, m_e) in [
        ("agent utility", &spec.agent_utility, 1, 0),
        ("principal utility", &spec.principal_utility, 1, 0),
        ("cost", &spec.cost, 0, m),
    ] {
        if e.n() != n_e || e.m() != m_e {
            return Err(Error::Dimension(format!("{what} must be an expression over ({n_e}, {m_e}) variables")));
        }
    }
    if spec.probabilities.iter().any(|p| p.n() != 0 || p.m() != m) {
        return Err(Error::Dimension("probabilities must be expressions in y only".into()));
    }
    check_simplex(spec)?;

    let lift_y = |e: &Expr| e.root().substitute(&|v| Node::Var(v));
    let mut upper_sum: Option<Node> = None;
    let mut agent_sum: Option<Node> = None;
    for j in 0..ns {
        let p = lift_y(&spec.probabilities[j]);
        let wage = Node::Var(Var::X(j));
        let retained = Node::minus(Node::num(spec.outputs[j]), wage.clone());
        let v = spec.principal_utility.root().substitute(&|_| retained.clone());
        let u = spec.agent_utility.root().substitute(&|_| wage.clone());
        let tv = Node::times(v, p.clone());
        let tu = Node::times(u, p);
        upper_sum = Some(match upper_sum {
            None => tv,
            Some(s) => Node::plus(s, tv),
        });
        agent_sum = Some(match agent_sum {
            None => tu,
            Some(s) => Node::plus(s, tu),
        });
    }
    let upper = Node::Neg(Box::new(upper_sum.unwrap()));
    let lower = Node::plus(Node::Neg(Box::new(agent_sum.unwrap())), lift_y(&spec.cost));
    let ir = Node::plus(lower.clone(), Node::num(spec.reservation));
    Ok(BilevelProblem {
        name: "principal-agent".into(),
        n: ns,
        m,
        upper: Expr::from_node(upper, ns, m)?,
        lower: Expr::from_node(lower, ns, m)?,
        constraints: vec![Expr::from_node(ir, ns, m)?],
        y_box: spec.action_box.clone(),
        reference: None,
        x_window: Some(spec.wage_box.clone()),
    })
}

/// `f(x, y)` recomputed directly from the contract description (test oracle and diagnostics).
pub fn agent_objective(spec: &PrincipalAgentSpec, p: &EvalPoint) -> Result<f64> {
    let mut s = spec.cost.eval_xy(&[], &p.y)?;
    for (j, prob) in spec.probabilities.iter().enumerate() {
        s -= spec.agent_utility.eval_xy(&[p.x[j]], &[])? * prob.eval_xy(&[], &p.y)?;
    }
    Ok(s)
}
