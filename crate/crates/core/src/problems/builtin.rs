use super::{build_principal_agent, BilevelProblem, BoxSet, PrincipalAgentSpec};
use crate::error::{Error, Result};
use crate::expr::Expr;

pub const BUILTIN_NAMES: [&str; 6] =
    ["mirrlees", "modified-mirrlees", "example-xy-1", "example-xy3", "toy-convex", "principal-agent-2"];

const MIRRLEES_F: &str = "-x1*exp(-(y1+1)^2) - exp(-(y1-1)^2)";

/// Root of `(1-y)e^{4y} - (1+y)` in `[0.9, 1]`: the height of the jump in
/// the Mirrlees solution map at x = 1.
pub fn solve_y0() -> f64 {
    let g = |y: f64| (1.0 - y) * (4.0 * y).exp() - (1.0 + y);
    let (mut lo, mut hi) = (0.9, 1.0);
    assert!(g(lo) > 0.0 && g(hi) < 0.0, "bracket must change sign");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

pub fn builtin(name: &str) -> Result<BilevelProblem> {
    let line = BoxSet::unbounded(1);
    let p = match name {
        "mirrlees" => BilevelProblem::new(name, 1, 1, "(x1-2)^2 + (y1-1)^2", MIRRLEES_F, &[], line)?
            .with_reference(vec![1.0], vec![solve_y0()]),
        "modified-mirrlees" => {
            let y0 = solve_y0();
            let upper = format!("(x1-0.5)^2 + (x1+x2)*(1+y1) - (1-y1)*exp(4*y1) + (y1-{y0:?})^3");
            let lower = "-(x1+x2)*exp(-(y1+1)^2) - exp(-(y1-1)^2)";
            BilevelProblem::new(name, 2, 1, &upper, lower, &[], line)?.with_reference(vec![0.5, 0.5], vec![y0])
        }
        "example-xy-1" => BilevelProblem::new(name, 1, 1, "0", "(x1*y1-1)^2*(1+y1^2)", &[], line)?
            .with_reference(vec![0.0], vec![0.0]),
        "example-xy3" => BilevelProblem::new(name, 1, 1, "0", "x1*y1^3 + y1^12", &[], line)?
            .with_reference(vec![4.0], vec![-1.0]),
        "toy-convex" => BilevelProblem::new(name, 1, 1, "(x1-1)^2 + (y1-1)^2", "(y1-x1)^2", &[], line)?
            .with_reference(vec![1.0], vec![1.0]),
        "principal-agent-2" => {
            let mut p = build_principal_agent(&principal_agent_two_outcomes()?)?;
            p.name = name.to_string();
            p.with_reference(vec![1.0, 4.0], vec![0.5])
        }
        _ => return Err(Error::UnknownProblem(name.to_string())),
    };
    Ok(p)
}

/// Two outcomes π = (0, 10), P(s₂|y) = y, sqrt utility, risk-neutral principal,
/// quadratic effort cost.
pub fn principal_agent_two_outcomes() -> Result<PrincipalAgentSpec> {
    Ok(PrincipalAgentSpec {
        outputs: vec![0.0, 10.0],
        probabilities: vec![Expr::parse("1 - y1", 0, 1)?, Expr::parse("y1", 0, 1)?],
        agent_utility: Expr::parse("sqrt(x1)", 1, 0)?,
        principal_utility: Expr::parse("x1", 1, 0)?,
        cost: Expr::parse("y1^2", 0, 1)?,
        reservation: 0.1,
        wage_box: vec![(0.01, 25.0); 2],
        action_box: BoxSet::interval(0.05, 0.95)?,
    })
}
