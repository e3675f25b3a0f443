//! Bilevel problem model, configuration loading and built-in instances.

mod builtin;
mod principal_agent;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::expr::{Derivatives, EvalPoint, Expr};

pub use builtin::{builtin, principal_agent_two_outcomes, solve_y0, BUILTIN_NAMES};
pub use principal_agent::{agent_objective, build_principal_agent, PrincipalAgentSpec};

/// Default sampling half-width for unbounded coordinates.
pub const DEFAULT_WINDOW: f64 = 10.0;

/// `Π [lower_i, upper_i]`, infinite endpoints allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSet {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<BoxSet> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension(format!("box bounds of length {} and {}", lower.len(), upper.len())));
        }
        for (i, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if a.is_nan() || b.is_nan() || *a == f64::INFINITY || *b == f64::NEG_INFINITY || a > b {
                return Err(Error::Schema(format!("invalid bounds [{a}, {b}] for coordinate {}", i + 1)));
            }
        }
        Ok(BoxSet { lower, upper })
    }

    pub fn unbounded(m: usize) -> BoxSet {
        BoxSet { lower: vec![f64::NEG_INFINITY; m], upper: vec![f64::INFINITY; m] }
    }

    pub fn interval(a: f64, b: f64) -> Result<BoxSet> {
        BoxSet::new(vec![a], vec![b])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        y.len() == self.dim() && y.iter().enumerate().all(|(i, v)| *v >= self.lower[i] - tol && *v <= self.upper[i] + tol)
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    pub fn project(&self, y: &mut [f64]) {
        for (i, v) in y.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    /// Finite sampling window: the box intersected with `[-half, half]` per axis.
    /// Degenerate intersections fall back to a unit window at the finite bound.
    pub fn window(&self, half: f64) -> Vec<(f64, f64)> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&a, &b)| {
                let lo = a.max(-half);
                let hi = b.min(half);
                if lo <= hi {
                    (lo, hi)
                } else if a.is_finite() && a > half {
                    (a, b.min(a + 2.0 * half))
                } else {
                    (a.max(b - 2.0 * half), b)
                }
            })
            .collect()
    }

    /// Distance of `y_i` to `[a_i, b_i]` boundary classification.
    pub fn at_lower(&self, i: usize, v: f64, tol: f64) -> bool {
        self.lower[i].is_finite() && (v - self.lower[i]).abs() <= tol
    }

    pub fn at_upper(&self, i: usize, v: f64, tol: f64) -> bool {
        self.upper[i].is_finite() && (v - self.upper[i]).abs() <= tol
    }

    /// Strictly interior with the given margin in every coordinate.
    pub fn interior(&self, y: &[f64], margin: f64) -> bool {
        y.iter().enumerate().all(|(i, v)| *v > self.lower[i] + margin && *v < self.upper[i] - margin)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "Y_lower": self.lower.iter().map(|v| bound_to_json(*v)).collect::<Vec<_>>(),
            "Y_upper": self.upper.iter().map(|v| bound_to_json(*v)).collect::<Vec<_>>(),
        })
    }
}

pub fn bound_to_json(v: f64) -> Value {
    if v == f64::INFINITY {
        json!("inf")
    } else if v == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(v)
    }
}

fn bound_from_json(v: &Value, field: &str) -> Result<f64> {
    match v {
        Value::Number(x) => x.as_f64().ok_or_else(|| Error::Schema(format!("{field}: bad number"))),
        Value::String(s) => match s.as_str() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => Err(Error::Schema(format!("{field}: expected a number, \"inf\" or \"-inf\", got \"{s}\""))),
        },
        _ => Err(Error::Schema(format!("{field}: expected a number or an infinity sentinel"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointRole {
    Candidate,
    FeasibleSample,
    Reference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemPoint {
    pub point: EvalPoint,
    pub role: PointRole,
}

impl ProblemPoint {
    pub fn new(point: EvalPoint, role: PointRole, y_box: &BoxSet) -> Result<ProblemPoint> {
        if !point.is_finite() {
            return Err(Error::Schema("point has non-finite entries".into()));
        }
        if !y_box.contains(&point.y, 1e-12) {
            return Err(Error::NotInBox(format!("{:?}", point.y)));
        }
        Ok(ProblemPoint { point, role })
    }
}

/// `min F(x,y)  s.t.  y ∈ argmin_{y'∈Y} f(x,y'),  G(x,y) ≤ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BilevelProblem {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub upper: Expr,
    pub lower: Expr,
    pub constraints: Vec<Expr>,
    pub y_box: BoxSet,
    /// Candidate point shipped with the instance, if any.
    pub reference: Option<EvalPoint>,
    /// Sampling window for x when the instance has natural bounds (wage boxes).
    pub x_window: Option<Vec<(f64, f64)>>,
}

impl BilevelProblem {
    pub fn new(
        name: &str,
        n: usize,
        m: usize,
        upper: &str,
        lower: &str,
        constraints: &[&str],
        y_box: BoxSet,
    ) -> Result<BilevelProblem> {
        if y_box.dim() != m {
            return Err(Error::Dimension(format!("Y has dimension {} but m = {m}", y_box.dim())));
        }
        Ok(BilevelProblem {
            name: name.to_string(),
            n,
            m,
            upper: Expr::parse(upper, n, m)?,
            lower: Expr::parse(lower, n, m)?,
            constraints: constraints.iter().map(|g| Expr::parse(g, n, m)).collect::<Result<_>>()?,
            y_box,
            reference: None,
            x_window: None,
        })
    }

    pub fn with_reference(mut self, x: Vec<f64>, y: Vec<f64>) -> Self {
        self.reference = Some(EvalPoint::new(x, y));
        self
    }

    pub fn q(&self) -> usize {
        self.constraints.len()
    }

    pub fn check_point(&self, p: &EvalPoint) -> Result<()> {
        if p.x.len() != self.n || p.y.len() != self.m {
            return Err(Error::Dimension(format!(
                "point has dimensions ({}, {}), problem expects ({}, {})",
                p.x.len(),
                p.y.len(),
                self.n,
                self.m
            )));
        }
        if !p.is_finite() {
            return Err(Error::Schema("point has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn y_window(&self) -> Vec<(f64, f64)> {
        self.y_box.window(DEFAULT_WINDOW)
    }

    /// Serializable config document (inverse of `load_problem`).
    pub fn to_config(&self) -> Value {
        let mut doc = Map::new();
        doc.insert("name".into(), json!(self.name));
        doc.insert("n".into(), json!(self.n));
        doc.insert("m".into(), json!(self.m));
        doc.insert("F".into(), json!(self.upper.to_string()));
        doc.insert("f".into(), json!(self.lower.to_string()));
        doc.insert("G".into(), json!(self.constraints.iter().map(|g| g.to_string()).collect::<Vec<_>>()));
        if let Value::Object(b) = self.y_box.to_json() {
            doc.extend(b);
        }
        if let Some(p) = &self.reference {
            doc.insert("point".into(), json!({"x": p.x, "y": p.y}));
        }
        if let Some(w) = &self.x_window {
            doc.insert("x_window".into(), json!(w.iter().map(|(a, b)| vec![*a, *b]).collect::<Vec<_>>()));
        }
        Value::Object(doc)
    }
}

fn bounds_field(doc: &Map<String, Value>, key: &str, m: usize, default: f64) -> Result<Vec<f64>> {
    match doc.get(key) {
        None => Ok(vec![default; m]),
        Some(v @ Value::String(_)) => Ok(vec![bound_from_json(v, key)?; m]),
        Some(Value::Array(items)) => {
            if items.len() != m {
                return Err(Error::Dimension(format!("{key} has {} entries, m = {m}", items.len())));
            }
            items.iter().map(|v| bound_from_json(v, key)).collect()
        }
        Some(_) => Err(Error::Schema(format!("{key}: expected an array or an infinity sentinel"))),
    }
}

fn float_array(v: &Value, field: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::Schema(format!("{field}: expected an array")))?
        .iter()
        .map(|e| e.as_f64().ok_or_else(|| Error::Schema(format!("{field}: expected numbers"))))
        .collect()
}

/// Load a problem from a JSON document.
pub fn load_problem(text: &str) -> Result<BilevelProblem> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    load_problem_value(&v)
}

pub fn load_problem_value(v: &Value) -> Result<BilevelProblem> {
    const KNOWN: [&str; 10] = ["name", "n", "m", "F", "f", "G", "Y_lower", "Y_upper", "point", "x_window"];
    let doc = v.as_object().ok_or_else(|| Error::Schema("problem config must be an object".into()))?;
    if let Some(k) = doc.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(Error::Schema(format!("unknown field `{k}`")));
    }
    let string = |k: &str| -> Result<&str> {
        doc.get(k).and_then(Value::as_str).ok_or_else(|| Error::Schema(format!("missing string field `{k}`")))
    };
    let dim = |k: &str| -> Result<usize> {
        doc.get(k)
            .and_then(Value::as_u64)
            .map(|d| d as usize)
            .ok_or_else(|| Error::Schema(format!("missing non-negative integer field `{k}`")))
    };
    let name = string("name")?;
    let (n, m) = (dim("n")?, dim("m")?);
    if m == 0 {
        return Err(Error::Dimension("the lower level needs m ≥ 1".into()));
    }
    let constraints: Vec<String> = match doc.get("G") {
        None => Vec::new(),
        Some(Value::Array(gs)) => gs
            .iter()
            .map(|g| g.as_str().map(str::to_string).ok_or_else(|| Error::Schema("G entries must be strings".into())))
            .collect::<Result<_>>()?,
        Some(_) => return Err(Error::Schema("G must be an array of strings".into())),
    };
    let y_box = BoxSet::new(
        bounds_field(doc, "Y_lower", m, f64::NEG_INFINITY)?,
        bounds_field(doc, "Y_upper", m, f64::INFINITY)?,
    )?;
    let gs: Vec<&str> = constraints.iter().map(String::as_str).collect();
    let mut prob = BilevelProblem::new(name, n, m, string("F")?, string("f")?, &gs, y_box)?;
    if let Some(p) = doc.get("point") {
        let x = float_array(p.get("x").ok_or_else(|| Error::Schema("point.x missing".into()))?, "point.x")?;
        let y = float_array(p.get("y").ok_or_else(|| Error::Schema("point.y missing".into()))?, "point.y")?;
        let pt = EvalPoint::new(x, y);
        prob.check_point(&pt)?;
        prob.reference = Some(pt);
    }
    if let Some(w) = doc.get("x_window") {
        let rows = w.as_array().ok_or_else(|| Error::Schema("x_window must be an array".into()))?;
        if rows.len() != n {
            return Err(Error::Dimension(format!("x_window has {} rows, n = {n}", rows.len())));
        }
        let win = rows
            .iter()
            .map(|r| match float_array(r, "x_window")?.as_slice() {
                [a, b] if a <= b => Ok((*a, *b)),
                _ => Err(Error::Schema("x_window rows must be [lo, hi]".into())),
            })
            .collect::<Result<_>>()?;
        prob.x_window = Some(win);
    }
    Ok(prob)
}

/// Derivatives of F, f and every G_i at one point.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub upper: Derivatives,
    pub lower: Derivatives,
    pub constraints: Vec<Derivatives>,
}

pub fn eval_bundle(prob: &BilevelProblem, p: &EvalPoint) -> Result<Bundle> {
    prob.check_point(p)?;
    Ok(Bundle {
        upper: prob.upper.differentiate(p)?,
        lower: prob.lower.differentiate(p)?,
        constraints: prob.constraints.iter().map(|g| g.differentiate(p)).collect::<Result<_>>()?,
    })
}
