//! Smooth scalar expressions in `x1..xn, y1..ym` with exact forward-mode
//! first and second derivatives.

mod parse;
pub mod scalar;
mod tape;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use scalar::{Dual2, Jet, Scalar};
use tape::Tape;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(usize),
    Y(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Exp, Func::Log, Func::Sqrt, Func::Sin, Func::Cos];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Literals are finite and non-negative; negation is always an explicit node.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    /// Constant exponent.
    Pow(Box<Node>, f64),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn num(v: f64) -> Node {
        if v < 0.0 {
            Node::Neg(Box::new(Node::Num(-v)))
        } else {
            Node::Num(v)
        }
    }

    pub fn has_vars(&self) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(_) => true,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.has_vars(),
            Node::Binary(_, a, b) => a.has_vars() || b.has_vars(),
        }
    }

    /// Value of a variable-free node.
    pub fn constant_value(&self) -> Option<f64> {
        if self.has_vars() {
            return None;
        }
        Tape::compile(self).run::<f64>(&|_| 0.0).ok()
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Node::Num(_) => {}
            Node::Var(v) => f(*v),
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.visit_vars(f),
            Node::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    /// Replace every variable by a node.
    pub fn substitute(&self, f: &impl Fn(Var) -> Node) -> Node {
        match self {
            Node::Num(v) => Node::Num(*v),
            Node::Var(v) => f(*v),
            Node::Neg(a) => Node::Neg(Box::new(a.substitute(f))),
            Node::Pow(a, c) => Node::Pow(Box::new(a.substitute(f)), *c),
            Node::Call(g, a) => Node::Call(*g, Box::new(a.substitute(f))),
            Node::Binary(op, a, b) => Node::Binary(*op, Box::new(a.substitute(f)), Box::new(b.substitute(f))),
        }
    }

    /// Total polynomial degree, or `None` if the node is not a polynomial.
    pub fn degree(&self) -> Option<u32> {
        match self {
            Node::Num(_) => Some(0),
            Node::Var(_) => Some(1),
            Node::Neg(a) => a.degree(),
            Node::Binary(BinOp::Add | BinOp::Sub, a, b) => Some(a.degree()?.max(b.degree()?)),
            Node::Binary(BinOp::Mul, a, b) => Some(a.degree()? + b.degree()?),
            Node::Binary(BinOp::Div, a, b) => {
                if b.has_vars() {
                    None
                } else {
                    a.degree()
                }
            }
            Node::Pow(a, c) => {
                if !a.has_vars() {
                    Some(0)
                } else if c.fract() == 0.0 && *c >= 0.0 && *c <= 64.0 {
                    Some(a.degree()? * (*c as u32))
                } else {
                    None
                }
            }
            Node::Call(_, a) => {
                if a.has_vars() {
                    None
                } else {
                    Some(0)
                }
            }
        }
    }

    pub fn plus(a: Node, b: Node) -> Node {
        Node::Binary(BinOp::Add, Box::new(a), Box::new(b))
    }
    pub fn minus(a: Node, b: Node) -> Node {
        Node::Binary(BinOp::Sub, Box::new(a), Box::new(b))
    }
    pub fn times(a: Node, b: Node) -> Node {
        Node::Binary(BinOp::Mul, Box::new(a), Box::new(b))
    }
}

/// Fully parenthesized; numbers use the shortest round-tripping form.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var(Var::X(i)) => write!(f, "x{}", i + 1),
            Node::Var(Var::Y(i)) => write!(f, "y{}", i + 1),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Binary(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({a} {s} {b})")
            }
            Node::Pow(a, c) => write!(f, "({a}^{c:?})"),
            Node::Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

/// A validated expression with its compiled tape.
#[derive(Clone, Debug)]
pub struct Expr {
    root: Node,
    n: usize,
    m: usize,
    tape: Tape,
}

impl PartialEq for Expr {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n && self.m == o.m && self.root == o.root
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

pub fn parse(text: &str, n: usize, m: usize) -> Result<Expr> {
    Expr::parse(text, n, m)
}

impl Expr {
    pub fn parse(text: &str, n: usize, m: usize) -> Result<Expr> {
        let root = parse::parse_node(text, n, m)?;
        Expr::from_node(root, n, m)
    }

    /// Validate a programmatically built tree.
    pub fn from_node(root: Node, n: usize, m: usize) -> Result<Expr> {
        fn check(node: &Node, n: usize, m: usize) -> Result<()> {
            match node {
                Node::Num(v) if !v.is_finite() || *v < 0.0 => {
                    Err(Error::Schema(format!("literal {v} must be finite and non-negative")))
                }
                Node::Pow(_, c) if !c.is_finite() => Err(Error::Schema("non-finite exponent".into())),
                Node::Var(Var::X(i)) if *i >= n => Err(Error::VariableOutOfRange {
                    name: format!("x{}", i + 1),
                    column: 0,
                    n,
                    m,
                }),
                Node::Var(Var::Y(i)) if *i >= m => Err(Error::VariableOutOfRange {
                    name: format!("y{}", i + 1),
                    column: 0,
                    n,
                    m,
                }),
                Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => check(a, n, m),
                Node::Binary(_, a, b) => {
                    check(a, n, m)?;
                    check(b, n, m)
                }
                _ => Ok(()),
            }
        }
        check(&root, n, m)?;
        let tape = Tape::compile(&root);
        Ok(Expr { root, n, m, tape })
    }

    pub fn constant(c: f64, n: usize, m: usize) -> Expr {
        Expr::from_node(Node::num(c), n, m).expect("finite constant")
    }

    pub fn root(&self) -> &Node {
        &self.root
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_constant(&self) -> bool {
        !self.root.has_vars()
    }

    pub fn degree(&self) -> Option<u32> {
        self.root.degree()
    }

    pub fn depends_on(&self, var: Var) -> bool {
        let mut hit = false;
        self.root.visit_vars(&mut |v| hit |= v == var);
        hit
    }

    fn check_dims(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.n || y.len() != self.m {
            return Err(Error::Dimension(format!(
                "expected point in R^{} x R^{}, got R^{} x R^{}",
                self.n,
                self.m,
                x.len(),
                y.len()
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, p: &EvalPoint) -> Result<f64> {
        self.eval_xy(&p.x, &p.y)
    }

    pub fn eval_xy(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dims(x, y)?;
        self.tape.run::<f64>(&|v| match v {
            Var::X(i) => x[i],
            Var::Y(i) => y[i],
        })
    }

    /// Run the tape over any scalar type with caller-chosen seeding.
    pub fn eval_generic<T: Scalar>(&self, leaf: &dyn Fn(Var) -> T) -> Result<T> {
        self.tape.run(leaf)
    }

    pub fn differentiate(&self, p: &EvalPoint) -> Result<Derivatives> {
        self.diff_xy(&p.x, &p.y)
    }

    /// Derivatives over the stacked variable (x, y).
    pub fn diff_xy(&self, x: &[f64], y: &[f64]) -> Result<Derivatives> {
        self.check_dims(x, y)?;
        let (n, k) = (self.n, self.n + self.m);
        let d = self.tape.run::<Dual2>(&|v| match v {
            Var::X(i) => Dual2::var(x[i], i, k),
            Var::Y(i) => Dual2::var(y[i], n + i, k),
        })?;
        Ok(Derivatives::from_dual(d, k))
    }

    /// Derivatives in y only, x held fixed.
    pub fn diff_y(&self, x: &[f64], y: &[f64]) -> Result<Derivatives> {
        self.check_dims(x, y)?;
        let m = self.m;
        let d = self.tape.run::<Dual2>(&|v| match v {
            Var::X(i) => Dual2::constant(x[i]),
            Var::Y(i) => Dual2::var(y[i], i, m),
        })?;
        Ok(Derivatives::from_dual(d, m))
    }

    /// Value and first two derivatives along `y1` (m = 1 fast path).
    pub fn jet_y(&self, x: &[f64], y: f64) -> Result<Jet> {
        self.check_dims(x, &[y])?;
        self.tape.run::<Jet>(&|v| match v {
            Var::X(i) => Jet::constant(x[i]),
            Var::Y(_) => Jet::var(y),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl EvalPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        EvalPoint { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }

    pub fn stacked(&self) -> DVector<f64> {
        DVector::from_iterator(self.x.len() + self.y.len(), self.x.iter().chain(&self.y).copied())
    }

    pub fn from_stacked(z: &DVector<f64>, n: usize) -> Self {
        EvalPoint { x: z.rows(0, n).iter().copied().collect(), y: z.rows(n, z.len() - n).iter().copied().collect() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Derivatives {
    pub value: f64,
    pub gradient: DVector<f64>,
    /// Symmetric.
    pub hessian: DMatrix<f64>,
    /// Largest |H - Hᵀ| entry before symmetrization.
    pub asymmetry: f64,
}

impl Derivatives {
    fn from_dual(d: Dual2, k: usize) -> Derivatives {
        let gradient = if d.g.is_empty() { DVector::zeros(k) } else { DVector::from_vec(d.g) };
        let raw = if d.h.is_empty() { DMatrix::zeros(k, k) } else { DMatrix::from_row_slice(k, k, &d.h) };
        let asymmetry = (&raw - raw.transpose()).amax();
        let hessian = (&raw + raw.transpose()) * 0.5;
        Derivatives { value: d.v, gradient, hessian, asymmetry }
    }

    /// Gradient block for variables `[start, start+len)`.
    pub fn grad_block(&self, start: usize, len: usize) -> DVector<f64> {
        self.gradient.rows(start, len).into_owned()
    }

    pub fn hess_block(&self, r: usize, c: usize, nr: usize, nc: usize) -> DMatrix<f64> {
        self.hessian.view((r, c), (nr, nc)).into_owned()
    }
}

/// Largest `|AD − FD| / max(1, |AD|)` over gradient (central differences of
/// values) and Hessian (central differences of the exact gradient) entries.
pub fn fd_check(e: &Expr, p: &EvalPoint, h: f64) -> Result<f64> {
    let n = e.n();
    let z0 = p.stacked();
    let k = z0.len();
    let ad = e.differentiate(p)?;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
    let mut worst: f64 = 0.0;
    for j in 0..k {
        let mut zp = z0.clone();
        let mut zm = z0.clone();
        zp[j] += h;
        zm[j] -= h;
        let (pp, pm) = (EvalPoint::from_stacked(&zp, n), EvalPoint::from_stacked(&zm, n));
        let g = (e.evaluate(&pp)? - e.evaluate(&pm)?) / (2.0 * h);
        worst = worst.max(rel(ad.gradient[j], g));
        let col = (e.differentiate(&pp)?.gradient - e.differentiate(&pm)?.gradient) / (2.0 * h);
        for i in 0..k {
            worst = worst.max(rel(ad.hessian[(i, j)], col[i]));
        }
    }
    Ok(worst)
}
