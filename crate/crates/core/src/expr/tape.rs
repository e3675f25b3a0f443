//! Postfix tape compiled from an AST; every evaluation mode runs through it.

use super::scalar::Scalar;
use super::{BinOp, Func, Node, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Leaf(Var),
    Neg,
    Add,
    Sub,
    Mul,
    Div(u32),
    Powi(i32, u32),
    Powf(f64, u32),
    Exp,
    Log(u32),
    Sqrt(u32),
    Sin,
    Cos,
}

#[derive(Clone, Debug)]
pub(super) struct Tape {
    ops: Vec<Op>,
    /// Printed subexpressions for ops that can leave their domain.
    sites: Vec<String>,
    depth: usize,
    text: String,
}

impl Tape {
    pub(super) fn compile(root: &Node) -> Tape {
        let mut t = Tape { ops: Vec::new(), sites: Vec::new(), depth: 0, text: root.to_string() };
        let mut cur = 0;
        t.emit(root, &mut cur);
        t
    }

    fn site(&mut self, node: &Node) -> u32 {
        self.sites.push(node.to_string());
        (self.sites.len() - 1) as u32
    }

    fn emit(&mut self, node: &Node, cur: &mut usize) {
        let push = |t: &mut Tape, cur: &mut usize| {
            *cur += 1;
            t.depth = t.depth.max(*cur);
        };
        match node {
            Node::Num(v) => {
                self.ops.push(Op::Const(*v));
                push(self, cur);
            }
            Node::Var(v) => {
                self.ops.push(Op::Leaf(*v));
                push(self, cur);
            }
            Node::Neg(a) => {
                self.emit(a, cur);
                self.ops.push(Op::Neg);
            }
            Node::Binary(op, a, b) => {
                self.emit(a, cur);
                self.emit(b, cur);
                *cur -= 1;
                let o = match op {
                    BinOp::Add => Op::Add,
                    BinOp::Sub => Op::Sub,
                    BinOp::Mul => Op::Mul,
                    BinOp::Div => Op::Div(self.site(node)),
                };
                self.ops.push(o);
            }
            Node::Pow(a, c) => {
                self.emit(a, cur);
                let s = self.site(node);
                if c.fract() == 0.0 && c.abs() <= 64.0 {
                    self.ops.push(Op::Powi(*c as i32, s));
                } else {
                    self.ops.push(Op::Powf(*c, s));
                }
            }
            Node::Call(f, a) => {
                self.emit(a, cur);
                let o = match f {
                    Func::Exp => Op::Exp,
                    Func::Log => Op::Log(self.site(node)),
                    Func::Sqrt => Op::Sqrt(self.site(node)),
                    Func::Sin => Op::Sin,
                    Func::Cos => Op::Cos,
                };
                self.ops.push(o);
            }
        }
    }

    fn domain<T>(&self, site: u32, reason: &str) -> Result<T> {
        Err(Error::Domain { subexpr: self.sites[site as usize].clone(), reason: reason.to_string() })
    }

    pub(super) fn run<T: Scalar>(&self, leaf: &dyn Fn(Var) -> T) -> Result<T> {
        let mut st: Vec<T> = Vec::with_capacity(self.depth);
        for op in &self.ops {
            match op {
                Op::Const(c) => st.push(T::constant(*c)),
                Op::Leaf(v) => st.push(leaf(*v)),
                Op::Neg => {
                    let a = st.pop().unwrap();
                    st.push(a.neg());
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div(_) => {
                    let b = st.pop().unwrap();
                    let a = st.pop().unwrap();
                    let r = match op {
                        Op::Add => a.add(&b),
                        Op::Sub => a.sub(&b),
                        Op::Mul => a.mul(&b),
                        Op::Div(s) => {
                            if b.value() == 0.0 {
                                return self.domain(*s, "division by zero");
                            }
                            a.div(&b)
                        }
                        _ => unreachable!(),
                    };
                    st.push(r);
                }
                _ => {
                    let a = st.pop().unwrap();
                    let v = a.value();
                    let r = match *op {
                        Op::Exp => a.chain(|v, _| {
                            let e = v.exp();
                            [e, e, e]
                        }),
                        Op::Sin => a.chain(|v, _| {
                            let (s, c) = v.sin_cos();
                            [s, c, -s]
                        }),
                        Op::Cos => a.chain(|v, _| {
                            let (s, c) = v.sin_cos();
                            [c, -s, -c]
                        }),
                        Op::Log(s) => {
                            if v <= 0.0 {
                                return self.domain(s, "logarithm of a nonpositive number");
                            }
                            a.chain(|v, _| [v.ln(), 1.0 / v, -1.0 / (v * v)])
                        }
                        Op::Sqrt(s) => {
                            if v < 0.0 {
                                return self.domain(s, "square root of a negative number");
                            }
                            if v == 0.0 && T::ORDER > 0 {
                                return self.domain(s, "square root is not differentiable at 0");
                            }
                            a.chain(|v, o| {
                                let r = v.sqrt();
                                if o == 0 {
                                    [r, 0.0, 0.0]
                                } else {
                                    [r, 0.5 / r, -0.25 / (r * v)]
                                }
                            })
                        }
                        Op::Powi(k, s) => {
                            if k < 0 && v == 0.0 {
                                return self.domain(s, "zero raised to a negative power");
                            }
                            a.chain(|v, o| {
                                if o == 0 {
                                    return [v.powi(k), 0.0, 0.0];
                                }
                                let kf = k as f64;
                                let d1 = if k == 0 { 0.0 } else { kf * v.powi(k - 1) };
                                let d2 = if k == 0 || k == 1 { 0.0 } else { kf * (kf - 1.0) * v.powi(k - 2) };
                                [v.powi(k), d1, d2]
                            })
                        }
                        Op::Powf(c, s) => {
                            if v < 0.0 {
                                return self.domain(s, "negative base with a non-integer exponent");
                            }
                            if v == 0.0 && (c < 0.0 || (T::ORDER >= 1 && c < 2.0)) {
                                return self.domain(s, "power is not differentiable at 0");
                            }
                            a.chain(|v, o| {
                                if o == 0 {
                                    return [v.powf(c), 0.0, 0.0];
                                }
                                [v.powf(c), c * v.powf(c - 1.0), c * (c - 1.0) * v.powf(c - 2.0)]
                            })
                        }
                        _ => unreachable!(),
                    };
                    st.push(r);
                }
            }
        }
        let r = st.pop().unwrap();
        if !r.value().is_finite() {
            return Err(Error::Domain { subexpr: self.text.clone(), reason: "non-finite value".into() });
        }
        Ok(r)
    }
}
