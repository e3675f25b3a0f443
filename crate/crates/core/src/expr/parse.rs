//! Recursive-descent parser.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^`. Unary minus binds
//! looser than `^`, so `-(y1+1)^2` is `-((y1+1)^2)`.

use super::{BinOp, Func, Node, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
}

fn lex(text: &str) -> Result<Lexed> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s.parse().map_err(|_| Error::Syntax {
                column: col,
                message: format!("malformed number `{s}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Syntax { column: col, message: format!("number `{s}` overflows") });
            }
            toks.push((Tok::Num(v), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^()".contains(c) {
            toks.push((Tok::Sym(c), col));
            i += 1;
        } else {
            return Err(Error::Syntax { column: col, message: format!("unexpected character `{c}`") });
        }
    }
    // End-of-input errors point at the last token.
    let end_col = toks.last().map(|t| t.1).unwrap_or(1);
    toks.push((Tok::End, end_col));
    Ok(Lexed { toks })
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: usize,
    m: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }
    fn col(&self) -> usize {
        self.toks[self.pos].1
    }
    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn fail<T>(&self, message: &str) -> Result<T> {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
        };
        Err(Error::Syntax { column: self.col(), message: format!("{message}, found {found}") })
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Tok::Sym(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Tok::Sym(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let exponent = self.exponent()?;
        if exponent.has_vars() {
            // a^b with variable b: exp(b*log(a)); log enforces a > 0.
            let log = Node::Call(Func::Log, Box::new(base));
            return Ok(Node::Call(
                Func::Exp,
                Box::new(Node::Binary(BinOp::Mul, Box::new(exponent), Box::new(log))),
            ));
        }
        let c = exponent.constant_value().ok_or_else(|| Error::Syntax {
            column: self.col(),
            message: "exponent does not evaluate to a finite constant".into(),
        })?;
        Ok(Node::Pow(Box::new(base), c))
    }

    fn exponent(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.exponent()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::Num(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                if *self.peek() != Tok::Sym(')') {
                    return self.fail("expected `)`");
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => {
                let col = self.col();
                self.bump();
                if let Some(f) = Func::from_name(&name) {
                    if *self.peek() != Tok::Sym('(') {
                        return self.fail(&format!("expected `(` after `{name}`"));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() != Tok::Sym(')') {
                        return self.fail("expected `)`");
                    }
                    self.bump();
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                self.variable(&name, col).map(Node::Var)
            }
            _ => self.fail("expected a number, variable, function or `(`"),
        }
    }

    fn variable(&self, name: &str, column: usize) -> Result<Var> {
        let (head, digits) = name.split_at(1);
        let unknown = || Error::UnknownIdentifier { name: name.to_string(), column };
        let idx = if digits.is_empty() {
            1
        } else if digits.bytes().all(|b| b.is_ascii_digit()) {
            digits.parse::<usize>().map_err(|_| unknown())?
        } else {
            return Err(unknown());
        };
        let out_of_range =
            || Error::VariableOutOfRange { name: name.to_string(), column, n: self.n, m: self.m };
        match head {
            "x" if idx >= 1 && idx <= self.n => Ok(Var::X(idx - 1)),
            "y" if idx >= 1 && idx <= self.m => Ok(Var::Y(idx - 1)),
            "x" | "y" => Err(out_of_range()),
            _ => Err(unknown()),
        }
    }
}

pub(super) fn parse_node(text: &str, n: usize, m: usize) -> Result<Node> {
    let Lexed { toks } = lex(text)?;
    let mut p = Parser { toks, pos: 0, n, m };
    let node = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("unexpected trailing input");
    }
    Ok(node)
}
