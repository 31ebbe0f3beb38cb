//! Complex expressions over the coordinates of `C^n` (n = 1 or 2).
//!
//! Variables: `z`, `zbar`, `x`, `y` for n = 1; `z1`, `z2`, `z1bar`,
//! `z2bar`, `x1`, `y1`, `x2`, `y2` for n = 2. Constants `i`, `pi`, `e`.
//! Functions `conj re im abs exp log sqrt sin cos`. Operators `+ - * / ^`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Var {
    Z(usize),
    Zbar(usize),
    X(usize),
    Y(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Conj,
    Re,
    Im,
    Abs,
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(Complex64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression bound to an ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    dim: usize,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("expressions support n = 1 or 2, got {dim}")));
        }
        let tokens = tokenize(source)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            dim,
        };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self {
            source: source.to_string(),
            dim,
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        eval(&self.root, z)
    }
}

fn eval(node: &Node, z: &[Complex64]) -> Complex64 {
    match node {
        Node::Num(c) => *c,
        Node::Var(v) => match *v {
            Var::Z(j) => z[j],
            Var::Zbar(j) => z[j].conj(),
            Var::X(j) => Complex64::new(z[j].re, 0.0),
            Var::Y(j) => Complex64::new(z[j].im, 0.0),
        },
        Node::Neg(a) => -eval(a, z),
        Node::Add(a, b) => eval(a, z) + eval(b, z),
        Node::Sub(a, b) => eval(a, z) - eval(b, z),
        Node::Mul(a, b) => eval(a, z) * eval(b, z),
        Node::Div(a, b) => eval(a, z) / eval(b, z),
        Node::Pow(a, b) => {
            let base = eval(a, z);
            let exp = eval(b, z);
            if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() < 1e6 {
                base.powi(exp.re as i32)
            } else {
                base.powc(exp)
            }
        }
        Node::Call(f, a) => {
            let v = eval(a, z);
            match f {
                Func::Conj => v.conj(),
                Func::Re => Complex64::new(v.re, 0.0),
                Func::Im => Complex64::new(v.im, 0.0),
                Func::Abs => Complex64::new(v.norm(), 0.0),
                Func::Exp => v.exp(),
                Func::Log => v.ln(),
                Func::Sqrt => v.sqrt(),
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
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
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| Error::Expression {
                column: start + 1,
                message: format!("bad number '{text}'"),
            })?;
            out.push((Tok::Num(value), start + 1));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start + 1));
        } else if "+-*/^()".contains(ch) {
            out.push((Tok::Op(ch), i + 1));
            i += 1;
        } else {
            return Err(Error::Expression {
                column: i + 1,
                message: format!("unexpected character '{ch}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn error(&self, message: &str) -> Error {
        let column = self
            .tokens
            .get(self.pos)
            .map(|t| t.1)
            .unwrap_or_else(|| self.tokens.last().map(|t| t.1 + 1).unwrap_or(1));
        Error::Expression {
            column,
            message: message.to_string(),
        }
    }

    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some((Tok::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let Some((tok, _)) = self.tokens.get(self.pos).cloned() else {
            return Err(self.error("unexpected end of expression"));
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Node::Num(Complex64::new(v, 0.0)))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(f) = func(&name) {
                    self.pos += 1;
                    if self.peek_op() != Some('(') {
                        return Err(self.error("expected '(' after function name"));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    if self.peek_op() != Some(')') {
                        return Err(self.error("expected ')'"));
                    }
                    self.pos += 1;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                let node = match name.as_str() {
                    "i" => Node::Num(Complex64::i()),
                    "pi" => Node::Num(Complex64::new(std::f64::consts::PI, 0.0)),
                    "e" => Node::Num(Complex64::new(std::f64::consts::E, 0.0)),
                    other => Node::Var(
                        variable(other, self.dim).ok_or_else(|| self.error(&format!("unknown identifier '{other}'")))?,
                    ),
                };
                self.pos += 1;
                Ok(node)
            }
            Tok::Op(c) => Err(self.error(&format!("unexpected '{c}'"))),
        }
    }
}

fn func(name: &str) -> Option<Func> {
    Some(match name {
        "conj" => Func::Conj,
        "re" => Func::Re,
        "im" => Func::Im,
        "abs" => Func::Abs,
        "exp" => Func::Exp,
        "log" => Func::Log,
        "sqrt" => Func::Sqrt,
        "sin" => Func::Sin,
        "cos" => Func::Cos,
        _ => return None,
    })
}

fn variable(name: &str, dim: usize) -> Option<Var> {
    if dim == 1 {
        return match name {
            "z" => Some(Var::Z(0)),
            "zbar" => Some(Var::Zbar(0)),
            "x" => Some(Var::X(0)),
            "y" => Some(Var::Y(0)),
            _ => None,
        };
    }
    let (stem, idx) = match name {
        "z1" | "z1bar" | "x1" | "y1" => (name, 0),
        "z2" | "z2bar" | "x2" | "y2" => (name, 1),
        _ => return None,
    };
    Some(match &stem[..1] {
        "x" => Var::X(idx),
        "y" => Var::Y(idx),
        _ if stem.ends_with("bar") => Var::Zbar(idx),
        _ => Var::Z(idx),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluates_polynomials_and_conjugates() {
        let e = Expr::parse("z^3 + 2*z", 1).unwrap();
        let z = c(0.3, -0.4);
        assert!((e.eval(&[z]) - (z * z * z + 2.0 * z)).norm() < 1e-15);

        let e = Expr::parse("z^2/zbar", 1).unwrap();
        assert!((e.eval(&[z]) - z * z / z.conj()).norm() < 1e-15);

        let e = Expr::parse("x^2 + y^2", 1).unwrap();
        assert!((e.eval(&[z]) - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_variable_names() {
        let e = Expr::parse("z1*z1bar - 2*i*z2 + re(z2bar)", 2).unwrap();
        let (a, b) = (c(0.5, 0.1), c(-0.2, 0.7));
        let expect = a * a.conj() - 2.0 * Complex64::i() * b + c(b.re, 0.0);
        assert!((e.eval(&[a, b]) - expect).norm() < 1e-15);
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = Expr::parse("-2^2 + 3*4 - 1/2", 1).unwrap();
        assert!((e.eval(&[c(0.0, 0.0)]) - c(-4.0 + 12.0 - 0.5, 0.0)).norm() < 1e-15);
        let e = Expr::parse("1e-3*exp(i*pi)", 1).unwrap();
        assert!((e.eval(&[c(0.0, 0.0)]) - c(-1e-3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn errors_carry_columns() {
        let err = Expr::parse("z + w", 1).unwrap_err();
        assert_eq!(
            err,
            Error::Expression {
                column: 5,
                message: "unknown identifier 'w'".into()
            }
        );
        assert!(Expr::parse("(z + 1", 1).is_err());
        assert!(Expr::parse("z1", 1).is_err());
        assert!(Expr::parse("z $ 2", 1).is_err());
    }
}
