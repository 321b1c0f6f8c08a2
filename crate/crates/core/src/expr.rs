//! The closed expression language used for metric components, deformation
//! families and conformal factors.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' ['-'] integer)?
//! base   := number | ident | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | tan | exp | log | sqrt | atan
//! ```
//!
//! Unary minus binds looser than `^`, so `-x^2` is `-(x^2)`. Identifiers
//! resolve against a [`Scope`] of variables and named constants at parse time.

use std::collections::BTreeMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }
}

#[derive(Debug, PartialEq)]
enum Node {
    Const(f64),
    Named(String, f64),
    Var(usize, String),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Call(Func, Expr),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

/// Identifiers visible to the parser: ordered variables plus named constants.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    variables: Vec<String>,
    constants: BTreeMap<String, f64>,
}

impl Scope {
    pub fn new<S: AsRef<str>>(variables: &[S]) -> Self {
        let mut constants = BTreeMap::new();
        constants.insert("pi".to_string(), std::f64::consts::PI);
        Scope {
            variables: variables.iter().map(|s| s.as_ref().to_string()).collect(),
            constants,
        }
    }

    pub fn with_constant(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn with_constants(mut self, constants: &BTreeMap<String, f64>) -> Self {
        for (k, v) in constants {
            self.constants.insert(k.clone(), *v);
        }
        self
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    fn resolve(&self, name: &str) -> Option<Node> {
        if let Some(i) = self.variables.iter().position(|v| v == name) {
            return Some(Node::Var(i, name.to_string()));
        }
        self.constants
            .get(name)
            .map(|&v| Node::Named(name.to_string(), v))
    }
}

impl Expr {
    fn node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn constant(v: f64) -> Expr {
        Expr::node(Node::Const(v))
    }

    pub fn var(index: usize, name: &str) -> Expr {
        Expr::node(Node::Var(index, name.to_string()))
    }

    pub fn call(f: Func, arg: &Expr) -> Expr {
        Expr::node(Node::Call(f, arg.clone()))
    }

    pub fn exp(&self) -> Expr {
        Expr::call(Func::Exp, self)
    }

    pub fn powi(&self, e: i32) -> Expr {
        Expr::node(Node::Pow(self.clone(), e))
    }

    pub fn parse(src: &str, scope: &Scope) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            scope,
        };
        let e = p.expr()?;
        match p.peek() {
            Tok {
                kind: Kind::End, ..
            } => Ok(e),
            t => Err(GeomError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("unexpected {}", t.kind),
            }),
        }
    }

    /// True when the tree is the literal constant zero.
    pub fn is_zero(&self) -> bool {
        matches!(*self.0, Node::Const(v) if v == 0.0)
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match &*self.0 {
            Node::Const(_) | Node::Named(..) => None,
            Node::Var(i, _) => Some(*i),
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    /// Re-indexes variables through `map`, which returns the new index and
    /// name for an old index.
    pub fn remap(&self, map: &dyn Fn(usize) -> (usize, String)) -> Expr {
        let n = match &*self.0 {
            Node::Const(_) | Node::Named(..) => return self.clone(),
            Node::Var(i, _) => {
                let (j, name) = map(*i);
                Node::Var(j, name)
            }
            Node::Neg(a) => Node::Neg(a.remap(map)),
            Node::Add(a, b) => Node::Add(a.remap(map), b.remap(map)),
            Node::Sub(a, b) => Node::Sub(a.remap(map), b.remap(map)),
            Node::Mul(a, b) => Node::Mul(a.remap(map), b.remap(map)),
            Node::Div(a, b) => Node::Div(a.remap(map), b.remap(map)),
            Node::Pow(a, e) => Node::Pow(a.remap(map), *e),
            Node::Call(f, a) => Node::Call(*f, a.remap(map)),
        };
        Expr::node(n)
    }

    /// Replaces every variable by the corresponding expression.
    pub fn substitute(&self, with: &[Expr]) -> Expr {
        let n = match &*self.0 {
            Node::Const(_) | Node::Named(..) => return self.clone(),
            Node::Var(i, _) => return with[*i].clone(),
            Node::Neg(a) => Node::Neg(a.substitute(with)),
            Node::Add(a, b) => Node::Add(a.substitute(with), b.substitute(with)),
            Node::Sub(a, b) => Node::Sub(a.substitute(with), b.substitute(with)),
            Node::Mul(a, b) => Node::Mul(a.substitute(with), b.substitute(with)),
            Node::Div(a, b) => Node::Div(a.substitute(with), b.substitute(with)),
            Node::Pow(a, e) => Node::Pow(a.substitute(with), *e),
            Node::Call(f, a) => Node::Call(*f, a.substitute(with)),
        };
        Expr::node(n)
    }

    pub fn eval(&self, vars: &[f64]) -> Result<f64> {
        let v = match &*self.0 {
            Node::Const(v) | Node::Named(_, v) => *v,
            Node::Var(i, _) => vars[*i],
            Node::Neg(a) => -a.eval(vars)?,
            Node::Add(a, b) => a.eval(vars)? + b.eval(vars)?,
            Node::Sub(a, b) => a.eval(vars)? - b.eval(vars)?,
            Node::Mul(a, b) => a.eval(vars)? * b.eval(vars)?,
            Node::Div(a, b) => {
                let d = b.eval(vars)?;
                if d == 0.0 {
                    return Err(self.domain("division by zero"));
                }
                a.eval(vars)? / d
            }
            Node::Pow(a, e) => {
                let x = a.eval(vars)?;
                if x == 0.0 && *e < 0 {
                    return Err(self.domain("negative power of zero"));
                }
                x.powi(*e)
            }
            Node::Call(f, a) => {
                let x = a.eval(vars)?;
                self.check_arg(*f, x, 0)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Log => x.ln(),
                    Func::Sqrt => x.sqrt(),
                    Func::Atan => x.atan(),
                }
            }
        };
        if !v.is_finite() {
            return Err(self.domain("non-finite value"));
        }
        Ok(v)
    }

    /// Evaluates the expression on jets of its variables.
    pub fn eval_jet(&self, vars: &[Jet]) -> Result<Jet> {
        let j = match &*self.0 {
            Node::Const(v) | Node::Named(_, v) => vars[0].lift(*v),
            Node::Var(i, _) => vars[*i].clone(),
            Node::Neg(a) => -a.eval_jet(vars)?,
            Node::Add(a, b) => a.eval_jet(vars)? + b.eval_jet(vars)?,
            Node::Sub(a, b) => a.eval_jet(vars)? - b.eval_jet(vars)?,
            Node::Mul(a, b) => {
                if a.is_zero() || b.is_zero() {
                    vars[0].lift(0.0)
                } else {
                    a.eval_jet(vars)? * b.eval_jet(vars)?
                }
            }
            Node::Div(a, b) => {
                let d = b.eval_jet(vars)?;
                if d.value() == 0.0 {
                    return Err(self.domain("division by zero"));
                }
                a.eval_jet(vars)? / d
            }
            Node::Pow(a, e) => {
                let x = a.eval_jet(vars)?;
                if x.value() == 0.0 && *e < 0 {
                    return Err(self.domain("negative power of zero"));
                }
                x.powi(*e)
            }
            Node::Call(f, a) => {
                let x = a.eval_jet(vars)?;
                self.check_arg(*f, x.value(), x.order())?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Log => x.ln(),
                    Func::Sqrt => x.sqrt(),
                    Func::Atan => x.atan(),
                }
            }
        };
        if !j.value().is_finite()
            || j.first()
                .iter()
                .chain(j.second())
                .chain(j.third())
                .any(|v| !v.is_finite())
        {
            return Err(self.domain("non-finite jet"));
        }
        Ok(j)
    }

    fn check_arg(&self, f: Func, x: f64, order: u8) -> Result<()> {
        let bad = match f {
            Func::Log => x <= 0.0,
            Func::Sqrt => x < 0.0 || (x == 0.0 && order > 0),
            Func::Tan => x.cos() == 0.0,
            _ => false,
        };
        if bad {
            Err(self.domain(&format!("{} outside its domain at {x}", f.name())))
        } else {
            Ok(())
        }
    }

    fn domain(&self, reason: &str) -> GeomError {
        GeomError::Domain {
            expr: self.to_string(),
            reason: reason.to_string(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(v) => write!(f, "{v}"),
            Node::Named(n, _) | Node::Var(_, n) => write!(f, "{n}"),
            Node::Neg(a) => write!(f, "-({a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "{a}/({b})"),
            Node::Pow(a, e) => write!(f, "({a})^{e}"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

macro_rules! expr_op {
    ($tr:ident, $m:ident, $node:ident) => {
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::node(Node::$node(self.clone(), rhs.clone()))
            }
        }
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::node(Node::$node(self, rhs))
            }
        }
    };
}

expr_op!(Add, add, Add);
expr_op!(Sub, sub, Sub);
expr_op!(Mul, mul, Mul);
expr_op!(Div, div, Div);

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::node(Node::Neg(self.clone()))
    }
}

// ---------------------------------------------------------------------------
// lexer / parser

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Num(f64),
    Int(i64),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Num(v) => write!(f, "number {v}"),
            Kind::Int(v) => write!(f, "integer {v}"),
            Kind::Ident(s) => write!(f, "identifier `{s}`"),
            Kind::Sym(c) => write!(f, "`{c}`"),
            Kind::End => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Tok {
    kind: Kind,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            let mut is_int = true;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                if chars[i] == '.' {
                    is_int = false;
                }
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_int = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let kind = if is_int {
                text.parse::<i64>()
                    .map(Kind::Int)
                    .or_else(|_| text.parse::<f64>().map(Kind::Num))
            } else {
                text.parse::<f64>().map(Kind::Num)
            }
            .map_err(|_| GeomError::Syntax {
                line: tl,
                column: tc,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Tok {
                kind,
                line: tl,
                column: tc,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Tok {
                kind: Kind::Ident(chars[start..i].iter().collect()),
                line: tl,
                column: tc,
            });
            continue;
        }
        if "+-*/^()".contains(c) {
            out.push(Tok {
                kind: Kind::Sym(c),
                line: tl,
                column: tc,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(GeomError::Syntax {
            line: tl,
            column: tc,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Tok {
        kind: Kind::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    scope: &'a Scope,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Tok {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().kind == Kind::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let t = self.next();
        if t.kind == Kind::Sym(c) {
            Ok(())
        } else {
            Err(GeomError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("expected `{c}`, found {}", t.kind),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = lhs + self.term()?;
            } else if self.eat('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat('/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(-&inner);
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let negative = self.eat('-');
        let t = self.next();
        match t.kind {
            Kind::Int(k) if k <= i32::MAX as i64 => {
                let e = if negative { -(k as i32) } else { k as i32 };
                Ok(base.powi(e))
            }
            other => Err(GeomError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("exponent must be an integer literal, found {other}"),
            }),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let t = self.next();
        match t.kind {
            Kind::Num(v) => Ok(Expr::constant(v)),
            Kind::Int(v) => Ok(Expr::constant(v as f64)),
            Kind::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Kind::Ident(name) => {
                if self.peek().kind == Kind::Sym('(') {
                    let f = Func::from_name(&name).ok_or(GeomError::UnknownIdentifier {
                        name: name.clone(),
                        line: t.line,
                        column: t.column,
                    })?;
                    self.next();
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::call(f, &arg));
                }
                match self.scope.resolve(&name) {
                    Some(node) => Ok(Expr::node(node)),
                    None => Err(GeomError::UnknownIdentifier {
                        name,
                        line: t.line,
                        column: t.column,
                    }),
                }
            }
            other => Err(GeomError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("unexpected {other}"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Scope {
        Scope::new(&["x", "y"])
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = Expr::parse("-x^2 + 2*y/4", &xy()).unwrap();
        assert_eq!(e.eval(&[3.0, 2.0]).unwrap(), -9.0 + 1.0);
        let e = Expr::parse("2^-2", &xy()).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 0.25);
    }

    #[test]
    fn functions_and_constants() {
        let e = Expr::parse(
            "sin(pi/2) + exp(0) + log(1) + sqrt(4) + atan(0) + cos(0) + tan(0)",
            &xy(),
        )
        .unwrap();
        assert!((e.eval(&[0.0, 0.0]).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_identifier_reports_location() {
        let err = Expr::parse("x + q", &xy()).unwrap_err();
        assert_eq!(
            err,
            GeomError::UnknownIdentifier {
                name: "q".into(),
                line: 1,
                column: 5
            }
        );
        let err = Expr::parse("foo(x)", &xy()).unwrap_err();
        assert!(matches!(err, GeomError::UnknownIdentifier { .. }));
    }

    #[test]
    fn syntax_errors_report_location() {
        match Expr::parse("x +", &xy()).unwrap_err() {
            GeomError::Syntax { line, column, .. } => assert_eq!((line, column), (1, 4)),
            e => panic!("{e}"),
        }
        match Expr::parse("x\n  * )", &xy()).unwrap_err() {
            GeomError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 5)),
            e => panic!("{e}"),
        }
        assert!(Expr::parse("x^1.5", &xy()).is_err());
        assert!(Expr::parse("(x", &xy()).is_err());
        assert!(Expr::parse("x y", &xy()).is_err());
    }

    #[test]
    fn division_by_zero_names_subexpression() {
        let e = Expr::parse("1 + 1/x", &xy()).unwrap();
        match e.eval(&[0.0, 1.0]).unwrap_err() {
            GeomError::Domain { expr, .. } => assert_eq!(expr, "1/(x)"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn remap_and_substitute() {
        let e = Expr::parse("x*y", &xy()).unwrap();
        let r = e.remap(&|i| (i + 1, format!("v{i}")));
        assert_eq!(r.eval(&[0.0, 2.0, 5.0]).unwrap(), 10.0);
        assert_eq!(r.max_var(), Some(2));
        let s = e.substitute(&[Expr::constant(3.0), Expr::var(0, "z")]);
        assert_eq!(s.eval(&[4.0]).unwrap(), 12.0);
    }
}
