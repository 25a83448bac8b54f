//! A small closed-form expression language for domain and boundary data.
//!
//! Custom curves and boundary functions are entered as strings over the
//! variables `t` and `eps` plus named parameters. Derivatives are taken
//! symbolically on the syntax tree, never by finite differences, so
//! third-order jets are exact up to rounding.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Call(Func, Arc<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
    Atan,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Sqrt => x.sqrt(),
            Func::Atan => x.atan(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(s) => write!(f, "{s}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

// -- parsing ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == '.'
                        || bytes[i] == 'e'
                        || bytes[i] == 'E'
                        || ((bytes[i] == '+' || bytes[i] == '-')
                            && i > start
                            && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::Expr(format!("bad number `{text}`")))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(bytes[start..i].iter().collect()));
            }
            other => return Err(Error::Expr(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.bump() {
            Some(got) if got == t => Ok(()),
            got => Err(Error::Expr(format!("expected {t:?}, got {got:?}"))),
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Arc::new(lhs), Arc::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Arc::new(lhs), Arc::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Arc::new(lhs), Arc::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Arc::new(lhs), Arc::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(Expr::Neg(Arc::new(self.unary()?)));
        }
        self.power()
    }

    // power := atom ('^' unary)?   (right-assoc)
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Pow(Arc::new(base), Arc::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::Ident(name)) => {
                let func = match name.as_str() {
                    "exp" => Some(Func::Exp),
                    "log" | "ln" => Some(Func::Log),
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "tan" => Some(Func::Tan),
                    "sinh" => Some(Func::Sinh),
                    "cosh" => Some(Func::Cosh),
                    "tanh" => Some(Func::Tanh),
                    "sqrt" => Some(Func::Sqrt),
                    "atan" => Some(Func::Atan),
                    _ => None,
                };
                if let Some(func) = func {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Call(func, Arc::new(arg)))
                } else {
                    match name.as_str() {
                        "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                        _ => Ok(Expr::Var(name)),
                    }
                }
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            got => Err(Error::Expr(format!("unexpected token {got:?}"))),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Expr(format!(
            "trailing tokens after expression in `{src}`"
        )));
    }
    Ok(simplify(&e))
}

// -- evaluation and differentiation -----------------------------------------

impl Expr {
    pub fn eval(&self, vars: &HashMap<&str, f64>) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(name) => *vars.get(name.as_str()).unwrap_or(&f64::NAN),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Pow(a, b) => {
                let base = a.eval(vars);
                let e = b.eval(vars);
                if e.fract() == 0.0 && e.abs() < 64.0 {
                    base.powi(e as i32)
                } else {
                    base.powf(e)
                }
            }
            Expr::Neg(a) => -a.eval(vars),
            Expr::Call(f, a) => f.apply(a.eval(vars)),
        }
    }

    /// Symbolic derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> Expr {
        let d = match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(name) => {
                if name == var {
                    Expr::Num(1.0)
                } else {
                    Expr::Num(0.0)
                }
            }
            Expr::Add(a, b) => Expr::Add(Arc::new(a.diff(var)), Arc::new(b.diff(var))),
            Expr::Sub(a, b) => Expr::Sub(Arc::new(a.diff(var)), Arc::new(b.diff(var))),
            Expr::Mul(a, b) => Expr::Add(
                Arc::new(Expr::Mul(Arc::new(a.diff(var)), b.clone())),
                Arc::new(Expr::Mul(a.clone(), Arc::new(b.diff(var)))),
            ),
            Expr::Div(a, b) => Expr::Div(
                Arc::new(Expr::Sub(
                    Arc::new(Expr::Mul(Arc::new(a.diff(var)), b.clone())),
                    Arc::new(Expr::Mul(a.clone(), Arc::new(b.diff(var)))),
                )),
                Arc::new(Expr::Mul(b.clone(), b.clone())),
            ),
            Expr::Pow(a, b) => match &**b {
                // d(a^c) = c * a^(c-1) * a'
                Expr::Num(c) => Expr::Mul(
                    Arc::new(Expr::Mul(
                        Arc::new(Expr::Num(*c)),
                        Arc::new(Expr::Pow(a.clone(), Arc::new(Expr::Num(c - 1.0)))),
                    )),
                    Arc::new(a.diff(var)),
                ),
                // general: a^b = exp(b log a)
                _ => {
                    let rewritten = Expr::Call(
                        Func::Exp,
                        Arc::new(Expr::Mul(
                            b.clone(),
                            Arc::new(Expr::Call(Func::Log, a.clone())),
                        )),
                    );
                    rewritten.diff(var)
                }
            },
            Expr::Neg(a) => Expr::Neg(Arc::new(a.diff(var))),
            Expr::Call(f, a) => {
                let da = a.diff(var);
                let outer = match f {
                    Func::Exp => Expr::Call(Func::Exp, a.clone()),
                    Func::Log => Expr::Div(Arc::new(Expr::Num(1.0)), a.clone()),
                    Func::Sin => Expr::Call(Func::Cos, a.clone()),
                    Func::Cos => Expr::Neg(Arc::new(Expr::Call(Func::Sin, a.clone()))),
                    Func::Tan => {
                        // 1 + tan^2
                        Expr::Add(
                            Arc::new(Expr::Num(1.0)),
                            Arc::new(Expr::Pow(
                                Arc::new(Expr::Call(Func::Tan, a.clone())),
                                Arc::new(Expr::Num(2.0)),
                            )),
                        )
                    }
                    Func::Sinh => Expr::Call(Func::Cosh, a.clone()),
                    Func::Cosh => Expr::Call(Func::Sinh, a.clone()),
                    Func::Tanh => Expr::Sub(
                        Arc::new(Expr::Num(1.0)),
                        Arc::new(Expr::Pow(
                            Arc::new(Expr::Call(Func::Tanh, a.clone())),
                            Arc::new(Expr::Num(2.0)),
                        )),
                    ),
                    Func::Sqrt => Expr::Div(
                        Arc::new(Expr::Num(0.5)),
                        Arc::new(Expr::Call(Func::Sqrt, a.clone())),
                    ),
                    Func::Atan => Expr::Div(
                        Arc::new(Expr::Num(1.0)),
                        Arc::new(Expr::Add(
                            Arc::new(Expr::Num(1.0)),
                            Arc::new(Expr::Pow(a.clone(), Arc::new(Expr::Num(2.0)))),
                        )),
                    ),
                };
                Expr::Mul(Arc::new(outer), Arc::new(da))
            }
        };
        simplify(&d)
    }
}

/// Light structural simplification: constant folding and unit/zero rules.
/// Keeps derivative trees from exploding across repeated differentiation.
pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Add(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            match (&a, &b) {
                (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
                (Expr::Num(z), _) if *z == 0.0 => b,
                (_, Expr::Num(z)) if *z == 0.0 => a,
                _ => Expr::Add(Arc::new(a), Arc::new(b)),
            }
        }
        Expr::Sub(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            match (&a, &b) {
                (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
                (_, Expr::Num(z)) if *z == 0.0 => a,
                (Expr::Num(z), _) if *z == 0.0 => Expr::Neg(Arc::new(b)),
                _ => Expr::Sub(Arc::new(a), Arc::new(b)),
            }
        }
        Expr::Mul(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            match (&a, &b) {
                (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
                (Expr::Num(z), _) | (_, Expr::Num(z)) if *z == 0.0 => Expr::Num(0.0),
                (Expr::Num(o), _) if *o == 1.0 => b,
                (_, Expr::Num(o)) if *o == 1.0 => a,
                (Expr::Num(o), _) if *o == -1.0 => Expr::Neg(Arc::new(b)),
                (_, Expr::Num(o)) if *o == -1.0 => Expr::Neg(Arc::new(a)),
                _ => Expr::Mul(Arc::new(a), Arc::new(b)),
            }
        }
        Expr::Div(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            match (&a, &b) {
                (Expr::Num(x), Expr::Num(y)) if *y != 0.0 => Expr::Num(x / y),
                (Expr::Num(z), _) if *z == 0.0 => Expr::Num(0.0),
                (_, Expr::Num(o)) if *o == 1.0 => a,
                _ => Expr::Div(Arc::new(a), Arc::new(b)),
            }
        }
        Expr::Pow(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            match (&a, &b) {
                (Expr::Num(x), Expr::Num(y)) => Expr::Num(x.powf(*y)),
                (_, Expr::Num(o)) if *o == 1.0 => a,
                (_, Expr::Num(z)) if *z == 0.0 => Expr::Num(1.0),
                _ => Expr::Pow(Arc::new(a), Arc::new(b)),
            }
        }
        Expr::Neg(a) => {
            let a = simplify(a);
            match &a {
                Expr::Num(x) => Expr::Num(-x),
                Expr::Neg(inner) => (**inner).clone(),
                _ => Expr::Neg(Arc::new(a)),
            }
        }
        Expr::Call(f, a) => Expr::Call(*f, Arc::new(simplify(a))),
        other => other.clone(),
    }
}

/// A compiled postfix program for fast repeated evaluation in the two
/// variables `t` and `eps`.
#[derive(Debug, Clone)]
pub struct Program {
    ops: Vec<Op>,
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Push(f64),
    LoadT,
    LoadEps,
    Add,
    Sub,
    Mul,
    Div,
    Powi(i32),
    Powf,
    Neg,
    Fun(Func),
}

impl Program {
    pub fn compile(e: &Expr) -> Program {
        let mut ops = Vec::new();
        fn emit(e: &Expr, ops: &mut Vec<Op>) {
            match e {
                Expr::Num(v) => ops.push(Op::Push(*v)),
                Expr::Var(name) => match name.as_str() {
                    "t" => ops.push(Op::LoadT),
                    "eps" => ops.push(Op::LoadEps),
                    _ => ops.push(Op::Push(f64::NAN)),
                },
                Expr::Add(a, b) => {
                    emit(a, ops);
                    emit(b, ops);
                    ops.push(Op::Add);
                }
                Expr::Sub(a, b) => {
                    emit(a, ops);
                    emit(b, ops);
                    ops.push(Op::Sub);
                }
                Expr::Mul(a, b) => {
                    emit(a, ops);
                    emit(b, ops);
                    ops.push(Op::Mul);
                }
                Expr::Div(a, b) => {
                    emit(a, ops);
                    emit(b, ops);
                    ops.push(Op::Div);
                }
                Expr::Pow(a, b) => {
                    emit(a, ops);
                    if let Expr::Num(v) = &**b {
                        if v.fract() == 0.0 && v.abs() < 64.0 {
                            ops.push(Op::Powi(*v as i32));
                            return;
                        }
                    }
                    emit(b, ops);
                    ops.push(Op::Powf);
                }
                Expr::Neg(a) => {
                    emit(a, ops);
                    ops.push(Op::Neg);
                }
                Expr::Call(f, a) => {
                    emit(a, ops);
                    ops.push(Op::Fun(*f));
                }
            }
        }
        emit(e, &mut ops);
        Program { ops }
    }

    #[inline]
    pub fn eval(&self, t: f64, eps: f64) -> f64 {
        let mut stack = [0.0f64; 256];
        let mut sp = 0usize;
        for op in &self.ops {
            match op {
                Op::Push(v) => {
                    stack[sp] = *v;
                    sp += 1;
                }
                Op::LoadT => {
                    stack[sp] = t;
                    sp += 1;
                }
                Op::LoadEps => {
                    stack[sp] = eps;
                    sp += 1;
                }
                Op::Add => {
                    sp -= 1;
                    stack[sp - 1] += stack[sp];
                }
                Op::Sub => {
                    sp -= 1;
                    stack[sp - 1] -= stack[sp];
                }
                Op::Mul => {
                    sp -= 1;
                    stack[sp - 1] *= stack[sp];
                }
                Op::Div => {
                    sp -= 1;
                    stack[sp - 1] /= stack[sp];
                }
                Op::Powi(k) => {
                    stack[sp - 1] = stack[sp - 1].powi(*k);
                }
                Op::Powf => {
                    sp -= 1;
                    stack[sp - 1] = stack[sp - 1].powf(stack[sp]);
                }
                Op::Neg => {
                    stack[sp - 1] = -stack[sp - 1];
                }
                Op::Fun(f) => {
                    stack[sp - 1] = f.apply(stack[sp - 1]);
                }
            }
        }
        stack[sp - 1]
    }
}

/// An expression of `t` (and optionally `eps`) together with its first three
/// `t`-derivatives and first `eps`-derivative, all symbolic, compiled for
/// fast evaluation.
#[derive(Debug, Clone)]
pub struct Jet3 {
    value: Program,
    dt: [Program; 3],
    deps: Program,
}

impl Jet3 {
    pub fn new(value: Expr) -> Self {
        let d1 = value.diff("t");
        let d2 = d1.diff("t");
        let d3 = d2.diff("t");
        let deps = value.diff("eps");
        Jet3 {
            value: Program::compile(&value),
            dt: [
                Program::compile(&d1),
                Program::compile(&d2),
                Program::compile(&d3),
            ],
            deps: Program::compile(&deps),
        }
    }

    pub fn eval_all(&self, t: f64, eps: f64) -> [f64; 4] {
        [
            self.value.eval(t, eps),
            self.dt[0].eval(t, eps),
            self.dt[1].eval(t, eps),
            self.dt[2].eval(t, eps),
        ]
    }

    pub fn eval_deps(&self, t: f64, eps: f64) -> f64 {
        self.deps.eval(t, eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval1(e: &Expr, t: f64) -> f64 {
        let mut vars = HashMap::new();
        vars.insert("t", t);
        e.eval(&vars)
    }

    #[test]
    fn parse_and_eval() {
        let e = parse("t^2 + 3*t - 1/(t+2)").unwrap();
        assert!((eval1(&e, 1.0) - (1.0 + 3.0 - 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn third_derivative_of_exp_2t() {
        let e = parse("exp(2*t)").unwrap();
        let d3 = e.diff("t").diff("t").diff("t");
        assert!((eval1(&d3, 0.5) - 8.0 * (1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn derivative_of_power() {
        let e = parse("t^6 - 5*t^4").unwrap();
        let d3 = e.diff("t").diff("t").diff("t");
        // f''' = 120 t^3 - 120 t
        for t in [-1.5, -0.3, 0.7, 2.0] {
            assert!((eval1(&d3, t) - (120.0 * t * t * t - 120.0 * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn eps_derivative() {
        let j = Jet3::new(parse("t*t + eps*eps").unwrap());
        assert!((j.eval_deps(1.0, 0.3) - 0.6).abs() < 1e-15);
        let v = j.eval_all(2.0, 0.3);
        assert!((v[0] - 4.09).abs() < 1e-15);
        assert!((v[1] - 4.0).abs() < 1e-15);
        assert!((v[2] - 2.0).abs() < 1e-15);
        assert!((v[3] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("t +* 2").is_err());
        assert!(parse("foo(t").is_err());
    }
}
