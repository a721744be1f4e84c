//! Arithmetic expressions over the variables `x0 … x{d-1}`.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr    := term   (('+' | '-') term)*
//! term    := unary  (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | x<k> | func '(' expr ')' | '(' expr ')'
//! func    := exp | log | sin | cos | sqrt | abs
//! ```
//!
//! `^` binds tighter than unary minus, so `-x0^2` is `-(x0^2)` while
//! `2*-x0` is `2*(-x0)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    /// Byte offset into the source.
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{func} undefined at {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result in {0}")]
    NonFinite(&'static str),
    #[error("variable x{index} out of range for a point of dimension {dim}")]
    MissingVariable { index: usize, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, x: f64) -> Result<f64, EvalError> {
        let y = match self {
            Func::Exp => x.exp(),
            Func::Log => {
                if x <= 0.0 {
                    return Err(EvalError::Domain {
                        func: "log",
                        arg: x,
                    });
                }
                x.ln()
            }
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sqrt => {
                if x < 0.0 {
                    return Err(EvalError::Domain {
                        func: "sqrt",
                        arg: x,
                    });
                }
                x.sqrt()
            }
            Func::Abs => x.abs(),
        };
        finite(y, self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

fn finite(y: f64, what: &'static str) -> Result<f64, EvalError> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(EvalError::NonFinite(what))
    }
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(i) => x.get(*i).copied().ok_or(EvalError::MissingVariable {
                index: *i,
                dim: x.len(),
            }),
            Expr::Neg(e) => Ok(-e.eval(x)?),
            Expr::Call(f, e) => f.apply(e.eval(x)?),
            Expr::Binary(op, a, b) => {
                let a = a.eval(x)?;
                let b = b.eval(x)?;
                match op {
                    BinOp::Add => finite(a + b, "+"),
                    BinOp::Sub => finite(a - b, "-"),
                    BinOp::Mul => finite(a * b, "*"),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(EvalError::DivisionByZero)
                        } else {
                            finite(a / b, "/")
                        }
                    }
                    BinOp::Pow => {
                        if a == 0.0 && b < 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(EvalError::Domain { func: "^", arg: a });
                        }
                        finite(a.powf(b), "^")
                    }
                }
            }
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Call(_, e) => e.max_var(),
            Expr::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }
}

/// Prints fully parenthesized so that the output parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(start) else {
            return Ok((start, Tok::End));
        };
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => self.number(start)?,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Tok::Ident(self.src[start..self.pos].to_string())
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    message: format!("unexpected character '{ch}'"),
                });
            }
        };
        Ok((start, tok))
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            let s = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - s
        };
        let mut n = digits(&mut self.pos);
        if bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(&mut self.pos);
        }
        if n == 0 {
            return Err(ParseError {
                offset: start,
                message: "malformed number".into(),
            });
        }
        if matches!(bytes.get(self.pos), Some(b'e' | b'E')) {
            let mut p = self.pos + 1;
            if matches!(bytes.get(p), Some(b'+' | b'-')) {
                p += 1;
            }
            if digits(&mut p) == 0 {
                return Err(ParseError {
                    offset: self.pos,
                    message: "malformed exponent".into(),
                });
            }
            self.pos = p;
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Tok::Num(v)),
            _ => Err(ParseError {
                offset: start,
                message: format!("numeric literal '{text}' out of range"),
            }),
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Tok),
    dim: Option<usize>,
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(usize, Tok), ParseError> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.peeked, next))
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.peeked.0,
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = self.peeked.1 {
            self.advance()?;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = self.peeked.1 {
            self.advance()?;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peeked.1 == Tok::Op('-') {
            self.advance()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peeked.1 == Tok::Op('^') {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (offset, tok) = self.peeked.clone();
        match tok {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.advance()?;
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(index) = parse_var(&name) {
                    if let Some(dim) = self.dim {
                        if index >= dim {
                            return Err(ParseError {
                                offset,
                                message: format!("unknown variable '{name}' (dimension is {dim})"),
                            });
                        }
                    }
                    self.advance()?;
                    return Ok(Expr::Var(index));
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError {
                        offset,
                        message: format!("unknown identifier '{name}'"),
                    });
                };
                self.advance()?;
                if self.peeked.1 != Tok::LParen {
                    return self.error(format!("expected '(' after {name}"));
                }
                self.advance()?;
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::End => self.error("unexpected end of input"),
            Tok::RParen => self.error("unexpected ')'"),
            Tok::Op(c) => self.error(format!("unexpected operator '{c}'")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.peeked.1 == Tok::RParen {
            self.advance()?;
            Ok(())
        } else {
            self.error("expected ')'")
        }
    }
}

fn parse_var(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn parse_impl(source: &str, dim: Option<usize>) -> Result<Expr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut lexer = Lexer {
        src: source,
        pos: 0,
    };
    let peeked = lexer.next()?;
    let mut parser = Parser { lexer, peeked, dim };
    let e = parser.expr()?;
    if parser.peeked.1 != Tok::End {
        return parser.error("unexpected trailing input");
    }
    Ok(e)
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionObjective {
    source: String,
    ast: Expr,
}

impl ExpressionObjective {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.ast.eval(x)
    }
}

/// Parses `source`, accepting any variable `x<k>`.
pub fn parse_expression(source: &str) -> Result<ExpressionObjective, ParseError> {
    Ok(ExpressionObjective {
        source: source.to_string(),
        ast: parse_impl(source, None)?,
    })
}

/// Parses `source`, rejecting variables beyond `x{dim-1}`.
pub fn parse_expression_in(source: &str, dim: usize) -> Result<ExpressionObjective, ParseError> {
    Ok(ExpressionObjective {
        source: source.to_string(),
        ast: parse_impl(source, Some(dim))?,
    })
}

/// Central differences, one coordinate at a time.
pub fn finite_diff_gradient(
    expr: &ExpressionObjective,
    u: &[f64],
    step: f64,
) -> Result<Vec<f64>, EvalError> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let mut x = u.to_vec();
    let mut grad = Vec::with_capacity(u.len());
    for k in 0..u.len() {
        let orig = x[k];
        x[k] = orig + step;
        let fp = expr.eval(&x)?;
        x[k] = orig - step;
        let fm = expr.eval(&x)?;
        x[k] = orig;
        // (orig + step) - (orig - step) is the step actually taken
        grad.push((fp - fm) / ((orig + step) - (orig - step)));
    }
    Ok(grad)
}

/// `1e-6 · max(1, |u|)`.
pub fn default_fd_step(u: &[f64]) -> f64 {
    1e-6 * crate::vecops::norm(u).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eval(src: &str, x: &[f64]) -> f64 {
        parse_expression(src).unwrap().eval(x).unwrap()
    }

    #[test]
    fn sum_of_squares() {
        assert_eq!(eval("x0^2 + x1^2", &[1.0, 2.0]), 5.0);
    }

    #[test]
    fn unary_minus_inside_product() {
        let e = parse_expression("2*-x0").unwrap();
        assert_eq!(
            e.ast(),
            &Expr::Binary(
                BinOp::Mul,
                Box::new(Expr::Num(2.0)),
                Box::new(Expr::Neg(Box::new(Expr::Var(0))))
            )
        );
        assert_eq!(e.eval(&[1.0]).unwrap(), -2.0);
    }

    #[test]
    fn precedence_rules() {
        assert_eq!(eval("-x0^2", &[3.0]), -9.0);
        assert_eq!(eval("2^3^2", &[]), 512.0);
        assert_eq!(eval("2^-1", &[]), 0.5);
        assert_eq!(eval("1 - 2 - 3", &[]), -4.0);
        assert_eq!(eval("8 / 4 / 2", &[]), 1.0);
        assert_eq!(eval("1 + 2 * 3", &[]), 7.0);
        assert_eq!(eval("(1 + 2) * 3", &[]), 9.0);
        assert_eq!(eval("--x0", &[2.0]), 2.0);
        assert_eq!(
            eval("sqrt(abs(-16)) + exp(0) + cos(0) + sin(0) + log(1)", &[]),
            6.0
        );
        assert_eq!(eval("1.5e1 + .5 + 2.", &[]), 17.5);
    }

    #[test]
    fn syntax_errors_report_offsets() {
        let err = parse_expression("x0 + ").unwrap_err();
        assert_eq!(err.offset, 5);
        assert_eq!(parse_expression("x0 + y").unwrap_err().offset, 5);
        assert_eq!(parse_expression("foo(x0)").unwrap_err().offset, 0);
        assert_eq!(parse_expression("(x0").unwrap_err().offset, 3);
        assert_eq!(parse_expression("x0 x1").unwrap_err().offset, 3);
        assert_eq!(parse_expression("exp x0").unwrap_err().offset, 4);
        assert_eq!(parse_expression("3 $ 4").unwrap_err().offset, 2);
        assert_eq!(parse_expression("1e").unwrap_err().offset, 1);
        assert_eq!(parse_expression("1e999").unwrap_err().offset, 0);
        assert_eq!(parse_expression("   ").unwrap_err().offset, 0);
        assert_eq!(parse_expression_in("x0 + x2", 2).unwrap_err().offset, 5);
        assert!(parse_expression_in("x0 + x1", 2).is_ok());
    }

    #[test]
    fn domain_errors_are_reported() {
        let e = parse_expression("log(x0)").unwrap();
        assert!(matches!(
            e.eval(&[-1.0]),
            Err(EvalError::Domain { func: "log", .. })
        ));
        assert!(matches!(e.eval(&[0.0]), Err(EvalError::Domain { .. })));
        assert_eq!(
            parse_expression("1 / x0").unwrap().eval(&[0.0]),
            Err(EvalError::DivisionByZero)
        );
        assert!(parse_expression("sqrt(x0)").unwrap().eval(&[-1.0]).is_err());
        assert!(parse_expression("x0^0.5").unwrap().eval(&[-1.0]).is_err());
        assert!(parse_expression("exp(x0)")
            .unwrap()
            .eval(&[1000.0])
            .is_err());
        assert!(matches!(
            parse_expression("x3").unwrap().eval(&[1.0]),
            Err(EvalError::MissingVariable { index: 3, dim: 1 })
        ));
    }

    #[test]
    fn finite_differences_on_simple_expressions() {
        let e = parse_expression("x0^2").unwrap();
        let g = finite_diff_gradient(&e, &[3.0], default_fd_step(&[3.0])).unwrap();
        assert!((g[0] - 6.0).abs() <= 1e-6);
        let e = parse_expression("x0*x1").unwrap();
        let g = finite_diff_gradient(&e, &[2.0, 5.0], default_fd_step(&[2.0, 5.0])).unwrap();
        assert!((g[0] - 5.0).abs() <= 1e-6);
        assert!((g[1] - 2.0).abs() <= 1e-6);
    }

    #[test]
    fn finite_differences_propagate_domain_errors() {
        let e = parse_expression("log(x0)").unwrap();
        assert!(finite_diff_gradient(&e, &[0.0], 1e-6).is_err());
    }

    /// Random cubic in three variables held as monomials, so the exact
    /// gradient comes from differentiating exponents, not from the parser.
    struct Cubic {
        terms: Vec<(f64, [u32; 3])>,
    }

    impl Cubic {
        fn random(rng: &mut ChaCha8Rng) -> Self {
            let mut terms = Vec::new();
            for a in 0..=3u32 {
                for b in 0..=3 - a {
                    for c in 0..=3 - a - b {
                        terms.push((rng.gen_range(-2.0..2.0), [a, b, c]));
                    }
                }
            }
            Self { terms }
        }

        fn source(&self) -> String {
            self.terms
                .iter()
                .map(|(c, e)| format!("{c:?}*x0^{}*x1^{}*x2^{}", e[0], e[1], e[2]))
                .collect::<Vec<_>>()
                .join(" + ")
        }

        fn gradient(&self, x: &[f64]) -> [f64; 3] {
            let mut g = [0.0; 3];
            for (c, e) in &self.terms {
                for k in 0..3 {
                    if e[k] == 0 {
                        continue;
                    }
                    let mut term = c * e[k] as f64;
                    for j in 0..3 {
                        let p = if j == k { e[j] - 1 } else { e[j] };
                        term *= x[j].powi(p as i32);
                    }
                    g[k] += term;
                }
            }
            g
        }
    }

    #[test]
    fn finite_differences_match_symbolic_cubic_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..50 {
            let cubic = Cubic::random(&mut rng);
            let e = parse_expression(&cubic.source()).unwrap();
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let fd = finite_diff_gradient(&e, &x, default_fd_step(&x)).unwrap();
            let exact = cubic.gradient(&x);
            for k in 0..3 {
                assert!(
                    (fd[k] - exact[k]).abs() <= 1e-5,
                    "{} vs {}",
                    fd[k],
                    exact[k]
                );
            }
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            (0usize..4).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Binary(
                        op,
                        Box::new(a),
                        Box::new(b)
                    )),
                (
                    prop_oneof![Just(Func::Exp), Just(Func::Log), Just(Func::Abs)],
                    inner
                )
                    .prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse_expression(&printed).unwrap();
            prop_assert_eq!(reparsed.ast(), &e);
            prop_assert_eq!(reparsed.ast().to_string(), printed);
        }
    }
}
