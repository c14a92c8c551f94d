//! Scalar expressions over `x1`…`x9` for boundary data and defining functions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x1^2`
//! is `-(x1^2)` and `2^3^2` is `2^9`.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdent { offset: usize, name: String },
    #[error("`{name}` at byte {offset} takes {expected} argument(s), got {got}")]
    Arity { offset: usize, name: String, expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Atan,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "atan" => Func::Atan,
            "min" => Func::Min,
            "max" => Func::Max,
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
            Func::Abs => "abs",
            Func::Atan => "atan",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// `x1` is `Var(0)`.
    Var(usize),
    Pi,
    E,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Value at `x`; variables past the end of `x` evaluate to NaN.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Neg(a) => -a.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(x);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                    Func::Atan => a.atan(),
                    Func::Min => a.min(args[1].eval(x)),
                    Func::Max => a.max(args[1].eval(x)),
                }
            }
        }
    }

    /// Number of variables referenced (`x3` alone gives 3).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Var(i) => i + 1,
            Expr::Neg(a) => a.arity(),
            Expr::Bin(_, a, b) => a.arity().max(b.arity()),
            Expr::Call(_, args) => args.iter().map(Expr::arity).max().unwrap_or(0),
            _ => 0,
        }
    }
}

/// Integer exponents use repeated multiplication so that `x^2` is exact.
fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

/// Fully parenthesized; parsing the output gives back the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl Lexer<'_> {
    fn next(&mut self) -> Result<(usize, Tok), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let c = b as char;
        if c.is_ascii_digit() || c == '.' {
            let mut end = self.pos;
            while end < bytes.len() && ((bytes[end] as char).is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && (bytes[k] as char).is_ascii_digit() {
                    while k < bytes.len() && (bytes[k] as char).is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = &self.src[start..end];
            self.pos = end;
            return text
                .parse::<f64>()
                .map(|v| (start, Tok::Num(v)))
                .map_err(|_| ExprError::Syntax { offset: start, message: format!("malformed number `{text}`") });
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = self.pos;
            while end < bytes.len() && ((bytes[end] as char).is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok((start, Tok::Ident(self.src[start..end].to_string())));
        }
        self.pos += c.len_utf8().max(1);
        Ok((
            start,
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => {
                    let ch = self.src[start..].chars().next().unwrap_or(c);
                    return Err(ExprError::Syntax { offset: start, message: format!("unexpected character `{ch}`") });
                }
            },
        ))
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ExprError> {
        let mut lex = Lexer { src, pos: 0 };
        let (at, tok) = lex.next()?;
        Ok(Parser { lex, tok, at })
    }

    fn bump(&mut self) -> Result<(), ExprError> {
        let (at, tok) = self.lex.next()?;
        self.at = at;
        self.tok = tok;
        Ok(())
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        if self.tok == want {
            self.bump()
        } else {
            Err(ExprError::Syntax { offset: self.at, message: format!("expected {what}") })
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = self.tok {
            self.bump()?;
            let rhs = self.term()?;
            lhs = Expr::Bin(if c == '+' { BinOp::Add } else { BinOp::Sub }, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = self.tok {
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Expr::Bin(if c == '*' { BinOp::Mul } else { BinOp::Div }, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.tok == Tok::Op('-') {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.tok == Tok::Op('^') {
            self.bump()?;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let at = self.at;
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump()?;
                if self.tok == Tok::LParen {
                    let func = Func::lookup(&name).ok_or_else(|| ExprError::UnknownIdent { offset: at, name: name.clone() })?;
                    self.bump()?;
                    let mut args = vec![self.expr()?];
                    while self.tok == Tok::Comma {
                        self.bump()?;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)` or `,`")?;
                    if args.len() != func.arity() {
                        return Err(ExprError::Arity { offset: at, name, expected: func.arity(), got: args.len() });
                    }
                    return Ok(Expr::Call(func, args));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Pi),
                    "e" => Ok(Expr::E),
                    _ => {
                        let idx = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()).filter(|d| (1..=9).contains(d) && name.len() == 2);
                        match idx {
                            Some(d) => Ok(Expr::Var(d - 1)),
                            None if Func::lookup(&name).is_some() => Err(ExprError::Syntax { offset: self.at, message: format!("`{name}` needs an argument list") }),
                            None => Err(ExprError::UnknownIdent { offset: at, name }),
                        }
                    }
                }
            }
            Tok::End => Err(ExprError::Syntax { offset: at, message: "unexpected end of input".into() }),
            other => Err(ExprError::Syntax { offset: at, message: format!("unexpected {other:?}") }),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(ExprError::Syntax { offset: p.at, message: "trailing input".into() });
    }
    Ok(e)
}
