//! Recursive-descent parser for law expressions.
//!
//! Precedence, tightest first: unary minus, `^` (right-assoc), `*` `/`,
//! `+` `-`. Whitespace is insignificant; components are separated by `;`.

use super::{BinOp, Expr, Func, LawExpr, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semicolon,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number {v}"),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::LBracket => "`[`".into(),
            Token::RBracket => "`]`".into(),
            Token::Semicolon => "`;`".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

type Spanned = (Token, usize, usize);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_whitespace() {
                self.bump();
                continue;
            }
            let (line, col) = (self.line, self.col);
            let tok = match c {
                b'+' => {
                    self.bump();
                    Token::Plus
                }
                b'-' => {
                    self.bump();
                    Token::Minus
                }
                b'*' => {
                    self.bump();
                    Token::Star
                }
                b'/' => {
                    self.bump();
                    Token::Slash
                }
                b'^' => {
                    self.bump();
                    Token::Caret
                }
                b'(' => {
                    self.bump();
                    Token::LParen
                }
                b')' => {
                    self.bump();
                    Token::RParen
                }
                b'[' => {
                    self.bump();
                    Token::LBracket
                }
                b']' => {
                    self.bump();
                    Token::RBracket
                }
                b';' => {
                    self.bump();
                    Token::Semicolon
                }
                b'0'..=b'9' | b'.' => {
                    let start = self.pos;
                    while self.pos < self.src.len()
                        && matches!(self.src[self.pos], b'0'..=b'9' | b'.')
                    {
                        self.bump();
                    }
                    // optional exponent
                    if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
                        let mark = self.pos;
                        self.bump();
                        if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                            self.bump();
                        }
                        if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                                self.bump();
                            }
                        } else {
                            self.pos = mark;
                        }
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let v: f64 = text
                        .parse()
                        .map_err(|_| self.error(format!("bad number `{text}`")))?;
                    Token::Num(v)
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let start = self.pos;
                    while self.pos < self.src.len()
                        && matches!(self.src[self.pos], b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_')
                    {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    Token::Ident(text.to_string())
                }
                other => return Err(self.error(format!("unexpected character `{}`", other as char))),
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|&(_, l, c)| (l, c))
            .unwrap_or((1, 1))
    }

    fn error(&self, expected: &str) -> Error {
        let (line, col) = self.here();
        let found = self
            .peek()
            .map(|t| t.describe())
            .unwrap_or_else(|| "end of input".into());
        Error::Parse {
            line,
            col,
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn eat(&mut self, tok: &Token, expected: &str) -> Result<()> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn index(&mut self, variable: &str, max: usize) -> Result<usize> {
        self.eat(&Token::LBracket, "`[`")?;
        let v = match self.peek() {
            Some(Token::Num(v)) if v.fract() == 0.0 && *v >= 0.0 => {
                let v = *v as usize;
                self.pos += 1;
                v
            }
            _ => return Err(self.error("integer index")),
        };
        self.eat(&Token::RBracket, "`]`")?;
        if v < 1 || v > max {
            return Err(Error::IndexOutOfRange {
                variable: variable.to_string(),
                index: v,
                max,
            });
        }
        Ok(v - 1)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Token::Minus) => {
                self.pos += 1;
                let inner = self.atom()?;
                // fold literal negation so `-2` is a single Num node
                Ok(match inner {
                    Expr::Num(v) => Expr::Num(-v),
                    other => Expr::Neg(Box::new(other)),
                })
            }
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(&Token::RParen, "`)`")?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "x" => Ok(Expr::Var(Var::X(self.index("x", self.n)?))),
                    "y" => Ok(Expr::Var(Var::Y(self.index("y", self.n)?))),
                    "yA" => {
                        let j = self.index("yA", self.n)?;
                        let i = self.index("yA", self.n)?;
                        Ok(Expr::Var(Var::A(j, i)))
                    }
                    "yB" => {
                        let j = self.index("yB", self.n)?;
                        let i = self.index("yB", self.n)?;
                        Ok(Expr::Var(Var::B(j, i)))
                    }
                    "yC" => {
                        let j = self.index("yC", self.n)?;
                        let i = self.index("yC", self.n)?;
                        let k = self.index("yC", self.n)?;
                        Ok(Expr::Var(Var::C(j, i, k)))
                    }
                    "exp" | "log" | "sin" | "cos" | "sqrt" => {
                        let f = match name.as_str() {
                            "exp" => Func::Exp,
                            "log" => Func::Log,
                            "sin" => Func::Sin,
                            "cos" => Func::Cos,
                            _ => Func::Sqrt,
                        };
                        self.eat(&Token::LParen, "`(`")?;
                        let arg = self.expr()?;
                        self.eat(&Token::RParen, "`)`")?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    other => {
                        self.pos -= 1;
                        let (line, col) = self.here();
                        Err(Error::Parse {
                            line,
                            col,
                            message: format!(
                                "unknown symbol `{other}`; expected x, y, yA, yB, yC, \
                                 exp, log, sin, cos or sqrt"
                            ),
                        })
                    }
                }
            }
            _ => Err(self.error("number, variable, `-` or `(`")),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let exp = self.power()?;
            Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.power()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.power()?;
            acc = Expr::Bin(op, Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            acc = Expr::Bin(op, Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }
}

/// Parse `;`-separated components; the output dimension is the component
/// count.
pub fn parse_components(text: &str, n: usize) -> Result<LawExpr> {
    if text.trim().is_empty() {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            message: "empty law text".into(),
        });
    }
    let tokens = Lexer::new(text).tokenize()?;
    let mut p = Parser { tokens, pos: 0, n };
    let mut components = vec![p.expr()?];
    while p.peek() == Some(&Token::Semicolon) {
        p.pos += 1;
        components.push(p.expr()?);
    }
    if p.pos != p.tokens.len() {
        return Err(p.error("`;` or end of input"));
    }
    Ok(LawExpr { n, components })
}
