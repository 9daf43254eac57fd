use thiserror::Error;

use super::{BinOp, CmpOp, Expr, LogicOp};
use crate::num::parse_decimal;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unsupported operator `{op}` at position {pos}")]
    Unsupported { pos: usize, op: String },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    End,
}

struct Token {
    tok: Tok,
    pos: usize,
}

const OPS: &[&str] = &["**", "==", "!=", "<=", ">=", "<", ">", "+", "-", "*", "/", "&", "|", "^", "~"];
const UNSUPPORTED: &[&str] = &["//", "%", "<<", ">>", "@", "=", "!", ",", "[", "]", "{", "}"];

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Num(src[start..i].to_string()), pos: start });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), pos: start });
            continue;
        }
        match c {
            b'(' => {
                out.push(Token { tok: Tok::LParen, pos: i });
                i += 1;
                continue;
            }
            b')' => {
                out.push(Token { tok: Tok::RParen, pos: i });
                i += 1;
                continue;
            }
            _ => {}
        }
        let rest = &src[i..];
        if let Some(op) = UNSUPPORTED
            .iter()
            .find(|op| rest.starts_with(**op) && !OPS.iter().any(|o| rest.starts_with(o) && o.len() >= op.len()))
        {
            return Err(ParseError::Unsupported { pos: i, op: op.to_string() });
        }
        match OPS.iter().find(|op| rest.starts_with(**op)) {
            Some(op) => {
                out.push(Token { tok: Tok::Op(op), pos: i });
                i += op.len();
            }
            None => {
                let ch = rest.chars().next().unwrap_or('?');
                return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{ch}`") });
            }
        }
    }
    out.push(Token { tok: Tok::End, pos: src.len() });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

/// Parses an expression with the precedence, loosest first: conditional,
/// `|`/`or`, `^`, `&`/`and`, `not`, comparison (non-chaining), `+ -`,
/// `* /`, unary `- ~`, `**` (right associative).
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: tokenize(src)?, at: 0 };
    let e = p.conditional()?;
    match &p.peek().tok {
        Tok::End => Ok(e),
        _ => Err(p.error("unexpected trailing input")),
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> &Token {
        let t = &self.toks[self.at];
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, msg: &str) -> ParseError {
        ParseError::Syntax { pos: self.peek().pos, msg: msg.to_string() }
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(&self.peek().tok, Tok::Op(o) if *o == op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn conditional(&mut self) -> Result<Expr, ParseError> {
        let then = self.or_expr()?;
        if self.is_kw("if") {
            self.bump();
            let cond = self.or_expr()?;
            if !self.is_kw("else") {
                return Err(self.error("expected `else` in conditional expression"));
            }
            self.bump();
            let otherwise = self.conditional()?;
            return Ok(Expr::ite(cond, then, otherwise));
        }
        Ok(then)
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.xor_expr()?;
        while self.is_op("|") || self.is_kw("or") {
            self.bump();
            let rhs = self.xor_expr()?;
            lhs = Expr::Logic(LogicOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn xor_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.is_op("^") {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Expr::Logic(LogicOp::Xor, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not_expr()?;
        while self.is_op("&") || self.is_kw("and") {
            self.bump();
            let rhs = self.not_expr()?;
            lhs = Expr::Logic(LogicOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.is_kw("not") {
            self.bump();
            let inner = self.not_expr()?;
            return Ok(Expr::not(inner));
        }
        self.comparison()
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match &self.peek().tok {
            Tok::Op("==") => Some(CmpOp::Eq),
            Tok::Op("!=") => Some(CmpOp::Ne),
            Tok::Op("<") => Some(CmpOp::Lt),
            Tok::Op("<=") => Some(CmpOp::Le),
            Tok::Op(">") => Some(CmpOp::Gt),
            Tok::Op(">=") => Some(CmpOp::Ge),
            _ => None,
        }
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        if let Some(op) = self.cmp_op() {
            self.bump();
            let rhs = self.additive()?;
            if self.cmp_op().is_some() {
                let pos = self.peek().pos;
                return Err(ParseError::Unsupported { pos, op: "chained comparison".into() });
            }
            return Ok(Expr::cmp(op, lhs, rhs));
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = if self.is_op("+") {
                BinOp::Add
            } else if self.is_op("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.is_op("*") {
                BinOp::Mul
            } else if self.is_op("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_op("-") {
            self.bump();
            // `-3` is a negative literal, `-3**2` is `-(3**2)`.
            if let Tok::Num(text) = self.peek().tok.clone() {
                if !matches!(self.peek_at(1), Tok::Op("**")) {
                    let pos = self.peek().pos;
                    self.bump();
                    let r = parse_decimal(&text)
                        .ok_or(ParseError::Syntax { pos, msg: format!("malformed number `{text}`") })?;
                    return Ok(Expr::Num(-r));
                }
            }
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        if self.is_op("+") {
            self.bump();
            return self.unary();
        }
        if self.is_op("~") {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::not(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.is_op("**") {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Token { tok, pos } = self.bump();
        let pos = *pos;
        match tok.clone() {
            Tok::Num(text) => parse_decimal(&text)
                .map(Expr::Num)
                .ok_or(ParseError::Syntax { pos, msg: format!("malformed number `{text}`") }),
            Tok::Ident(name) => match name.as_str() {
                "True" => Ok(Expr::Bool(true)),
                "False" => Ok(Expr::Bool(false)),
                "if" | "else" | "and" | "or" | "not" => {
                    Err(ParseError::Syntax { pos, msg: format!("unexpected keyword `{name}`") })
                }
                _ => {
                    if matches!(self.peek().tok, Tok::LParen) {
                        return Err(ParseError::Unsupported { pos, op: format!("function call `{name}(...)`") });
                    }
                    Ok(Expr::Var(name))
                }
            },
            Tok::LParen => {
                let e = self.conditional()?;
                if !matches!(self.peek().tok, Tok::RParen) {
                    return Err(self.error("expected `)`"));
                }
                self.bump();
                Ok(e)
            }
            Tok::RParen => Err(ParseError::Syntax { pos, msg: "unexpected `)`".into() }),
            Tok::Op(op) => Err(ParseError::Syntax { pos, msg: format!("unexpected operator `{op}`") }),
            Tok::End => Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }
}
