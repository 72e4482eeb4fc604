//! Conversions between equation ASTs and prefix/postfix token sequences.
//!
//! Unary negation is spelled `neg` in these streams so it never collides
//! with binary `-`. Both directions are exact inverses on valid input.

use super::ast::Expr;
use super::token::{classify, TokenKind, NEG_TOKEN};
use super::{EngineError, Equation};
use crate::rational::format_rational;

pub fn to_prefix(eq: &Equation) -> Vec<String> {
    let mut out = vec!["=".to_string()];
    prefix_expr(&eq.lhs, &mut out);
    prefix_expr(&eq.rhs, &mut out);
    out
}

fn prefix_expr(expr: &Expr, out: &mut Vec<String>) {
    match expr {
        Expr::Literal(r) => out.push(format_rational(r)),
        Expr::Slot(k) => out.push(format!("NUM_{k}")),
        Expr::Unknown(name) => out.push(name.clone()),
        Expr::Neg(inner) => {
            out.push(NEG_TOKEN.to_string());
            prefix_expr(inner, out);
        }
        Expr::Binary(op, lhs, rhs) => {
            out.push(op.symbol().to_string());
            prefix_expr(lhs, out);
            prefix_expr(rhs, out);
        }
    }
}

pub fn to_postfix(eq: &Equation) -> Vec<String> {
    let mut out = Vec::new();
    postfix_expr(&eq.lhs, &mut out);
    postfix_expr(&eq.rhs, &mut out);
    out.push("=".to_string());
    out
}

fn postfix_expr(expr: &Expr, out: &mut Vec<String>) {
    match expr {
        Expr::Literal(r) => out.push(format_rational(r)),
        Expr::Slot(k) => out.push(format!("NUM_{k}")),
        Expr::Unknown(name) => out.push(name.clone()),
        Expr::Neg(inner) => {
            postfix_expr(inner, out);
            out.push(NEG_TOKEN.to_string());
        }
        Expr::Binary(op, lhs, rhs) => {
            postfix_expr(lhs, out);
            postfix_expr(rhs, out);
            out.push(op.symbol().to_string());
        }
    }
}

pub fn from_prefix(tokens: &[String]) -> Result<Equation, EngineError> {
    let mut pos = 0;
    if tokens.first().map(String::as_str) != Some("=") {
        return Err(EngineError::MalformedStream("prefix stream must start with '='".into()));
    }
    pos += 1;
    let lhs = prefix_parse(tokens, &mut pos)?;
    let rhs = prefix_parse(tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(EngineError::MalformedStream(format!(
            "{} leftover token(s) after the equation",
            tokens.len() - pos
        )));
    }
    let eq = Equation::new(lhs, rhs);
    eq.lhs.validate_exponents()?;
    eq.rhs.validate_exponents()?;
    Ok(eq)
}

fn prefix_parse(tokens: &[String], pos: &mut usize) -> Result<Expr, EngineError> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| EngineError::MalformedStream("stream ended mid-expression".into()))?;
    *pos += 1;
    match classify(tok) {
        Some(TokenKind::Literal(v)) => Ok(Expr::Literal(v)),
        Some(TokenKind::Slot(k)) => Ok(Expr::Slot(k)),
        Some(TokenKind::Unknown(name)) => Ok(Expr::Unknown(name)),
        Some(TokenKind::Neg) => Ok(Expr::neg(prefix_parse(tokens, pos)?)),
        Some(TokenKind::Op(op)) => {
            let lhs = prefix_parse(tokens, pos)?;
            let rhs = prefix_parse(tokens, pos)?;
            Ok(Expr::binary(op, lhs, rhs))
        }
        _ => Err(EngineError::MalformedStream(format!("unexpected token '{tok}'"))),
    }
}

pub fn from_postfix(tokens: &[String]) -> Result<Equation, EngineError> {
    let mut stack: Vec<Expr> = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        match classify(tok) {
            Some(TokenKind::Literal(v)) => stack.push(Expr::Literal(v)),
            Some(TokenKind::Slot(k)) => stack.push(Expr::Slot(k)),
            Some(TokenKind::Unknown(name)) => stack.push(Expr::Unknown(name)),
            Some(TokenKind::Neg) => {
                let inner = stack
                    .pop()
                    .ok_or_else(|| EngineError::MalformedStream("missing operand for 'neg'".into()))?;
                stack.push(Expr::neg(inner));
            }
            Some(TokenKind::Op(op)) => {
                let rhs = stack
                    .pop()
                    .ok_or_else(|| EngineError::MalformedStream(format!("missing operand for '{tok}'")))?;
                let lhs = stack
                    .pop()
                    .ok_or_else(|| EngineError::MalformedStream(format!("missing operand for '{tok}'")))?;
                stack.push(Expr::binary(op, lhs, rhs));
            }
            Some(TokenKind::Equals) => {
                if i + 1 != tokens.len() {
                    return Err(EngineError::MalformedStream("'=' before the end of the stream".into()));
                }
                let rhs = stack
                    .pop()
                    .ok_or_else(|| EngineError::MalformedStream("missing right side".into()))?;
                let lhs = stack
                    .pop()
                    .ok_or_else(|| EngineError::MalformedStream("missing left side".into()))?;
                if !stack.is_empty() {
                    return Err(EngineError::MalformedStream(format!(
                        "{} leftover operand(s)",
                        stack.len()
                    )));
                }
                let eq = Equation::new(lhs, rhs);
                eq.lhs.validate_exponents()?;
                eq.rhs.validate_exponents()?;
                return Ok(eq);
            }
            _ => return Err(EngineError::MalformedStream(format!("unexpected token '{tok}'"))),
        }
    }
    Err(EngineError::MalformedStream("stream has no '='".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::parser::parse_infix;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn textbook_prefix_of_paper_equation() {
        let eq = parse_infix(&toks("x = 26 - 9")).unwrap();
        assert_eq!(to_prefix(&eq), toks("= x - 26 9"));
        assert_eq!(to_postfix(&eq), toks("x 26 9 - ="));
    }

    #[test]
    fn round_trips_parsed_equation() {
        let eq = parse_infix(&lex_toks("7.5*x+6.5*y=82")).unwrap();
        assert_eq!(from_prefix(&to_prefix(&eq)).unwrap(), eq);
        assert_eq!(from_postfix(&to_postfix(&eq)).unwrap(), eq);
    }

    fn lex_toks(s: &str) -> Vec<String> {
        super::super::parser::lex_equation(s).unwrap()
    }

    #[test]
    fn negation_is_unambiguous() {
        let eq = parse_infix(&toks("x = - 5 - 3")).unwrap();
        assert_eq!(to_prefix(&eq), toks("= x - neg 5 3"));
        assert_eq!(from_prefix(&toks("= x - neg 5 3")).unwrap(), eq);
        assert_eq!(from_postfix(&to_postfix(&eq)).unwrap(), eq);
    }

    #[test]
    fn rejects_arity_mismatches_and_leftovers() {
        assert!(from_prefix(&toks("= x -")).is_err());
        assert!(from_prefix(&toks("= x 1 2")).is_err());
        assert!(from_prefix(&toks("x 1")).is_err());
        assert!(from_postfix(&toks("x 1 2 =")).is_err());
        assert!(from_postfix(&toks("x + =")).is_err());
        assert!(from_postfix(&toks("x 1 =  2")).is_err());
        assert!(from_postfix(&toks("x 1")).is_err());
    }
}
