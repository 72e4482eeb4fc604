use super::{EngineError, Equation, MAX_EXPONENT};
use crate::rational::{format_rational, Rational};
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

/// Expression tree over exact literals, template slots, and unknowns.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(Rational),
    /// Position-aware number slot `NUM_k`, resolved during instantiation.
    Slot(usize),
    Unknown(String),
    Neg(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn neg(inner: Expr) -> Expr {
        Expr::Neg(Box::new(inner))
    }

    pub(super) fn collect_unknowns(&self, out: &mut Vec<String>) {
        match self {
            Expr::Literal(_) | Expr::Slot(_) => {}
            Expr::Unknown(name) => {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
            Expr::Neg(inner) => inner.collect_unknowns(out),
            Expr::Binary(_, lhs, rhs) => {
                lhs.collect_unknowns(out);
                rhs.collect_unknowns(out);
            }
        }
    }

    pub fn has_unknowns(&self) -> bool {
        match self {
            Expr::Unknown(_) => true,
            Expr::Literal(_) | Expr::Slot(_) => false,
            Expr::Neg(inner) => inner.has_unknowns(),
            Expr::Binary(_, lhs, rhs) => lhs.has_unknowns() || rhs.has_unknowns(),
        }
    }

    pub fn contains_slot(&self) -> bool {
        match self {
            Expr::Slot(_) => true,
            Expr::Literal(_) | Expr::Unknown(_) => false,
            Expr::Neg(inner) => inner.contains_slot(),
            Expr::Binary(_, lhs, rhs) => lhs.contains_slot() || rhs.contains_slot(),
        }
    }

    /// Exponent value of a `^` right operand: an integer literal, possibly
    /// under a single negation.
    pub fn exponent_value(&self) -> Option<i64> {
        match self {
            Expr::Literal(r) if r.denom() == &num_bigint::BigInt::from(1) => r.numer().to_i64(),
            Expr::Neg(inner) => inner.exponent_value().map(|v| -v),
            _ => None,
        }
    }

    /// Enforce the grammar restriction on `^`: integer literal exponents
    /// with magnitude at most `MAX_EXPONENT`, everywhere in the tree.
    pub fn validate_exponents(&self) -> Result<(), EngineError> {
        match self {
            Expr::Literal(_) | Expr::Slot(_) | Expr::Unknown(_) => Ok(()),
            Expr::Neg(inner) => inner.validate_exponents(),
            Expr::Binary(BinaryOp::Pow, lhs, rhs) => {
                lhs.validate_exponents()?;
                match rhs.exponent_value() {
                    Some(e) if e.abs() <= MAX_EXPONENT => Ok(()),
                    _ => Err(EngineError::InvalidExponent(render_infix_expr(rhs).join(" "))),
                }
            }
            Expr::Binary(_, lhs, rhs) => {
                lhs.validate_exponents()?;
                rhs.validate_exponents()
            }
        }
    }
}

/// Evaluate an expression under an assignment of unknowns, in exact
/// rational arithmetic. `^` is computed by repeated multiplication.
pub fn evaluate(expr: &Expr, assignment: &BTreeMap<String, Rational>) -> Result<Rational, EngineError> {
    match expr {
        Expr::Literal(r) => Ok(r.clone()),
        Expr::Slot(k) => Err(EngineError::UnresolvedSlot(*k)),
        Expr::Unknown(name) => assignment
            .get(name)
            .cloned()
            .ok_or_else(|| EngineError::UnassignedUnknown(name.clone())),
        Expr::Neg(inner) => Ok(-evaluate(inner, assignment)?),
        Expr::Binary(op, lhs, rhs) => {
            let left = evaluate(lhs, assignment)?;
            match op {
                BinaryOp::Add => Ok(left + evaluate(rhs, assignment)?),
                BinaryOp::Sub => Ok(left - evaluate(rhs, assignment)?),
                BinaryOp::Mul => Ok(left * evaluate(rhs, assignment)?),
                BinaryOp::Div => {
                    let right = evaluate(rhs, assignment)?;
                    if right.is_zero() {
                        Err(EngineError::DivisionByZero)
                    } else {
                        Ok(left / right)
                    }
                }
                BinaryOp::Pow => {
                    let exp = rhs
                        .exponent_value()
                        .filter(|e| e.abs() <= MAX_EXPONENT)
                        .ok_or_else(|| EngineError::InvalidExponent(render_infix_expr(rhs).join(" ")))?;
                    pow_rational(&left, exp)
                }
            }
        }
    }
}

fn pow_rational(base: &Rational, exp: i64) -> Result<Rational, EngineError> {
    let mut out = Rational::from_integer(1.into());
    for _ in 0..exp.abs() {
        out *= base;
    }
    if exp < 0 {
        if base.is_zero() {
            return Err(EngineError::DivisionByZero);
        }
        out = out.recip();
    }
    Ok(out)
}

/// Fully parenthesized infix token stream; parsing it back yields a
/// structurally identical equation.
pub fn render_infix(eq: &Equation) -> Vec<String> {
    let mut out = render_infix_expr(&eq.lhs);
    out.push("=".to_string());
    out.extend(render_infix_expr(&eq.rhs));
    out
}

pub fn render_infix_expr(expr: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    render_expr(expr, &mut out);
    out
}

fn render_expr(expr: &Expr, out: &mut Vec<String>) {
    match expr {
        Expr::Literal(r) => out.push(format_rational(r)),
        Expr::Slot(k) => out.push(format!("NUM_{k}")),
        Expr::Unknown(name) => out.push(name.clone()),
        Expr::Neg(inner) => {
            out.push("(".to_string());
            out.push("-".to_string());
            render_expr(inner, out);
            out.push(")".to_string());
        }
        Expr::Binary(op, lhs, rhs) => {
            out.push("(".to_string());
            render_expr(lhs, out);
            out.push(op.symbol().to_string());
            render_expr(rhs, out);
            out.push(")".to_string());
        }
    }
}

