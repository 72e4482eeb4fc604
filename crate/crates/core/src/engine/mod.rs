//! Equation algebra: grammar, AST, sequence-format conversions, template
//! instantiation, exact evaluation, and solving.
//!
//! Everything in here works over exact rationals. Floating point appears
//! only in `SolvedValue::Approx`, which carries irrational quadratic roots.

mod ast;
mod classify;
mod convert;
mod parser;
mod solve;
mod token;

pub use ast::{evaluate, render_infix, render_infix_expr, BinaryOp, Expr};
pub use classify::{classify, SystemForm};
pub use convert::{from_postfix, from_prefix, to_postfix, to_prefix};
pub use parser::{lex_equation, parse_infix, parse_system_tokens};
pub use solve::solve;
pub use token::{slot_index, unknown_name, BRIDGE_TOKEN};

use crate::rational::{format_rational, to_f64, Rational};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("syntax error at token {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("equation contains more than one '='")]
    MultipleEquals,
    #[error("equation side is empty")]
    EmptySide,
    #[error("malformed token stream: {0}")]
    MalformedStream(String),
    #[error("template references slot NUM_{0} outside the slot table")]
    UnknownSlot(usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown '{0}' has no assigned value")]
    UnassignedUnknown(String),
    #[error("slot token NUM_{0} was never instantiated")]
    UnresolvedSlot(usize),
    #[error("exponent must be an integer literal with magnitude at most {MAX_EXPONENT}: {0}")]
    InvalidExponent(String),
}

/// Largest exponent magnitude the grammar admits. Keeps symbolic expansion
/// and classification exact and bounded.
pub const MAX_EXPONENT: i64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub lhs: Expr,
    pub rhs: Expr,
}

impl Equation {
    pub fn new(lhs: Expr, rhs: Expr) -> Self {
        Equation { lhs, rhs }
    }

    /// Unknown names in order of first appearance, left side first.
    pub fn unknowns(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.lhs.collect_unknowns(&mut out);
        self.rhs.collect_unknowns(&mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationSystem {
    pub equations: Vec<Equation>,
    /// Union of the equations' unknowns, ordered by first appearance.
    pub unknowns: Vec<String>,
}

impl EquationSystem {
    pub fn new(equations: Vec<Equation>) -> Self {
        let mut unknowns = Vec::new();
        for eq in &equations {
            for name in eq.unknowns() {
                if !unknowns.contains(&name) {
                    unknowns.push(name);
                }
            }
        }
        EquationSystem { equations, unknowns }
    }

    pub fn single(equation: Equation) -> Self {
        Self::new(vec![equation])
    }
}

/// A solved value: exact when the algebra permits, floating point only for
/// irrational quadratic roots.
#[derive(Debug, Clone, PartialEq)]
pub enum SolvedValue {
    Exact(Rational),
    Approx(f64),
}

impl SolvedValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            SolvedValue::Exact(r) => to_f64(r),
            SolvedValue::Approx(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            SolvedValue::Exact(r) => Some(r),
            SolvedValue::Approx(_) => None,
        }
    }
}

impl fmt::Display for SolvedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolvedValue::Exact(r) => write!(f, "{}", format_rational(r)),
            SolvedValue::Approx(v) => write!(f, "{v}"),
        }
    }
}

/// One assignment of every unknown to a value.
pub type Assignment = BTreeMap<String, SolvedValue>;

/// Outcome of solving an equation system.
///
/// `Solved` carries one assignment per solution (quadratics may have two).
/// The failure variants carry a human-readable reason; reasons for distinct
/// failure classes never collide.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveResult {
    Solved(Vec<Assignment>),
    Invalid(String),
    Unsolvable(String),
    Degenerate(String),
}

impl SolveResult {
    pub fn failure_reason(&self) -> Option<String> {
        match self {
            SolveResult::Solved(_) => None,
            SolveResult::Invalid(r) => Some(format!("invalid: {r}")),
            SolveResult::Unsolvable(r) => Some(format!("unsolvable: {r}")),
            SolveResult::Degenerate(r) => Some(format!("degenerate: {r}")),
        }
    }
}

/// Replace every `NUM_k` token with the literal value of slot `k`, then parse.
///
/// Bridged templates produce multi-equation systems. Slot indices outside
/// the table are an `UnknownSlot` error.
pub fn instantiate(template: &[String], slot_values: &[Rational]) -> Result<EquationSystem, EngineError> {
    let mut resolved = Vec::with_capacity(template.len());
    for tok in template {
        match token::slot_index(tok) {
            Some(k) => {
                let value = slot_values.get(k).ok_or(EngineError::UnknownSlot(k))?;
                resolved.push(format_rational(value));
            }
            None => resolved.push(tok.clone()),
        }
    }
    parse_system_tokens(&resolved)
}
