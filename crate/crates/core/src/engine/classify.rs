//! Symbolic expansion of equations into multivariate polynomials, used to
//! route systems to the right solver.

use super::ast::{BinaryOp, Expr};
use super::{Equation, EquationSystem};
use crate::rational::Rational;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Solvable-form descriptor for an equation system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemForm {
    /// Every equation is `u = expr` with an unknown-free right side and
    /// distinct left-side unknowns; solvable by evaluation alone.
    DirectAssignment,
    /// After expansion, every equation has degree at most 1 in the unknowns.
    Linear,
    /// One unknown, maximum degree exactly 2.
    UnivariateQuadratic,
    /// Anything else, including forms that do not expand to polynomials.
    Nonlinear,
}

/// Variable name -> power; the empty map is the constant monomial.
pub(super) type Monomial = BTreeMap<String, u32>;

/// Multivariate polynomial with exact rational coefficients.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub(super) struct Poly {
    pub terms: BTreeMap<Monomial, Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum ExpandError {
    UnresolvedSlot,
    NonPolynomial,
}

impl Poly {
    fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    fn constant(value: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(Monomial::new(), value);
        }
        Poly { terms }
    }

    fn variable(name: &str) -> Self {
        let mut mono = Monomial::new();
        mono.insert(name.to_string(), 1);
        let mut terms = BTreeMap::new();
        terms.insert(mono, Rational::from_integer(1.into()));
        Poly { terms }
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (mono, coeff) in &other.terms {
            let entry = terms.entry(mono.clone()).or_insert_with(Rational::zero);
            *entry += coeff;
            if entry.is_zero() {
                terms.remove(mono);
            }
        }
        Poly { terms }
    }

    fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut mono = ma.clone();
                for (var, pow) in mb {
                    *mono.entry(var.clone()).or_insert(0) += pow;
                }
                let entry = out.terms.entry(mono).or_insert_with(Rational::zero);
                *entry += ca * cb;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    fn scale(&self, factor: &Rational) -> Poly {
        if factor.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * factor)).collect(),
        }
    }

    fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::new()).cloned(),
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|mono| mono.values().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for mono in self.terms.keys() {
            for var in mono.keys() {
                if !out.contains(var) {
                    out.push(var.clone());
                }
            }
        }
        out
    }

    /// Coefficient of the degree-1 monomial in `var`.
    pub fn linear_coefficient(&self, var: &str) -> Rational {
        let mut mono = Monomial::new();
        mono.insert(var.to_string(), 1);
        self.terms.get(&mono).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Monomial::new()).cloned().unwrap_or_else(Rational::zero)
    }

    /// Coefficient of `var^power`.
    pub fn power_coefficient(&self, var: &str, power: u32) -> Rational {
        if power == 0 {
            return self.constant_term();
        }
        let mut mono = Monomial::new();
        mono.insert(var.to_string(), power);
        self.terms.get(&mono).cloned().unwrap_or_else(Rational::zero)
    }
}

pub(super) fn expand(expr: &Expr) -> Result<Poly, ExpandError> {
    match expr {
        Expr::Literal(r) => Ok(Poly::constant(r.clone())),
        Expr::Slot(_) => Err(ExpandError::UnresolvedSlot),
        Expr::Unknown(name) => Ok(Poly::variable(name)),
        Expr::Neg(inner) => Ok(expand(inner)?.neg()),
        Expr::Binary(op, lhs, rhs) => {
            let left = expand(lhs)?;
            match op {
                BinaryOp::Add => Ok(left.add(&expand(rhs)?)),
                BinaryOp::Sub => Ok(left.sub(&expand(rhs)?)),
                BinaryOp::Mul => Ok(left.mul(&expand(rhs)?)),
                BinaryOp::Div => {
                    let divisor = expand(rhs)?.as_constant().ok_or(ExpandError::NonPolynomial)?;
                    if divisor.is_zero() {
                        return Err(ExpandError::NonPolynomial);
                    }
                    Ok(left.scale(&divisor.recip()))
                }
                BinaryOp::Pow => {
                    let exp = rhs.exponent_value().ok_or(ExpandError::NonPolynomial)?;
                    if exp >= 0 {
                        let mut out = Poly::constant(Rational::from_integer(1.into()));
                        for _ in 0..exp {
                            out = out.mul(&left);
                        }
                        Ok(out)
                    } else {
                        // negative exponent is polynomial only over a constant base
                        let base = left.as_constant().ok_or(ExpandError::NonPolynomial)?;
                        if base.is_zero() {
                            return Err(ExpandError::NonPolynomial);
                        }
                        let mut out = Rational::from_integer(1.into());
                        for _ in 0..(-exp) {
                            out *= &base;
                        }
                        Ok(Poly::constant(out.recip()))
                    }
                }
            }
        }
    }
}

/// Expand `lhs - rhs` of an equation into one polynomial equal to zero.
pub(super) fn equation_poly(eq: &Equation) -> Result<Poly, ExpandError> {
    Ok(expand(&eq.lhs)?.sub(&expand(&eq.rhs)?))
}

fn is_direct_assignment(system: &EquationSystem) -> bool {
    let mut seen: Vec<&str> = Vec::new();
    for eq in &system.equations {
        let name = match &eq.lhs {
            Expr::Unknown(name) => name.as_str(),
            _ => return false,
        };
        if seen.contains(&name) || eq.rhs.has_unknowns() || eq.rhs.contains_slot() {
            return false;
        }
        seen.push(name);
    }
    !system.equations.is_empty()
}

/// Decide which solvable form a system takes.
///
/// Expansion distributes products and collects coefficients, so
/// `x * x = 4` is recognized as degree 2 and `x * y = 1` as a
/// nonlinear cross term.
pub fn classify(system: &EquationSystem) -> SystemForm {
    if is_direct_assignment(system) {
        return SystemForm::DirectAssignment;
    }
    let mut polys = Vec::with_capacity(system.equations.len());
    for eq in &system.equations {
        match equation_poly(eq) {
            Ok(poly) => polys.push(poly),
            Err(_) => return SystemForm::Nonlinear,
        }
    }
    let max_degree = polys.iter().map(Poly::degree).max().unwrap_or(0);
    if max_degree <= 1 {
        return SystemForm::Linear;
    }
    let mut vars: Vec<String> = Vec::new();
    for poly in &polys {
        for var in poly.variables() {
            if !vars.contains(&var) {
                vars.push(var);
            }
        }
    }
    if vars.len() == 1 && max_degree == 2 {
        return SystemForm::UnivariateQuadratic;
    }
    SystemForm::Nonlinear
}

#[cfg(test)]
mod tests {
    use super::super::parser::{lex_equation, parse_infix, parse_system_tokens};
    use super::*;

    fn system(sources: &[&str]) -> EquationSystem {
        let eqs = sources
            .iter()
            .map(|s| parse_infix(&lex_equation(s).unwrap()).unwrap())
            .collect();
        EquationSystem::new(eqs)
    }

    #[test]
    fn paper_single_equation_is_direct() {
        assert_eq!(classify(&system(&["x = 26 - 9"])), SystemForm::DirectAssignment);
    }

    #[test]
    fn paper_pair_is_linear() {
        let s = system(&["7.5*x+6.5*y=82", "x+y=12"]);
        assert_eq!(classify(&s), SystemForm::Linear);
    }

    #[test]
    fn degree_rules_by_hand() {
        // x * x expands to degree 2 in one unknown
        assert_eq!(classify(&system(&["x*x = 4"])), SystemForm::UnivariateQuadratic);
        assert_eq!(classify(&system(&["x^2 = 4"])), SystemForm::UnivariateQuadratic);
        // x * y is a degree-2 cross term over two unknowns
        assert_eq!(classify(&system(&["x*y = 1", "x+y = 2"])), SystemForm::Nonlinear);
        // division by an unknown does not expand
        assert_eq!(classify(&system(&["1/x = 2"])), SystemForm::Nonlinear);
        // products that cancel down to linear still classify as linear
        assert_eq!(classify(&system(&["x*x - x*x + x = 3"])), SystemForm::Linear);
        // x = x is linear (0 = 0 after collection), not direct
        assert_eq!(classify(&system(&["x = x"])), SystemForm::Linear);
    }

    #[test]
    fn repeated_target_is_not_direct() {
        assert_eq!(classify(&system(&["x = 1", "x = 2"])), SystemForm::Linear);
    }

    #[test]
    fn unresolved_slots_are_nonlinear() {
        let toks: Vec<String> = ["x", "=", "NUM_0"].iter().map(|s| s.to_string()).collect();
        let s = parse_system_tokens(&toks).unwrap();
        assert_eq!(classify(&s), SystemForm::Nonlinear);
    }
}
