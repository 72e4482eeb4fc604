//! Routing and solving: direct evaluation, exact-rational Gaussian
//! elimination, and univariate quadratics.

use super::ast::{evaluate, Expr};
use super::classify::{classify, equation_poly, Poly, SystemForm};
use super::{Assignment, EngineError, EquationSystem, SolveResult, SolvedValue};
use crate::rational::{to_f64, Rational};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

/// Residual bound for back-substitution verification of returned solutions.
const VERIFY_TOLERANCE: f64 = 1e-9;

/// Solve an equation system.
///
/// Routing: direct assignments are evaluated; linear systems go through
/// exact Gaussian elimination with partial pivoting; one-unknown quadratics
/// use the quadratic formula (roots ascending, exact when the discriminant
/// is a perfect rational square); everything else is unsolvable. Every
/// returned assignment has been checked by back-substitution.
pub fn solve(system: &EquationSystem) -> SolveResult {
    if system.equations.is_empty() {
        return SolveResult::Invalid("empty equation system".to_string());
    }
    for eq in &system.equations {
        if eq.lhs.contains_slot() || eq.rhs.contains_slot() {
            return SolveResult::Invalid("uninstantiated slot token".to_string());
        }
    }
    let result = match classify(system) {
        SystemForm::DirectAssignment => solve_direct(system),
        SystemForm::Linear => solve_linear(system),
        SystemForm::UnivariateQuadratic => solve_quadratic(system),
        SystemForm::Nonlinear => SolveResult::Unsolvable("unsupported nonlinear form".to_string()),
    };
    match result {
        SolveResult::Solved(assignments) => {
            let verified: Vec<Assignment> = assignments
                .into_iter()
                .filter(|a| verify(system, a))
                .collect();
            if verified.is_empty() {
                SolveResult::Unsolvable("no candidate assignment satisfies every equation".to_string())
            } else {
                SolveResult::Solved(verified)
            }
        }
        other => other,
    }
}

fn solve_direct(system: &EquationSystem) -> SolveResult {
    let mut assignment = Assignment::new();
    for eq in &system.equations {
        let name = match &eq.lhs {
            Expr::Unknown(name) => name.clone(),
            _ => unreachable!("classify guarantees direct-assignment shape"),
        };
        match evaluate(&eq.rhs, &BTreeMap::new()) {
            Ok(value) => {
                assignment.insert(name, SolvedValue::Exact(value));
            }
            Err(EngineError::DivisionByZero) => {
                return SolveResult::Unsolvable("division by zero".to_string())
            }
            Err(err) => return SolveResult::Invalid(err.to_string()),
        }
    }
    SolveResult::Solved(vec![assignment])
}

fn solve_linear(system: &EquationSystem) -> SolveResult {
    let unknowns = &system.unknowns;
    let n = unknowns.len();
    // rows of [coefficients | rhs] for sum(c_i * x_i) = -constant
    let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::with_capacity(system.equations.len());
    for eq in &system.equations {
        let poly = match equation_poly(eq) {
            Ok(p) => p,
            Err(_) => return SolveResult::Unsolvable("unsupported nonlinear form".to_string()),
        };
        let coeffs: Vec<Rational> = unknowns.iter().map(|u| poly.linear_coefficient(u)).collect();
        rows.push((coeffs, -poly.constant_term()));
    }

    let m = rows.len();
    let mut pivot_row = 0usize;
    for col in 0..n {
        // partial pivoting: largest absolute coefficient in this column
        let mut best: Option<usize> = None;
        for (r, row) in rows.iter().enumerate().skip(pivot_row) {
            if row.0[col].is_zero() {
                continue;
            }
            match best {
                Some(b) if rows[b].0[col].abs() >= row.0[col].abs() => {}
                _ => best = Some(r),
            }
        }
        let Some(best) = best else { continue };
        rows.swap(pivot_row, best);
        let pivot = rows[pivot_row].0[col].clone();
        for r in pivot_row + 1..m {
            if rows[r].0[col].is_zero() {
                continue;
            }
            let factor = &rows[r].0[col] / &pivot;
            for c in col..n {
                let delta = &factor * &rows[pivot_row].0[c];
                rows[r].0[c] -= delta;
            }
            let delta = &factor * &rows[pivot_row].1;
            rows[r].1 -= delta;
        }
        pivot_row += 1;
        if pivot_row == m {
            break;
        }
    }
    let rank = pivot_row;

    // rows below the pivot block must have collapsed to 0 = 0
    for (coeffs, rhs) in rows.iter().skip(rank) {
        if coeffs.iter().all(Rational::is_zero) && !rhs.is_zero() {
            return SolveResult::Unsolvable("inconsistent system".to_string());
        }
    }
    if rank < n {
        return SolveResult::Degenerate("underdetermined system".to_string());
    }

    // back substitution; with full rank, row i pivots on column i
    let mut values: Vec<Rational> = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = rows[i].1.clone();
        for c in i + 1..n {
            acc -= &rows[i].0[c] * &values[c];
        }
        values[i] = acc / &rows[i].0[i];
    }
    let assignment: Assignment = unknowns
        .iter()
        .cloned()
        .zip(values.into_iter().map(SolvedValue::Exact))
        .collect();
    SolveResult::Solved(vec![assignment])
}

fn solve_quadratic(system: &EquationSystem) -> SolveResult {
    let unknown = system.unknowns[0].clone();
    let polys: Vec<Poly> = match system.equations.iter().map(equation_poly).collect() {
        Ok(p) => p,
        Err(_) => return SolveResult::Unsolvable("unsupported nonlinear form".to_string()),
    };
    let quad = polys
        .iter()
        .find(|p| p.degree() == 2)
        .expect("classify guarantees a degree-2 equation");
    let a = quad.power_coefficient(&unknown, 2);
    let b = quad.power_coefficient(&unknown, 1);
    let c = quad.power_coefficient(&unknown, 0);
    let discriminant = &b * &b - Rational::from_integer(4.into()) * &a * &c;
    if discriminant.is_negative() {
        return SolveResult::Unsolvable("no real root".to_string());
    }

    let two_a = Rational::from_integer(2.into()) * &a;
    let mut roots: Vec<SolvedValue> = Vec::new();
    if discriminant.is_zero() {
        roots.push(SolvedValue::Exact(-&b / &two_a));
    } else if let Some(sqrt) = exact_sqrt(&discriminant) {
        let r1 = (-&b - &sqrt) / &two_a;
        let r2 = (-&b + &sqrt) / &two_a;
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        roots.push(SolvedValue::Exact(lo));
        roots.push(SolvedValue::Exact(hi));
    } else {
        let sqrt = to_f64(&discriminant).sqrt();
        let bf = to_f64(&b);
        let af2 = to_f64(&two_a);
        let r1 = (-bf - sqrt) / af2;
        let r2 = (-bf + sqrt) / af2;
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        roots.push(SolvedValue::Approx(lo));
        roots.push(SolvedValue::Approx(hi));
    }

    // a multi-equation system keeps only roots satisfying every equation;
    // the shared verification pass below does that filtering
    let assignments: Vec<Assignment> = roots
        .into_iter()
        .map(|root| {
            let mut assignment = Assignment::new();
            assignment.insert(unknown.clone(), root);
            assignment
        })
        .collect();
    SolveResult::Solved(assignments)
}

/// Square root of a non-negative rational, when it is itself rational.
fn exact_sqrt(value: &Rational) -> Option<Rational> {
    let numer = value.numer();
    let denom = value.denom();
    let sn = numer.sqrt();
    let sd = denom.sqrt();
    if &(&sn * &sn) == numer && &(&sd * &sd) == denom {
        Some(Rational::new(sn, sd))
    } else {
        None
    }
}

/// Back-substitute an assignment into every equation. Exact assignments
/// must satisfy the equations exactly; approximate ones within 1e-9.
fn verify(system: &EquationSystem, assignment: &Assignment) -> bool {
    let all_exact = assignment.values().all(|v| matches!(v, SolvedValue::Exact(_)));
    if all_exact {
        let exact: BTreeMap<String, Rational> = assignment
            .iter()
            .map(|(k, v)| (k.clone(), v.as_exact().unwrap().clone()))
            .collect();
        system.equations.iter().all(|eq| {
            match (evaluate(&eq.lhs, &exact), evaluate(&eq.rhs, &exact)) {
                (Ok(l), Ok(r)) => l == r,
                _ => false,
            }
        })
    } else {
        let approx: BTreeMap<String, f64> =
            assignment.iter().map(|(k, v)| (k.clone(), v.as_f64())).collect();
        system.equations.iter().all(|eq| {
            match (eval_f64(&eq.lhs, &approx), eval_f64(&eq.rhs, &approx)) {
                (Some(l), Some(r)) => (l - r).abs() < VERIFY_TOLERANCE,
                _ => false,
            }
        })
    }
}

fn eval_f64(expr: &Expr, assignment: &BTreeMap<String, f64>) -> Option<f64> {
    match expr {
        Expr::Literal(r) => Some(to_f64(r)),
        Expr::Slot(_) => None,
        Expr::Unknown(name) => assignment.get(name).copied(),
        Expr::Neg(inner) => Some(-eval_f64(inner, assignment)?),
        Expr::Binary(op, lhs, rhs) => {
            let l = eval_f64(lhs, assignment)?;
            let r = eval_f64(rhs, assignment)?;
            use super::ast::BinaryOp::*;
            let v = match op {
                Add => l + r,
                Sub => l - r,
                Mul => l * r,
                Div => {
                    if r == 0.0 {
                        return None;
                    }
                    l / r
                }
                Pow => l.powf(r),
            };
            v.is_finite().then_some(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{lex_equation, parse_infix};
    use super::*;
    use crate::rational::{int, ratio};

    fn system(sources: &[&str]) -> EquationSystem {
        let eqs = sources
            .iter()
            .map(|s| parse_infix(&lex_equation(s).unwrap()).unwrap())
            .collect();
        EquationSystem::new(eqs)
    }

    fn single_solution(result: &SolveResult) -> &Assignment {
        match result {
            SolveResult::Solved(assignments) if assignments.len() == 1 => &assignments[0],
            other => panic!("expected one solution, got {other:?}"),
        }
    }

    #[test]
    fn paper_single_equation() {
        let result = solve(&system(&["x = 26 - 9"]));
        let a = single_solution(&result);
        assert_eq!(a["x"], SolvedValue::Exact(int(17)));
    }

    #[test]
    fn paper_linear_pair() {
        let result = solve(&system(&["7.5*x+6.5*y=82", "x+y=12"]));
        let a = single_solution(&result);
        assert_eq!(a["x"], SolvedValue::Exact(int(4)));
        assert_eq!(a["y"], SolvedValue::Exact(int(8)));
    }

    #[test]
    fn inconsistent_system() {
        let result = solve(&system(&["x + 1 = x + 2"]));
        assert_eq!(result, SolveResult::Unsolvable("inconsistent system".to_string()));
    }

    #[test]
    fn underdetermined_system() {
        let result = solve(&system(&["x + y = 3"]));
        assert_eq!(result, SolveResult::Degenerate("underdetermined system".to_string()));
    }

    #[test]
    fn quadratic_two_roots_ascending() {
        let result = solve(&system(&["x^2 = 4"]));
        match &result {
            SolveResult::Solved(assignments) => {
                assert_eq!(assignments.len(), 2);
                assert_eq!(assignments[0]["x"], SolvedValue::Exact(int(-2)));
                assert_eq!(assignments[1]["x"], SolvedValue::Exact(int(2)));
                // substitute both roots back
                for a in assignments {
                    let v = a["x"].as_exact().unwrap();
                    assert_eq!(v * v, int(4));
                }
            }
            other => panic!("expected two roots, got {other:?}"),
        }
    }

    #[test]
    fn quadratic_repeated_and_irrational_roots() {
        let result = solve(&system(&["x^2 - 2*x + 1 = 0"]));
        let a = single_solution(&result);
        assert_eq!(a["x"], SolvedValue::Exact(int(1)));

        let result = solve(&system(&["x^2 = 2"]));
        match result {
            SolveResult::Solved(assignments) => {
                assert_eq!(assignments.len(), 2);
                let lo = assignments[0]["x"].as_f64();
                let hi = assignments[1]["x"].as_f64();
                assert!((lo + 2f64.sqrt()).abs() < 1e-12);
                assert!((hi - 2f64.sqrt()).abs() < 1e-12);
            }
            other => panic!("expected roots, got {other:?}"),
        }
    }

    #[test]
    fn quadratic_no_real_root() {
        assert_eq!(
            solve(&system(&["x^2 = - 1"])),
            SolveResult::Unsolvable("no real root".to_string())
        );
    }

    #[test]
    fn quadratic_with_constraining_equation_filters_roots() {
        let result = solve(&system(&["x^2 = 4", "x = 2"]));
        match result {
            SolveResult::Solved(assignments) => {
                assert_eq!(assignments.len(), 1);
                assert_eq!(assignments[0]["x"], SolvedValue::Exact(int(2)));
            }
            other => panic!("expected filtered root, got {other:?}"),
        }
    }

    #[test]
    fn nonlinear_is_unsolvable() {
        assert_eq!(
            solve(&system(&["x*y = 1", "x+y = 2"])),
            SolveResult::Unsolvable("unsupported nonlinear form".to_string())
        );
    }

    #[test]
    fn division_by_zero_becomes_unsolvable() {
        assert_eq!(
            solve(&system(&["x = 1 / 0"])),
            SolveResult::Unsolvable("division by zero".to_string())
        );
        // division by an expression that collapses to zero
        assert_eq!(
            solve(&system(&["x = 5 / ( 3 - 3 )"])),
            SolveResult::Unsolvable("division by zero".to_string())
        );
    }

    #[test]
    fn rational_division_is_exact() {
        let result = solve(&system(&["x = 15 / 2"]));
        let a = single_solution(&result);
        assert_eq!(a["x"], SolvedValue::Exact(ratio(15, 2)));
    }

    #[test]
    fn duplicated_row_is_degenerate_not_solved() {
        let result = solve(&system(&["x + y = 3", "2*x + 2*y = 6"]));
        assert_eq!(result, SolveResult::Degenerate("underdetermined system".to_string()));
    }
}
