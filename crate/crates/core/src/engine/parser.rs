use super::ast::{BinaryOp, Expr};
use super::token::{classify, TokenKind, BRIDGE_TOKEN};
use super::{EngineError, Equation, EquationSystem};

/// Lex a raw equation string into grammar tokens.
///
/// Handles both spaced canonical text (`x = 26 - 9`) and the compact forms
/// found in dataset dumps (`7.5*x+6.5*y=82`). Unicode operator variants are
/// normalized, and a number directly abutting an identifier or `(` gets an
/// explicit `*` inserted (`7.5x` lexes as `7.5 * x`).
pub fn lex_equation(text: &str) -> Result<Vec<String>, EngineError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '+' | '*' | '/' | '^' | '=' | '(' | ')' | '-' => {
                tokens.push(c.to_string());
                i += 1;
            }
            '×' => {
                tokens.push("*".to_string());
                i += 1;
            }
            '÷' => {
                tokens.push("/".to_string());
                i += 1;
            }
            '−' => {
                tokens.push("-".to_string());
                i += 1;
            }
            '<' => {
                let rest: String = chars[i..].iter().take(BRIDGE_TOKEN.chars().count()).collect();
                if rest == BRIDGE_TOKEN {
                    tokens.push(BRIDGE_TOKEN.to_string());
                    i += BRIDGE_TOKEN.chars().count();
                } else {
                    return Err(EngineError::Syntax {
                        position: tokens.len(),
                        message: format!("unexpected character '{c}'"),
                    });
                }
            }
            _ if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && chars[i] == '%' {
                    i += 1;
                }
                tokens.push(chars[start..i].iter().collect());
                // implicit multiplication: 7.5x, 2(x+1)
                if i < chars.len() && (chars[i].is_alphabetic() || chars[i] == '_' || chars[i] == '(') {
                    tokens.push("*".to_string());
                }
            }
            _ if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                tokens.push(chars[start..i].iter().collect());
            }
            _ => {
                return Err(EngineError::Syntax {
                    position: tokens.len(),
                    message: format!("unexpected character '{c}'"),
                });
            }
        }
    }
    Ok(tokens)
}

/// Operator entry on the shunting-yard stack.
#[derive(Debug, Clone, Copy, PartialEq)]
enum StackOp {
    Binary(BinaryOp),
    UnaryNeg,
    LParen,
}

fn precedence(op: StackOp) -> u8 {
    match op {
        StackOp::Binary(BinaryOp::Pow) => 4,
        StackOp::UnaryNeg => 3,
        StackOp::Binary(BinaryOp::Mul) | StackOp::Binary(BinaryOp::Div) => 2,
        StackOp::Binary(BinaryOp::Add) | StackOp::Binary(BinaryOp::Sub) => 1,
        StackOp::LParen => 0,
    }
}

fn right_associative(op: StackOp) -> bool {
    matches!(op, StackOp::Binary(BinaryOp::Pow) | StackOp::UnaryNeg)
}

/// Parse one equation from grammar tokens.
///
/// Precedence: `^` above unary minus above `*`/`/` above `+`/`-`;
/// same-precedence binaries associate left, `^` associates right.
pub fn parse_infix(tokens: &[String]) -> Result<Equation, EngineError> {
    let equals_positions: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.as_str() == "=")
        .map(|(i, _)| i)
        .collect();
    match equals_positions.len() {
        0 => {
            return Err(EngineError::Syntax {
                position: tokens.len(),
                message: "missing '='".to_string(),
            })
        }
        1 => {}
        _ => return Err(EngineError::MultipleEquals),
    }
    let split = equals_positions[0];
    let lhs = parse_expression(&tokens[..split], 0)?;
    let rhs = parse_expression(&tokens[split + 1..], split + 1)?;
    let eq = Equation::new(lhs, rhs);
    eq.lhs.validate_exponents()?;
    eq.rhs.validate_exponents()?;
    Ok(eq)
}

/// Shunting-yard over one equation side. `offset` shifts reported error
/// positions back into the caller's token coordinates.
fn parse_expression(tokens: &[String], offset: usize) -> Result<Expr, EngineError> {
    if tokens.is_empty() {
        return Err(EngineError::EmptySide);
    }
    let mut output: Vec<Expr> = Vec::new();
    let mut ops: Vec<StackOp> = Vec::new();
    // true when the next token may start an operand (expression position)
    let mut expect_operand = true;

    let syntax = |i: usize, message: String| EngineError::Syntax { position: offset + i, message };

    for (i, tok) in tokens.iter().enumerate() {
        let kind = classify(tok).ok_or_else(|| syntax(i, format!("unrecognized token '{tok}'")))?;
        match kind {
            TokenKind::Literal(v) => {
                if !expect_operand {
                    return Err(syntax(i, format!("unexpected operand '{tok}'")));
                }
                output.push(Expr::Literal(v));
                expect_operand = false;
            }
            TokenKind::Slot(k) => {
                if !expect_operand {
                    return Err(syntax(i, format!("unexpected operand '{tok}'")));
                }
                output.push(Expr::Slot(k));
                expect_operand = false;
            }
            TokenKind::Unknown(name) => {
                if !expect_operand {
                    return Err(syntax(i, format!("unexpected operand '{tok}'")));
                }
                output.push(Expr::Unknown(name));
                expect_operand = false;
            }
            TokenKind::Op(op) => {
                if expect_operand {
                    if op == BinaryOp::Sub {
                        ops.push(StackOp::UnaryNeg);
                        continue;
                    }
                    return Err(syntax(i, format!("expected operand, found '{tok}'")));
                }
                let new = StackOp::Binary(op);
                while let Some(&top) = ops.last() {
                    let pop = top != StackOp::LParen
                        && (precedence(top) > precedence(new)
                            || (precedence(top) == precedence(new) && !right_associative(new)));
                    if !pop {
                        break;
                    }
                    apply(ops.pop().unwrap(), &mut output).map_err(|m| syntax(i, m))?;
                }
                ops.push(new);
                expect_operand = true;
            }
            TokenKind::LParen => {
                if !expect_operand {
                    return Err(syntax(i, "unexpected '('".to_string()));
                }
                ops.push(StackOp::LParen);
            }
            TokenKind::RParen => {
                if expect_operand {
                    return Err(syntax(i, "expected operand before ')'".to_string()));
                }
                loop {
                    match ops.pop() {
                        Some(StackOp::LParen) => break,
                        Some(op) => apply(op, &mut output).map_err(|m| syntax(i, m))?,
                        None => return Err(syntax(i, "unmatched ')'".to_string())),
                    }
                }
            }
            TokenKind::Equals => return Err(EngineError::MultipleEquals),
            TokenKind::Neg => {
                return Err(syntax(i, "'neg' is reserved for prefix/postfix streams".to_string()))
            }
            TokenKind::Bridge => {
                return Err(syntax(i, "bridge token inside a single equation".to_string()))
            }
        }
    }
    if expect_operand {
        return Err(syntax(tokens.len(), "incomplete expression".to_string()));
    }
    while let Some(op) = ops.pop() {
        if op == StackOp::LParen {
            return Err(syntax(tokens.len(), "unmatched '('".to_string()));
        }
        apply(op, &mut output).map_err(|m| syntax(tokens.len(), m))?;
    }
    match output.len() {
        1 => Ok(output.pop().unwrap()),
        _ => Err(syntax(tokens.len(), "malformed expression".to_string())),
    }
}

fn apply(op: StackOp, output: &mut Vec<Expr>) -> Result<(), String> {
    match op {
        StackOp::UnaryNeg => {
            let inner = output.pop().ok_or("missing operand for unary '-'")?;
            output.push(Expr::neg(inner));
        }
        StackOp::Binary(op) => {
            let rhs = output.pop().ok_or("missing right operand")?;
            let lhs = output.pop().ok_or("missing left operand")?;
            output.push(Expr::binary(op, lhs, rhs));
        }
        StackOp::LParen => return Err("unmatched '('".to_string()),
    }
    Ok(())
}

/// Parse a token stream that may contain bridge separators into a system.
pub fn parse_system_tokens(tokens: &[String]) -> Result<EquationSystem, EngineError> {
    let mut equations = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for tok in tokens {
        if tok == BRIDGE_TOKEN {
            equations.push(parse_infix(&current)?);
            current.clear();
        } else {
            current.push(tok.clone());
        }
    }
    equations.push(parse_infix(&current)?);
    Ok(EquationSystem::new(equations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn lexes_compact_equations() {
        assert_eq!(lex_equation("7.5*x+6.5*y=82").unwrap(), toks("7.5 * x + 6.5 * y = 82"));
        assert_eq!(lex_equation("x = 26 - 9").unwrap(), toks("x = 26 - 9"));
        assert_eq!(lex_equation("7.5x=82").unwrap(), toks("7.5 * x = 82"));
        assert_eq!(lex_equation("2(x+1)=4").unwrap(), toks("2 * ( x + 1 ) = 4"));
        assert_eq!(lex_equation("x=15%").unwrap(), toks("x = 15%"));
        assert!(lex_equation("x = $5").is_err());
    }

    #[test]
    fn parses_paper_single_equation() {
        let eq = parse_infix(&toks("x = 26 - 9")).unwrap();
        assert_eq!(eq.lhs, Expr::Unknown("x".into()));
        assert_eq!(
            eq.rhs,
            Expr::binary(BinaryOp::Sub, Expr::Literal(int(26)), Expr::Literal(int(9)))
        );
    }

    #[test]
    fn parses_identity_equation() {
        let eq = parse_infix(&toks("x = x")).unwrap();
        assert_eq!(eq.lhs, eq.rhs);
    }

    #[test]
    fn precedence_matches_hand_parenthesization() {
        // oracle: 2 + 3 * 4 - 1 parenthesizes as ((2 + (3 * 4)) - 1) = 13
        let eq = parse_infix(&toks("x = 2 + 3 * 4 - 1")).unwrap();
        let value = super::super::evaluate(&eq.rhs, &Default::default()).unwrap();
        assert_eq!(value, int(13));
    }

    #[test]
    fn pow_is_right_associative_and_binds_tightest() {
        // right associativity groups 2 ^ 3 ^ 2 as 2 ^ (3 ^ 2), whose
        // exponent is no longer an integer literal
        assert!(matches!(
            parse_infix(&toks("x = 2 ^ 3 ^ 2")),
            Err(EngineError::InvalidExponent(_))
        ));
        let eq = parse_infix(&toks("x = ( 2 ^ 3 ) ^ 2")).unwrap();
        let value = super::super::evaluate(&eq.rhs, &Default::default()).unwrap();
        assert_eq!(value, int(64));

        let eq = parse_infix(&toks("y = - 2 ^ 2")).unwrap();
        let value = super::super::evaluate(&eq.rhs, &Default::default()).unwrap();
        assert_eq!(value, int(-4), "unary minus binds below ^");
    }

    #[test]
    fn unary_minus_nests_and_divides() {
        let eq = parse_infix(&toks("x = - 6 / 2")).unwrap();
        let value = super::super::evaluate(&eq.rhs, &Default::default()).unwrap();
        assert_eq!(value, int(-3));

        let eq = parse_infix(&toks("x = 2 * - 3")).unwrap();
        let value = super::super::evaluate(&eq.rhs, &Default::default()).unwrap();
        assert_eq!(value, int(-6));
    }

    #[test]
    fn rejects_malformed_streams() {
        assert!(matches!(parse_infix(&toks("x = 1 = 2")), Err(EngineError::MultipleEquals)));
        assert!(matches!(parse_infix(&toks("= 5")), Err(EngineError::EmptySide)));
        assert!(matches!(parse_infix(&toks("x =")), Err(EngineError::EmptySide)));
        assert!(parse_infix(&toks("x = + *")).is_err());
        assert!(parse_infix(&toks("x = ( 1 + 2")).is_err());
        assert!(parse_infix(&toks("x = 1 + 2 )")).is_err());
        assert!(parse_infix(&toks("x = 1 2")).is_err());
        assert!(parse_infix(&toks("x = 2 ^ y")).is_err(), "non-literal exponent");
        assert!(parse_infix(&toks("x = 2 ^ 5")).is_err(), "exponent magnitude above limit");
        assert!(parse_infix(&toks("2 + 2")).is_err(), "missing equals");
    }

    #[test]
    fn parses_bridged_system() {
        let tokens = toks("7.5 * x + 6.5 * y = 82 <bridge> x + y = 12");
        let system = parse_system_tokens(&tokens).unwrap();
        assert_eq!(system.equations.len(), 2);
        assert_eq!(system.unknowns, vec!["x".to_string(), "y".to_string()]);
    }

    #[test]
    fn percent_literal_parses_exactly() {
        let eq = parse_infix(&toks("x = 15%")).unwrap();
        assert_eq!(eq.rhs, Expr::Literal(ratio(3, 20)));
    }
}
