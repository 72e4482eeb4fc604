use super::ast::BinaryOp;
use crate::rational::{parse_rational, ratio, Rational};

/// Reserved separator joining multiple equation templates into one sequence.
pub const BRIDGE_TOKEN: &str = "<bridge>";

/// Reserved word marking unary negation in prefix/postfix streams, where a
/// bare `-` would be ambiguous between arities.
pub const NEG_TOKEN: &str = "neg";

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Literal(Rational),
    Slot(usize),
    Unknown(String),
    Op(BinaryOp),
    Neg,
    Equals,
    LParen,
    RParen,
    Bridge,
}

/// Slot index of a `NUM_k` token, if the token is one.
pub fn slot_index(tok: &str) -> Option<usize> {
    let digits = tok.strip_prefix("NUM_")?;
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Parse a literal token: plain rationals plus the percent form `15%`.
pub fn literal_value(tok: &str) -> Option<Rational> {
    if let Some(prefix) = tok.strip_suffix('%') {
        return parse_rational(prefix).map(|v| v * ratio(1, 100));
    }
    parse_rational(tok)
}

fn is_identifier(tok: &str) -> bool {
    let mut chars = tok.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// The unknown name a token denotes, if the grammar reads it as one.
pub fn unknown_name(tok: &str) -> Option<String> {
    match classify(tok) {
        Some(TokenKind::Unknown(name)) => Some(name),
        _ => None,
    }
}

/// Classify one token of the equation grammar. `None` means the token
/// belongs to no category.
pub fn classify(tok: &str) -> Option<TokenKind> {
    match tok {
        "=" => return Some(TokenKind::Equals),
        "+" => return Some(TokenKind::Op(BinaryOp::Add)),
        "-" => return Some(TokenKind::Op(BinaryOp::Sub)),
        "*" => return Some(TokenKind::Op(BinaryOp::Mul)),
        "/" => return Some(TokenKind::Op(BinaryOp::Div)),
        "^" => return Some(TokenKind::Op(BinaryOp::Pow)),
        "(" => return Some(TokenKind::LParen),
        ")" => return Some(TokenKind::RParen),
        BRIDGE_TOKEN => return Some(TokenKind::Bridge),
        NEG_TOKEN => return Some(TokenKind::Neg),
        _ => {}
    }
    if let Some(k) = slot_index(tok) {
        return Some(TokenKind::Slot(k));
    }
    if let Some(value) = literal_value(tok) {
        return Some(TokenKind::Literal(value));
    }
    if is_identifier(tok) {
        return Some(TokenKind::Unknown(tok.to_string()));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn classifies_token_categories() {
        assert_eq!(classify("NUM_3"), Some(TokenKind::Slot(3)));
        assert_eq!(classify("26"), Some(TokenKind::Literal(int(26))));
        assert_eq!(classify("-5"), Some(TokenKind::Literal(int(-5))));
        assert_eq!(classify("7.5"), Some(TokenKind::Literal(ratio(15, 2))));
        assert_eq!(classify("15%"), Some(TokenKind::Literal(ratio(3, 20))));
        assert_eq!(classify("15/2"), Some(TokenKind::Literal(ratio(15, 2))));
        assert_eq!(classify("x"), Some(TokenKind::Unknown("x".into())));
        assert_eq!(classify("x2"), Some(TokenKind::Unknown("x2".into())));
        assert_eq!(classify("<bridge>"), Some(TokenKind::Bridge));
        assert_eq!(classify("neg"), Some(TokenKind::Neg));
        assert_eq!(classify("NUM_"), Some(TokenKind::Unknown("NUM_".into())));
        assert_eq!(classify("@"), None);
    }
}
