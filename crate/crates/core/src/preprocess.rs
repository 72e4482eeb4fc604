//! Preprocessing: tokenization, rule-based number extraction,
//! position-aware number mapping, equation templating, and bridge joining
//! of multi-equation targets.
//!
//! The extraction rules are deliberately small and exact: integers,
//! decimals, percents, simple fractions, and digit-grouped integers.
//! Number words ("twelve") are not extracted.

use crate::dataio::{Language, ProblemRecord};
use crate::engine::{self, EngineError, BRIDGE_TOKEN};
use crate::rational::{format_rational, parse_rational, ratio, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("record {record_id}: equation '{equation}' does not parse: {source}")]
    UnparseableEquation {
        record_id: String,
        equation: String,
        source: EngineError,
    },
    #[error("bridge sequence malformed: {0}")]
    MalformedBridge(String),
}

/// One extracted number: where it sits in the token stream, what it looked
/// like, and its exact value.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberSlot {
    /// 0-based ordinal in text order; `slot_token` is `NUM_<slot_index>`.
    pub slot_index: usize,
    /// The token as it appeared, currency symbols and all.
    pub surface: String,
    pub value: Rational,
    pub token_position: usize,
}

impl NumberSlot {
    pub fn slot_token(&self) -> String {
        format!("NUM_{}", self.slot_index)
    }
}

/// A record after number mapping and equation templating.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedProblem {
    pub record_id: String,
    pub masked_tokens: Vec<String>,
    pub slots: Vec<NumberSlot>,
    /// Templated target sequence; multi-equation targets carry `<bridge>`.
    pub target_tokens: Vec<String>,
    /// Unknown names in order of first appearance in the target.
    pub unknowns: Vec<String>,
    /// Literals kept verbatim in the target because no slot matched.
    pub constants_used: Vec<Rational>,
}

/// Tokenize problem text.
///
/// English: split on whitespace, then peel leading/trailing punctuation
/// into separate tokens; currency and percent marks attached to digits stay
/// attached so the number rules can see them. Chinese: one token per
/// character, except maximal digit runs (with internal `.`/`,`/`/` and a
/// trailing `%`), which stay whole. Every token is a verbatim substring of
/// the input, in order.
pub fn tokenize(text: &str, language: Language) -> Vec<String> {
    match language {
        Language::En => tokenize_en(text),
        Language::Zh => tokenize_zh(text),
    }
}

const CURRENCY: &[char] = &['$', '¥', '€', '£', '￥'];

fn is_splittable_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '，' | '。' | '？' | '！' | '：' | '；' | '（' | '）')
}

fn tokenize_en(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        split_word(word, &mut tokens);
    }
    tokens
}

fn split_word(word: &str, out: &mut Vec<String>) {
    if word.is_empty() {
        return;
    }
    let chars: Vec<char> = word.chars().collect();

    // leading punctuation, except currency attached to a digit ("$82")
    let mut start = 0;
    while start < chars.len() && is_splittable_punct(chars[start]) {
        let attached_currency =
            CURRENCY.contains(&chars[start]) && chars.get(start + 1).is_some_and(|c| c.is_ascii_digit());
        if attached_currency {
            break;
        }
        out.push(chars[start].to_string());
        start += 1;
    }

    // trailing punctuation, except %/currency directly after a digit ("7.50$", "15%")
    let mut end = chars.len();
    let mut trailing: Vec<String> = Vec::new();
    while end > start && is_splittable_punct(chars[end - 1]) {
        let prev_digit = end >= 2 && chars[end - 2].is_ascii_digit();
        let attached = prev_digit && (chars[end - 1] == '%' || CURRENCY.contains(&chars[end - 1]));
        if attached {
            break;
        }
        trailing.push(chars[end - 1].to_string());
        end -= 1;
    }

    if start < end {
        out.push(chars[start..end].iter().collect());
    }
    out.extend(trailing.into_iter().rev());
}

fn tokenize_zh(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
                // keep . , / between digits inside one run
                if i + 1 < chars.len()
                    && matches!(chars[i], '.' | ',' | '/')
                    && chars[i + 1].is_ascii_digit()
                {
                    i += 1;
                }
            }
            if i < chars.len() && chars[i] == '%' {
                i += 1;
            }
            tokens.push(chars[start..i].iter().collect());
        } else {
            tokens.push(c.to_string());
            i += 1;
        }
    }
    tokens
}

/// Try the number grammar on one token. Currency symbols are stripped
/// before matching.
///
/// Rules: integer `26`; decimal `7.50`; percent `15%` (value / 100);
/// simple fraction `3/5`; digit-grouped integer `1,000`.
pub fn parse_number_token(token: &str) -> Option<Rational> {
    let stripped: &str = token
        .trim_start_matches(|c| CURRENCY.contains(&c))
        .trim_end_matches(|c| CURRENCY.contains(&c));
    if stripped.is_empty() {
        return None;
    }
    if let Some(prefix) = stripped.strip_suffix('%') {
        return parse_plain_number(prefix).map(|v| v * ratio(1, 100));
    }
    parse_plain_number(stripped)
}

fn parse_plain_number(s: &str) -> Option<Rational> {
    if s.is_empty() || !s.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        return None;
    }
    // digit-grouped integers: 1,000 / 12,345,678
    if s.contains(',') {
        let groups: Vec<&str> = s.split(',').collect();
        let valid = groups.len() >= 2
            && !groups[0].is_empty()
            && groups[0].len() <= 3
            && groups[0].chars().all(|c| c.is_ascii_digit())
            && groups[1..]
                .iter()
                .all(|g| g.len() == 3 && g.chars().all(|c| c.is_ascii_digit()));
        if !valid {
            return None;
        }
        return parse_rational(&s.replace(',', ""));
    }
    if let Some((numer, denom)) = s.split_once('/') {
        let ok = |part: &str| !part.is_empty() && part.chars().all(|c| c.is_ascii_digit());
        if !ok(numer) || !ok(denom) || denom.chars().all(|c| c == '0') {
            return None;
        }
        return parse_rational(s);
    }
    // integer or decimal only; reject stray characters like "2nd"
    let mut seen_dot = false;
    for c in s.chars() {
        match c {
            '0'..='9' => {}
            '.' if !seen_dot => seen_dot = true,
            _ => return None,
        }
    }
    if s.ends_with('.') {
        return None;
    }
    parse_rational(s)
}

/// Scan tokens for numbers, assigning slot indices in token order.
///
/// Digit-bearing tokens the grammar cannot parse are left in place and
/// logged at debug level.
pub fn extract_numbers(tokens: &[String]) -> Vec<NumberSlot> {
    let mut slots = Vec::new();
    for (position, token) in tokens.iter().enumerate() {
        match parse_number_token(token) {
            Some(value) => slots.push(NumberSlot {
                slot_index: slots.len(),
                surface: token.clone(),
                value,
                token_position: position,
            }),
            None => {
                if token.chars().any(|c| c.is_ascii_digit()) {
                    log::debug!("token '{token}' carries digits but matches no number rule");
                }
            }
        }
    }
    slots
}

/// Replace each slot's token with its `NUM_k` token.
pub fn mask(tokens: &[String], slots: &[NumberSlot]) -> Vec<String> {
    let mut out = tokens.to_vec();
    for slot in slots {
        out[slot.token_position] = slot.slot_token();
    }
    out
}

/// Inverse of [`mask`]: restore each slot's surface form.
pub fn unmask(masked: &[String], slots: &[NumberSlot]) -> Vec<String> {
    let mut out = masked.to_vec();
    for slot in slots {
        out[slot.token_position] = slot.surface.clone();
    }
    out
}

/// Convert one equation into a template token list.
///
/// Literals equal to a slot value become that slot's token; a literal
/// matching several slots binds the earliest slot not yet bound in this
/// call, or the earliest overall once all are bound. Literals matching no
/// slot stay verbatim and are reported as constants.
pub fn templatize(
    equation: &str,
    slots: &[NumberSlot],
    record_id: &str,
) -> Result<(Vec<String>, Vec<Rational>), PreprocessError> {
    let tokens = engine::lex_equation(equation).map_err(|source| PreprocessError::UnparseableEquation {
        record_id: record_id.to_string(),
        equation: equation.to_string(),
        source,
    })?;
    engine::parse_infix(&tokens).map_err(|source| PreprocessError::UnparseableEquation {
        record_id: record_id.to_string(),
        equation: equation.to_string(),
        source,
    })?;

    let mut bound = vec![false; slots.len()];
    let mut constants: Vec<Rational> = Vec::new();
    let mut out = Vec::with_capacity(tokens.len());
    for token in tokens {
        match literal_token_value(&token) {
            Some(value) => {
                let unbound = slots
                    .iter()
                    .find(|s| s.value == value && !bound[s.slot_index]);
                let chosen = unbound.or_else(|| slots.iter().find(|s| s.value == value));
                match chosen {
                    Some(slot) => {
                        bound[slot.slot_index] = true;
                        out.push(slot.slot_token());
                    }
                    None => {
                        if !constants.contains(&value) {
                            constants.push(value.clone());
                        }
                        out.push(token);
                    }
                }
            }
            None => out.push(token),
        }
    }
    Ok((out, constants))
}

/// Literal value of an equation token, if it is a number lexeme.
fn literal_token_value(token: &str) -> Option<Rational> {
    if !token.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '.') {
        return None;
    }
    if let Some(prefix) = token.strip_suffix('%') {
        return parse_rational(prefix).map(|v| v * ratio(1, 100));
    }
    parse_rational(token)
}

/// Concatenate templates with the bridge token between them.
pub fn bridge_join(templates: &[Vec<String>]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, template) in templates.iter().enumerate() {
        if i > 0 {
            out.push(BRIDGE_TOKEN.to_string());
        }
        out.extend(template.iter().cloned());
    }
    out
}

/// Exact inverse of [`bridge_join`]. Leading, trailing, or adjacent bridge
/// tokens are malformed.
pub fn bridge_split(tokens: &[String]) -> Result<Vec<Vec<String>>, PreprocessError> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for token in tokens {
        if token == BRIDGE_TOKEN {
            if out.last().unwrap().is_empty() {
                return Err(PreprocessError::MalformedBridge(
                    "bridge token with no equation before it".to_string(),
                ));
            }
            out.push(Vec::new());
        } else {
            out.last_mut().unwrap().push(token.clone());
        }
    }
    if out.last().unwrap().is_empty() {
        return Err(PreprocessError::MalformedBridge(
            "bridge token with no equation after it".to_string(),
        ));
    }
    Ok(out)
}

/// Full preprocessing of one record: tokenize, extract, mask, templatize
/// each gold equation, and bridge-join multi-equation targets in file order.
pub fn preprocess_record(record: &ProblemRecord) -> Result<ProcessedProblem, PreprocessError> {
    let tokens = tokenize(&record.text, record.language);
    let slots = extract_numbers(&tokens);
    let masked_tokens = mask(&tokens, &slots);

    let mut templates = Vec::with_capacity(record.gold_equations.len());
    let mut constants_used: Vec<Rational> = Vec::new();
    for equation in &record.gold_equations {
        let (template, constants) = templatize(equation, &slots, &record.id)?;
        for c in constants {
            if !constants_used.contains(&c) {
                constants_used.push(c);
            }
        }
        templates.push(template);
    }
    let target_tokens = bridge_join(&templates);

    let mut unknowns = Vec::new();
    for token in &target_tokens {
        if let Some(name) = engine::unknown_name(token) {
            if !unknowns.contains(&name) {
                unknowns.push(name);
            }
        }
    }

    Ok(ProcessedProblem {
        record_id: record.id.clone(),
        masked_tokens,
        slots,
        target_tokens,
        unknowns,
        constants_used,
    })
}

// --- serialized form -------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct SlotJson {
    token: String,
    surface: String,
    value: String,
    position: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProcessedJson {
    id: String,
    masked_tokens: Vec<String>,
    slots: Vec<SlotJson>,
    target_tokens: Vec<String>,
    unknowns: Vec<String>,
    constants_used: Vec<String>,
}

/// One line of the processed-output file format.
pub fn to_json_line(problem: &ProcessedProblem) -> String {
    let json = ProcessedJson {
        id: problem.record_id.clone(),
        masked_tokens: problem.masked_tokens.clone(),
        slots: problem
            .slots
            .iter()
            .map(|s| SlotJson {
                token: s.slot_token(),
                surface: s.surface.clone(),
                value: format_rational(&s.value),
                position: s.token_position,
            })
            .collect(),
        target_tokens: problem.target_tokens.clone(),
        unknowns: problem.unknowns.clone(),
        constants_used: problem.constants_used.iter().map(format_rational).collect(),
    };
    serde_json::to_string(&json).expect("processed problem serializes")
}
