//! Word/symbol-level lexing and the token category taxonomy.
//!
//! The lexer splits text into maximal whitespace runs, numeric literals
//! (integers, decimals, scientific notation), identifier-shaped words,
//! operators (longest match against a fixed table), single-character
//! brackets, and single-character everything else. Concatenating the token
//! texts always reproduces the input.
//!
//! Classification is a total function of the token text plus two context
//! bits computed by the lexer:
//!
//! * *code line*: the line opens with a reserved word that is not also an
//!   English stopword (`def`, `return`, ...), ends with `:` after a leading
//!   reserved word, or contains an assignment/comparison operator. On such
//!   lines reserved words that double as stopwords (`in`, `is`, `for`, ...)
//!   are [`TokenCategory::PythonSyntax`] and plain words are identifiers.
//! * *identifier position*: a word glued to a bracket or operator, or on
//!   either side of an attribute dot (`self.items`), is a variable name.
//!
//! Outside code context a word such as `is` is a stopword and `counter` a
//! content word.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::task_classifier::TaskType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TokenCategory {
    PythonSyntax,
    Brackets,
    Numbers,
    Stopwords,
    ContentWords,
    Operators,
    VariableNames,
    Whitespace,
    Other,
}

impl TokenCategory {
    pub const ALL: [TokenCategory; 9] = [
        TokenCategory::PythonSyntax,
        TokenCategory::Brackets,
        TokenCategory::Numbers,
        TokenCategory::Stopwords,
        TokenCategory::ContentWords,
        TokenCategory::Operators,
        TokenCategory::VariableNames,
        TokenCategory::Whitespace,
        TokenCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TokenCategory::PythonSyntax => "PYTHON_SYNTAX",
            TokenCategory::Brackets => "BRACKETS",
            TokenCategory::Numbers => "NUMBERS",
            TokenCategory::Stopwords => "STOPWORDS",
            TokenCategory::ContentWords => "CONTENT_WORDS",
            TokenCategory::Operators => "OPERATORS",
            TokenCategory::VariableNames => "VARIABLE_NAMES",
            TokenCategory::Whitespace => "WHITESPACE",
            TokenCategory::Other => "OTHER",
        }
    }

    pub fn is_whitespace(self) -> bool {
        self == TokenCategory::Whitespace
    }
}

impl fmt::Display for TokenCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TokenCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TokenCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown token category `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedToken {
    pub text: String,
    /// Half-open byte range into the source.
    pub span: (usize, usize),
    pub category: TokenCategory,
    pub index: usize,
}

impl ClassifiedToken {
    pub fn is_whitespace(&self) -> bool {
        self.category.is_whitespace()
    }
}

/// Python 3 reserved words (soft keywords excluded).
pub const PYTHON_KEYWORDS: [&str; 35] = [
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
    "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global",
    "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return",
    "try", "while", "with", "yield",
];

/// Longest first, so a linear scan yields maximal munch.
const OPERATORS: [&str; 36] = [
    "**=", "//=", ">>=", "<<=", "==", "!=", "<=", ">=", "**", "//", "->", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "@=", ":=", "<<", ">>", "+", "-", "*", "/", "%", "=", "<",
    ">", "&", "|", "^", "~", "@",
];

/// Operators whose presence marks a line as code rather than prose arithmetic.
const CODE_LINE_OPERATORS: [&str; 18] = [
    "=", "==", "!=", "->", ":=", "+=", "-=", "*=", "/=", "%=", "**=", "//=", "&=", "|=", "^=",
    ">>=", "<<=", "@=",
];

const BRACKETS: [char; 6] = ['(', ')', '[', ']', '{', '}'];

const STOPWORDS_V1: &str = include_str!("../fixtures/wordlists/stopwords-v1.txt");

/// Parses a bundled word-list fixture: one entry per line, `#` comments.
pub(crate) fn parse_word_list(raw: &str) -> Vec<&str> {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| parse_word_list(STOPWORDS_V1).into_iter().collect())
}

pub fn is_python_keyword(text: &str) -> bool {
    PYTHON_KEYWORDS.contains(&text)
}

fn is_stopword(text: &str) -> bool {
    let set = stopwords();
    set.contains(text) || (text.chars().any(char::is_uppercase) && set.contains(text.to_lowercase().as_str()))
}

/// A reserved word that cannot be read as ordinary English (`def`, `return`).
fn is_pure_keyword(text: &str) -> bool {
    is_python_keyword(text) && !is_stopword(text)
}

fn is_number(text: &str) -> bool {
    let b = text.as_bytes();
    let mut i = 0;
    let digits = |i: &mut usize| {
        let start = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        *i > start
    };
    if !digits(&mut i) {
        return false;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        if !digits(&mut i) {
            return false;
        }
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        if !digits(&mut i) {
            return false;
        }
    }
    i == b.len()
}

fn is_word_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_word_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_word(text: &str) -> bool {
    let mut chars = text.chars();
    matches!(chars.next(), Some(c) if is_word_start(c)) && chars.all(is_word_continue)
}

/// snake_case, names carrying digits, or camelCase.
fn is_identifier_shaped(text: &str) -> bool {
    if text.contains('_') || text.chars().any(|c| c.is_numeric()) {
        return true;
    }
    let chars: Vec<char> = text.chars().collect();
    chars.windows(2).any(|w| w[0].is_lowercase() && w[1].is_uppercase())
}

fn classify_in_context(text: &str, code_line: bool, identifier_position: bool) -> TokenCategory {
    if text.is_empty() {
        return TokenCategory::Other;
    }
    if text.chars().all(char::is_whitespace) {
        return TokenCategory::Whitespace;
    }
    if is_word(text) {
        let keyword = is_python_keyword(text);
        let stop = is_stopword(text);
        if keyword && (!stop || code_line) {
            return TokenCategory::PythonSyntax;
        }
        if stop {
            return TokenCategory::Stopwords;
        }
        if is_identifier_shaped(text) || code_line || identifier_position {
            return TokenCategory::VariableNames;
        }
        return TokenCategory::ContentWords;
    }
    if OPERATORS.contains(&text) {
        return TokenCategory::Operators;
    }
    let mut chars = text.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if BRACKETS.contains(&c) {
            return TokenCategory::Brackets;
        }
    }
    if is_number(text) {
        return TokenCategory::Numbers;
    }
    TokenCategory::Other
}

/// Categorizes a single token.
///
/// A `Code` hint puts the token in code context: reserved words outrank
/// stopwords and plain words become identifiers. Any other hint, or none,
/// classifies the word as prose.
pub fn classify_token(text: &str, context_hint: Option<TaskType>) -> TokenCategory {
    let code = context_hint == Some(TaskType::Code);
    classify_in_context(text, code, code)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Whitespace,
    Number,
    Word,
    Operator,
    Bracket,
    Other,
}

fn scan(source: &str) -> Vec<(usize, usize, Shape)> {
    let mut out = Vec::new();
    let bytes = source.as_bytes();
    let mut pos = 0;
    while pos < source.len() {
        let rest = &source[pos..];
        let c = rest.chars().next().expect("pos is on a char boundary");
        let (len, shape) = if c.is_whitespace() {
            let end = rest.find(|ch: char| !ch.is_whitespace()).unwrap_or(rest.len());
            (end, Shape::Whitespace)
        } else if c.is_ascii_digit() {
            (number_len(&bytes[pos..]), Shape::Number)
        } else if is_word_start(c) {
            let end = rest
                .char_indices()
                .find(|&(_, ch)| !is_word_continue(ch))
                .map_or(rest.len(), |(i, _)| i);
            (end, Shape::Word)
        } else if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            (op.len(), Shape::Operator)
        } else if BRACKETS.contains(&c) {
            (1, Shape::Bracket)
        } else {
            (c.len_utf8(), Shape::Other)
        };
        out.push((pos, pos + len, shape));
        pos += len;
    }
    out
}

fn number_len(b: &[u8]) -> usize {
    let digits_from = |mut i: usize| {
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    let mut i = digits_from(0);
    if i + 1 < b.len() && b[i] == b'.' && b[i + 1].is_ascii_digit() {
        i = digits_from(i + 1);
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            i = digits_from(j);
        }
    }
    i
}

/// Lexes `source` into categorized tokens whose texts concatenate back to it.
pub fn lex_tokens(source: &str) -> Vec<ClassifiedToken> {
    let raw = scan(source);
    let text = |i: usize| &source[raw[i].0..raw[i].1];

    // Line membership: a whitespace token containing '\n' closes the line.
    let mut line_of = vec![0usize; raw.len()];
    let mut lines: Vec<Vec<usize>> = vec![Vec::new()];
    for (i, &(_, _, shape)) in raw.iter().enumerate() {
        line_of[i] = lines.len() - 1;
        if shape == Shape::Whitespace {
            if text(i).contains('\n') {
                lines.push(Vec::new());
            }
        } else {
            lines.last_mut().unwrap().push(i);
        }
    }

    let code_lines: Vec<bool> = lines
        .iter()
        .map(|members| {
            let (Some(&first), Some(&last)) = (members.first(), members.last()) else {
                return false;
            };
            is_pure_keyword(text(first))
                || (text(last) == ":" && is_python_keyword(text(first)))
                || members.iter().any(|&i| {
                    raw[i].2 == Shape::Operator && CODE_LINE_OPERATORS.contains(&text(i))
                })
        })
        .collect();

    let glued = |a: usize, b: usize| raw[a].1 == raw[b].0;
    let identifier_position = |i: usize| {
        let structural = |j: usize| matches!(raw[j].2, Shape::Bracket | Shape::Operator);
        let attribute_dot = |dot: usize, other: Option<usize>| {
            text(dot) == "." && other.is_some_and(|o| raw[o].2 == Shape::Word)
        };
        let prev = i.checked_sub(1).filter(|&p| glued(p, i));
        let next = Some(i + 1).filter(|&n| n < raw.len() && glued(i, n));
        prev.is_some_and(|p| {
            structural(p) || attribute_dot(p, p.checked_sub(1).filter(|&q| glued(q, p)))
        }) || next.is_some_and(|n| {
            structural(n) || attribute_dot(n, Some(n + 1).filter(|&m| m < raw.len() && glued(n, m)))
        })
    };

    raw.iter()
        .enumerate()
        .map(|(i, &(start, end, shape))| {
            let t = &source[start..end];
            let category = match shape {
                Shape::Whitespace => TokenCategory::Whitespace,
                Shape::Number => TokenCategory::Numbers,
                Shape::Operator => TokenCategory::Operators,
                Shape::Bracket => TokenCategory::Brackets,
                Shape::Other => TokenCategory::Other,
                Shape::Word => classify_in_context(t, code_lines[line_of[i]], identifier_position(i)),
            };
            ClassifiedToken {
                text: t.to_string(),
                span: (start, end),
                category,
                index: i,
            }
        })
        .collect()
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// One line per token: `index\tstart\tend\tcategory\ttext`, text escaped.
pub fn debug_dump(tokens: &[ClassifiedToken]) -> String {
    tokens
        .iter()
        .map(|t| {
            format!(
                "{}\t{}\t{}\t{}\t{}\n",
                t.index,
                t.span.0,
                t.span.1,
                t.category,
                escape(&t.text)
            )
        })
        .collect()
}

pub fn join_tokens(tokens: &[ClassifiedToken]) -> String {
    tokens.iter().map(|t| t.text.as_str()).collect()
}
