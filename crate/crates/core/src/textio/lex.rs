//! Tokenizer for circuit files, expressions, and temporal formulas.
//! ASCII input, `//` line comments, decimal and `0x` integer literals.
//! Identifiers may carry a dotted copy suffix (`pc.1`) so printed product
//! circuits re-parse; user-facing validation rejects the suffix later.

use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

pub struct Lexer {
    pub toks: Vec<(Tok, Pos)>,
}

const PUNCTS: &[&str] = &[
    "<->", "->", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "<", ">", "=", "+", "-", "*", "/",
    "%", "&", "|", "^", "!", "~", "?", ":", "(", ")", "{", "}", "[", "]", ";", ",",
];

pub fn lex(src: &str) -> Result<Lexer, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize, bytes: &[u8]| {
        for _ in 0..n {
            if bytes[*i] == b'\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };

    'outer: while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            advance(&mut i, &mut line, &mut col, 1, bytes);
            continue;
        }
        if c == b'/' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
            while i < bytes.len() && bytes[i] != b'\n' {
                advance(&mut i, &mut line, &mut col, 1, bytes);
            }
            continue;
        }
        let pos = Pos { line, col };
        if c.is_ascii_digit() {
            let start = i;
            let mut end = i;
            let hex = c == b'0' && i + 1 < bytes.len() && (bytes[i + 1] | 32) == b'x';
            if hex {
                end += 2;
                while end < bytes.len() && bytes[end].is_ascii_hexdigit() {
                    end += 1;
                }
            } else {
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
            let text = &src[start..end];
            let value = if hex {
                u64::from_str_radix(&text[2..], 16)
            } else {
                text.parse()
            };
            match value {
                Ok(v) => toks.push((Tok::Int(v), pos)),
                Err(_) => return Err(ParseError::at(pos, format!("bad integer literal {text}"))),
            }
            advance(&mut i, &mut line, &mut col, end - start, bytes);
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            let mut end = i;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            // Copy-tagged names: name '.' digits, possibly repeated.
            while end + 1 < bytes.len() && bytes[end] == b'.' && bytes[end + 1].is_ascii_digit() {
                end += 2;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
            toks.push((Tok::Ident(src[start..end].to_string()), pos));
            advance(&mut i, &mut line, &mut col, end - start, bytes);
            continue;
        }
        for p in PUNCTS {
            if src[i..].starts_with(p) {
                toks.push((Tok::Punct(p), pos));
                advance(&mut i, &mut line, &mut col, p.len(), bytes);
                continue 'outer;
            }
        }
        return Err(ParseError::at(
            pos,
            format!("unexpected character {:?}", c as char),
        ));
    }
    toks.push((Tok::Eof, Pos { line, col }));
    Ok(Lexer { toks })
}
