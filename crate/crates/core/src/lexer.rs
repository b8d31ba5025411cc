//! Tokenizer shared by the assertion and formula parsers.

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// `@"..."` escape carrying raw assertion text.
    Quoted(String),
    Prime,
    LParen,
    RParen,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    Diamond,
    Square,
    Dot,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Quoted(_) => "quoted assertion".to_string(),
            Tok::Prime => "`'`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Bang => "`!`".to_string(),
            Tok::Amp => "`&`".to_string(),
            Tok::Pipe => "`|`".to_string(),
            Tok::Arrow => "`->`".to_string(),
            Tok::DoubleArrow => "`<->`".to_string(),
            Tok::Diamond => "`<>`".to_string(),
            Tok::Square => "`[]`".to_string(),
            Tok::Dot => "`.`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        let rest = &bytes[i..];
        let (tok, len) = match c {
            b'\'' => (Tok::Prime, 1),
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b'!' => (Tok::Bang, 1),
            b'&' => (Tok::Amp, 1),
            b'|' => (Tok::Pipe, 1),
            b'.' => (Tok::Dot, 1),
            b'-' if rest.starts_with(b"->") => (Tok::Arrow, 2),
            b'<' if rest.starts_with(b"<->") => (Tok::DoubleArrow, 3),
            b'<' if rest.starts_with(b"<>") => (Tok::Diamond, 2),
            b'[' if rest.starts_with(b"[]") => (Tok::Square, 2),
            b'@' if rest.starts_with(b"@\"") => {
                let body_start = i + 2;
                let Some(close) = text[body_start..].find('"') else {
                    return Err(ParseError::new(start, "unterminated @\"...\" escape"));
                };
                let body = text[body_start..body_start + close].to_string();
                out.push((Tok::Quoted(body), start));
                i = body_start + close + 1;
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(start, format!("unexpected character `{ch}`")));
            }
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

/// Cursor over a token stream.
pub(crate) struct Cursor {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Cursor {
            toks: tokenize(text)?,
            at: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(crate) fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.at + ahead).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    pub(crate) fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::new(
            self.pos(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }
}
