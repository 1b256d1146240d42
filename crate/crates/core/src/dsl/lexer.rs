use super::ParseError;
use crate::model::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Colon,
    Comma,
    Dot,
    Arrow,
    LBrace,
    RBrace,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(_) => "string".to_string(),
            Tok::Colon => "`:`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Dot => "`.`".to_string(),
            Tok::Arrow => "`->`".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// A non-blank source line split into tokens.
#[derive(Debug, Clone)]
pub(crate) struct Line {
    pub tokens: Vec<Token>,
    pub span: SourceSpan,
}

pub(crate) fn lex(text: &str, file: &str) -> Result<Vec<Line>, ParseError> {
    let mut lines = Vec::new();
    for (lineno, raw) in text.split('\n').enumerate() {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let tokens = lex_line(raw, lineno + 1, file)?;
        if let Some(first) = tokens.first() {
            let span = first.span.clone();
            lines.push(Line { tokens, span });
        }
    }
    Ok(lines)
}

fn lex_line(raw: &str, line: usize, file: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = raw.chars().collect();
    let span = |col: usize| SourceSpan { file: file.to_string(), line, column: col + 1 };
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '#' => break,
            ':' => {
                i += 1;
                Tok::Colon
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '.' => {
                i += 1;
                Tok::Dot
            }
            '{' => {
                i += 1;
                Tok::LBrace
            }
            '}' => {
                i += 1;
                Tok::RBrace
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 2;
                Tok::Arrow
            }
            '"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(ParseError::syntax(span(start), "unterminated string")),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => {
                            let escaped = match chars.get(i + 1) {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                Some('t') => '\t',
                                _ => return Err(ParseError::syntax(span(i), "invalid escape sequence")),
                            };
                            s.push(escaped);
                            i += 2;
                        }
                        Some(ch) => {
                            s.push(*ch);
                            i += 1;
                        }
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_alphabetic() => {
                let mut s = String::new();
                while let Some(&ch) = chars.get(i) {
                    let arrow_next = ch == '-' && chars.get(i + 1) == Some(&'>');
                    if (ch.is_ascii_alphanumeric() || ch == '_' || ch == '-') && !arrow_next {
                        s.push(ch);
                        i += 1;
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => return Err(ParseError::syntax(span(start), format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok, span: span(start) });
    }
    Ok(out)
}
