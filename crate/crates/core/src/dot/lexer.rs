use super::{Warning, WarningCode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Arrow,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Equals,
    Semi,
    Comma,
    /// Body of a `//`, `#` or `/* */` comment, trimmed.
    Comment(String),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

fn is_special(c: char) -> bool {
    matches!(c, '[' | ']' | '{' | '}' | '=' | ';' | ',' | '"')
}

/// Split `src` into tokens. In lenient mode recoverable lexical problems
/// are recorded in `warnings` instead of failing.
pub(crate) fn tokenize(
    src: &str,
    lenient: bool,
    warnings: &mut Vec<Warning>,
) -> Result<Vec<Token>> {
    let mut cur = Cursor::new(src);
    let mut out = Vec::new();
    let mut at_line_start = true;
    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        if c.is_whitespace() {
            if c == '\n' {
                at_line_start = true;
            }
            cur.bump();
            continue;
        }
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, column });
        match c {
            '/' if cur.peek2() == Some('/') => {
                cur.bump();
                cur.bump();
                push(
                    &mut out,
                    Tok::Comment(read_line(&mut cur).trim().to_string()),
                );
            }
            '#' if at_line_start => {
                cur.bump();
                push(
                    &mut out,
                    Tok::Comment(read_line(&mut cur).trim().to_string()),
                );
            }
            '/' if cur.peek2() == Some('*') => {
                cur.bump();
                cur.bump();
                let mut body = String::new();
                loop {
                    match cur.bump() {
                        Some('*') if cur.peek() == Some('/') => {
                            cur.bump();
                            break;
                        }
                        Some(ch) => body.push(ch),
                        None if lenient => {
                            warnings.push(Warning::new(
                                line,
                                column,
                                WarningCode::UnterminatedComment,
                                "block comment runs to end of input",
                            ));
                            break;
                        }
                        None => {
                            return Err(syntax(line, column, "unterminated block comment"));
                        }
                    }
                }
                push(&mut out, Tok::Comment(body.trim().to_string()));
            }
            '"' => {
                let s = read_string(&mut cur, lenient, warnings)?;
                push(&mut out, Tok::Str(s));
            }
            '-' if cur.peek2() == Some('>') => {
                cur.bump();
                cur.bump();
                push(&mut out, Tok::Arrow);
            }
            '[' | ']' | '{' | '}' | '=' | ';' | ',' => {
                cur.bump();
                let tok = match c {
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '=' => Tok::Equals,
                    ';' => Tok::Semi,
                    _ => Tok::Comma,
                };
                push(&mut out, tok);
            }
            _ => {
                let mut word = String::new();
                while let Some(ch) = cur.peek() {
                    if ch.is_whitespace()
                        || is_special(ch)
                        || (ch == '-' && cur.peek2() == Some('>'))
                        || (ch == '/' && matches!(cur.peek2(), Some('/') | Some('*')))
                    {
                        break;
                    }
                    word.push(ch);
                    cur.bump();
                }
                push(&mut out, Tok::Ident(word));
            }
        }
        at_line_start = false;
    }
    Ok(out)
}

fn read_line(cur: &mut Cursor) -> String {
    let mut s = String::new();
    while let Some(ch) = cur.peek() {
        if ch == '\n' {
            break;
        }
        s.push(ch);
        cur.bump();
    }
    s
}

fn read_string(cur: &mut Cursor, lenient: bool, warnings: &mut Vec<Warning>) -> Result<String> {
    let (line, column, start) = (cur.line, cur.column, cur.pos);
    cur.bump();
    let mut s = String::new();
    loop {
        match cur.bump() {
            Some('"') => return Ok(s),
            Some('\\') => match cur.bump() {
                Some(e @ ('"' | '\\')) => s.push(e),
                Some(other) if lenient => {
                    warnings.push(Warning::new(
                        cur.line,
                        cur.column.saturating_sub(2),
                        WarningCode::BadEscape,
                        format!("unknown escape `\\{other}` kept verbatim"),
                    ));
                    s.push('\\');
                    s.push(other);
                }
                Some(other) => {
                    return Err(syntax(
                        cur.line,
                        cur.column.saturating_sub(2),
                        format!("unknown escape `\\{other}`"),
                    ))
                }
                None => break,
            },
            Some(ch) => s.push(ch),
            None => break,
        }
    }
    if !lenient {
        return Err(syntax(line, column, "unterminated string"));
    }
    // Rewind and close the string at the end of its first line instead.
    cur.pos = start;
    cur.line = line;
    cur.column = column;
    cur.bump();
    let rest = read_line(cur);
    warnings.push(Warning::new(
        line,
        column,
        WarningCode::UnterminatedString,
        "string closed at end of line",
    ));
    Ok(rest.replace("\\\"", "\"").replace("\\\\", "\\"))
}

pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src, false, &mut Vec::new())
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect()
    }

    #[test]
    fn arrow_splits_adjacent_identifiers() {
        assert_eq!(
            toks("step0->step1;"),
            vec![
                Tok::Ident("step0".into()),
                Tok::Arrow,
                Tok::Ident("step1".into()),
                Tok::Semi
            ]
        );
    }

    #[test]
    fn strings_unescape_quote_and_backslash() {
        assert_eq!(
            toks(r#""say \"hi\" \\ bye""#),
            vec![Tok::Str(r#"say "hi" \ bye"#.into())]
        );
    }

    #[test]
    fn comments_are_tokens() {
        assert_eq!(
            toks("// duration step0 minutes\n/* x */ # not at line start"),
            vec![
                Tok::Comment("duration step0 minutes".into()),
                Tok::Comment("x".into()),
                Tok::Ident("#".into()),
                Tok::Ident("not".into()),
                Tok::Ident("at".into()),
                Tok::Ident("line".into()),
                Tok::Ident("start".into()),
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("digraph {\n  step0", false, &mut Vec::new()).unwrap();
        assert_eq!((t[2].line, t[2].column), (2, 3));
    }

    #[test]
    fn strict_rejects_unterminated_and_bad_escape() {
        assert!(matches!(
            tokenize("\"abc", false, &mut Vec::new()),
            Err(Error::Syntax {
                line: 1,
                column: 1,
                ..
            })
        ));
        assert!(tokenize(r#""a\nb""#, false, &mut Vec::new()).is_err());
    }

    #[test]
    fn lenient_recovers_unterminated_string() {
        let mut w = Vec::new();
        let t = tokenize("\"abc\nnext", true, &mut w).unwrap();
        assert_eq!(t[0].tok, Tok::Str("abc".into()));
        assert_eq!(t[1].tok, Tok::Ident("next".into()));
        assert_eq!(w[0].code, WarningCode::UnterminatedString);
    }
}
