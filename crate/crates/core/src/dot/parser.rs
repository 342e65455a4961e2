//! Recursive descent over the DOT subset.
//!
//! ```text
//! graph     := 'digraph' '{' stmt* '}'
//! stmt      := node_stmt | edge_stmt
//! node_stmt := ID '[' 'label' '=' STRING ']' ';'
//! edge_stmt := ID '->' ID ';'
//! ```
//!
//! Lenient mode additionally accepts graph names, missing semicolons,
//! unquoted labels, edge chains and extra attributes, and skips constructs
//! outside the subset. Each deviation is recorded as a warning.

use super::lexer::{syntax, tokenize, Tok, Token};
use super::{DotDocument, Span, Statement, Warning, WarningCode};
use crate::error::{Error, Result};
use crate::script_graph::{DurationBucket, TimeUnit};

pub(crate) fn parse(src: &str, lenient: bool, warnings: &mut Vec<Warning>) -> Result<DotDocument> {
    let toks = tokenize(src, lenient, warnings)?;
    let tail = src.rsplit('\n').next().unwrap_or("");
    let end = Span {
        line: src.matches('\n').count() + 1,
        column: tail.chars().count() + 1,
    };
    Parser {
        toks,
        pos: 0,
        lenient,
        warnings,
        end,
        doc: DotDocument::default(),
    }
    .run()
}

struct Parser<'w> {
    toks: Vec<Token>,
    pos: usize,
    lenient: bool,
    warnings: &'w mut Vec<Warning>,
    end: Span,
    doc: DotDocument,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks
            .get(self.pos)
            .map(|t| Span {
                line: t.line,
                column: t.column,
            })
            .unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Strict mode: fail. Lenient mode: record a warning and carry on.
    fn deviate(&mut self, at: Span, code: WarningCode, msg: impl Into<String>) -> Result<()> {
        let msg = msg.into();
        if self.lenient {
            self.warnings
                .push(Warning::new(at.line, at.column, code, msg));
            Ok(())
        } else {
            Err(syntax(at.line, at.column, msg))
        }
    }

    fn run(mut self) -> Result<DotDocument> {
        self.header()?;
        self.body()?;
        self.trailer()?;
        Ok(self.doc)
    }

    fn header(&mut self) -> Result<()> {
        self.skip_comments()?;
        if self.lenient {
            let Some(found) = self.toks[self.pos..]
                .iter()
                .position(|t| matches!(&t.tok, Tok::Ident(w) if w.eq_ignore_ascii_case("digraph")))
            else {
                return Err(Error::ParseFailure("no `digraph` header found".into()));
            };
            if found > 0 {
                let at = self.span();
                self.warnings.push(Warning::new(
                    at.line,
                    at.column,
                    WarningCode::LeadingInput,
                    "input before `digraph` ignored",
                ));
                self.pos += found;
            }
            self.next();
        } else {
            match self.peek() {
                Some(Tok::Ident(w)) if w == "digraph" => {
                    self.next();
                }
                _ => {
                    let at = self.span();
                    return Err(syntax(at.line, at.column, "expected `digraph`"));
                }
            }
        }
        if let Some(Tok::Ident(_) | Tok::Str(_)) = self.peek() {
            let at = self.span();
            self.deviate(
                at,
                WarningCode::Unsupported,
                "graph names are not supported",
            )?;
            self.next();
        }
        if self.peek() == Some(&Tok::LBrace) {
            self.next();
        } else {
            let at = self.span();
            self.deviate(at, WarningCode::UnexpectedToken, "expected `{`")?;
        }
        Ok(())
    }

    fn skip_comments(&mut self) -> Result<()> {
        while let Some(Tok::Comment(body)) = self.peek() {
            let body = body.clone();
            let at = self.span();
            self.next();
            self.reserved_comment(&body, at)?;
        }
        Ok(())
    }

    fn body(&mut self) -> Result<()> {
        loop {
            let at = self.span();
            match self.peek() {
                None => {
                    return self.deviate(at, WarningCode::MissingBrace, "missing closing `}`");
                }
                Some(Tok::RBrace) => {
                    self.next();
                    return Ok(());
                }
                Some(Tok::Comment(_)) => self.skip_comments()?,
                Some(Tok::Ident(w))
                    if matches!(w.as_str(), "graph" | "node" | "edge" | "subgraph")
                        || self.toks.get(self.pos + 1).map(|t| &t.tok) == Some(&Tok::Equals) =>
                {
                    let what = w.clone();
                    self.deviate(
                        at,
                        WarningCode::Unsupported,
                        format!("`{what}` statements are outside the supported DOT subset"),
                    )?;
                    self.skip_statement();
                }
                Some(Tok::Ident(_)) => self.statement()?,
                Some(Tok::Str(_)) if self.lenient => self.statement()?,
                Some(other) => {
                    let desc = describe(other);
                    self.deviate(
                        at,
                        WarningCode::UnexpectedToken,
                        format!("unexpected {desc}"),
                    )?;
                    self.next();
                }
            }
        }
    }

    fn trailer(&mut self) -> Result<()> {
        while let Some(t) = self.peek() {
            let at = self.span();
            if let Tok::Comment(body) = t {
                let body = body.clone();
                self.next();
                self.reserved_comment(&body, at)?;
                continue;
            }
            self.deviate(
                at,
                WarningCode::TrailingInput,
                "input after closing `}` ignored",
            )?;
            self.pos = self.toks.len();
        }
        Ok(())
    }

    /// Skip to the end of the current statement, honouring nested braces.
    fn skip_statement(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            match t {
                Tok::LBrace => depth += 1,
                Tok::RBrace if depth == 0 => return,
                Tok::RBrace => {
                    depth -= 1;
                    if depth == 0 {
                        self.next();
                        return;
                    }
                }
                Tok::Semi if depth == 0 => {
                    self.next();
                    return;
                }
                _ => {}
            }
            self.next();
        }
    }

    fn ident(&mut self) -> Result<(String, Span)> {
        let at = self.span();
        match self.next().map(|t| t.tok) {
            Some(Tok::Ident(w)) => {
                if !self.lenient && step_index(&w).is_none() {
                    return Err(syntax(
                        at.line,
                        at.column,
                        format!("identifier `{w}` does not match step<k>"),
                    ));
                }
                Ok((w, at))
            }
            Some(Tok::Str(s)) if self.lenient => Ok((s, at)),
            other => Err(syntax(
                at.line,
                at.column,
                format!(
                    "expected a step identifier, found {}",
                    other.as_ref().map(describe).unwrap_or("end of input")
                ),
            )),
        }
    }

    fn statement(&mut self) -> Result<()> {
        let (first, at) = self.ident()?;
        match self.peek() {
            Some(Tok::Arrow) => {
                let mut src = (first, at);
                let mut hops = 0;
                while self.peek() == Some(&Tok::Arrow) {
                    let arrow_at = self.span();
                    self.next();
                    if hops == 1 {
                        self.deviate(
                            arrow_at,
                            WarningCode::EdgeChain,
                            "edge chains are not canonical",
                        )?;
                    }
                    let dst = self.ident()?;
                    self.doc.statements.push(Statement::Edge {
                        src: src.0.clone(),
                        dst: dst.0.clone(),
                        span: src.1,
                    });
                    src = dst;
                    hops += 1;
                }
                if self.peek() == Some(&Tok::LBracket) {
                    let at = self.span();
                    self.deviate(
                        at,
                        WarningCode::Unsupported,
                        "edge attributes are not supported",
                    )?;
                    self.attributes(false)?;
                }
            }
            Some(Tok::LBracket) => {
                let label = self.attributes(true)?;
                match label {
                    Some(label) => self.doc.statements.push(Statement::Node {
                        ident: first,
                        label,
                        span: at,
                    }),
                    None => {
                        self.deviate(
                            at,
                            WarningCode::MissingLabel,
                            format!("node `{first}` has no label"),
                        )?;
                    }
                }
            }
            _ => {
                self.deviate(
                    at,
                    WarningCode::BareNode,
                    format!("node `{first}` declared without a label"),
                )?;
            }
        }
        self.terminator()
    }

    fn terminator(&mut self) -> Result<()> {
        if self.peek() == Some(&Tok::Semi) {
            self.next();
            return Ok(());
        }
        let at = self.span();
        self.deviate(at, WarningCode::MissingSemicolon, "expected `;`")
    }

    /// Parse `[ ... ]`; returns the `label` value when `want_label`.
    fn attributes(&mut self, want_label: bool) -> Result<Option<String>> {
        let open = self.span();
        self.next();
        let mut label: Option<String> = None;
        let mut count = 0usize;
        loop {
            let at = self.span();
            match self.peek() {
                Some(Tok::RBracket) => {
                    self.next();
                    break;
                }
                None => {
                    self.deviate(
                        open,
                        WarningCode::UnexpectedToken,
                        "unterminated attribute list",
                    )?;
                    break;
                }
                Some(Tok::Comma | Tok::Semi) => {
                    if !self.lenient {
                        return Err(syntax(
                            at.line,
                            at.column,
                            "only a single `label` attribute is supported",
                        ));
                    }
                    self.next();
                }
                Some(Tok::Ident(key)) => {
                    let key = key.clone();
                    self.next();
                    if count > 0 && !self.lenient {
                        return Err(syntax(
                            at.line,
                            at.column,
                            "only a single `label` attribute is supported",
                        ));
                    }
                    count += 1;
                    if self.peek() != Some(&Tok::Equals) {
                        let at = self.span();
                        self.deviate(
                            at,
                            WarningCode::UnexpectedToken,
                            format!("expected `=` after `{key}`"),
                        )?;
                        continue;
                    }
                    self.next();
                    let value = self.attribute_value()?;
                    if key == "label" && want_label {
                        if label.is_some() {
                            self.deviate(at, WarningCode::DupNode, "label given twice; last wins")?;
                        }
                        label = value;
                    } else {
                        self.deviate(
                            at,
                            WarningCode::Unsupported,
                            format!("attribute `{key}` ignored"),
                        )?;
                    }
                }
                Some(other) => {
                    let desc = describe(other);
                    self.deviate(
                        at,
                        WarningCode::UnexpectedToken,
                        format!("unexpected {desc} in attributes"),
                    )?;
                    self.next();
                }
            }
        }
        Ok(label)
    }

    fn attribute_value(&mut self) -> Result<Option<String>> {
        let at = self.span();
        match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.next();
                Ok(Some(s))
            }
            Some(Tok::Ident(_)) => {
                self.deviate(
                    at,
                    WarningCode::UnquotedLabel,
                    "attribute value is not quoted",
                )?;
                let mut words = Vec::new();
                while let Some(Tok::Ident(w)) = self.peek() {
                    words.push(w.clone());
                    self.next();
                }
                Ok(Some(words.join(" ")))
            }
            _ => {
                self.deviate(at, WarningCode::UnexpectedToken, "missing attribute value")?;
                Ok(None)
            }
        }
    }

    fn reserved_comment(&mut self, body: &str, at: Span) -> Result<()> {
        if let Some(rest) = reserved_body(body, "duration") {
            match parse_duration_comment(rest) {
                Ok((ident, duration)) => self.doc.durations.push((ident, duration, at)),
                Err(msg) => self.deviate(at, WarningCode::BadDuration, msg)?,
            }
        } else if let Some(rest) = reserved_body(body, "scenario") {
            match serde_json::from_str::<String>(rest) {
                Ok(s) => self.doc.scenario = Some(s),
                Err(e) => self.deviate(
                    at,
                    WarningCode::BadScenario,
                    format!("malformed scenario comment: {e}"),
                )?,
            }
        }
        Ok(())
    }
}

fn reserved_body<'a>(body: &'a str, keyword: &str) -> Option<&'a str> {
    let rest = body.strip_prefix(keyword)?;
    rest.starts_with(char::is_whitespace).then(|| rest.trim())
}

fn parse_duration_comment(rest: &str) -> std::result::Result<(String, DurationBucket), String> {
    let parts: Vec<&str> = rest.split_whitespace().collect();
    let (ident, bucket, secs) = match parts.as_slice() {
        [i, b] => (*i, *b, None),
        [i, b, s] => (*i, *b, Some(*s)),
        _ => return Err(format!("malformed duration comment `{rest}`")),
    };
    let bucket: TimeUnit = bucket.parse().map_err(|e: Error| e.to_string())?;
    let duration = match secs {
        None => DurationBucket::new(bucket),
        Some(s) => {
            let v: f64 = s
                .parse()
                .map_err(|_| format!("bad seconds estimate `{s}`"))?;
            DurationBucket::with_estimate(bucket, v)
        }
    };
    if !duration.is_consistent() {
        return Err(format!(
            "estimate {secs:?} lies outside the {bucket} bucket"
        ));
    }
    Ok((ident.to_string(), duration))
}

/// `k` for identifiers spelled exactly `step<k>`.
pub(crate) fn step_index(ident: &str) -> Option<usize> {
    let digits = ident.strip_prefix("step")?;
    let k: usize = digits.parse().ok()?;
    (k.to_string() == digits).then_some(k)
}

fn describe(t: &Tok) -> &'static str {
    match t {
        Tok::Ident(_) => "identifier",
        Tok::Str(_) => "string",
        Tok::Arrow => "`->`",
        Tok::LBracket => "`[`",
        Tok::RBracket => "`]`",
        Tok::LBrace => "`{`",
        Tok::RBrace => "`}`",
        Tok::Equals => "`=`",
        Tok::Semi => "`;`",
        Tok::Comma => "`,`",
        Tok::Comment(_) => "comment",
    }
}
