use super::{Diagnostic, DiagnosticKind, Pos, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// A plain identifier or keyword.
    Ident(String),
    /// A backtick-quoted identifier; never a keyword.
    Quoted(String),
    Str(String),
    Number(String),
    Punct(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Quoted(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

const PUNCT: &[&str] = &[
    "->", "..", "!=", "<=", ">=", "&&", "||", "{", "}", "(", ")", "<", ">", ",", ";", "=", "+", "-", "*", "!",
];

struct Cursor<'a> {
    text: &'a str,
    pos: Pos,
}

impl Cursor<'_> {
    fn rest(&self) -> &str {
        &self.text[self.pos.offset..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos.offset += c.len_utf8();
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, f: impl Fn(char) -> bool) -> &str {
        let start = self.pos.offset;
        while self.peek().is_some_and(&f) {
            self.bump();
        }
        &self.text[start..self.pos.offset]
    }
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut c = Cursor { text, pos: Pos { line: 1, col: 1, offset: 0 } };
    let mut out = Vec::new();
    loop {
        c.eat_while(char::is_whitespace);
        if c.peek() == Some('#') {
            c.eat_while(|ch| ch != '\n');
            continue;
        }
        let start = c.pos;
        let Some(ch) = c.peek() else {
            out.push(Token { tok: Tok::Eof, span: Span { start, end: start } });
            return Ok(out);
        };
        let tok = if ch.is_ascii_alphabetic() || ch == '_' {
            Tok::Ident(c.eat_while(|x| x.is_ascii_alphanumeric() || x == '_').to_string())
        } else if ch.is_ascii_digit() {
            let mut n = c.eat_while(|x| x.is_ascii_digit()).to_string();
            let mut frac = c.rest().chars();
            let sep = frac.next();
            if matches!(sep, Some('.' | '/')) && frac.next().is_some_and(|x| x.is_ascii_digit()) {
                n.push(c.bump().unwrap());
                n.push_str(c.eat_while(|x| x.is_ascii_digit()));
            }
            Tok::Number(n)
        } else if ch == '"' || ch == '`' {
            c.bump();
            let mut s = String::new();
            loop {
                match c.bump() {
                    None => return Err(Diagnostic::new(DiagnosticKind::SyntaxError, Span { start, end: c.pos }, "unterminated quote")),
                    Some('\\') => match c.bump() {
                        Some('n') => s.push('\n'),
                        Some(e @ ('\\' | '"' | '`')) => s.push(e),
                        _ => return Err(Diagnostic::new(DiagnosticKind::SyntaxError, Span { start, end: c.pos }, "bad escape")),
                    },
                    Some(q) if q == ch => break,
                    Some(x) => s.push(x),
                }
            }
            if ch == '"' {
                Tok::Str(s)
            } else if s.is_empty() {
                return Err(Diagnostic::new(DiagnosticKind::SyntaxError, Span { start, end: c.pos }, "empty identifier"));
            } else {
                Tok::Quoted(s)
            }
        } else if let Some(p) = PUNCT.iter().find(|p| c.rest().starts_with(**p)) {
            for _ in 0..p.len() {
                c.bump();
            }
            Tok::Punct(p)
        } else {
            c.bump();
            return Err(Diagnostic::new(DiagnosticKind::SyntaxError, Span { start, end: c.pos }, format!("unexpected character {ch:?}")));
        };
        out.push(Token { tok, span: Span { start, end: c.pos } });
    }
}
