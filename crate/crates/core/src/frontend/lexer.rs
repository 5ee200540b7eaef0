//! Tokenizer with indentation tracking, implicit line joining inside
//! brackets and backslash continuations.

use super::SyntaxError;
use crate::pivot::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name `{n}`"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Float(f) => format!("number {f}"),
            Tok::Str(_) => "string".into(),
            Tok::Op(o) => format!("`{o}`"),
            Tok::Newline => "end of line".into(),
            Tok::Indent => "indent".into(),
            Tok::Dedent => "dedent".into(),
            Tok::Eof => "end of file".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

// Longest operators first so that maximal munch works by linear scan.
const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "==", "!=", "<=",
    ">=", "**", "//", "<<", ">>", ":=", "+", "-", "*", "/", "%", "@", "&", "|", "^", "~", "<", ">", "(", ")", "[",
    "]", "{", "}", ",", ":", ".", ";", "=",
];

struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    indents: Vec<u32>,
    brackets: Vec<(u8, Span)>,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer {
        src: text.as_bytes(),
        text,
        pos: 0,
        line: 1,
        col: 1,
        tokens: Vec::new(),
        indents: vec![0],
        brackets: Vec::new(),
    };
    lx.run()?;
    Ok(lx.tokens)
}

impl<'a> Lexer<'a> {
    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<u8> {
        self.src.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if (c & 0xC0) != 0x80 {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, span: Span, expected: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: span.line,
            column: span.column,
            expected: expected.into(),
        }
    }

    fn push(&mut self, tok: Tok, span: Span) {
        self.tokens.push(Token { tok, span });
    }

    fn last_is_line_end(&self) -> bool {
        matches!(
            self.tokens.last().map(|t| &t.tok),
            None | Some(Tok::Newline) | Some(Tok::Indent) | Some(Tok::Dedent)
        )
    }

    fn run(&mut self) -> Result<(), SyntaxError> {
        let mut at_line_start = true;
        loop {
            if at_line_start && self.brackets.is_empty() {
                if !self.handle_indentation()? {
                    break;
                }
                at_line_start = false;
            }
            let Some(c) = self.peek() else { break };
            match c {
                b' ' | b'\t' | b'\x0c' | b'\r' => {
                    self.bump();
                }
                b'#' => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                b'\\' if self.peek_at(1) == Some(b'\n') || (self.peek_at(1) == Some(b'\r') && self.peek_at(2) == Some(b'\n')) => {
                    self.bump();
                    if self.peek() == Some(b'\r') {
                        self.bump();
                    }
                    self.bump();
                }
                b'\n' => {
                    let span = self.span();
                    self.bump();
                    if self.brackets.is_empty() {
                        if !self.last_is_line_end() {
                            self.push(Tok::Newline, span);
                        }
                        at_line_start = true;
                    }
                }
                b'0'..=b'9' => self.number()?,
                b'.' if matches!(self.peek_at(1), Some(b'0'..=b'9')) => self.number()?,
                b'"' | b'\'' => self.string(String::new())?,
                c if c == b'_' || c.is_ascii_alphabetic() || c >= 0x80 => self.name_or_string()?,
                _ => self.operator()?,
            }
        }
        if let Some(&(open, span)) = self.brackets.last() {
            return Err(self.err(span, format!("closing bracket for `{}`", open as char)));
        }
        let end = self.span();
        if !self.last_is_line_end() {
            self.push(Tok::Newline, end);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(Tok::Dedent, end);
        }
        self.push(Tok::Eof, end);
        Ok(())
    }

    /// Measures indentation of the next logical line. Returns false at end of input.
    fn handle_indentation(&mut self) -> Result<bool, SyntaxError> {
        loop {
            let mut width = 0u32;
            while let Some(c) = self.peek() {
                match c {
                    b' ' => width += 1,
                    b'\t' => width = (width / 8 + 1) * 8,
                    b'\x0c' => width = 0,
                    _ => break,
                }
                self.bump();
            }
            match self.peek() {
                None => return Ok(false),
                Some(b'\n') => {
                    self.bump();
                    continue;
                }
                Some(b'\r') if self.peek_at(1) == Some(b'\n') => {
                    self.bump();
                    self.bump();
                    continue;
                }
                Some(b'#') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                    continue;
                }
                Some(_) => {}
            }
            let span = self.span();
            let current = *self.indents.last().expect("indent stack never empty");
            if width > current {
                self.indents.push(width);
                self.push(Tok::Indent, span);
            } else {
                while width < *self.indents.last().expect("indent stack never empty") {
                    self.indents.pop();
                    self.push(Tok::Dedent, span);
                }
                if width != *self.indents.last().expect("indent stack never empty") {
                    return Err(self.err(span, "indentation matching an enclosing block"));
                }
            }
            return Ok(true);
        }
    }

    fn number(&mut self) -> Result<(), SyntaxError> {
        let span = self.span();
        let start = self.pos;
        if self.peek() == Some(b'0') && matches!(self.peek_at(1), Some(b'x' | b'X' | b'o' | b'O' | b'b' | b'B')) {
            let radix = match self.peek_at(1).unwrap().to_ascii_lowercase() {
                b'x' => 16,
                b'o' => 8,
                _ => 2,
            };
            self.bump();
            self.bump();
            let digits_start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                self.bump();
            }
            let digits: String = self.text[digits_start..self.pos].chars().filter(|&c| c != '_').collect();
            let v = i64::from_str_radix(&digits, radix).map_err(|_| self.err(span, "a valid integer literal"))?;
            self.push(Tok::Int(v), span);
            return Ok(());
        }
        let mut is_float = false;
        while let Some(c) = self.peek() {
            match c {
                b'0'..=b'9' | b'_' => {
                    self.bump();
                }
                b'.' if !is_float => {
                    is_float = true;
                    self.bump();
                }
                b'e' | b'E' => {
                    is_float = true;
                    self.bump();
                    if matches!(self.peek(), Some(b'+' | b'-')) {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
        if matches!(self.peek(), Some(b'j' | b'J')) {
            return Err(self.err(self.span(), "a real number (complex literals are not supported)"));
        }
        let raw: String = self.text[start..self.pos].chars().filter(|&c| c != '_').collect();
        if is_float {
            let v: f64 = raw.parse().map_err(|_| self.err(span, "a valid number"))?;
            self.push(Tok::Float(v), span);
        } else {
            let v: i64 = raw.parse().map_err(|_| self.err(span, "an integer that fits in 64 bits"))?;
            self.push(Tok::Int(v), span);
        }
        Ok(())
    }

    fn name_or_string(&mut self) -> Result<(), SyntaxError> {
        let span = self.span();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == b'_' || c.is_ascii_alphanumeric() || c >= 0x80 {
                self.bump();
            } else {
                break;
            }
        }
        let word = &self.text[start..self.pos];
        if matches!(self.peek(), Some(b'"' | b'\''))
            && word.len() <= 2
            && word.chars().all(|c| matches!(c.to_ascii_lowercase(), 'r' | 'b' | 'f' | 'u'))
        {
            return self.string(word.to_ascii_lowercase());
        }
        self.push(Tok::Name(word.to_string()), span);
        Ok(())
    }

    fn string(&mut self, prefix: String) -> Result<(), SyntaxError> {
        let span = self.span();
        let quote = self.bump().expect("caller checked quote");
        let triple = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.bump();
            self.bump();
        }
        let raw = prefix.contains('r');
        let mut out = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(self.err(span, "end of string literal"));
            };
            if c == quote {
                if !triple {
                    self.bump();
                    break;
                }
                if self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                    self.bump();
                    self.bump();
                    self.bump();
                    break;
                }
            }
            if c == b'\n' && !triple {
                return Err(self.err(span, "end of string literal before end of line"));
            }
            if c == b'\\' && !raw {
                self.bump();
                let Some(e) = self.bump() else {
                    return Err(self.err(span, "end of string literal"));
                };
                match e {
                    b'n' => out.push('\n'),
                    b't' => out.push('\t'),
                    b'r' => out.push('\r'),
                    b'0' => out.push('\0'),
                    b'\\' => out.push('\\'),
                    b'\'' => out.push('\''),
                    b'"' => out.push('"'),
                    b'\n' => {}
                    other => {
                        out.push('\\');
                        out.push(other as char);
                    }
                }
                continue;
            }
            let start = self.pos;
            self.bump();
            while self.pos < self.src.len() && (self.src[self.pos] & 0xC0) == 0x80 {
                self.pos += 1;
            }
            out.push_str(&self.text[start..self.pos]);
        }
        self.push(Tok::Str(out), span);
        Ok(())
    }

    fn operator(&mut self) -> Result<(), SyntaxError> {
        let span = self.span();
        let rest = &self.src[self.pos..];
        let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(op.as_bytes())) else {
            let ch = self.text[self.pos..].chars().next().unwrap_or('?');
            return Err(self.err(span, format!("a token, found unexpected character {ch:?}")));
        };
        for _ in 0..op.len() {
            self.bump();
        }
        match *op {
            "(" | "[" | "{" => self.brackets.push((op.as_bytes()[0], span)),
            ")" | "]" | "}" => {
                let open = match *op {
                    ")" => b'(',
                    "]" => b'[',
                    _ => b'{',
                };
                match self.brackets.pop() {
                    Some((o, _)) if o == open => {}
                    Some((o, _)) => return Err(self.err(span, format!("closing bracket for `{}`", o as char))),
                    None => return Err(self.err(span, format!("no unmatched `{}` before this", op))),
                }
            }
            _ => {}
        }
        self.push(Tok::Op(op), span);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn indentation_produces_block_tokens() {
        let t = toks("if x:\n    y = 1\nz\n");
        assert!(t.contains(&Tok::Indent));
        assert!(t.contains(&Tok::Dedent));
    }

    #[test]
    fn brackets_join_lines() {
        let t = toks("f(1,\n  2)\n");
        assert_eq!(t.iter().filter(|t| **t == Tok::Newline).count(), 1);
    }

    #[test]
    fn numbers_and_strings() {
        assert_eq!(
            toks("1e-3 0x10 'a\\n' r'\\d'"),
            vec![
                Tok::Float(0.001),
                Tok::Int(16),
                Tok::Str("a\n".into()),
                Tok::Str("\\d".into()),
                Tok::Newline,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn unbalanced_bracket_reports_the_open_line() {
        let err = tokenize("x = 1\ny = f(2,\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn stray_closer_is_an_error() {
        let err = tokenize("x = 1)\n").unwrap_err();
        assert_eq!((err.line, err.column), (1, 6));
    }
}
