//! Text format of g-choreographies.
//!
//! ```text
//! G ::= "0" | Ident "->" Ident ":" Ident | G ";" G | G "|" G | G "+" G | "(" G ")"
//! ```
//!
//! `;` binds tighter than `|`, which binds tighter than `+`; all three are
//! left-associative. `//` starts a comment running to the end of the line.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{assign_control_points, GChor, Message, Participant};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Zero,
    Arrow,
    Colon,
    Semi,
    Bar,
    Plus,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Zero => f.write_str("`0`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek_char() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.src[self.pos..].starts_with("//") => {
                    while let Some(c) = self.peek_char() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn span_from(&self, start: usize, line: usize, column: usize) -> SourceSpan {
        SourceSpan {
            start,
            end: self.pos,
            line,
            column,
        }
    }

    fn next(&mut self) -> Result<(Tok, SourceSpan)> {
        self.skip_trivia();
        let (start, line, column) = (self.pos, self.line, self.col);
        let Some(c) = self.bump() else {
            return Ok((Tok::Eof, self.span_from(start, line, column)));
        };
        let tok = match c {
            ';' => Tok::Semi,
            '|' => Tok::Bar,
            '+' => Tok::Plus,
            ':' => Tok::Colon,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '-' if self.peek_char() == Some('>') => {
                self.bump();
                Tok::Arrow
            }
            c if c.is_ascii_digit() => {
                while matches!(self.peek_char(), Some(d) if d.is_ascii_alphanumeric() || d == '_') {
                    self.bump();
                }
                if &self.src[start..self.pos] != "0" {
                    return Err(Error::Syntax {
                        span: self.span_from(start, line, column),
                        message: format!(
                            "`{}` is not a valid token; identifiers start with a letter",
                            &self.src[start..self.pos]
                        ),
                    });
                }
                Tok::Zero
            }
            c if c.is_ascii_alphabetic() => {
                while matches!(self.peek_char(), Some(d) if d.is_ascii_alphanumeric() || d == '_') {
                    self.bump();
                }
                Tok::Ident(self.src[start..self.pos].to_string())
            }
            other => {
                return Err(Error::Syntax {
                    span: self.span_from(start, line, column),
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        Ok((tok, self.span_from(start, line, column)))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    span: SourceSpan,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut lexer = Lexer::new(src);
        let (tok, span) = lexer.next()?;
        Ok(Parser { lexer, tok, span })
    }

    fn advance(&mut self) -> Result<(Tok, SourceSpan)> {
        let (tok, span) = self.lexer.next()?;
        let prev_tok = std::mem::replace(&mut self.tok, tok);
        let prev_span = std::mem::replace(&mut self.span, span);
        Ok((prev_tok, prev_span))
    }

    fn error<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Syntax {
            span: self.span,
            message: format!("expected {expected}, found {}", self.tok),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.tok == tok {
            self.advance()?;
            Ok(())
        } else {
            self.error(&tok.to_string())
        }
    }

    fn ident(&mut self) -> Result<String> {
        match &self.tok {
            Tok::Ident(_) => match self.advance()?.0 {
                Tok::Ident(s) => Ok(s),
                _ => unreachable!(),
            },
            _ => self.error("an identifier"),
        }
    }

    fn choice(&mut self) -> Result<GChor> {
        let mut g = self.parallel()?;
        while self.tok == Tok::Plus {
            self.advance()?;
            g = GChor::cho(g, self.parallel()?);
        }
        Ok(g)
    }

    fn parallel(&mut self) -> Result<GChor> {
        let mut g = self.sequence()?;
        while self.tok == Tok::Bar {
            self.advance()?;
            g = GChor::par(g, self.sequence()?);
        }
        Ok(g)
    }

    fn sequence(&mut self) -> Result<GChor> {
        let mut g = self.atom()?;
        while self.tok == Tok::Semi {
            self.advance()?;
            g = GChor::seq(g, self.atom()?);
        }
        Ok(g)
    }

    fn atom(&mut self) -> Result<GChor> {
        match self.tok {
            Tok::Zero => {
                self.advance()?;
                Ok(GChor::Zero)
            }
            Tok::LParen => {
                self.advance()?;
                let g = self.choice()?;
                self.expect(Tok::RParen)?;
                Ok(g)
            }
            Tok::Ident(_) => {
                let sender = self.ident()?;
                self.expect(Tok::Arrow)?;
                let receiver = self.ident()?;
                self.expect(Tok::Colon)?;
                let msg = self.ident()?;
                if sender == receiver {
                    return Err(Error::SelfInteraction(Participant::new(sender)?));
                }
                Ok(GChor::interaction(
                    Participant::new(sender)?,
                    Participant::new(receiver)?,
                    Message::new(msg)?,
                ))
            }
            _ => self.error("`0`, `(` or an interaction"),
        }
    }
}

/// Parses a choreography and assigns its control points.
pub fn parse(text: &str) -> Result<GChor> {
    let mut parser = Parser::new(text)?;
    let g = parser.choice()?;
    if parser.tok != Tok::Eof {
        return parser.error("`;`, `|`, `+` or end of input");
    }
    assign_control_points(&g)
}

/// Fully parenthesised canonical text.
pub fn print(g: &GChor) -> String {
    let mut out = String::new();
    write_term(g, &mut out);
    out
}

fn write_term(g: &GChor, out: &mut String) {
    match g {
        GChor::Zero => out.push('0'),
        GChor::Interaction {
            sender,
            receiver,
            msg,
            ..
        } => {
            out.push_str(&format!("{sender}->{receiver}:{msg}"));
        }
        GChor::Seq(l, r) => binary(l, " ; ", r, out),
        GChor::Par { left, right, .. } => binary(left, " | ", right, out),
        GChor::Cho { left, right, .. } => binary(left, " + ", right, out),
    }
}

fn binary(l: &GChor, op: &str, r: &GChor, out: &mut String) {
    out.push('(');
    write_term(l, out);
    out.push_str(op);
    write_term(r, out);
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::ControlPoint;

    #[test]
    fn sequence_of_two() {
        let g = parse("A->B:x ; B->A:y").unwrap();
        match &g {
            GChor::Seq(l, r) => {
                assert_eq!(l.control_point(), Some(ControlPoint::new(1)));
                assert_eq!(r.control_point(), Some(ControlPoint::new(2)));
            }
            _ => panic!("expected a sequence, got {g:?}"),
        }
        assert_eq!(print(&g), "(A->B:x ; B->A:y)");
    }

    #[test]
    fn bar_binds_tighter_than_plus() {
        let g = parse("A->B:x + A->B:y | C->D:z").unwrap();
        assert_eq!(print(&g), "(A->B:x + (A->B:y | C->D:z))");
        let g = parse("A->B:x ; A->B:y | C->D:z").unwrap();
        assert_eq!(print(&g), "((A->B:x ; A->B:y) | C->D:z)");
    }

    #[test]
    fn left_associative() {
        let g = parse("A->B:x ; A->B:y ; A->B:z").unwrap();
        assert_eq!(print(&g), "((A->B:x ; A->B:y) ; A->B:z)");
    }

    #[test]
    fn self_interaction() {
        assert!(matches!(parse("A->A:x"), Err(Error::SelfInteraction(_))));
    }

    #[test]
    fn zero_and_comments() {
        assert_eq!(print(&parse("0").unwrap()), "0");
        let g = parse("// leading comment\r\n(A->B:x) // trailing\r\n; 0").unwrap();
        assert_eq!(print(&g), "(A->B:x ; 0)");
    }

    #[test]
    fn errors_carry_spans() {
        for bad in ["A->B", "A->B:x ;", "(A->B:x", "A B", "A->B:x )", "A->B:x $", "", "01"] {
            match parse(bad) {
                Err(Error::Syntax { span, .. }) => {
                    assert!(span.start <= span.end && span.end <= bad.len(), "{bad}: {span:?}")
                }
                other => panic!("{bad}: expected syntax error, got {other:?}"),
            }
        }
        match parse("A->B:x ;\n  ;") {
            Err(Error::Syntax { span, .. }) => assert_eq!((span.line, span.column), (2, 3)),
            other => panic!("{other:?}"),
        }
    }
}
