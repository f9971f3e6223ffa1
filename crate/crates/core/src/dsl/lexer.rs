use std::fmt;

/// A region of the source text. Offsets are bytes; line and column are
/// 1-based, columns counted in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Span from the start of `self` to the end of `other`.
    pub fn to(self, other: Span) -> Span {
        Span {
            end: other.end.max(self.end),
            ..self
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Unsigned integer literal; the sign is handled by the parser.
    Int(u64),
    Pid(u32),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Question,
    Bang,
    Plus,
    Minus,
    Star,
    DashDash,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Pid(n) => write!(f, "`#{n}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Question => f.write_str("`?`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::DashDash => f.write_str("`--`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub message: String,
    pub span: Span,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn mark(&self) -> Span {
        Span {
            start: self.pos,
            end: self.pos,
            line: self.line,
            column: self.column,
        }
    }

    fn close(&self, mut span: Span) -> Span {
        span.end = self.pos;
        span
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }
}

/// Splits `src` into tokens, always ending with [`Tok::Eof`]. Lexical errors
/// are collected and the offending character skipped.
pub fn tokenize(src: &str) -> (Vec<Token>, Vec<LexError>) {
    let mut cur = Cursor {
        src,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    loop {
        cur.eat_while(char::is_whitespace);
        if cur.peek() == Some('%') {
            cur.eat_while(|c| c != '\n');
            continue;
        }
        let start = cur.mark();
        let Some(c) = cur.bump() else {
            tokens.push(Token {
                tok: Tok::Eof,
                span: start,
            });
            break;
        };
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '?' => Tok::Question,
            '!' => Tok::Bang,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '-' => match cur.peek() {
                Some('-') => {
                    cur.bump();
                    Tok::DashDash
                }
                Some('>') => {
                    cur.bump();
                    Tok::Arrow
                }
                _ => Tok::Minus,
            },
            '#' => {
                if !cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                    errors.push(LexError {
                        message: "expected digits after `#`".into(),
                        span: cur.close(start),
                    });
                    continue;
                }
                cur.eat_while(|c| c.is_ascii_digit());
                let span = cur.close(start);
                match src[span.start + 1..span.end].parse::<u32>() {
                    Ok(n) => Tok::Pid(n),
                    Err(_) => {
                        errors.push(LexError {
                            message: "process identifier out of range".into(),
                            span,
                        });
                        continue;
                    }
                }
            }
            c if c.is_ascii_digit() => {
                cur.eat_while(|c| c.is_ascii_digit());
                let span = cur.close(start);
                match src[span.start..span.end].parse::<u64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => {
                        errors.push(LexError {
                            message: "integer literal out of range".into(),
                            span,
                        });
                        continue;
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_');
                let span = cur.close(start);
                Tok::Ident(src[span.start..span.end].to_string())
            }
            other => {
                errors.push(LexError {
                    message: format!("unexpected character `{other}`"),
                    span: cur.close(start),
                });
                continue;
            }
        };
        tokens.push(Token {
            tok,
            span: cur.close(start),
        });
    }
    (tokens, errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        let (tokens, errors) = tokenize(src);
        assert!(errors.is_empty(), "{errors:?}");
        tokens.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_and_minus() {
        assert_eq!(
            toks("s0 -- P ! X - 1 -> s1"),
            vec![
                Tok::Ident("s0".into()),
                Tok::DashDash,
                Tok::Ident("P".into()),
                Tok::Bang,
                Tok::Ident("X".into()),
                Tok::Minus,
                Tok::Int(1),
                Tok::Arrow,
                Tok::Ident("s1".into()),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let (tokens, _) = tokenize("% header\n  #12 {");
        assert_eq!(tokens[0].tok, Tok::Pid(12));
        assert_eq!((tokens[0].span.line, tokens[0].span.column), (2, 3));
        assert_eq!(tokens[0].span.len(), 3);
        assert_eq!(tokens[1].tok, Tok::LBrace);
    }

    #[test]
    fn bad_characters_are_reported_and_skipped() {
        let (tokens, errors) = tokenize("a $ b");
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].span.column, 3);
        assert_eq!(tokens.len(), 3);
    }
}
