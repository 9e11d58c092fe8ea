//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! sum     = signed { ("+" | "-") signed } ;
//! signed  = ("-" | "+") signed | product ;
//! product = factor { ("*" | "/") factor } ;
//! factor  = "-" factor | power ;
//! power   = primary [ "^" factor ] ;
//! primary = number | variable | function "(" sum ")" | "(" sum ")" ;
//! ```

use super::ast::{BinaryOp, Function, Node};
use super::{ParseError, Span};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                i += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                match text.parse::<f64>() {
                    Ok(v) => Tok::Num(v),
                    Err(_) => {
                        return Err(ParseError::Syntax {
                            offset: start,
                            expected: "a number".into(),
                            found: format!("'{text}'"),
                        })
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                Tok::Ident(src[start..i].to_string())
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: "an expression token".into(),
                    found: format!("'{ch}'"),
                });
            }
        };
        out.push(Token {
            tok,
            start,
            end: i,
        });
    }
    out.push(Token {
        tok: Tok::End,
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

pub(crate) struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    variables: &'a [String],
}

impl<'a> Parser<'a> {
    pub(crate) fn parse(src: &str, variables: &'a [String]) -> Result<Node, ParseError> {
        if src.trim().is_empty() {
            return Err(ParseError::Empty);
        }
        let mut p = Parser {
            tokens: lex(src)?,
            pos: 0,
            variables,
        };
        let node = p.sum()?;
        if p.peek() != &Tok::End {
            return Err(p.unexpected("an operator or end of input"));
        }
        Ok(node)
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].start
    }

    fn prev_end(&self) -> usize {
        self.tokens[self.pos - 1].end
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.into(),
            found: self.peek().describe(),
        }
    }

    fn sum(&mut self) -> Result<Node, ParseError> {
        let start = self.offset();
        let mut lhs = self.signed()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinaryOp::Add,
                Tok::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.signed()?;
            lhs = self.join(op, lhs, rhs, start);
        }
    }

    fn signed(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Node::neg(self.signed()?))
            }
            Tok::Op('+') => {
                self.bump();
                self.signed()
            }
            _ => self.product(),
        }
    }

    fn product(&mut self) -> Result<Node, ParseError> {
        let start = self.offset();
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinaryOp::Mul,
                Tok::Op('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = self.join(op, lhs, rhs, start);
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        if self.peek() == &Tok::Op('-') {
            self.bump();
            return Ok(Node::neg(self.factor()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let start = self.offset();
        let base = self.primary()?;
        if self.peek() == &Tok::Op('^') {
            self.bump();
            let exponent = self.factor()?;
            return Ok(self.join(BinaryOp::Pow, base, exponent, start));
        }
        Ok(base)
    }

    fn join(&self, op: BinaryOp, lhs: Node, rhs: Node, start: usize) -> Node {
        Node::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            span: Some(Span {
                start,
                end: self.prev_end(),
            }),
        }
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.sum()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Function::from_name(&name) {
                    if self.peek() != &Tok::LParen {
                        return Err(self.unexpected(&format!("'(' after function '{name}'")));
                    }
                    self.bump();
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(Node::Call {
                        func,
                        arg: Box::new(arg),
                        span: Some(Span {
                            start,
                            end: self.prev_end(),
                        }),
                    });
                }
                match self.variables.iter().position(|v| *v == name) {
                    Some(i) => Ok(Node::Var(i)),
                    None => Err(ParseError::UnknownIdentifier {
                        offset: start,
                        name,
                    }),
                }
            }
            _ => Err(self.unexpected("a number, variable, function call or '('")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.peek() == &Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("')'"))
        }
    }
}
