//! Recursive-descent parser for the infix grammar.

use std::collections::BTreeSet;

use super::{Expr, UnaryOp, VARIABLES};
use crate::error::ExprError;

/// Parses with the default vocabulary (no declared parameters).
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    Parser::new().parse(text)
}

/// Parser configured with a set of declared parameter names.
#[derive(Debug, Clone, Default)]
pub struct Parser {
    params: BTreeSet<String>,
}

impl Parser {
    pub fn new() -> Self {
        Parser::default()
    }

    pub fn with_params<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.params.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn parse(&self, text: &str) -> Result<Expr, ExprError> {
        let tokens = lex(text)?;
        if tokens.is_empty() {
            return Err(ExprError::Empty);
        }
        let mut st = State {
            toks: &tokens,
            pos: 0,
            params: &self.params,
            end: text.len(),
        };
        let e = st.expr()?;
        if let Some(tok) = st.peek() {
            return Err(ExprError::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", tok.kind.describe()),
            });
        }
        Ok(e)
    }

}

fn is_known(params: &BTreeSet<String>, name: &str) -> bool {
    VARIABLES.contains(&name) || name == "pi" || params.contains(name)
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Num(v) => format!("number {v}"),
            Kind::Ident(s) => format!("identifier `{s}`"),
            Kind::Op(c) => format!("`{c}`"),
            Kind::LParen => "`(`".into(),
            Kind::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push(Token {
                    kind: Kind::Op(c as char),
                    offset: start,
                });
                i += 1;
            }
            b'(' => {
                out.push(Token {
                    kind: Kind::LParen,
                    offset: start,
                });
                i += 1;
            }
            b')' => {
                out.push(Token {
                    kind: Kind::RParen,
                    offset: start,
                });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
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
                let lexeme = &text[start..i];
                let v: f64 = lexeme.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    message: format!("malformed number `{lexeme}`"),
                })?;
                out.push(Token {
                    kind: Kind::Num(v),
                    offset: start,
                });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: Kind::Ident(text[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

struct State<'a> {
    toks: &'a [Token],
    pos: usize,
    params: &'a BTreeSet<String>,
    end: usize,
}

impl State<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: Kind::Op(c), ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { lhs * rhs } else { lhs / rhs };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let at = self.offset();
            let exponent = self.unary()?;
            let c = exponent
                .const_value()
                .ok_or(ExprError::NonConstantExponent { offset: at })?;
            return Ok(base.powf(c));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(ExprError::Syntax {
                offset: self.end,
                message: "unexpected end of input".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            Kind::Num(v) => Ok(Expr::Const(v)),
            Kind::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Kind::Ident(name) => {
                if matches!(self.peek(), Some(Token { kind: Kind::LParen, .. })) {
                    let op = UnaryOp::from_name(&name).ok_or(ExprError::UnknownFunction {
                        name: name.clone(),
                        offset: tok.offset,
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::unary(op, arg));
                }
                if is_known(self.params, &name) {
                    Ok(Expr::var(&name))
                } else {
                    Err(ExprError::UnknownIdentifier {
                        name,
                        offset: tok.offset,
                    })
                }
            }
            other => Err(ExprError::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        match self.peek() {
            Some(Token {
                kind: Kind::RParen, ..
            }) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(ExprError::Syntax {
                offset: self.offset(),
                message: "expected `)`".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_binds_tighter_than_product() {
        assert_eq!(
            parse("u^2*ux").unwrap(),
            Expr::var("u").powf(2.0) * Expr::var("ux")
        );
    }

    #[test]
    fn reciprocal_tree() {
        assert_eq!(parse("1/u").unwrap(), Expr::c(1.0) / Expr::var("u"));
    }

    #[test]
    fn undeclared_identifier() {
        assert_eq!(
            parse("2*a"),
            Err(ExprError::UnknownIdentifier {
                name: "a".into(),
                offset: 2
            })
        );
    }

    #[test]
    fn declared_parameter_is_accepted() {
        let p = Parser::new().with_params(["a"]);
        assert!(p.parse("2*a").is_ok());
    }

    #[test]
    fn unknown_function() {
        assert!(matches!(
            parse("cosh(x)"),
            Err(ExprError::UnknownFunction { offset: 0, .. })
        ));
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse("   "), Err(ExprError::Empty));
    }

    #[test]
    fn unclosed_paren_reports_offset() {
        match parse("2*sqrt(u") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_constant_exponent() {
        assert_eq!(
            parse("u^x"),
            Err(ExprError::NonConstantExponent { offset: 2 })
        );
    }

    #[test]
    fn folded_exponents() {
        assert_eq!(parse("x^(4/3)").unwrap(), Expr::var("x").powf(4.0 / 3.0));
        assert_eq!(parse("u^-2").unwrap(), Expr::var("u").powf(-2.0));
    }

    #[test]
    fn unary_minus_below_power() {
        let e = parse("-x^2").unwrap();
        assert_eq!(e, -(Expr::var("x").powf(2.0)));
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::c(1.5e-3));
        assert_eq!(parse(".5").unwrap(), Expr::c(0.5));
    }

    #[test]
    fn left_associative_subtraction() {
        let e = parse("x - t - u").unwrap();
        assert_eq!(e, (Expr::var("x") - Expr::var("t")) - Expr::var("u"));
    }

    #[test]
    fn trailing_token() {
        assert!(matches!(parse("x )"), Err(ExprError::Syntax { offset: 2, .. })));
    }
}
