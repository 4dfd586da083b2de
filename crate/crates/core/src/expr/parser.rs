//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ['-'] power
//! power  := atom ['^' factor]
//! atom   := number | 'x' | 'y' | func '(' expr ')' | '(' expr ')'
//! func   := exp | log | sin | cos | abs | sqrt
//! ```

use super::lexer::{tokenize, Token, TokenKind};
use super::{Func, Node};
use crate::error::ParseError;

pub(crate) fn parse_node(source: &str) -> Result<Node, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, at: 0 };
    let node = parser.expr()?;
    parser.expect_end()?;
    Ok(node)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.at].clone();
        if tok.kind != TokenKind::End {
            self.at += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        let tok = self.peek();
        ParseError::Unexpected {
            found: tok.kind.describe(),
            expected,
            pos: tok.pos,
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek().kind {
            TokenKind::End => Ok(()),
            _ => Err(self.unexpected("an operator or end of input")),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                TokenKind::Plus => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                TokenKind::Minus => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().kind {
                TokenKind::Star => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                TokenKind::Slash => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        if self.peek().kind == TokenKind::Minus {
            self.bump();
            return Ok(Node::Neg(Box::new(self.power()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.peek().kind != TokenKind::Caret {
            return Ok(base);
        }
        self.bump();
        let exp_pos = self.peek().pos;
        let exponent = self.factor()?;
        if exponent.has_variables() {
            return Err(ParseError::NonConstantExponent { pos: exp_pos });
        }
        Ok(Node::Pow(Box::new(base), Box::new(exponent)))
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Number(v) => {
                self.bump();
                Ok(Node::Num(v))
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            TokenKind::Ident(ref name) => {
                self.bump();
                match name.as_str() {
                    "x" => Ok(Node::X),
                    "y" => Ok(Node::Y),
                    other => {
                        let func = Func::from_name(other).ok_or_else(|| {
                            ParseError::UnknownIdentifier {
                                name: other.to_string(),
                                pos: tok.pos,
                            }
                        })?;
                        if self.peek().kind != TokenKind::LParen {
                            return Err(self.unexpected("\"(\" after function name"));
                        }
                        self.bump();
                        let arg = self.expr()?;
                        self.close_paren()?;
                        Ok(Node::Call(func, Box::new(arg)))
                    }
                }
            }
            _ => Err(self.unexpected("a number, variable, function or \"(\"")),
        }
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        if self.peek().kind == TokenKind::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("\")\""))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: Node) -> Box<Node> {
        Box::new(n)
    }

    #[test]
    fn minimal_product() {
        assert_eq!(parse_node("x*y").unwrap(), Node::Mul(b(Node::X), b(Node::Y)));
    }

    #[test]
    fn precedence_shape() {
        let expected = Node::Add(
            b(Node::Mul(
                b(Node::Call(Func::Sin, b(Node::X))),
                b(Node::Call(Func::Sin, b(Node::Y))),
            )),
            b(Node::Pow(b(Node::X), b(Node::Num(2.0)))),
        );
        assert_eq!(parse_node("sin(x)*sin(y) + x^2").unwrap(), expected);
    }

    #[test]
    fn power_is_right_associative_and_binds_tighter_than_negation() {
        assert_eq!(
            parse_node("2^3^2").unwrap(),
            Node::Pow(b(Node::Num(2.0)), b(Node::Pow(b(Node::Num(3.0)), b(Node::Num(2.0)))))
        );
        assert_eq!(
            parse_node("-x^2").unwrap(),
            Node::Neg(b(Node::Pow(b(Node::X), b(Node::Num(2.0)))))
        );
        assert_eq!(
            parse_node("x^-2").unwrap(),
            Node::Pow(b(Node::X), b(Node::Neg(b(Node::Num(2.0)))))
        );
    }

    #[test]
    fn subtraction_is_left_associative() {
        assert_eq!(
            parse_node("x-y-1").unwrap(),
            Node::Sub(b(Node::Sub(b(Node::X), b(Node::Y))), b(Node::Num(1.0)))
        );
    }

    #[test]
    fn malformed_operator_sequence_reports_position() {
        let err = parse_node("x + * y").unwrap_err();
        match err {
            ParseError::Unexpected { ref found, pos, .. } => {
                assert_eq!(pos, 4);
                assert!(found.contains('*'));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn error_cases() {
        assert_eq!(parse_node("  "), Err(ParseError::Empty));
        assert!(matches!(
            parse_node("x + z"),
            Err(ParseError::UnknownIdentifier { pos: 4, .. })
        ));
        assert!(matches!(
            parse_node("x^y"),
            Err(ParseError::NonConstantExponent { pos: 2 })
        ));
        assert!(matches!(parse_node("sin x"), Err(ParseError::Unexpected { pos: 4, .. })));
        assert!(matches!(parse_node("(x+y"), Err(ParseError::Unexpected { pos: 4, .. })));
        assert!(matches!(parse_node("x y"), Err(ParseError::Unexpected { pos: 2, .. })));
        assert!(matches!(parse_node("--x"), Err(ParseError::Unexpected { pos: 1, .. })));
    }
}
