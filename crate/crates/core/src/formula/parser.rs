use thiserror::Error;

use super::{Connective, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Top,
    Bot,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Box,
    Diamond,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(v) => format!("variable `{v}`"),
            Tok::Top => "`#t`".into(),
            Tok::Bot => "`#f`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Box => "`[]`".into(),
            Tok::Diamond => "`<>`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset: usize, message: &str| ParseError {
        offset,
        message: message.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &text[i..];
        let (tok, len) = if c.is_ascii_alphabetic() {
            let len = rest
                .bytes()
                .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
                .count();
            (Tok::Ident(rest[..len].to_string()), len)
        } else if rest.starts_with("#t") {
            (Tok::Top, 2)
        } else if rest.starts_with("#f") {
            (Tok::Bot, 2)
        } else if rest.starts_with("<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with("->") {
            (Tok::Implies, 2)
        } else if rest.starts_with("[]") {
            (Tok::Box, 2)
        } else if rest.starts_with("<>") {
            (Tok::Diamond, 2)
        } else {
            match c {
                b'!' => (Tok::Not, 1),
                b'&' => (Tok::And, 1),
                b'|' => (Tok::Or, 1),
                b'(' => (Tok::LParen, 1),
                b')' => (Tok::RParen, 1),
                _ => {
                    let ch = rest.chars().next().unwrap_or('?');
                    return Err(err(start, &format!("unexpected character `{ch}`")));
                }
            }
        };
        out.push((start, tok));
        i += len;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of input".to_string(),
        };
        ParseError {
            offset: self.offset(),
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implication()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.implication()?;
            lhs = Formula::binary(Connective::Iff, lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implication()?;
            return Ok(Formula::binary(Connective::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let rhs = self.conjunction()?;
            lhs = Formula::binary(Connective::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            let rhs = self.unary()?;
            lhs = Formula::binary(Connective::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Not) {
            return Ok(Formula::neg(self.unary()?));
        }
        if self.eat(&Tok::Box) {
            return Ok(Formula::boxed(self.unary()?));
        }
        if self.eat(&Tok::Diamond) {
            return Ok(Formula::diamond(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let t = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(self.error("a formula")),
        };
        match t {
            Tok::Ident(v) => {
                self.pos += 1;
                Ok(Formula::Var(v))
            }
            Tok::Top => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Tok::Bot => {
                self.pos += 1;
                Ok(Formula::Bot)
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.error("`)`"));
                }
                Ok(inner)
            }
            _ => Err(self.error("a formula")),
        }
    }
}

/// Parses the ASCII concrete syntax.
///
/// Precedence from tightest: `!`/`[]`/`<>`, `&`, `|`, `->`, `<->`.
/// `->` associates to the right, the other binary connectives to the left.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = parser.iff()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.error("end of input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lob_axiom() {
        let p = Formula::var("p");
        let expected = Formula::implies(
            Formula::boxed(Formula::implies(Formula::boxed(p.clone()), p.clone())),
            Formula::boxed(p),
        );
        assert_eq!(parse_formula("[]([]p -> p) -> []p").unwrap(), expected);
    }

    #[test]
    fn atoms_and_constants() {
        assert_eq!(parse_formula("p").unwrap(), Formula::var("p"));
        assert_eq!(parse_formula(" x_1 ").unwrap(), Formula::var("x_1"));
        assert_eq!(parse_formula("#t").unwrap(), Formula::Top);
        assert_eq!(parse_formula("#f").unwrap(), Formula::Bot);
    }

    #[test]
    fn truncated_input_reports_end_offset() {
        let err = parse_formula("p ->").unwrap_err();
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn error_positions() {
        assert_eq!(parse_formula("").unwrap_err().offset, 0);
        assert_eq!(parse_formula("(p & q").unwrap_err().offset, 6);
        assert_eq!(parse_formula("p q").unwrap_err().offset, 2);
        assert_eq!(parse_formula("p $ q").unwrap_err().offset, 2);
        assert_eq!(parse_formula("p & )").unwrap_err().offset, 4);
    }

    #[test]
    fn precedence_and_associativity() {
        let f = |s| parse_formula(s).unwrap();
        assert_eq!(f("!p & q"), f("(!p) & q"));
        assert_eq!(f("p & q | r"), f("(p & q) | r"));
        assert_eq!(f("p | q -> r"), f("(p | q) -> r"));
        assert_eq!(f("p -> q <-> r"), f("(p -> q) <-> r"));
        assert_eq!(f("p -> q -> r"), f("p -> (q -> r)"));
        assert_eq!(f("p & q & r"), f("(p & q) & r"));
        assert_eq!(f("p <-> q <-> r"), f("(p <-> q) <-> r"));
        assert_eq!(f("[]p -> p"), f("([]p) -> p"));
    }

    #[test]
    fn diamond_is_desugared() {
        let f = parse_formula("<>p").unwrap();
        assert_eq!(f, Formula::neg(Formula::boxed(Formula::neg(Formula::var("p")))));
    }
}
