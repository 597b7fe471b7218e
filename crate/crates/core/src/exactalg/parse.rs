//! Recursive-descent parser for the expression mini-grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := rational | 't' index | 'exp' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Division is only allowed by nonzero constants and `exp` only of `k*ti`
//! for a declared generator. Anything that would leave the quasi-polynomial
//! ring (`sqrt`, `log`, fractional or negative powers) is reported as
//! [`Error::OutOfRing`] rather than a syntax error.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use super::{QPoly, Rational};
use crate::error::{Error, Result};

/// A declared exponential generator `exp(rate * t^(var+1))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpGen {
    pub var: usize,
    pub rate: Rational,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                line: l0,
                column: c0,
            });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                return Err(Error::Parse {
                    line: l0,
                    column: c0,
                    message: "decimal literals are not supported; write p/q".into(),
                });
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Num(s.parse().expect("digits")),
                line: l0,
                column: c0,
            });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                line: l0,
                column: c0,
            });
            continue;
        }
        return Err(Error::Parse {
            line: l0,
            column: c0,
            message: format!("unexpected character '{c}'"),
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    nvars: usize,
    expgens: &'a [ExpGen],
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, t: &Token, message: impl Into<String>) -> Error {
        Error::Parse {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn out_of_ring(&self, t: &Token, message: impl Into<String>) -> Error {
        Error::OutOfRing {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token> {
        let t = self.next();
        if t.tok == tok {
            Ok(t)
        } else {
            Err(self.err(&t, format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<QPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    acc += &self.term()?;
                }
                Tok::Minus => {
                    self.next();
                    acc -= &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<QPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    let slash = self.next();
                    let d = self.unary()?;
                    match d.as_constant() {
                        Some(c) if !c.is_zero() => acc = acc.scale(&c.recip()),
                        Some(_) => return Err(self.err(&slash, "division by zero")),
                        None => return Err(self.out_of_ring(&slash, "division by a non-constant expression")),
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<QPoly> {
        if self.peek().tok == Tok::Minus {
            self.next();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<QPoly> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        let caret = self.next();
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(ref k) => {
                self.next();
                let e = k
                    .to_u32()
                    .filter(|&e| e <= 64)
                    .ok_or_else(|| self.err(&t, "exponent too large"))?;
                Ok(base.pow(e))
            }
            Tok::Minus => Err(self.out_of_ring(&caret, "negative exponent")),
            Tok::LParen => Err(self.out_of_ring(&caret, "non-integer exponent")),
            _ => Err(self.err(&t, "expected integer exponent")),
        }
    }

    fn variable_index(&self, t: &Token, name: &str) -> Result<Option<usize>> {
        let Some(digits) = name.strip_prefix('t') else {
            return Ok(None);
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Ok(None);
        }
        let i: usize = digits.parse().map_err(|_| self.err(t, "bad variable index"))?;
        if i == 0 || i > self.nvars {
            return Err(self.err(t, format!("variable {name} out of range t1..t{}", self.nvars)));
        }
        Ok(Some(i - 1))
    }

    fn atom(&mut self) -> Result<QPoly> {
        let t = self.next();
        match &t.tok {
            Tok::Num(k) => Ok(QPoly::constant(self.nvars, Rational::from_integer(k.clone()))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(i) = self.variable_index(&t, name)? {
                    return Ok(QPoly::var(self.nvars, i));
                }
                match name.as_str() {
                    "exp" => self.exp_call(&t),
                    "sqrt" | "log" | "ln" | "sin" | "cos" | "tan" => {
                        Err(self.out_of_ring(&t, format!("function '{name}' is not in the ring")))
                    }
                    _ => Err(self.err(&t, format!("unknown identifier '{name}'"))),
                }
            }
            Tok::End => Err(self.err(&t, "unexpected end of expression")),
            _ => Err(self.err(&t, "expected a number, variable, exp(...) or '('")),
        }
    }

    fn exp_call(&mut self, name: &Token) -> Result<QPoly> {
        self.expect(Tok::LParen, "'(' after exp")?;
        let arg = self.expr()?;
        self.expect(Tok::RParen, "')'")?;
        let linear = (arg.len() == 1).then(|| arg.terms().next().unwrap());
        let Some((m, k)) = linear.filter(|(m, _)| m.is_polynomial() && m.total_degree() == 1) else {
            return Err(self.out_of_ring(name, "exp argument must have the form k*ti"));
        };
        let var = (0..self.nvars).find(|&i| m.power(i) == 1).unwrap();
        let declared = self
            .expgens
            .iter()
            .any(|g| g.var == var && !g.rate.is_zero() && (k / &g.rate).is_integer());
        if !declared {
            return Err(self.out_of_ring(
                name,
                format!(
                    "exp({}*t{}) is not generated by a declared exponential",
                    super::fmt_rational(k),
                    var + 1
                ),
            ));
        }
        Ok(QPoly::exp(self.nvars, var, k.clone()))
    }
}

/// Parses an expression in `nvars` coordinates.
pub fn parse_expr(src: &str, nvars: usize, expgens: &[ExpGen]) -> Result<QPoly> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        nvars,
        expgens,
    };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(p.err(&t, "unexpected token after expression"));
    }
    Ok(e)
}

/// Parses an expression that must be a rational constant.
pub fn parse_constant(src: &str) -> Result<Rational> {
    let e = parse_expr(src, 0, &[])?;
    e.as_constant().ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "expected a constant".into(),
    })
}

impl ExpGen {
    pub fn one(var: usize) -> Self {
        ExpGen {
            var,
            rate: Rational::one(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    fn p(s: &str) -> Result<QPoly> {
        parse_expr(s, 2, &[ExpGen::one(1)])
    }

    #[test]
    fn parses_potential() {
        let f = p("1/2*t1^2*t2 + exp(t2)").unwrap();
        let t1 = QPoly::var(2, 0);
        let t2 = QPoly::var(2, 1);
        let expected = &(&t1.pow(2) * &t2).scale(&rat(1, 2)) + &QPoly::exp(2, 1, rat(1, 1));
        assert_eq!(f, expected);
        assert_eq!(p(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn precedence_and_unary_minus() {
        assert_eq!(p("-t1^2").unwrap(), -QPoly::var(2, 0).pow(2));
        assert_eq!(
            p("2*(t1 - 1)/4").unwrap(),
            (&QPoly::var(2, 0) - &QPoly::one(2)).scale(&rat(1, 2))
        );
        assert_eq!(p("exp(2*t2)").unwrap(), QPoly::exp(2, 1, rat(2, 1)));
        assert_eq!(p("t1^3/6").unwrap(), QPoly::var(2, 0).pow(3).scale(&rat(1, 6)));
    }

    #[test]
    fn double_plus_reports_location() {
        match p("t1 ++ 2") {
            Err(Error::Parse { line: 1, column: 5, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_ring_inputs() {
        assert!(matches!(p("t1^(1/2)"), Err(Error::OutOfRing { .. })));
        assert!(matches!(p("sqrt(t1)"), Err(Error::OutOfRing { .. })));
        assert!(matches!(p("1/t1"), Err(Error::OutOfRing { .. })));
        assert!(matches!(p("exp(t1)"), Err(Error::OutOfRing { .. })));
        assert!(matches!(p("exp(t2^2)"), Err(Error::OutOfRing { .. })));
    }

    #[test]
    fn rejects_bad_variables() {
        assert!(matches!(p("t3"), Err(Error::Parse { .. })));
        assert!(matches!(p("x"), Err(Error::Parse { .. })));
        assert!(matches!(p("1.5"), Err(Error::Parse { .. })));
    }

    #[test]
    fn multiline_location() {
        match parse_expr("t1 +\n  * t2", 2, &[]) {
            Err(Error::Parse { line: 2, column: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
