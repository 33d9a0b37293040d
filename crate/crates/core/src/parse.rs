//! Text input for polynomials and operators.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := ['+' | '-'] term (('+' | '-') term)*
//! term   := unary (('*' | '/' | <juxtaposition>) unary)*
//! unary  := '-' unary | power
//! power  := atom ['^' integer]
//! atom   := integer | 'i' | name | '(' expr ')'
//! ```
//!
//! Division is only by nonzero constants. Decimal literals are rejected so
//! every coefficient stays an exact Gaussian rational.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::ParseError;
use crate::gaussian::GaussianRational;
use crate::poly::UniPoly;
use crate::weyl::{VarNames, WeylElement};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && (chars[i] == '.' || chars[i] == 'e' && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit() || *n == '-')) {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '.' || chars[j] == '-' && chars[j - 1] == 'e') {
                    j += 1;
                }
                return Err(ParseError::NonRational { pos: start, literal: chars[start..j].iter().collect() });
            }
            let digits: String = chars[start..i].iter().collect();
            out.push((start, Tok::Int(digits.parse().expect("ascii digits"))));
        } else if c == '.' {
            return Err(ParseError::NonRational { pos: i, literal: ".".into() });
        } else if c.is_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_alphabetic() {
                i += 1;
            }
            out.push((start, Tok::Name(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

/// Target algebra of the evaluator.
trait Algebra: Clone {
    fn constant(c: GaussianRational) -> Self;
    /// The generator named `name`, if the algebra has one.
    fn generator(&self, name: &str) -> Option<Self>;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn as_constant(&self) -> Option<GaussianRational>;
    fn scale(&self, c: &GaussianRational) -> Self;
}

#[derive(Clone)]
struct PolyIn {
    var: char,
    poly: UniPoly,
}

impl Algebra for PolyIn {
    fn constant(c: GaussianRational) -> Self {
        PolyIn { var: 't', poly: UniPoly::constant(c) }
    }
    fn generator(&self, name: &str) -> Option<Self> {
        (name.len() == 1 && name.starts_with(self.var)).then(|| PolyIn { var: self.var, poly: UniPoly::var() })
    }
    fn add(&self, rhs: &Self) -> Self {
        PolyIn { var: self.var, poly: &self.poly + &rhs.poly }
    }
    fn sub(&self, rhs: &Self) -> Self {
        PolyIn { var: self.var, poly: &self.poly - &rhs.poly }
    }
    fn mul(&self, rhs: &Self) -> Self {
        PolyIn { var: self.var, poly: &self.poly * &rhs.poly }
    }
    fn as_constant(&self) -> Option<GaussianRational> {
        match self.poly.degree() {
            None => Some(GaussianRational::zero()),
            Some(0) => Some(self.poly.coeff(0)),
            _ => None,
        }
    }
    fn scale(&self, c: &GaussianRational) -> Self {
        PolyIn { var: self.var, poly: self.poly.scale(c) }
    }
}

#[derive(Clone)]
struct OpIn {
    names: VarNames,
    op: WeylElement,
}

impl Algebra for OpIn {
    fn constant(c: GaussianRational) -> Self {
        OpIn { names: VarNames::X, op: WeylElement::scalar(c) }
    }
    fn generator(&self, name: &str) -> Option<Self> {
        let op = if name == self.names.var {
            WeylElement::x()
        } else if name == self.names.deriv {
            WeylElement::d()
        } else {
            return None;
        };
        Some(OpIn { names: self.names, op })
    }
    fn add(&self, rhs: &Self) -> Self {
        OpIn { names: self.names, op: &self.op + &rhs.op }
    }
    fn sub(&self, rhs: &Self) -> Self {
        OpIn { names: self.names, op: &self.op - &rhs.op }
    }
    fn mul(&self, rhs: &Self) -> Self {
        OpIn { names: self.names, op: self.op.multiply(&rhs.op) }
    }
    fn as_constant(&self) -> Option<GaussianRational> {
        if self.op.terms().all(|(k, _)| *k == (0, 0)) {
            Some(self.op.coeff(0, 0))
        } else {
            None
        }
    }
    fn scale(&self, c: &GaussianRational) -> Self {
        OpIn { names: self.names, op: self.op.scale(c) }
    }
}

struct Parser<'a, A: Algebra> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    proto: &'a A,
}

impl<A: Algebra> Parser<'_, A> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.here(), msg: msg.into() })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn lift(&self, c: GaussianRational) -> A {
        self.proto.scale(&GaussianRational::zero()).add(&A::constant(c))
    }

    fn expr(&mut self) -> Result<A, ParseError> {
        let negate = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let mut acc = self.term()?;
        if negate {
            acc = acc.scale(&GaussianRational::from_integer(-1));
        }
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<A, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                let pos = self.here();
                let den = self.unary()?;
                match den.as_constant().and_then(|c| c.recip()) {
                    Some(inv) => acc = acc.scale(&inv),
                    None => return Err(ParseError::BadDivision { pos }),
                }
            } else if matches!(self.peek(), Some(Tok::Int(_) | Tok::Name(_)) | Some(Tok::Op('('))) {
                acc = acc.mul(&self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<A, ParseError> {
        if self.eat('-') {
            return Ok(self.unary()?.scale(&GaussianRational::from_integer(-1)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<A, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let n = match self.peek() {
            Some(Tok::Int(n)) => n.clone(),
            _ => return self.err("expected a nonnegative integer exponent"),
        };
        self.pos += 1;
        let n: u32 = match u32::try_from(&n) {
            Ok(n) if n <= 4096 => n,
            _ => return self.err("exponent too large"),
        };
        let mut acc = self.lift(GaussianRational::one());
        for _ in 0..n {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<A, ParseError> {
        let pos = self.here();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(self.lift(GaussianRational::from_bigint(n)))
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                self.name(&name, pos)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of input"),
        }
    }

    /// Resolves a letter run, splitting juxtaposed single letters like `xD`.
    fn name(&self, name: &str, pos: usize) -> Result<A, ParseError> {
        let single = |n: &str| {
            if n == "i" {
                Some(self.lift(GaussianRational::i()))
            } else {
                self.proto.generator(n)
            }
        };
        if let Some(v) = single(name) {
            return Ok(v);
        }
        let mut acc = self.lift(GaussianRational::one());
        for (k, ch) in name.char_indices() {
            match single(&ch.to_string()) {
                Some(v) => acc = acc.mul(&v),
                None => {
                    return Err(ParseError::Syntax {
                        pos: pos + k,
                        msg: format!("unknown name '{name}'"),
                    })
                }
            }
        }
        Ok(acc)
    }
}

fn run<A: Algebra>(src: &str, proto: &A) -> Result<A, ParseError> {
    let toks = lex(src)?;
    let end = src.chars().count();
    let mut p = Parser { toks, pos: 0, end, proto };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(v)
}

/// Parses a polynomial in the variable letter `var`.
pub fn parse_poly_in(src: &str, var: char) -> Result<UniPoly, ParseError> {
    Ok(run(src, &PolyIn { var, poly: UniPoly::zero() })?.poly)
}

/// Parses a polynomial, taking the single letter other than `i` as the
/// variable (`t` if there is none).
pub fn parse_poly(src: &str) -> Result<UniPoly, ParseError> {
    lex(src)?;
    let mut letters: Vec<char> = src.chars().filter(|c| c.is_alphabetic() && *c != 'i').collect();
    letters.sort_unstable();
    letters.dedup();
    match letters.as_slice() {
        [] => parse_poly_in(src, 't'),
        [v] => parse_poly_in(src, *v),
        _ => Err(ParseError::MixedVariables(src.to_string())),
    }
}

/// Parses an operator in `x` and `D` (products are normal-ordered).
pub fn parse_operator(src: &str) -> Result<WeylElement, ParseError> {
    parse_operator_in(src, VarNames::X)
}

/// Parses an operator with the given variable names, e.g. `z` and `Dz`.
pub fn parse_operator_in(src: &str, names: VarNames) -> Result<WeylElement, ParseError> {
    Ok(run(src, &OpIn { names, op: WeylElement::zero() })?.op)
}

/// Parses a Gaussian-rational literal such as `3/4` or `1/2-3/4*i`.
pub fn parse_gaussian(src: &str) -> Result<GaussianRational, ParseError> {
    let p = parse_poly_in(src, 't')?;
    match p.degree() {
        None => Ok(GaussianRational::zero()),
        Some(0) => Ok(p.coeff(0)),
        _ => Err(ParseError::Syntax { pos: 0, msg: "expected a constant".into() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: i64, d: i64) -> GaussianRational {
        GaussianRational::from_ratio(n, d)
    }

    #[test]
    fn reads_cubic_third() {
        let p = parse_poly("t^3/3").unwrap();
        assert_eq!(p.coeffs(), &[g(0, 1), g(0, 1), g(0, 1), g(1, 3)]);
    }

    #[test]
    fn reads_signed_sums() {
        let p = parse_poly("2t^2 - t + 1/2").unwrap();
        assert_eq!(p.coeffs(), &[g(1, 2), g(-1, 1), g(2, 1)]);
        assert_eq!(parse_poly("-t").unwrap(), UniPoly::from_ints(&[0, -1]));
        assert_eq!(parse_poly("+ 3*t^2 + -t").unwrap(), UniPoly::from_ints(&[0, -1, 3]));
        assert_eq!(parse_poly("(t+1)^2").unwrap(), UniPoly::from_ints(&[1, 2, 1]));
    }

    #[test]
    fn reads_imaginary_unit() {
        let p = parse_poly("t^2 + i*t").unwrap();
        assert_eq!(p.coeffs(), &[g(0, 1), GaussianRational::i(), g(1, 1)]);
        assert_eq!(parse_poly(&p.to_string()).unwrap(), p);
        let c = parse_gaussian("1/2-3/4*i").unwrap();
        assert_eq!(c.to_string(), "1/2-3/4*i");
    }

    #[test]
    fn other_variable_letters() {
        assert_eq!(parse_poly("x^2 + 1").unwrap(), UniPoly::from_ints(&[1, 0, 1]));
        assert!(matches!(parse_poly("x + t"), Err(ParseError::MixedVariables(_))));
        assert!(parse_poly_in("x", 't').is_err());
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse_poly("t^2 + 1.5"), Err(ParseError::NonRational { pos: 6, .. })));
        assert!(matches!(parse_poly("2e-3*t"), Err(ParseError::NonRational { pos: 0, .. })));
        assert_eq!(
            parse_poly("t^2 +"),
            Err(ParseError::Syntax { pos: 5, msg: "unexpected end of input".into() })
        );
        assert!(matches!(parse_poly("t ^ t"), Err(ParseError::Syntax { pos: 4, .. })));
        assert!(matches!(parse_poly("1/t"), Err(ParseError::BadDivision { pos: 2 })));
        assert!(matches!(parse_poly("1/0"), Err(ParseError::BadDivision { .. })));
        assert!(matches!(parse_poly("t $ 2"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(parse_poly("").is_err());
        assert!(parse_poly("(t").is_err());
    }

    #[test]
    fn operators_are_normal_ordered() {
        let op = parse_operator("D*x").unwrap();
        assert_eq!(op, &WeylElement::monomial(1, 1, GaussianRational::one()) + &WeylElement::one());
        assert_eq!(parse_operator("xD").unwrap(), WeylElement::monomial(1, 1, GaussianRational::one()));
        let l = parse_operator("D + (x - D^2)^2").unwrap();
        assert_eq!(parse_operator(&l.to_string()).unwrap(), l);
        let lz = parse_operator_in("Dz + (z - Dz^2)^2", VarNames::Z).unwrap();
        assert_eq!(lz, l);
    }
}
