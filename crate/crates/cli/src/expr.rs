//! A tiny expression grammar for exact algebraic-number literals in flags:
//! integers, `+`, `-`, `*`/`·`, `/`, `sqrtN`, `cbrtN`, and
//! `root(c_n,…,c_0;k)` (descending minimal-polynomial coefficients, k-th
//! real root in ascending order). Values are exact handles; only affine
//! combinations of a single irrational handle are representable, which is
//! exactly what the experiments need.

use diagorbit::arith::{AlgebraicReal, IntPoly, Integer, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Int(Integer),
    Sqrt(Integer),
    Cbrt(Integer),
    Root,
    LParen,
    RParen,
    Comma,
    Semi,
    Plus,
    Minus,
    Star,
    Slash,
}

fn lex(input: &str) -> Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            ',' => {
                out.push(Token::Comma);
                i += 1;
            }
            ';' => {
                out.push(Token::Semi);
                i += 1;
            }
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' | '−' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' | '·' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                let n = digits
                    .parse::<Integer>()
                    .map_err(|_| format!("bad integer literal {digits:?}"))?;
                out.push(Token::Int(n));
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match word.as_str() {
                    "sqrt" | "cbrt" => {
                        let dstart = i;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                        if dstart == i {
                            return Err(format!("{word} must be followed by an integer"));
                        }
                        let digits: String = chars[dstart..i].iter().collect();
                        let n = digits
                            .parse::<Integer>()
                            .map_err(|_| format!("bad integer after {word}"))?;
                        if word == "sqrt" {
                            out.push(Token::Sqrt(n));
                        } else {
                            out.push(Token::Cbrt(n));
                        }
                    }
                    "root" => out.push(Token::Root),
                    _ => return Err(format!("unknown name {word:?}")),
                }
            }
            _ => return Err(format!("unexpected character {c:?}")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Token, what: &str) -> Result<(), String> {
        match self.next() {
            Some(got) if got == t => Ok(()),
            other => Err(format!("expected {what}, got {other:?}")),
        }
    }

    fn parse_expr(&mut self) -> Result<Scalar, String> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    acc = add(&acc, &rhs)?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    acc = add(&acc, &neg(&rhs)?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Scalar, String> {
        let mut acc = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    acc = mul(&acc, &rhs)?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    acc = div(&acc, &rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Scalar, String> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.pos += 1;
            let inner = self.parse_unary()?;
            return neg(&inner);
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Scalar, String> {
        match self.next() {
            Some(Token::Int(n)) => Ok(Scalar::Rational(Rational::from(n))),
            Some(Token::Sqrt(n)) => {
                Scalar::sqrt_rational(&Rational::from(n)).map_err(|e| e.to_string())
            }
            Some(Token::Cbrt(n)) => {
                Scalar::cbrt_rational(&Rational::from(n)).map_err(|e| e.to_string())
            }
            Some(Token::Root) => {
                self.expect(Token::LParen, "'(' after root")?;
                let mut coeffs = Vec::new();
                loop {
                    match self.next() {
                        Some(Token::Int(n)) => coeffs.push(n),
                        Some(Token::Minus) => match self.next() {
                            Some(Token::Int(n)) => coeffs.push(-n),
                            other => {
                                return Err(format!("expected integer coefficient, got {other:?}"))
                            }
                        },
                        other => return Err(format!("expected integer coefficient, got {other:?}")),
                    }
                    match self.next() {
                        Some(Token::Comma) => continue,
                        Some(Token::Semi) => break,
                        other => {
                            return Err(format!("expected ',' or ';' in root(...), got {other:?}"))
                        }
                    }
                }
                let index = match self.next() {
                    Some(Token::Int(n)) => n
                        .to_usize()
                        .ok_or_else(|| "root index out of range".to_string())?,
                    other => return Err(format!("expected root index, got {other:?}")),
                };
                self.expect(Token::RParen, "')' closing root")?;
                // Descending coefficients, like the --minpoly flag.
                coeffs.reverse();
                let poly = IntPoly::new(coeffs);
                let x = AlgebraicReal::nth_real_root(&poly, index).map_err(|e| e.to_string())?;
                Ok(Scalar::Algebraic(x))
            }
            Some(Token::LParen) => {
                let inner = self.parse_expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            other => Err(format!("expected a value, got {other:?}")),
        }
    }
}

fn neg(a: &Scalar) -> Result<Scalar, String> {
    a.affine(&Rational::from(-1), &Rational::new())
        .map_err(|e| e.to_string())
}

fn add(a: &Scalar, b: &Scalar) -> Result<Scalar, String> {
    match (a, b) {
        (Scalar::Rational(x), Scalar::Rational(y)) => {
            Ok(Scalar::Rational(Rational::from(x + y)))
        }
        (Scalar::Rational(x), Scalar::Algebraic(_)) => {
            b.affine(&Rational::from(1), x).map_err(|e| e.to_string())
        }
        (Scalar::Algebraic(_), Scalar::Rational(y)) => {
            a.affine(&Rational::from(1), y).map_err(|e| e.to_string())
        }
        (Scalar::Algebraic(_), Scalar::Algebraic(_)) => {
            if a.certified_eq(b) {
                a.affine(&Rational::from(2), &Rational::new())
                    .map_err(|e| e.to_string())
            } else {
                Err("sum of two distinct irrational terms is not representable here".into())
            }
        }
    }
}

fn mul(a: &Scalar, b: &Scalar) -> Result<Scalar, String> {
    match (a, b) {
        (Scalar::Rational(x), Scalar::Rational(y)) => {
            Ok(Scalar::Rational(Rational::from(x * y)))
        }
        (Scalar::Rational(x), Scalar::Algebraic(_)) => {
            if x.cmp0() == std::cmp::Ordering::Equal {
                Ok(Scalar::Rational(Rational::new()))
            } else {
                b.affine(x, &Rational::new()).map_err(|e| e.to_string())
            }
        }
        (Scalar::Algebraic(_), Scalar::Rational(_)) => mul(b, a),
        (Scalar::Algebraic(_), Scalar::Algebraic(_)) => {
            Err("product of two irrational terms is not representable here".into())
        }
    }
}

fn div(a: &Scalar, b: &Scalar) -> Result<Scalar, String> {
    match b {
        Scalar::Rational(y) => {
            if y.cmp0() == std::cmp::Ordering::Equal {
                return Err("division by zero".into());
            }
            mul(a, &Scalar::Rational(Rational::from(y.recip_ref())))
        }
        Scalar::Algebraic(_) => Err("division by an irrational term is not supported here".into()),
    }
}

/// Parses one exact algebraic literal.
pub fn parse_scalar(input: &str) -> Result<Scalar, String> {
    let tokens = lex(input)?;
    if tokens.is_empty() {
        return Err("empty expression".into());
    }
    let mut p = Parser { tokens, pos: 0 };
    let value = p.parse_expr()?;
    if p.pos != p.tokens.len() {
        return Err(format!("trailing input after expression: {:?}", &p.tokens[p.pos..]));
    }
    Ok(value)
}

/// Splits on `sep` at paren depth zero, so commas inside root(...) survive.
pub fn split_top_level(s: &str, sep: char) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(c);
            }
            c if c == sep && depth == 0 => {
                parts.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    parts.push(cur);
    parts
}
