//! Trigonometric data expressions.
//!
//! ```text
//! expr  := [sign] term (sign term)*
//! term  := number ['*' wave] | wave
//! wave  := ("cos" | "sin") '(' int (',' int)* ')'
//! ```
//!
//! `cos(k1, .., km)` is `cos(β k·x)` on coordinates `(x¹, y¹, x², y²)` with
//! `β = 2π/period`, so every term is periodic on the grid. A bare number is
//! a constant.

use std::fmt;

use vsoliton::grid::{GridSpec, RealField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wave {
    Const,
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub wave: Wave,
    pub k: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigExpr {
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message} at column {}", .column + 1)]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            column: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.s.len() && p.s[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.s.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.s.get(self.pos), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.s.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            digits(self);
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                self.err("expected a finite number")
            }
        }
    }

    fn integer(&mut self) -> Result<i64, ExprError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.s.get(self.pos), Some(b'+' | b'-')) {
            self.pos += 1;
        }
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        text.parse::<i64>().or_else(|_| {
            self.pos = start;
            self.err("expected an integer frequency")
        })
    }

    fn wave(&mut self) -> Result<Option<(Wave, Vec<i64>)>, ExprError> {
        self.skip_ws();
        let rest = &self.s[self.pos..];
        let wave = if rest.starts_with(b"cos") {
            Wave::Cos
        } else if rest.starts_with(b"sin") {
            Wave::Sin
        } else {
            return Ok(None);
        };
        self.pos += 3;
        self.expect(b'(')?;
        let mut k = vec![self.integer()?];
        while self.eat(b',') {
            k.push(self.integer()?);
        }
        self.expect(b')')?;
        Ok(Some((wave, k)))
    }

    fn term(&mut self, sign: f64) -> Result<Term, ExprError> {
        if let Some((wave, k)) = self.wave()? {
            return Ok(Term {
                coeff: sign,
                wave,
                k,
            });
        }
        let c = sign * self.number()?;
        if self.eat(b'*') {
            match self.wave()? {
                Some((wave, k)) => Ok(Term { coeff: c, wave, k }),
                None => self.err("expected cos(..) or sin(..) after '*'"),
            }
        } else {
            Ok(Term {
                coeff: c,
                wave: Wave::Const,
                k: Vec::new(),
            })
        }
    }
}

impl TrigExpr {
    pub fn parse(s: &str) -> Result<TrigExpr, ExprError> {
        let mut p = Parser {
            s: s.as_bytes(),
            pos: 0,
        };
        let mut terms = Vec::new();
        let mut sign = if p.eat(b'-') {
            -1.0
        } else {
            p.eat(b'+');
            1.0
        };
        loop {
            terms.push(p.term(sign)?);
            match p.peek() {
                None => break,
                Some(b'+') => sign = 1.0,
                Some(b'-') => sign = -1.0,
                Some(_) => return p.err("expected '+', '-' or end of expression"),
            }
            p.pos += 1;
        }
        Ok(TrigExpr { terms })
    }

    /// Common length of the frequency vectors, `None` for a constant.
    pub fn dim(&self) -> Result<Option<usize>, String> {
        let mut dim = None;
        for t in self.terms.iter().filter(|t| t.wave != Wave::Const) {
            match dim {
                None => dim = Some(t.k.len()),
                Some(d) if d != t.k.len() => {
                    return Err(format!(
                        "frequency vectors of lengths {d} and {} are mixed",
                        t.k.len()
                    ))
                }
                _ => {}
            }
        }
        Ok(dim)
    }

    /// Highest `|k_a|` over all terms and axes.
    pub fn max_mode(&self) -> i64 {
        self.terms
            .iter()
            .flat_map(|t| t.k.iter().map(|v| v.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64], beta: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let phase = || beta * t.k.iter().zip(x).map(|(&k, &x)| k as f64 * x).sum::<f64>();
                match t.wave {
                    Wave::Const => t.coeff,
                    Wave::Cos => t.coeff * phase().cos(),
                    Wave::Sin => t.coeff * phase().sin(),
                }
            })
            .sum()
    }

    pub fn sample(&self, grid: GridSpec) -> RealField {
        let beta = grid.base_wavenumber();
        RealField::from_fn(grid, |x| self.eval(x, beta))
    }
}

impl fmt::Display for TrigExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i == 0 {
                write!(f, "{:?}", t.coeff)?;
            } else {
                let sign = if t.coeff < 0.0 { '-' } else { '+' };
                write!(f, " {sign} {:?}", t.coeff.abs())?;
            }
            write_wave(f, t)?;
        }
        Ok(())
    }
}

fn write_wave(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    let name = match t.wave {
        Wave::Const => return Ok(()),
        Wave::Cos => "cos",
        Wave::Sin => "sin",
    };
    let k: Vec<String> = t.k.iter().map(|v| v.to_string()).collect();
    write!(f, "*{name}({})", k.join(","))
}
