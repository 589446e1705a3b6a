//! Arithmetic on numbers and `pi`, for angle flags like `pi/4` or
//! `3*pi/8 - 0.05` and spin labels like `-3/2`.

pub fn eval(input: &str) -> Result<f64, String> {
    let tokens = tokenize(input)?;
    let mut p = Parser { tokens: &tokens, pos: 0 };
    let v = p.sum()?;
    if p.pos != tokens.len() {
        return Err(format!("unexpected trailing input in '{input}'"));
    }
    if !v.is_finite() {
        return Err(format!("'{input}' is not a finite number"));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // Exponent, e.g. 1e-3.
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(text.parse().map_err(|_| format!("bad number '{text}'"))?));
        } else if chars[i..].starts_with(&['p', 'i']) {
            // Implicit product: `3pi` reads as `3*pi`.
            if matches!(out.last(), Some(Tok::Num(_))) {
                out.push(Tok::Op('*'));
            }
            out.push(Tok::Num(std::f64::consts::PI));
            i += 2;
        } else {
            return Err(format!("unexpected character '{c}' in '{s}'"));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Tok],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<Tok> {
        self.tokens.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut v = self.product()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek() {
            self.pos += 1;
            let r = self.product()?;
            v = if op == '+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek() {
            self.pos += 1;
            let r = self.unary()?;
            v = if op == '*' { v * r } else { v / r };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(Tok::Op(')')) {
                    return Err("missing ')'".into());
                }
                self.pos += 1;
                Ok(v)
            }
            other => Err(format!("expected a number, found {other:?}")),
        }
    }
}

/// Comma-separated pieces, each an inclusive range `lo:hi:step` or a single
/// value, concatenated in order.
pub fn grid(spec: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for piece in spec.split(',') {
        out.extend(range(piece)?);
    }
    Ok(out)
}

fn range(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![eval(single)?]),
        [lo, hi, step] => {
            let (lo, hi, step) = (eval(lo)?, eval(hi)?, eval(step)?);
            if !(step > 0.0) || hi < lo {
                return Err(format!("grid '{spec}' needs lo <= hi and step > 0"));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            if n > 1_000_000 {
                return Err(format!("grid '{spec}' has more than a million points"));
            }
            Ok((0..=n).map(|i| lo + i as f64 * step).collect())
        }
        _ => Err(format!("grid '{spec}' must be 'value' or 'lo:hi:step'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn pi_fractions_are_exact() {
        assert_eq!(eval("pi/4").unwrap(), FRAC_PI_4);
        assert_eq!(eval("pi / 2").unwrap(), FRAC_PI_2);
        assert_eq!(eval("3pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(eval("0.7853981633974483").unwrap(), FRAC_PI_4);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(eval("-3/2").unwrap(), -1.5);
        assert_eq!(eval("2*(1+2)").unwrap(), 6.0);
        assert_eq!(eval("1e-3").unwrap(), 1e-3);
        assert_eq!(eval("2.5E+1").unwrap(), 25.0);
        assert!((eval("pi/4+0.05").unwrap() - (FRAC_PI_4 + 0.05)).abs() < 1e-15);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "pi/", "x", "1/0", "(1", "2 3"] {
            assert!(eval(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn grids() {
        assert_eq!(grid("0.3").unwrap(), vec![0.3]);
        assert_eq!(grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(grid("0:2:0.05").unwrap().len(), 41);
        assert!(grid("1:0:0.1").is_err());
        assert!(grid("0:1:0").is_err());
        assert!(grid("0:1").is_err());
        assert_eq!(grid("0:0.5:0.5,pi/4").unwrap(), vec![0.0, 0.5, FRAC_PI_4]);
        assert!(grid("0.1,").is_err());
    }
}
