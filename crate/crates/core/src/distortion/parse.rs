use super::{Distortion, Side};
use crate::copula::{Copula, CopulaFamily};
use crate::error::{Error, Result};

/// Parse a distortion expression.
///
/// ```text
/// spec := atom | compose(spec,spec) | mix(w*spec,...) | tail(spec,num)
///       | dual(spec) | esssup(num,spec)
///       | copula(family[:params],v=num[,side=first|second])
/// atom := var:p | tvar:p | power:a | dualpower:b | wang:p | lookback:p
///       | beta:a,b | glue:h1,h2,alpha,beta | identity
/// ```
///
/// ```
/// let g = drisk::distortion::parse_distortion("compose(tvar:0.95,tvar:0.95)").unwrap();
/// assert!((g.eval(0.025) - 1.0).abs() < 1e-12);
/// ```
pub fn parse_distortion(src: &str) -> Result<Distortion> {
    let mut p = Parser { src, pos: 0 };
    let g = p.spec()?;
    p.ws();
    if p.pos < src.len() {
        return Err(p.err_at(p.pos, "unexpected trailing input"));
    }
    Ok(g)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err_at(&self, pos: usize, msg: impl Into<String>) -> Error {
        let before = &self.src[..pos];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
        Error::parse(line, col, msg)
    }

    fn ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self.peek().map(|x| format!("'{x}'")).unwrap_or_else(|| "end of input".into());
            Err(self.err_at(self.pos, format!("expected '{c}', found {found}")))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str)> {
        self.ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.err_at(start, "expected a name"));
        }
        Ok((start, &self.src[start..self.pos]))
    }

    fn starts_number(&self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.' || c == '-' || c == '+')
    }

    fn number(&mut self) -> Result<f64> {
        self.ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
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
        let text = &self.src[start..i];
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => {
                self.pos = i;
                Ok(x)
            }
            _ => Err(self.err_at(start, "expected a number")),
        }
    }

    fn numbers(&mut self, n: usize) -> Result<Vec<f64>> {
        self.expect(':')?;
        let mut out = vec![self.number()?];
        for _ in 1..n {
            self.expect(',')?;
            out.push(self.number()?);
        }
        Ok(out)
    }

    fn spec(&mut self) -> Result<Distortion> {
        let (start, name) = self.ident()?;
        let at = |r: Result<Distortion>, s: &Self| r.map_err(|e| s.err_at(start, e.to_string()));
        match name {
            "identity" => Ok(Distortion::identity()),
            "var" | "tvar" | "power" | "dualpower" | "wang" | "lookback" => {
                let x = self.numbers(1)?[0];
                let r = match name {
                    "var" => Distortion::var(x),
                    "tvar" => Distortion::tvar(x),
                    "power" => Distortion::power(x),
                    "dualpower" => Distortion::dual_power(x),
                    "wang" => Distortion::wang(x),
                    _ => Distortion::lookback(x),
                };
                at(r, self)
            }
            "beta" => {
                let v = self.numbers(2)?;
                at(Distortion::beta(v[0], v[1]), self)
            }
            "glue" => {
                let v = self.numbers(4)?;
                at(Distortion::glue(v[0], v[1], v[2], v[3]), self)
            }
            "compose" => {
                self.expect('(')?;
                let f = self.spec()?;
                self.expect(',')?;
                let g = self.spec()?;
                self.expect(')')?;
                Ok(Distortion::compose(&f, &g))
            }
            "dual" => {
                self.expect('(')?;
                let g = self.spec()?;
                self.expect(')')?;
                Ok(Distortion::dual(&g))
            }
            "tail" => {
                self.expect('(')?;
                let g = self.spec()?;
                self.expect(',')?;
                let p = self.number()?;
                self.expect(')')?;
                at(Distortion::tail(&g, p), self)
            }
            "esssup" => {
                self.expect('(')?;
                let l = self.number()?;
                self.expect(',')?;
                let g = self.spec()?;
                self.expect(')')?;
                at(Distortion::esssup(l, &g), self)
            }
            "mix" => {
                self.expect('(')?;
                let mut terms = Vec::new();
                loop {
                    let w = self.number()?;
                    self.expect('*')?;
                    terms.push((w, self.spec()?));
                    if !self.eat(',') {
                        break;
                    }
                }
                self.expect(')')?;
                at(Distortion::mix(&terms), self)
            }
            "copula" => self.copula(start),
            other => Err(self.err_at(start, format!("unknown distortion '{other}'"))),
        }
    }

    fn copula(&mut self, start: usize) -> Result<Distortion> {
        self.expect('(')?;
        let (fstart, fam) = self.ident()?;
        let mut params = Vec::new();
        if self.eat(':') {
            params.push(self.number()?);
            loop {
                let save = self.pos;
                if !self.eat(',') {
                    break;
                }
                self.ws();
                if self.starts_number() {
                    params.push(self.number()?);
                } else {
                    self.pos = save;
                    break;
                }
            }
        }
        let want = match fam {
            "independence" | "comonotone" | "countermonotone" => 0,
            "clayton" | "frank" | "pareto" | "amh" | "gumbel" | "fgm" | "gaussian" => 1,
            "mo" => 2,
            other => return Err(self.err_at(fstart, format!("unknown copula family '{other}'"))),
        };
        if params.len() != want {
            return Err(self.err_at(
                fstart,
                format!("copula family '{fam}' takes {want} parameter(s), got {}", params.len()),
            ));
        }
        let family = match fam {
            "independence" => CopulaFamily::Independence,
            "comonotone" => CopulaFamily::Comonotone,
            "countermonotone" => CopulaFamily::Countermonotone,
            "clayton" => CopulaFamily::Clayton { alpha: params[0] },
            "frank" => CopulaFamily::Frank { alpha: params[0] },
            "pareto" => CopulaFamily::ParetoSurvival { alpha: params[0] },
            "amh" => CopulaFamily::Amh { alpha: params[0] },
            "gumbel" => CopulaFamily::Gumbel { alpha: params[0] },
            "fgm" => CopulaFamily::Fgm { alpha: params[0] },
            "gaussian" => CopulaFamily::Gaussian { rho: params[0] },
            _ => CopulaFamily::MarshallOlkin {
                alpha: params[0],
                beta: params[1],
            },
        };
        let c = Copula::new(family).map_err(|e| self.err_at(fstart, e.to_string()))?;
        self.expect(',')?;
        let (kstart, key) = self.ident()?;
        if key != "v" {
            return Err(self.err_at(kstart, format!("expected 'v=', found '{key}'")));
        }
        self.expect('=')?;
        let v = self.number()?;
        let mut side = Side::First;
        if self.eat(',') {
            let (kstart, key) = self.ident()?;
            if key != "side" {
                return Err(self.err_at(kstart, format!("expected 'side=', found '{key}'")));
            }
            self.expect('=')?;
            let (sstart, s) = self.ident()?;
            side = match s {
                "first" => Side::First,
                "second" => Side::Second,
                other => return Err(self.err_at(sstart, format!("side must be first or second, got '{other}'"))),
            };
        }
        self.expect(')')?;
        Distortion::copula_derived(&c, v, side).map_err(|e| self.err_at(start, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(e: Error) -> usize {
        match e {
            Error::Parse { column, .. } => column,
            other => panic!("not a parse error: {other:?}"),
        }
    }

    #[test]
    fn atoms_and_combinators() {
        for s in [
            "identity",
            "var:0.95",
            "tvar:0.9",
            "power:2",
            "dualpower:0.5",
            "wang:0.7",
            "lookback:0.3",
            "beta:0.5,2",
            "glue:0.2,0.5,0.95,0.995",
            "compose(tvar:0.95, tvar:0.95)",
            "mix(0.25*var:0.9, 0.75*tvar:0.9)",
            "tail(power:2,0.9)",
            "dual(power:2)",
            "esssup(0.5,identity)",
            "copula(clayton:2,v=0.5)",
            "copula(mo:0.5,0.3,v=0.05,side=second)",
            "copula(independence, v = 0.5)",
            "copula(gaussian:0.3,v=0.5)",
        ] {
            let g = parse_distortion(s).unwrap_or_else(|e| panic!("{s}: {e}"));
            g.validate().unwrap_or_else(|e| panic!("{s}: {e}"));
        }
    }

    #[test]
    fn parses_to_the_same_function() {
        let a = parse_distortion("compose(tvar:0.95,tvar:0.95)").unwrap();
        let t = Distortion::tvar(0.95).unwrap();
        let b = Distortion::compose(&t, &t);
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            assert_eq!(a.eval(u), b.eval(u));
        }
        let e = parse_distortion("1e-1").err().unwrap();
        assert_eq!(col(e), 1);
    }

    #[test]
    fn errors_carry_column() {
        assert_eq!(col(parse_distortion("var:1.5").unwrap_err()), 1);
        assert_eq!(col(parse_distortion("compose(tvar:0.9,foo)").unwrap_err()), 18);
        assert_eq!(col(parse_distortion("tvar:0.9)").unwrap_err()), 9);
        assert_eq!(col(parse_distortion("mix(0.5*var:0.9,0.4*identity)").unwrap_err()), 1);
        assert_eq!(col(parse_distortion("copula(clayton:-2,v=0.5)").unwrap_err()), 8);
        assert_eq!(col(parse_distortion("copula(mo:0.5,v=0.5)").unwrap_err()), 8);
        assert_eq!(col(parse_distortion("tvar").unwrap_err()), 5);
        assert_eq!(col(parse_distortion("").unwrap_err()), 1);
    }
}
