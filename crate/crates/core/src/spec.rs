//! Generator descriptors and their textual grammar.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! spec  := atom | atom "(" spec ")"
//! atom  := "B"            Bell, r = 1
//!        | "L"            Laguerre/Lah, r = 2
//!        | "R" r          F_r family, r >= 1
//!        | "RS" r "_" s   general (r, s) family, r >= s >= 1
//!        | "O"            ordered Bell
//! ```
//!
//! `F(G)` substitutes the egf of `G` into `F`, so `O(B(B))` is the ordered
//! Bell outer generator applied to a doubly nested Bell inner generator.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GeneratorSpec {
    /// `F_r(x)`: `e^x - 1` for r = 1, `(1-(r-1)x)^(-1/(r-1)) - 1` otherwise.
    BellR(u32),
    /// The `(r, s)` normal-ordering family. Only `s = 1` is of Sheffer type.
    Rs { r: u32, s: u32 },
    /// Ordered Bell numbers, egf `1/(1 - y(e^x - 1))`. Not of Sheffer type.
    OrderedBell,
    /// `outer(inner(x))`.
    Composite(Box<GeneratorSpec>, Box<GeneratorSpec>),
}

impl GeneratorSpec {
    pub fn bell() -> Self {
        GeneratorSpec::BellR(1)
    }

    pub fn lah() -> Self {
        GeneratorSpec::BellR(2)
    }

    /// `outer(inner)`. Composition is associative, so a composite outer is
    /// re-associated to the right: `(F(G))(H)` becomes `F(G(H))`.
    pub fn compose(outer: GeneratorSpec, inner: GeneratorSpec) -> Self {
        match outer {
            GeneratorSpec::Composite(a, b) => GeneratorSpec::compose(*a, GeneratorSpec::compose(*b, inner)),
            outer => GeneratorSpec::Composite(Box::new(outer), Box::new(inner)),
        }
    }

    /// `F(F(...F))` with `depth` copies of `f`.
    pub fn nest(f: GeneratorSpec, depth: usize) -> Self {
        assert!(depth >= 1);
        (1..depth).fold(f.clone(), |acc, _| GeneratorSpec::compose(f.clone(), acc))
    }

    /// True for generators whose polynomials have an `e^{yF(x)}` egf.
    pub fn is_sheffer(&self) -> bool {
        match self {
            GeneratorSpec::BellR(_) => true,
            GeneratorSpec::Rs { s, .. } => *s == 1,
            GeneratorSpec::OrderedBell => false,
            GeneratorSpec::Composite(o, i) => o.is_sheffer() && i.is_sheffer(),
        }
    }

    /// Checks parameter ranges and that non-Sheffer generators only appear in
    /// outermost position.
    pub fn validate(&self) -> Result<()> {
        match self {
            GeneratorSpec::BellR(r) if *r == 0 => Err(Error::domain("BellR requires r >= 1")),
            GeneratorSpec::Rs { r, s } if *s == 0 || r < s => {
                Err(Error::unsupported(format!("RS({r},{s}) requires r >= s >= 1")))
            }
            GeneratorSpec::Composite(outer, inner) => {
                if !inner.is_sheffer() {
                    return Err(Error::unsupported(format!(
                        "{inner} is not of Sheffer type and may only appear outermost"
                    )));
                }
                outer.validate()?;
                inner.validate()
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::BellR(1) => f.write_str("B"),
            GeneratorSpec::BellR(2) => f.write_str("L"),
            GeneratorSpec::BellR(r) => write!(f, "R{r}"),
            GeneratorSpec::Rs { r, s } => write!(f, "RS{r}_{s}"),
            GeneratorSpec::OrderedBell => f.write_str("O"),
            GeneratorSpec::Composite(o, i) => write!(f, "{o}({i})"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { chars: &chars, pos: 0 };
        let spec = p.spec()?;
        if p.pos != chars.len() {
            return Err(p.error("trailing input"));
        }
        spec.validate()?;
        Ok(spec)
    }
}

struct Parser<'a> {
    chars: &'a [char],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        let text: String = self.chars.iter().collect();
        Error::Parse(format!("{what} at position {} in {text:?}", self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits.parse().map_err(|_| self.error("number out of range"))
    }

    fn atom(&mut self) -> Result<GeneratorSpec> {
        let c = self.peek().ok_or_else(|| self.error("unexpected end"))?;
        self.pos += 1;
        match c {
            'B' => Ok(GeneratorSpec::BellR(1)),
            'L' => Ok(GeneratorSpec::BellR(2)),
            'O' => Ok(GeneratorSpec::OrderedBell),
            'R' if self.peek() == Some('S') => {
                self.pos += 1;
                let r = self.number()?;
                if self.peek() != Some('_') {
                    return Err(self.error("expected '_'"));
                }
                self.pos += 1;
                let s = self.number()?;
                Ok(GeneratorSpec::Rs { r, s })
            }
            'R' => Ok(GeneratorSpec::BellR(self.number()?)),
            _ => {
                self.pos -= 1;
                Err(self.error("unknown generator"))
            }
        }
    }

    fn spec(&mut self) -> Result<GeneratorSpec> {
        let outer = self.atom()?;
        if self.peek() == Some('(') {
            self.pos += 1;
            let inner = self.spec()?;
            if self.peek() != Some(')') {
                return Err(self.error("expected ')'"));
            }
            self.pos += 1;
            Ok(GeneratorSpec::compose(outer, inner))
        } else {
            Ok(outer)
        }
    }
}
