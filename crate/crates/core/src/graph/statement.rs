use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Independent,
    Dependent,
}

impl Verdict {
    pub fn from_separated(separated: bool) -> Self {
        if separated {
            Verdict::Independent
        } else {
            Verdict::Dependent
        }
    }

    pub fn is_independent(self) -> bool {
        self == Verdict::Independent
    }
}

/// A (conditional) independence statement `lhs ⊥ rhs | given` or its negation.
///
/// Text form, used both for display and for statement files:
/// `indep A B | Z1 Z2` or `dep A B` (the `| ...` part is omitted when the
/// conditioning set is empty).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CiStatement {
    pub lhs: String,
    pub rhs: String,
    pub given: BTreeSet<String>,
    pub verdict: Verdict,
}

impl CiStatement {
    pub fn new<I, S>(
        lhs: impl Into<String>,
        rhs: impl Into<String>,
        given: I,
        verdict: Verdict,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let statement = CiStatement {
            lhs: lhs.into(),
            rhs: rhs.into(),
            given: given.into_iter().map(Into::into).collect(),
            verdict,
        };
        statement.validate()?;
        Ok(statement)
    }

    pub fn independent<I, S>(lhs: &str, rhs: &str, given: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(lhs, rhs, given, Verdict::Independent)
    }

    pub fn dependent<I, S>(lhs: &str, rhs: &str, given: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(lhs, rhs, given, Verdict::Dependent)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lhs == self.rhs {
            return Err(Error::input(format!(
                "statement relates `{}` to itself",
                self.lhs
            )));
        }
        if self.given.contains(&self.lhs) || self.given.contains(&self.rhs) {
            return Err(Error::input(format!(
                "statement `{self}` conditions on one of its own endpoints"
            )));
        }
        Ok(())
    }

    /// Order-insensitive identity of the query, ignoring the verdict.
    pub fn query_key(&self) -> (&str, &str, &BTreeSet<String>) {
        if self.lhs <= self.rhs {
            (&self.lhs, &self.rhs, &self.given)
        } else {
            (&self.rhs, &self.lhs, &self.given)
        }
    }

    pub fn mentions(&self) -> impl Iterator<Item = &str> {
        [self.lhs.as_str(), self.rhs.as_str()]
            .into_iter()
            .chain(self.given.iter().map(String::as_str))
    }
}

impl fmt::Display for CiStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = match self.verdict {
            Verdict::Independent => "indep",
            Verdict::Dependent => "dep",
        };
        write!(f, "{word} {} {}", self.lhs, self.rhs)?;
        if !self.given.is_empty() {
            f.write_str(" |")?;
            for z in &self.given {
                write!(f, " {z}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for CiStatement {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut tokens = line.split_whitespace();
        let verdict = match tokens.next() {
            Some("indep") => Verdict::Independent,
            Some("dep") => Verdict::Dependent,
            other => {
                return Err(Error::input(format!(
                    "expected `indep` or `dep`, found {other:?}"
                )))
            }
        };
        let lhs = tokens
            .next()
            .ok_or_else(|| Error::input("missing first variable"))?;
        let rhs = tokens
            .next()
            .ok_or_else(|| Error::input("missing second variable"))?;
        let given: Vec<&str> = match tokens.next() {
            None => Vec::new(),
            Some("|") => tokens
                .flat_map(|t| t.split(','))
                .filter(|t| !t.is_empty())
                .collect(),
            Some(other) => return Err(Error::input(format!("expected `|`, found `{other}`"))),
        };
        CiStatement::new(lhs, rhs, given, verdict)
    }
}

/// Parses a statement file: one statement per line, `#` comments and blank
/// lines ignored.
pub fn parse_statements(text: &str) -> Result<Vec<CiStatement>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let statement = line.parse().map_err(|e: Error| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(statement);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form_round_trips() {
        let s = CiStatement::independent("S", "X2", ["X1"]).unwrap();
        assert_eq!(s.to_string(), "indep S X2 | X1");
        assert_eq!(s.to_string().parse::<CiStatement>().unwrap(), s);
        let d = CiStatement::dependent("S", "X1", Vec::<String>::new()).unwrap();
        assert_eq!(d.to_string(), "dep S X1");
    }

    #[test]
    fn rejects_malformed_statements() {
        assert!(CiStatement::independent("A", "A", Vec::<String>::new()).is_err());
        assert!(CiStatement::independent("A", "B", ["A"]).is_err());
        assert!("maybe A B".parse::<CiStatement>().is_err());
        assert!("indep A".parse::<CiStatement>().is_err());
        assert!("indep A B C".parse::<CiStatement>().is_err());
    }

    #[test]
    fn statement_file_reports_line_numbers() {
        let parsed = parse_statements("# header\ndep X1 R\n\nindep X2 R | X1\n").unwrap();
        assert_eq!(parsed.len(), 2);
        match parse_statements("dep X1 R\nbogus\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn query_key_is_symmetric() {
        let a = CiStatement::independent("B", "A", ["C"]).unwrap();
        let b = CiStatement::dependent("A", "B", ["C"]).unwrap();
        assert_eq!(a.query_key(), b.query_key());
    }
}
