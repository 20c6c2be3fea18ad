//! Plain-text edge-list format.
//!
//! ```text
//! S stimulus
//! X1 feature
//! X2 feature
//!
//! S -> X1
//! X1 -> X2
//! ```
//!
//! One `name role` line per variable in order, a blank line, then one
//! `parent -> child` line per edge ordered by (parent, child) position.
//! Parsing also accepts `#` comments and extra blank lines; writing is
//! canonical, so `to_edge_list` after `parse_edge_list` is byte-identical.

use super::{Dag, Variable};
use crate::error::{Error, Result};

impl Dag {
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for v in self.variables() {
            out.push_str(&format!("{} {}\n", v.name, v.role));
        }
        out.push('\n');
        for (p, c) in self.edges() {
            out.push_str(&format!("{} -> {}\n", self.name(p), self.name(c)));
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Dag> {
        let mut variables = Vec::new();
        let mut edges: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((p, c)) = line.split_once("->") {
                let (p, c) = (p.trim(), c.trim());
                if p.is_empty() || c.is_empty() {
                    return Err(parse_err(format!("incomplete edge `{line}`")));
                }
                edges.push((p.to_string(), c.to_string()));
            } else {
                let mut parts = line.split_whitespace();
                let (Some(name), Some(role), None) = (parts.next(), parts.next(), parts.next())
                else {
                    return Err(parse_err(format!("expected `name role`, found `{line}`")));
                };
                let role = role.parse().map_err(|e: Error| parse_err(e.to_string()))?;
                variables.push(Variable::new(name, role));
            }
        }
        Dag::new(
            variables,
            edges.iter().map(|(p, c)| (p.as_str(), c.as_str())),
        )
    }
}
