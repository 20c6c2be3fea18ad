//! Causal DAGs over role-tagged variables, d-separation and exhaustive
//! structure search.
//!
//! Variable sets are stored as `u64` bitmasks indexed by variable position,
//! so a [`Dag`] holds at most 64 variables. Exhaustive search is capped far
//! below that (see [`MAX_OBSERVED`]).

mod dsep;
mod enumerate;
mod statement;
mod text;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dsep::{d_separated, implied_ci_statements};
pub use enumerate::{
    consistent_structures, enumerate_dags, least_violating, shared_edges, DagEnumerator,
    StructuralConstraint, MAX_HIDDEN, MAX_OBSERVED,
};
pub use statement::{parse_statements, CiStatement, Verdict};

pub(crate) use dsep::d_separated_idx;

/// Bitmask over variable positions of one [`Dag`].
pub type VarSet = u64;

/// Largest number of variables a [`Dag`] can hold.
pub const MAX_VARIABLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableRole {
    Stimulus,
    Response,
    Feature,
    Hidden,
}

impl VariableRole {
    pub fn as_str(self) -> &'static str {
        match self {
            VariableRole::Stimulus => "stimulus",
            VariableRole::Response => "response",
            VariableRole::Feature => "feature",
            VariableRole::Hidden => "hidden",
        }
    }

    /// Stimulus and response variables are experimental conditions.
    pub fn is_condition(self) -> bool {
        matches!(self, VariableRole::Stimulus | VariableRole::Response)
    }
}

impl fmt::Display for VariableRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariableRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stimulus" => Ok(VariableRole::Stimulus),
            "response" => Ok(VariableRole::Response),
            "feature" => Ok(VariableRole::Feature),
            "hidden" => Ok(VariableRole::Hidden),
            other => Err(Error::input(format!("unknown variable role `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub role: VariableRole,
}

impl Variable {
    pub fn new(name: impl Into<String>, role: VariableRole) -> Self {
        Variable {
            name: name.into(),
            role,
        }
    }

    pub fn feature(name: impl Into<String>) -> Self {
        Self::new(name, VariableRole::Feature)
    }

    pub fn stimulus(name: impl Into<String>) -> Self {
        Self::new(name, VariableRole::Stimulus)
    }

    pub fn response(name: impl Into<String>) -> Self {
        Self::new(name, VariableRole::Response)
    }

    pub fn hidden(name: impl Into<String>) -> Self {
        Self::new(name, VariableRole::Hidden)
    }
}

/// Checks that a variable name is usable in every text format of the crate
/// (edge lists, CSV headers, statement files).
pub fn validate_name(name: &str) -> Result<()> {
    let bad = name.is_empty()
        || name == "|"
        || name.contains("->")
        || name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | ':' | '#' | '"' | '|'));
    if bad {
        return Err(Error::input(format!("invalid variable name `{name}`")));
    }
    Ok(())
}

pub(crate) fn validate_variables(variables: &[Variable]) -> Result<()> {
    if variables.len() > MAX_VARIABLES {
        return Err(Error::input(format!(
            "{} variables exceed the limit of {MAX_VARIABLES}",
            variables.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for v in variables {
        validate_name(&v.name)?;
        if !seen.insert(v.name.as_str()) {
            return Err(Error::input(format!("duplicate variable `{}`", v.name)));
        }
    }
    for role in [VariableRole::Stimulus, VariableRole::Response] {
        if variables.iter().filter(|v| v.role == role).count() > 1 {
            return Err(Error::input(format!("more than one {role} variable")));
        }
    }
    Ok(())
}

/// Directed acyclic graph over an ordered list of variables.
///
/// Immutable once built; every constructor checks acyclicity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dag {
    variables: Arc<[Variable]>,
    parents: Vec<VarSet>,
    children: Vec<VarSet>,
}

impl Dag {
    /// Builds a DAG from named edges `(parent, child)`.
    pub fn new<'a, I>(variables: Vec<Variable>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        validate_variables(&variables)?;
        let index = |name: &str| {
            variables
                .iter()
                .position(|v| v.name == name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))
        };
        let mut indexed = Vec::new();
        for (p, c) in edges {
            indexed.push((index(p)?, index(c)?));
        }
        Self::from_indices(variables.into(), &indexed)
    }

    pub(crate) fn from_indices(
        variables: Arc<[Variable]>,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        let n = variables.len();
        let mut parents = vec![0; n];
        for &(p, c) in edges {
            if p >= n || c >= n {
                return Err(Error::input("edge endpoint out of range"));
            }
            if p == c {
                return Err(Error::input(format!(
                    "self-loop on `{}`",
                    variables[p].name
                )));
            }
            parents[c] |= 1 << p;
        }
        Self::from_parent_masks(variables, parents)
    }

    pub(crate) fn from_parent_masks(
        variables: Arc<[Variable]>,
        parents: Vec<VarSet>,
    ) -> Result<Self> {
        debug_assert_eq!(variables.len(), parents.len());
        let n = variables.len();
        let mut children = vec![0; n];
        for (c, &mask) in parents.iter().enumerate() {
            for p in bits(mask) {
                children[p] |= 1 << c;
            }
        }
        let dag = Dag {
            variables,
            parents,
            children,
        };
        if dag.topological_order().is_none() {
            return Err(Error::Cycle);
        }
        Ok(dag)
    }

    /// Same variables, no edges.
    pub fn empty(variables: Vec<Variable>) -> Result<Self> {
        Self::new(variables, std::iter::empty())
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, i: usize) -> &Variable {
        &self.variables[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.variables[i].name
    }

    pub fn role(&self, i: usize) -> VariableRole {
        self.variables[i].role
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn mask_of<'a, I>(&self, names: I) -> Result<VarSet>
    where
        I: IntoIterator<Item = &'a str>,
    {
        names
            .into_iter()
            .try_fold(0, |acc, name| Ok(acc | 1 << self.index_of(name)?))
    }

    pub fn parents(&self, i: usize) -> VarSet {
        self.parents[i]
    }

    pub fn children(&self, i: usize) -> VarSet {
        self.children[i]
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.parents[child] & (1 << parent) != 0
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|m| m.count_ones() as usize).sum()
    }

    /// Edges ordered by parent position, then child position.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for p in 0..self.len() {
            out.extend(bits(self.children[p]).map(|c| (p, c)));
        }
        out
    }

    pub fn edge_names(&self) -> Vec<(String, String)> {
        self.edges()
            .into_iter()
            .map(|(p, c)| (self.name(p).to_string(), self.name(c).to_string()))
            .collect()
    }

    /// Members of `set` plus all of their ancestors.
    pub fn ancestral_closure(&self, set: VarSet) -> VarSet {
        let mut closed = set;
        let mut frontier = set;
        while frontier != 0 {
            let mut next = 0;
            for v in bits(frontier) {
                next |= self.parents[v];
            }
            frontier = next & !closed;
            closed |= next;
        }
        closed
    }

    /// Strict descendants of `i`.
    pub fn descendants(&self, i: usize) -> VarSet {
        let mut seen = 0;
        let mut frontier = self.children[i];
        while frontier != 0 {
            seen |= frontier;
            let mut next = 0;
            for v in bits(frontier) {
                next |= self.children[v];
            }
            frontier = next & !seen;
        }
        seen
    }

    pub fn has_directed_path(&self, from: usize, to: usize) -> bool {
        self.descendants(from) & (1 << to) != 0
    }

    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut placed: VarSet = 0;
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let ready =
                (0..n).find(|&v| placed & (1 << v) == 0 && self.parents[v] & !placed == 0)?;
            placed |= 1 << ready;
            order.push(ready);
        }
        Some(order)
    }

    pub fn stimulus(&self) -> Option<usize> {
        self.variables
            .iter()
            .position(|v| v.role == VariableRole::Stimulus)
    }

    pub fn response(&self) -> Option<usize> {
        self.variables
            .iter()
            .position(|v| v.role == VariableRole::Response)
    }

    pub fn observed_mask(&self) -> VarSet {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.role != VariableRole::Hidden)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn observed_names(&self) -> Vec<&str> {
        self.variables
            .iter()
            .filter(|v| v.role != VariableRole::Hidden)
            .map(|v| v.name.as_str())
            .collect()
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges = self.edge_names();
        if edges.is_empty() {
            return f.write_str("(no edges)");
        }
        let parts: Vec<String> = edges.iter().map(|(p, c)| format!("{p}->{c}")).collect();
        f.write_str(&parts.join(", "))
    }
}

/// Iterates the set bit positions of a mask in ascending order.
pub(crate) fn bits(mut mask: VarSet) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}
