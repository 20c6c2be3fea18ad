use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    bits, d_separated_idx, validate_variables, CiStatement, Dag, VarSet, Variable, VariableRole,
};
use crate::error::{Error, Result};

/// Largest number of observed variables accepted by exhaustive search.
pub const MAX_OBSERVED: usize = 7;

/// Largest number of latent common causes added by exhaustive search.
pub const MAX_HIDDEN: usize = 2;

/// Restriction on the structures produced by [`enumerate_dags`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuralConstraint {
    /// The variable has no parents at all (randomized assignment).
    RandomizedRoot(String),
    /// The variable has no children of role `Feature`.
    NoOutgoingToFeatures(String),
    /// No latent variables; overrides [`StructuralConstraint::MaxHidden`].
    CausalSufficiency,
    /// Allow up to this many latent root variables, each a common cause of
    /// two or more observed variables.
    MaxHidden(usize),
}

struct SearchPlan {
    observed: Arc<[Variable]>,
    /// Per child, the parents it may not have.
    forbidden_parents: Vec<VarSet>,
    /// Observed variables a latent variable may point into.
    latent_targets: VarSet,
    max_hidden: usize,
}

impl SearchPlan {
    fn new(variables: &[Variable], constraints: &[StructuralConstraint]) -> Result<Self> {
        validate_variables(variables)?;
        if let Some(v) = variables.iter().find(|v| v.role == VariableRole::Hidden) {
            return Err(Error::input(format!(
                "`{}` is hidden; latent variables are introduced through MaxHidden",
                v.name
            )));
        }
        if variables.len() > MAX_OBSERVED {
            return Err(Error::Capacity {
                observed: variables.len(),
                cap: MAX_OBSERVED,
            });
        }

        let n = variables.len();
        let index = |name: &str| {
            variables
                .iter()
                .position(|v| v.name == name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))
        };
        let all: VarSet = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
        let features: VarSet = variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.role == VariableRole::Feature)
            .fold(0, |acc, (i, _)| acc | 1 << i);

        let mut forbidden_parents = vec![0; n];
        let mut latent_targets = all;
        let mut sufficient = false;
        let mut max_hidden: Option<usize> = None;
        for constraint in constraints {
            match constraint {
                StructuralConstraint::RandomizedRoot(name) => {
                    let i = index(name)?;
                    forbidden_parents[i] = all;
                    latent_targets &= !(1 << i);
                }
                StructuralConstraint::NoOutgoingToFeatures(name) => {
                    let i = index(name)?;
                    for c in bits(features) {
                        forbidden_parents[c] |= 1 << i;
                    }
                }
                StructuralConstraint::CausalSufficiency => sufficient = true,
                StructuralConstraint::MaxHidden(k) => {
                    if *k > MAX_HIDDEN {
                        return Err(Error::input(format!(
                            "MaxHidden({k}) exceeds the latent search limit of {MAX_HIDDEN}"
                        )));
                    }
                    max_hidden = Some(max_hidden.map_or(*k, |m| m.min(*k)));
                }
            }
        }
        let max_hidden = if sufficient {
            0
        } else {
            max_hidden.unwrap_or(0)
        };
        if max_hidden > 0 {
            for k in 1..=max_hidden {
                let name = hidden_name(k);
                if variables.iter().any(|v| v.name == name) {
                    return Err(Error::input(format!(
                        "observed variable `{name}` collides with a latent variable name"
                    )));
                }
            }
        }
        Ok(SearchPlan {
            observed: variables.to_vec().into(),
            forbidden_parents,
            latent_targets,
            max_hidden,
        })
    }
}

fn hidden_name(k: usize) -> String {
    format!("H{k}")
}

/// Lazily yields every DAG admitted by a set of structural constraints.
///
/// Observed edges are the ordered pairs `(p, c)`, `p != c`, numbered
/// row-major over the variable order; a DAG's edge bitmask sets bit `k` for
/// pair `k`. Observed structures come out in ascending bitmask order. When
/// latent variables are allowed, each observed structure is followed by its
/// latent extensions: zero latents first, then one, then two, with latent
/// child sets in ascending (strictly increasing) bitmask order.
pub struct DagEnumerator {
    observed: Arc<[Variable]>,
    extended: Vec<Arc<[Variable]>>,
    pairs: Vec<(usize, usize)>,
    allowed: Vec<bool>,
    choices: Vec<bool>,
    parents: Vec<VarSet>,
    latent_configs: Vec<Vec<VarSet>>,
    pending: Option<(Vec<VarSet>, usize)>,
    done: bool,
}

impl DagEnumerator {
    fn new(plan: SearchPlan) -> Self {
        let n = plan.observed.len();
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1));
        for p in 0..n {
            for c in 0..n {
                if p != c {
                    pairs.push((p, c));
                }
            }
        }
        let allowed = pairs
            .iter()
            .map(|&(p, c)| plan.forbidden_parents[c] & (1 << p) == 0)
            .collect();

        let mut extended = vec![Arc::clone(&plan.observed)];
        for h in 1..=plan.max_hidden {
            let mut vars = plan.observed.to_vec();
            vars.extend((1..=h).map(|k| Variable::hidden(hidden_name(k))));
            extended.push(vars.into());
        }

        let candidates: Vec<VarSet> = (0..=plan.latent_targets)
            .filter(|&m| m & !plan.latent_targets == 0 && m.count_ones() >= 2)
            .collect();
        let mut latent_configs = vec![Vec::new()];
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..plan.max_hidden {
            let mut next = Vec::new();
            for combo in &frontier {
                let start = combo.last().map_or(0, |&i| i + 1);
                for i in start..candidates.len() {
                    let mut grown = combo.clone();
                    grown.push(i);
                    next.push(grown);
                }
            }
            latent_configs.extend(
                next.iter()
                    .map(|combo| combo.iter().map(|&i| candidates[i]).collect::<Vec<_>>()),
            );
            frontier = next;
        }

        DagEnumerator {
            observed: plan.observed,
            extended,
            pairs,
            allowed,
            choices: Vec::new(),
            parents: vec![0; n],
            latent_configs,
            pending: None,
            done: false,
        }
    }

    fn pair_at_level(&self, level: usize) -> (usize, usize) {
        self.pairs[self.pairs.len() - 1 - level]
    }

    fn creates_cycle(&self, p: usize, c: usize) -> bool {
        let mut reach: VarSet = 1 << p;
        let mut frontier: VarSet = 1 << p;
        while frontier != 0 {
            let mut next = 0;
            for v in bits(frontier) {
                next |= self.parents[v];
            }
            frontier = next & !reach;
            reach |= next;
        }
        reach & (1 << c) != 0
    }

    /// Moves to the next acyclic edge assignment in ascending bitmask order.
    fn backtrack(&mut self) {
        while let Some(took) = self.choices.pop() {
            let level = self.choices.len();
            let (p, c) = self.pair_at_level(level);
            if took {
                self.parents[c] &= !(1 << p);
            } else if self.allowed[level_index(self.pairs.len(), level)]
                && !self.creates_cycle(p, c)
            {
                self.parents[c] |= 1 << p;
                self.choices.push(true);
                return;
            }
        }
        self.done = true;
    }

    fn build(&self, observed_parents: &[VarSet], latent: &[VarSet]) -> Dag {
        let n = self.observed.len();
        let mut parents = observed_parents.to_vec();
        for (k, &targets) in latent.iter().enumerate() {
            for c in bits(targets) {
                parents[c] |= 1 << (n + k);
            }
            parents.push(0);
        }
        Dag::from_parent_masks(Arc::clone(&self.extended[latent.len()]), parents)
            .expect("enumeration only produces acyclic graphs")
    }
}

fn level_index(m: usize, level: usize) -> usize {
    m - 1 - level
}

impl Iterator for DagEnumerator {
    type Item = Dag;

    fn next(&mut self) -> Option<Dag> {
        loop {
            if let Some((parents, pos)) = self.pending.take() {
                if pos < self.latent_configs.len() {
                    let dag = self.build(&parents, &self.latent_configs[pos]);
                    self.pending = Some((parents, pos + 1));
                    return Some(dag);
                }
                self.backtrack();
                continue;
            }
            if self.done {
                return None;
            }
            while self.choices.len() < self.pairs.len() {
                self.choices.push(false);
            }
            self.pending = Some((self.parents.clone(), 0));
        }
    }
}

/// Streams every labeled DAG over `variables` that satisfies `constraints`,
/// each exactly once, in the deterministic order documented on
/// [`DagEnumerator`].
pub fn enumerate_dags(
    variables: &[Variable],
    constraints: &[StructuralConstraint],
) -> Result<DagEnumerator> {
    Ok(DagEnumerator::new(SearchPlan::new(variables, constraints)?))
}

struct CompiledStatement {
    a: usize,
    b: usize,
    given: VarSet,
    independent: bool,
}

fn compile(variables: &[Variable], statements: &[CiStatement]) -> Result<Vec<CompiledStatement>> {
    let index = |name: &str| {
        variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    };
    let mut seen: BTreeMap<(&str, &str, &BTreeSet<String>), &CiStatement> = BTreeMap::new();
    let mut out = Vec::with_capacity(statements.len());
    for s in statements {
        s.validate()?;
        if let Some(prev) = seen.insert(s.query_key(), s) {
            if prev.verdict != s.verdict {
                return Err(Error::Contradiction(Box::new(prev.clone()), Box::new(s.clone())));
            }
        }
        let given = s
            .given
            .iter()
            .try_fold(0, |acc, z| Ok::<_, Error>(acc | 1 << index(z)?))?;
        out.push(CompiledStatement {
            a: index(&s.lhs)?,
            b: index(&s.rhs)?,
            given,
            independent: s.verdict.is_independent(),
        });
    }
    Ok(out)
}

fn agrees(dag: &Dag, s: &CompiledStatement) -> bool {
    d_separated_idx(dag, s.a, s.b, s.given) == s.independent
}

/// All admissible DAGs whose d-separations reproduce every supplied
/// statement exactly (independent iff d-separated). An empty result means
/// no faithful explanation exists.
pub fn consistent_structures(
    variables: &[Variable],
    statements: &[CiStatement],
    constraints: &[StructuralConstraint],
) -> Result<Vec<Dag>> {
    let plan = SearchPlan::new(variables, constraints)?;
    let compiled = compile(variables, statements)?;
    Ok(DagEnumerator::new(plan)
        .filter(|dag| compiled.iter().all(|s| agrees(dag, s)))
        .collect())
}

/// The statements violated by the admissible DAG that violates the fewest
/// of them (first in enumeration order on ties). Empty when some DAG is
/// fully consistent.
pub fn least_violating(
    variables: &[Variable],
    statements: &[CiStatement],
    constraints: &[StructuralConstraint],
) -> Result<Vec<CiStatement>> {
    let plan = SearchPlan::new(variables, constraints)?;
    let compiled = compile(variables, statements)?;
    let mut best: Option<Vec<usize>> = None;
    for dag in DagEnumerator::new(plan) {
        let violated: Vec<usize> = compiled
            .iter()
            .enumerate()
            .filter(|(_, s)| !agrees(&dag, s))
            .map(|(i, _)| i)
            .collect();
        if best.as_ref().is_none_or(|b| violated.len() < b.len()) {
            let perfect = violated.is_empty();
            best = Some(violated);
            if perfect {
                break;
            }
        }
    }
    Ok(best
        .unwrap_or_default()
        .into_iter()
        .map(|i| statements[i].clone())
        .collect())
}

/// Directed edges present in every DAG of the list.
pub fn shared_edges(dags: &[Dag]) -> Result<BTreeSet<(String, String)>> {
    let (first, rest) = dags
        .split_first()
        .ok_or_else(|| Error::input("shared_edges needs at least one structure"))?;
    let observed = first.observed_names();
    let mut shared: BTreeSet<(String, String)> = first.edge_names().into_iter().collect();
    for dag in rest {
        if dag.observed_names() != observed {
            return Err(Error::input(
                "structures range over different observed variables",
            ));
        }
        let edges: BTreeSet<(String, String)> = dag.edge_names().into_iter().collect();
        shared.retain(|e| edges.contains(e));
    }
    Ok(shared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Verdict;

    fn features(n: usize) -> Vec<Variable> {
        (0..n).map(|i| Variable::feature(format!("V{i}"))).collect()
    }

    #[test]
    fn counts_small_graphs() {
        let counts: Vec<usize> = (0..=4)
            .map(|n| enumerate_dags(&features(n), &[]).unwrap().count())
            .collect();
        assert_eq!(counts, vec![1, 1, 3, 25, 543]);
    }

    #[test]
    fn order_is_ascending_bitmask() {
        let vars = features(3);
        let masks: Vec<u64> = enumerate_dags(&vars, &[])
            .unwrap()
            .map(|g| {
                let mut k = 0;
                let mut mask = 0u64;
                for p in 0..3 {
                    for c in 0..3 {
                        if p != c {
                            if g.has_edge(p, c) {
                                mask |= 1 << k;
                            }
                            k += 1;
                        }
                    }
                }
                mask
            })
            .collect();
        assert!(masks.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(masks[0], 0);
    }

    #[test]
    fn capacity_error_above_cap() {
        let err = enumerate_dags(&features(MAX_OBSERVED + 1), &[])
            .err()
            .unwrap();
        assert!(matches!(
            err,
            Error::Capacity {
                observed: 8,
                cap: 7
            }
        ));
    }

    #[test]
    fn constraint_must_reference_known_variable() {
        let err = enumerate_dags(
            &features(2),
            &[StructuralConstraint::RandomizedRoot("Q".into())],
        )
        .err()
        .unwrap();
        assert!(matches!(err, Error::UnknownVariable(_)));
    }

    #[test]
    fn randomized_root_has_no_parents() {
        let vars = vec![Variable::stimulus("S"), Variable::feature("X")];
        let dags: Vec<Dag> =
            enumerate_dags(&vars, &[StructuralConstraint::RandomizedRoot("S".into())])
                .unwrap()
                .collect();
        assert_eq!(dags.len(), 2);
        assert!(dags.iter().all(|g| g.parents(0) == 0));
    }

    #[test]
    fn response_never_points_at_features() {
        let vars = vec![
            Variable::feature("X1"),
            Variable::feature("X2"),
            Variable::response("R"),
        ];
        let dags: Vec<Dag> = enumerate_dags(
            &vars,
            &[StructuralConstraint::NoOutgoingToFeatures("R".into())],
        )
        .unwrap()
        .collect();
        assert!(dags.iter().all(|g| g.children(2) == 0));
        // 25 DAGs minus those with an edge out of R.
        assert_eq!(dags.len(), 12);
    }

    #[test]
    fn latent_extensions() {
        let vars = features(3);
        let with_latent: Vec<Dag> = enumerate_dags(&vars, &[StructuralConstraint::MaxHidden(1)])
            .unwrap()
            .collect();
        // four child sets of size >= 2 per observed structure, plus none
        assert_eq!(with_latent.len(), 25 * 5);
        let sufficient = enumerate_dags(
            &vars,
            &[
                StructuralConstraint::MaxHidden(1),
                StructuralConstraint::CausalSufficiency,
            ],
        )
        .unwrap()
        .count();
        assert_eq!(sufficient, 25);
        let two = enumerate_dags(&features(2), &[StructuralConstraint::MaxHidden(2)])
            .unwrap()
            .count();
        // only one admissible latent child set over two variables
        assert_eq!(two, 3 * 2);
    }

    #[test]
    fn rejects_hidden_input_and_large_latent_budget() {
        let vars = vec![Variable::hidden("H")];
        assert!(enumerate_dags(&vars, &[]).is_err());
        assert!(enumerate_dags(&features(2), &[StructuralConstraint::MaxHidden(3)]).is_err());
    }

    #[test]
    fn independence_of_two_gives_empty_graph() {
        let vars = features(2);
        let st = vec![CiStatement::independent("V0", "V1", Vec::<String>::new()).unwrap()];
        let dags = consistent_structures(&vars, &st, &[]).unwrap();
        assert_eq!(dags.len(), 1);
        assert_eq!(dags[0].edge_count(), 0);
    }

    #[test]
    fn contradiction_is_an_error() {
        let vars = features(2);
        let st = vec![
            CiStatement::independent("V0", "V1", Vec::<String>::new()).unwrap(),
            CiStatement::new("V1", "V0", Vec::<String>::new(), Verdict::Dependent).unwrap(),
        ];
        assert!(matches!(
            consistent_structures(&vars, &st, &[]).unwrap_err(),
            Error::Contradiction(..)
        ));
    }

    #[test]
    fn least_violating_names_the_conflict() {
        // A parentless S can only become dependent on a feature through an
        // edge out of S, which rules out the marginal independences.
        let vars = vec![
            Variable::stimulus("S"),
            Variable::feature("X1"),
            Variable::feature("X2"),
        ];
        let st = vec![
            CiStatement::independent("S", "X1", Vec::<String>::new()).unwrap(),
            CiStatement::independent("S", "X2", Vec::<String>::new()).unwrap(),
            CiStatement::dependent("S", "X1", ["X2"]).unwrap(),
            CiStatement::dependent("S", "X2", ["X1"]).unwrap(),
            CiStatement::independent("X1", "X2", Vec::<String>::new()).unwrap(),
        ];
        let constraints = [
            StructuralConstraint::RandomizedRoot("S".into()),
            StructuralConstraint::CausalSufficiency,
        ];
        assert!(consistent_structures(&vars, &st, &constraints)
            .unwrap()
            .is_empty());
        let violated = least_violating(&vars, &st, &constraints).unwrap();
        assert!(!violated.is_empty());
    }

    #[test]
    fn shared_edges_errors_and_singleton() {
        assert!(shared_edges(&[]).is_err());
        let g = Dag::new(features(2), [("V0", "V1")]).unwrap();
        let shared = shared_edges(std::slice::from_ref(&g)).unwrap();
        assert_eq!(shared.len(), 1);
        let other = Dag::empty(features(3)).unwrap();
        assert!(shared_edges(&[g, other]).is_err());
    }
}
