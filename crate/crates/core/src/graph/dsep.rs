use std::collections::BTreeSet;

use super::{bits, CiStatement, Dag, VarSet, VariableRole, Verdict};
use crate::error::{Error, Result};

/// Whether `a` and `b` are d-separated by `given` in `dag`.
pub fn d_separated(dag: &Dag, a: &str, b: &str, given: &BTreeSet<String>) -> Result<bool> {
    let ai = dag.index_of(a)?;
    let bi = dag.index_of(b)?;
    let z = dag.mask_of(given.iter().map(String::as_str))?;
    if ai == bi {
        return Err(Error::input(format!(
            "d-separation query relates `{a}` to itself"
        )));
    }
    if z & (1 << ai | 1 << bi) != 0 {
        return Err(Error::input(
            "query endpoint is also in the conditioning set",
        ));
    }
    Ok(d_separated_idx(dag, ai, bi, z))
}

/// Reachability form of the blocking rules: a trail is explored as
/// (node, direction) pairs, where `up` means the node was entered from one
/// of its children and `down` from one of its parents.
pub(crate) fn d_separated_idx(dag: &Dag, a: usize, b: usize, given: VarSet) -> bool {
    // Colliders are open iff they are in the ancestral closure of the
    // conditioning set.
    let open_colliders = dag.ancestral_closure(given);
    let mut seen_up: VarSet = 0;
    let mut seen_down: VarSet = 0;
    let mut todo_up: VarSet = 1 << a;
    let mut todo_down: VarSet = 0;

    loop {
        if todo_up != 0 {
            let y = todo_up.trailing_zeros() as usize;
            todo_up &= todo_up - 1;
            if seen_up & (1 << y) != 0 {
                continue;
            }
            seen_up |= 1 << y;
            if given & (1 << y) != 0 {
                continue;
            }
            if y == b {
                return false;
            }
            todo_up |= dag.parents(y) & !seen_up;
            todo_down |= dag.children(y) & !seen_down;
        } else if todo_down != 0 {
            let y = todo_down.trailing_zeros() as usize;
            todo_down &= todo_down - 1;
            if seen_down & (1 << y) != 0 {
                continue;
            }
            seen_down |= 1 << y;
            let conditioned = given & (1 << y) != 0;
            if !conditioned {
                if y == b {
                    return false;
                }
                todo_down |= dag.children(y) & !seen_down;
            }
            if open_colliders & (1 << y) != 0 {
                todo_up |= dag.parents(y) & !seen_up;
            }
        } else {
            return true;
        }
    }
}

/// Every CI statement the graph implies over `observed`: each unordered pair
/// (in the given order) with each subset of the remaining observed variables
/// (ascending bitmask order over the remaining list).
pub fn implied_ci_statements(dag: &Dag, observed: &[&str]) -> Result<Vec<CiStatement>> {
    let idx: Vec<usize> = observed
        .iter()
        .map(|name| dag.index_of(name))
        .collect::<Result<_>>()?;
    for (&i, name) in idx.iter().zip(observed) {
        if dag.role(i) == VariableRole::Hidden {
            return Err(Error::input(format!(
                "`{name}` is hidden and cannot be observed"
            )));
        }
    }
    if idx.iter().collect::<BTreeSet<_>>().len() != idx.len() {
        return Err(Error::input("observed list contains duplicates"));
    }

    let mut out = Vec::new();
    for x in 0..idx.len() {
        for y in x + 1..idx.len() {
            let rest: Vec<usize> = (0..idx.len()).filter(|&k| k != x && k != y).collect();
            for subset in 0u64..(1 << rest.len()) {
                let members: Vec<usize> = bits(subset).map(|k| rest[k]).collect();
                let z = members.iter().fold(0, |acc, &k| acc | 1 << idx[k]);
                let separated = d_separated_idx(dag, idx[x], idx[y], z);
                out.push(CiStatement {
                    lhs: observed[x].to_string(),
                    rhs: observed[y].to_string(),
                    given: members.iter().map(|&k| observed[k].to_string()).collect(),
                    verdict: Verdict::from_separated(separated),
                });
            }
        }
    }
    Ok(out)
}
