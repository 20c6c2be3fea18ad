use std::fs;

use neurocausal::graph::{
    consistent_structures, least_violating, parse_statements, shared_edges, CiStatement,
    StructuralConstraint, Variable, VariableRole,
};

use crate::outln;
use crate::{EnumerateArgs, Failure};

/// Parses `S:stimulus,X1,X2` into variables; the role defaults to feature.
pub fn parse_variables(spec: &str) -> Result<Vec<Variable>, Failure> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (name, role) = match item.split_once(':') {
                Some((n, r)) => (n.trim(), r.trim().parse::<VariableRole>()?),
                None => (item, VariableRole::Feature),
            };
            if role == VariableRole::Hidden {
                return Err(Failure::Usage(format!(
                    "`{name}`: hidden variables are not listed; use --constraint max-hidden:K"
                )));
            }
            Ok(Variable::new(name, role))
        })
        .collect()
}

pub fn parse_constraint(text: &str) -> Result<StructuralConstraint, Failure> {
    let (key, arg) = match text.split_once(':') {
        Some((k, a)) => (k.trim(), Some(a.trim())),
        None => (text.trim(), None),
    };
    match (key, arg) {
        ("randomized-root", Some(v)) => Ok(StructuralConstraint::RandomizedRoot(v.to_string())),
        ("no-outgoing-to-features", Some(v)) => {
            Ok(StructuralConstraint::NoOutgoingToFeatures(v.to_string()))
        }
        ("causal-sufficiency", None) => Ok(StructuralConstraint::CausalSufficiency),
        ("max-hidden", Some(k)) => k
            .parse()
            .map(StructuralConstraint::MaxHidden)
            .map_err(|_| Failure::Usage(format!("max-hidden needs a count, found `{k}`"))),
        _ => Err(Failure::Usage(format!("unknown constraint `{text}`"))),
    }
}

/// Constraints implied by the roles plus the explicit ones.
pub fn constraints_for(
    variables: &[Variable],
    extra: &[String],
) -> Result<Vec<StructuralConstraint>, Failure> {
    let mut out = Vec::new();
    for v in variables {
        match v.role {
            VariableRole::Stimulus => {
                out.push(StructuralConstraint::RandomizedRoot(v.name.clone()))
            }
            VariableRole::Response => {
                out.push(StructuralConstraint::NoOutgoingToFeatures(v.name.clone()))
            }
            _ => {}
        }
    }
    for text in extra {
        let c = parse_constraint(text)?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

pub fn cmd_enumerate(args: &EnumerateArgs) -> Result<(), Failure> {
    let variables = parse_variables(&args.variables)?;
    let statements: Vec<CiStatement> = match &args.statements {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            parse_statements(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => Vec::new(),
    };
    let constraints = constraints_for(&variables, &args.constraints)?;
    let dags = consistent_structures(&variables, &statements, &constraints)?;
    outln!("{} consistent structure(s)", dags.len());
    for dag in &dags {
        let hidden: Vec<&str> = dag
            .variables()
            .iter()
            .filter(|v| v.role == VariableRole::Hidden)
            .map(|v| v.name.as_str())
            .collect();
        if hidden.is_empty() {
            outln!("  {dag}");
        } else {
            outln!("  {dag}  (latent {})", hidden.join(", "));
        }
    }
    if dags.is_empty() {
        let violated = least_violating(&variables, &statements, &constraints)?;
        return Err(Failure::Analysis(format!(
            "no structure is faithful to the statements; closest candidate violates: {}",
            violated
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ")
        )));
    }
    let shared = shared_edges(&dags)?;
    let shared: Vec<String> = shared.iter().map(|(p, c)| format!("{p} -> {c}")).collect();
    if shared.is_empty() {
        outln!("shared edges: (none)");
    } else {
        outln!("shared edges: {}", shared.join(", "));
    }
    Ok(())
}
