use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use neurocausal::scm::{canonical_fixture, Scm};

use crate::out;
use crate::{Failure, SimulateArgs};

/// Loads a canonical fixture by name or an SCM spec file.
pub fn load_scm(fixture: Option<&str>, spec: Option<&Path>) -> Result<Scm, Failure> {
    match (fixture, spec) {
        (Some(name), None) => canonical_fixture(name).map_err(Failure::from),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            Scm::from_spec_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        _ => Err(Failure::Usage(
            "give exactly one of --fixture or --spec".into(),
        )),
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let scm = load_scm(args.fixture.as_deref(), args.spec.as_deref())?;
    let mut data = scm.sample(args.n, args.seed)?;
    if let Some(threshold) = args.binarize {
        data = data.binarize_all(threshold)?;
    }
    let file = File::create(&args.output).map_err(|e| Failure::io(&args.output, e))?;
    data.write_csv(BufWriter::new(file))
        .map_err(|e| Failure::io(&args.output, e))?;
    out!("{}", scm.dag().to_edge_list());
    Ok(())
}
