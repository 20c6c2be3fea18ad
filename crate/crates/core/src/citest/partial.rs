use std::borrow::Cow;
use std::collections::BTreeSet;

use nalgebra::DMatrix;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::scm::{ColumnData, Dataset};

/// Numeric view of a column. Binary categorical columns are encoded as ±1
/// (category 0 → -1); other categorical columns are rejected.
pub fn numeric_view<'a>(data: &'a Dataset, name: &str) -> Result<Cow<'a, [f64]>> {
    let column = data.column(name)?;
    match &column.data {
        ColumnData::Numeric(v) => Ok(Cow::Borrowed(v)),
        ColumnData::Categorical(v) if column.data.levels() <= Some(2) => Ok(Cow::Owned(
            v.iter().map(|&c| if c == 0 { -1.0 } else { 1.0 }).collect(),
        )),
        ColumnData::Categorical(_) => Err(Error::input(format!(
            "column `{name}` has more than two categories and cannot enter a partial correlation"
        ))),
    }
}

/// Sample partial correlation of `a` and `b` given `given`, with the two-sided
/// Fisher-z p-value on `n - |given| - 3` effective degrees of freedom.
///
/// Returns `(partial correlation, p-value)`. The partial correlation is read
/// off the inverse of the sample correlation matrix of `[a, b, given...]`.
pub fn partial_correlation(
    data: &Dataset,
    a: &str,
    b: &str,
    given: &BTreeSet<String>,
) -> Result<(f64, f64)> {
    if a == b || given.contains(a) || given.contains(b) {
        return Err(Error::input(
            "partial correlation needs two distinct unconditioned columns",
        ));
    }
    let n = data.n_rows();
    if n <= given.len() + 3 {
        return Err(Error::Degenerate(format!(
            "{n} rows are too few to condition on {} columns",
            given.len()
        )));
    }
    let names: Vec<&str> = [a, b]
        .into_iter()
        .chain(given.iter().map(String::as_str))
        .collect();
    let columns: Vec<Cow<[f64]>> = names
        .iter()
        .map(|name| numeric_view(data, name))
        .collect::<Result<_>>()?;

    let k = columns.len();
    let means: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    let mut cov = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let s: f64 = columns[i]
                .iter()
                .zip(columns[j].iter())
                .map(|(x, y)| (x - means[i]) * (y - means[j]))
                .sum();
            cov[(i, j)] = s;
            cov[(j, i)] = s;
        }
    }
    for i in 0..k {
        if !(cov[(i, i)] > 0.0) {
            return Err(Error::Degenerate(format!(
                "column `{}` is constant",
                names[i]
            )));
        }
    }
    let scale: Vec<f64> = (0..k).map(|i| cov[(i, i)].sqrt()).collect();
    let corr = DMatrix::from_fn(k, k, |i, j| cov[(i, j)] / (scale[i] * scale[j]));

    let chol = corr
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Degenerate(format!("singular covariance among {names:?}")))?;
    let min_pivot = (0..k)
        .map(|i| chol.l_dirty()[(i, i)])
        .fold(f64::INFINITY, f64::min);
    if min_pivot * min_pivot < 1e-12 {
        return Err(Error::Degenerate(format!(
            "singular covariance among {names:?}"
        )));
    }
    let precision = chol.inverse();
    let r = (-precision[(0, 1)] / (precision[(0, 0)] * precision[(1, 1)]).sqrt()).clamp(-1.0, 1.0);
    Ok((r, fisher_z_p_value(r, n, given.len())))
}

fn fisher_z_p_value(r: f64, n: usize, conditioned: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let z = r.atanh() * ((n - conditioned - 3) as f64).sqrt();
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}
