use std::collections::{BTreeMap, BTreeSet};

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::scm::Dataset;

/// Strata whose smallest expected cell count falls below this are pooled.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

struct Stratum {
    /// `counts[i * kb + j]` for a = i, b = j.
    counts: Vec<f64>,
}

impl Stratum {
    fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    fn margins(&self, ka: usize, kb: usize) -> (Vec<f64>, Vec<f64>) {
        let mut row = vec![0.0; ka];
        let mut col = vec![0.0; kb];
        for i in 0..ka {
            for j in 0..kb {
                row[i] += self.counts[i * kb + j];
                col[j] += self.counts[i * kb + j];
            }
        }
        (row, col)
    }

    fn min_expected(&self, ka: usize, kb: usize) -> f64 {
        let (row, col) = self.margins(ka, kb);
        let n = self.total();
        let mut min = f64::INFINITY;
        for r in &row {
            for c in &col {
                min = min.min(r * c / n);
            }
        }
        min
    }

    /// `(G, degrees of freedom)` of this stratum's table.
    fn g_statistic(&self, ka: usize, kb: usize) -> (f64, usize) {
        let (row, col) = self.margins(ka, kb);
        let n = self.total();
        let mut g = 0.0;
        for i in 0..ka {
            for j in 0..kb {
                let observed = self.counts[i * kb + j];
                if observed > 0.0 {
                    g += observed * (observed * n / (row[i] * col[j])).ln();
                }
            }
        }
        let ra = row.iter().filter(|&&r| r > 0.0).count();
        let rb = col.iter().filter(|&&c| c > 0.0).count();
        (2.0 * g, ra.saturating_sub(1) * rb.saturating_sub(1))
    }
}

/// G test of `a ⊥ b | given` on categorical columns.
///
/// Returns `(G, p-value)`: per-stratum G statistics and degrees of freedom
/// are summed and referred to a chi-squared distribution. Strata (ordered by
/// their conditioning configuration) with a smallest expected count below
/// [`MIN_EXPECTED_COUNT`] are merged into the neighbouring stratum, the next
/// one if it exists and the previous one otherwise, until every stratum is
/// large enough or only one remains (an unconditional test).
pub fn conditional_g_test(
    data: &Dataset,
    a: &str,
    b: &str,
    given: &BTreeSet<String>,
) -> Result<(f64, f64)> {
    if a == b || given.contains(a) || given.contains(b) {
        return Err(Error::input(
            "G test needs two distinct unconditioned columns",
        ));
    }
    let va = data.categorical(a)?;
    let vb = data.categorical(b)?;
    let vz: Vec<&[u32]> = given
        .iter()
        .map(|z| data.categorical(z))
        .collect::<Result<_>>()?;
    let ka = va.iter().max().map_or(1, |&m| m as usize + 1);
    let kb = vb.iter().max().map_or(1, |&m| m as usize + 1);

    let mut by_config: BTreeMap<Vec<u32>, Stratum> = BTreeMap::new();
    for r in 0..data.n_rows() {
        let key: Vec<u32> = vz.iter().map(|col| col[r]).collect();
        let stratum = by_config.entry(key).or_insert_with(|| Stratum {
            counts: vec![0.0; ka * kb],
        });
        stratum.counts[va[r] as usize * kb + vb[r] as usize] += 1.0;
    }

    let mut strata: Vec<Stratum> = by_config.into_values().collect();
    while strata.len() > 1 {
        let Some(small) = strata
            .iter()
            .position(|s| s.min_expected(ka, kb) < MIN_EXPECTED_COUNT)
        else {
            break;
        };
        let absorbed = strata.remove(small);
        let into = if small < strata.len() {
            small
        } else {
            small - 1
        };
        for (dst, src) in strata[into].counts.iter_mut().zip(absorbed.counts) {
            *dst += src;
        }
    }

    let (g, df) = strata.iter().fold((0.0, 0usize), |(g, df), s| {
        let (gs, ds) = s.g_statistic(ka, kb);
        (g + gs, df + ds)
    });
    let g = g.max(0.0);
    if df == 0 {
        return Ok((g, 1.0));
    }
    let chi2 = ChiSquared::new(df as f64).map_err(|e| Error::Degenerate(e.to_string()))?;
    Ok((g, chi2.sf(g).clamp(0.0, 1.0)))
}
