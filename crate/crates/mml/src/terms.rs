//! Imported pants lists for surfaces whose curves are enumerated elsewhere.
//!
//! CSV header `ell_gamma1,ell_gamma2,alpha_gamma1,alpha_gamma2`; one row per
//! embedded pair of pants with the boundary as one cuff. Whether the list is
//! complete, and whether symmetric pairs appear once or twice, is up to the
//! producer.

use std::io::Read;

use anyhow::Context;
use mml_core::identity::ImportedTerm;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    ell_gamma1: f64,
    ell_gamma2: f64,
    alpha_gamma1: f64,
    alpha_gamma2: f64,
}

pub fn read_terms<R: Read>(input: R) -> anyhow::Result<Vec<ImportedTerm>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<Row>().enumerate() {
        // header is line 1
        let row = row.with_context(|| format!("term list line {}", i + 2))?;
        if !(row.ell_gamma1 > 0.0 && row.ell_gamma2 > 0.0) {
            anyhow::bail!("term list line {}: lengths must be positive", i + 2);
        }
        out.push(ImportedTerm {
            ell1: row.ell_gamma1,
            ell2: row.ell_gamma2,
            alpha1: row.alpha_gamma1,
            alpha2: row.alpha_gamma2,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_rows() {
        let t = read_terms(
            "ell_gamma1,ell_gamma2,alpha_gamma1,alpha_gamma2\n1.5, 2.5, 0.1, -0.2\n".as_bytes(),
        )
        .unwrap();
        assert_eq!(
            t,
            vec![ImportedTerm {
                ell1: 1.5,
                ell2: 2.5,
                alpha1: 0.1,
                alpha2: -0.2
            }]
        );
    }

    #[test]
    fn reports_line() {
        let err = read_terms(
            "ell_gamma1,ell_gamma2,alpha_gamma1,alpha_gamma2\n1,2,3,4\n1,x,3,4\n".as_bytes(),
        )
        .unwrap_err();
        assert!(format!("{err:#}").contains("line 3"));
        assert!(read_terms(
            "ell_gamma1,ell_gamma2,alpha_gamma1,alpha_gamma2\n0,2,3,4\n".as_bytes()
        )
        .is_err());
    }
}
