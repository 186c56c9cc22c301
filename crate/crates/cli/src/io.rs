//! File formats: height fields and cocycles as JSON, point samples as CSV.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use csc_core::affine::Cocycle;
use csc_core::minkowski::{LorentzMap, MinkVector};
use csc_core::surface::{Grid, HeightField};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// On-disk height field: a regular grid over a box plus row-major values
/// (last axis fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightFieldDoc {
    pub domain_min: Vec<f64>,
    pub domain_max: Vec<f64>,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl From<&HeightField> for HeightFieldDoc {
    fn from(f: &HeightField) -> Self {
        let g = f.grid();
        HeightFieldDoc {
            domain_min: g.domain_min().to_vec(),
            domain_max: g.domain_max().to_vec(),
            shape: g.shape().to_vec(),
            values: f.values().to_vec(),
        }
    }
}

impl TryFrom<HeightFieldDoc> for HeightField {
    type Error = csc_core::Error;

    fn try_from(doc: HeightFieldDoc) -> csc_core::Result<Self> {
        let grid = Grid::new(&doc.domain_min, &doc.domain_max, &doc.shape)?;
        HeightField::new(grid, doc.values)
    }
}

pub fn read_field(path: &Path) -> Result<HeightField> {
    let doc: HeightFieldDoc = read_json(path)?;
    Ok(HeightField::try_from(doc)?)
}

pub fn write_field(path: &Path, field: &HeightField) -> Result<()> {
    write_json(path, &HeightFieldDoc::from(field))
}

/// `{generators: {name: matrix rows}, tau: {name: vector}, relators: [word]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleDoc {
    pub generators: BTreeMap<String, Vec<Vec<f64>>>,
    pub tau: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub relators: Vec<String>,
}

impl From<&Cocycle> for CocycleDoc {
    fn from(c: &Cocycle) -> Self {
        CocycleDoc {
            generators: c
                .generators()
                .iter()
                .map(|(n, g)| (n.clone(), g.matrix().to_rows()))
                .collect(),
            tau: c.tau().iter().map(|(n, v)| (n.clone(), v.coords().to_vec())).collect(),
            relators: c.relators().to_vec(),
        }
    }
}

impl TryFrom<CocycleDoc> for Cocycle {
    type Error = csc_core::Error;

    fn try_from(doc: CocycleDoc) -> csc_core::Result<Self> {
        let generators = doc
            .generators
            .iter()
            .map(|(n, rows)| Ok((n.clone(), LorentzMap::from_rows(rows)?)))
            .collect::<csc_core::Result<BTreeMap<_, _>>>()?;
        let tau = doc
            .tau
            .iter()
            .map(|(n, v)| Ok((n.clone(), MinkVector::new(v)?)))
            .collect::<csc_core::Result<BTreeMap<_, _>>>()?;
        Cocycle::new(generators, tau, doc.relators)
    }
}

pub fn read_cocycle(path: &Path) -> Result<Cocycle> {
    let doc: CocycleDoc = read_json(path)?;
    Ok(Cocycle::try_from(doc)?)
}

/// Writes a header and rows of numbers.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use csc_core::surface::Hyperboloid;

    #[test]
    fn height_field_round_trip_is_exact() {
        let grid = Grid::cube(2, -0.5, 0.5, 0.25).unwrap();
        let f = HeightField::sample(grid, &Hyperboloid::round(2, 1.3).unwrap()).unwrap();
        let text = serde_json::to_string(&HeightFieldDoc::from(&f)).unwrap();
        let back = HeightField::try_from(serde_json::from_str::<HeightFieldDoc>(&text).unwrap()).unwrap();
        assert_eq!(back.values(), f.values());
        assert!(back.grid().same_layout(f.grid()));
    }

    #[test]
    fn mismatched_value_count_is_rejected() {
        let doc = HeightFieldDoc {
            domain_min: vec![0.0, 0.0],
            domain_max: vec![1.0, 1.0],
            shape: vec![3, 3],
            values: vec![0.0; 8],
        };
        assert!(HeightField::try_from(doc).is_err());
    }

    #[test]
    fn cocycle_documents_round_trip() {
        let text = r#"{
            "generators": {"a": [[1,0,0,0],[0,0,-1,0],[0,1,0,0],[0,0,0,1]]},
            "tau": {"a": [0.0, 1.0, 0.5, 0.0]},
            "relators": ["a a a a"]
        }"#;
        let c = Cocycle::try_from(serde_json::from_str::<CocycleDoc>(text).unwrap()).unwrap();
        let doc = CocycleDoc::from(&c);
        assert_eq!(doc.relators, vec!["a a a a".to_string()]);
        assert_eq!(Cocycle::try_from(doc).unwrap(), c);

        // a component along the rotation axis survives a a a a
        let bad = text.replace("[0.0, 1.0, 0.5, 0.0]", "[2.0, 1.0, 0.5, 0.0]");
        assert!(Cocycle::try_from(serde_json::from_str::<CocycleDoc>(&bad).unwrap()).is_err());
    }
}
