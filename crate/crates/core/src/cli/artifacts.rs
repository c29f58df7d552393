//! On-disk artifacts: `contexts.json`, `daseinisation.csv`, `report.json`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contexts::{Context, ContextCategory};
use crate::daseinise::{inner_selfadjoint, outer_selfadjoint};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator, Tolerances};

pub const CONTEXTS_FILE: &str = "contexts.json";
pub const DASEINISATION_FILE: &str = "daseinisation.csv";
pub const REPORT_FILE: &str = "report.json";

/// 17 significant digits: round-trips every `f64`.
pub fn decimal(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixOut {
    pub re: Vec<Vec<String>>,
    pub im: Vec<Vec<String>>,
}

impl MatrixOut {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let (re, im) = m.to_parts();
        let text = |rows: Vec<Vec<f64>>| rows.into_iter().map(|r| r.into_iter().map(decimal).collect()).collect();
        Self {
            re: text(re),
            im: text(im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let parse = |rows: &[Vec<String>]| -> Result<Vec<Vec<f64>>> {
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad matrix entry {s:?}"))))
                        .collect()
                })
                .collect()
        };
        ComplexMatrix::from_parts(&parse(&self.re)?, Some(&parse(&self.im)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextOut {
    pub id: String,
    pub ranks: Vec<usize>,
    pub atoms: Vec<MatrixOut>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorOut {
    pub label: String,
    pub context_id: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextsFile {
    pub config_hash: String,
    pub dim: usize,
    pub generators: Vec<GeneratorOut>,
    pub contexts: Vec<ContextOut>,
    /// Covering pairs `[lower, upper]` of the order.
    pub covers: Vec<[String; 2]>,
}

impl ContextsFile {
    pub fn from_category(cat: &ContextCategory, config_hash: &str) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            dim: cat.dim(),
            generators: cat
                .generators()
                .iter()
                .map(|(label, id)| GeneratorOut {
                    label: label.clone(),
                    context_id: id.clone(),
                })
                .collect(),
            contexts: cat
                .contexts()
                .iter()
                .map(|v| ContextOut {
                    id: v.id().to_string(),
                    ranks: v.ranks().to_vec(),
                    atoms: v.atoms().iter().map(|a| MatrixOut::from_matrix(a.matrix())).collect(),
                })
                .collect(),
            covers: cat
                .covers()
                .iter()
                .map(|&(lo, up)| [cat.context(lo).id().to_string(), cat.context(up).id().to_string()])
                .collect(),
        }
    }

    /// Rebuilds the category, checking that every context id survives the
    /// round trip.
    pub fn to_category(&self, tol: &Tolerances) -> Result<ContextCategory> {
        let contexts = self
            .contexts
            .iter()
            .map(|c| {
                let atoms = c
                    .atoms
                    .iter()
                    .map(|a| HermitianOperator::new(a.to_matrix()?, tol))
                    .collect::<Result<Vec<_>>>()?;
                let v = Context::from_atoms(atoms, tol)?;
                if v.id() != c.id {
                    return Err(Error::Parse(format!("context {} does not reproduce its id", c.id)));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        let generators = self
            .generators
            .iter()
            .map(|g| (g.label.clone(), g.context_id.clone()))
            .collect();
        ContextCategory::from_contexts(contexts, generators, tol)
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Loads `contexts.json` if it was produced from the same configuration.
pub fn load_cached_category(path: &Path, config_hash: &str, tol: &Tolerances) -> Option<ContextCategory> {
    let text = std::fs::read_to_string(path).ok()?;
    let file: ContextsFile = serde_json::from_str(&text).ok()?;
    if file.config_hash != config_hash {
        return None;
    }
    file.to_category(tol).ok()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    context_id: &'a str,
    operator: &'a str,
    atom_index: usize,
    rank: usize,
    outer: String,
    inner: String,
}

/// Outer and inner daseinisation of every operator at every atom.
pub fn daseinisation_csv(
    operators: &[HermitianOperator],
    cat: &ContextCategory,
    tol: &Tolerances,
) -> Result<(Vec<u8>, usize)> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut rows = 0;
    let mut contexts: Vec<&Context> = cat.contexts().iter().collect();
    contexts.sort_by(|a, b| a.id().cmp(b.id()));
    for a in operators {
        for v in &contexts {
            let outer = outer_selfadjoint(a, v, tol)?;
            let inner = inner_selfadjoint(a, v, tol)?;
            for i in 0..v.len() {
                writer
                    .serialize(CsvRow {
                        context_id: v.id(),
                        operator: a.display_label(),
                        atom_index: i,
                        rank: v.ranks()[i],
                        outer: decimal(outer.atom_values[i]),
                        inner: decimal(inner.atom_values[i]),
                    })
                    .map_err(|e| Error::Parse(e.to_string()))?;
                rows += 1;
            }
        }
    }
    let bytes = writer.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok((bytes, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::{build_category, CategoryOptions};
    use crate::linalg::pauli;

    #[test]
    fn decimals_round_trip() {
        for x in [0.1, -1.0 / 3.0, std::f64::consts::PI, 1e-300, 0.0] {
            assert_eq!(decimal(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn contexts_round_trip() {
        let tol = Tolerances::default();
        let cat = build_category(&[pauli::z(), pauli::x()], &CategoryOptions::default(), &tol, 0).unwrap();
        let file = ContextsFile::from_category(&cat, "h");
        let back = file.to_category(&tol).unwrap();
        assert_eq!(ContextsFile::from_category(&back, "h"), file);
    }
}
