use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Coefficient, DomainSpec, SplitForm, SplitTerm, VectorFunction};
use crate::problems::builtin::Problem;
use crate::problems::expr::Expr;
use crate::problems::sampling::GridSpec;
use crate::{CMatrix, C64};

/// Matrix entry: a real number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    fn value(self) -> C64 {
        match self {
            Scalar::Real(x) => C64::from(x),
            Scalar::Complex([re, im]) => C64::new(re, im),
        }
    }

    fn from_value(z: C64) -> Self {
        if z.im == 0.0 {
            Scalar::Real(z.re)
        } else {
            Scalar::Complex([z.re, z.im])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase", deny_unknown_fields)]
pub enum MatrixSpec {
    /// Row-major list of rows.
    Dense { rows: Vec<Vec<Scalar>> },
    /// `[row, col, re, im]` quadruples, zero-based.
    Coo { entries: Vec<(usize, usize, f64, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub f: String,
    #[serde(rename = "A")]
    pub a: MatrixSpec,
}

/// On-disk description of a split-form problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub shape: [usize; 2],
    pub terms: Vec<TermSpec>,
    pub domain: DomainSpec,
    pub grid: GridSpec,
}

fn file_err(path: impl std::fmt::Display, msg: impl std::fmt::Display) -> Error {
    Error::ProblemFile(format!("{path}: {msg}"))
}

impl MatrixSpec {
    fn to_coefficient(&self, shape: (usize, usize), path: &str) -> Result<Coefficient> {
        let (m, n) = shape;
        match self {
            MatrixSpec::Dense { rows } => {
                if rows.len() != m {
                    return Err(file_err(format!("{path}.rows"), format!("expected {m} rows, found {}", rows.len())));
                }
                let mut a = CMatrix::zeros(m, n);
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != n {
                        return Err(file_err(
                            format!("{path}.rows[{i}]"),
                            format!("expected {n} columns, found {}", row.len()),
                        ));
                    }
                    for (j, x) in row.iter().enumerate() {
                        let v = x.value();
                        if !v.re.is_finite() || !v.im.is_finite() {
                            return Err(file_err(format!("{path}.rows[{i}][{j}]"), "entry is not finite"));
                        }
                        a[(i, j)] = v;
                    }
                }
                Ok(Coefficient::Dense(a))
            }
            MatrixSpec::Coo { entries } => {
                let mut out = Vec::with_capacity(entries.len());
                for (k, &(i, j, re, im)) in entries.iter().enumerate() {
                    if i >= m || j >= n {
                        return Err(file_err(
                            format!("{path}.entries[{k}]"),
                            format!("position ({i}, {j}) outside {m}x{n}"),
                        ));
                    }
                    if !re.is_finite() || !im.is_finite() {
                        return Err(file_err(format!("{path}.entries[{k}]"), "entry is not finite"));
                    }
                    out.push((i, j, C64::new(re, im)));
                }
                Ok(Coefficient::Sparse { rows: m, cols: n, entries: out })
            }
        }
    }

    fn from_coefficient(c: &Coefficient) -> Self {
        match c {
            Coefficient::Dense(a) => MatrixSpec::Dense {
                rows: (0..a.nrows())
                    .map(|i| (0..a.ncols()).map(|j| Scalar::from_value(a[(i, j)])).collect())
                    .collect(),
            },
            Coefficient::Sparse { entries, .. } => MatrixSpec::Coo {
                entries: entries.iter().map(|&(i, j, v)| (i, j, v.re, v.im)).collect(),
            },
        }
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ProblemFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| file_err(path.display(), e))?;
        Self::from_json(&text)
    }

    /// Describe a split-form problem. Term labels must parse as expressions.
    pub fn from_problem(p: &Problem) -> Result<Self> {
        let sf = p
            .function
            .split()
            .ok_or_else(|| Error::ProblemFile(format!("{}: only split forms can be exported", p.name)))?;
        let (m, n) = sf.shape();
        let mut terms = Vec::with_capacity(sf.len());
        for (k, t) in sf.terms().iter().enumerate() {
            Expr::parse(&t.label).map_err(|e| file_err(format!("terms[{k}].f"), e))?;
            terms.push(TermSpec {
                f: t.label.clone(),
                a: MatrixSpec::from_coefficient(&t.coeff),
            });
        }
        Ok(Self {
            name: p.name.clone(),
            shape: [m, n],
            terms,
            domain: p.domain.clone(),
            grid: p.grid,
        })
    }

    pub fn into_problem(self) -> Result<Problem> {
        let [m, n] = self.shape;
        if m == 0 || n == 0 {
            return Err(file_err("shape", "dimensions must be positive"));
        }
        if self.terms.is_empty() {
            return Err(file_err("terms", "at least one term is required"));
        }
        self.domain.validate().map_err(|e| file_err("domain", e))?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (k, t) in self.terms.iter().enumerate() {
            let expr = Expr::parse(&t.f).map_err(|e| file_err(format!("terms[{k}].f"), e))?;
            let coeff = t.a.to_coefficient((m, n), &format!("terms[{k}].A"))?;
            terms.push(SplitTerm::new(t.f.clone(), move |z| expr.eval(z), coeff));
        }
        let sf = SplitForm::new((m, n), terms).map_err(|e| file_err("terms", e))?;
        Ok(Problem {
            name: self.name,
            function: VectorFunction::from_split(sf),
            domain: self.domain,
            grid: self.grid,
            truth: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::builtin::builtin;

    #[test]
    fn builtins_round_trip() {
        for name in ["artificial", "delay", "lowrank_residual", "split_large"] {
            let p = builtin(name, Some(5), 11).unwrap();
            let text = ProblemFile::from_problem(&p).unwrap().to_json();
            let q = ProblemFile::from_json(&text).unwrap().into_problem().unwrap();
            assert_eq!(q.domain, p.domain);
            assert_eq!(q.grid, p.grid);
            for z in [C64::new(0.3, 0.1), C64::new(-0.7, 0.4), C64::new(0.9, 0.0)] {
                let a = p.function.eval(z).unwrap();
                let b = q.function.eval(z).unwrap();
                let scale = a.camax().max(1.0);
                assert!((a - b).camax() <= 1e-14 * scale, "{name} at {z}");
            }
        }
    }

    #[test]
    fn rational_toy_is_not_exportable() {
        let p = builtin("rational_toy", None, 0).unwrap();
        assert!(ProblemFile::from_problem(&p).is_err());
    }

    const SMALL: &str = r#"{
        "name": "toy",
        "shape": [2, 2],
        "terms": [
            {"f": "exp(z)", "A": {"format": "dense", "rows": [[1, 0], [[0, 2], 3]]}},
            {"f": "z^2", "A": {"format": "coo", "entries": [[1, 0, 0.5, 0.0]]}}
        ],
        "domain": {"kind": "disc", "center": [0, 0], "radius": 1},
        "grid": {"interior": 30, "boundary": 10}
    }"#;

    #[test]
    fn parses_mixed_entries() {
        let p = ProblemFile::from_json(SMALL).unwrap().into_problem().unwrap();
        let z = C64::new(0.2, 0.3);
        let f = p.function.eval_matrix(z).unwrap();
        assert!((f[(1, 0)] - (C64::new(0.0, 2.0) * z.exp() + 0.5 * z * z)).norm() < 1e-15);
        assert_eq!(f[(0, 1)], C64::from(0.0));
        assert_eq!(p.make_grid().unwrap().len(), 40);
    }

    fn message(text: &str) -> String {
        match ProblemFile::from_json(text).and_then(|f| f.into_problem()) {
            Err(Error::ProblemFile(m)) => m,
            other => panic!("expected a problem-file error, got {other:?}"),
        }
    }

    #[test]
    fn errors_cite_the_field() {
        let short_row = SMALL.replace("[[0, 2], 3]", "[3]");
        assert!(message(&short_row).starts_with("terms[0].A.rows[1]"));
        let bad_pos = SMALL.replace("[1, 0, 0.5, 0.0]", "[2, 0, 0.5, 0.0]");
        assert!(message(&bad_pos).starts_with("terms[1].A.entries[0]"));
        let bad_expr = SMALL.replace("z^2", "q(z)");
        assert!(message(&bad_expr).starts_with("terms[1].f"));
        let bad_radius = SMALL.replace("\"radius\": 1", "\"radius\": -1");
        assert!(message(&bad_radius).starts_with("domain"));
        assert!(message(&SMALL.replace("\"name\"", "\"nome\"")).contains("nome"));
    }
}
