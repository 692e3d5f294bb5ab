use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernel::SeededStream;
use crate::model::{Coefficient, SplitForm, VectorFunction};
use crate::{CMatrix, CVector, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    #[default]
    Complex,
}

impl Field {
    /// 1 for real, 2 for complex Gaussians.
    pub fn c(self) -> f64 {
        match self {
            Field::Real => 1.0,
            Field::Complex => 2.0,
        }
    }

    pub(crate) fn draw(self, stream: &mut SeededStream, count: usize) -> Vec<C64> {
        match self {
            Field::Real => stream.gaussian_real(count).into_iter().map(C64::from).collect(),
            Field::Complex => stream.gaussian_complex(count),
        }
    }
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(format!("unknown field '{other}' (expected real or complex)")),
        }
    }
}

/// Index discovery event of the sparse probe: at grid point `point`, the
/// indices `added` were appended.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discovery {
    pub point: usize,
    pub added: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProbingOperator {
    /// `V` is `N x ell`, scaled by `1/sqrt(c ell)`.
    Full { v: CMatrix, field: Field, seed: u64 },
    /// Raw Gaussian pairs; component `i` is `u_i^T F v_i`.
    Tensorized {
        u: Vec<CVector>,
        v: Vec<CVector>,
        field: Field,
        seed: u64,
    },
    /// Row matrix `v` (`ell x |ind|`) bound to the sorted indices `ind`.
    SparseAdaptive {
        ind: Vec<usize>,
        v: CMatrix,
        log: Vec<Discovery>,
        field: Field,
        seed: u64,
    },
}

impl ProbingOperator {
    pub fn ell(&self) -> usize {
        match self {
            ProbingOperator::Full { v, .. } => v.ncols(),
            ProbingOperator::Tensorized { u, .. } => u.len(),
            ProbingOperator::SparseAdaptive { v, .. } => v.nrows(),
        }
    }

    pub fn field(&self) -> Field {
        match self {
            ProbingOperator::Full { field, .. }
            | ProbingOperator::Tensorized { field, .. }
            | ProbingOperator::SparseAdaptive { field, .. } => *field,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ProbingOperator::Full { seed, .. }
            | ProbingOperator::Tensorized { seed, .. }
            | ProbingOperator::SparseAdaptive { seed, .. } => *seed,
        }
    }

    /// Applies the probe to a full vector `f(z)`.
    pub fn apply_vector(&self, fz: &CVector, shape: Option<(usize, usize)>) -> Result<CVector> {
        match self {
            ProbingOperator::Full { v, .. } => {
                if v.nrows() != fz.len() {
                    return Err(invalid(format!("probe has {} rows, vector has length {}", v.nrows(), fz.len())));
                }
                Ok(v.tr_mul(fz))
            }
            ProbingOperator::Tensorized { u, v, .. } => {
                let (m, n) = shape.ok_or_else(|| invalid("tensorized probing needs a matrix shape"))?;
                if m * n != fz.len() || u[0].len() != m || v[0].len() != n {
                    return Err(invalid(format!(
                        "tensorized probe is {}x{}, function is {m}x{n}",
                        u[0].len(),
                        v[0].len()
                    )));
                }
                let f = CMatrix::from_column_slice(m, n, fz.as_slice());
                Ok(CVector::from_iterator(
                    u.len(),
                    u.iter().zip(v).map(|(ui, vi)| ui.dot(&(&f * vi))),
                ))
            }
            ProbingOperator::SparseAdaptive { ind, v, .. } => {
                let mut restricted = CVector::zeros(ind.len());
                let mut pos = 0;
                for (k, x) in fz.iter().enumerate() {
                    if *x == C64::new(0.0, 0.0) {
                        continue;
                    }
                    while pos < ind.len() && ind[pos] < k {
                        pos += 1;
                    }
                    if pos == ind.len() || ind[pos] != k {
                        return Err(invalid(format!("nonzero index {k} was not discovered by the sparse probe")));
                    }
                    restricted[pos] = *x;
                }
                Ok(v * restricted)
            }
        }
    }
}

pub fn draw_full_probe(n: usize, ell: usize, field: Field, seed: u64) -> Result<ProbingOperator> {
    if n == 0 || ell == 0 {
        return Err(invalid("probe dimensions must be positive"));
    }
    let mut stream = SeededStream::new(seed);
    // column-major draw order
    let raw = field.draw(&mut stream, n * ell);
    let scale = 1.0 / (field.c() * ell as f64).sqrt();
    let v = CMatrix::from_vec(n, ell, raw) * C64::from(scale);
    Ok(ProbingOperator::Full { v, field, seed })
}

pub fn draw_tensor_probe(m: usize, n: usize, ell: usize, field: Field, seed: u64) -> Result<ProbingOperator> {
    if m == 0 || n == 0 || ell == 0 {
        return Err(invalid("probe dimensions must be positive"));
    }
    let mut stream = SeededStream::new(seed);
    let mut u = Vec::with_capacity(ell);
    let mut v = Vec::with_capacity(ell);
    for _ in 0..ell {
        u.push(CVector::from_vec(field.draw(&mut stream, m)));
        v.push(CVector::from_vec(field.draw(&mut stream, n)));
    }
    Ok(ProbingOperator::Tensorized { u, v, field, seed })
}

/// Sketched value `g(z)` of `f` at one point.
pub fn apply_probe(op: &ProbingOperator, f: &VectorFunction, z: C64) -> Result<CVector> {
    op.apply_vector(&f.eval(z)?, f.matrix_shape())
}

/// Sketched coefficients `a_i` of a split form, so that
/// `g(z) = sum_i f_i(z) a_i`.
#[derive(Clone, Debug)]
pub struct SketchedSplit {
    pub split: SplitForm,
    /// `ell x s`, one column per term
    pub coeffs: CMatrix,
}

impl SketchedSplit {
    pub fn ell(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn eval(&self, z: C64) -> Result<CVector> {
        let s = self.split.scalar_values(z)?;
        let mut out = CVector::zeros(self.coeffs.nrows());
        for (k, fk) in s.iter().enumerate() {
            out.axpy(*fk, &self.coeffs.column(k), C64::from(1.0));
        }
        Ok(out)
    }

    /// Surrogate samples on a list of points, `ell x |points|`.
    pub fn sample(&self, points: &[C64]) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.ell(), points.len());
        for (k, z) in points.iter().enumerate() {
            out.set_column(k, &self.eval(*z)?);
        }
        Ok(out)
    }
}

pub fn precompute_split_sketch(op: &ProbingOperator, sf: &SplitForm) -> Result<SketchedSplit> {
    let ell = op.ell();
    let (m, n) = sf.shape();
    let mut coeffs = CMatrix::zeros(ell, sf.len());
    for (k, term) in sf.terms().iter().enumerate() {
        let col: CVector = match (op, &term.coeff) {
            (ProbingOperator::Full { v, .. }, Coefficient::Sparse { .. }) => {
                if v.nrows() != m * n {
                    return Err(invalid("probe does not match the split-form shape"));
                }
                let mut acc = CVector::zeros(ell);
                for (idx, a) in term.coeff.vec_entries() {
                    acc.axpy(a, &v.row(idx).transpose(), C64::from(1.0));
                }
                acc
            }
            (ProbingOperator::Full { .. }, Coefficient::Dense(a)) => {
                op.apply_vector(&CVector::from_column_slice(a.as_slice()), Some((m, n)))?
            }
            (ProbingOperator::Tensorized { u, v, .. }, coeff) => {
                if u[0].len() != m || v[0].len() != n {
                    return Err(invalid("probe does not match the split-form shape"));
                }
                let a = coeff.to_dense();
                CVector::from_iterator(ell, u.iter().zip(v).map(|(ui, vi)| ui.dot(&(&a * vi))))
            }
            (ProbingOperator::SparseAdaptive { .. }, _) => {
                return Err(invalid("split precomputation is not defined for the sparse probe"));
            }
        };
        coeffs.set_column(k, &col);
    }
    Ok(SketchedSplit {
        split: sf.clone(),
        coeffs,
    })
}

/// Sparse adaptive probing of `f` over `points`: columns of the probe are
/// drawn lazily as new nonzero indices appear, then kept sorted by index.
pub fn sparse_probe(
    f: &VectorFunction,
    points: &[C64],
    ell: usize,
    field: Field,
    seed: u64,
) -> Result<(CMatrix, ProbingOperator)> {
    if ell == 0 {
        return Err(invalid("ell must be positive"));
    }
    let mut stream = SeededStream::new(seed);
    let mut vals = CMatrix::zeros(ell, points.len());
    let mut ind: Vec<usize> = Vec::new();
    // columns of V, bound to `ind`
    let mut cols: Vec<Vec<C64>> = Vec::new();
    let mut log = Vec::new();
    for (p, z) in points.iter().enumerate() {
        let nz = f.eval_nonzeros(*z)?;
        let mut added: Vec<usize> = nz
            .iter()
            .map(|(k, _)| *k)
            .filter(|k| ind.binary_search(k).is_err())
            .collect();
        if !added.is_empty() {
            added.sort_unstable();
            let mut pairs: Vec<(usize, Vec<C64>)> = ind.drain(..).zip(cols.drain(..)).collect();
            for k in &added {
                pairs.push((*k, field.draw(&mut stream, ell)));
            }
            pairs.sort_by_key(|(k, _)| *k);
            for (k, c) in pairs {
                ind.push(k);
                cols.push(c);
            }
            log.push(Discovery { point: p, added });
        }
        // vals(:, p) = V * F(z)(ind), accumulated in ascending index order
        let mut pos = 0;
        let mut out = vec![C64::new(0.0, 0.0); ell];
        for (k, x) in &nz {
            while ind[pos] < *k {
                pos += 1;
            }
            for (o, vr) in out.iter_mut().zip(&cols[pos]) {
                *o += *vr * *x;
            }
        }
        vals.set_column(p, &CVector::from_vec(out));
    }
    let mut v = CMatrix::zeros(ell, ind.len());
    for (j, c) in cols.iter().enumerate() {
        for (r, x) in c.iter().enumerate() {
            v[(r, j)] = *x;
        }
    }
    Ok((
        vals,
        ProbingOperator::SparseAdaptive {
            ind,
            v,
            log,
            field,
            seed,
        },
    ))
}
