use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::{CMatrix, CVector, C64};

pub type ScalarFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;
pub type Evaluator = Arc<dyn Fn(C64) -> Result<CVector> + Send + Sync>;

fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Constant coefficient matrix of one split-form term.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Dense(CMatrix),
    /// Coordinate list; duplicate positions are summed.
    Sparse {
        rows: usize,
        cols: usize,
        entries: Vec<(usize, usize, C64)>,
    },
}

impl Coefficient {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Coefficient::Dense(m) => m.shape(),
            Coefficient::Sparse { rows, cols, .. } => (*rows, *cols),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            Coefficient::Dense(m) => m.clone(),
            Coefficient::Sparse { rows, cols, entries } => {
                let mut m = CMatrix::zeros(*rows, *cols);
                for &(i, j, v) in entries {
                    m[(i, j)] += v;
                }
                m
            }
        }
    }

    /// `(column-major index, value)` pairs of the stored entries.
    pub fn vec_entries(&self) -> Vec<(usize, C64)> {
        match self {
            Coefficient::Dense(m) => m.iter().copied().enumerate().collect(),
            Coefficient::Sparse { rows, entries, .. } => {
                entries.iter().map(|&(i, j, v)| (i + rows * j, v)).collect()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Coefficient::Sparse { rows, cols, entries } = self {
            if let Some(&(i, j, _)) = entries.iter().find(|(i, j, _)| i >= rows || j >= cols) {
                return Err(invalid(format!("sparse entry ({i}, {j}) outside {rows}x{cols}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct SplitTerm {
    pub label: String,
    pub func: ScalarFn,
    pub coeff: Coefficient,
}

impl fmt::Debug for SplitTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SplitTerm")
            .field("label", &self.label)
            .field("shape", &self.coeff.shape())
            .finish()
    }
}

impl SplitTerm {
    pub fn new(label: impl Into<String>, func: impl Fn(C64) -> C64 + Send + Sync + 'static, coeff: Coefficient) -> Self {
        Self {
            label: label.into(),
            func: Arc::new(func),
            coeff,
        }
    }
}

/// `F(z) = sum_i f_i(z) A_i` with scalar functions `f_i` and constant `A_i`.
#[derive(Clone, Debug)]
pub struct SplitForm {
    shape: (usize, usize),
    terms: Vec<SplitTerm>,
}

impl SplitForm {
    pub fn new(shape: (usize, usize), terms: Vec<SplitTerm>) -> Result<Self> {
        for (k, t) in terms.iter().enumerate() {
            if t.coeff.shape() != shape {
                return Err(invalid(format!(
                    "term {k} has shape {:?}, expected {:?}",
                    t.coeff.shape(),
                    shape
                )));
            }
            t.coeff.validate()?;
        }
        Ok(Self { shape, terms })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn terms(&self) -> &[SplitTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn all_sparse(&self) -> bool {
        self.terms.iter().all(|t| matches!(t.coeff, Coefficient::Sparse { .. }))
    }

    /// Values `f_i(z)` of the scalar functions.
    pub fn scalar_values(&self, z: C64) -> Result<Vec<C64>> {
        self.terms
            .iter()
            .enumerate()
            .map(|(term, t)| {
                let v = (t.func)(z);
                if is_finite(v) {
                    Ok(v)
                } else {
                    Err(Error::NonFiniteTerm { term, z })
                }
            })
            .collect()
    }

    pub fn eval(&self, z: C64) -> Result<CMatrix> {
        eval_split(self, z)
    }

    /// Nonzero entries of `vec(F(z))` in ascending index order.
    pub fn eval_nonzeros(&self, z: C64) -> Result<Vec<(usize, C64)>> {
        let scalars = self.scalar_values(z)?;
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for (t, s) in self.terms.iter().zip(&scalars) {
            for (idx, v) in t.coeff.vec_entries() {
                *acc.entry(idx).or_insert(C64::new(0.0, 0.0)) += *s * v;
            }
        }
        Ok(acc.into_iter().filter(|(_, v)| *v != C64::new(0.0, 0.0)).collect())
    }
}

/// Evaluate `sum_i f_i(z) A_i`.
pub fn eval_split(sf: &SplitForm, z: C64) -> Result<CMatrix> {
    let scalars = sf.scalar_values(z)?;
    let (m, n) = sf.shape;
    let mut out = CMatrix::zeros(m, n);
    for (t, s) in sf.terms.iter().zip(scalars) {
        match &t.coeff {
            Coefficient::Dense(a) => {
                for (o, v) in out.iter_mut().zip(a.iter()) {
                    *o += s * *v;
                }
            }
            Coefficient::Sparse { entries, .. } => {
                for &(i, j, v) in entries {
                    out[(i, j)] += s * v;
                }
            }
        }
    }
    Ok(out)
}

/// How the nonzero pattern of `F(z)` behaves across the sampling set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sparsity {
    Dense,
    FixedPattern,
    VariablePattern,
}

/// A function `z -> f(z)` in `C^N`, optionally the vectorization of a matrix
/// function and optionally backed by a split form.
#[derive(Clone)]
pub struct VectorFunction {
    dim: usize,
    matrix_shape: Option<(usize, usize)>,
    evaluator: Evaluator,
    split: Option<Arc<SplitForm>>,
    sparsity: Sparsity,
}

impl fmt::Debug for VectorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFunction")
            .field("dim", &self.dim)
            .field("matrix_shape", &self.matrix_shape)
            .field("split_terms", &self.split.as_ref().map(|s| s.len()))
            .field("sparsity", &self.sparsity)
            .finish()
    }
}

impl VectorFunction {
    pub fn from_fn(dim: usize, f: impl Fn(C64) -> Result<CVector> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            matrix_shape: None,
            evaluator: Arc::new(f),
            split: None,
            sparsity: Sparsity::Dense,
        }
    }

    pub fn from_matrix_fn(
        shape: (usize, usize),
        f: impl Fn(C64) -> Result<CMatrix> + Send + Sync + 'static,
    ) -> Self {
        let evaluator: Evaluator = Arc::new(move |z| f(z).map(|m| vectorize(&m)));
        Self {
            dim: shape.0 * shape.1,
            matrix_shape: Some(shape),
            evaluator,
            split: None,
            sparsity: Sparsity::Dense,
        }
    }

    pub fn from_split(sf: SplitForm) -> Self {
        let shape = sf.shape();
        let sparsity = if sf.all_sparse() && !sf.is_empty() {
            Sparsity::VariablePattern
        } else {
            Sparsity::Dense
        };
        let sf = Arc::new(sf);
        let inner = Arc::clone(&sf);
        let evaluator: Evaluator = Arc::new(move |z| eval_split(&inner, z).map(|m| vectorize(&m)));
        Self {
            dim: shape.0 * shape.1,
            matrix_shape: Some(shape),
            evaluator,
            split: Some(sf),
            sparsity,
        }
    }

    pub fn with_sparsity(mut self, sparsity: Sparsity) -> Self {
        self.sparsity = sparsity;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix_shape(&self) -> Option<(usize, usize)> {
        self.matrix_shape
    }

    pub fn split(&self) -> Option<&SplitForm> {
        self.split.as_deref()
    }

    pub fn sparsity(&self) -> Sparsity {
        self.sparsity
    }

    pub fn eval(&self, z: C64) -> Result<CVector> {
        let v = (self.evaluator)(z)?;
        if v.len() != self.dim {
            return Err(invalid(format!(
                "evaluator returned length {} at z = {z}, expected {}",
                v.len(),
                self.dim
            )));
        }
        if v.iter().any(|x| !is_finite(*x)) {
            return Err(Error::NonFiniteValue { z });
        }
        Ok(v)
    }

    pub fn eval_matrix(&self, z: C64) -> Result<CMatrix> {
        let (m, n) = self
            .matrix_shape
            .ok_or_else(|| invalid("function has no matrix shape"))?;
        Ok(devectorize(&self.eval(z)?, m, n))
    }

    /// Nonzero entries of `f(z)` in ascending index order.
    pub fn eval_nonzeros(&self, z: C64) -> Result<Vec<(usize, C64)>> {
        match &self.split {
            Some(sf) if sf.all_sparse() => sf.eval_nonzeros(z),
            _ => Ok(nonzeros(&self.eval(z)?)),
        }
    }

    /// Samples as an `N x |points|` matrix, one column per point.
    pub fn sample(&self, points: &[C64]) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.dim, points.len());
        for (k, z) in points.iter().enumerate() {
            out.set_column(k, &self.eval(*z)?);
        }
        Ok(out)
    }
}

pub fn nonzeros(v: &CVector) -> Vec<(usize, C64)> {
    v.iter()
        .copied()
        .enumerate()
        .filter(|(_, x)| *x != C64::new(0.0, 0.0))
        .collect()
}

/// Column-major stacking of a matrix.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn devectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    assert_eq!(v.len(), rows * cols, "length does not match shape");
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}
