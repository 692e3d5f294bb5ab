use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::{CMatrix, CVector, C64};

/// Right singular vector belonging to the smallest singular value of a
/// tall matrix, together with that singular value.
pub fn smallest_right_singular_vector(m: &CMatrix) -> Result<(CVector, f64)> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Err(invalid("matrix has no columns"));
    }
    if rows < cols {
        return Err(invalid(format!(
            "need rows >= cols for a right singular vector, got {rows}x{cols}"
        )));
    }
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let svd = m.clone().svd_unordered(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let (idx, sigma) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, s)| if s < best.1 { (i, s) } else { best });
    // rows of v_t are conjugated right singular vectors
    let mut w: CVector = v_t.row(idx).adjoint();
    let norm = w.norm();
    if norm > 0.0 {
        w /= C64::from(norm);
    }
    Ok((w, sigma.max(0.0)))
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd_unordered(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Streams the rows of a tall matrix into an upper-triangular factor `R`
/// with `M^H M = R^H R`, folding blocks of rows through Householder QR.
///
/// Memory stays at `O(chunk * cols)` regardless of the number of rows.
pub struct RowReducer {
    cols: usize,
    chunk: usize,
    r: Option<CMatrix>,
    pending: Vec<C64>,
    rows_seen: usize,
}

impl RowReducer {
    pub fn new(cols: usize) -> Self {
        let chunk = (16 * cols).max(256);
        Self {
            cols,
            chunk,
            r: None,
            pending: Vec::with_capacity(chunk * cols),
            rows_seen: 0,
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    pub fn push_row(&mut self, row: &[C64]) {
        debug_assert_eq!(row.len(), self.cols);
        self.pending.extend_from_slice(row);
        self.rows_seen += 1;
        if self.pending.len() >= self.chunk * self.cols {
            self.fold();
        }
    }

    fn fold(&mut self) {
        if self.pending.is_empty() {
            return;
        }
        let new_rows = self.pending.len() / self.cols;
        let top = self.r.as_ref().map_or(0, |r| r.nrows());
        let mut stacked = CMatrix::zeros(top + new_rows, self.cols);
        if let Some(r) = &self.r {
            stacked.view_mut((0, 0), (top, self.cols)).copy_from(r);
        }
        for (i, row) in self.pending.chunks_exact(self.cols).enumerate() {
            for (j, v) in row.iter().enumerate() {
                stacked[(top + i, j)] = *v;
            }
        }
        self.pending.clear();
        self.r = Some(stacked.qr().r());
    }

    /// Square `cols x cols` triangular factor (zero-padded when fewer rows
    /// than columns were pushed).
    pub fn finish(mut self) -> CMatrix {
        self.fold();
        let mut out = DMatrix::zeros(self.cols, self.cols);
        if let Some(r) = self.r {
            let k = r.nrows().min(self.cols);
            out.view_mut((0, 0), (k, self.cols)).copy_from(&r.rows(0, k));
        }
        out
    }
}
