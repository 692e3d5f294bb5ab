//! Set-valued AAA: greedy support selection with one shared denominator for
//! all components of the sampled data.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{smallest_right_singular_vector, RowReducer};
use crate::model::{BarycentricModel, TargetGrid};
use crate::{CMatrix, CVector, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AaaConfig {
    pub reltol: f64,
    pub dmax: usize,
    /// Scale each component to unit max-modulus on the grid before fitting.
    pub scale_components: bool,
}

impl Default for AaaConfig {
    fn default() -> Self {
        Self {
            reltol: 1e-12,
            dmax: 100,
            scale_components: false,
        }
    }
}

impl AaaConfig {
    pub fn new(reltol: f64, dmax: usize) -> Self {
        Self {
            reltol,
            dmax,
            scale_components: false,
        }
    }

    pub fn with_scaling(mut self, on: bool) -> Self {
        self.scale_components = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reltol > 0.0) || !self.reltol.is_finite() {
            return Err(invalid(format!("reltol must be positive, got {}", self.reltol)));
        }
        if self.dmax < 1 {
            return Err(invalid("dmax must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Tolerance,
    Dmax,
    /// ran out of grid points before meeting the tolerance
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub degree: usize,
    pub support_index: usize,
    /// residual at the chosen point just before it became a support
    pub selected_residual: f64,
    /// largest residual over the grid after the update
    pub max_residual: f64,
    pub metric: f64,
    /// wall time since the start of the run
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AaaReport {
    pub records: Vec<IterationRecord>,
    pub degree: usize,
    pub terminated_by: Termination,
}

impl AaaReport {
    pub fn support_indices(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.support_index).collect()
    }

    pub fn final_metric(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.metric)
    }
}

fn check_samples(samples: &CMatrix, grid: &TargetGrid) -> Result<()> {
    if samples.ncols() != grid.len() {
        return Err(invalid(format!(
            "samples have {} columns but the grid has {} points",
            samples.ncols(),
            grid.len()
        )));
    }
    if samples.nrows() == 0 {
        return Err(invalid("samples have no components"));
    }
    if samples.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(invalid("samples contain non-finite values"));
    }
    Ok(())
}

fn remaining_indices(m: usize, support_indices: &[usize]) -> Vec<usize> {
    let mut is_support = vec![false; m];
    for &k in support_indices {
        is_support[k] = true;
    }
    (0..m).filter(|k| !is_support[*k]).collect()
}

fn loewner_rows(
    samples: &CMatrix,
    points: &[C64],
    support_indices: &[usize],
    mut push: impl FnMut(&[C64]),
) {
    let cols = support_indices.len();
    let mut cauchy = vec![C64::new(0.0, 0.0); cols];
    let mut row = vec![C64::new(0.0, 0.0); cols];
    for p in remaining_indices(points.len(), support_indices) {
        for (c, &s) in cauchy.iter_mut().zip(support_indices) {
            *c = (points[p] - points[s]).inv();
        }
        for i in 0..samples.nrows() {
            let g = samples[(i, p)];
            for ((r, c), &s) in row.iter_mut().zip(&cauchy).zip(support_indices) {
                *r = (g - samples[(i, s)]) * c;
            }
            push(&row);
        }
    }
}

/// Block Löwner matrix: rows ordered point-major (non-support grid points in
/// grid order), then component; columns follow the support order.
pub fn build_block_loewner(samples: &CMatrix, grid: &TargetGrid, support_indices: &[usize]) -> Result<CMatrix> {
    check_samples(samples, grid)?;
    check_supports(grid.len(), support_indices)?;
    let remaining = grid.len() - support_indices.len();
    let mut out = CMatrix::zeros(samples.nrows() * remaining, support_indices.len());
    let mut k = 0;
    loewner_rows(samples, grid.points(), support_indices, |row| {
        for (j, v) in row.iter().enumerate() {
            out[(k, j)] = *v;
        }
        k += 1;
    });
    Ok(out)
}

fn check_supports(m: usize, support_indices: &[usize]) -> Result<()> {
    let mut seen = vec![false; m];
    for &k in support_indices {
        if k >= m {
            return Err(invalid(format!("support index {k} out of range")));
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(invalid(format!("support index {k} repeated")));
        }
    }
    if m <= support_indices.len() {
        return Err(Error::GridExhausted {
            remaining: m - support_indices.len(),
            degree: support_indices.len().saturating_sub(1),
        });
    }
    Ok(())
}

/// Index of the largest residual, lowest index on ties. Inactive points
/// should carry `-inf`.
pub fn greedy_select(residuals: &[f64]) -> Result<usize> {
    if residuals.is_empty() {
        return Err(invalid("no residuals to select from"));
    }
    let mut best = 0;
    for (k, r) in residuals.iter().enumerate() {
        if *r > residuals[best] {
            best = k;
        }
    }
    Ok(best)
}

/// Weights minimizing the block Löwner least-squares problem, computed
/// from a streamed QR reduction.
fn loewner_weights(samples: &CMatrix, points: &[C64], support_indices: &[usize]) -> Result<CVector> {
    let mut red = RowReducer::new(support_indices.len());
    loewner_rows(samples, points, support_indices, |row| red.push_row(row));
    let r = red.finish();
    Ok(smallest_right_singular_vector(&r)?.0)
}

/// Fills `res[p]` with `max_i |g_i(z_p) - r_i(z_p)|`, zero at supports.
fn update_residuals(
    samples: &CMatrix,
    points: &[C64],
    support_indices: &[usize],
    weights: &CVector,
    is_support: &[bool],
    res: &mut [f64],
) {
    let l = samples.nrows();
    let d1 = support_indices.len();
    let mut cauchy = vec![C64::new(0.0, 0.0); d1];
    let mut num = vec![C64::new(0.0, 0.0); l];
    for p in 0..points.len() {
        if is_support[p] {
            res[p] = 0.0;
            continue;
        }
        let mut den = C64::new(0.0, 0.0);
        for (j, &s) in support_indices.iter().enumerate() {
            cauchy[j] = weights[j] / (points[p] - points[s]);
            den += cauchy[j];
        }
        if den == C64::new(0.0, 0.0) {
            res[p] = f64::INFINITY;
            continue;
        }
        num.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        for (j, &s) in support_indices.iter().enumerate() {
            let c = cauchy[j];
            let col = samples.column(s);
            for (n, v) in num.iter_mut().zip(col.iter()) {
                *n += c * v;
            }
        }
        let col = samples.column(p);
        res[p] = num
            .iter()
            .zip(col.iter())
            .map(|(n, g)| (g - n / den).norm())
            .fold(0.0, f64::max);
    }
}

/// Set-valued AAA on samples `g_i(z)` (rows are components, columns grid
/// points). Returns the model over the sampled components and the
/// iteration history.
pub fn run_set_valued_aaa(samples: &CMatrix, grid: &TargetGrid, cfg: &AaaConfig) -> Result<(BarycentricModel, AaaReport)> {
    cfg.validate()?;
    check_samples(samples, grid)?;
    let m = grid.len();
    if m < 2 {
        return Err(invalid("set-valued AAA needs at least two grid points"));
    }
    let start = Instant::now();
    let points = grid.points();

    let scaled;
    let work = if cfg.scale_components {
        let mut s = samples.clone();
        for mut row in s.row_iter_mut() {
            let nrm = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if nrm > 0.0 {
                row /= C64::from(nrm);
            }
        }
        scaled = s;
        &scaled
    } else {
        samples
    };
    let scale = work.iter().map(|v| v.norm()).fold(0.0, f64::max);

    let l = work.nrows();
    let mean: Vec<C64> = (0..l).map(|i| work.row(i).sum() / C64::from(m as f64)).collect();
    let mut res: Vec<f64> = (0..m)
        .map(|p| (0..l).map(|i| (work[(i, p)] - mean[i]).norm()).fold(0.0, f64::max))
        .collect();

    let mut is_support = vec![false; m];
    let mut support_indices: Vec<usize> = Vec::new();
    let mut records = Vec::new();
    let mut weights;
    let terminated_by = loop {
        let masked: Vec<f64> = res
            .iter()
            .zip(&is_support)
            .map(|(r, s)| if *s { f64::NEG_INFINITY } else { *r })
            .collect();
        let pick = greedy_select(&masked)?;
        let selected_residual = res[pick];
        is_support[pick] = true;
        support_indices.push(pick);

        weights = loewner_weights(work, points, &support_indices)?;
        update_residuals(work, points, &support_indices, &weights, &is_support, &mut res);
        let max_residual = res.iter().copied().fold(0.0, f64::max);
        let metric = if scale > 0.0 { max_residual / scale } else { 0.0 };
        let degree = support_indices.len() - 1;
        records.push(IterationRecord {
            degree,
            support_index: pick,
            selected_residual,
            max_residual,
            metric,
            seconds: start.elapsed().as_secs_f64(),
        });
        if metric <= cfg.reltol {
            break Termination::Tolerance;
        }
        if degree >= cfg.dmax {
            break Termination::Dmax;
        }
        // the next degree needs at least one point left off the supports
        if m <= support_indices.len() + 1 {
            break Termination::Exhausted;
        }
    };

    let supports: Vec<C64> = support_indices.iter().map(|&k| points[k]).collect();
    let values = samples.select_columns(&support_indices);
    let model = BarycentricModel::new(supports, weights, values)?;
    let degree = model.degree();
    Ok((
        model,
        AaaReport {
            records,
            degree,
            terminated_by,
        },
    ))
}
