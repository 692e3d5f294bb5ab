//! Stable rank, probabilistic bounds for sketched error estimates, and a
//! Monte Carlo harness that measures the corresponding success rates.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{derive_seed, regularized_lower_gamma, spectral_norm, RowReducer};
use crate::model::{BarycentricModel, TargetGrid, VectorFunction};
use crate::sketch::{draw_full_probe, Field, ProbingOperator};
use crate::{CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub tau: f64,
    pub ell: usize,
    pub rho: f64,
    pub field: Field,
}

impl BoundQuery {
    pub fn new(tau: f64, ell: usize, rho: f64, field: Field) -> Result<Self> {
        let q = Self { tau, ell, rho, field };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 1.0) {
            return Err(invalid(format!("tau must exceed 1, got {}", self.tau)));
        }
        if self.ell == 0 {
            return Err(invalid("ell must be at least 1"));
        }
        if !(self.rho >= 1.0) || !self.rho.is_finite() {
            return Err(invalid(format!("stable rank must be at least 1, got {}", self.rho)));
        }
        Ok(())
    }

    fn c_ell(&self) -> f64 {
        self.field.c() * self.ell as f64
    }
}

/// Squared Frobenius norm over squared spectral norm.
pub fn stable_rank(h: &CMatrix) -> Result<f64> {
    let fro2 = h.norm_squared();
    if fro2 == 0.0 {
        return Err(Error::UndefinedRank);
    }
    let (rows, cols) = h.shape();
    let spec = if rows > 4 * cols && rows > 1000 {
        let mut red = RowReducer::new(cols);
        let mut buf = vec![C64::new(0.0, 0.0); cols];
        for i in 0..rows {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = h[(i, j)];
            }
            red.push_row(&buf);
        }
        spectral_norm(&red.finish())
    } else {
        spectral_norm(h)
    };
    Ok((fro2 / (spec * spec)).max(1.0))
}

/// Bound on the probability that the sketched error underestimates the
/// full error by more than a factor `tau`.
pub fn bound_underestimate(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    let s = q.c_ell() / 2.0;
    regularized_lower_gamma(s, s * q.rho / (q.tau * q.tau))
}

/// Bound on the probability that the sketched error overestimates the
/// full error by more than a factor `tau`.
pub fn bound_overestimate(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    let x = q.c_ell() / 2.0 * q.rho * (q.tau - 1.0).powi(2);
    Ok((-x).exp().min(1.0))
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 1.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("tau must exceed 1, got {tau}")))
    }
}

/// Single tensorized probe: underestimation bound (event carrying the
/// extra square root of the stable rank).
pub fn tensor_bound_underestimate(tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let v = 2.0 / std::f64::consts::PI * (2.0 + (1.0 + 2.0 * tau).ln()) / tau;
    Ok(v.min(1.0))
}

/// Single tensorized probe: overestimation bound.
pub fn tensor_bound_overestimate(tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(((2.0 * tau).sqrt() * (2.0 - tau).exp()).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub tau: f64,
    pub ell: usize,
    pub rho: f64,
    pub n_samples: usize,
    pub p_under: f64,
    pub p_over: f64,
    pub p_both: f64,
    pub bound_under: f64,
    pub bound_over: f64,
    pub bound_both: f64,
}

impl EmpiricalStats {
    /// `3 sqrt(p (1 - p) / n)`.
    pub fn slack(&self, p: f64) -> f64 {
        3.0 * (p * (1.0 - p) / self.n_samples as f64).sqrt()
    }

    /// Every empirical rate is at least its bound minus Monte Carlo slack.
    pub fn consistent(&self) -> bool {
        self.p_under >= self.bound_under - self.slack(self.bound_under)
            && self.p_over >= self.bound_over - self.slack(self.bound_over)
            && self.p_both >= self.bound_both - self.slack(self.bound_both)
    }
}

/// Residual samples `f(z) - R(z)` on the grid, one column per point.
pub fn residual_matrix(f: &VectorFunction, model: &BarycentricModel, grid: &TargetGrid) -> Result<CMatrix> {
    if model.output_len() != f.dim() {
        return Err(invalid("model values must have the full dimension"));
    }
    let mut h = CMatrix::zeros(f.dim(), grid.len());
    for (k, z) in grid.points().iter().enumerate() {
        h.set_column(k, &(f.eval(*z)? - model.eval(*z)?));
    }
    Ok(h)
}

/// Squared sketched norms `||V^T H||_F^2` for `n_samples` independent
/// probes of width `ell`. Probe `k` is drawn from a seed derived from
/// `(seed, ell, k)`.
fn sketched_norms(h: &CMatrix, gram: Option<&CMatrix>, ell: usize, n_samples: usize, seed: u64, field: Field) -> Result<Vec<f64>> {
    let base = derive_seed(seed, ell as u64);
    (0..n_samples)
        .map(|k| {
            let op = draw_full_probe(h.nrows(), ell, field, derive_seed(base, k as u64))?;
            let ProbingOperator::Full { v, .. } = op else { unreachable!() };
            Ok(match gram {
                // sum_i v_i^T G conj(v_i)
                Some(g) => v
                    .column_iter()
                    .map(|vi| {
                        let gv = g * vi.map(|x| x.conj());
                        vi.dot(&gv).re
                    })
                    .sum::<f64>()
                    .max(0.0),
                None => v.tr_mul(h).norm_squared(),
            })
        })
        .collect()
}

/// Monte Carlo success rates for every `(tau, ell)` pair, rows ordered by
/// `ell` then `tau`.
pub fn empirical_success_table(
    h: &CMatrix,
    ells: &[usize],
    taus: &[f64],
    n_samples: usize,
    seed: u64,
    field: Field,
) -> Result<Vec<EmpiricalStats>> {
    if n_samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    for &tau in taus {
        check_tau(tau)?;
    }
    let ex2 = h.norm_squared();
    if ex2 == 0.0 {
        return Err(Error::DegenerateResidual);
    }
    let ex = ex2.sqrt();
    let rho = stable_rank(h)?;
    let gram = (h.nrows() < h.ncols()).then(|| h * h.adjoint());
    let mut rows = Vec::with_capacity(ells.len() * taus.len());
    for &ell in ells {
        let est: Vec<f64> = sketched_norms(h, gram.as_ref(), ell, n_samples, seed, field)?
            .into_iter()
            .map(f64::sqrt)
            .collect();
        for &tau in taus {
            let (mut under, mut over, mut both) = (0usize, 0usize, 0usize);
            for e in &est {
                let u = *e > ex / tau;
                let o = *e < tau * ex;
                under += u as usize;
                over += o as usize;
                both += (u && o) as usize;
            }
            let q = BoundQuery::new(tau, ell, rho, field)?;
            let bu = 1.0 - bound_underestimate(&q)?;
            let bo = 1.0 - bound_overestimate(&q)?;
            let n = n_samples as f64;
            rows.push(EmpiricalStats {
                tau,
                ell,
                rho,
                n_samples,
                p_under: under as f64 / n,
                p_over: over as f64 / n,
                p_both: both as f64 / n,
                bound_under: bu,
                bound_over: bo,
                bound_both: (bu + bo - 1.0).max(0.0),
            });
        }
    }
    Ok(rows)
}

/// Success rates of the sketched error estimate for a fixed approximant
/// built independently of the probes.
#[allow(clippy::too_many_arguments)]
pub fn empirical_success(
    f: &VectorFunction,
    grid: &TargetGrid,
    fixed_model: &BarycentricModel,
    ell: usize,
    tau: f64,
    n_samples: usize,
    seed: u64,
    field: Field,
) -> Result<EmpiricalStats> {
    let h = residual_matrix(f, fixed_model, grid)?;
    let mut rows = empirical_success_table(&h, &[ell], &[tau], n_samples, seed, field)?;
    Ok(rows.remove(0))
}
