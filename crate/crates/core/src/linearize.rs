//! Linear pencils whose finite eigenvalues are those of a barycentric
//! rational matrix function, and a root finder for scalar models used to
//! check them.

use crate::error::{invalid, Error, Result};
use crate::kernel::generalized_eigenvalues;
use crate::model::{devectorize, BarycentricModel, DomainSpec};
use crate::{CMatrix, C64};

/// Weights below this modulus are treated as zero.
pub const WEIGHT_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct PencilPair {
    pub a: CMatrix,
    pub b: CMatrix,
    /// block size
    pub n: usize,
    /// `beta[j-1], h[j-1], k[j-1]` belong to index `j = 1..=d`
    pub beta: Vec<f64>,
    pub h: Vec<C64>,
    pub k: Vec<C64>,
}

impl PencilPair {
    pub fn degree(&self) -> usize {
        self.beta.len()
    }
}

/// Pencil `A - z B` of size `n d` for a model with `n x n` values.
///
/// Block row 0 combines the values `F(z_0), ..., F(z_d)`; block row `j`
/// couples neighbours `j - 1` and `j` so that a kernel vector has blocks
/// proportional to `w_j / (z - z_j)`.
pub fn build_pencil(model: &BarycentricModel, n: usize, beta: Option<&[f64]>) -> Result<PencilPair> {
    let d = model.degree();
    if d < 2 {
        return Err(Error::UnsupportedDegree(d));
    }
    if n == 0 || model.output_len() != n * n {
        return Err(invalid(format!(
            "model values have length {}, expected {n}x{n}",
            model.output_len()
        )));
    }
    let beta: Vec<f64> = match beta {
        Some(b) if b.len() != d => {
            return Err(invalid(format!("need {d} beta parameters, got {}", b.len())));
        }
        Some(b) => {
            if b.iter().any(|x| *x == 0.0 || !x.is_finite()) {
                return Err(invalid("beta parameters must be finite and nonzero"));
            }
            b.to_vec()
        }
        None => vec![1.0; d],
    };
    let w = model.weights();
    if let Some((index, x)) = w.iter().enumerate().find(|(_, x)| x.norm() <= WEIGHT_TOL) {
        return Err(Error::WeightDegeneracy {
            index,
            magnitude: x.norm(),
        });
    }
    let z = model.supports();
    let mut h = Vec::with_capacity(d);
    let mut k = Vec::with_capacity(d);
    for j in 1..=d {
        let kj = -w[j - 1] / (w[j] * beta[j - 1]);
        k.push(kj);
        h.push(z[j] * kj);
    }

    let size = n * d;
    let mut a = CMatrix::zeros(size, size);
    let mut b = CMatrix::zeros(size, size);
    let f = |j: usize| devectorize(&model.values().column(j).into_owned(), n, n);
    let (hd, kd, bd) = (h[d - 1], k[d - 1], beta[d - 1]);
    for j in 0..d {
        let fj = f(j);
        a.view_mut((0, j * n), (n, n)).copy_from(&(&fj * hd));
        b.view_mut((0, j * n), (n, n)).copy_from(&(&fj * kd));
    }
    let fd = f(d);
    let last = (d - 1) * n;
    {
        let mut blk = a.view_mut((0, last), (n, n));
        blk -= &fd * (z[d - 1] / bd);
    }
    {
        let mut blk = b.view_mut((0, last), (n, n));
        blk -= &fd / C64::from(bd);
    }
    for j in 1..d {
        let (r, cprev, cdiag) = (j * n, (j - 1) * n, j * n);
        let diag_a = h[j - 1] * beta[j - 1];
        let diag_b = k[j - 1] * beta[j - 1];
        for i in 0..n {
            a[(r + i, cprev + i)] = z[j - 1];
            b[(r + i, cprev + i)] = C64::from(1.0);
            a[(r + i, cdiag + i)] = diag_a;
            b[(r + i, cdiag + i)] = diag_b;
        }
    }
    Ok(PencilPair { a, b, n, beta, h, k })
}

/// Finite eigenvalues of the pencil inside the closed region (membership
/// tolerance `1e-8` relative to the region size).
pub fn pencil_eigenvalues(p: &PencilPair, region: &DomainSpec) -> Result<Vec<C64>> {
    let tol = 1e-8 * region.scale();
    let mut out: Vec<C64> = generalized_eigenvalues(&p.a, &p.b)?
        .into_iter()
        .filter(|z| region.contains(*z, tol))
        .collect();
    out.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleZero {
    pub z: C64,
    /// `|r(z)|` at the returned point
    pub residual: f64,
    pub converged: bool,
}

/// `N(z) / N'(z)` for the barycentric numerator, written in terms of
/// `S(z) = sum w_i v_i / (z - z_i)`.
fn newton_step(supports: &[C64], wv: &[C64], z: C64) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    let mut ds = C64::new(0.0, 0.0);
    let mut inv_sum = C64::new(0.0, 0.0);
    for (zk, c) in supports.iter().zip(wv) {
        let t = (z - zk).inv();
        s += c * t;
        ds -= c * t * t;
        inv_sum += t;
    }
    s / (s * inv_sum + ds)
}

fn newton(model: &BarycentricModel, wv: &[C64], start: C64, scale: f64) -> OracleZero {
    let supports = model.supports();
    let mut z = start;
    let mut converged = false;
    for _ in 0..100 {
        if supports.contains(&z) {
            z += C64::new(1e-10 * scale, 0.0);
        }
        let step = newton_step(supports, wv, z);
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-12 * z.norm().max(scale) {
            converged = true;
            break;
        }
    }
    let residual = model.eval_scalar(z).map_or(f64::INFINITY, |v| v.norm());
    OracleZero { z, residual, converged }
}

fn sample_points(region: &DomainSpec) -> Result<(Vec<C64>, usize, usize)> {
    const PER_UNIT: f64 = 1000.0;
    match region {
        DomainSpec::Interval { endpoints: [a, b] } => {
            let m = (((b - a).abs() * PER_UNIT).ceil() as usize).max(2) + 1;
            let pts = (0..m)
                .map(|i| C64::from(a + (b - a) * i as f64 / (m - 1) as f64))
                .collect();
            Ok((pts, m, 1))
        }
        DomainSpec::Disc { center, radius } | DomainSpec::HalfDisc { center, radius } => {
            let m = ((2.0 * radius * PER_UNIT).ceil() as usize).max(2) + 1;
            let h = 2.0 * radius / (m - 1) as f64;
            let mut pts = Vec::with_capacity(m * m);
            for iy in 0..m {
                for ix in 0..m {
                    pts.push(center + C64::new(-radius + h * ix as f64, -radius + h * iy as f64));
                }
            }
            Ok((pts, m, m))
        }
        DomainSpec::Explicit { .. } => Err(invalid("zero search needs an interval or disc region")),
    }
}

/// Zeros of a scalar model in a region: local minima of `|r|` on a fine
/// sampling grid, refined by Newton's method on the barycentric numerator.
pub fn rational_zeros_oracle(model: &BarycentricModel, region: &DomainSpec) -> Result<Vec<OracleZero>> {
    if model.output_len() != 1 {
        return Err(invalid("zero oracle needs a scalar model"));
    }
    region.validate()?;
    let wv: Vec<C64> = model
        .weights()
        .iter()
        .zip(model.values().iter())
        .map(|(w, v)| w * v)
        .collect();
    let (pts, nx, ny) = sample_points(region)?;
    let mag: Vec<f64> = pts
        .iter()
        .map(|z| model.eval_scalar(*z).map_or(f64::INFINITY, |v| v.norm()))
        .collect();
    let idx = |ix: usize, iy: usize| iy * nx + ix;
    let mut starts = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            let here = mag[idx(ix, iy)];
            let mut is_min = true;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                    if (dx, dy) == (0, 0) || jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                        continue;
                    }
                    let other = mag[idx(jx as usize, jy as usize)];
                    // strict on one side so plateaus yield one candidate
                    if other < here || (other == here && (dy, dx) < (0, 0)) {
                        is_min = false;
                    }
                }
            }
            if is_min {
                starts.push(pts[idx(ix, iy)]);
            }
        }
    }
    let scale = region.scale();
    let tol = 1e-8 * scale;
    let local = model.values().iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let mut zeros: Vec<OracleZero> = Vec::new();
    for s in starts {
        let zero = newton(model, &wv, s, scale);
        if !region.contains(zero.z, tol) {
            continue;
        }
        if zeros.iter().any(|q| (q.z - zero.z).norm() <= tol) {
            continue;
        }
        // minima that do not approach a zero are discarded
        if zero.residual > 1e-6 * local {
            continue;
        }
        zeros.push(zero);
    }
    zeros.sort_by(|x, y| x.z.re.total_cmp(&y.z.re).then(x.z.im.total_cmp(&y.z.im)));
    Ok(zeros)
}
