use crate::error::{invalid, Error, Result};
use crate::model::function::VectorFunction;
use crate::model::grid::TargetGrid;
use crate::{CMatrix, CVector, C64};

/// Rational function in barycentric form
/// `r(z) = sum_i w_i v_i / (z - z_i) / sum_i w_i / (z - z_i)`.
///
/// `values` has one column per support point; its row count is the output
/// length (sketched or full).
#[derive(Clone, Debug, PartialEq)]
pub struct BarycentricModel {
    supports: Vec<C64>,
    weights: CVector,
    values: CMatrix,
}

impl BarycentricModel {
    /// Builds a model, normalizing the weights to unit 2-norm.
    pub fn new(supports: Vec<C64>, weights: CVector, values: CMatrix) -> Result<Self> {
        let n = supports.len();
        if n == 0 {
            return Err(invalid("model needs at least one support point"));
        }
        if weights.len() != n || values.ncols() != n {
            return Err(invalid(format!(
                "{n} supports but {} weights and {} value columns",
                weights.len(),
                values.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if supports[i] == supports[j] {
                    return Err(invalid(format!("support {i} duplicates support {j}")));
                }
            }
        }
        let norm = weights.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("weights must be finite and not all zero"));
        }
        Ok(Self {
            supports,
            weights: weights / C64::from(norm),
            values,
        })
    }

    pub fn degree(&self) -> usize {
        self.supports.len() - 1
    }

    pub fn supports(&self) -> &[C64] {
        &self.supports
    }

    pub fn weights(&self) -> &CVector {
        &self.weights
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    pub fn output_len(&self) -> usize {
        self.values.nrows()
    }

    /// Same supports and weights, new values (e.g. lifting a surrogate).
    pub fn with_values(&self, values: CMatrix) -> Result<Self> {
        if values.ncols() != self.supports.len() {
            return Err(invalid("value columns do not match supports"));
        }
        Ok(Self {
            supports: self.supports.clone(),
            weights: self.weights.clone(),
            values,
        })
    }

    pub fn eval(&self, z: C64) -> Result<CVector> {
        barycentric_quotient(&self.supports, self.weights.as_slice(), &self.values, z)
    }

    /// Scalar value of a model with a single output component.
    pub fn eval_scalar(&self, z: C64) -> Result<C64> {
        if self.output_len() != 1 {
            return Err(invalid("model is not scalar"));
        }
        Ok(self.eval(z)?[0])
    }

    /// Evaluations at many points, one column per point.
    pub fn eval_many(&self, points: &[C64]) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.output_len(), points.len());
        for (k, z) in points.iter().enumerate() {
            out.set_column(k, &self.eval(*z)?);
        }
        Ok(out)
    }
}

/// Barycentric quotient with arbitrary (unnormalized) weights.
pub fn barycentric_quotient(supports: &[C64], weights: &[C64], values: &CMatrix, z: C64) -> Result<CVector> {
    if let Some(k) = supports.iter().position(|s| *s == z) {
        return Ok(values.column(k).into_owned());
    }
    let mut num = CVector::zeros(values.nrows());
    let mut den = C64::new(0.0, 0.0);
    for (k, (s, w)) in supports.iter().zip(weights).enumerate() {
        let c = *w / (z - s);
        den += c;
        num.axpy(c, &values.column(k), C64::from(1.0));
    }
    if den == C64::new(0.0, 0.0) {
        return Err(Error::Pole { z });
    }
    Ok(num / den)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ErrorNorm {
    /// max over points of the largest entry modulus
    #[default]
    EntrywiseMax,
    /// max over points of the 2-norm (Frobenius norm of the matrix)
    Frobenius,
}

fn point_norm(v: impl Iterator<Item = C64>, norm: ErrorNorm) -> f64 {
    match norm {
        ErrorNorm::EntrywiseMax => v.map(|x| x.norm()).fold(0.0, f64::max),
        ErrorNorm::Frobenius => v.map(|x| x.norm_sqr()).sum::<f64>().sqrt(),
    }
}

/// Relative Σ-uniform error from precomputed samples `F(z)` (columns) and
/// approximant values `R(z)` (columns).
pub fn relerr_from_samples(exact: &CMatrix, approx: &CMatrix, norm: ErrorNorm) -> Result<f64> {
    if exact.shape() != approx.shape() {
        return Err(invalid("sample shapes differ"));
    }
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for (e, a) in exact.column_iter().zip(approx.column_iter()) {
        err = err.max(point_norm(e.iter().zip(a.iter()).map(|(x, y)| x - y), norm));
        scale = scale.max(point_norm(e.iter().copied(), norm));
    }
    if scale == 0.0 {
        return Err(Error::ZeroFunction);
    }
    Ok(err / scale)
}

/// Relative Σ-uniform error of a model with full values against `f`,
/// evaluated point by point.
pub fn sigma_uniform_relerr(
    f: &VectorFunction,
    model: &BarycentricModel,
    grid: &TargetGrid,
    norm: ErrorNorm,
) -> Result<f64> {
    if model.output_len() != f.dim() {
        return Err(invalid(format!(
            "model has {} components, function has {}",
            model.output_len(),
            f.dim()
        )));
    }
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for z in grid.points() {
        let fz = f.eval(*z)?;
        let rz = model.eval(*z)?;
        err = err.max(point_norm(fz.iter().zip(rz.iter()).map(|(x, y)| x - y), norm));
        scale = scale.max(point_norm(fz.iter().copied(), norm));
    }
    if scale == 0.0 {
        return Err(Error::ZeroFunction);
    }
    Ok(err / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SeededStream;

    fn c(re: f64) -> C64 {
        C64::from(re)
    }

    fn scalar_model(supports: &[f64], weights: &[f64], values: &[f64]) -> BarycentricModel {
        BarycentricModel::new(
            supports.iter().map(|&x| c(x)).collect(),
            CVector::from_iterator(weights.len(), weights.iter().map(|&x| c(x))),
            CMatrix::from_iterator(1, values.len(), values.iter().map(|&x| c(x))),
        )
        .unwrap()
    }

    #[test]
    fn identity_rational() {
        let s = 0.5f64.sqrt();
        let m = scalar_model(&[0.0, 1.0], &[s, -s], &[0.0, 1.0]);
        assert!((m.eval_scalar(c(0.5)).unwrap() - c(0.5)).norm() < 1e-15);
        assert!((m.eval_scalar(C64::new(3.0, -2.0)).unwrap() - C64::new(3.0, -2.0)).norm() < 1e-14);
    }

    #[test]
    fn support_hit_is_exact() {
        let mut stream = SeededStream::new(3);
        let supports = stream.gaussian_complex(6);
        let weights = CVector::from_vec(stream.gaussian_complex(6));
        let values = CMatrix::from_vec(4, 6, stream.gaussian_complex(24));
        let m = BarycentricModel::new(supports.clone(), weights, values.clone()).unwrap();
        for (k, z) in supports.iter().enumerate() {
            assert_eq!(m.eval(*z).unwrap(), values.column(k).into_owned());
        }
    }

    #[test]
    fn degree_zero_is_constant() {
        let m = scalar_model(&[0.3], &[1.0], &[2.5]);
        for z in [c(-4.0), C64::new(1.0, 7.0), c(0.3)] {
            assert!((m.eval_scalar(z).unwrap() - c(2.5)).norm() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn weight_scaling_invariance() {
        let mut stream = SeededStream::new(8);
        let supports = stream.gaussian_complex(5);
        let weights = stream.gaussian_complex(5);
        let values = CMatrix::from_vec(3, 5, stream.gaussian_complex(15));
        let alpha = C64::new(-2.5, 0.75);
        let scaled: Vec<C64> = weights.iter().map(|w| w * alpha).collect();
        for z in stream.gaussian_complex(10) {
            let a = barycentric_quotient(&supports, &weights, &values, z).unwrap();
            let b = barycentric_quotient(&supports, &scaled, &values, z).unwrap();
            assert!((&a - &b).norm() <= 1e-13 * a.norm());
        }
    }

    #[test]
    fn weights_are_normalized() {
        let m = scalar_model(&[0.0, 1.0, 2.0], &[3.0, 0.0, -4.0], &[1.0, 2.0, 3.0]);
        assert!((m.weights().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_models() {
        let w = CVector::from_element(2, c(1.0));
        let v = CMatrix::zeros(1, 2);
        assert!(BarycentricModel::new(vec![c(1.0), c(1.0)], w.clone(), v.clone()).is_err());
        assert!(BarycentricModel::new(vec![c(1.0), c(2.0)], CVector::zeros(2), v.clone()).is_err());
        assert!(BarycentricModel::new(vec![c(1.0)], w, v).is_err());
    }

    #[test]
    fn pole_is_reported() {
        // weights (1, 1) at supports (-1, 1) give a zero denominator at 0
        let m = scalar_model(&[-1.0, 1.0], &[1.0, 1.0], &[1.0, 2.0]);
        assert_eq!(m.eval(c(0.0)), Err(Error::Pole { z: c(0.0) }));
    }

    #[test]
    fn relerr_trivial_cases() {
        let exact = CMatrix::from_element(2, 3, c(4.0));
        assert_eq!(relerr_from_samples(&exact, &exact, ErrorNorm::EntrywiseMax).unwrap(), 0.0);
        let zero = CMatrix::zeros(2, 3);
        assert_eq!(relerr_from_samples(&exact, &zero, ErrorNorm::EntrywiseMax).unwrap(), 1.0);
        assert_eq!(relerr_from_samples(&exact, &zero, ErrorNorm::Frobenius).unwrap(), 1.0);
        assert_eq!(relerr_from_samples(&zero, &exact, ErrorNorm::Frobenius), Err(Error::ZeroFunction));
    }

    #[test]
    fn relerr_against_function() {
        let f = VectorFunction::from_fn(1, |z| Ok(CVector::from_element(1, z)));
        let s = 0.5f64.sqrt();
        let m = scalar_model(&[0.0, 1.0], &[s, -s], &[0.0, 1.0]);
        let grid = TargetGrid::explicit(vec![c(0.25), c(0.5), c(2.0)]).unwrap();
        assert!(sigma_uniform_relerr(&f, &m, &grid, ErrorNorm::EntrywiseMax).unwrap() < 1e-15);
    }
}
