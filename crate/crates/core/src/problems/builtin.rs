use crate::error::{invalid, Error, Result};
use crate::kernel::{spectral_norm, SeededStream};
use crate::model::{BarycentricModel, Coefficient, DomainSpec, SplitForm, SplitTerm, Sparsity, TargetGrid, VectorFunction};
use crate::problems::sampling::{make_grid, GridSpec};
use crate::{CMatrix, CVector, C64};

pub const BUILTINS: [&str; 5] = ["artificial", "delay", "rational_toy", "lowrank_residual", "split_large"];

/// A test problem: the function, where to sample it, and (when known) the
/// rational function it equals.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub function: VectorFunction,
    pub domain: DomainSpec,
    pub grid: GridSpec,
    pub truth: Option<BarycentricModel>,
}

impl Problem {
    pub fn make_grid(&self) -> Result<TargetGrid> {
        make_grid(&self.domain, self.grid.interior, self.grid.boundary, self.grid.seed)
    }
}

fn real_gaussian(stream: &mut SeededStream, m: usize, n: usize) -> CMatrix {
    CMatrix::from_vec(m, n, stream.gaussian_real(m * n).into_iter().map(C64::from).collect())
}

fn unit_spectral(m: CMatrix) -> CMatrix {
    let s = spectral_norm(&m);
    m / C64::from(s)
}

/// `|z| 1e-8 B + sin(pi z) C` with real `B`, `C` of unit spectral norm.
pub fn artificial(n: usize, seed: u64) -> Problem {
    let mut s = SeededStream::new(seed);
    let b = unit_spectral(real_gaussian(&mut s, n, n));
    let c = unit_spectral(real_gaussian(&mut s, n, n));
    let sf = SplitForm::new(
        (n, n),
        vec![
            SplitTerm::new("abs(z)", |z: C64| C64::from(z.norm()), Coefficient::Dense(b * C64::from(1e-8))),
            SplitTerm::new(
                "sin(pi*z)",
                |z: C64| (z * std::f64::consts::PI).sin(),
                Coefficient::Dense(c),
            ),
        ],
    )
    .expect("shapes agree");
    Problem {
        name: "artificial".into(),
        function: VectorFunction::from_split(sf),
        domain: DomainSpec::interval(-1.0, 1.0),
        grid: GridSpec::new(100, 0, 0),
        truth: None,
    }
}

/// `-z I + A0 + A1 exp(-z)` with tridiagonal `A0` and diagonal `A1`.
pub fn delay(n: usize, seed: u64) -> Problem {
    let mut s = SeededStream::new(seed);
    let mut a0 = Vec::new();
    for i in 0..n {
        a0.push((i, i, C64::from(3.2 * (s.next_uniform() - 0.5))));
    }
    for i in 0..n.saturating_sub(1) {
        a0.push((i, i + 1, C64::from(0.2 * s.next_gaussian())));
        a0.push((i + 1, i, C64::from(0.2 * s.next_gaussian())));
    }
    let a1: Vec<_> = (0..n).map(|i| (i, i, C64::from(0.3 * s.next_gaussian()))).collect();
    let ident: Vec<_> = (0..n).map(|i| (i, i, C64::from(1.0))).collect();
    let sparse = |entries| Coefficient::Sparse { rows: n, cols: n, entries };
    let sf = SplitForm::new(
        (n, n),
        vec![
            SplitTerm::new("-z", |z: C64| -z, sparse(ident)),
            SplitTerm::new("1", |_| C64::from(1.0), sparse(a0)),
            SplitTerm::new("exp(-z)", |z: C64| (-z).exp(), sparse(a1)),
        ],
    )
    .expect("shapes agree");
    Problem {
        name: "delay".into(),
        function: VectorFunction::from_split(sf).with_sparsity(Sparsity::FixedPattern),
        domain: DomainSpec::disc(C64::from(0.0), 2.0),
        grid: GridSpec::new(300, 100, 0),
        truth: None,
    }
}

/// Random degree-`degree` rational function with `rows x cols` real values:
/// supports inside `[-1, 1]`, poles in conjugate pairs at distance at
/// least 0.2 from the interval (plus one real pole beyond it for odd
/// degree).
pub fn rational_model(rows: usize, cols: usize, degree: usize, seed: u64) -> Result<BarycentricModel> {
    if rows == 0 || cols == 0 {
        return Err(invalid("rational model needs a nonempty shape"));
    }
    let mut s = SeededStream::new(seed);
    let d = degree;
    let supports: Vec<C64> = (0..=d)
        .map(|j| C64::from(0.95 * (std::f64::consts::PI * (j as f64 + 0.5) / (d as f64 + 1.0)).cos()))
        .collect();
    let mut poles = Vec::with_capacity(d);
    for _ in 0..d / 2 {
        let p = C64::new(1.8 * (s.next_uniform() - 0.5), 0.2 + 0.3 * s.next_uniform());
        poles.push(p);
        poles.push(p.conj());
    }
    if d % 2 == 1 {
        let side = if s.next_uniform() < 0.5 { -1.0 } else { 1.0 };
        poles.push(C64::from(side * (1.3 + 0.5 * s.next_uniform())));
    }
    let weights = CVector::from_iterator(
        d + 1,
        (0..=d).map(|j| {
            let q: C64 = poles.iter().map(|p| supports[j] - p).product();
            let l: C64 = (0..=d).filter(|k| *k != j).map(|k| supports[j] - supports[k]).product();
            q / l
        }),
    );
    let values = real_gaussian(&mut s, rows * cols, d + 1);
    BarycentricModel::new(supports, weights, values)
}

/// A known rational function wrapped as a (matrix-valued) function.
pub fn rational_toy(size: usize, seed: u64) -> Result<Problem> {
    let model = rational_model(size, size, 6, seed)?;
    let inner = model.clone();
    let function = VectorFunction::from_matrix_fn((size, size), move |z| {
        Ok(CMatrix::from_column_slice(size, size, inner.eval(z)?.as_slice()))
    });
    Ok(Problem {
        name: "rational_toy".into(),
        function,
        domain: DomainSpec::interval(-1.0, 1.0),
        grid: GridSpec::new(100, 0, 0),
        truth: Some(model),
    })
}

/// Two smooth terms, so approximation residuals have stable rank at most 2.
pub fn lowrank_residual(n: usize, seed: u64) -> Problem {
    let mut s = SeededStream::new(seed);
    let a1 = unit_spectral(CMatrix::from_vec(n, n, s.gaussian_complex(n * n)));
    let a2 = unit_spectral(CMatrix::from_vec(n, n, s.gaussian_complex(n * n)));
    let sf = SplitForm::new(
        (n, n),
        vec![
            SplitTerm::new("exp(z)", |z: C64| z.exp(), Coefficient::Dense(a1)),
            SplitTerm::new("1/(z - 1.5)", |z: C64| (z - 1.5).inv(), Coefficient::Dense(a2)),
        ],
    )
    .expect("shapes agree");
    Problem {
        name: "lowrank_residual".into(),
        function: VectorFunction::from_split(sf),
        domain: DomainSpec::interval(-1.0, 1.0),
        grid: GridSpec::new(100, 0, 0),
        truth: None,
    }
}

/// Dense split form with four terms and `n x n` coefficients.
pub fn split_large(n: usize, seed: u64) -> Problem {
    let mut s = SeededStream::new(seed);
    let mut coeff = || Coefficient::Dense(unit_spectral(CMatrix::from_vec(n, n, s.gaussian_complex(n * n))));
    let sf = SplitForm::new(
        (n, n),
        vec![
            SplitTerm::new("1", |_| C64::from(1.0), coeff()),
            SplitTerm::new("z", |z: C64| z, coeff()),
            SplitTerm::new("exp(-z)", |z: C64| (-z).exp(), coeff()),
            SplitTerm::new("1/(z - 2.5)", |z: C64| (z - 2.5).inv(), coeff()),
        ],
    )
    .expect("shapes agree");
    Problem {
        name: "split_large".into(),
        function: VectorFunction::from_split(sf),
        domain: DomainSpec::disc(C64::from(0.0), 1.0),
        grid: GridSpec::new(300, 100, 0),
        truth: None,
    }
}

/// Built-in problem by name. `size` is the matrix dimension (defaults:
/// artificial 10, delay 20, rational_toy 1, lowrank_residual 10,
/// split_large 100).
pub fn builtin(name: &str, size: Option<usize>, seed: u64) -> Result<Problem> {
    if size == Some(0) {
        return Err(invalid("problem size must be positive"));
    }
    match name {
        "artificial" => Ok(artificial(size.unwrap_or(10), seed)),
        "delay" => Ok(delay(size.unwrap_or(20), seed)),
        "rational_toy" => rational_toy(size.unwrap_or(1), seed),
        "lowrank_residual" => Ok(lowrank_residual(size.unwrap_or(10), seed)),
        "split_large" => Ok(split_large(size.unwrap_or(100), seed)),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::singular_values;
    use crate::model::{sigma_uniform_relerr, ErrorNorm};

    #[test]
    fn artificial_properties() {
        let p = artificial(10, 3);
        let f = &p.function;
        assert_eq!(f.eval_matrix(C64::from(0.0)).unwrap(), CMatrix::zeros(10, 10));
        let sf = f.split().unwrap();
        let b = sf.terms()[0].coeff.to_dense() / C64::from(1e-8);
        let c = sf.terms()[1].coeff.to_dense();
        assert!((singular_values(&b)[0] - 1.0).abs() < 1e-12);
        assert!((singular_values(&c)[0] - 1.0).abs() < 1e-12);
        assert!(b.iter().chain(c.iter()).all(|x| x.im == 0.0));
        assert_eq!(p.make_grid().unwrap().len(), 100);
    }

    #[test]
    fn rational_toy_is_its_own_model() {
        for size in [1, 3] {
            let p = rational_toy(size, 5).unwrap();
            let grid = p.make_grid().unwrap();
            let truth = p.truth.as_ref().unwrap();
            assert_eq!(sigma_uniform_relerr(&p.function, truth, &grid, ErrorNorm::EntrywiseMax).unwrap(), 0.0);
        }
    }

    #[test]
    fn rational_model_has_prescribed_poles() {
        let m = rational_model(1, 1, 4, 2).unwrap();
        // the denominator sum w_j / (z - z_j) is q(z) / l(z); q has degree 4
        // so r is bounded away from its poles and huge near them
        let near_pole = (0..1000)
            .map(|k| C64::new(-0.9 + 1.8 * k as f64 / 999.0, 0.0))
            .map(|z| m.eval_scalar(z).unwrap().norm())
            .fold(0.0, f64::max);
        assert!(near_pole.is_finite());
        assert_eq!(m.degree(), 4);
    }

    #[test]
    fn delay_pattern_is_fixed() {
        let p = delay(6, 1);
        assert_eq!(p.function.sparsity(), Sparsity::FixedPattern);
        let a = p.function.eval_nonzeros(C64::new(0.3, 0.2)).unwrap();
        let b = p.function.eval_nonzeros(C64::new(-1.0, 0.7)).unwrap();
        let ia: Vec<usize> = a.iter().map(|x| x.0).collect();
        let ib: Vec<usize> = b.iter().map(|x| x.0).collect();
        assert_eq!(ia, ib);
        assert_eq!(ia.len(), 6 + 2 * 5);
    }

    #[test]
    fn unknown_names_and_sizes() {
        assert_eq!(builtin("nope", None, 0).unwrap_err(), Error::UnknownProblem("nope".into()));
        assert!(builtin("delay", Some(0), 0).is_err());
        for name in BUILTINS {
            let p = builtin(name, Some(4), 1).unwrap();
            assert_eq!(p.function.dim(), 16);
        }
    }
}
