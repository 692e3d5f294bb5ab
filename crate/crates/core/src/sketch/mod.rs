//! Random probing of vector-valued functions and the sketched AAA driver.

mod probe;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use probe::{
    apply_probe, draw_full_probe, draw_tensor_probe, precompute_split_sketch, sparse_probe, Discovery, Field,
    ProbingOperator, SketchedSplit,
};

use crate::aaa::{run_set_valued_aaa, AaaConfig, AaaReport};
use crate::error::{invalid, Result};
use crate::model::{BarycentricModel, TargetGrid, VectorFunction};
use crate::{CMatrix, CVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeMode {
    Full,
    Tensorized,
    Sparse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SketchOptions {
    pub ell: usize,
    pub mode: ProbeMode,
    pub field: Field,
    pub seed: u64,
    /// Sketch the split-form coefficients once instead of probing `F(z)`.
    pub use_split: bool,
}

impl SketchOptions {
    pub fn new(ell: usize, mode: ProbeMode, seed: u64) -> Self {
        Self {
            ell,
            mode,
            field: Field::Complex,
            seed,
            use_split: true,
        }
    }

    pub fn with_field(mut self, field: Field) -> Self {
        self.field = field;
        self
    }

    pub fn with_split(mut self, on: bool) -> Self {
        self.use_split = on;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub probe: f64,
    pub sample: f64,
    pub aaa: f64,
    pub lift: f64,
}

impl PhaseTimings {
    pub fn total(&self) -> f64 {
        self.probe + self.sample + self.aaa + self.lift
    }
}

#[derive(Clone, Debug)]
pub struct SketchRun {
    /// Lifted model with full values `f(z_i)`.
    pub model: BarycentricModel,
    /// Model of the sketched surrogate.
    pub surrogate: BarycentricModel,
    /// Surrogate samples on the grid, `ell x |grid|`.
    pub surrogate_samples: CMatrix,
    pub report: AaaReport,
    pub probe: ProbingOperator,
    pub timings: PhaseTimings,
}

fn draw_probe(f: &VectorFunction, opts: &SketchOptions) -> Result<ProbingOperator> {
    if opts.ell == 0 {
        return Err(invalid("ell must be positive"));
    }
    match opts.mode {
        ProbeMode::Full => draw_full_probe(f.dim(), opts.ell, opts.field, opts.seed),
        ProbeMode::Tensorized => {
            let (m, n) = f
                .matrix_shape()
                .ok_or_else(|| invalid("tensorized probing needs a matrix-valued function"))?;
            draw_tensor_probe(m, n, opts.ell, opts.field, opts.seed)
        }
        ProbeMode::Sparse => Err(invalid("the sparse probe is drawn while sampling")),
    }
}

/// Sketched AAA: probe, sample the surrogate on the grid, run set-valued
/// AAA on the `ell` components, then lift with full evaluations at the
/// supports.
pub fn run_sketch_aaa(
    f: &VectorFunction,
    grid: &TargetGrid,
    opts: &SketchOptions,
    cfg: &AaaConfig,
) -> Result<SketchRun> {
    let points = grid.points();
    let mut timings = PhaseTimings::default();

    let t = Instant::now();
    let (probe, samples) = if opts.mode == ProbeMode::Sparse {
        let (vals, op) = sparse_probe(f, points, opts.ell, opts.field, opts.seed)?;
        timings.sample = t.elapsed().as_secs_f64();
        (op, vals)
    } else {
        let op = draw_probe(f, opts)?;
        timings.probe = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let samples = match f.split() {
            Some(sf) if opts.use_split => precompute_split_sketch(&op, sf)?.sample(points)?,
            _ => {
                let mut out = CMatrix::zeros(op.ell(), points.len());
                for (k, z) in points.iter().enumerate() {
                    out.set_column(k, &apply_probe(&op, f, *z)?);
                }
                out
            }
        };
        timings.sample = t.elapsed().as_secs_f64();
        (op, samples)
    };

    let t = Instant::now();
    let (surrogate, report) = run_set_valued_aaa(&samples, grid, cfg)?;
    timings.aaa = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut values = CMatrix::zeros(f.dim(), surrogate.supports().len());
    for (k, z) in surrogate.supports().iter().enumerate() {
        values.set_column(k, &f.eval(*z)?);
    }
    let model = surrogate.with_values(values)?;
    timings.lift = t.elapsed().as_secs_f64();

    Ok(SketchRun {
        model,
        surrogate,
        surrogate_samples: samples,
        report,
        probe,
        timings,
    })
}

/// Sketched AAA on precomputed full samples (`N x |grid|`); the lift reads
/// the stored columns instead of re-evaluating.
pub fn run_sketch_aaa_on_samples(
    full: &CMatrix,
    shape: Option<(usize, usize)>,
    grid: &TargetGrid,
    opts: &SketchOptions,
    cfg: &AaaConfig,
) -> Result<SketchRun> {
    if full.ncols() != grid.len() {
        return Err(invalid("sample columns do not match the grid"));
    }
    let mut timings = PhaseTimings::default();
    let t = Instant::now();
    let probe = match opts.mode {
        ProbeMode::Full => draw_full_probe(full.nrows(), opts.ell, opts.field, opts.seed)?,
        ProbeMode::Tensorized => {
            let (m, n) = shape.ok_or_else(|| invalid("tensorized probing needs a matrix shape"))?;
            draw_tensor_probe(m, n, opts.ell, opts.field, opts.seed)?
        }
        ProbeMode::Sparse => return Err(invalid("sparse probing works on the function, not on samples")),
    };
    timings.probe = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let samples = match &probe {
        ProbingOperator::Full { v, .. } => v.tr_mul(full),
        _ => {
            let mut out = CMatrix::zeros(probe.ell(), full.ncols());
            for (k, col) in full.column_iter().enumerate() {
                out.set_column(k, &probe.apply_vector(&col.into_owned(), shape)?);
            }
            out
        }
    };
    timings.sample = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (surrogate, report) = run_set_valued_aaa(&samples, grid, cfg)?;
    timings.aaa = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let model = surrogate.with_values(full.select_columns(&report.support_indices()))?;
    timings.lift = t.elapsed().as_secs_f64();

    Ok(SketchRun {
        model,
        surrogate,
        surrogate_samples: samples,
        report,
        probe,
        timings,
    })
}

/// Surrogate model of `V^T f` built with the fixed supports and weights of
/// `model`, i.e. the sketch applied to every stored value.
pub fn sketch_model(op: &ProbingOperator, model: &BarycentricModel, shape: Option<(usize, usize)>) -> Result<BarycentricModel> {
    let mut values = CMatrix::zeros(op.ell(), model.supports().len());
    for (k, col) in model.values().column_iter().enumerate() {
        let v: CVector = col.into_owned();
        values.set_column(k, &op.apply_vector(&v, shape)?);
    }
    model.with_values(values)
}
