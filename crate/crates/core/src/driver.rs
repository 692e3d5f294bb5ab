//! One approximation run end to end: sample, fit, lift, measure.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::aaa::{run_set_valued_aaa, AaaConfig, AaaReport, Termination};
use crate::error::{invalid, Error, Result};
use crate::kernel::derive_seed;
use crate::model::{relerr_from_samples, BarycentricModel, ErrorNorm, TargetGrid, VectorFunction};
use crate::sketch::{run_sketch_aaa, run_sketch_aaa_on_samples, Field, PhaseTimings, ProbeMode, SketchOptions};
use crate::{CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SketchFull,
    SketchTensor,
    SketchSparse,
    /// Set-valued AAA on the scalar functions of a split form, each scaled to
    /// unit max-modulus on the grid.
    SvaaaSplit,
    /// Set-valued AAA on all entries of `F`, unscaled.
    SvaaaEntries,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::SketchFull,
        Method::SketchTensor,
        Method::SketchSparse,
        Method::SvaaaSplit,
        Method::SvaaaEntries,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::SketchFull => "sketch-full",
            Method::SketchTensor => "sketch-tensor",
            Method::SketchSparse => "sketch-sparse",
            Method::SvaaaSplit => "svaaa-split",
            Method::SvaaaEntries => "svaaa-entries",
        }
    }

    fn probe_mode(self) -> Option<ProbeMode> {
        match self {
            Method::SketchFull => Some(ProbeMode::Full),
            Method::SketchTensor => Some(ProbeMode::Tensorized),
            Method::SketchSparse => Some(ProbeMode::Sparse),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid(format!("unknown mode '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub method: Method,
    pub ell: usize,
    pub reltol: f64,
    pub dmax: usize,
    pub seed: u64,
    pub field: Field,
    /// Evaluate `F` on the whole grid before timing starts.
    pub precompute: bool,
}

impl RunOptions {
    pub fn new(method: Method, ell: usize, reltol: f64, seed: u64) -> Self {
        Self {
            method,
            ell,
            reltol,
            dmax: 100,
            seed,
            field: Field::Complex,
            precompute: false,
        }
    }

    pub fn with_dmax(mut self, dmax: usize) -> Self {
        self.dmax = dmax;
        self
    }

    pub fn with_field(mut self, field: Field) -> Self {
        self.field = field;
        self
    }

    pub fn with_precompute(mut self, on: bool) -> Self {
        self.precompute = on;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RelErr {
    pub entrywise_max: f64,
    pub frobenius: f64,
}

impl RelErr {
    pub fn measure(exact: &CMatrix, model: &BarycentricModel, grid: &TargetGrid) -> Result<Self> {
        let approx = model.eval_many(grid.points())?;
        Ok(Self {
            entrywise_max: relerr_from_samples(exact, &approx, ErrorNorm::EntrywiseMax)?,
            frobenius: relerr_from_samples(exact, &approx, ErrorNorm::Frobenius)?,
        })
    }

    pub fn get(&self, norm: ErrorNorm) -> f64 {
        match norm {
            ErrorNorm::EntrywiseMax => self.entrywise_max,
            ErrorNorm::Frobenius => self.frobenius,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Approximation {
    /// Model with full values of `F` at the supports.
    pub model: BarycentricModel,
    pub report: AaaReport,
    pub timings: PhaseTimings,
}

fn sample_full(f: &VectorFunction, grid: &TargetGrid) -> Result<CMatrix> {
    f.sample(grid.points())
}

fn lift(f: &VectorFunction, surrogate: &BarycentricModel) -> Result<BarycentricModel> {
    let mut values = CMatrix::zeros(f.dim(), surrogate.supports().len());
    for (k, z) in surrogate.supports().iter().enumerate() {
        values.set_column(k, &f.eval(*z)?);
    }
    surrogate.with_values(values)
}

/// Run one method. `full` are the samples of `f` on the grid when already
/// available; with `opts.precompute` they are used (or computed) outside the
/// timed phases.
pub fn approximate_with(
    f: &VectorFunction,
    grid: &TargetGrid,
    opts: &RunOptions,
    full: Option<&CMatrix>,
) -> Result<Approximation> {
    let cfg = AaaConfig::new(opts.reltol, opts.dmax);
    cfg.validate()?;
    let owned;
    let full = if opts.precompute {
        match full {
            Some(s) => Some(s),
            None => {
                owned = sample_full(f, grid)?;
                Some(&owned)
            }
        }
    } else {
        None
    };

    match opts.method {
        Method::SketchFull | Method::SketchTensor | Method::SketchSparse => {
            let mode = opts.method.probe_mode().expect("sketch method");
            if opts.ell == 0 {
                return Err(invalid("ell must be at least 1"));
            }
            let sopts = SketchOptions::new(opts.ell, mode, opts.seed).with_field(opts.field);
            let run = match full {
                Some(s) if mode != ProbeMode::Sparse => {
                    run_sketch_aaa_on_samples(s, f.matrix_shape(), grid, &sopts, &cfg)?
                }
                _ => run_sketch_aaa(f, grid, &sopts, &cfg)?,
            };
            Ok(Approximation {
                model: run.model,
                report: run.report,
                timings: run.timings,
            })
        }
        Method::SvaaaSplit => {
            let sf = f
                .split()
                .ok_or_else(|| invalid("svaaa-split needs a split-form function"))?;
            let mut timings = PhaseTimings::default();
            let t = Instant::now();
            let points = grid.points();
            let mut scalars = CMatrix::zeros(sf.len(), points.len());
            for (k, z) in points.iter().enumerate() {
                for (i, v) in sf.scalar_values(*z)?.into_iter().enumerate() {
                    scalars[(i, k)] = v;
                }
            }
            timings.sample = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let (surrogate, report) = run_set_valued_aaa(&scalars, grid, &cfg.with_scaling(true))?;
            timings.aaa = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let model = match full {
                Some(s) => surrogate.with_values(s.select_columns(&report.support_indices()))?,
                None => lift(f, &surrogate)?,
            };
            timings.lift = t.elapsed().as_secs_f64();
            Ok(Approximation { model, report, timings })
        }
        Method::SvaaaEntries => {
            let mut timings = PhaseTimings::default();
            let t = Instant::now();
            let owned_samples;
            let samples = match full {
                Some(s) => s,
                None => {
                    owned_samples = sample_full(f, grid)?;
                    timings.sample = t.elapsed().as_secs_f64();
                    &owned_samples
                }
            };
            let t = Instant::now();
            let (model, report) = run_set_valued_aaa(samples, grid, &cfg)?;
            timings.aaa = t.elapsed().as_secs_f64();
            Ok(Approximation { model, report, timings })
        }
    }
}

pub fn approximate(f: &VectorFunction, grid: &TargetGrid, opts: &RunOptions) -> Result<Approximation> {
    approximate_with(f, grid, opts, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub degree: usize,
    pub metric: f64,
    pub seconds: f64,
}

/// Serializable summary of one (or several averaged) runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub mode: Method,
    pub ell: usize,
    pub seed: u64,
    pub reltol: f64,
    pub dmax: usize,
    pub repeats: usize,
    /// Mean final degree over the repeats.
    pub degree: f64,
    /// Mean relative errors over the repeats.
    pub relerr: RelErr,
    pub terminated_by: Termination,
    /// History, supports, weights and timings of the first repeat.
    pub history: Vec<HistoryRow>,
    pub supports: Vec<C64>,
    pub weights: Vec<C64>,
    pub timings: PhaseTimings,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("bad report: {e}")))
    }

    pub fn history_csv(&self) -> String {
        let mut out = String::from("degree,metric,seconds\n");
        for r in &self.history {
            out.push_str(&format!("{},{:e},{:e}\n", r.degree, r.metric, r.seconds));
        }
        out
    }

    /// Whether every repeat met the tolerance.
    pub fn converged(&self) -> bool {
        self.terminated_by == Termination::Tolerance
    }
}

/// Run `repeats` realizations (seeds derived from `opts.seed`, the first one
/// using it unchanged) and average degree and relative errors.
pub fn run_report(
    problem: &str,
    f: &VectorFunction,
    grid: &TargetGrid,
    opts: &RunOptions,
    repeats: usize,
) -> Result<RunReport> {
    if repeats == 0 {
        return Err(invalid("repeat count must be positive"));
    }
    let exact = sample_full(f, grid)?;
    let mut first: Option<(Approximation, RelErr)> = None;
    let mut degree = 0.0;
    let mut err = RelErr::default();
    let mut terminated_by = Termination::Tolerance;
    for r in 0..repeats {
        let mut o = opts.clone();
        if r > 0 {
            o.seed = derive_seed(opts.seed, r as u64);
        }
        let a = approximate_with(f, grid, &o, Some(&exact))?;
        let e = RelErr::measure(&exact, &a.model, grid)?;
        degree += a.report.degree as f64;
        err.entrywise_max += e.entrywise_max;
        err.frobenius += e.frobenius;
        if a.report.terminated_by != Termination::Tolerance {
            terminated_by = a.report.terminated_by;
        }
        if first.is_none() {
            first = Some((a, e));
        }
    }
    let n = repeats as f64;
    let (a, _) = first.expect("at least one repeat");
    Ok(RunReport {
        problem: problem.to_string(),
        mode: opts.method,
        ell: opts.ell,
        seed: opts.seed,
        reltol: opts.reltol,
        dmax: opts.dmax,
        repeats,
        degree: degree / n,
        relerr: RelErr {
            entrywise_max: err.entrywise_max / n,
            frobenius: err.frobenius / n,
        },
        terminated_by,
        history: a
            .report
            .records
            .iter()
            .map(|r| HistoryRow {
                degree: r.degree,
                metric: r.metric,
                seconds: r.seconds,
            })
            .collect(),
        supports: a.model.supports().to_vec(),
        weights: a.model.weights().iter().copied().collect(),
        timings: a.timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::builtin;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert!("svaaa".parse::<Method>().is_err());
    }

    #[test]
    fn every_mode_recovers_rational_toy() {
        let p = builtin("rational_toy", Some(2), 4).unwrap();
        let grid = p.make_grid().unwrap();
        for m in Method::ALL {
            if m == Method::SvaaaSplit {
                continue;
            }
            let r = run_report("rational_toy", &p.function, &grid, &RunOptions::new(m, 2, 1e-13, 1), 1).unwrap();
            assert!(r.relerr.entrywise_max <= 1e-12, "{m}: {:?}", r.relerr);
            assert!(r.converged());
        }
        let err = approximate(&p.function, &grid, &RunOptions::new(Method::SvaaaSplit, 2, 1e-8, 1)).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn precompute_does_not_change_the_model() {
        let p = builtin("lowrank_residual", Some(4), 2).unwrap();
        let grid = p.make_grid().unwrap();
        for m in [Method::SketchFull, Method::SvaaaSplit, Method::SvaaaEntries] {
            let o = RunOptions::new(m, 3, 1e-10, 9);
            let a = approximate(&p.function, &grid, &o).unwrap();
            let b = approximate(&p.function, &grid, &o.clone().with_precompute(true)).unwrap();
            assert_eq!(a.model.supports(), b.model.supports(), "{m}");
            let d = (a.model.values() - b.model.values()).camax();
            assert!(d <= 1e-13 * a.model.values().camax(), "{m}");
        }
    }

    #[test]
    fn report_json_and_csv() {
        let p = builtin("lowrank_residual", Some(3), 2).unwrap();
        let grid = p.make_grid().unwrap();
        let r = run_report("x", &p.function, &grid, &RunOptions::new(Method::SketchFull, 2, 1e-9, 5), 3).unwrap();
        assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
        let csv = r.history_csv();
        assert_eq!(csv.lines().count(), r.history.len() + 1);
        assert!(csv.starts_with("degree,metric,seconds\n"));
        assert_eq!(r.repeats, 3);
    }

    #[test]
    fn deterministic_in_seed() {
        let p = builtin("artificial", None, 1).unwrap();
        let grid = p.make_grid().unwrap();
        let o = RunOptions::new(Method::SketchFull, 4, 1e-8, 3);
        let a = run_report("a", &p.function, &grid, &o, 1).unwrap();
        let b = run_report("a", &p.function, &grid, &o, 1).unwrap();
        assert_eq!(a.supports, b.supports);
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.relerr, b.relerr);
    }
}
