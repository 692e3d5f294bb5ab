use std::io::Write;
use std::sync::Mutex;
use std::time::Instant;

use sketchaaa::analysis::{
    bound_underestimate, empirical_success_table, residual_matrix, tensor_bound_overestimate,
    tensor_bound_underestimate, BoundQuery,
};
use sketchaaa::driver::{approximate, Method, RelErr, RunOptions};
use sketchaaa::kernel::singular_values;
use sketchaaa::linearize::{build_pencil, pencil_eigenvalues, rational_zeros_oracle};
use sketchaaa::model::{sigma_uniform_relerr, DomainSpec, ErrorNorm, TargetGrid, VectorFunction};
use sketchaaa::problems::{builtin, make_grid, rational_model, BUILTINS};
use sketchaaa::sketch::{
    draw_full_probe, draw_tensor_probe, run_sketch_aaa, sketch_model, sparse_probe, Field, ProbeMode,
    ProbingOperator, SketchOptions,
};
use sketchaaa::aaa::AaaConfig;
use sketchaaa::{CMatrix, C64};

// keeps the timed criteria from sharing the machine
static SERIAL: Mutex<()> = Mutex::new(());

// written past the test harness capture so the line shows in every run
fn report(n: usize, name: &str, pass: bool, detail: String) {
    let line = format!("criterion {n:>2} {name}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {n} {name} failed: {detail}");
}

fn interval_grid(n: usize) -> TargetGrid {
    make_grid(&DomainSpec::interval(-1.0, 1.0), n, 0, 0).unwrap()
}

#[test]
fn criterion_01_artificial_example() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let p = builtin("artificial", None, 0).unwrap();
    let grid = p.make_grid().unwrap();
    assert_eq!(grid.len(), 100);
    let cases = [
        (1e-8, Method::SvaaaSplit, 24, 2),
        (1e-8, Method::SvaaaEntries, 8, 1),
        (1e-8, Method::SketchFull, 8, 1),
        (1e-12, Method::SvaaaSplit, 29, 2),
        (1e-12, Method::SvaaaEntries, 18, 1),
        (1e-12, Method::SketchFull, 18, 1),
    ];
    let exact = p.function.sample(grid.points()).unwrap();
    let t = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (tol, m, want, slack) in cases {
        let a = approximate(&p.function, &grid, &RunOptions::new(m, 4, tol, 7)).unwrap();
        let err = RelErr::measure(&exact, &a.model, &grid).unwrap().entrywise_max;
        let d = a.report.degree;
        let ok = d.abs_diff(want) <= slack && err <= 10.0 * tol;
        pass &= ok;
        detail.push(format!("{m}@{tol:e}: d={d} err={err:.1e}"));
    }
    let secs = t.elapsed().as_secs_f64();
    pass &= secs < 5.0;
    report(1, "artificial example", pass, format!("{}; {secs:.2}s", detail.join(", ")));
}

#[test]
fn criterion_02_bound_values() {
    let q = |ell, tau| BoundQuery::new(tau, ell, 2.0, Field::Complex).unwrap();
    let b1 = bound_underestimate(&q(1, 10.0)).unwrap();
    let b2 = bound_underestimate(&q(2, 10.0)).unwrap();
    let b3 = bound_underestimate(&q(2, 100.0)).unwrap();
    let pass = (b1 - 0.019801).abs() <= 1e-6 && (b2 - 7.79e-4).abs() <= 1e-6 && b3 <= 8e-8;
    report(2, "bound values", pass, format!("{b1:.6e}, {b2:.6e}, {b3:.3e}"));
}

#[test]
fn criterion_03_monte_carlo_bounds() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let p = builtin("lowrank_residual", None, 0).unwrap();
    let grid = p.make_grid().unwrap();
    // approximant fixed independently of the probes below
    let fixed = approximate(&p.function, &grid, &RunOptions::new(Method::SketchFull, 4, 1e-6, 1001)).unwrap();
    let h = residual_matrix(&p.function, &fixed.model, &grid).unwrap();
    let rows = empirical_success_table(&h, &[1, 2, 4, 8, 16], &[2.0, 3.0, 5.0, 10.0], 10_000, 77, Field::Complex)
        .unwrap();
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.consistent())
        .map(|r| format!("tau={} ell={}", r.tau, r.ell))
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let pass = bad.is_empty() && rows.len() == 20 && secs < 60.0;
    report(
        3,
        "Monte Carlo success rates",
        pass,
        format!("rho={:.3}, {} cells, failing {:?}, {secs:.1}s", rows[0].rho, rows.len(), bad),
    );
}

#[test]
fn criterion_04_exact_recovery() {
    let grid = interval_grid(100);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let d = 1 + (seed as usize % 10);
        let (rows, cols) = [(1, 1), (5, 10), (7, 7), (3, 4)][seed as usize % 4];
        let truth = rational_model(rows, cols, d, 500 + seed).unwrap();
        let t = truth.clone();
        let f = VectorFunction::from_fn(rows * cols, move |z| t.eval(z));
        for ell in [1, 2, 5] {
            let opts = SketchOptions::new(ell, ProbeMode::Full, seed);
            let run = run_sketch_aaa(&f, &grid, &opts, &AaaConfig::new(1e-13, 30)).unwrap();
            let err = sigma_uniform_relerr(&f, &run.model, &grid, ErrorNorm::EntrywiseMax).unwrap();
            worst = worst.max(err);
            if run.model.degree() > d || err > 1e-11 {
                failures.push(format!("seed {seed} d={d} ell={ell}: degree {} err {err:.1e}", run.model.degree()));
            }
        }
    }
    report(4, "exact recovery", failures.is_empty(), format!("worst {worst:.1e}; {failures:?}"));
}

#[test]
fn criterion_05_interpolation() {
    let mut failures = Vec::new();
    for name in BUILTINS {
        let p = builtin(name, None, 3).unwrap();
        let grid = p.make_grid().unwrap();
        let a = approximate(&p.function, &grid, &RunOptions::new(Method::SketchFull, 4, 1e-8, 5)).unwrap();
        for z in a.model.supports() {
            if a.model.eval(*z).unwrap() != p.function.eval(*z).unwrap() {
                failures.push(format!("{name} at {z}"));
            }
        }
    }
    report(5, "interpolation at supports", failures.is_empty(), format!("{} problems; {failures:?}", BUILTINS.len()));
}

#[test]
fn criterion_06_commutation() {
    let grid = interval_grid(40);
    let mut worst: f64 = 0.0;
    for case in 0..50u64 {
        let (m, n) = [(1, 3), (4, 4), (6, 2), (3, 5)][case as usize % 4];
        let d = 2 + case as usize % 7;
        let model = rational_model(m, n, d, 900 + case).unwrap();
        let field = if case % 2 == 0 { Field::Complex } else { Field::Real };
        let ell = 1 + case as usize % 5;
        let op = if case % 3 == 0 {
            draw_tensor_probe(m, n, ell, field, case).unwrap()
        } else {
            draw_full_probe(m * n, ell, field, case).unwrap()
        };
        let surrogate = sketch_model(&op, &model, Some((m, n))).unwrap();
        for z in grid.points() {
            let a = surrogate.eval(*z).unwrap();
            let b = op.apply_vector(&model.eval(*z).unwrap(), Some((m, n))).unwrap();
            worst = worst.max((&a - &b).norm() / b.norm().max(f64::MIN_POSITIVE));
        }
    }
    report(6, "commutation with probing", worst <= 1e-13, format!("worst relative {worst:.1e} over 50 cases"));
}

#[test]
fn criterion_07_sparse_probing() {
    let p = builtin("delay", None, 2).unwrap();
    let grid = p.make_grid().unwrap();
    let big_n = p.function.dim();
    let mut detail = Vec::new();
    let mut pass = true;
    for field in [Field::Real, Field::Complex] {
        let (vals, op) = sparse_probe(&p.function, grid.points(), 4, field, 13).unwrap();
        let ProbingOperator::SparseAdaptive { ind, v, .. } = &op else { unreachable!() };
        // full probe with the same draws placed on the pattern rows
        let mut full = CMatrix::zeros(big_n, 4);
        for (j, &k) in ind.iter().enumerate() {
            for r in 0..4 {
                full[(k, r)] = v[(r, j)];
            }
        }
        let mut diff: f64 = 0.0;
        for (c, z) in grid.points().iter().enumerate() {
            let mut fz = sketchaaa::CVector::zeros(big_n);
            for (k, x) in p.function.eval_nonzeros(*z).unwrap() {
                fz[k] = x;
            }
            // sequential sum over all rows in index order
            let reference: Vec<C64> = (0..4)
                .map(|r| (0..big_n).fold(C64::new(0.0, 0.0), |acc, k| acc + full[(k, r)] * fz[k]))
                .collect();
            let got = vals.column(c);
            for r in 0..4 {
                let e = (got[r] - reference[r]).norm() / reference[r].norm().max(f64::MIN_POSITIVE);
                diff = diff.max(e);
            }
        }
        let ok = match field {
            Field::Real => diff == 0.0,
            Field::Complex => diff <= 1e-15,
        };
        pass &= ok;
        detail.push(format!("{field:?}: {diff:.1e}"));
    }
    report(7, "sparse probing", pass, format!("{} pattern entries; {}", big_n, detail.join(", ")));
}

fn max_match_error(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
        .chain(b.iter().map(|y| a.iter().map(|x| (x - y).norm()).fold(f64::INFINITY, f64::min)))
        .fold(0.0, f64::max)
}

#[test]
fn criterion_08_linearization() {
    let region = DomainSpec::interval(-1.0, 1.0);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut total = 0;
    for k in 0..20u64 {
        let d = 2 + k as usize % 9;
        let model = rational_model(1, 1, d, 300 + k).unwrap();
        let pencil = build_pencil(&model, 1, None).unwrap();
        let eig = pencil_eigenvalues(&pencil, &region).unwrap();
        let oracle: Vec<C64> = rational_zeros_oracle(&model, &region).unwrap().iter().map(|z| z.z).collect();
        let e = max_match_error(&eig, &oracle);
        total += eig.len();
        worst = worst.max(e);
        if e > 1e-8 {
            failures.push(format!("k={k} d={d}: {} vs {} zeros, err {e:.1e}", eig.len(), oracle.len()));
        }
    }
    let model = rational_model(5, 5, 6, 17).unwrap();
    let pencil = build_pencil(&model, 5, None).unwrap();
    let disc = DomainSpec::disc(C64::from(0.0), 1.0);
    let eig = pencil_eigenvalues(&pencil, &disc).unwrap();
    let mut worst_matrix: f64 = 0.0;
    for lam in &eig {
        let r = CMatrix::from_column_slice(5, 5, model.eval(*lam).unwrap().as_slice());
        let s = singular_values(&r);
        worst_matrix = worst_matrix.max(s[s.len() - 1] / s[0]);
    }
    let pass = failures.is_empty() && !eig.is_empty() && worst_matrix <= 1e-8;
    report(
        8,
        "linearization",
        pass,
        format!(
            "scalar: {total} zeros, worst {worst:.1e} {failures:?}; 5x5: {} eigenvalues, worst residual {worst_matrix:.1e}",
            eig.len()
        ),
    );
}

#[test]
fn criterion_09_performance() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let p = builtin("split_large", Some(100), 0).unwrap();
    let grid = p.make_grid().unwrap();
    assert_eq!((p.function.dim(), grid.len()), (10_000, 400));
    let exact = p.function.sample(grid.points()).unwrap();

    let t = Instant::now();
    let sk = approximate(&p.function, &grid, &RunOptions::new(Method::SketchFull, 4, 1e-8, 3)).unwrap();
    let t_sketch = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let sv = approximate(&p.function, &grid, &RunOptions::new(Method::SvaaaEntries, 4, 1e-8, 3)).unwrap();
    let t_entries = t.elapsed().as_secs_f64();

    let e_sk = RelErr::measure(&exact, &sk.model, &grid).unwrap().entrywise_max;
    let e_sv = RelErr::measure(&exact, &sv.model, &grid).unwrap().entrywise_max;
    let speedup = t_entries / t_sketch;
    let ratio = (e_sk / e_sv).max(e_sv / e_sk);
    let secs = t0.elapsed().as_secs_f64();
    let pass = speedup >= 20.0 && ratio <= 10.0 && secs < 120.0;
    report(
        9,
        "performance",
        pass,
        format!(
            "sketch {t_sketch:.3}s d={} err {e_sk:.1e}; entries {t_entries:.3}s d={} err {e_sv:.1e}; speedup {speedup:.0}x; {secs:.1}s",
            sk.report.degree, sv.report.degree
        ),
    );
}

#[test]
fn criterion_10_tensor_bounds() {
    let taus: Vec<f64> = (0..=980).map(|k| 2.0 + 0.1 * k as f64).collect();
    let under: Vec<f64> = taus.iter().map(|t| tensor_bound_underestimate(*t).unwrap()).collect();
    let over: Vec<f64> = taus.iter().map(|t| tensor_bound_overestimate(*t).unwrap()).collect();
    let mono = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
    let limit = tensor_bound_underestimate(1e8).unwrap() < 1e-3 && tensor_bound_overestimate(1e3).unwrap() < 1e-300;
    let u10 = tensor_bound_underestimate(10.0).unwrap();
    let o10 = tensor_bound_overestimate(10.0).unwrap();
    let pass = mono(&under)
        && mono(&over)
        && under[0] > under[under.len() - 1]
        && limit
        && (u10 - 0.321_144_272_600_664_2).abs() <= 1e-6
        && (o10 - 1.500_234_479_801_468_3e-3).abs() <= 1e-6;
    report(10, "tensorized bounds", pass, format!("under(10)={u10:.8}, over(10)={o10:.6e}"));
}
