//! Complex QZ iteration for the dense generalized eigenvalue problem
//! `det(A - λB) = 0`.
//!
//! The pair is first reduced to Hessenberg-triangular form with Householder
//! QR and Givens rotations, then driven to generalized Schur form by
//! single-shift implicit QZ sweeps (Moler-Stewart). Zero diagonal entries of
//! the triangular factor are chased to the bottom of the active block and
//! deflated as infinite eigenvalues.

use crate::error::{invalid, Error, Result};
use crate::{CMatrix, C64};

/// Eigenvalues with `|beta| <= INFINITE_BETA_TOL * ||B||_F` are infinite.
pub const INFINITE_BETA_TOL: f64 = 1e-14;

/// Generalized eigenvalue as the ratio `alpha / beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenRatio {
    pub alpha: C64,
    pub beta: C64,
}

/// All finite generalized eigenvalues of `(A, B)`, counting multiplicity.
pub fn generalized_eigenvalues(a: &CMatrix, b: &CMatrix) -> Result<Vec<C64>> {
    let bnorm = b.norm();
    let ratios = generalized_eigen_ratios(a, b)?;
    Ok(ratios
        .into_iter()
        .filter(|r| r.beta.norm() > INFINITE_BETA_TOL * bnorm)
        .map(|r| r.alpha / r.beta)
        .collect())
}

pub fn generalized_eigen_ratios(a: &CMatrix, b: &CMatrix) -> Result<Vec<EigenRatio>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(invalid(format!(
            "pencil must be square and conforming, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if a.iter().chain(b.iter()).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(invalid("pencil has non-finite entries"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut h, mut t) = hessenberg_triangular(a, b);
    qz_iterate(&mut h, &mut t)
}

/// `(c, s, r)` with `[c s; -conj(s) c] [f; g] = [r; 0]` and `c` real.
fn givens(f: C64, g: C64) -> (f64, C64, C64) {
    if g == C64::new(0.0, 0.0) {
        return (1.0, C64::new(0.0, 0.0), f);
    }
    if f == C64::new(0.0, 0.0) {
        let ga = g.norm();
        return (0.0, g.conj() / ga, C64::from(ga));
    }
    let fa = f.norm();
    let nrm = fa.hypot(g.norm());
    let phase = f / fa;
    (fa / nrm, phase * g.conj() / nrm, phase * nrm)
}

#[inline]
fn rot(x: &mut C64, y: &mut C64, c: f64, s: C64) {
    let nx = *x * c + s * *y;
    *y = *y * c - s.conj() * *x;
    *x = nx;
}

/// Rotate rows `p` and `q` over columns `cols`.
fn rotate_rows(m: &mut CMatrix, p: usize, q: usize, cols: std::ops::Range<usize>, c: f64, s: C64) {
    for k in cols {
        let mut x = m[(p, k)];
        let mut y = m[(q, k)];
        rot(&mut x, &mut y, c, s);
        m[(p, k)] = x;
        m[(q, k)] = y;
    }
}

/// Rotate columns `p` and `q` over rows `rows`.
fn rotate_cols(m: &mut CMatrix, p: usize, q: usize, rows: std::ops::Range<usize>, c: f64, s: C64) {
    for k in rows {
        let mut x = m[(k, p)];
        let mut y = m[(k, q)];
        rot(&mut x, &mut y, c, s);
        m[(k, p)] = x;
        m[(k, q)] = y;
    }
}

fn hessenberg_triangular(a: &CMatrix, b: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let qr = b.clone().qr();
    let mut h = qr.q().adjoint() * a;
    let mut t = qr.r();
    let zero = C64::new(0.0, 0.0);
    for j in 0..n.saturating_sub(2) {
        for i in (j + 2..n).rev() {
            let (c, s, r) = givens(h[(i - 1, j)], h[(i, j)]);
            rotate_rows(&mut h, i - 1, i, j + 1..n, c, s);
            h[(i - 1, j)] = r;
            h[(i, j)] = zero;
            rotate_rows(&mut t, i - 1, i, i - 1..n, c, s);
            let (c, s, r) = givens(t[(i, i)], t[(i, i - 1)]);
            rotate_cols(&mut t, i, i - 1, 0..i, c, s);
            t[(i, i)] = r;
            t[(i, i - 1)] = zero;
            rotate_cols(&mut h, i, i - 1, 0..n, c, s);
        }
    }
    (h, t)
}

/// Eigenvalue of the trailing 2x2 block of `H T^{-1}` closest to its last
/// diagonal entry.
fn wilkinson_shift(h: &CMatrix, t: &CMatrix, l: usize) -> C64 {
    let (a11, a12, a21, a22) = (h[(l - 1, l - 1)], h[(l - 1, l)], h[(l, l - 1)], h[(l, l)]);
    let (b11, b12, b22) = (t[(l - 1, l - 1)], t[(l - 1, l)], t[(l, l)]);
    let m11 = a11 / b11;
    let m21 = a21 / b11;
    let m12 = (a12 - a11 * b12 / b11) / b22;
    let m22 = (a22 - a21 * b12 / b11) / b22;
    let half = (m11 - m22) * 0.5;
    let disc = (half * half + m12 * m21).sqrt();
    let mid = (m11 + m22) * 0.5;
    let (l1, l2) = (mid + disc, mid - disc);
    let pick = if (l1 - m22).norm() <= (l2 - m22).norm() { l1 } else { l2 };
    if pick.re.is_finite() && pick.im.is_finite() {
        pick
    } else {
        a22 / b22
    }
}

fn qz_iterate(h: &mut CMatrix, t: &mut CMatrix) -> Result<Vec<EigenRatio>> {
    let n = h.nrows();
    let zero = C64::new(0.0, 0.0);
    let ulp = f64::EPSILON;
    let safmin = f64::MIN_POSITIVE;
    let atol = (ulp * h.norm()).max(safmin);
    let btol = (ulp * t.norm()).max(safmin);

    let mut out = vec![EigenRatio { alpha: zero, beta: zero }; n];
    let mut ilast = n - 1;
    let mut iiter = 0usize;
    let mut eshift = zero;
    let max_iter = 60 * n.max(1);
    let mut total_iter = 0usize;

    enum Step {
        Deflate,
        DeflateInfinite,
        Sweep(usize),
    }

    loop {
        if ilast == 0 {
            out[0] = EigenRatio { alpha: h[(0, 0)], beta: t[(0, 0)] };
            break;
        }

        let step = 'find: {
            if h[(ilast, ilast - 1)].norm() <= atol {
                h[(ilast, ilast - 1)] = zero;
                break 'find Step::Deflate;
            }
            if t[(ilast, ilast)].norm() <= btol {
                t[(ilast, ilast)] = zero;
                break 'find Step::DeflateInfinite;
            }
            for j in (0..ilast).rev() {
                let top = if j == 0 {
                    true
                } else if h[(j, j - 1)].norm() <= atol {
                    h[(j, j - 1)] = zero;
                    true
                } else {
                    false
                };
                if t[(j, j)].norm() < btol {
                    t[(j, j)] = zero;
                    if top {
                        // zero at the top of the block: rotate it down
                        for jch in j..ilast {
                            let (c, s, r) = givens(h[(jch, jch)], h[(jch + 1, jch)]);
                            h[(jch, jch)] = r;
                            h[(jch + 1, jch)] = zero;
                            rotate_rows(h, jch, jch + 1, jch + 1..n, c, s);
                            rotate_rows(t, jch, jch + 1, jch + 1..n, c, s);
                            if t[(jch + 1, jch + 1)].norm() >= btol {
                                if jch + 1 >= ilast {
                                    break 'find Step::Deflate;
                                }
                                break 'find Step::Sweep(jch + 1);
                            }
                            t[(jch + 1, jch + 1)] = zero;
                        }
                        break 'find Step::DeflateInfinite;
                    }
                    // interior zero: chase it to T[ilast, ilast]
                    for jch in j..ilast {
                        let (c, s, r) = givens(t[(jch, jch + 1)], t[(jch + 1, jch + 1)]);
                        t[(jch, jch + 1)] = r;
                        t[(jch + 1, jch + 1)] = zero;
                        if jch + 2 < n {
                            rotate_rows(t, jch, jch + 1, jch + 2..n, c, s);
                        }
                        rotate_rows(h, jch, jch + 1, jch - 1..n, c, s);
                        let (c, s, r) = givens(h[(jch + 1, jch)], h[(jch + 1, jch - 1)]);
                        h[(jch + 1, jch)] = r;
                        h[(jch + 1, jch - 1)] = zero;
                        rotate_cols(h, jch, jch - 1, 0..jch + 1, c, s);
                        rotate_cols(t, jch, jch - 1, 0..jch, c, s);
                    }
                    break 'find Step::DeflateInfinite;
                }
                if top {
                    break 'find Step::Sweep(j);
                }
            }
            unreachable!("block top always found at j = 0")
        };

        match step {
            Step::Deflate => {
                out[ilast] = EigenRatio { alpha: h[(ilast, ilast)], beta: t[(ilast, ilast)] };
                ilast -= 1;
                iiter = 0;
                eshift = zero;
            }
            Step::DeflateInfinite => {
                let (c, s, r) = givens(h[(ilast, ilast)], h[(ilast, ilast - 1)]);
                h[(ilast, ilast)] = r;
                h[(ilast, ilast - 1)] = zero;
                rotate_cols(h, ilast, ilast - 1, 0..ilast, c, s);
                rotate_cols(t, ilast, ilast - 1, 0..ilast, c, s);
                out[ilast] = EigenRatio { alpha: h[(ilast, ilast)], beta: t[(ilast, ilast)] };
                ilast -= 1;
                iiter = 0;
                eshift = zero;
            }
            Step::Sweep(ifirst) => {
                iiter += 1;
                total_iter += 1;
                if total_iter > max_iter {
                    return Err(Error::InvalidInput(format!(
                        "QZ iteration did not converge after {max_iter} sweeps"
                    )));
                }
                let shift = if iiter % 10 == 0 {
                    eshift += h[(ilast, ilast - 1)] / t[(ilast - 1, ilast - 1)];
                    eshift
                } else {
                    wilkinson_shift(h, t, ilast)
                };
                qz_sweep(h, t, ifirst, ilast, shift);
            }
        }
    }
    Ok(out)
}

fn qz_sweep(h: &mut CMatrix, t: &mut CMatrix, ifirst: usize, ilast: usize, shift: C64) {
    let n = h.nrows();
    let zero = C64::new(0.0, 0.0);
    let f = h[(ifirst, ifirst)] - shift * t[(ifirst, ifirst)];
    let g = h[(ifirst + 1, ifirst)];
    let (mut c, mut s, _) = givens(f, g);
    for j in ifirst..ilast {
        if j > ifirst {
            let (cc, ss, r) = givens(h[(j, j - 1)], h[(j + 1, j - 1)]);
            h[(j, j - 1)] = r;
            h[(j + 1, j - 1)] = zero;
            c = cc;
            s = ss;
        }
        rotate_rows(h, j, j + 1, j..n, c, s);
        rotate_rows(t, j, j + 1, j..n, c, s);
        let (cc, ss, r) = givens(t[(j + 1, j + 1)], t[(j + 1, j)]);
        t[(j + 1, j + 1)] = r;
        t[(j + 1, j)] = zero;
        rotate_cols(h, j + 1, j, 0..(j + 3).min(ilast + 1), cc, ss);
        rotate_cols(t, j + 1, j, 0..j + 1, cc, ss);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SeededStream;

    fn real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(rows, cols, &data.iter().map(|&x| C64::from(x)).collect::<Vec<_>>())
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn random(n: usize, seed: u64) -> CMatrix {
        CMatrix::from_vec(n, n, SeededStream::new(seed).gaussian_complex(n * n))
    }

    /// Greedy nearest-neighbour matching distance between two multisets.
    fn match_distance(a: &[C64], b: &[C64]) -> f64 {
        assert_eq!(a.len(), b.len());
        let mut used = vec![false; b.len()];
        let mut worst: f64 = 0.0;
        for x in a {
            let (k, d) = b
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .map(|(k, y)| (k, (x - y).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .unwrap();
            used[k] = true;
            worst = worst.max(d);
        }
        worst
    }

    #[test]
    fn diagonal_pencil() {
        let a = real(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let b = CMatrix::identity(2, 2);
        let ev = sorted(generalized_eigenvalues(&a, &b).unwrap());
        assert!((ev[0] - C64::from(1.0)).norm() < 1e-14);
        assert!((ev[1] - C64::from(2.0)).norm() < 1e-14);
    }

    #[test]
    fn swap_matrix() {
        let a = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let ev = sorted(generalized_eigenvalues(&a, &CMatrix::identity(2, 2)).unwrap());
        assert!((ev[0] - C64::from(-1.0)).norm() < 1e-14);
        assert!((ev[1] - C64::from(1.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_b_drops_infinite_eigenvalue() {
        let a = CMatrix::identity(2, 2);
        let b = real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let ev = generalized_eigenvalues(&a, &b).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0] - C64::from(1.0)).norm() < 1e-14);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        assert!(generalized_eigenvalues(&CMatrix::zeros(2, 2), &CMatrix::zeros(3, 3)).is_err());
        assert!(generalized_eigenvalues(&CMatrix::zeros(2, 3), &CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn empty_pencil() {
        assert!(generalized_eigenvalues(&CMatrix::zeros(0, 0), &CMatrix::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn identity_b_matches_standard_eigenvalues() {
        for (n, seed) in [(1, 1), (3, 2), (10, 3), (25, 4), (50, 5)] {
            let a = random(n, seed);
            let ours = generalized_eigenvalues(&a, &CMatrix::identity(n, n)).unwrap();
            let reference: Vec<C64> = a.clone().schur().eigenvalues().unwrap().iter().copied().collect();
            assert!(match_distance(&ours, &reference) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn invertible_b_matches_reduced_problem() {
        for (n, seed) in [(4, 7), (12, 8), (30, 9)] {
            let a = random(n, seed);
            let b = random(n, seed + 100);
            let ours = generalized_eigenvalues(&a, &b).unwrap();
            let reduced = b.clone().try_inverse().unwrap() * &a;
            let reference: Vec<C64> = reduced.schur().eigenvalues().unwrap().iter().copied().collect();
            let scale = reference.iter().map(|z| z.norm()).fold(1.0, f64::max);
            assert!(match_distance(&ours, &reference) < 1e-8 * scale, "n = {n}");
            // residual check: det(A - λB) small relative to sizes
            for lam in &ours {
                let m = &a - &b * *lam;
                let s = crate::kernel::singular_values(&m);
                assert!(s.last().unwrap() / s[0] < 1e-10);
            }
        }
    }

    #[test]
    fn rank_deficient_b_keeps_finite_part() {
        // B = diag(1, 1, 0, 0) mixed by unitary-ish transforms; two finite eigenvalues
        let n = 4;
        let q = random(n, 21).qr().q();
        let z = random(n, 22).qr().q();
        let a0 = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::from([3.0, -1.5, 2.0, 5.0][i])
            } else if j > i {
                C64::new(0.3, 0.1 * (i + j) as f64)
            } else {
                C64::from(0.0)
            }
        });
        let b0 = CMatrix::from_fn(n, n, |i, j| {
            if i == j && i < 2 {
                C64::from(1.0)
            } else if j > i && i < 2 {
                C64::from(0.5)
            } else {
                C64::from(0.0)
            }
        });
        let a = &q * a0 * &z;
        let b = &q * b0 * &z;
        let ev = sorted(generalized_eigenvalues(&a, &b).unwrap());
        assert_eq!(ev.len(), 2);
        assert!((ev[0] - C64::from(-1.5)).norm() < 1e-12);
        assert!((ev[1] - C64::from(3.0)).norm() < 1e-12);
    }

    #[test]
    fn companion_pencil_recovers_polynomial_roots() {
        // roots 0.5, -0.25, 2, 1+i of a monic quartic via companion pencil with
        // a leading coefficient of zero in an extra dimension (infinite eigenvalue)
        let roots = [C64::from(0.5), C64::from(-0.25), C64::from(2.0), C64::new(1.0, 1.0)];
        // coefficients of prod (z - r), highest first
        let mut coeffs = vec![C64::from(1.0)];
        for r in roots {
            let mut next = vec![C64::from(0.0); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k] += *c;
                next[k + 1] -= *c * r;
            }
            coeffs = next;
        }
        // pad with a zero leading coefficient: degree-5 pencil, one infinite eigenvalue
        let mut padded = vec![C64::from(0.0)];
        padded.extend(coeffs);
        let n = padded.len() - 1;
        let mut a = CMatrix::zeros(n, n);
        let mut b = CMatrix::identity(n, n);
        b[(0, 0)] = padded[0];
        for k in 0..n {
            a[(0, k)] = -padded[k + 1];
        }
        for k in 1..n {
            a[(k, k - 1)] = C64::from(1.0);
        }
        let ev = generalized_eigenvalues(&a, &b).unwrap();
        assert_eq!(ev.len(), 4);
        assert!(match_distance(&ev, &roots) < 1e-12);
    }
}
