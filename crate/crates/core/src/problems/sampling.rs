use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernel::SeededStream;
use crate::model::{DomainSpec, TargetGrid};
use crate::C64;

/// Point counts and seed of a generated sampling set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub interior: usize,
    #[serde(default)]
    pub boundary: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GridSpec {
    pub fn new(interior: usize, boundary: usize, seed: u64) -> Self {
        Self { interior, boundary, seed }
    }
}

/// Regular lattice of cell centres with spacing `h = 2r / k`, clipped so that
/// every point keeps a margin of `h / 2` from the boundary.
fn lattice(center: C64, radius: f64, k: usize, half: bool) -> (Vec<C64>, f64) {
    let h = 2.0 * radius / k as f64;
    let rows = if half { k / 2 } else { k };
    let mut pts = Vec::new();
    for j in 0..rows {
        let y = if half { (j as f64 + 0.5) * h } else { -radius + (j as f64 + 0.5) * h };
        for i in 0..k {
            let x = -radius + (i as f64 + 0.5) * h;
            let p = C64::new(x, y);
            if p.norm() <= radius - 0.5 * h && (!half || y >= 0.5 * h) {
                pts.push(center + p);
            }
        }
    }
    (pts, h)
}

fn interior_points(center: C64, radius: f64, n: usize, half: bool, stream: &mut SeededStream) -> Vec<C64> {
    if n == 0 {
        return Vec::new();
    }
    let mut k = 2;
    let (mut pts, h) = loop {
        let (pts, h) = lattice(center, radius, k, half);
        if pts.len() >= n {
            break (pts, h);
        }
        k += 1;
    };
    // thin by dropping the points farthest from the centre
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|a, b| {
        (pts[*b] - center)
            .norm()
            .total_cmp(&(pts[*a] - center).norm())
            .then(b.cmp(a))
    });
    let mut drop = vec![false; pts.len()];
    for &i in &order[..pts.len() - n] {
        drop[i] = true;
    }
    let mut keep = drop.iter();
    pts.retain(|_| !*keep.next().unwrap());

    for p in pts.iter_mut() {
        let dx = (stream.next_uniform() - 0.5) * 0.5 * h;
        let dy = (stream.next_uniform() - 0.5) * 0.5 * h;
        let q = *p + C64::new(dx, dy);
        let rel = q - center;
        if rel.norm() < radius && (!half || rel.im > 0.0) {
            *p = q;
        }
    }
    pts
}

fn boundary_points(center: C64, radius: f64, n: usize, half: bool) -> Vec<C64> {
    if !half {
        return (0..n)
            .map(|k| center + C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64))
            .collect();
    }
    // arc from c + r to c - r, then the diameter back towards c + r
    let arc = PI * radius;
    let total = arc + 2.0 * radius;
    (0..n)
        .map(|k| {
            let s = total * k as f64 / n as f64;
            if s <= arc {
                center + C64::from_polar(radius, s / radius)
            } else {
                center + C64::new(-radius + (s - arc), 0.0)
            }
        })
        .collect()
}

/// Sampling set for a domain: equispaced points on an interval, or a
/// perturbed regular interior grid plus equispaced boundary points on a
/// disc or half disc.
pub fn make_grid(domain: &DomainSpec, n_interior: usize, n_boundary: usize, seed: u64) -> Result<TargetGrid> {
    domain.validate()?;
    if n_interior + n_boundary == 0 && !matches!(domain, DomainSpec::Explicit { .. }) {
        return Err(invalid("grid needs at least one point"));
    }
    match domain {
        DomainSpec::Interval { endpoints: [a, b] } => {
            if n_boundary != 0 {
                return Err(invalid("interval grids take no separate boundary points"));
            }
            let pts = if n_interior == 1 {
                vec![C64::from(0.5 * (a + b))]
            } else {
                (0..n_interior)
                    .map(|k| {
                        let t = k as f64 / (n_interior - 1) as f64;
                        C64::from(a + (b - a) * t)
                    })
                    .collect()
            };
            TargetGrid::new(pts, domain.clone())
        }
        DomainSpec::Disc { center, radius } | DomainSpec::HalfDisc { center, radius } => {
            let half = matches!(domain, DomainSpec::HalfDisc { .. });
            let mut stream = SeededStream::new(seed);
            let mut pts = interior_points(*center, *radius, n_interior, half, &mut stream);
            pts.extend(boundary_points(*center, *radius, n_boundary, half));
            TargetGrid::new(pts, domain.clone())
        }
        DomainSpec::Explicit { points } => TargetGrid::explicit(points.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_counts_and_boundary() {
        let g = make_grid(&DomainSpec::disc(C64::from(0.0), 1.0), 300, 100, 7).unwrap();
        assert_eq!(g.len(), 400);
        assert!(g.points().iter().all(|z| z.norm() <= 1.0 + 1e-14));
        let on_circle = g.points().iter().filter(|z| (z.norm() - 1.0).abs() < 1e-14).count();
        assert_eq!(on_circle, 100);
    }

    #[test]
    fn shifted_disc() {
        let c = C64::new(2.0, -1.0);
        let g = make_grid(&DomainSpec::disc(c, 0.5), 50, 20, 1).unwrap();
        assert_eq!(g.len(), 70);
        assert!(g.points().iter().all(|z| (z - c).norm() <= 0.5 + 1e-14));
    }

    #[test]
    fn interval_is_equidistant() {
        let g = make_grid(&DomainSpec::interval(-1.0, 1.0), 100, 0, 0).unwrap();
        assert_eq!(g.len(), 100);
        assert_eq!(g.points()[0], C64::from(-1.0));
        assert_eq!(g.points()[99], C64::from(1.0));
        let h = 2.0 / 99.0;
        for w in g.points().windows(2) {
            assert!(((w[1] - w[0]).re - h).abs() < 1e-15);
        }
        assert!(make_grid(&DomainSpec::interval(-1.0, 1.0), 10, 2, 0).is_err());
    }

    #[test]
    fn half_disc_upper() {
        let g = make_grid(&DomainSpec::half_disc(C64::from(0.0), 2.0), 200, 60, 3).unwrap();
        assert_eq!(g.len(), 260);
        assert!(g.points().iter().all(|z| z.im >= 0.0 && z.norm() <= 2.0 + 1e-14));
        // part of the boundary lies on the diameter
        assert!(g.points()[200..].iter().any(|z| z.im == 0.0 && z.re.abs() < 2.0));
    }

    #[test]
    fn deterministic_and_seed_dependent() {
        let d = DomainSpec::disc(C64::from(0.0), 1.0);
        assert_eq!(make_grid(&d, 100, 10, 4).unwrap(), make_grid(&d, 100, 10, 4).unwrap());
        assert_ne!(make_grid(&d, 100, 10, 4).unwrap(), make_grid(&d, 100, 10, 5).unwrap());
    }

    #[test]
    fn zero_points_rejected() {
        assert!(make_grid(&DomainSpec::disc(C64::from(0.0), 1.0), 0, 0, 0).is_err());
        let g = make_grid(&DomainSpec::disc(C64::from(0.0), 1.0), 0, 8, 0).unwrap();
        assert_eq!(g.len(), 8);
    }
}
