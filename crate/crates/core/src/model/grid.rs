use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::C64;

/// Region a target set is drawn from.
///
/// `HalfDisc` is the upper half (`Im z >= Im center`) of the disc, closed by
/// the horizontal diameter through the center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    Disc { center: C64, radius: f64 },
    HalfDisc { center: C64, radius: f64 },
    Interval { endpoints: [f64; 2] },
    Explicit { points: Vec<C64> },
}

impl DomainSpec {
    pub fn disc(center: C64, radius: f64) -> Self {
        DomainSpec::Disc { center, radius }
    }

    pub fn half_disc(center: C64, radius: f64) -> Self {
        DomainSpec::HalfDisc { center, radius }
    }

    pub fn interval(a: f64, b: f64) -> Self {
        DomainSpec::Interval { endpoints: [a, b] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Disc { center, radius } | DomainSpec::HalfDisc { center, radius } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(invalid(format!("radius must be positive, got {radius}")));
                }
                if !center.re.is_finite() || !center.im.is_finite() {
                    return Err(invalid("domain center must be finite"));
                }
            }
            DomainSpec::Interval { endpoints: [a, b] } => {
                if !a.is_finite() || !b.is_finite() || a == b {
                    return Err(invalid(format!("interval endpoints must be finite and distinct, got [{a}, {b}]")));
                }
            }
            DomainSpec::Explicit { points } => {
                if points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(invalid("explicit domain has non-finite points"));
                }
            }
        }
        Ok(())
    }

    /// Membership in the closed domain, enlarged by `tol`.
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        match self {
            DomainSpec::Disc { center, radius } => (z - center).norm() <= radius + tol,
            DomainSpec::HalfDisc { center, radius } => {
                (z - center).norm() <= radius + tol && z.im >= center.im - tol
            }
            DomainSpec::Interval { endpoints: [a, b] } => {
                let (lo, hi) = if a < b { (*a, *b) } else { (*b, *a) };
                z.im.abs() <= tol && z.re >= lo - tol && z.re <= hi + tol
            }
            DomainSpec::Explicit { points } => points.iter().any(|p| (p - z).norm() <= tol),
        }
    }

    /// Characteristic length used to scale membership tolerances.
    pub fn scale(&self) -> f64 {
        match self {
            DomainSpec::Disc { radius, .. } | DomainSpec::HalfDisc { radius, .. } => *radius,
            DomainSpec::Interval { endpoints: [a, b] } => (b - a).abs(),
            DomainSpec::Explicit { points } => points.iter().map(|z| z.norm()).fold(1.0, f64::max),
        }
    }
}

/// Finite sampling set: ordered, pairwise-distinct points from a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetGrid {
    points: Vec<C64>,
    domain: DomainSpec,
}

impl TargetGrid {
    pub fn new(points: Vec<C64>, domain: DomainSpec) -> Result<Self> {
        domain.validate()?;
        if points.is_empty() {
            return Err(invalid("target grid is empty"));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for (k, z) in points.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(invalid(format!("grid point {k} is not finite")));
            }
            // -0.0 and 0.0 compare equal, so canonicalize before hashing
            let key = ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits());
            if !seen.insert(key) {
                return Err(invalid(format!("grid point {k} = {z} is duplicated")));
            }
        }
        if !matches!(domain, DomainSpec::Explicit { .. }) {
            let tol = 1e-12 * domain.scale();
            if let Some((k, z)) = points.iter().enumerate().find(|(_, z)| !domain.contains(**z, tol)) {
                return Err(invalid(format!("grid point {k} = {z} lies outside the domain")));
            }
        }
        Ok(Self { points, domain })
    }

    /// Grid whose domain is the explicit point list itself.
    pub fn explicit(points: Vec<C64>) -> Result<Self> {
        let domain = DomainSpec::Explicit { points: points.clone() };
        Self::new(points, domain)
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates() {
        let pts = vec![C64::from(0.0), C64::from(0.5), C64::from(0.0)];
        assert!(TargetGrid::new(pts, DomainSpec::interval(-1.0, 1.0)).is_err());
        let pts = vec![C64::new(0.0, 0.0), C64::new(-0.0, 0.0)];
        assert!(TargetGrid::explicit(pts).is_err());
    }

    #[test]
    fn rejects_points_outside_domain() {
        let pts = vec![C64::from(0.0), C64::from(1.5)];
        assert!(TargetGrid::new(pts, DomainSpec::interval(-1.0, 1.0)).is_err());
        let pts = vec![C64::new(0.0, -0.1)];
        assert!(TargetGrid::new(pts, DomainSpec::half_disc(C64::from(0.0), 1.0)).is_err());
    }

    #[test]
    fn domain_validation() {
        assert!(DomainSpec::disc(C64::from(0.0), 0.0).validate().is_err());
        assert!(DomainSpec::interval(1.0, 1.0).validate().is_err());
        assert!(DomainSpec::half_disc(C64::from(0.0), 2.0).validate().is_ok());
    }

    #[test]
    fn domain_serializes_with_kind_tag() {
        let d = DomainSpec::disc(C64::new(1.0, -2.0), 3.0);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"kind":"disc","center":[1.0,-2.0],"radius":3.0}"#);
        let back: DomainSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
