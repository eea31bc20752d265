use num_rational::Ratio;
use serde::Serialize;

use super::RootedMap;
use crate::error::{Error, Result};

/// A curvature value `coef · π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Curvature {
    pub numer: i64,
    pub denom: i64,
}

impl Curvature {
    pub fn ratio(&self) -> Ratio<i64> {
        Ratio::new(self.numer, self.denom)
    }

    pub fn to_f64(&self) -> f64 {
        std::f64::consts::PI * self.numer as f64 / self.denom as f64
    }
}

/// Discrete curvature `2π(6 − q)/q` of a vertex of degree `q`, as a rational multiple of π.
pub fn curvature(q: i64) -> Result<Curvature> {
    if q <= 0 {
        return Err(Error::Domain(format!("degree {q} must be positive")));
    }
    let r = Ratio::new(2 * (6 - q), q);
    Ok(Curvature { numer: *r.numer(), denom: *r.denom() })
}

/// `Σ_v (6 − q_v)` for a closed sphere triangulation. Always 12.
pub fn gauss_bonnet_defect(map: &RootedMap) -> Result<i64> {
    if !map.is_closed() {
        return Err(Error::Domain("map has a boundary".into()));
    }
    map.validate()?;
    Ok(map.vertices().map(|v| 6 - map.degree(v) as i64).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curvature_values() {
        assert_eq!(curvature(6).unwrap().ratio(), Ratio::new(0, 1));
        assert_eq!(curvature(3).unwrap().ratio(), Ratio::new(2, 1));
        assert_eq!(curvature(12).unwrap().ratio(), Ratio::new(-1, 1));
        assert!(curvature(0).is_err());
    }

    #[test]
    fn platonic_defects() {
        assert_eq!(gauss_bonnet_defect(&RootedMap::tetrahedron()).unwrap(), 12);
        assert_eq!(gauss_bonnet_defect(&RootedMap::octahedron()).unwrap(), 12);
        let e = RootedMap::new_edge_map(super::super::MapMode::General);
        assert!(gauss_bonnet_defect(&e).is_err());
    }
}
