//! Multidimensional consistency experiments for 3D completion rules.
//!
//! Vertices of the unit m-cube are addressed by bit masks. Initial data sits
//! on vertices with at most two bits set; every other vertex is reached from
//! each 3-subset of its bits, and the routes are compared.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A 3D completion rule together with a distance for comparing results.
pub trait CubeSystem {
    type Value: Clone;

    /// Returns the vertex opposite `f` in the cube spanned by three directions.
    #[allow(clippy::too_many_arguments)]
    fn complete(
        &self,
        f: &Self::Value,
        f1: &Self::Value,
        f2: &Self::Value,
        f3: &Self::Value,
        f12: &Self::Value,
        f13: &Self::Value,
        f23: &Self::Value,
    ) -> Result<Self::Value>;

    fn distance(&self, a: &Self::Value, b: &Self::Value) -> f64;
}

#[derive(Clone, Debug)]
pub struct CubeData<T> {
    dim: usize,
    values: BTreeMap<u32, T>,
}

impl<T> CubeData<T> {
    pub fn new(dim: usize) -> Self {
        assert!((3..=16).contains(&dim), "cube dimension must be between 3 and 16");
        CubeData {
            dim,
            values: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stores the value at the vertex reached by stepping along `dirs`.
    pub fn insert(&mut self, dirs: &[usize], value: T) {
        self.values.insert(mask_of(dirs), value);
    }

    pub fn get(&self, dirs: &[usize]) -> Option<&T> {
        self.values.get(&mask_of(dirs))
    }

    pub fn get_mask(&self, mask: u32) -> Option<&T> {
        self.values.get(&mask)
    }
}

pub fn mask_of(dirs: &[usize]) -> u32 {
    dirs.iter().fold(0, |m, &d| m | (1 << d))
}

pub fn dirs_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|k| mask & (1 << k) != 0).collect()
}

fn vertex_of(mask: u32, dim: usize) -> Vec<usize> {
    (0..dim).map(|k| ((mask >> k) & 1) as usize).collect()
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport<T> {
    /// All routes to the top vertex, one per 3-subset of directions.
    pub candidates: Vec<T>,
    /// Largest pairwise distance between routes, over every vertex of degree four or more.
    pub max_deviation: f64,
    /// The value kept at every vertex (the first route).
    pub vertices: BTreeMap<u32, T>,
}

pub fn run_consistency<S: CubeSystem>(system: &S, data: &CubeData<S::Value>) -> Result<ConsistencyReport<S::Value>> {
    let m = data.dim;
    let full = (1u32 << m) - 1;
    let mut vertices = BTreeMap::new();
    for mask in 0..=full {
        if mask.count_ones() <= 2 {
            let v = data.get_mask(mask).ok_or_else(|| {
                Error::Invalid(format!("missing initial value at cube vertex {:?}", vertex_of(mask, m)))
            })?;
            vertices.insert(mask, v.clone());
        }
    }
    let mut max_deviation = 0.0_f64;
    let mut top = Vec::new();
    for k in 3..=m as u32 {
        for mask in (0..=full).filter(|x| x.count_ones() == k) {
            let bits = dirs_of(mask);
            let mut routes = Vec::new();
            for a in 0..bits.len() {
                for b in a + 1..bits.len() {
                    for c in b + 1..bits.len() {
                        let (da, db, dc) = (1 << bits[a], 1 << bits[b], 1 << bits[c]);
                        let base = mask & !(da | db | dc);
                        let at = |x: u32| &vertices[&x];
                        let v = system
                            .complete(
                                at(base),
                                at(base | da),
                                at(base | db),
                                at(base | dc),
                                at(base | da | db),
                                at(base | da | dc),
                                at(base | db | dc),
                            )
                            .map_err(|e| e.at(&vertex_of(mask, m)))?;
                        routes.push(v);
                    }
                }
            }
            for x in 0..routes.len() {
                for y in x + 1..routes.len() {
                    max_deviation = max_deviation.max(system.distance(&routes[x], &routes[y]));
                }
            }
            vertices.insert(mask, routes[0].clone());
            if mask == full {
                top = routes;
            }
        }
    }
    Ok(ConsistencyReport {
        candidates: top,
        max_deviation,
        vertices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Discrete "additive" rule, trivially consistent.
    struct Additive;

    impl CubeSystem for Additive {
        type Value = f64;
        fn complete(&self, f: &f64, a: &f64, b: &f64, c: &f64, ab: &f64, ac: &f64, bc: &f64) -> Result<f64> {
            Ok(ab + ac + bc - a - b - c + f)
        }
        fn distance(&self, a: &f64, b: &f64) -> f64 {
            (a - b).abs()
        }
    }

    /// A rule that is not consistent.
    struct Skewed;

    impl CubeSystem for Skewed {
        type Value = f64;
        fn complete(&self, _f: &f64, a: &f64, b: &f64, c: &f64, _ab: &f64, _ac: &f64, _bc: &f64) -> Result<f64> {
            Ok(a * 2.0 + b * b + c)
        }
        fn distance(&self, a: &f64, b: &f64) -> f64 {
            (a - b).abs()
        }
    }

    fn data(dim: usize) -> CubeData<f64> {
        let mut d = CubeData::new(dim);
        let full = (1u32 << dim) - 1;
        for mask in (0..=full).filter(|m| m.count_ones() <= 2) {
            let dirs = dirs_of(mask);
            d.insert(&dirs, dirs.iter().map(|&k| (k + 1) as f64).sum());
        }
        d
    }

    #[test]
    fn route_counts() {
        let r4 = run_consistency(&Additive, &data(4)).unwrap();
        assert_eq!(r4.candidates.len(), 4);
        assert_eq!(r4.max_deviation, 0.0);
        assert_eq!(r4.candidates[0], 10.0);
        let r5 = run_consistency(&Additive, &data(5)).unwrap();
        assert_eq!(r5.candidates.len(), 10);
        assert_eq!(r5.vertices.len(), 32);
    }

    #[test]
    fn inconsistent_rule_is_detected() {
        assert!(run_consistency(&Skewed, &data(4)).unwrap().max_deviation > 0.0);
    }

    #[test]
    fn missing_initial_values_are_reported() {
        let mut d = CubeData::new(4);
        d.insert(&[], 0.0);
        let err = run_consistency(&Additive, &d).unwrap_err();
        assert!(err.to_string().contains("missing initial value"));
    }
}
