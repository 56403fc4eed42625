//! Dense storage over a box in Z^m with an explicit absent marker.
//! Flat order has the first direction varying fastest.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    extents: Vec<usize>,
    values: Vec<Option<T>>,
}

impl<T> Grid<T> {
    pub fn new(extents: &[usize]) -> Self {
        let n = extents.iter().product();
        Grid {
            extents: extents.to_vec(),
            values: std::iter::repeat_with(|| None).take(n).collect(),
        }
    }

    pub fn from_fn(extents: &[usize], mut f: impl FnMut(&[usize]) -> Option<T>) -> Self {
        let mut g = Grid::new(extents);
        for k in 0..g.values.len() {
            let idx = g.multi_index(k);
            g.values[k] = f(&idx);
        }
        g
    }

    pub fn try_from_fn(extents: &[usize], mut f: impl FnMut(&[usize]) -> Result<Option<T>>) -> Result<Self> {
        let mut g = Grid::new(extents);
        for k in 0..g.values.len() {
            let idx = g.multi_index(k);
            g.values[k] = f(&idx).map_err(|e| e.at(&idx))?;
        }
        Ok(g)
    }

    /// Builds from flat values in storage order.
    pub fn from_values(extents: &[usize], values: Vec<Option<T>>) -> Result<Self> {
        let n: usize = extents.iter().product();
        if n != values.len() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: values.len(),
            });
        }
        Ok(Grid {
            extents: extents.to_vec(),
            values,
        })
    }

    pub fn dims(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn flat_index(&self, idx: &[usize]) -> Option<usize> {
        if idx.len() != self.extents.len() {
            return None;
        }
        let mut k = 0;
        let mut stride = 1;
        for (&i, &n) in idx.iter().zip(&self.extents) {
            if i >= n {
                return None;
            }
            k += i * stride;
            stride *= n;
        }
        Some(k)
    }

    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        self.extents
            .iter()
            .map(|&n| {
                let i = k % n;
                k /= n;
                i
            })
            .collect()
    }

    pub fn get(&self, idx: &[usize]) -> Option<&T> {
        self.flat_index(idx).and_then(|k| self.values[k].as_ref())
    }

    pub fn set(&mut self, idx: &[usize], value: T) {
        let k = self.flat_index(idx).expect("index in range");
        self.values[k] = Some(value);
    }

    pub fn clear(&mut self, idx: &[usize]) {
        if let Some(k) = self.flat_index(idx) {
            self.values[k] = None;
        }
    }

    /// Value at `idx`, or an error naming the cell when absent.
    pub fn require(&self, idx: &[usize]) -> Result<&T> {
        self.get(idx)
            .ok_or_else(|| Error::Invalid(format!("missing value at {idx:?}")))
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.values.len()).map(move |k| self.multi_index(k))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, Option<&T>)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, v)| (self.multi_index(k), v.as_ref()))
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            extents: self.extents.clone(),
            values: self.values.iter().map(|v| v.as_ref().map(&mut f)).collect(),
        }
    }

    pub fn try_map<U>(&self, mut f: impl FnMut(&[usize], &T) -> Result<U>) -> Result<Grid<U>> {
        let mut out = Vec::with_capacity(self.values.len());
        for (k, v) in self.values.iter().enumerate() {
            out.push(match v {
                Some(v) => {
                    let idx = self.multi_index(k);
                    Some(f(&idx, v).map_err(|e| e.at(&idx))?)
                }
                None => None,
            });
        }
        Ok(Grid {
            extents: self.extents.clone(),
            values: out,
        })
    }

    /// Base corners `u` of the elementary quads in directions `i`, `j`.
    pub fn quad_bases(&self, i: usize, j: usize) -> Vec<Vec<usize>> {
        self.indices()
            .filter(|u| u[i] + 1 < self.extents[i] && u[j] + 1 < self.extents[j])
            .collect()
    }

    /// Base corners of edges in direction `i`.
    pub fn edge_bases(&self, i: usize) -> Vec<Vec<usize>> {
        self.indices().filter(|u| u[i] + 1 < self.extents[i]).collect()
    }

    /// Values at `(u, u+e_i, u+e_i+e_j, u+e_j)` when all present.
    pub fn quad(&self, u: &[usize], i: usize, j: usize) -> Option<[&T; 4]> {
        let ui = shifted(u, i);
        let uj = shifted(u, j);
        let uij = shifted(&ui, j);
        Some([self.get(u)?, self.get(&ui)?, self.get(&uij)?, self.get(&uj)?])
    }
}

pub fn shifted(u: &[usize], i: usize) -> Vec<usize> {
    let mut v = u.to_vec();
    v[i] += 1;
    v
}

pub fn unshifted(u: &[usize], i: usize) -> Vec<usize> {
    let mut v = u.to_vec();
    v[i] -= 1;
    v
}

/// Completes a grid from its coordinate hypersurfaces: every cell with at least
/// three positive coordinates is produced from the cube spanned by its first
/// three positive directions, in order of increasing coordinate sum.
///
/// `complete(f, f1, f2, f3, f12, f13, f23)` returns `f123`.
pub fn fill_from_coordinate_surfaces<T: Clone>(
    grid: &mut Grid<T>,
    mut complete: impl FnMut(&T, &T, &T, &T, &T, &T, &T) -> Result<T>,
) -> Result<()> {
    let mut order: Vec<Vec<usize>> = grid.indices().collect();
    order.sort_by_key(|u| u.iter().sum::<usize>());
    for u in order {
        let dirs: Vec<usize> = (0..u.len()).filter(|&k| u[k] > 0).collect();
        if dirs.len() < 3 {
            if grid.get(&u).is_none() {
                return Err(Error::Invalid(format!("missing initial value at {u:?}")));
            }
            continue;
        }
        let (a, b, c) = (dirs[0], dirs[1], dirs[2]);
        let w = unshifted(&unshifted(&unshifted(&u, a), b), c);
        let at = |x: &[usize]| grid.require(x).cloned();
        let mut get = || -> Result<T> {
            let wa = shifted(&w, a);
            let wb = shifted(&w, b);
            let wc = shifted(&w, c);
            complete(
                &at(&w)?,
                &at(&wa)?,
                &at(&wb)?,
                &at(&wc)?,
                &at(&shifted(&wa, b))?,
                &at(&shifted(&wa, c))?,
                &at(&shifted(&wb, c))?,
            )
        };
        let v = get().map_err(|e| e.at(&u))?;
        grid.set(&u, v);
    }
    Ok(())
}

/// Fills a transform layer treating the transform as one extra direction.
/// `seed` must hold values at all cells with at most one positive coordinate.
///
/// `complete(f, fi, fj, f_plus, fij, fi_plus, fj_plus)` returns `fij_plus`.
pub fn propagate_transform<T: Clone>(
    base: &Grid<T>,
    seed: &Grid<T>,
    mut complete: impl FnMut(&T, &T, &T, &T, &T, &T, &T) -> Result<T>,
) -> Result<Grid<T>> {
    if base.extents() != seed.extents() {
        return Err(Error::Invalid("seed and base grids have different extents".into()));
    }
    let mut out: Grid<T> = Grid::new(base.extents());
    let mut order: Vec<Vec<usize>> = base.indices().collect();
    order.sort_by_key(|u| u.iter().sum::<usize>());
    for u in order {
        let dirs: Vec<usize> = (0..u.len()).filter(|&k| u[k] > 0).collect();
        if dirs.len() < 2 {
            let v = seed
                .get(&u)
                .ok_or_else(|| Error::Invalid(format!("missing seed value at {u:?}")))?;
            out.set(&u, v.clone());
            continue;
        }
        let (i, j) = (dirs[0], dirs[1]);
        let w = unshifted(&unshifted(&u, i), j);
        let wi = shifted(&w, i);
        let wj = shifted(&w, j);
        let mut step = || -> Result<T> {
            complete(
                base.require(&w)?,
                base.require(&wi)?,
                base.require(&wj)?,
                out.require(&w)?,
                base.require(&u)?,
                out.require(&wi)?,
                out.require(&wj)?,
            )
        };
        let v = step().map_err(|e| e.at(&u))?;
        out.set(&u, v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_direction_varies_fastest() {
        let g = Grid::from_fn(&[3, 2], |u| Some(u[0] + 10 * u[1]));
        let flat: Vec<usize> = g.values().iter().map(|v| v.unwrap()).collect();
        assert_eq!(flat, vec![0, 1, 2, 10, 11, 12]);
        assert_eq!(g.flat_index(&[2, 1]), Some(5));
        assert_eq!(g.multi_index(4), vec![1, 1]);
        assert_eq!(g.flat_index(&[3, 0]), None);
    }

    #[test]
    fn quads_and_edges() {
        let g = Grid::from_fn(&[3, 3], |u| Some(u.to_vec()));
        assert_eq!(g.quad_bases(0, 1).len(), 4);
        assert_eq!(g.edge_bases(0).len(), 6);
        let q = g.quad(&[1, 1], 0, 1).unwrap();
        assert_eq!(*q[2], vec![2, 2]);
        assert!(g.quad(&[2, 1], 0, 1).is_none());
    }

    #[test]
    fn additive_fill_reproduces_linear_data() {
        // f(u) = sum of coordinates satisfies f123 = f12 + f13 + f23 - f1 - f2 - f3 + f
        let mut g = Grid::from_fn(&[3, 3, 3], |u| {
            (u.iter().filter(|&&c| c > 0).count() < 3).then(|| u.iter().sum::<usize>() as i64)
        });
        fill_from_coordinate_surfaces(&mut g, |f, a, b, c, ab, ac, bc| Ok(ab + ac + bc - a - b - c + f)).unwrap();
        for (u, v) in g.iter() {
            assert_eq!(*v.unwrap(), u.iter().sum::<usize>() as i64);
        }
    }

    #[test]
    fn transform_propagation_shifts_layers() {
        let base = Grid::from_fn(&[3, 4], |u| Some((u[0] + 2 * u[1]) as i64));
        let seed = Grid::from_fn(&[3, 4], |u| (u[0] == 0 || u[1] == 0).then(|| (u[0] + 2 * u[1]) as i64 + 7));
        let out = propagate_transform(&base, &seed, |f, fi, fj, fp, fij, fip, fjp| {
            let _ = (f, fi, fj);
            Ok(fip + fjp - fp + (fij - fi - fj + f))
        })
        .unwrap();
        for (u, v) in out.iter() {
            assert_eq!(*v.unwrap(), (u[0] + 2 * u[1]) as i64 + 7);
        }
    }

    #[test]
    fn missing_seed_is_reported() {
        let base = Grid::from_fn(&[2, 2], |_| Some(0i64));
        let seed: Grid<i64> = Grid::new(&[2, 2]);
        let err = propagate_transform(&base, &seed, |_, _, _, _, _, _, _| Ok(0)).unwrap_err();
        assert!(err.to_string().contains("missing seed"));
    }
}
