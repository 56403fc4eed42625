//! Discrete line congruences: lattice maps to lines with intersecting neighbors.

use nalgebra::DMatrix;

use crate::consistency::{run_consistency, ConsistencyReport, CubeData, CubeSystem};
use crate::error::{Error, Result};
use crate::grid::{propagate_transform, shifted, Grid};
use crate::pseudo_euclid::{
    singular_values, smallest_right_singular, subspace_distance, SignedVector, Subspace,
};

#[derive(Clone, Debug)]
pub struct ProjectiveLine {
    span: Subspace,
}

impl ProjectiveLine {
    pub fn new(span: Subspace) -> Result<Self> {
        if span.dim() != 2 {
            return Err(Error::Invalid(format!("a line needs a 2-dimensional span, got {}", span.dim())));
        }
        Ok(ProjectiveLine { span })
    }

    pub fn through(a: &SignedVector, b: &SignedVector, tol: f64) -> Result<Self> {
        ProjectiveLine::new(Subspace::span(&[a.clone(), b.clone()], tol)?)
    }

    pub fn span(&self) -> &Subspace {
        &self.span
    }

    pub fn into_span(self) -> Subspace {
        self.span
    }

    /// Point `cos t · b1 + sin t · b2` of the stored orthonormal basis.
    pub fn point(&self, t: f64) -> SignedVector {
        &self.span.vector(0).scaled(t.cos()) + &self.span.vector(1).scaled(t.sin())
    }

    pub fn contains(&self, v: &SignedVector, tol: f64) -> bool {
        self.span.contains(v, tol)
    }

    /// Sine of the largest principal angle between the two spans.
    pub fn distance(&self, other: &ProjectiveLine) -> f64 {
        subspace_distance(&self.span, &other.span)
    }
}

fn joint(l1: &ProjectiveLine, l2: &ProjectiveLine) -> DMatrix<f64> {
    let (a, b) = (l1.span.basis_matrix(), l2.span.basis_matrix());
    let n = a.nrows();
    let mut m = DMatrix::zeros(n, 4);
    m.view_mut((0, 0), (n, 2)).copy_from(a);
    m.view_mut((0, 2), (n, 2)).copy_from(b);
    m
}

/// How far two lines are from meeting: `σ4 / σ1` of the joint basis.
pub fn intersection_residual(l1: &ProjectiveLine, l2: &ProjectiveLine) -> f64 {
    let s = singular_values(&joint(l1, l2));
    if s.len() < 4 || s[0] == 0.0 {
        return 0.0;
    }
    s[3] / s[0]
}

#[derive(Clone, Debug)]
pub struct LineIntersection {
    pub intersect: bool,
    pub residual: f64,
    pub point: Option<SignedVector>,
}

pub fn lines_intersect(l1: &ProjectiveLine, l2: &ProjectiveLine, tol: f64) -> Result<LineIntersection> {
    if l1.span.space() != l2.span.space() {
        return Err(Error::SpaceMismatch(l1.span.space().to_string(), l2.span.space().to_string()));
    }
    if l1.distance(l2) <= tol {
        return Err(Error::Coincident);
    }
    let residual = intersection_residual(l1, l2);
    if residual > tol {
        return Ok(LineIntersection {
            intersect: false,
            residual,
            point: None,
        });
    }
    let (_, y) = smallest_right_singular(&joint(l1, l2), 1);
    let a = y.view((0, 0), (2, 1)).into_owned();
    let p = l1.span.from_local(&a.column(0).into_owned());
    Ok(LineIntersection {
        intersect: true,
        residual,
        point: Some(p.unit()),
    })
}

/// Intersection point of two lines, or an error when they are skew or equal.
pub fn meet(l1: &ProjectiveLine, l2: &ProjectiveLine, tol: f64) -> Result<SignedVector> {
    let r = lines_intersect(l1, l2, tol)?;
    r.point.ok_or(Error::NoIntersection(r.residual))
}

/// Normal (in local coordinates of `v`) of the hyperplane spanned by three lines.
fn local_hyperplane(v: &Subspace, lines: [&ProjectiveLine; 3], tol: f64) -> Result<nalgebra::DVector<f64>> {
    let rows: Vec<_> = lines
        .iter()
        .flat_map(|l| l.span.basis())
        .map(|b| v.local(&b).normalize().transpose())
        .collect();
    let m = DMatrix::from_rows(&rows);
    let s = singular_values(&m);
    let k = v.dim() - 1;
    if s.len() <= k - 1 || s[k - 1] <= tol * s[0] {
        return Err(Error::Degenerate("three lines of a face do not span a 3-space".into()));
    }
    let (_, n) = smallest_right_singular(&m, 1);
    Ok(n.column(0).into_owned())
}

/// The line meeting `ℓ12, ℓ13, ℓ23` inside `span(ℓ, ℓ1, ℓ2, ℓ3)`.
#[allow(clippy::too_many_arguments)]
pub fn complete_congruence_hexahedron(
    l: &ProjectiveLine,
    l1: &ProjectiveLine,
    l2: &ProjectiveLine,
    l3: &ProjectiveLine,
    l12: &ProjectiveLine,
    l13: &ProjectiveLine,
    l23: &ProjectiveLine,
    tol: f64,
) -> Result<ProjectiveLine> {
    let pairs: [(&str, &ProjectiveLine, &ProjectiveLine); 9] = [
        ("l, l1", l, l1),
        ("l, l2", l, l2),
        ("l, l3", l, l3),
        ("l1, l12", l1, l12),
        ("l2, l12", l2, l12),
        ("l1, l13", l1, l13),
        ("l3, l13", l3, l13),
        ("l2, l23", l2, l23),
        ("l3, l23", l3, l23),
    ];
    for (name, a, b) in pairs {
        let r = intersection_residual(a, b);
        if r > tol {
            return Err(Error::Invalid(format!("lines {name} do not intersect (residual {r:e})")));
        }
    }
    let mut vs = Vec::new();
    for x in [l, l1, l2, l3] {
        vs.extend(x.span.basis());
    }
    let v = Subspace::span(&vs, tol)?;
    if v.dim() != 5 {
        return Err(Error::Degenerate(format!(
            "initial lines span a {}-dimensional space instead of 5",
            v.dim()
        )));
    }
    let normals = [
        local_hyperplane(&v, [l1, l12, l13], tol)?,
        local_hyperplane(&v, [l2, l12, l23], tol)?,
        local_hyperplane(&v, [l3, l13, l23], tol)?,
    ];
    let m = DMatrix::from_rows(&normals.iter().map(|n| n.transpose()).collect::<Vec<_>>());
    let s = singular_values(&m);
    if s[2] <= tol * s[0] {
        return Err(Error::Degenerate("the three 3-spaces do not meet in a line".into()));
    }
    let (_, y) = smallest_right_singular(&m, 2);
    let basis = v.basis_matrix() * y;
    Ok(ProjectiveLine {
        span: Subspace::from_columns(v.space(), &basis, tol)?,
    })
}

/// Intersections `ℓ(u) ∩ ℓ(u + e_dir)`; the grid shrinks by one in direction `dir`.
pub fn focal_net(c: &Grid<ProjectiveLine>, dir: usize, tol: f64) -> Result<Grid<SignedVector>> {
    if dir >= c.dims() || c.extents()[dir] < 2 {
        return Err(Error::Invalid(format!("no edges in direction {dir}")));
    }
    let mut ext = c.extents().to_vec();
    ext[dir] -= 1;
    Grid::try_from_fn(&ext, |u| {
        let a = c.require(u)?;
        let b = c.require(&shifted(u, dir))?;
        meet(a, b, tol).map(Some)
    })
}

/// F-transform of a congruence from seed lines on the coordinate axes.
pub fn congruence_f_transform(
    c: &Grid<ProjectiveLine>,
    seed: &Grid<ProjectiveLine>,
    tol: f64,
) -> Result<Grid<ProjectiveLine>> {
    for (u, s) in seed.iter() {
        if let (Some(s), Some(base)) = (s, c.get(&u)) {
            if u.iter().filter(|&&k| k > 0).count() <= 1 {
                meet(base, s, tol).map_err(|e| e.at(&u))?;
            }
        }
    }
    propagate_transform(c, seed, |l, li, lj, lp, lij, lip, ljp| {
        complete_congruence_hexahedron(l, li, lj, lp, lij, lip, ljp, tol)
    })
}

#[derive(Clone, Copy, Debug)]
pub struct CongruenceSystem {
    pub tol: f64,
}

impl CubeSystem for CongruenceSystem {
    type Value = ProjectiveLine;

    fn complete(
        &self,
        l: &ProjectiveLine,
        l1: &ProjectiveLine,
        l2: &ProjectiveLine,
        l3: &ProjectiveLine,
        l12: &ProjectiveLine,
        l13: &ProjectiveLine,
        l23: &ProjectiveLine,
    ) -> Result<ProjectiveLine> {
        complete_congruence_hexahedron(l, l1, l2, l3, l12, l13, l23, self.tol)
    }

    fn distance(&self, a: &ProjectiveLine, b: &ProjectiveLine) -> f64 {
        a.distance(b)
    }
}

pub fn check_congruence_consistency(
    data: &CubeData<ProjectiveLine>,
    tol: f64,
) -> Result<ConsistencyReport<ProjectiveLine>> {
    run_consistency(&CongruenceSystem { tol }, data)
}

/// Largest neighbor-intersection residual of a congruence, with its edge.
pub fn max_intersection_residual(c: &Grid<ProjectiveLine>) -> (f64, Option<(Vec<usize>, usize)>) {
    let mut worst = (0.0, None);
    for i in 0..c.dims() {
        for u in c.edge_bases(i) {
            if let (Some(a), Some(b)) = (c.get(&u), c.get(&shifted(&u, i))) {
                let r = intersection_residual(a, b);
                if r > worst.0 {
                    worst = (r, Some((u, i)));
                }
            }
        }
    }
    worst
}
