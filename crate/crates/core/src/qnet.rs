//! Q-nets: lattice maps into projective space with planar elementary quads.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::consistency::{run_consistency, ConsistencyReport, CubeData, CubeSystem};
use crate::error::{Error, Result};
use crate::grid::{propagate_transform, Grid};
use crate::pseudo_euclid::{
    least_squares, projective_distance, rank_residual, singular_values, smallest_right_singular, SignedVector, Space,
    Subspace, E0,
};

/// Homogeneous coordinates `(x, 1)` of a point of R^3.
pub fn hom(x: &Vector3<f64>) -> SignedVector {
    SignedVector::raw(Space::Projective(4), DVector::from_column_slice(&[x.x, x.y, x.z, 1.0]))
}

/// Affine point of a homogeneous 4-vector; `None` at infinity.
pub fn dehom(p: &SignedVector, tol: f64) -> Option<Vector3<f64>> {
    let c = p.coords();
    if c.len() != 4 || c[3].abs() <= tol * c.amax() {
        return None;
    }
    Some(Vector3::new(c[0], c[1], c[2]) / c[3])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadCoefficients {
    pub c_ij: f64,
    pub c_ji: f64,
    pub rho_ij: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Planarity {
    pub planar: bool,
    /// Rank-3 residual of the four representatives.
    pub residual: f64,
    /// `f_ij - f = c_ij (f_j - f) + c_ji (f_i - f)` in the affine chart; absent
    /// when the quad is not planar, a point is at infinity in the chart, or
    /// `f, f_i, f_j` are collinear.
    pub coefficients: Option<QuadCoefficients>,
    /// `f, f_i, f_j` collinear, so the coefficients are not unique.
    pub degenerate: bool,
}

/// Coordinate that fixes the affine chart of a space.
fn chart_index(space: Space) -> usize {
    match space {
        Space::Lie | Space::Moebius => E0,
        _ => space.dim() - 1,
    }
}

fn check_spaces(pts: &[&SignedVector]) -> Result<Space> {
    let space = pts[0].space();
    for p in pts {
        if p.space() != space {
            return Err(Error::SpaceMismatch(space.to_string(), p.space().to_string()));
        }
    }
    Ok(space)
}

pub fn quad_planarity(
    f: &SignedVector,
    fi: &SignedVector,
    fij: &SignedVector,
    fj: &SignedVector,
    tol: f64,
) -> Result<Planarity> {
    let space = check_spaces(&[f, fi, fij, fj])?;
    let residual = rank_residual([f, fi, fij, fj].map(|p| p.coords()), 3);
    let planar = residual <= tol;
    let degenerate = rank_residual([f, fi, fj].map(|p| p.coords()), 2) <= tol;
    let mut coefficients = None;
    if planar && !degenerate {
        let k = chart_index(space);
        let affine: Option<Vec<DVector<f64>>> = [f, fi, fij, fj]
            .iter()
            .map(|p| {
                let c = p.coords();
                (c[k].abs() > tol * c.amax()).then(|| c / c[k])
            })
            .collect();
        if let Some(a) = affine {
            let m = DMatrix::from_columns(&[&a[3] - &a[0], &a[1] - &a[0]]);
            let rhs = &a[2] - &a[0];
            if let Some(sol) = least_squares(&m, &rhs, f64::EPSILON) {
                let (c_ij, c_ji) = (sol[0], sol[1]);
                coefficients = Some(QuadCoefficients {
                    c_ij,
                    c_ji,
                    rho_ij: 1.0 - c_ij - c_ji,
                });
            }
        }
    }
    Ok(Planarity {
        planar,
        residual,
        coefficients,
        degenerate,
    })
}

/// Unit normal (in local coordinates of `v`) of the hyperplane through three points.
fn local_plane(v: &Subspace, pts: [&SignedVector; 3], tol: f64) -> Result<DVector<f64>> {
    let rows: Vec<DVector<f64>> = pts.iter().map(|p| v.local(p).normalize()).collect();
    let m = DMatrix::from_rows(&rows.iter().map(|r| r.transpose()).collect::<Vec<_>>());
    let s = singular_values(&m);
    if s.len() < 3 || s[2] <= tol * s[0] {
        return Err(Error::Degenerate("three points of a face are collinear".into()));
    }
    let (_, n) = smallest_right_singular(&m, 1);
    Ok(n.column(0).into_owned())
}

/// The eighth vertex of an elementary hexahedron: the common point of the
/// planes through `(f1, f12, f13)`, `(f2, f12, f23)` and `(f3, f13, f23)`.
#[allow(clippy::too_many_arguments)]
pub fn complete_hexahedron(
    f: &SignedVector,
    f1: &SignedVector,
    f2: &SignedVector,
    f3: &SignedVector,
    f12: &SignedVector,
    f13: &SignedVector,
    f23: &SignedVector,
    tol: f64,
) -> Result<SignedVector> {
    check_spaces(&[f, f1, f2, f3, f12, f13, f23])?;
    for (i, j, a, b, ab) in [(1, 2, f1, f2, f12), (1, 3, f1, f3, f13), (2, 3, f2, f3, f23)] {
        let p = quad_planarity(f, a, ab, b, tol)?;
        if !p.planar {
            return Err(Error::NonPlanarQuad {
                i,
                j,
                residual: p.residual,
            });
        }
    }
    let v = Subspace::span(&[f.clone(), f1.clone(), f2.clone(), f3.clone()], tol)?;
    if v.dim() != 4 {
        return Err(Error::Degenerate("initial points do not span a projective 3-space".into()));
    }
    let normals = [
        local_plane(&v, [f1, f12, f13], tol)?,
        local_plane(&v, [f2, f12, f23], tol)?,
        local_plane(&v, [f3, f13, f23], tol)?,
    ];
    let m = DMatrix::from_rows(&normals.iter().map(|n| n.transpose()).collect::<Vec<_>>());
    let s = singular_values(&m);
    if s[2] <= tol * s[0] {
        return Err(Error::Degenerate("the three planes do not meet in a single point".into()));
    }
    let (_, y) = smallest_right_singular(&m, 1);
    Ok(v.from_local(&y.column(0).into_owned()))
}

#[derive(Clone, Debug)]
pub struct QuadricCompletion {
    pub point: SignedVector,
    /// `|Q(p)| / (|Q|·|p|²)` at the completed point.
    pub residual: f64,
}

pub fn quadric_residual(q: &DMatrix<f64>, p: &SignedVector) -> f64 {
    let c = p.coords();
    let n2 = c.norm_squared();
    if n2 == 0.0 {
        return 0.0;
    }
    (c.transpose() * q * c)[(0, 0)].abs() / (n2 * q.amax().max(f64::MIN_POSITIVE))
}

/// Hexahedron completion for seven points on the quadric `Q`; the result is
/// verified, not corrected: its quadric residual is reported.
pub fn complete_hexahedron_in_quadric(
    q: &DMatrix<f64>,
    pts: [&SignedVector; 7],
    tol: f64,
) -> Result<QuadricCompletion> {
    let n = pts[0].coords().len();
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q.nrows(),
        });
    }
    for (k, p) in pts.iter().enumerate() {
        let r = quadric_residual(q, p);
        if r > tol {
            return Err(Error::Invalid(format!("input point {k} is off the quadric (residual {r:e})")));
        }
    }
    let point = complete_hexahedron(pts[0], pts[1], pts[2], pts[3], pts[4], pts[5], pts[6], tol)?;
    let residual = quadric_residual(q, &point);
    Ok(QuadricCompletion { point, residual })
}

/// Q-net completion as a cube system.
#[derive(Clone, Copy, Debug)]
pub struct QnetSystem {
    pub tol: f64,
}

impl CubeSystem for QnetSystem {
    type Value = SignedVector;

    fn complete(
        &self,
        f: &SignedVector,
        f1: &SignedVector,
        f2: &SignedVector,
        f3: &SignedVector,
        f12: &SignedVector,
        f13: &SignedVector,
        f23: &SignedVector,
    ) -> Result<SignedVector> {
        complete_hexahedron(f, f1, f2, f3, f12, f13, f23, self.tol)
    }

    fn distance(&self, a: &SignedVector, b: &SignedVector) -> f64 {
        projective_distance(a.coords(), b.coords())
    }
}

/// Completes all vertices of an m-cube from `f, f_i, f_ij` and compares every route.
pub fn check_consistency(data: &CubeData<SignedVector>, tol: f64) -> Result<ConsistencyReport<SignedVector>> {
    run_consistency(&QnetSystem { tol }, data)
}

pub fn check_4d_consistency(data: &CubeData<SignedVector>, tol: f64) -> Result<ConsistencyReport<SignedVector>> {
    if data.dim() != 4 {
        return Err(Error::Invalid(format!("expected a 4-cube, got dimension {}", data.dim())));
    }
    check_consistency(data, tol)
}

/// F-transform of a Q-net from its values along the coordinate axes.
pub fn qnet_f_transform(f: &Grid<SignedVector>, seed: &Grid<SignedVector>, tol: f64) -> Result<Grid<SignedVector>> {
    propagate_transform(f, seed, |f, fi, fj, fp, fij, fip, fjp| {
        complete_hexahedron(f, fi, fj, fp, fij, fip, fjp, tol)
    })
}

/// Largest planarity residual over all elementary quads, with its location.
pub fn max_planarity_residual(net: &Grid<SignedVector>) -> (f64, Option<Vec<usize>>) {
    let mut worst = (0.0, None);
    let m = net.dims();
    for i in 0..m {
        for j in i + 1..m {
            for u in net.quad_bases(i, j) {
                if let Some([a, b, c, d]) = net.quad(&u, i, j) {
                    let r = rank_residual([a, b, c, d].map(|p| p.coords()), 3);
                    if r > worst.0 {
                        worst = (r, Some(u));
                    }
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo_euclid::DEFAULT_TOL;
    use crate::random;
    use approx::assert_relative_eq;
    use nalgebra::Matrix4;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn p(x: f64, y: f64, z: f64) -> SignedVector {
        hom(&Vector3::new(x, y, z))
    }

    fn transform(m: &Matrix4<f64>, v: &SignedVector) -> SignedVector {
        let c = m * nalgebra::Vector4::from_column_slice(v.coords().as_slice());
        SignedVector::from_slice(Space::Projective(4), c.as_slice()).unwrap()
    }

    #[test]
    fn planarity_examples() {
        let sq = quad_planarity(&p(0.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(1.0, 1.0, 0.0), &p(0.0, 1.0, 0.0), DEFAULT_TOL).unwrap();
        assert!(sq.planar);
        let c = sq.coefficients.unwrap();
        assert_relative_eq!(c.c_ij, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.c_ji, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.rho_ij, -1.0, epsilon = 1e-12);

        let bent = quad_planarity(&p(0.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(1.0, 1.0, 1.0), &p(0.0, 1.0, 0.0), DEFAULT_TOL).unwrap();
        assert!(!bent.planar);
        assert!(bent.coefficients.is_none());

        // oracle: (3,1) = c_ij·(0,1) + c_ji·(2,0)
        let q = quad_planarity(&p(0.0, 0.0, 0.0), &p(2.0, 0.0, 0.0), &p(3.0, 1.0, 0.0), &p(0.0, 1.0, 0.0), DEFAULT_TOL).unwrap();
        let c = q.coefficients.unwrap();
        assert_relative_eq!(c.c_ij, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.c_ji, 1.5, epsilon = 1e-12);
        assert_relative_eq!(c.c_ij + c.c_ji + c.rho_ij, 1.0);

        let coll = quad_planarity(&p(0.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(5.0, 1.0, 0.0), &p(2.0, 0.0, 0.0), DEFAULT_TOL).unwrap();
        assert!(coll.planar && coll.degenerate && coll.coefficients.is_none());
    }

    #[test]
    fn unit_cube_completion() {
        let r = complete_hexahedron(
            &p(0.0, 0.0, 0.0),
            &p(1.0, 0.0, 0.0),
            &p(0.0, 1.0, 0.0),
            &p(0.0, 0.0, 1.0),
            &p(1.0, 1.0, 0.0),
            &p(1.0, 0.0, 1.0),
            &p(0.0, 1.0, 1.0),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!((dehom(&r, DEFAULT_TOL).unwrap() - Vector3::new(1.0, 1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn non_planar_input_is_rejected() {
        let err = complete_hexahedron(
            &p(0.0, 0.0, 0.0),
            &p(1.0, 0.0, 0.0),
            &p(0.0, 1.0, 0.0),
            &p(0.0, 0.0, 1.0),
            &p(1.0, 1.0, 0.3),
            &p(1.0, 0.0, 1.0),
            &p(0.0, 1.0, 1.0),
            DEFAULT_TOL,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonPlanarQuad { i: 1, j: 2, .. }));
    }

    #[test]
    fn completion_is_projectively_equivariant() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let cube = random::random_qnet_cube(&mut rng, 3, 3);
            let m = Matrix4::from_fn(|i, j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-0.3..0.3));
            let pts: Vec<&SignedVector> = [vec![], vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]]
                .iter()
                .map(|d| cube.get(d).unwrap())
                .collect();
            let direct = complete_hexahedron(pts[0], pts[1], pts[2], pts[3], pts[4], pts[5], pts[6], DEFAULT_TOL).unwrap();
            let moved: Vec<SignedVector> = pts.iter().map(|q| transform(&m, q)).collect();
            let after = complete_hexahedron(&moved[0], &moved[1], &moved[2], &moved[3], &moved[4], &moved[5], &moved[6], DEFAULT_TOL).unwrap();
            assert!(projective_distance(transform(&m, &direct).coords(), after.coords()) < 1e-8);
        }
    }

    #[test]
    fn hypercube_corners() {
        let sp = Space::Projective(5);
        let mut data = CubeData::new(4);
        for mask in 0u32..16 {
            if mask.count_ones() <= 2 {
                let mut c = vec![0.0; 5];
                for k in 0..4 {
                    if mask & (1 << k) != 0 {
                        c[k] = 1.0;
                    }
                }
                c[4] = 1.0;
                data.insert(&crate::consistency::dirs_of(mask), SignedVector::from_slice(sp, &c).unwrap());
            }
        }
        let r = check_4d_consistency(&data, DEFAULT_TOL).unwrap();
        let target = DVector::from_vec(vec![1.0, 1.0, 1.0, 1.0, 1.0]);
        for cand in &r.candidates {
            assert!(projective_distance(cand.coords(), &target) < 1e-12);
        }
    }

    #[test]
    fn random_4d_and_5d_consistency() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let r = check_4d_consistency(&random::random_qnet_cube(&mut rng, 4, 3), DEFAULT_TOL).unwrap();
            assert_eq!(r.candidates.len(), 4);
            assert!(r.max_deviation < 1e-8, "{}", r.max_deviation);
        }
        for _ in 0..3 {
            let r = check_consistency(&random::random_qnet_cube(&mut rng, 5, 3), DEFAULT_TOL).unwrap();
            assert_eq!(r.candidates.len(), 10);
            assert!(r.max_deviation < 1e-7, "{}", r.max_deviation);
        }
    }

    #[test]
    fn broken_cube_fails_before_candidates() {
        let mut rng = StdRng::seed_from_u64(3);
        let mut data = random::random_qnet_cube(&mut rng, 4, 3);
        let bent = data.get(&[0, 1]).unwrap() + &p(0.0, 0.0, 0.5);
        data.insert(&[0, 1], bent);
        assert!(check_4d_consistency(&data, DEFAULT_TOL).is_err());
    }

    #[test]
    fn sphere_quadric_completion() {
        // three circular quads on the unit sphere around the north pole
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..20 {
            let pts = random::random_spherical_hexahedron(&mut rng);
            let refs: [&SignedVector; 7] = std::array::from_fn(|k| &pts[k]);
            let out = complete_hexahedron_in_quadric(&q, refs, DEFAULT_TOL).unwrap();
            assert!(out.residual < 1e-9, "{}", out.residual);
        }
    }

    #[test]
    fn translation_is_an_f_transform() {
        let f = Grid::from_fn(&[3, 3], |u| {
            let (a, b) = (u[0] as f64, u[1] as f64);
            Some(p(a + 0.2 * b, b + 0.1 * a * a, 0.0))
        });
        let shift = |v: &SignedVector| hom(&(dehom(v, DEFAULT_TOL).unwrap() + Vector3::new(0.0, 0.0, 1.0)));
        let seed = Grid::from_fn(&[3, 3], |u| (u[0] == 0 || u[1] == 0).then(|| shift(f.get(u).unwrap())));
        let plus = qnet_f_transform(&f, &seed, DEFAULT_TOL).unwrap();
        for (u, v) in plus.iter() {
            let expect = shift(f.get(&u).unwrap());
            assert!(projective_distance(v.unwrap().coords(), expect.coords()) < 1e-10);
        }
    }

    #[test]
    fn central_projection_is_an_f_transform() {
        // translational net: every quad is a planar trapezoid
        let f = Grid::from_fn(&[4, 3], |u| {
            let (a, b) = (u[0] as f64, u[1] as f64);
            Some(p(a, b, 0.1 * (a * a + b * b)))
        });
        assert!(max_planarity_residual(&f).0 < 1e-12);
        // perspective collineation x -> x + <w, x> o with center o: every line
        // through a point and its image passes through o
        let o = nalgebra::Vector4::new(0.3, -0.2, 2.0, 1.0);
        let w = nalgebra::Vector4::new(0.05, -0.02, 0.1, 0.2);
        let m = Matrix4::identity() + o * w.transpose();
        let seed = Grid::from_fn(&[4, 3], |u| (u[0] == 0 || u[1] == 0).then(|| transform(&m, f.get(u).unwrap())));
        let plus = qnet_f_transform(&f, &seed, DEFAULT_TOL).unwrap();
        for (u, v) in plus.iter() {
            let expect = transform(&m, f.get(&u).unwrap());
            assert!(projective_distance(v.unwrap().coords(), expect.coords()) < 1e-9);
        }
    }

    #[test]
    fn inconsistent_seed_is_rejected() {
        let f = Grid::from_fn(&[2, 2], |u| Some(p(u[0] as f64, u[1] as f64, 0.0)));
        let mut seed = Grid::from_fn(&[2, 2], |u| (u[0] == 0 || u[1] == 0).then(|| p(u[0] as f64, u[1] as f64, 1.0)));
        seed.set(&[1, 0], p(1.0, 0.3, 1.7));
        assert!(qnet_f_transform(&f, &seed, DEFAULT_TOL).is_err());
    }
}
