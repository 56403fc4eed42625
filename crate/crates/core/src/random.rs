//! Random generic instances for consistency experiments and property tests.
//! Coefficients stay away from the degenerate values by fixed margins.

use nalgebra::{DVector, Vector3};
use rand::Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::congruence::{complete_congruence_hexahedron, ProjectiveLine};
use crate::consistency::{dirs_of, CubeData};
use crate::error::Result;
use crate::grid::{fill_from_coordinate_surfaces, unshifted, Grid};
use crate::lie::{lie_lift, sphere_pencil_at, IsotropicLine, SphereElement};
use crate::principal::{unique_isotropic_line_through, ContactElementNet};
use crate::pseudo_euclid::{SignedVector, Space, Subspace, DEFAULT_TOL};
use crate::spheres::{family_sphere_at, FamilyKind, PlanarSphereFamily};
use crate::qnet::{complete_hexahedron, hom};

const MARGIN: f64 = 0.2;

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    Vector3::from(UnitSphere.sample(rng))
}

pub fn point_in_box<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> Vector3<f64> {
    Vector3::new(
        rng.random_range(-half_width..half_width),
        rng.random_range(-half_width..half_width),
        rng.random_range(-half_width..half_width),
    )
}

fn affine_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    let mut c = DVector::from_fn(n + 1, |_, _| rng.random_range(-1.0..1.0));
    c[n] = 1.0;
    c
}

/// Coefficient pair `(a, b)` in `[-2, 2]²` away from `a = 0`, `b = 0`, `a + b = 1`.
pub fn quad_coefficients<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let a: f64 = rng.random_range(-2.0..2.0);
        let b: f64 = rng.random_range(-2.0..2.0);
        if a.abs() > MARGIN && b.abs() > MARGIN && (a + b - 1.0).abs() > MARGIN {
            return (a, b);
        }
    }
}

/// Initial data `f, f_i, f_ij` of a Q-net on the unit `dim`-cube in RP^n.
pub fn random_qnet_cube<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize) -> CubeData<SignedVector> {
    let space = Space::Projective(n + 1);
    let mut data = CubeData::new(dim);
    let f = affine_point(rng, n);
    let fi: Vec<DVector<f64>> = (0..dim).map(|_| affine_point(rng, n)).collect();
    data.insert(&[], SignedVector::raw(space, f.clone()));
    for i in 0..dim {
        data.insert(&[i], SignedVector::raw(space, fi[i].clone()));
        for j in i + 1..dim {
            let (a, b) = quad_coefficients(rng);
            let fij = &f + (&fi[i] - &f) * a + (&fi[j] - &f) * b;
            data.insert(&[i, j], SignedVector::raw(space, fij));
        }
    }
    data
}

/// Random point of the circle through three points of the unit sphere,
/// kept at an angular distance from all three.
fn point_on_circle_through<R: Rng + ?Sized>(
    rng: &mut R,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
) -> Vector3<f64> {
    let n = (b - a).cross(&(c - a)).normalize();
    let center = n * n.dot(a);
    let r = (a - center).norm();
    let e1 = (a - center) / r;
    let e2 = n.cross(&e1);
    let angle = |x: &Vector3<f64>| {
        let d = x - center;
        d.dot(&e2).atan2(d.dot(&e1))
    };
    let taken = [0.0, angle(b), angle(c)];
    loop {
        let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let far = taken.iter().all(|s| {
            let d = (t - s).rem_euclid(std::f64::consts::TAU);
            d.min(std::f64::consts::TAU - d) > 0.3
        });
        if far {
            return center + (e1 * t.cos() + e2 * t.sin()) * r;
        }
    }
}

/// Seven homogeneous points `f, f1, f2, f3, f12, f13, f23` of the unit sphere
/// with three circular coordinate quads.
pub fn random_spherical_hexahedron<R: Rng + ?Sized>(rng: &mut R) -> Vec<SignedVector> {
    let pts = spherical_hexahedron_points(rng);
    pts.iter().map(hom).collect()
}

/// Affine version of [`random_spherical_hexahedron`], in the same order.
pub fn spherical_hexahedron_points<R: Rng + ?Sized>(rng: &mut R) -> Vec<Vector3<f64>> {
    loop {
        let f = unit_vector(rng);
        let near = |rng: &mut R| (f + unit_vector(rng) * 0.8).normalize();
        let (f1, f2, f3) = (near(rng), near(rng), near(rng));
        let spread = [(f, f1), (f, f2), (f, f3), (f1, f2), (f1, f3), (f2, f3)]
            .iter()
            .all(|(a, b)| (a - b).norm() > 0.2);
        if !spread {
            continue;
        }
        let f12 = point_on_circle_through(rng, &f, &f1, &f2);
        let f13 = point_on_circle_through(rng, &f, &f1, &f3);
        let f23 = point_on_circle_through(rng, &f, &f2, &f3);
        return vec![f, f1, f2, f3, f12, f13, f23];
    }
}

/// Fills every vertex mask with at most two bits of a cube from a closure.
pub fn cube_from_fn<T>(dim: usize, mut f: impl FnMut(&[usize]) -> T) -> CubeData<T> {
    let mut data = CubeData::new(dim);
    for mask in 0u32..(1 << dim) {
        if mask.count_ones() <= 2 {
            let dirs = dirs_of(mask);
            data.insert(&dirs, f(&dirs));
        }
    }
    data
}

/// F-partner `g` of a Q-net cube: `f, f_i, g, g_i` are coplanar for every `i`.
pub fn random_qnet_f_partner<R: Rng + ?Sized>(
    rng: &mut R,
    f: &CubeData<SignedVector>,
    dim: usize,
) -> CubeData<SignedVector> {
    let base = f.get(&[]).expect("cube has a base vertex");
    let space = base.space();
    let n = space.dim() - 1;
    let g = SignedVector::raw(space, affine_point(rng, n));
    let mut out = CubeData::new(dim);
    out.insert(&[], g.clone());
    for i in 0..dim {
        let fi = f.get(&[i]).expect("cube has edge vertices");
        let (a, b) = quad_coefficients(rng);
        out.insert(&[i], &(base + &(fi - base).scaled(a)) + &(&g - base).scaled(b));
    }
    for i in 0..dim {
        for j in i + 1..dim {
            let gij = complete_hexahedron(
                base,
                f.get(&[i]).unwrap(),
                f.get(&[j]).unwrap(),
                &g,
                f.get(&[i, j]).unwrap(),
                out.get(&[i]).unwrap(),
                out.get(&[j]).unwrap(),
                DEFAULT_TOL,
            )
            .expect("generic partner data completes");
            out.insert(&[i, j], gij);
        }
    }
    out
}

fn random_line<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProjectiveLine {
    let space = Space::Projective(n + 1);
    let a = SignedVector::raw(space, affine_point(rng, n));
    let b = SignedVector::raw(space, affine_point(rng, n));
    ProjectiveLine::through(&a, &b, DEFAULT_TOL).expect("random points are distinct")
}

fn point_on<R: Rng + ?Sized>(rng: &mut R, l: &ProjectiveLine) -> SignedVector {
    l.point(rng.random_range(0.0..std::f64::consts::PI))
}

fn line_meeting<R: Rng + ?Sized>(rng: &mut R, a: &ProjectiveLine, b: &ProjectiveLine) -> ProjectiveLine {
    ProjectiveLine::through(&point_on(rng, a), &point_on(rng, b), DEFAULT_TOL).expect("generic points are distinct")
}

fn line_from<R: Rng + ?Sized>(rng: &mut R, a: &ProjectiveLine) -> ProjectiveLine {
    let n = a.span().space().dim() - 1;
    let q = SignedVector::raw(a.span().space(), affine_point(rng, n));
    ProjectiveLine::through(&point_on(rng, a), &q, DEFAULT_TOL).expect("generic points are distinct")
}

/// Initial data of a line congruence on the unit `dim`-cube in RP^n.
pub fn random_congruence_cube<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize) -> CubeData<ProjectiveLine> {
    let mut data = CubeData::new(dim);
    let l = random_line(rng, n);
    let li: Vec<ProjectiveLine> = (0..dim).map(|_| line_from(rng, &l)).collect();
    for i in 0..dim {
        for j in i + 1..dim {
            data.insert(&[i, j], line_meeting(rng, &li[i], &li[j]));
        }
    }
    for (i, x) in li.into_iter().enumerate() {
        data.insert(&[i], x);
    }
    data.insert(&[], l);
    data
}

/// A congruence on a full grid in RP^n: random coordinate surfaces, then completed.
pub fn random_congruence_grid<R: Rng + ?Sized>(
    rng: &mut R,
    extents: &[usize],
    n: usize,
    tol: f64,
) -> Result<Grid<ProjectiveLine>> {
    let mut grid: Grid<ProjectiveLine> = Grid::new(extents);
    let mut order: Vec<Vec<usize>> = grid.indices().collect();
    order.sort_by_key(|u| u.iter().sum::<usize>());
    for u in order {
        let dirs: Vec<usize> = (0..u.len()).filter(|&k| u[k] > 0).collect();
        let line = match dirs.len() {
            0 => random_line(rng, n),
            1 => line_from(rng, grid.require(&unshifted(&u, dirs[0]))?),
            2 => {
                let a = grid.require(&unshifted(&u, dirs[0]))?.clone();
                let b = grid.require(&unshifted(&u, dirs[1]))?;
                line_meeting(rng, &a, b)
            }
            _ => continue,
        };
        grid.set(&u, line);
    }
    if extents.len() >= 3 {
        fill_from_coordinate_surfaces(&mut grid, |l, l1, l2, l3, l12, l13, l23| {
            complete_congruence_hexahedron(l, l1, l2, l3, l12, l13, l23, tol)
        })?;
    }
    Ok(grid)
}

/// Seed lines on the coordinate axes for an F-transform of `c`.
pub fn random_congruence_seed<R: Rng + ?Sized>(
    rng: &mut R,
    c: &Grid<ProjectiveLine>,
    _tol: f64,
) -> Result<Grid<ProjectiveLine>> {
    let mut seed: Grid<ProjectiveLine> = Grid::new(c.extents());
    let mut order: Vec<Vec<usize>> = c.indices().filter(|u| u.iter().filter(|&&k| k > 0).count() <= 1).collect();
    order.sort_by_key(|u| u.iter().sum::<usize>());
    for u in order {
        let base = c.require(&u)?;
        let line = match (0..u.len()).find(|&k| u[k] > 0) {
            None => line_from(rng, base),
            Some(k) => line_meeting(rng, base, seed.require(&unshifted(&u, k))?),
        };
        seed.set(&u, line);
    }
    Ok(seed)
}

/// Oriented sphere with center in `[-2, 2]³` and `|r|` in `[0.3, 1.5]`.
pub fn random_sphere<R: Rng + ?Sized>(rng: &mut R) -> SphereElement {
    let r: f64 = rng.random_range(0.3..1.5);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    SphereElement::sphere(point_in_box(rng, 2.0), sign * r)
}

/// R-congruence quad `[s, si, sij, sj]` of proper spheres whose family has the
/// requested kind; `sij` is a random member of the family of the other three.
pub fn random_r_quad<R: Rng + ?Sized>(rng: &mut R, kind: FamilyKind, tol: f64) -> [SphereElement; 4] {
    loop {
        let (s, si, sj) = (random_sphere(rng), random_sphere(rng), random_sphere(rng));
        let span = Subspace::span(&[lie_lift(&s), lie_lift(&si), lie_lift(&sj)], tol).expect("nonzero lifts");
        let Ok(family) = PlanarSphereFamily::from_span(span, tol) else { continue };
        if family.kind() != kind {
            continue;
        }
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        let Ok(sij @ SphereElement::Sphere { radius, center }) = family_sphere_at(&family, t, tol) else { continue };
        let far = [&s, &si, &sj].iter().all(|e| {
            let (c, r) = e.center_radius().expect("proper sphere");
            (c - center).norm() + (r - radius).abs() > 0.2
        });
        if far && radius.abs() > 0.1 && center.norm() < 20.0 {
            return [s, si, sij, sj];
        }
    }
}

/// Seed lines along the axes for a Ribaucour transform of `net`: each seed
/// line meets its base line and its predecessor.
pub fn random_ribaucour_seed<R: Rng + ?Sized>(
    rng: &mut R,
    net: &ContactElementNet,
    tol: f64,
) -> Result<Grid<IsotropicLine>> {
    let lines = net.lines();
    let mut seed: Grid<IsotropicLine> = Grid::new(lines.extents());
    let mut order: Vec<Vec<usize>> = lines
        .indices()
        .filter(|u| u.iter().filter(|&&k| k > 0).count() <= 1)
        .collect();
    order.sort_by_key(|u| u.iter().sum::<usize>());
    for u in order {
        let base = lines.require(&u)?;
        let line = match (0..u.len()).find(|&k| u[k] > 0) {
            None => {
                // the transform touches the base element somewhere along its pencil
                let other = lie_lift(&random_sphere(rng));
                unique_isotropic_line_through(&other, base, tol)?
            }
            Some(k) => {
                let t: f64 = rng.random_range(0.4..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let member = lie_lift(&sphere_pencil_at(base, t, tol));
                unique_isotropic_line_through(&member, seed.require(&unshifted(&u, k))?, tol)?
            }
        };
        seed.set(&u, line);
    }
    Ok(seed)
}
