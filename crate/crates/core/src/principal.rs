//! Principal contact element nets: lattices of isotropic lines in the Lie
//! quadric whose neighbors intersect. Points and tangent planes are read off
//! the lines on demand.

use nalgebra::{Matrix3, Vector3};

use crate::congruence::{congruence_f_transform, intersection_residual, meet, ProjectiveLine};
use crate::error::{Error, Result};
use crate::grid::{shifted, Grid};
use crate::lie::{contact_element, lie_lift, lie_unlift, point_and_plane_of, IsotropicLine, Plane, SphereElement};
use crate::moebius::{concircularity_residual, moebius_lift};
use crate::pseudo_euclid::{SignedVector, Space, Subspace, E0};
use crate::qnet::complete_hexahedron_in_quadric;

fn as_line(l: &IsotropicLine) -> ProjectiveLine {
    ProjectiveLine::new(l.span().clone()).expect("isotropic lines are 2-dimensional")
}

fn as_isotropic(l: ProjectiveLine, tol: f64) -> Result<IsotropicLine> {
    IsotropicLine::new(l.into_span(), tol)
}

#[derive(Clone, Debug)]
pub struct ContactElementNet {
    lines: Grid<IsotropicLine>,
}

/// Curvature spheres attached to the edges of one lattice direction.
#[derive(Clone, Debug)]
pub struct CurvatureSphereField {
    pub direction: usize,
    /// Intersection points of neighboring lines, indexed by the edge's base vertex.
    pub lifts: Grid<SignedVector>,
    pub spheres: Grid<SphereElement>,
    /// Edge bases lying on umbilic quads.
    pub umbilic: Vec<Vec<usize>>,
}

impl ContactElementNet {
    pub fn new(lines: Grid<IsotropicLine>) -> Result<Self> {
        if !lines.is_complete() {
            return Err(Error::Invalid("contact element net has empty cells".into()));
        }
        Ok(ContactElementNet { lines })
    }

    pub fn from_contact_elements(points: &Grid<Vector3<f64>>, planes: &Grid<Plane>, tol: f64) -> Result<Self> {
        if points.extents() != planes.extents() {
            return Err(Error::Invalid("point and plane grids have different extents".into()));
        }
        let lines = points.try_map(|u, x| contact_element(x, planes.require(u)?, tol).map_err(|e| e.at(u)))?;
        ContactElementNet::new(lines)
    }

    pub fn lines(&self) -> &Grid<IsotropicLine> {
        &self.lines
    }

    pub fn extents(&self) -> &[usize] {
        self.lines.extents()
    }

    pub fn points(&self, tol: f64) -> Result<Grid<Vector3<f64>>> {
        self.lines.try_map(|u, l| match point_and_plane_of(l, tol).0 {
            SphereElement::Point(x) => Ok(x),
            _ => Err(Error::AtInfinity.at(u)),
        })
    }

    pub fn planes(&self, tol: f64) -> Result<Grid<Plane>> {
        self.lines.try_map(|u, l| {
            point_and_plane_of(l, tol)
                .1
                .ok_or_else(|| Error::Degenerate("contact element has no finite tangent plane".into()).at(u))
        })
    }

    /// Intersection residual of every edge as `(base, direction, residual)`.
    pub fn edge_residuals(&self) -> Vec<(Vec<usize>, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.lines.dims() {
            for u in self.lines.edge_bases(i) {
                let a = as_line(self.lines.get(&u).unwrap());
                let b = as_line(self.lines.get(&shifted(&u, i)).unwrap());
                let r = intersection_residual(&a, &b);
                out.push((u, i, r));
            }
        }
        out
    }

    /// Largest intersection residual over all edges, with the offending edge.
    pub fn max_intersection_residual(&self) -> (f64, Option<(Vec<usize>, usize)>) {
        let mut worst = (0.0, None);
        for (u, i, r) in self.edge_residuals() {
            if r > worst.0 {
                worst = (r, Some((u, i)));
            }
        }
        worst
    }

    fn edge_lifts(&self, i: usize, tol: f64) -> Result<Grid<SignedVector>> {
        if i >= self.lines.dims() || self.extents()[i] < 2 {
            return Err(Error::Invalid(format!("no edges in direction {i}")));
        }
        let mut ext = self.extents().to_vec();
        ext[i] -= 1;
        Grid::try_from_fn(&ext, |u| {
            let a = as_line(self.lines.require(u)?);
            let b = as_line(self.lines.require(&shifted(u, i))?);
            meet(&a, &b, tol).map(Some).map_err(|e| e.at(u))
        })
    }

    /// Quads (in directions `i < j`) whose four lines share a point.
    pub fn umbilic_quads(&self, i: usize, j: usize, tol: f64) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        for u in self.lines.quad_bases(i, j) {
            let q = self.lines.quad(&u, i, j).expect("complete grid");
            let s = meet(&as_line(q[0]), &as_line(q[1]), tol).map_err(|e| e.at(&u))?;
            if q.iter().all(|l| l.contains(&s, tol)) {
                out.push(u);
            }
        }
        Ok(out)
    }

    /// Curvature spheres `ℓ(u) ∩ ℓ(u + e_i)`; edges on umbilic quads are flagged.
    pub fn curvature_spheres(&self, i: usize, tol: f64) -> Result<CurvatureSphereField> {
        let lifts = self.edge_lifts(i, tol)?;
        let spheres = lifts.try_map(|u, p| lie_unlift(p, tol).map_err(|e| e.at(u)))?;
        let mut umbilic = Vec::new();
        for j in (0..self.lines.dims()).filter(|&j| j != i) {
            let (a, b) = (i.min(j), i.max(j));
            for q in self.umbilic_quads(a, b, tol)? {
                let other = shifted(&q, j);
                for e in [q, other] {
                    if !umbilic.contains(&e) {
                        umbilic.push(e);
                    }
                }
            }
        }
        umbilic.sort();
        Ok(CurvatureSphereField {
            direction: i,
            lifts,
            spheres,
            umbilic,
        })
    }
}

#[derive(Clone, Debug)]
pub struct PrincipalCheck {
    pub principal: bool,
    pub max_residual: f64,
    /// Edge `(base, direction)` with the largest residual.
    pub worst: Option<(Vec<usize>, usize)>,
    /// Curvature sphere fields of the two directions, present when principal.
    pub fields: Option<[CurvatureSphereField; 2]>,
}

pub fn is_principal(points: &Grid<Vector3<f64>>, planes: &Grid<Plane>, tol: f64) -> Result<PrincipalCheck> {
    if points.dims() != 2 {
        return Err(Error::Invalid("principal nets are two-dimensional".into()));
    }
    let net = ContactElementNet::from_contact_elements(points, planes, tol)?;
    let (max_residual, worst) = net.max_intersection_residual();
    let principal = max_residual <= tol;
    let fields = if principal {
        Some([net.curvature_spheres(0, tol)?, net.curvature_spheres(1, tol)?])
    } else {
        None
    };
    Ok(PrincipalCheck {
        principal,
        max_residual,
        worst,
        fields,
    })
}

/// The isotropic line through `s1` meeting the contact element `l`.
pub fn unique_isotropic_line_through(s1: &SignedVector, l: &IsotropicLine, tol: f64) -> Result<IsotropicLine> {
    if s1.space() != Space::Lie {
        return Err(Error::SpaceMismatch(s1.space().to_string(), Space::Lie.to_string()));
    }
    let res = s1.isotropy_residual();
    if res > tol {
        return Err(Error::NotIsotropic(res));
    }
    let (s, sigma) = (l.span().vector(0), l.span().vector(1));
    let a = -sigma.inner(s1)?;
    let b = s.inner(s1)?;
    if a.hypot(b) <= tol * s1.euclid_norm() {
        if l.contains(s1, tol) {
            return Err(Error::Coincident);
        }
        return Err(Error::Degenerate("sphere is in polar position to the contact element".into()));
    }
    let touching = &s.scaled(a) + &sigma.scaled(b);
    IsotropicLine::through(s1, &touching, tol)
}

/// Interior step of the synthesis: the line through `sij` meeting `li` and `lj`.
fn synthesis_step(
    l: &IsotropicLine,
    li: &IsotropicLine,
    lj: &IsotropicLine,
    sij: &SignedVector,
    tol: f64,
) -> Result<IsotropicLine> {
    let on_i = li.contains(sij, tol);
    let on_j = lj.contains(sij, tol);
    match (on_i, on_j) {
        (true, true) => return Err(Error::Degenerate("sphere lies on both neighboring lines".into())),
        (true, false) => return unique_isotropic_line_through(sij, lj, tol),
        (false, true) => return unique_isotropic_line_through(sij, li, tol),
        _ => {}
    }
    let v = l.span().join(li.span(), tol)?.join(lj.span(), tol)?;
    if v.dim() != 4 {
        return Err(Error::Degenerate(format!(
            "neighboring contact elements span {} dimensions instead of 4",
            v.dim()
        )));
    }
    let r = v.residual(sij);
    if r > tol {
        return Err(Error::NotRCongruence(format!(
            "sphere lies outside the span of its neighbors' contact elements (residual {r:e})"
        )));
    }
    let point = Subspace::span(std::slice::from_ref(sij), tol)?;
    let p1 = li.span().join(&point, tol)?;
    let p2 = lj.span().join(&point, tol)?;
    let m = p1.intersect(&p2, tol)?;
    if m.dim() != 2 {
        return Err(Error::Degenerate(format!("planes meet in dimension {}", m.dim())));
    }
    IsotropicLine::new(m, tol)
}

/// Principal contact element net through an R-congruence of spheres, fixed by
/// its contact element at the origin.
pub fn synthesize_from_r_congruence(
    spheres: &Grid<SphereElement>,
    seed: &IsotropicLine,
    tol: f64,
) -> Result<ContactElementNet> {
    if spheres.dims() != 2 {
        return Err(Error::Invalid("synthesis needs a two-dimensional sphere grid".into()));
    }
    let lifts = spheres.try_map(|_, s| Ok(lie_lift(s)))?;
    if !lifts.is_complete() {
        return Err(Error::Invalid("sphere grid has empty cells".into()));
    }
    let origin = [0, 0];
    if !seed.contains(lifts.require(&origin)?, tol) {
        return Err(Error::Invalid("seed contact element does not contain the first sphere".into()));
    }
    let mut lines: Grid<IsotropicLine> = Grid::new(spheres.extents());
    let mut order: Vec<Vec<usize>> = lines.indices().collect();
    order.sort_by_key(|u| u.iter().sum::<usize>());
    for u in order {
        let s = lifts.require(&u)?;
        let line = match (u[0] > 0, u[1] > 0) {
            (false, false) => Ok(seed.clone()),
            (true, false) => unique_isotropic_line_through(s, lines.require(&[u[0] - 1, 0])?, tol),
            (false, true) => unique_isotropic_line_through(s, lines.require(&[0, u[1] - 1])?, tol),
            (true, true) => synthesis_step(
                lines.require(&[u[0] - 1, u[1] - 1])?,
                lines.require(&[u[0], u[1] - 1])?,
                lines.require(&[u[0] - 1, u[1]])?,
                s,
                tol,
            ),
        }
        .map_err(|e| e.at(&u))?;
        lines.set(&u, line);
    }
    ContactElementNet::new(lines)
}

fn collinear(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, tol: f64) -> bool {
    let (u, v) = (b - a, c - a);
    u.cross(&v).norm() <= tol * u.norm() * v.norm()
}

/// Fourth-circle point of a circular hexahedron: the three new circles through
/// `x12, x13, x23` meet in one point.
#[allow(clippy::too_many_arguments)]
pub fn miquel_complete(
    x: &Vector3<f64>,
    x1: &Vector3<f64>,
    x2: &Vector3<f64>,
    x3: &Vector3<f64>,
    x12: &Vector3<f64>,
    x13: &Vector3<f64>,
    x23: &Vector3<f64>,
    tol: f64,
) -> Result<Vector3<f64>> {
    for (a, b, ab, c) in [(x1, x2, x12, x), (x1, x3, x13, x), (x2, x3, x23, x)] {
        if collinear(c, a, b, tol) {
            return Err(Error::Degenerate("collinear points on a face".into()));
        }
        let r = concircularity_residual(c, a, ab, b);
        if r > tol {
            return Err(Error::NotConcircular(r));
        }
    }
    let lifts: Vec<SignedVector> = [x, x1, x2, x3, x12, x13, x23]
        .iter()
        .map(|p| moebius_lift(&SphereElement::Point(**p)))
        .collect();
    let q = Space::Moebius.gram();
    let done = complete_hexahedron_in_quadric(
        &q,
        [&lifts[0], &lifts[1], &lifts[2], &lifts[3], &lifts[4], &lifts[5], &lifts[6]],
        tol,
    )?;
    let c = done.point.coords();
    if c[E0].abs() <= tol * c.amax() {
        return Err(Error::AtInfinity);
    }
    Ok(Vector3::new(c[0], c[1], c[2]) / c[E0])
}

/// Plane with normal `vij` through the common point of `p, pi, pj`.
pub fn conical_complete(p: &Plane, pi: &Plane, pj: &Plane, vij: &Vector3<f64>, tol: f64) -> Result<Plane> {
    let n = vij.norm();
    if (n - 1.0).abs() > tol.max(1e-12) {
        return Err(Error::NonUnitNormal(n));
    }
    let m = Matrix3::from_rows(&[p.normal().transpose(), pi.normal().transpose(), pj.normal().transpose()]);
    let sv = m.singular_values();
    if sv.min() <= tol * sv.max() {
        return Err(Error::Degenerate("the three planes have no unique common point".into()));
    }
    let x = m
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("the three planes have no unique common point".into()))?
        * Vector3::new(p.offset(), pi.offset(), pj.offset());
    Plane::through(vij / n, &x)
}

/// The neighbor datum of a Euclidean principal step.
#[derive(Clone, Copy, Debug)]
pub enum PottmannDatum {
    Point(Vector3<f64>),
    Plane(Plane),
}

#[derive(Clone, Copy, Debug)]
pub struct PottmannStep {
    pub point: Vector3<f64>,
    pub plane: Plane,
    /// The sphere touching both planes at both points.
    pub sphere: SphereElement,
}

/// Completes the neighboring contact element from a point or a plane by a
/// reflection in a bisecting plane.
pub fn pottmann_step(x: &Vector3<f64>, plane: &Plane, datum: &PottmannDatum, tol: f64) -> Result<PottmannStep> {
    if !plane.contains(x, tol) {
        return Err(Error::NotIncident(plane.signed_distance(x)));
    }
    let v = plane.normal();
    match *datum {
        PottmannDatum::Point(x1) => {
            let edge = x1 - x;
            let len = edge.norm();
            if len <= tol * (1.0 + x.norm()) {
                return Err(Error::Coincident);
            }
            let n = edge / len;
            let cos = n.dot(&v);
            if cos.abs() <= tol {
                return Err(Error::Degenerate("neighbor point lies on the tangent plane".into()));
            }
            let t = 0.5 * len / cos;
            let center = x + v * t;
            let v1 = v - n * (2.0 * v.dot(&n));
            Ok(PottmannStep {
                point: x1,
                plane: Plane::through(v1, &x1)?,
                sphere: SphereElement::sphere(center, t),
            })
        }
        PottmannDatum::Plane(p1) => {
            let v1 = p1.normal();
            let denom = 1.0 - v.dot(&v1);
            if denom <= tol {
                return Err(Error::Degenerate("parallel planes of equal orientation".into()));
            }
            let t = (v1.dot(x) - p1.offset()) / denom;
            if t.abs() <= tol * (1.0 + x.norm()) {
                return Err(Error::Degenerate("touching sphere degenerates to the point".into()));
            }
            let center = x + v * t;
            let m = (v - v1).normalize();
            let x1 = x - m * (2.0 * m.dot(&(x - center)));
            Ok(PottmannStep {
                point: x1,
                plane: p1,
                sphere: SphereElement::sphere(center, t),
            })
        }
    }
}

/// Ribaucour transform: the F-transform of the line congruence, with every
/// new line checked to be isotropic.
pub fn ribaucour_transform(
    net: &ContactElementNet,
    seed: &Grid<IsotropicLine>,
    tol: f64,
) -> Result<ContactElementNet> {
    let base = net.lines.map(as_line);
    let seed = seed.map(as_line);
    let plus = congruence_f_transform(&base, &seed, tol)?;
    let lines = plus.try_map(|u, l| as_isotropic(l.clone(), tol).map_err(|e| e.at(u)))?;
    ContactElementNet::new(lines)
}

/// Spheres `ℓ(u) ∩ ℓ⁺(u)` shared by a net and its Ribaucour transform.
pub fn ribaucour_spheres(net: &ContactElementNet, plus: &ContactElementNet, tol: f64) -> Result<Grid<SphereElement>> {
    if net.extents() != plus.extents() {
        return Err(Error::Invalid("nets have different extents".into()));
    }
    net.lines.try_map(|u, l| {
        let p = meet(&as_line(l), &as_line(plus.lines.require(u)?), tol).map_err(|e| e.at(u))?;
        lie_unlift(&p, tol).map_err(|e| e.at(u))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{sphere_net, torus_net};
    use crate::laguerre::is_conical_quad;
    use crate::moebius::circumcircle;
    use crate::pseudo_euclid::{projective_distance, reflect, subspace_signature, Signature, DEFAULT_TOL};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn v3(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    fn z_plane(d: f64) -> Plane {
        Plane::new(v3(0.0, 0.0, 1.0), d).unwrap()
    }

    fn torus() -> (Grid<Vector3<f64>>, Grid<Plane>) {
        let s = torus_net(2.0, 0.7, [5, 6], (-1.0, 1.1), (0.0, 2.0)).unwrap();
        (s.points, s.planes)
    }

    #[test]
    fn isotropic_line_through_examples() {
        let l = contact_element(&Vector3::zeros(), &z_plane(0.0), DEFAULT_TOL).unwrap();
        let s1 = lie_lift(&SphereElement::sphere(v3(0.0, 0.0, 2.0), 1.0));
        let l1 = unique_isotropic_line_through(&s1, &l, DEFAULT_TOL).unwrap();
        let hit = meet(&as_line(&l), &as_line(&l1), DEFAULT_TOL).unwrap();
        // oracle: center (0,0,t), radius t, touching the unit sphere at height 2: |2 - t| = |t - 1|
        let expected = SphereElement::sphere(v3(0.0, 0.0, 1.5), 1.5);
        assert!(lie_unlift(&hit, DEFAULT_TOL).unwrap().approx_eq(&expected, 1e-12));
        assert_eq!(
            subspace_signature(&l1.span().basis(), DEFAULT_TOL).unwrap(),
            Signature::new(0, 0, 2)
        );

        // a pencil member lies on the line already
        let member = lie_lift(&SphereElement::sphere(v3(0.0, 0.0, 0.3), 0.3));
        assert!(matches!(unique_isotropic_line_through(&member, &l, DEFAULT_TOL), Err(Error::Coincident)));

        // parallel plane of the same orientation meets the pencil in its plane
        let far = lie_lift(&SphereElement::Plane(z_plane(2.0)));
        let l1 = unique_isotropic_line_through(&far, &l, DEFAULT_TOL).unwrap();
        let hit = meet(&as_line(&l), &as_line(&l1), DEFAULT_TOL).unwrap();
        assert!(lie_unlift(&hit, DEFAULT_TOL).unwrap().approx_eq(&SphereElement::Plane(z_plane(0.0)), 1e-12));
        assert!(matches!(point_and_plane_of(&l1, DEFAULT_TOL).0, SphereElement::Infinity));
    }

    #[test]
    fn non_isotropic_input_is_refused() {
        let l = contact_element(&Vector3::zeros(), &z_plane(0.0), DEFAULT_TOL).unwrap();
        let s = SignedVector::basis(Space::Lie, 0);
        assert!(matches!(unique_isotropic_line_through(&s, &l, DEFAULT_TOL), Err(Error::NotIsotropic(_))));
    }

    #[test]
    fn torus_is_principal_with_known_curvature_spheres() {
        let (major, minor) = (2.0, 0.7);
        let s = torus_net(major, minor, [5, 6], (-1.0, 1.1), (0.0, 2.0)).unwrap();
        let check = is_principal(&s.points, &s.planes, DEFAULT_TOL).unwrap();
        assert!(check.principal, "{}", check.max_residual);
        let [meridian, parallel] = check.fields.unwrap();
        assert!(meridian.umbilic.is_empty() && parallel.umbilic.is_empty());
        for (u, sph) in meridian.spheres.iter() {
            let phi = s.params[1][u[1]];
            let tube = SphereElement::sphere(v3(major * phi.cos(), major * phi.sin(), 0.0), -minor);
            assert!(sph.unwrap().approx_eq(&tube, 1e-9));
        }
        for (u, sph) in parallel.spheres.iter() {
            // oracle: the normal line through x meets the axis
            let x = s.points.get(&u).unwrap();
            let n = s.planes.get(&u).unwrap().normal();
            let t = -(x.x * x.x + x.y * x.y).sqrt() / (n.x * n.x + n.y * n.y).sqrt();
            let (c, r) = sph.unwrap().center_radius().unwrap();
            assert_relative_eq!(r, t, epsilon = 1e-9);
            assert!((c - (x + n * t)).norm() < 1e-9);
            assert!(c.x.abs() < 1e-9 && c.y.abs() < 1e-9);
        }
    }

    #[test]
    fn curvature_spheres_touch_both_contact_elements() {
        let (pts, planes) = torus();
        let net = ContactElementNet::from_contact_elements(&pts, &planes, DEFAULT_TOL).unwrap();
        for i in 0..2 {
            let field = net.curvature_spheres(i, DEFAULT_TOL).unwrap();
            for (u, s) in field.spheres.iter() {
                let s = s.unwrap();
                for w in [u.clone(), shifted(&u, i)] {
                    let x = pts.get(&w).unwrap();
                    let p = planes.get(&w).unwrap();
                    // Euclidean oracle: center on the normal line at distance |r|
                    let (c, r) = s.center_radius().unwrap();
                    assert!((c - (x + p.normal() * r)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn round_sphere_is_umbilic() {
        let s = sphere_net(1.5, [4, 5], (-1.0, 1.0), (0.0, 2.0)).unwrap();
        let check = is_principal(&s.points, &s.planes, DEFAULT_TOL).unwrap();
        assert!(check.principal);
        let [a, b] = check.fields.unwrap();
        let expected = SphereElement::sphere(Vector3::zeros(), -1.5);
        for (_, sph) in a.spheres.iter().chain(b.spheres.iter()) {
            assert!(sph.unwrap().approx_eq(&expected, 1e-9));
        }
        assert_eq!(a.umbilic.len(), a.spheres.len());
        assert_eq!(b.umbilic.len(), b.spheres.len());
    }

    #[test]
    fn coplanar_contact_elements_share_their_plane() {
        let pts = Grid::from_fn(&[3, 3], |u| Some(v3(u[0] as f64 * 0.7, (u[1] as f64).powi(2) * 0.4, 1.0)));
        let planes = Grid::from_fn(&[3, 3], |_| Some(z_plane(1.0)));
        let check = is_principal(&pts, &planes, DEFAULT_TOL).unwrap();
        assert!(check.principal);
        for f in check.fields.unwrap() {
            for (_, s) in f.spheres.iter() {
                assert!(s.unwrap().approx_eq(&SphereElement::Plane(z_plane(1.0)), 1e-12));
            }
        }
    }

    #[test]
    fn perturbed_planes_break_principality() {
        let (pts, planes) = torus();
        let x = *pts.get(&[2, 2]).unwrap();
        let mut planes = planes;
        let n = (planes.get(&[2, 2]).unwrap().normal() + v3(0.05, -0.03, 0.02)).normalize();
        planes.set(&[2, 2], Plane::through(n, &x).unwrap());
        let check = is_principal(&pts, &planes, DEFAULT_TOL).unwrap();
        assert!(!check.principal && check.fields.is_none());
        let (u, i) = check.worst.unwrap();
        assert!(u == vec![2, 2] || shifted(&u, i) == vec![2, 2]);
    }

    #[test]
    fn incidence_violation_names_the_cell() {
        let (pts, mut planes) = torus();
        let p = *planes.get(&[1, 3]).unwrap();
        planes.set(&[1, 3], Plane::new(p.normal(), p.offset() + 0.1).unwrap());
        let err = is_principal(&pts, &planes, DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, Error::AtCell { ref index, .. } if index == &vec![1, 3]));
    }

    /// Torus points with a generic first plane: principal, but not a Dupin cyclide.
    fn generic_net() -> ContactElementNet {
        let (pts, _) = torus();
        let spheres = pts.map(|x| SphereElement::Point(*x));
        let x0 = *pts.get(&[0, 0]).unwrap();
        let seed_plane = Plane::through(v3(0.3, -0.5, 0.8).normalize(), &x0).unwrap();
        let seed = contact_element(&x0, &seed_plane, DEFAULT_TOL).unwrap();
        synthesize_from_r_congruence(&spheres, &seed, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn synthesis_reproduces_a_principal_net() {
        let net = generic_net();
        for i in 0..2 {
            let field = net.curvature_spheres(i, DEFAULT_TOL).unwrap();
            let seed = net.lines().get(&[0, 0]).unwrap();
            let again = synthesize_from_r_congruence(&field.spheres, seed, DEFAULT_TOL).unwrap();
            for (u, l) in again.lines().iter() {
                assert!(l.unwrap().distance(net.lines().get(&u).unwrap()) < 1e-8, "{u:?}");
            }
        }
    }

    #[test]
    fn torus_curvature_spheres_do_not_determine_the_net() {
        // each curvature sphere of a torus is shared by a whole curvature line,
        // so the next element along that line is not fixed by its sphere
        let (pts, planes) = torus();
        let net = ContactElementNet::from_contact_elements(&pts, &planes, DEFAULT_TOL).unwrap();
        let field = net.curvature_spheres(0, DEFAULT_TOL).unwrap();
        let err = synthesize_from_r_congruence(&field.spheres, net.lines().get(&[0, 0]).unwrap(), DEFAULT_TOL)
            .unwrap_err();
        assert!(matches!(err, Error::AtCell { ref source, .. } if matches!(**source, Error::Coincident)));
    }

    #[test]
    fn synthesis_from_points_gives_conical_planes() {
        let (pts, _) = torus();
        let spheres = pts.map(|x| SphereElement::Point(*x));
        let x0 = *pts.get(&[0, 0]).unwrap();
        // any oriented plane through the first point
        let seed_plane = Plane::through(v3(0.3, -0.5, 0.8).normalize(), &x0).unwrap();
        let seed = contact_element(&x0, &seed_plane, DEFAULT_TOL).unwrap();
        let net = synthesize_from_r_congruence(&spheres, &seed, DEFAULT_TOL).unwrap();
        let out_pts = net.points(DEFAULT_TOL).unwrap();
        for (u, x) in out_pts.iter() {
            assert!((x.unwrap() - pts.get(&u).unwrap()).norm() < 1e-9);
        }
        let out_planes = net.planes(DEFAULT_TOL).unwrap();
        for u in out_planes.quad_bases(0, 1) {
            let q = out_planes.quad(&u, 0, 1).unwrap();
            assert!(is_conical_quad(q[0], q[1], q[2], q[3], 1e-9), "{u:?}");
        }
        assert!(net.max_intersection_residual().0 < 1e-9);
    }

    #[test]
    fn synthesis_from_planes_gives_circular_points() {
        let (_, planes) = torus();
        let spheres = planes.map(|p| SphereElement::Plane(*p));
        let p0 = *planes.get(&[0, 0]).unwrap();
        // a point of the first plane other than the torus point
        let x0 = p0.normal() * p0.offset() + p0.normal().cross(&v3(0.0, 0.0, 1.0)).normalize() * 0.4;
        let seed = contact_element(&x0, &p0, DEFAULT_TOL).unwrap();
        let net = synthesize_from_r_congruence(&spheres, &seed, DEFAULT_TOL).unwrap();
        let pts = net.points(DEFAULT_TOL).unwrap();
        for u in pts.quad_bases(0, 1) {
            let q = pts.quad(&u, 0, 1).unwrap();
            // oracle: the fourth point lies on the circle through the other three
            let c = circumcircle(q[0], q[1], q[3], DEFAULT_TOL).unwrap();
            assert!(c.distance(q[2]) < 1e-8, "{u:?}");
        }
    }

    #[test]
    fn synthesis_rejects_spheres_outside_the_span() {
        let net = generic_net();
        let mut field = net.curvature_spheres(0, DEFAULT_TOL).unwrap().spheres;
        field.set(&[2, 2], SphereElement::sphere(v3(0.4, 0.1, 3.0), 0.8));
        let err = synthesize_from_r_congruence(&field, net.lines().get(&[0, 0]).unwrap(), DEFAULT_TOL).unwrap_err();
        match err {
            Error::AtCell { index, source } => {
                assert_eq!(index, vec![2, 2]);
                assert!(matches!(*source, Error::NotRCongruence(_)));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn miquel_unit_cube() {
        let x = miquel_complete(
            &v3(0.0, 0.0, 0.0),
            &v3(1.0, 0.0, 0.0),
            &v3(0.0, 1.0, 0.0),
            &v3(0.0, 0.0, 1.0),
            &v3(1.0, 1.0, 0.0),
            &v3(1.0, 0.0, 1.0),
            &v3(0.0, 1.0, 1.0),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!((x - v3(1.0, 1.0, 1.0)).amax() < 1e-12);
    }

    #[test]
    fn miquel_on_random_spherical_data() {
        use rand::{rngs::StdRng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..50 {
            let p = crate::random::spherical_hexahedron_points(&mut rng);
            let x = miquel_complete(&p[0], &p[1], &p[2], &p[3], &p[4], &p[5], &p[6], DEFAULT_TOL).unwrap();
            // oracle: on the unit sphere and on the three circles through the new face points
            assert_relative_eq!(x.norm(), 1.0, epsilon = 1e-9);
            for (a, b, c) in [(p[1], p[4], p[5]), (p[2], p[4], p[6]), (p[3], p[5], p[6])] {
                let circle = circumcircle(&a, &b, &c, DEFAULT_TOL).unwrap();
                assert!(circle.distance(&x) < 1e-8);
            }
        }
    }

    #[test]
    fn miquel_rejects_bad_faces() {
        let o = Vector3::zeros();
        let err = miquel_complete(
            &o,
            &v3(1.0, 0.0, 0.0),
            &v3(2.0, 0.0, 0.0),
            &v3(0.0, 0.0, 1.0),
            &v3(3.0, 0.0, 0.0),
            &v3(1.0, 0.0, 1.0),
            &v3(2.0, 0.0, 1.0),
            DEFAULT_TOL,
        );
        assert!(matches!(err, Err(Error::Degenerate(_))));
        let err = miquel_complete(
            &o,
            &v3(1.0, 0.0, 0.0),
            &v3(0.0, 1.0, 0.0),
            &v3(0.0, 0.0, 1.0),
            &v3(1.0, 1.2, 0.0),
            &v3(1.0, 0.0, 1.0),
            &v3(0.0, 1.0, 1.0),
            DEFAULT_TOL,
        );
        assert!(matches!(err, Err(Error::NotConcircular(_))));
    }

    #[test]
    fn conical_completion() {
        let x = Plane::new(v3(1.0, 0.0, 0.0), 0.0).unwrap();
        let y = Plane::new(v3(0.0, 1.0, 0.0), 0.0).unwrap();
        let z = z_plane(0.0);
        let v = v3(1.0, 1.0, 1.0) / 3f64.sqrt();
        let p = conical_complete(&x, &y, &z, &v, DEFAULT_TOL).unwrap();
        assert!(p.approx_eq(&Plane::new(v, 0.0).unwrap(), 1e-12));
        assert!(conical_complete(&x, &x, &z, &v, DEFAULT_TOL).is_err());
        assert!(matches!(
            conical_complete(&x, &y, &z, &(v * 0.9), DEFAULT_TOL),
            Err(Error::NonUnitNormal(_))
        ));
    }

    #[test]
    fn conical_completion_recovers_a_cone_plane() {
        // tangent planes of a cone with apex a, axis z, generator angle alpha
        let apex = v3(0.3, -0.2, 1.0);
        let alpha: f64 = 0.6;
        let plane = |phi: f64| {
            let n = v3(-alpha.cos() * phi.cos(), -alpha.cos() * phi.sin(), alpha.sin());
            Plane::through(n, &apex).unwrap()
        };
        let (p, pi, pj, pij) = (plane(0.1), plane(1.0), plane(2.5), plane(4.0));
        let q = conical_complete(&p, &pi, &pj, &pij.normal(), DEFAULT_TOL).unwrap();
        assert!(q.approx_eq(&pij, 1e-12));
        assert!(is_conical_quad(&p, &pi, &q, &pj, 1e-9));
    }

    #[test]
    fn pottmann_examples() {
        let p = z_plane(0.0);
        let step = pottmann_step(&Vector3::zeros(), &p, &PottmannDatum::Point(v3(1.0, 0.0, 1.0)), DEFAULT_TOL).unwrap();
        assert!(step.sphere.approx_eq(&SphereElement::sphere(v3(0.0, 0.0, 1.0), 1.0), 1e-12));
        // oracle: the sphere touches both planes at both points
        let (c, r) = step.sphere.center_radius().unwrap();
        assert!((c - (step.point + step.plane.normal() * r)).norm() < 1e-12);
        assert!(step.plane.contains(&step.point, 1e-12));
        assert!((step.plane.normal() - v3(-1.0, 0.0, 0.0)).norm() < 1e-12);

        let parallel = pottmann_step(&Vector3::zeros(), &p, &PottmannDatum::Plane(z_plane(2.0)), DEFAULT_TOL);
        assert!(matches!(parallel, Err(Error::Degenerate(_))));
        let tangent = pottmann_step(&Vector3::zeros(), &p, &PottmannDatum::Point(v3(1.0, 2.0, 0.0)), DEFAULT_TOL);
        assert!(matches!(tangent, Err(Error::Degenerate(_))));
    }

    #[test]
    fn pottmann_recovers_a_known_sphere() {
        let (c, r) = (v3(0.2, -0.4, 1.3), -0.9);
        let on = |d: Vector3<f64>| c - d.normalize() * r;
        let (x, x1) = (on(v3(0.1, 0.3, -1.0)), on(v3(0.7, -0.2, -0.6)));
        let tangent = |y: Vector3<f64>| crate::lie::sphere_tangent_plane(&c, r, &y).unwrap();
        let expected = SphereElement::sphere(c, r);
        let a = pottmann_step(&x, &tangent(x), &PottmannDatum::Point(x1), DEFAULT_TOL).unwrap();
        assert!(a.sphere.approx_eq(&expected, 1e-12));
        assert!(a.plane.approx_eq(&tangent(x1), 1e-12));
        let b = pottmann_step(&x, &tangent(x), &PottmannDatum::Plane(tangent(x1)), DEFAULT_TOL).unwrap();
        assert!(b.sphere.approx_eq(&expected, 1e-12));
        assert!((b.point - x1).norm() < 1e-12);
    }

    #[test]
    fn bisector_step_agrees_with_the_isotropic_line() {
        let x = v3(0.3, 0.1, -0.2);
        let p = Plane::through(v3(0.2, -0.3, 0.9).normalize(), &x).unwrap();
        let l = contact_element(&x, &p, DEFAULT_TOL).unwrap();
        for datum in [
            PottmannDatum::Point(v3(1.0, 0.5, 0.7)),
            PottmannDatum::Plane(Plane::new(v3(0.6, 0.0, 0.8), 0.4).unwrap()),
        ] {
            let step = pottmann_step(&x, &p, &datum, DEFAULT_TOL).unwrap();
            let s1 = match datum {
                PottmannDatum::Point(y) => lie_lift(&SphereElement::Point(y)),
                PottmannDatum::Plane(q) => lie_lift(&SphereElement::Plane(q)),
            };
            let l1 = unique_isotropic_line_through(&s1, &l, DEFAULT_TOL).unwrap();
            let hit = meet(&as_line(&l), &as_line(&l1), DEFAULT_TOL).unwrap();
            assert!(lie_unlift(&hit, DEFAULT_TOL).unwrap().approx_eq(&step.sphere, 1e-9));
        }
    }

    #[test]
    fn ribaucour_by_a_lie_reflection() {
        let (pts, planes) = torus();
        let net = ContactElementNet::from_contact_elements(&pts, &planes, DEFAULT_TOL).unwrap();
        let mirror = SignedVector::from_slice(Space::Lie, &[0.3, -0.2, 0.5, 0.4, 0.1, 0.2]).unwrap();
        assert!(mirror.square() > 0.0);
        let image = |l: &IsotropicLine| {
            let b: Vec<SignedVector> = l.span().basis().iter().map(|v| reflect(v, &mirror).unwrap()).collect();
            IsotropicLine::through(&b[0], &b[1], DEFAULT_TOL).unwrap()
        };
        let seed = Grid::from_fn(net.extents(), |u| {
            (u[0] == 0 || u[1] == 0).then(|| image(net.lines().get(u).unwrap()))
        });
        let plus = ribaucour_transform(&net, &seed, DEFAULT_TOL).unwrap();
        for (u, l) in plus.lines().iter() {
            assert!(l.unwrap().distance(&image(net.lines().get(&u).unwrap())) < 1e-8, "{u:?}");
        }
        let spheres = ribaucour_spheres(&net, &plus, DEFAULT_TOL).unwrap();
        assert_eq!(spheres.len(), net.lines().len());

        let itself = Grid::from_fn(net.extents(), |u| {
            (u[0] == 0 || u[1] == 0).then(|| net.lines().get(u).unwrap().clone())
        });
        assert!(ribaucour_transform(&net, &itself, DEFAULT_TOL).is_err());
    }

    #[test]
    fn generic_ribaucour_spheres_form_an_r_congruence() {
        use rand::{rngs::StdRng, SeedableRng};
        let (pts, planes) = torus();
        let net = ContactElementNet::from_contact_elements(&pts, &planes, DEFAULT_TOL).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let seed = crate::random::random_ribaucour_seed(&mut rng, &net, DEFAULT_TOL).unwrap();
        let plus = ribaucour_transform(&net, &seed, DEFAULT_TOL).unwrap();
        assert!(plus.max_intersection_residual().0 < 1e-9);
        let spheres = ribaucour_spheres(&net, &plus, DEFAULT_TOL).unwrap();
        for u in spheres.quad_bases(0, 1) {
            let q = spheres.quad(&u, 0, 1).unwrap();
            assert!(crate::spheres::is_r_congruence_quad(q[0], q[1], q[2], q[3], 1e-8), "{u:?}");
        }
    }

    #[test]
    fn torus_sampling_starts_at_the_outer_equator() {
        let s = torus_net(3.0, 1.0, [3, 3], (0.0, FRAC_PI_2 - 0.2), (0.0, PI / 4.0)).unwrap();
        assert!(is_principal(&s.points, &s.planes, DEFAULT_TOL).unwrap().principal);
        assert!(projective_distance(
            lie_lift(&SphereElement::Point(*s.points.get(&[0, 0]).unwrap())).coords(),
            lie_lift(&SphereElement::Point(v3(4.0, 0.0, 0.0))).coords()
        ) < 1e-12);
    }
}
