//! Lie sphere geometry: oriented spheres, planes, points and infinity as
//! points of the Lie quadric in P(R^{4,2}), contact elements as isotropic lines.

use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};
use crate::pseudo_euclid::{subspace_distance, SignedVector, Space, Subspace, E0, E6, EINF};

/// Allowed deviation of a plane normal from unit length.
pub const UNIT_TOL: f64 = 1e-9;

/// Oriented plane `<v, x> = d` with unit normal `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    normal: Vector3<f64>,
    offset: f64,
}

impl Plane {
    pub fn new(normal: Vector3<f64>, offset: f64) -> Result<Self> {
        let n = normal.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL || !offset.is_finite() {
            return Err(Error::NonUnitNormal(n));
        }
        Ok(Plane { normal, offset })
    }

    /// Plane with the given unit normal through `point`.
    pub fn through(normal: Vector3<f64>, point: &Vector3<f64>) -> Result<Self> {
        Plane::new(normal, normal.dot(point))
    }

    /// Normalizes a (non-zero) normal, scaling the offset along with it.
    pub(crate) fn from_unnormalized(normal: Vector3<f64>, offset: f64) -> Result<Self> {
        let n = normal.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NonUnitNormal(n));
        }
        Ok(Plane {
            normal: normal / n,
            offset: offset / n,
        })
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn signed_distance(&self, x: &Vector3<f64>) -> f64 {
        self.normal.dot(x) - self.offset
    }

    pub fn contains(&self, x: &Vector3<f64>, tol: f64) -> bool {
        self.signed_distance(x).abs() <= tol * (1.0 + x.norm().max(self.offset.abs()))
    }

    pub fn reflect_point(&self, x: &Vector3<f64>) -> Vector3<f64> {
        x - self.normal * (2.0 * self.signed_distance(x))
    }

    pub fn flipped(&self) -> Plane {
        Plane {
            normal: -self.normal,
            offset: -self.offset,
        }
    }

    pub fn approx_eq(&self, other: &Plane, tol: f64) -> bool {
        (self.normal - other.normal).amax() <= tol
            && (self.offset - other.offset).abs() <= tol * (1.0 + self.offset.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SphereElement {
    Sphere { center: Vector3<f64>, radius: f64 },
    Plane(Plane),
    Point(Vector3<f64>),
    Infinity,
}

impl SphereElement {
    /// Oriented sphere; a zero radius yields a point.
    pub fn sphere(center: Vector3<f64>, radius: f64) -> Self {
        if radius == 0.0 {
            SphereElement::Point(center)
        } else {
            SphereElement::Sphere { center, radius }
        }
    }

    pub fn plane(normal: Vector3<f64>, offset: f64) -> Result<Self> {
        Ok(SphereElement::Plane(Plane::new(normal, offset)?))
    }

    pub fn point(x: Vector3<f64>) -> Self {
        SphereElement::Point(x)
    }

    /// Center and signed radius, with points as radius-zero spheres.
    pub fn center_radius(&self) -> Option<(Vector3<f64>, f64)> {
        match *self {
            SphereElement::Sphere { center, radius } => Some((center, radius)),
            SphereElement::Point(x) => Some((x, 0.0)),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SphereElement::Sphere { .. } => "sphere",
            SphereElement::Plane(_) => "plane",
            SphereElement::Point(_) => "point",
            SphereElement::Infinity => "infinity",
        }
    }

    /// Same variant with parameters equal within `tol` (relative for large values).
    pub fn approx_eq(&self, other: &SphereElement, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
        let close3 =
            |a: &Vector3<f64>, b: &Vector3<f64>| (0..3).all(|k| close(a[k], b[k]));
        match (self, other) {
            (
                SphereElement::Sphere { center: c1, radius: r1 },
                SphereElement::Sphere { center: c2, radius: r2 },
            ) => close3(c1, c2) && close(*r1, *r2),
            (SphereElement::Plane(p), SphereElement::Plane(q)) => {
                close3(&p.normal, &q.normal) && close(p.offset, q.offset)
            }
            (SphereElement::Point(x), SphereElement::Point(y)) => close3(x, y),
            (SphereElement::Infinity, SphereElement::Infinity) => true,
            _ => false,
        }
    }
}

/// Tangent plane at `x0` of the oriented sphere `(c, r)`, oriented so that it
/// touches the sphere: `v = (c - x0) / r`.
pub fn sphere_tangent_plane(center: &Vector3<f64>, radius: f64, x0: &Vector3<f64>) -> Result<Plane> {
    if radius == 0.0 {
        return Err(Error::UnsupportedElement("tangent plane of a point".into()));
    }
    let v = (center - x0) / radius;
    Plane::from_unnormalized(v, v.dot(center) - radius)
}

pub fn lie_lift(e: &SphereElement) -> SignedVector {
    let c = match *e {
        SphereElement::Sphere { center, radius } => [
            center.x,
            center.y,
            center.z,
            1.0,
            center.norm_squared() - radius * radius,
            radius,
        ],
        SphereElement::Plane(p) => [
            p.normal.x,
            p.normal.y,
            p.normal.z,
            0.0,
            2.0 * p.offset,
            1.0,
        ],
        SphereElement::Point(x) => [x.x, x.y, x.z, 1.0, x.norm_squared(), 0.0],
        SphereElement::Infinity => [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
    };
    SignedVector::raw(Space::Lie, DVector::from_column_slice(&c))
}

pub fn lie_unlift(p: &SignedVector, tol: f64) -> Result<SphereElement> {
    if p.space() != Space::Lie {
        return Err(Error::SpaceMismatch(p.space().to_string(), Space::Lie.to_string()));
    }
    let scale = p.max_abs();
    if scale == 0.0 {
        return Err(Error::Invalid("zero vector is not a projective point".into()));
    }
    let res = p.isotropy_residual();
    if res > tol {
        return Err(Error::NotIsotropic(res));
    }
    let c = p.coords();
    let zero_e0 = c[E0].abs() <= tol * scale;
    let zero_e6 = c[E6].abs() <= tol * scale;
    Ok(match (zero_e0, zero_e6) {
        (true, true) => SphereElement::Infinity,
        (true, false) => {
            let s = 1.0 / c[E6];
            let v = Vector3::new(c[0], c[1], c[2]) * s;
            Plane::from_unnormalized(v, 0.5 * c[EINF] * s).map(SphereElement::Plane)?
        }
        (false, true) => SphereElement::Point(Vector3::new(c[0], c[1], c[2]) / c[E0]),
        (false, false) => SphereElement::Sphere {
            center: Vector3::new(c[0], c[1], c[2]) / c[E0],
            radius: c[E6] / c[E0],
        },
    })
}

/// Normalized `|<â, b̂>|`; zero exactly when the elements are in oriented contact.
pub fn contact_residual(a: &SphereElement, b: &SphereElement) -> f64 {
    let (la, lb) = (lie_lift(a), lie_lift(b));
    la.dot(&lb).abs() / (la.euclid_norm() * lb.euclid_norm())
}

pub fn oriented_contact(a: &SphereElement, b: &SphereElement, tol: f64) -> bool {
    contact_residual(a, b) <= tol
}

/// A contact element: a totally isotropic 2-space of R^{4,2}.
#[derive(Clone, Debug)]
pub struct IsotropicLine {
    span: Subspace,
}

impl IsotropicLine {
    pub fn new(span: Subspace, tol: f64) -> Result<Self> {
        if span.space() != Space::Lie {
            return Err(Error::SpaceMismatch(span.space().to_string(), Space::Lie.to_string()));
        }
        if span.dim() != 2 {
            return Err(Error::NotIsotropicLine(format!("dimension {}", span.dim())));
        }
        let g = span.gram();
        let worst = g.amax();
        if worst > tol {
            return Err(Error::NotIsotropicLine(format!(
                "form does not vanish (max |gram| {worst:e})"
            )));
        }
        Ok(IsotropicLine { span })
    }

    pub fn through(a: &SignedVector, b: &SignedVector, tol: f64) -> Result<Self> {
        IsotropicLine::new(Subspace::span(&[a.clone(), b.clone()], tol)?, tol)
    }

    pub fn span(&self) -> &Subspace {
        &self.span
    }

    pub fn into_span(self) -> Subspace {
        self.span
    }

    pub fn contains(&self, v: &SignedVector, tol: f64) -> bool {
        self.span.contains(v, tol)
    }

    /// Sine of the largest principal angle to another line.
    pub fn distance(&self, other: &IsotropicLine) -> f64 {
        subspace_distance(&self.span, &other.span)
    }
}

/// Contact element of a point on an oriented plane.
pub fn contact_element(x: &Vector3<f64>, p: &Plane, tol: f64) -> Result<IsotropicLine> {
    if !p.contains(x, tol) {
        return Err(Error::NotIncident(p.signed_distance(x)));
    }
    let xl = lie_lift(&SphereElement::Point(*x));
    let pl = lie_lift(&SphereElement::Plane(*p));
    // exact data: the lifts are orthogonal; the span check tolerates the incidence slack
    IsotropicLine::through(&xl, &pl, tol.max(1e-12) * 10.0)
}

/// Contact point (or infinity) and tangent plane of a contact element.
pub fn point_and_plane_of(l: &IsotropicLine, tol: f64) -> (SphereElement, Option<Plane>) {
    let b1 = l.span.vector(0);
    let b2 = l.span.vector(1);
    // combination with vanishing e6 component
    let q = if b1.get(E6).abs() < f64::EPSILON && b2.get(E6).abs() < f64::EPSILON {
        b1.clone()
    } else {
        &b1.scaled(b2.get(E6)) - &b2.scaled(b1.get(E6))
    };
    if q.get(E0).abs() <= tol * q.max_abs() {
        return (SphereElement::Infinity, None);
    }
    let x = Vector3::new(q.get(0), q.get(1), q.get(2)) / q.get(E0);
    let w = &b1.scaled(b2.get(E0)) - &b2.scaled(b1.get(E0));
    let plane = Plane::from_unnormalized(
        Vector3::new(w.get(0), w.get(1), w.get(2)) / w.get(E6),
        0.5 * w.get(EINF) / w.get(E6),
    )
    .ok();
    (SphereElement::Point(x), plane)
}

/// Member of the sphere pencil of a contact element: the sphere through the
/// contact point with signed radius `t` (`t = ±∞` gives the tangent plane).
/// For a contact element at infinity the members are the parallel planes
/// with offsets shifted by `t`, and `t = ±∞` gives infinity.
pub fn sphere_pencil_at(l: &IsotropicLine, t: f64, tol: f64) -> SphereElement {
    match point_and_plane_of(l, tol) {
        (SphereElement::Point(x), Some(p)) => {
            if t.is_infinite() {
                SphereElement::Plane(p)
            } else {
                SphereElement::sphere(x + p.normal() * t, t)
            }
        }
        _ => {
            if t.is_infinite() {
                return SphereElement::Infinity;
            }
            // every vector of the line has vanishing e0; take the one with the larger e6
            let b1 = l.span.vector(0);
            let b2 = l.span.vector(1);
            let w = if b1.get(E6).abs() >= b2.get(E6).abs() { b1 } else { b2 };
            let s = 1.0 / w.get(E6);
            let v = Vector3::new(w.get(0), w.get(1), w.get(2)) * s;
            let p = Plane::from_unnormalized(v, 0.5 * w.get(EINF) * s)
                .expect("isotropic line at infinity carries a plane");
            SphereElement::Plane(Plane::new(p.normal(), p.offset() + t).expect("unit normal"))
        }
    }
}
