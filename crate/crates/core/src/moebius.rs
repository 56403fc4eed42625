//! Möbius geometry in P(R^{4,1}): non-oriented spheres, circles as
//! subspace pairs, inversions.

use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};
use crate::lie::{Plane, SphereElement};
use crate::pseudo_euclid::{rank_residual, reflect, SignedVector, Signature, Space, Subspace, E0, EINF};

pub fn moebius_lift(e: &SphereElement) -> SignedVector {
    let c = match *e {
        SphereElement::Sphere { center, radius } => [
            center.x,
            center.y,
            center.z,
            1.0,
            center.norm_squared() - radius * radius,
        ],
        SphereElement::Plane(p) => [p.normal().x, p.normal().y, p.normal().z, 0.0, 2.0 * p.offset()],
        SphereElement::Point(x) => [x.x, x.y, x.z, 1.0, x.norm_squared()],
        SphereElement::Infinity => [0.0, 0.0, 0.0, 0.0, 1.0],
    };
    SignedVector::raw(Space::Moebius, DVector::from_column_slice(&c))
}

/// Unlifts to a non-oriented element: spheres always carry a positive radius.
pub fn moebius_unlift(p: &SignedVector, tol: f64) -> Result<SphereElement> {
    if p.space() != Space::Moebius {
        return Err(Error::SpaceMismatch(p.space().to_string(), Space::Moebius.to_string()));
    }
    let scale = p.max_abs();
    if scale == 0.0 {
        return Err(Error::Invalid("zero vector is not a projective point".into()));
    }
    let rel = p.square() / p.coords().norm_squared();
    if rel < -tol {
        return Err(Error::ImaginarySphere);
    }
    let isotropic = rel <= tol;
    let c = p.coords();
    if c[E0].abs() <= tol * scale {
        if isotropic {
            return Ok(SphereElement::Infinity);
        }
        let v = Vector3::new(c[0], c[1], c[2]);
        return Ok(SphereElement::Plane(Plane::from_unnormalized(v, 0.5 * c[EINF])?));
    }
    let center = Vector3::new(c[0], c[1], c[2]) / c[E0];
    if isotropic {
        return Ok(SphereElement::Point(center));
    }
    let r2 = center.norm_squared() - c[EINF] / c[E0];
    Ok(SphereElement::Sphere {
        center,
        radius: r2.max(0.0).sqrt(),
    })
}

/// Normalized `|<ŝ1, ŝ2>|`; zero exactly for orthogonal spheres.
pub fn orthogonality_residual(a: &SphereElement, b: &SphereElement) -> f64 {
    let (la, lb) = (moebius_lift(a), moebius_lift(b));
    la.dot(&lb).abs() / (la.euclid_norm() * lb.euclid_norm())
}

pub fn orthogonal_spheres(a: &SphereElement, b: &SphereElement, tol: f64) -> bool {
    orthogonality_residual(a, b) <= tol
}

/// A circle, kept both as the pencil of spheres containing it (`dual`) and as
/// the span of its points (`carrier`).
#[derive(Clone, Debug)]
pub struct Circle {
    dual: Subspace,
    carrier: Subspace,
    center: Vector3<f64>,
    radius: f64,
    normal: Vector3<f64>,
}

impl Circle {
    pub fn new(dual: Subspace, carrier: Subspace, tol: f64) -> Result<Self> {
        if dual.space() != Space::Moebius || carrier.space() != Space::Moebius {
            return Err(Error::Invalid("circle subspaces must live in R^(4,1)".into()));
        }
        if dual.signature(tol) != Signature::new(2, 0, 0) {
            return Err(Error::NoFiniteCircle);
        }
        if carrier.signature(tol) != Signature::new(2, 1, 0) {
            return Err(Error::NoFiniteCircle);
        }
        for a in dual.basis() {
            for b in carrier.basis() {
                if a.dot(&b).abs() > tol {
                    return Err(Error::Invalid("circle dual and carrier are not orthogonal".into()));
                }
            }
        }
        let (center, radius, normal) = euclidean_circle(&dual, tol)?;
        Ok(Circle {
            dual,
            carrier,
            center,
            radius,
            normal,
        })
    }

    pub fn from_carrier(carrier: Subspace, tol: f64) -> Result<Self> {
        let dual = carrier.orthogonal_complement()?;
        Circle::new(dual, carrier, tol)
    }

    pub fn dual(&self) -> &Subspace {
        &self.dual
    }

    pub fn carrier(&self) -> &Subspace {
        &self.carrier
    }

    pub fn center(&self) -> Vector3<f64> {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Unit normal of the supporting plane (sign arbitrary).
    pub fn normal(&self) -> Vector3<f64> {
        self.normal
    }

    /// Euclidean distance from `x` to the circle.
    pub fn distance(&self, x: &Vector3<f64>) -> f64 {
        let d = x - self.center;
        let h = d.dot(&self.normal);
        let radial = (d - self.normal * h).norm();
        ((radial - self.radius).powi(2) + h * h).sqrt()
    }

    pub fn contains(&self, x: &Vector3<f64>, tol: f64) -> bool {
        self.carrier.contains(&moebius_lift(&SphereElement::Point(*x)), tol)
    }
}

/// Center, radius and plane normal from two independent spheres through the circle.
fn euclidean_circle(dual: &Subspace, tol: f64) -> Result<(Vector3<f64>, f64, Vector3<f64>)> {
    let s1 = dual.vector(0);
    let s2 = dual.vector(1);
    // the plane of the circle is the member with vanishing e0
    let w = &s1.scaled(s2.get(E0)) - &s2.scaled(s1.get(E0));
    let v = Vector3::new(w.get(0), w.get(1), w.get(2));
    let n = v.norm();
    if n <= tol * w.max_abs() {
        return Err(Error::NoFiniteCircle);
    }
    let normal = v / n;
    let d = 0.5 * w.get(EINF) / n;
    let s = if s1.get(E0).abs() >= s2.get(E0).abs() { s1 } else { s2 };
    if s.get(E0).abs() <= tol * s.max_abs() {
        return Err(Error::NoFiniteCircle);
    }
    let c0 = Vector3::new(s.get(0), s.get(1), s.get(2)) / s.get(E0);
    let r0_sq = c0.norm_squared() - s.get(EINF) / s.get(E0);
    let h = normal.dot(&c0) - d;
    let center = c0 - normal * h;
    let r2 = r0_sq - h * h;
    if r2 <= 0.0 {
        return Err(Error::NoFiniteCircle);
    }
    Ok((center, r2.sqrt(), normal))
}

pub fn circumcircle(x1: &Vector3<f64>, x2: &Vector3<f64>, x3: &Vector3<f64>, tol: f64) -> Result<Circle> {
    let (a, b) = (x2 - x1, x3 - x1);
    if a.cross(&b).norm() <= tol * a.norm() * b.norm() || a.norm() == 0.0 || b.norm() == 0.0 {
        return Err(Error::NoFiniteCircle);
    }
    let lifts: Vec<SignedVector> = [x1, x2, x3]
        .iter()
        .map(|x| moebius_lift(&SphereElement::Point(**x)))
        .collect();
    let carrier = Subspace::span(&lifts, tol)?;
    if carrier.dim() != 3 {
        return Err(Error::NoFiniteCircle);
    }
    Circle::from_carrier(carrier, tol)
}

/// Scale-free rank-3 residual of the four Möbius lifts.
pub fn concircularity_residual(x: &Vector3<f64>, xi: &Vector3<f64>, xij: &Vector3<f64>, xj: &Vector3<f64>) -> f64 {
    let lifts: Vec<DVector<f64>> = [x, xi, xij, xj]
        .iter()
        .map(|p| moebius_lift(&SphereElement::Point(**p)).into_coords())
        .collect();
    rank_residual(lifts.iter(), 3)
}

pub fn concircular(x: &Vector3<f64>, xi: &Vector3<f64>, xij: &Vector3<f64>, xj: &Vector3<f64>, tol: f64) -> bool {
    concircularity_residual(x, xi, xij, xj) <= tol
}

fn mirror_of(s: &SphereElement) -> Result<SignedVector> {
    match s {
        SphereElement::Sphere { .. } | SphereElement::Plane(_) => Ok(moebius_lift(s)),
        other => Err(Error::UnsupportedElement(format!(
            "reflection in a {}",
            other.kind_name()
        ))),
    }
}

/// Inversion in a sphere or reflection in a plane, applied to a point.
/// The inversion center maps to infinity.
pub fn apply_reflection(s: &SphereElement, x: &Vector3<f64>, tol: f64) -> Result<SphereElement> {
    apply_reflection_to(s, &SphereElement::Point(*x), tol)
}

/// The same Möbius reflection applied to any element; orientation is dropped.
pub fn apply_reflection_to(s: &SphereElement, e: &SphereElement, tol: f64) -> Result<SphereElement> {
    let m = mirror_of(s)?;
    let image = reflect(&moebius_lift(e), &m)?;
    moebius_unlift(&image, tol)
}
