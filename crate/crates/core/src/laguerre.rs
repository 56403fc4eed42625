//! Laguerre geometry: oriented planes on the Blaschke cylinder in P(R^{3,1,1}),
//! spheres in the dual space, and the cyclographic (Minkowski) picture.

use nalgebra::{DVector, Matrix3, Matrix4, SymmetricEigen, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::lie::{Plane, SphereElement};
use crate::pseudo_euclid::{rank_residual, SignedVector, Space};

/// Blaschke coordinates: `(e1, e2, e3, e6, e∞)`.
const BL_E6: usize = 3;
const BL_EINF: usize = 4;

/// An oriented plane lifted to the Blaschke cylinder.
#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkePoint(SignedVector);

impl BlaschkePoint {
    pub fn new(rep: SignedVector) -> Result<Self> {
        if rep.space() != Space::Blaschke {
            return Err(Error::SpaceMismatch(rep.space().to_string(), Space::Blaschke.to_string()));
        }
        Ok(BlaschkePoint(rep))
    }

    pub fn rep(&self) -> &SignedVector {
        &self.0
    }
}

/// Sphere coordinates in the dual space, basis `(e1, e2, e3, e6, e0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaguerreSphereCoord(DVector<f64>);

impl LaguerreSphereCoord {
    pub fn new(rep: DVector<f64>) -> Result<Self> {
        if rep.len() != 5 {
            return Err(Error::DimensionMismatch {
                expected: 5,
                got: rep.len(),
            });
        }
        Ok(LaguerreSphereCoord(rep))
    }

    pub fn rep(&self) -> &DVector<f64> {
        &self.0
    }
}

pub fn blaschke_lift(p: &Plane) -> BlaschkePoint {
    let v = p.normal();
    BlaschkePoint(SignedVector::raw(
        Space::Blaschke,
        DVector::from_column_slice(&[v.x, v.y, v.z, 1.0, 2.0 * p.offset()]),
    ))
}

pub fn blaschke_unlift(b: &BlaschkePoint, tol: f64) -> Result<Plane> {
    let c = b.0.coords();
    let scale = b.0.max_abs();
    if scale == 0.0 || c[BL_E6].abs() <= tol * scale {
        return Err(Error::Invalid("Blaschke point has no plane representative".into()));
    }
    let res = b.0.isotropy_residual();
    if res > tol {
        return Err(Error::NotIsotropic(res));
    }
    let s = 1.0 / c[BL_E6];
    Plane::from_unnormalized(Vector3::new(c[0], c[1], c[2]) * s, 0.5 * c[BL_EINF] * s)
}

/// Lift of a sphere or point (a sphere of radius zero).
pub fn laguerre_sphere_lift(e: &SphereElement) -> Result<LaguerreSphereCoord> {
    let (c, r) = e
        .center_radius()
        .ok_or_else(|| Error::UnsupportedElement(format!("Laguerre sphere lift of a {}", e.kind_name())))?;
    Ok(LaguerreSphereCoord(DVector::from_column_slice(&[c.x, c.y, c.z, r, 1.0])))
}

pub fn laguerre_sphere_unlift(s: &LaguerreSphereCoord, tol: f64) -> Result<SphereElement> {
    let c = &s.0;
    let scale = c.amax();
    if scale == 0.0 || c[4].abs() <= tol * scale {
        return Err(Error::Invalid("sphere coordinate with vanishing e0 component".into()));
    }
    let center = Vector3::new(c[0], c[1], c[2]) / c[4];
    let r = c[3] / c[4];
    Ok(if r.abs() <= tol * (1.0 + center.norm()) {
        SphereElement::Point(center)
    } else {
        SphereElement::sphere(center, r)
    })
}

/// Cross pairing between the Blaschke space and its dual, coupling `e∞` with
/// `e0` by `-1/2`; equals `<c, v> - r - d` on normalized lifts.
pub fn pairing(p: &BlaschkePoint, s: &LaguerreSphereCoord) -> f64 {
    let a = p.0.coords();
    let b = &s.0;
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[BL_E6] * b[3] - 0.5 * a[BL_EINF] * b[4]
}

/// Same orientation and normal: the lifts lie on one generator of the cylinder.
pub fn parallel_planes(a: &Plane, b: &Plane, tol: f64) -> bool {
    (a.normal() - b.normal()).amax() <= tol
}

/// A point of Minkowski space R^{3,1}: center and signed radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycloPoint {
    pub center: Vector3<f64>,
    pub radius: f64,
}

impl CycloPoint {
    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.center.x, self.center.y, self.center.z, self.radius)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        CycloPoint {
            center: Vector3::new(v.x, v.y, v.z),
            radius: v.w,
        }
    }

    pub fn to_element(&self) -> SphereElement {
        SphereElement::sphere(self.center, self.radius)
    }
}

pub fn cyclo_lift(e: &SphereElement) -> Result<CycloPoint> {
    let (center, radius) = e
        .center_radius()
        .ok_or_else(|| Error::UnsupportedElement(format!("cyclographic lift of a {}", e.kind_name())))?;
    Ok(CycloPoint { center, radius })
}

/// Minkowski square of the difference; zero for spheres in oriented contact.
pub fn minkowski_gap(a: &CycloPoint, b: &CycloPoint) -> f64 {
    (a.center - b.center).norm_squared() - (a.radius - b.radius).powi(2)
}

/// Residual of the incidence between an oriented plane and the cone of
/// spheres touching it: `<c, v> - r - d`.
pub fn cyclographic_contact(p: &Plane, s: &CycloPoint) -> f64 {
    s.center.dot(&p.normal()) - s.radius - p.offset()
}

fn eta() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0))
}

/// Laguerre transformation in the cyclographic model: `σ ↦ λ A σ + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaguerreAffine {
    lorentz: Matrix4<f64>,
    scale: f64,
    shift: Vector4<f64>,
}

impl LaguerreAffine {
    pub fn new(lorentz: Matrix4<f64>, scale: f64, shift: Vector4<f64>, tol: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Invalid(format!("scale must be positive, got {scale}")));
        }
        let defect = (lorentz.transpose() * eta() * lorentz - eta()).amax();
        if defect > tol * lorentz.norm_squared().max(1.0) {
            return Err(Error::Invalid(format!("matrix is not Lorentz (defect {defect:e})")));
        }
        Ok(LaguerreAffine {
            lorentz,
            scale,
            shift,
        })
    }

    pub fn identity() -> Self {
        LaguerreAffine {
            lorentz: Matrix4::identity(),
            scale: 1.0,
            shift: Vector4::zeros(),
        }
    }

    /// Adds `t` to every signed radius: the offset of all tangent planes along their normals.
    pub fn radius_shift(t: f64) -> Self {
        LaguerreAffine {
            shift: Vector4::new(0.0, 0.0, 0.0, t),
            ..Self::identity()
        }
    }

    /// Hyperbolic rotation mixing spatial axis `k` with the radius.
    pub fn boost(k: usize, rapidity: f64) -> Self {
        let mut a = Matrix4::identity();
        let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
        a[(k, k)] = ch;
        a[(3, 3)] = ch;
        a[(k, 3)] = sh;
        a[(3, k)] = sh;
        LaguerreAffine {
            lorentz: a,
            ..Self::identity()
        }
    }

    pub fn apply(&self, s: &CycloPoint) -> CycloPoint {
        CycloPoint::from_vector(&(self.lorentz * s.as_vector() * self.scale + self.shift))
    }
}

pub fn laguerre_transform(t: &LaguerreAffine, s: &CycloPoint) -> CycloPoint {
    t.apply(s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeOfRevolution {
    pub apex: Vector3<f64>,
    /// Oriented so that every plane normal makes the same acute angle with it.
    pub axis: Vector3<f64>,
    /// Angle between the axis and the generators.
    pub half_angle: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeFit {
    pub cone: ConeOfRevolution,
    /// Largest distance of the fitted apex from the four planes.
    pub apex_residual: f64,
    /// Largest deviation of `<axis, v>` from its common value.
    pub axis_residual: f64,
}

pub fn fit_cone(p: &Plane, pi: &Plane, pij: &Plane, pj: &Plane, tol: f64) -> Result<ConeFit> {
    let planes = [p, pi, pij, pj];
    let normals: Vec<Vector3<f64>> = planes.iter().map(|q| q.normal()).collect();
    if normals.iter().all(|n| (n - normals[0]).amax() <= tol) {
        return Err(Error::NotConical("all normals coincide".into()));
    }
    let mean = normals.iter().sum::<Vector3<f64>>() / 4.0;
    let cov = normals
        .iter()
        .fold(Matrix3::zeros(), |acc, n| acc + (n - mean) * (n - mean).transpose());
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lmax = eig.eigenvalues[order[2]];
    if eig.eigenvalues[order[1]] <= tol * lmax {
        return Err(Error::NotConical("normals do not determine an axis".into()));
    }
    let mut axis: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned();
    let mut kappa = axis.dot(&mean);
    if kappa < 0.0 {
        axis = -axis;
        kappa = -kappa;
    }
    let axis_residual = normals
        .iter()
        .map(|n| (axis.dot(n) - kappa).abs())
        .fold(0.0, f64::max);
    if axis_residual > tol {
        return Err(Error::NotConical(format!(
            "normals are not concircular (residual {axis_residual:e})"
        )));
    }
    if kappa <= tol {
        return Err(Error::NotConical("normals lie on a great circle (cylinder)".into()));
    }

    let a = planes
        .iter()
        .fold(Matrix3::zeros(), |acc, q| acc + q.normal() * q.normal().transpose());
    let b = planes
        .iter()
        .fold(Vector3::zeros(), |acc, q| acc + q.normal() * q.offset());
    let ae = SymmetricEigen::new(a);
    if ae.eigenvalues.min() <= tol * ae.eigenvalues.max() {
        return Err(Error::NotConical("planes do not meet in a unique point".into()));
    }
    let apex = a
        .try_inverse()
        .ok_or_else(|| Error::NotConical("planes do not meet in a unique point".into()))?
        * b;
    let apex_residual = planes
        .iter()
        .map(|q| q.signed_distance(&apex).abs())
        .fold(0.0, f64::max);
    let scale = 1.0 + apex.norm().max(planes.iter().map(|q| q.offset().abs()).fold(0.0, f64::max));
    if apex_residual > tol * scale {
        return Err(Error::NotConical(format!(
            "planes are not concurrent (residual {apex_residual:e})"
        )));
    }
    Ok(ConeFit {
        cone: ConeOfRevolution {
            apex,
            axis,
            half_angle: kappa.min(1.0).asin(),
        },
        apex_residual,
        axis_residual,
    })
}

/// Rank-3 residual of the four Blaschke lifts.
pub fn conical_residual(p: &Plane, pi: &Plane, pij: &Plane, pj: &Plane) -> f64 {
    let lifts: Vec<DVector<f64>> = [p, pi, pij, pj]
        .iter()
        .map(|q| blaschke_lift(q).0.into_coords())
        .collect();
    rank_residual(lifts.iter(), 3)
}

pub fn is_conical_quad(p: &Plane, pi: &Plane, pij: &Plane, pj: &Plane, tol: f64) -> bool {
    conical_residual(p, pi, pij, pj) <= tol
}
