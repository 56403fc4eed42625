//! Sphere congruences: R-congruences (Q-nets of Lie lifts), planar and
//! cyclidic families, common tangent spheres, Q-congruences of non-oriented
//! spheres and their three types.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::lie::{lie_lift, lie_unlift, SphereElement};
use crate::moebius::moebius_lift;
use crate::pseudo_euclid::{least_squares, rank_residual, Signature, SignedVector, Subspace, E6};

fn lifts(spheres: &[&SphereElement]) -> Vec<SignedVector> {
    spheres.iter().map(|s| lie_lift(s)).collect()
}

/// Distance of the four Lie lifts from rank three.
pub fn r_congruence_residual(s: &SphereElement, si: &SphereElement, sij: &SphereElement, sj: &SphereElement) -> f64 {
    let l: Vec<DVector<f64>> = lifts(&[s, si, sij, sj]).into_iter().map(|v| v.into_coords()).collect();
    rank_residual(l.iter(), 3)
}

pub fn is_r_congruence_quad(s: &SphereElement, si: &SphereElement, sij: &SphereElement, sj: &SphereElement, tol: f64) -> bool {
    r_congruence_residual(s, si, sij, sj) <= tol
}

/// Distance of the four Möbius lifts from rank three; orientation is ignored.
pub fn q_congruence_residual(s: &SphereElement, si: &SphereElement, sij: &SphereElement, sj: &SphereElement) -> f64 {
    let l: Vec<DVector<f64>> = [s, si, sij, sj].iter().map(|e| moebius_lift(e).into_coords()).collect();
    rank_residual(l.iter(), 3)
}

pub fn is_q_congruence_quad(s: &SphereElement, si: &SphereElement, sij: &SphereElement, sj: &SphereElement, tol: f64) -> bool {
    q_congruence_residual(s, si, sij, sj) <= tol
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// Induced signature (2,1): a dual family of common touching spheres exists.
    Cyclidic,
    /// Induced signature (1,2).
    NonCyclidic,
}

/// One-parameter family of spheres cut from the Lie quadric by a 3-space.
#[derive(Clone, Debug)]
pub struct PlanarSphereFamily {
    sigma: Subspace,
    kind: FamilyKind,
    positive: Vec<SignedVector>,
    negative: Vec<SignedVector>,
}

impl PlanarSphereFamily {
    pub fn from_span(sigma: Subspace, tol: f64) -> Result<Self> {
        if sigma.dim() != 3 {
            return Err(Error::DegenerateFamily(format!("span has dimension {}", sigma.dim())));
        }
        let frame = sigma.form_frame(tol);
        if !frame.null.is_empty() {
            return Err(Error::DegenerateFamily(
                "the form is degenerate on the span (it contains an isotropic 2-space)".into(),
            ));
        }
        let kind = match (frame.positive.len(), frame.negative.len()) {
            (2, 1) => FamilyKind::Cyclidic,
            (1, 2) => FamilyKind::NonCyclidic,
            (p, q) => return Err(Error::DegenerateFamily(format!("span of signature ({p},{q}) carries no spheres"))),
        };
        Ok(PlanarSphereFamily {
            sigma,
            kind,
            positive: frame.positive,
            negative: frame.negative,
        })
    }

    pub fn sigma(&self) -> &Subspace {
        &self.sigma
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn signature(&self) -> Signature {
        match self.kind {
            FamilyKind::Cyclidic => Signature::new(2, 1, 0),
            FamilyKind::NonCyclidic => Signature::new(1, 2, 0),
        }
    }

    /// Isotropic representative of the family member at angle `theta`.
    pub fn lift_at(&self, theta: f64) -> SignedVector {
        let (c, s) = (theta.cos(), theta.sin());
        match self.kind {
            FamilyKind::Cyclidic => &(&self.positive[0].scaled(c) + &self.positive[1].scaled(s)) + &self.negative[0],
            FamilyKind::NonCyclidic => &(&self.negative[0].scaled(c) + &self.negative[1].scaled(s)) + &self.positive[0],
        }
    }

    /// Parameter of a family member; the inverse of [`family_sphere_at`].
    pub fn parameter_of(&self, s: &SphereElement, tol: f64) -> Result<f64> {
        let v = lie_lift(s);
        let r = self.sigma.residual(&v);
        if r > tol {
            return Err(Error::Invalid(format!("sphere is not a member of the family (residual {r:e})")));
        }
        let p: Vec<f64> = self.positive.iter().map(|b| b.inner(&v)).collect::<Result<_>>()?;
        let n: Vec<f64> = self.negative.iter().map(|b| b.inner(&v).map(|x| -x)).collect::<Result<_>>()?;
        Ok(match self.kind {
            FamilyKind::Cyclidic => (p[1] / n[0]).atan2(p[0] / n[0]),
            FamilyKind::NonCyclidic => (n[1] / p[0]).atan2(n[0] / p[0]),
        })
    }
}

pub fn family_of_quad(
    s: &SphereElement,
    si: &SphereElement,
    sij: &SphereElement,
    sj: &SphereElement,
    tol: f64,
) -> Result<PlanarSphereFamily> {
    let r = r_congruence_residual(s, si, sij, sj);
    if r > tol {
        return Err(Error::NotRCongruence(format!("Lie lifts have rank four (residual {r:e})")));
    }
    PlanarSphereFamily::from_span(Subspace::span(&lifts(&[s, si, sij, sj]), tol)?, tol)
}

pub fn family_sphere_at(f: &PlanarSphereFamily, theta: f64, tol: f64) -> Result<SphereElement> {
    lie_unlift(&f.lift_at(theta), tol)
}

pub fn family_parameter_of(f: &PlanarSphereFamily, s: &SphereElement, tol: f64) -> Result<f64> {
    f.parameter_of(s, tol)
}

/// The family of spheres touching every member; `None` for a non-cyclidic
/// family, whose members have no common touching sphere.
pub fn dual_family(f: &PlanarSphereFamily, tol: f64) -> Result<Option<PlanarSphereFamily>> {
    if f.kind == FamilyKind::NonCyclidic {
        return Ok(None);
    }
    PlanarSphereFamily::from_span(f.sigma.orthogonal_complement()?, tol).map(Some)
}

fn order_key(s: &SphereElement) -> (u8, f64) {
    match s {
        SphereElement::Sphere { radius, .. } => (0, *radius),
        SphereElement::Point(_) => (0, 0.0),
        SphereElement::Plane(_) => (1, 0.0),
        SphereElement::Infinity => (2, 0.0),
    }
}

/// The two isotropic directions orthogonal to a span of signature (3,1).
fn tangent_pair(vectors: &[SignedVector], tol: f64) -> Result<(SphereElement, SphereElement)> {
    let span = Subspace::span(vectors, tol)?;
    if span.dim() != 4 {
        return Err(Error::NonGeneric(format!("lifts span {} dimensions instead of 4", span.dim())));
    }
    let sig = span.signature(tol);
    if sig != Signature::new(3, 1, 0) {
        return Err(Error::NonGeneric(format!(
            "lifts span a space of signature ({},{},{})",
            sig.plus, sig.minus, sig.degenerate
        )));
    }
    let frame = span.orthogonal_complement()?.form_frame(tol);
    if frame.positive.len() != 1 || frame.negative.len() != 1 {
        return Err(Error::NonGeneric("complement is not of signature (1,1)".into()));
    }
    let a = lie_unlift(&(&frame.positive[0] + &frame.negative[0]), tol)?;
    let b = lie_unlift(&(&frame.positive[0] - &frame.negative[0]), tol)?;
    if matches!(a, SphereElement::Plane(_)) && matches!(b, SphereElement::Plane(_)) {
        return Err(Error::NonGeneric("the only touching elements are planes".into()));
    }
    let mut pair = [a, b];
    pair.sort_by(|x, y| {
        let (kx, ky) = (order_key(x), order_key(y));
        kx.0.cmp(&ky.0).then(kx.1.total_cmp(&ky.1))
    });
    let [a, b] = pair;
    Ok((a, b))
}

fn require_cyclidic(q: [&SphereElement; 4], tol: f64) -> Result<()> {
    match family_of_quad(q[0], q[1], q[2], q[3], tol)?.kind {
        FamilyKind::Cyclidic => Ok(()),
        FamilyKind::NonCyclidic => Err(Error::NonGeneric("quad family is not cyclidic".into())),
    }
}

/// The two spheres touching all spheres of two neighboring R-quads, each quad
/// given in cyclic order.
pub fn common_tangent_spheres_six(
    quad_a: [&SphereElement; 4],
    quad_b: [&SphereElement; 4],
    tol: f64,
) -> Result<(SphereElement, SphereElement)> {
    require_cyclidic(quad_a, tol)?;
    require_cyclidic(quad_b, tol)?;
    let all: Vec<&SphereElement> = quad_a.iter().chain(quad_b.iter()).copied().collect();
    tangent_pair(&lifts(&all), tol)
}

/// The two spheres touching all eight spheres of a hexahedron. The sphere at
/// index `k` sits at the cube vertex whose coordinates are the bits of `k`.
pub fn common_tangent_spheres_eight(spheres: [&SphereElement; 8], tol: f64) -> Result<(SphereElement, SphereElement)> {
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let k = 3 - i - j;
        for base in [0, 1 << k] {
            let (a, b) = (1 << i, 1 << j);
            require_cyclidic(
                [spheres[base], spheres[base | a], spheres[base | a | b], spheres[base | b]],
                tol,
            )?;
        }
    }
    tangent_pair(&lifts(&spheres), tol)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QQuadKind {
    OrthogonalCircle {
        center: Vector3<f64>,
        radius: f64,
        /// Normal of the plane of the circle.
        normal: Vector3<f64>,
    },
    PointPair {
        plus: Vector3<f64>,
        minus: Vector3<f64>,
    },
    SinglePoint {
        point: Vector3<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QQuadClassification {
    pub kind: QQuadKind,
    /// Common value of `|c - C|² - r²` over the four spheres.
    pub common_value: f64,
}

fn center_radius(s: &SphereElement) -> Result<(Vector3<f64>, f64)> {
    match s {
        SphereElement::Sphere { center, radius } => Ok((*center, radius.abs())),
        SphereElement::Point(x) => Ok((*x, 0.0)),
        other => Err(Error::UnsupportedElement(format!("{} in a Q-congruence quad", other.kind_name()))),
    }
}

/// Orthogonal circle, point pair or single point of a Q-congruence quad.
pub fn classify_q_quad(
    s: &SphereElement,
    si: &SphereElement,
    sij: &SphereElement,
    sj: &SphereElement,
    tol: f64,
) -> Result<QQuadClassification> {
    let cr: Vec<(Vector3<f64>, f64)> = [s, si, sij, sj].iter().map(|e| center_radius(e)).collect::<Result<_>>()?;
    let res = q_congruence_residual(s, si, sij, sj);
    if res > tol {
        return Err(Error::Invalid(format!("not a Q-congruence quad (residual {res:e})")));
    }
    let (c, r) = cr[0];
    let diffs: Vec<Vector3<f64>> = cr[1..].iter().map(|(ck, _)| ck - c).collect();
    let cov = diffs.iter().fold(Matrix3::zeros(), |acc, d| acc + d * d.transpose());
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    if eig.eigenvalues[order[1]] <= tol * eig.eigenvalues[order[2]].max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate("collinear centers".into()));
    }
    let mut normal: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned();
    let lead = normal.iamax();
    if normal[lead] < 0.0 {
        normal = -normal;
    }
    let mut a = DMatrix::zeros(4, 3);
    let mut b = DVector::zeros(4);
    for (k, (ck, rk)) in cr[1..].iter().enumerate() {
        a.row_mut(k).copy_from(&((ck - c) * 2.0).transpose());
        b[k] = ck.norm_squared() - c.norm_squared() - rk * rk + r * r;
    }
    a.row_mut(3).copy_from(&normal.transpose());
    b[3] = normal.dot(&c);
    let sol = least_squares(&a, &b, f64::EPSILON)
        .ok_or_else(|| Error::Degenerate("vanishing center system".into()))?;
    let center = Vector3::new(sol[0], sol[1], sol[2]);
    let w = (c - center).norm_squared() - r * r;
    let scale = cr
        .iter()
        .map(|(ck, rk)| (ck - center).norm_squared() + rk * rk)
        .fold(0.0, f64::max);
    let kind = if w.abs() <= tol * (1.0 + scale) {
        QQuadKind::SinglePoint { point: center }
    } else if w > 0.0 {
        QQuadKind::OrthogonalCircle {
            center,
            radius: w.sqrt(),
            normal,
        }
    } else {
        let h = (-w).sqrt();
        QQuadKind::PointPair {
            plus: center + normal * h,
            minus: center - normal * h,
        }
    };
    Ok(QQuadClassification { kind, common_value: w })
}

/// Whether some sphere or plane (not a point) touches all four oriented spheres.
pub fn check_condition_r(s: &SphereElement, si: &SphereElement, sij: &SphereElement, sj: &SphereElement, tol: f64) -> Result<bool> {
    let span = Subspace::span(&lifts(&[s, si, sij, sj]), tol)?;
    if span.dim() >= 6 {
        return Ok(false);
    }
    let comp = span.orthogonal_complement()?;
    let frame = comp.form_frame(tol);
    let carries_e6 = |v: &SignedVector| v.get(E6).abs() > tol * v.euclid_norm();
    if !frame.positive.is_empty() && !frame.negative.is_empty() {
        // the isotropic cone spans the whole complement
        return Ok(comp.basis().iter().any(carries_e6));
    }
    Ok(frame.null.iter().any(carries_e6))
}

/// Member `t` of the one-parameter family of fourth spheres making an R-quad.
pub fn r_quad_complete(s: &SphereElement, si: &SphereElement, sj: &SphereElement, t: f64, tol: f64) -> Result<SphereElement> {
    let family = PlanarSphereFamily::from_span(Subspace::span(&lifts(&[s, si, sj]), tol)?, tol)?;
    family_sphere_at(&family, t, tol)
}
