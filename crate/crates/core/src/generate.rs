//! Sample nets on surfaces of revolution, sampled along meridians and parallels.
//! Direction 0 runs along the meridian, direction 1 along the parallel.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lie::{contact_element, Plane, SphereElement};
use crate::principal::synthesize_from_r_congruence;

#[derive(Clone, Debug)]
pub struct SampledNet {
    pub points: Grid<Vector3<f64>>,
    pub planes: Grid<Plane>,
    /// Parameter values along each direction.
    pub params: [Vec<f64>; 2],
}

fn samples(n: usize, (a, b): (f64, f64)) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Invalid("each direction needs at least two samples".into()));
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

/// Surface of revolution from meridian samples with analytic unit normals.
fn revolve(
    meridian: &[(f64, f64)],
    normals: &[(f64, f64)],
    phi: Vec<f64>,
    theta: Vec<f64>,
) -> Result<SampledNet> {
    let ext = [meridian.len(), phi.len()];
    let points = Grid::from_fn(&ext, |u| {
        let (rho, z) = meridian[u[0]];
        let p = phi[u[1]];
        Some(Vector3::new(rho * p.cos(), rho * p.sin(), z))
    });
    let planes = points.try_map(|u, x| {
        let (nr, nz) = normals[u[0]];
        let p = phi[u[1]];
        Plane::through(Vector3::new(nr * p.cos(), nr * p.sin(), nz), x)
    })?;
    Ok(SampledNet {
        points,
        planes,
        params: [theta, phi],
    })
}

/// Torus with core radius `major` and tube radius `minor`, outward normals.
/// The meridian angle must stay away from the top and bottom circles.
pub fn torus_net(
    major: f64,
    minor: f64,
    extents: [usize; 2],
    theta_range: (f64, f64),
    phi_range: (f64, f64),
) -> Result<SampledNet> {
    if !(minor > 0.0 && major > minor) {
        return Err(Error::Invalid("torus needs major > minor > 0".into()));
    }
    let theta = samples(extents[0], theta_range)?;
    let phi = samples(extents[1], phi_range)?;
    if theta.iter().any(|t| t.cos().abs() < 1e-6) {
        return Err(Error::Degenerate("meridian samples reach the top or bottom circle".into()));
    }
    let meridian: Vec<(f64, f64)> = theta
        .iter()
        .map(|t| (major + minor * t.cos(), minor * t.sin()))
        .collect();
    let normals: Vec<(f64, f64)> = theta.iter().map(|t| (t.cos(), t.sin())).collect();
    revolve(&meridian, &normals, phi, theta)
}

/// Latitude/longitude net on a round sphere centered at the origin.
pub fn sphere_net(
    radius: f64,
    extents: [usize; 2],
    lat_range: (f64, f64),
    lon_range: (f64, f64),
) -> Result<SampledNet> {
    if radius <= 0.0 {
        return Err(Error::Invalid("sphere radius must be positive".into()));
    }
    let lat = samples(extents[0], lat_range)?;
    let lon = samples(extents[1], lon_range)?;
    if lat.iter().any(|t| t.cos().abs() < 1e-6) {
        return Err(Error::Degenerate("latitude samples reach a pole".into()));
    }
    let meridian: Vec<(f64, f64)> = lat.iter().map(|t| (radius * t.cos(), radius * t.sin())).collect();
    let normals: Vec<(f64, f64)> = lat.iter().map(|t| (t.cos(), t.sin())).collect();
    revolve(&meridian, &normals, lon, lat)
}

/// Surface of revolution through a meridian polygon `(distance to axis, height)`.
/// Points are exact samples; planes come from the synthesis with the first
/// plane normal to the first meridian segment's normal.
pub fn revolution_net(meridian: &[(f64, f64)], n_phi: usize, phi_range: (f64, f64), tol: f64) -> Result<SampledNet> {
    if meridian.len() < 2 {
        return Err(Error::Invalid("meridian needs at least two samples".into()));
    }
    if meridian.iter().any(|(r, _)| *r <= 0.0) {
        return Err(Error::Invalid("meridian samples must stay off the axis".into()));
    }
    let phi = samples(n_phi, phi_range)?;
    let ext = [meridian.len(), n_phi];
    let points = Grid::from_fn(&ext, |u| {
        let (rho, z) = meridian[u[0]];
        let p = phi[u[1]];
        Some(Vector3::new(rho * p.cos(), rho * p.sin(), z))
    });
    let (dr, dz) = (meridian[1].0 - meridian[0].0, meridian[1].1 - meridian[0].1);
    let len = dr.hypot(dz);
    if len == 0.0 {
        return Err(Error::Degenerate("repeated meridian sample".into()));
    }
    let p0 = phi[0];
    let normal = Vector3::new(dz * p0.cos(), dz * p0.sin(), -dr) / len;
    let x0 = *points.get(&[0, 0]).expect("grid is complete");
    let seed = contact_element(&x0, &Plane::through(normal, &x0)?, tol)?;
    let spheres = points.map(|x| SphereElement::Point(*x));
    let net = synthesize_from_r_congruence(&spheres, &seed, tol)?;
    let params = [(0..meridian.len()).map(|k| k as f64).collect(), phi];
    Ok(SampledNet {
        points,
        planes: net.planes(tol)?,
        params,
    })
}
