//! Command implementations. Each one loads its input, delegates to a single
//! kernel operation and summarizes the result as a verification report.

use std::path::Path;

use curvnet_core::congruence::{
    check_congruence_consistency, complete_congruence_hexahedron, intersection_residual, ProjectiveLine,
};
use curvnet_core::generate::{revolution_net, sphere_net, torus_net, SampledNet};
use curvnet_core::grid::{fill_from_coordinate_surfaces, shifted, Grid};
use curvnet_core::laguerre::conical_residual;
use curvnet_core::lie::{lie_lift, IsotropicLine, Plane, SphereElement};
use curvnet_core::moebius::concircularity_residual;
use curvnet_core::principal::{
    conical_complete, miquel_complete, ribaucour_spheres, ribaucour_transform, synthesize_from_r_congruence,
    ContactElementNet,
};
use curvnet_core::qnet::{check_consistency, complete_hexahedron, dehom, hom, quad_planarity};
use curvnet_core::random::{random_congruence_cube, random_qnet_cube, random_ribaucour_seed};
use curvnet_core::spheres::{classify_q_quad, q_congruence_residual, r_congruence_residual, QQuadKind};
use curvnet_core::{Error, DEFAULT_TOL};
use nalgebra::Vector3;
use rand::{rngs::StdRng, SeedableRng};
use thiserror::Error;

use crate::cli::{CheckKind, Cli, Command, CompleteKind, EmitKind, SurfaceKind, SystemKind};
use crate::document::{
    contact_elements_document, isotropic_lines_document, lines_document, load_net, planes_document,
    points_document, DocError, NetDocument,
};
use crate::obj::export_obj;
use crate::report::{CellResidual, VerificationReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Document(#[from] DocError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Kernel(#[from] Error),
}

impl CliError {
    /// 2 for malformed input, 1 when the kernel rejects well-formed data.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Document(_) | CliError::Usage(_) => 2,
            CliError::Kernel(e) => {
                if is_input_error(e) {
                    2
                } else {
                    1
                }
            }
        }
    }
}

fn is_input_error(e: &Error) -> bool {
    match e {
        Error::AtCell { source, .. } => is_input_error(source),
        Error::Invalid(_)
        | Error::DimensionMismatch { .. }
        | Error::SpaceMismatch(..)
        | Error::NonUnitNormal(_)
        | Error::NotIncident(_)
        | Error::UnsupportedElement(_) => true,
        _ => false,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a command produces besides its report.
#[derive(Clone, Debug)]
pub enum Payload {
    Net(NetDocument),
    Text(String),
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: VerificationReport,
    pub payload: Option<Payload>,
}

struct Settings {
    tol: f64,
    profile: &'static str,
    seed: u64,
}

impl Settings {
    fn report(&self, check: &str, cells: Vec<CellResidual>) -> VerificationReport {
        VerificationReport::from_cells(check, self.profile, self.tol, cells)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_reals(s: &str, n: usize, what: &str) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| usage(format!("{what}: {e}")))?;
    if v.len() != n {
        return Err(usage(format!("{what}: expected {n} comma-separated numbers, got {}", v.len())));
    }
    Ok(v)
}

fn cell(index: Vec<usize>, direction: Option<usize>, residual: f64) -> CellResidual {
    CellResidual {
        index,
        direction,
        residual,
    }
}

/// Residual of every elementary quad of a complete grid, over all direction pairs.
fn quad_cells<T>(g: &Grid<T>, mut f: impl FnMut([&T; 4]) -> f64) -> CliResult<Vec<CellResidual>> {
    if g.dims() < 2 {
        return Err(usage("a net needs at least two lattice directions"));
    }
    if !g.is_complete() {
        return Err(usage("the net has empty cells"));
    }
    let mut out = Vec::new();
    for i in 0..g.dims() {
        for j in i + 1..g.dims() {
            for u in g.quad_bases(i, j) {
                let q = g.quad(&u, i, j).expect("complete grid");
                out.push(cell(u, None, f(q)));
            }
        }
    }
    Ok(out)
}

fn edge_cells(net: &ContactElementNet) -> Vec<CellResidual> {
    net.edge_residuals().into_iter().map(|(u, i, r)| cell(u, Some(i), r)).collect()
}

fn line_edge_cells(g: &Grid<ProjectiveLine>) -> Vec<CellResidual> {
    let mut out = Vec::new();
    for i in 0..g.dims() {
        for u in g.edge_bases(i) {
            if let (Some(a), Some(b)) = (g.get(&u), g.get(&shifted(&u, i))) {
                out.push(cell(u, Some(i), intersection_residual(a, b)));
            }
        }
    }
    out
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let s = Settings {
        tol: cli.tol.unwrap_or(DEFAULT_TOL),
        profile: if cli.tol.is_some() { "custom" } else { "default" },
        seed: cli.seed,
    };
    if !(s.tol > 0.0 && s.tol.is_finite()) {
        return Err(usage("--tol must be a positive number"));
    }
    match &cli.command {
        Command::Check { what, input } => check(&s, *what, input),
        Command::Complete { what, input, normals } => complete(&s, *what, input, normals.as_deref()),
        Command::Synthesize { input, plane, point } => synthesize(&s, input, plane.as_deref(), point.as_deref()),
        Command::Ribaucour { input } => ribaucour(&s, input),
        Command::Classify { input } => classify(&s, input),
        Command::ConsistencyTest {
            what,
            dim,
            instances,
            threshold,
        } => consistency_test(&s, *what, *dim as usize, *instances, *threshold),
        Command::Generate {
            what,
            extents,
            major,
            minor,
            radius,
            theta_range,
            phi_range,
            meridian,
            emit,
        } => {
            let ext = parse_reals(extents, 2, "--extents")?;
            if ext.iter().any(|x| x.fract() != 0.0 || *x < 2.0) {
                return Err(usage("--extents: need two integers of at least 2"));
            }
            let ext = [ext[0] as usize, ext[1] as usize];
            let th = parse_reals(theta_range, 2, "--theta-range")?;
            let ph = parse_reals(phi_range, 2, "--phi-range")?;
            let net = match what {
                SurfaceKind::Torus => torus_net(*major, *minor, ext, (th[0], th[1]), (ph[0], ph[1])),
                SurfaceKind::Sphere => sphere_net(*radius, ext, (th[0], th[1]), (ph[0], ph[1])),
                SurfaceKind::Revolution => {
                    let m = meridian.as_deref().ok_or_else(|| usage("revolution needs --meridian"))?;
                    let pts = m
                        .split(';')
                        .map(|p| parse_reals(p, 2, "--meridian").map(|v| (v[0], v[1])))
                        .collect::<CliResult<Vec<_>>>()?;
                    revolution_net(&pts, ext[1], (ph[0], ph[1]), s.tol)
                }
            }?;
            generate(&s, &format!("{what:?}").to_lowercase(), net, *emit)
        }
        Command::ExportObj { input } => {
            let doc = load_net(input, s.tol)?;
            let text = export_obj(&doc)?;
            let report = s.report("export-obj", Vec::new()).note(format!(
                "mesh: {} vertices, {} faces",
                text.lines().filter(|l| l.starts_with("v ")).count(),
                text.lines().filter(|l| l.starts_with("f ")).count()
            ));
            Ok(Outcome {
                report,
                payload: Some(Payload::Text(text)),
            })
        }
    }
}

fn check(s: &Settings, what: CheckKind, input: &Path) -> CliResult<Outcome> {
    let doc = load_net(input, s.tol)?;
    let (name, cells) = match what {
        CheckKind::Circular => {
            let g = doc.points()?;
            ("circular", quad_cells(&g, |q| concircularity_residual(q[0], q[1], q[2], q[3]))?)
        }
        CheckKind::Conical => {
            let g = doc.planes()?;
            ("conical", quad_cells(&g, |q| conical_residual(q[0], q[1], q[2], q[3]))?)
        }
        CheckKind::Principal => {
            let lines = doc.contact_elements(s.tol)?;
            let net = ContactElementNet::new(lines)?;
            ("principal", edge_cells(&net))
        }
        CheckKind::QCongruence => {
            let g = doc.spheres()?;
            ("q-congruence", quad_cells(&g, |q| q_congruence_residual(q[0], q[1], q[2], q[3]))?)
        }
        CheckKind::RCongruence => {
            let g = doc.spheres()?;
            ("r-congruence", quad_cells(&g, |q| r_congruence_residual(q[0], q[1], q[2], q[3]))?)
        }
    };
    Ok(Outcome {
        report: s.report(name, cells),
        payload: None,
    })
}

fn complete(s: &Settings, what: CompleteKind, input: &Path, normals: Option<&Path>) -> CliResult<Outcome> {
    let doc = load_net(input, s.tol)?;
    let tol = s.tol;
    let (name, out, cells) = match what {
        CompleteKind::Qnet => {
            let pts = doc.points()?;
            let mut g = pts.map(hom);
            fill_from_coordinate_surfaces(&mut g, |f, f1, f2, f3, f12, f13, f23| {
                complete_hexahedron(f, f1, f2, f3, f12, f13, f23, tol)
            })?;
            let cells = quad_cells(&g, |q| {
                quad_planarity(q[0], q[1], q[2], q[3], tol).map_or(f64::INFINITY, |p| p.residual)
            })?;
            let pts = g.try_map(|u, p| dehom(p, tol).ok_or_else(|| Error::AtInfinity.at(u)))?;
            ("complete qnet", points_document(&pts), cells)
        }
        CompleteKind::Miquel => {
            let mut g = doc.points()?;
            fill_from_coordinate_surfaces(&mut g, |x, x1, x2, x3, x12, x13, x23| {
                miquel_complete(x, x1, x2, x3, x12, x13, x23, tol)
            })?;
            let cells = quad_cells(&g, |q| concircularity_residual(q[0], q[1], q[2], q[3]))?;
            ("complete miquel", points_document(&g), cells)
        }
        CompleteKind::Congruence => {
            let mut g = doc.projective_lines(tol)?;
            fill_from_coordinate_surfaces(&mut g, |l, l1, l2, l3, l12, l13, l23| {
                complete_congruence_hexahedron(l, l1, l2, l3, l12, l13, l23, tol)
            })?;
            let cells = line_edge_cells(&g);
            ("complete congruence", lines_document(&g), cells)
        }
        CompleteKind::Conical => {
            let mut g = doc.planes()?;
            if g.dims() != 2 {
                return Err(usage("conical completion works on two-dimensional plane nets"));
            }
            let normals = match normals {
                Some(p) => load_net(p, tol)?.points()?,
                None => return Err(usage("conical completion needs --normals")),
            };
            if normals.extents() != g.extents() {
                return Err(usage("--normals must have the extents of the plane net"));
            }
            let mut order: Vec<Vec<usize>> = g.indices().collect();
            order.sort_by_key(|u| u[0] + u[1]);
            for u in order {
                if g.get(&u).is_some() {
                    continue;
                }
                if u[0] == 0 || u[1] == 0 {
                    return Err(usage(format!("missing plane on a coordinate line at {u:?}")));
                }
                let w = [u[0] - 1, u[1] - 1];
                let v = normals
                    .get(&u)
                    .ok_or_else(|| usage(format!("no normal given for cell {u:?}")))?;
                let p = conical_complete(
                    g.require(&w)?,
                    g.require(&[u[0], w[1]])?,
                    g.require(&[w[0], u[1]])?,
                    v,
                    tol,
                )
                .map_err(|e| e.at(&u))?;
                g.set(&u, p);
            }
            let cells = quad_cells(&g, |q| conical_residual(q[0], q[1], q[2], q[3]))?;
            ("complete conical", planes_document(&g), cells)
        }
    };
    Ok(Outcome {
        report: s.report(name, cells),
        payload: Some(Payload::Net(out)),
    })
}

fn synthesize(s: &Settings, input: &Path, plane: Option<&str>, point: Option<&str>) -> CliResult<Outcome> {
    let spheres = load_net(input, s.tol)?.spheres()?;
    if spheres.dims() != 2 || !spheres.is_complete() {
        return Err(usage("synthesis needs a complete two-dimensional sphere net"));
    }
    let first = spheres.require(&[0, 0])?;
    let other = match (plane, point) {
        (Some(p), None) => {
            let v = parse_reals(p, 4, "--plane")?;
            SphereElement::Plane(Plane::new(Vector3::new(v[0], v[1], v[2]), v[3]).map_err(|e| usage(e.to_string()))?)
        }
        (None, Some(p)) => {
            let v = parse_reals(p, 3, "--point")?;
            SphereElement::Point(Vector3::new(v[0], v[1], v[2]))
        }
        _ => return Err(usage("give exactly one of --plane or --point")),
    };
    let seed = IsotropicLine::through(&lie_lift(first), &lie_lift(&other), s.tol)
        .map_err(|_| usage(format!("the seed {} does not touch the first sphere", other.kind_name())))?;
    let net = synthesize_from_r_congruence(&spheres, &seed, s.tol)?;
    let doc = isotropic_lines_document(net.lines(), s.tol)?;
    Ok(Outcome {
        report: s.report("synthesize", edge_cells(&net)),
        payload: Some(Payload::Net(doc)),
    })
}

fn ribaucour(s: &Settings, input: &Path) -> CliResult<Outcome> {
    let net = ContactElementNet::new(load_net(input, s.tol)?.contact_elements(s.tol)?)?;
    let mut rng = StdRng::seed_from_u64(s.seed);
    let seed = random_ribaucour_seed(&mut rng, &net, s.tol)?;
    let plus = ribaucour_transform(&net, &seed, s.tol)?;
    let spheres = ribaucour_spheres(&net, &plus, s.tol)?;
    let cells = quad_cells(&spheres, |q| r_congruence_residual(q[0], q[1], q[2], q[3]))?;
    let doc = isotropic_lines_document(plus.lines(), s.tol)?.with_meta("seed", s.seed);
    let report = s
        .report("ribaucour", cells)
        .note(format!("transformed net intersection residual: {:e}", plus.max_intersection_residual().0));
    Ok(Outcome {
        report,
        payload: Some(Payload::Net(doc)),
    })
}

/// Ten decimals, trailing zeros dropped.
fn num(x: f64) -> String {
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn fmt_coord(a: f64, b: f64) -> String {
    let scale = 1.0 + a.abs().max(b.abs());
    if (a - b).abs() <= 1e-9 * scale {
        num(a)
    } else if (a + b).abs() <= 1e-9 * scale {
        format!("±{}", num(a.abs()))
    } else {
        format!("{}|{}", num(a), num(b))
    }
}

/// Human-readable classification, folding a point pair into `±` coordinates.
pub fn describe(kind: &QQuadKind) -> String {
    let v = |x: &Vector3<f64>| format!("({}, {}, {})", num(x.x), num(x.y), num(x.z));
    match kind {
        QQuadKind::OrthogonalCircle { center, radius, normal } => {
            format!("OrthogonalCircle center {} radius {} normal {}", v(center), num(*radius), v(normal))
        }
        QQuadKind::PointPair { plus, minus } => {
            let c: Vec<String> = (0..3).map(|k| fmt_coord(plus[k], minus[k])).collect();
            format!("PointPair ({}, {}, {})", c[0], c[1], c[2])
        }
        QQuadKind::SinglePoint { point } => format!("SinglePoint {}", v(point)),
    }
}

fn classify(s: &Settings, input: &Path) -> CliResult<Outcome> {
    let g = load_net(input, s.tol)?.spheres()?;
    if g.extents() != [2, 2] || !g.is_complete() {
        return Err(usage("classify needs a complete 2x2 sphere net"));
    }
    let q = [
        g.require(&[0, 0])?,
        g.require(&[1, 0])?,
        g.require(&[1, 1])?,
        g.require(&[0, 1])?,
    ];
    let c = classify_q_quad(q[0], q[1], q[2], q[3], s.tol)?;
    let residual = q_congruence_residual(q[0], q[1], q[2], q[3]);
    let report = s
        .report("classify", vec![cell(vec![0, 0], None, residual)])
        .note(describe(&c.kind))
        .note(format!("common value: {}", c.common_value));
    Ok(Outcome { report, payload: None })
}

fn consistency_test(
    s: &Settings,
    what: SystemKind,
    dim: usize,
    instances: Option<usize>,
    threshold: Option<f64>,
) -> CliResult<Outcome> {
    let (count, limit) = match (what, dim) {
        (SystemKind::Qnet, 4) => (100, 1e-8),
        (SystemKind::Qnet, _) => (20, 1e-7),
        (SystemKind::Congruence, 4) => (50, 1e-7),
        (SystemKind::Congruence, _) => (20, 1e-7),
    };
    let count = instances.unwrap_or(count);
    let limit = threshold.unwrap_or(limit);
    let mut rng = StdRng::seed_from_u64(s.seed);
    let mut cells = Vec::with_capacity(count);
    let mut routes = 0;
    for k in 0..count {
        let (dev, n) = match what {
            SystemKind::Qnet => {
                let r = check_consistency(&random_qnet_cube(&mut rng, dim, dim), s.tol).map_err(|e| e.at(&[k]))?;
                (r.max_deviation, r.candidates.len())
            }
            SystemKind::Congruence => {
                let r = check_congruence_consistency(&random_congruence_cube(&mut rng, dim, dim), s.tol)
                    .map_err(|e| e.at(&[k]))?;
                (r.max_deviation, r.candidates.len())
            }
        };
        routes = n;
        cells.push(cell(vec![k], None, dev));
    }
    let name = format!("consistency {} {dim}D", format!("{what:?}").to_lowercase());
    let report = VerificationReport::from_cells(&name, if threshold.is_some() { "custom" } else { "default" }, limit, cells)
        .note(format!("routes to the far corner: {routes}"));
    Ok(Outcome { report, payload: None })
}

fn generate(s: &Settings, name: &str, net: SampledNet, emit: EmitKind) -> CliResult<Outcome> {
    let lines = ContactElementNet::from_contact_elements(&net.points, &net.planes, s.tol)?;
    let doc = match emit {
        EmitKind::ContactElements => contact_elements_document(&net.points, &net.planes)?,
        EmitKind::Points => points_document(&net.points),
        EmitKind::Planes => planes_document(&net.planes),
    }
    .with_meta("surface", name);
    Ok(Outcome {
        report: s.report(&format!("generate {name}"), edge_cells(&lines)),
        payload: Some(Payload::Net(doc)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_parse_with_signs() {
        assert_eq!(parse_reals("-1.5, 2,3e-1", 3, "x").unwrap(), vec![-1.5, 2.0, 0.3]);
        assert!(parse_reals("1,2", 3, "x").is_err());
        assert!(parse_reals("1,a,2", 3, "x").is_err());
    }

    #[test]
    fn point_pairs_fold_into_plus_minus() {
        let k = QQuadKind::PointPair {
            plus: Vector3::new(0.5, 0.5, 0.25),
            minus: Vector3::new(0.5, 0.5, -0.25),
        };
        assert_eq!(describe(&k), "PointPair (0.5, 0.5, ±0.25)");
        assert_eq!(num(-1e-13), "0");
        assert_eq!(num(0.70710678118654746), "0.7071067812");
    }

    #[test]
    fn exit_codes_follow_the_error_kind() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Kernel(Error::Invalid("x".into()).at(&[1])).exit_code(), 2);
        assert_eq!(CliError::Kernel(Error::Coincident.at(&[1])).exit_code(), 1);
    }
}
