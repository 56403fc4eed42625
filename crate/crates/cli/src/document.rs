//! Net documents: a JSON file holding one kind of lattice data on a box in Z^m.
//!
//! Entries are stored in lexicographic order with the first lattice direction
//! varying fastest. A `null` entry marks a cell left for a completion command.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use curvnet_core::congruence::ProjectiveLine;
use curvnet_core::grid::Grid;
use curvnet_core::lie::{contact_element, point_and_plane_of, IsotropicLine, Plane, SphereElement};
use curvnet_core::pseudo_euclid::{SignedVector, Space, Subspace};
use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Points,
    Planes,
    Spheres,
    ContactElements,
    Lines,
}

impl Kind {
    /// Reals per entry.
    pub fn arity(self) -> usize {
        match self {
            Kind::Points => 3,
            Kind::Planes | Kind::Spheres => 4,
            Kind::ContactElements => 7,
            Kind::Lines => 12,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Points => "points",
            Kind::Planes => "planes",
            Kind::Spheres => "spheres",
            Kind::ContactElements => "contact_elements",
            Kind::Lines => "lines",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDocument {
    pub schema_version: u32,
    pub kind: Kind,
    pub dims: usize,
    pub extents: Vec<usize>,
    pub entries: Vec<Option<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Error)]
pub enum DocError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema: {0}")]
    Schema(String),
    #[error("cell {index:?}: {message}")]
    Cell { index: Vec<usize>, message: String },
    #[error("expected a {expected} document, got {got}")]
    WrongKind { expected: String, got: &'static str },
}

pub type DocResult<T> = std::result::Result<T, DocError>;

/// Plane normals must be unit length to this accuracy.
const UNIT_TOL: f64 = 1e-9;

impl NetDocument {
    pub fn new(kind: Kind, extents: &[usize], entries: Vec<Option<Vec<f64>>>) -> Self {
        NetDocument {
            schema_version: SCHEMA_VERSION,
            kind,
            dims: extents.len(),
            extents: extents.to_vec(),
            entries,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    fn index_of(&self, k: usize) -> Vec<usize> {
        let mut k = k;
        self.extents
            .iter()
            .map(|&n| {
                let i = k % n.max(1);
                k /= n.max(1);
                i
            })
            .collect()
    }

    /// Checks the schema and every per-kind invariant. `tol` bounds the
    /// point/plane incidence of contact elements.
    pub fn validate(&self, tol: f64) -> DocResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(DocError::Schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.dims != self.extents.len() {
            return Err(DocError::Schema(format!(
                "dims is {} but extents has {} entries",
                self.dims,
                self.extents.len()
            )));
        }
        if self.dims == 0 || self.extents.contains(&0) {
            return Err(DocError::Schema("extents must be nonempty and positive".into()));
        }
        let count: usize = self.extents.iter().product();
        if count != self.entries.len() {
            return Err(DocError::Schema(format!(
                "extents {:?} need {count} entries, found {}",
                self.extents,
                self.entries.len()
            )));
        }
        for (k, e) in self.entries.iter().enumerate() {
            let Some(e) = e else { continue };
            let index = self.index_of(k);
            let bad = |message: String| DocError::Cell {
                index: index.clone(),
                message,
            };
            if e.len() != self.kind.arity() {
                return Err(bad(format!(
                    "{} entries have {} reals, found {}",
                    self.kind.name(),
                    self.kind.arity(),
                    e.len()
                )));
            }
            if e.iter().any(|x| !x.is_finite()) {
                return Err(bad("non-finite value".into()));
            }
            match self.kind {
                Kind::Planes | Kind::ContactElements => {
                    let off = if self.kind == Kind::Planes { 0 } else { 3 };
                    let n = Vector3::new(e[off], e[off + 1], e[off + 2]).norm();
                    if (n - 1.0).abs() > UNIT_TOL {
                        return Err(bad(format!("plane normal has length {n}, expected 1")));
                    }
                    if self.kind == Kind::ContactElements {
                        let x = Vector3::new(e[0], e[1], e[2]);
                        let v = Vector3::new(e[3], e[4], e[5]);
                        let gap = v.dot(&x) - e[6];
                        if gap.abs() > tol * (1.0 + x.norm() + e[6].abs()) {
                            return Err(bad(format!("point is off its plane by {gap:e}")));
                        }
                    }
                }
                Kind::Lines => {
                    let (a, b) = (DVector::from_column_slice(&e[..6]), DVector::from_column_slice(&e[6..]));
                    if a.norm() == 0.0 || b.norm() == 0.0 {
                        return Err(bad("line spanned by a zero vector".into()));
                    }
                }
                Kind::Points | Kind::Spheres => {}
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str, tol: f64) -> DocResult<Self> {
        let doc: NetDocument = serde_json::from_str(text).map_err(|e| DocError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        doc.validate(tol)?;
        Ok(doc)
    }

    pub fn to_json(&self) -> DocResult<String> {
        if self.entries.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(DocError::Schema("refusing to write non-finite values".into()));
        }
        let mut s = serde_json::to_string_pretty(self).map_err(|e| DocError::Schema(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn is_complete(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    fn expect_kind(&self, allowed: &[Kind], expected: &str) -> DocResult<()> {
        if allowed.contains(&self.kind) {
            Ok(())
        } else {
            Err(DocError::WrongKind {
                expected: expected.into(),
                got: self.kind.name(),
            })
        }
    }

    fn grid<T>(&self, mut f: impl FnMut(&[usize], &[f64]) -> DocResult<T>) -> DocResult<Grid<T>> {
        let values = self
            .entries
            .iter()
            .enumerate()
            .map(|(k, e)| e.as_ref().map(|e| f(&self.index_of(k), e)).transpose())
            .collect::<DocResult<Vec<_>>>()?;
        Grid::from_values(&self.extents, values).map_err(|e| DocError::Schema(e.to_string()))
    }

    /// Points, or the contact points of contact elements.
    pub fn points(&self) -> DocResult<Grid<Vector3<f64>>> {
        self.expect_kind(&[Kind::Points, Kind::ContactElements], "points")?;
        self.grid(|_, e| Ok(Vector3::new(e[0], e[1], e[2])))
    }

    /// Planes, or the tangent planes of contact elements.
    pub fn planes(&self) -> DocResult<Grid<Plane>> {
        self.expect_kind(&[Kind::Planes, Kind::ContactElements], "planes")?;
        let off = if self.kind == Kind::Planes { 0 } else { 3 };
        self.grid(|u, e| {
            Plane::new(Vector3::new(e[off], e[off + 1], e[off + 2]), e[off + 3]).map_err(|err| DocError::Cell {
                index: u.to_vec(),
                message: err.to_string(),
            })
        })
    }

    /// Oriented spheres (radius 0 gives a point); point and plane documents
    /// are read as spheres of those kinds.
    pub fn spheres(&self) -> DocResult<Grid<SphereElement>> {
        match self.kind {
            Kind::Spheres => self.grid(|_, e| Ok(SphereElement::sphere(Vector3::new(e[0], e[1], e[2]), e[3]))),
            Kind::Points => Ok(self.points()?.map(|x| SphereElement::Point(*x))),
            Kind::Planes => Ok(self.planes()?.map(|p| SphereElement::Plane(*p))),
            _ => Err(DocError::WrongKind {
                expected: "spheres, points or planes".into(),
                got: self.kind.name(),
            }),
        }
    }

    /// Contact elements as isotropic lines of the Lie quadric.
    pub fn contact_elements(&self, tol: f64) -> DocResult<Grid<IsotropicLine>> {
        match self.kind {
            Kind::ContactElements => {
                let pts = self.points()?;
                let planes = self.planes()?;
                pts.try_map(|u, x| {
                    let p = planes.require(u)?;
                    contact_element(x, p, tol).map_err(|e| e.at(u))
                })
                .map_err(|e| DocError::Schema(e.to_string()))
            }
            Kind::Lines => self.grid(|u, e| {
                let a = SignedVector::new(Space::Lie, DVector::from_column_slice(&e[..6]));
                let b = SignedVector::new(Space::Lie, DVector::from_column_slice(&e[6..]));
                let line = a
                    .and_then(|a| b.map(|b| (a, b)))
                    .and_then(|(a, b)| IsotropicLine::through(&a, &b, tol));
                line.map_err(|err| DocError::Cell {
                    index: u.to_vec(),
                    message: err.to_string(),
                })
            }),
            _ => Err(DocError::WrongKind {
                expected: "contact_elements or lines".into(),
                got: self.kind.name(),
            }),
        }
    }

    /// Lines of projective 5-space, each given by two homogeneous points.
    pub fn projective_lines(&self, tol: f64) -> DocResult<Grid<ProjectiveLine>> {
        self.expect_kind(&[Kind::Lines], "lines")?;
        self.grid(|u, e| {
            let space = Space::Projective(6);
            let a = SignedVector::new(space, DVector::from_column_slice(&e[..6]));
            let b = SignedVector::new(space, DVector::from_column_slice(&e[6..]));
            let line = a
                .and_then(|a| b.map(|b| (a, b)))
                .and_then(|(a, b)| ProjectiveLine::through(&a, &b, tol));
            line.map_err(|err| DocError::Cell {
                index: u.to_vec(),
                message: err.to_string(),
            })
        })
    }
}

fn entries_of<T>(g: &Grid<T>, mut f: impl FnMut(&T) -> Vec<f64>) -> Vec<Option<Vec<f64>>> {
    g.values().iter().map(|v| v.as_ref().map(&mut f)).collect()
}

pub fn points_document(g: &Grid<Vector3<f64>>) -> NetDocument {
    NetDocument::new(Kind::Points, g.extents(), entries_of(g, |x| vec![x.x, x.y, x.z]))
}

pub fn planes_document(g: &Grid<Plane>) -> NetDocument {
    NetDocument::new(Kind::Planes, g.extents(), entries_of(g, plane_entry))
}

fn plane_entry(p: &Plane) -> Vec<f64> {
    let v = p.normal();
    vec![v.x, v.y, v.z, p.offset()]
}

/// Fails on planes and infinity, which have no (center, radius) form.
pub fn spheres_document(g: &Grid<SphereElement>) -> DocResult<NetDocument> {
    let mut entries = Vec::with_capacity(g.len());
    for (u, s) in g.iter() {
        entries.push(match s {
            None => None,
            Some(SphereElement::Point(x)) => Some(vec![x.x, x.y, x.z, 0.0]),
            Some(SphereElement::Sphere { center, radius }) => Some(vec![center.x, center.y, center.z, *radius]),
            Some(other) => {
                return Err(DocError::Cell {
                    index: u,
                    message: format!("a {} cannot be stored in a spheres document", other.kind_name()),
                })
            }
        });
    }
    Ok(NetDocument::new(Kind::Spheres, g.extents(), entries))
}

pub fn contact_elements_document(points: &Grid<Vector3<f64>>, planes: &Grid<Plane>) -> DocResult<NetDocument> {
    if points.extents() != planes.extents() {
        return Err(DocError::Schema("point and plane grids differ in extents".into()));
    }
    let entries = points
        .values()
        .iter()
        .zip(planes.values())
        .map(|(x, p)| match (x, p) {
            (Some(x), Some(p)) => {
                let mut e = vec![x.x, x.y, x.z];
                e.extend(plane_entry(p));
                Some(e)
            }
            _ => None,
        })
        .collect();
    Ok(NetDocument::new(Kind::ContactElements, points.extents(), entries))
}

/// Contact elements of a net of isotropic lines; every line needs a finite contact point.
pub fn isotropic_lines_document(g: &Grid<IsotropicLine>, tol: f64) -> DocResult<NetDocument> {
    let mut entries = Vec::with_capacity(g.len());
    for (u, l) in g.iter() {
        entries.push(match l {
            None => None,
            Some(l) => match point_and_plane_of(l, tol) {
                (SphereElement::Point(x), Some(p)) => {
                    let mut e = vec![x.x, x.y, x.z];
                    e.extend(plane_entry(&p));
                    Some(e)
                }
                _ => {
                    return Err(DocError::Cell {
                        index: u,
                        message: "contact element at infinity".into(),
                    })
                }
            },
        });
    }
    Ok(NetDocument::new(Kind::ContactElements, g.extents(), entries))
}

pub fn lines_document(g: &Grid<ProjectiveLine>) -> NetDocument {
    NetDocument::new(
        Kind::Lines,
        g.extents(),
        entries_of(g, |l| subspace_entry(l.span())),
    )
}

fn subspace_entry(s: &Subspace) -> Vec<f64> {
    s.basis().into_iter().flat_map(|v| v.into_coords().iter().copied().collect::<Vec<_>>()).collect()
}

pub fn load_net(path: &Path, tol: f64) -> DocResult<NetDocument> {
    let text = fs::read_to_string(path).map_err(|source| DocError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    NetDocument::from_json(&text, tol)
}

pub fn save_net(doc: &NetDocument, path: &Path) -> DocResult<()> {
    fs::write(path, doc.to_json()?).map_err(|source| DocError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use curvnet_core::generate::torus_net;

    const TOL: f64 = 1e-9;

    fn torus_doc() -> NetDocument {
        let s = torus_net(3.0, 1.0, [4, 5], (-1.0, 1.0), (0.0, 2.0)).unwrap();
        contact_elements_document(&s.points, &s.planes).unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let doc = torus_doc().with_meta("source", "torus");
        let back = NetDocument::from_json(&doc.to_json().unwrap(), TOL).unwrap();
        assert_eq!(back, doc);
        for (a, b) in doc.entries.iter().flatten().flatten().zip(back.entries.iter().flatten().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn round_trip_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        let doc = torus_doc();
        save_net(&doc, &path).unwrap();
        assert_eq!(load_net(&path, TOL).unwrap(), doc);
    }

    #[test]
    fn extents_must_match_the_entry_count() {
        let mut doc = torus_doc();
        doc.extents = vec![4, 4];
        assert!(matches!(doc.validate(TOL), Err(DocError::Schema(_))));
    }

    #[test]
    fn short_normal_names_the_cell() {
        let mut doc = planes_document(&Grid::from_fn(&[2, 2], |_| Some(Plane::new(Vector3::z(), 0.0).unwrap())));
        doc.entries[3] = Some(vec![0.0, 0.0, 0.9, 0.0]);
        match doc.validate(TOL) {
            Err(DocError::Cell { index, message }) => {
                assert_eq!(index, vec![1, 1]);
                assert!(message.contains("0.9"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn contact_elements_need_incidence() {
        let mut doc = torus_doc();
        doc.entries[5].as_mut().unwrap()[6] += 0.01;
        assert!(matches!(doc.validate(TOL), Err(DocError::Cell { ref index, .. }) if index == &vec![1, 1]));
    }

    #[test]
    fn parse_errors_carry_a_position() {
        let err = NetDocument::from_json("{\n  \"kind\": \"points\",\n  oops\n}", TOL).unwrap_err();
        assert!(matches!(err, DocError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let doc = NetDocument::new(Kind::Points, &[1, 2], vec![Some(vec![0.0; 3]), Some(vec![0.0; 4])]);
        assert!(matches!(doc.validate(TOL), Err(DocError::Cell { ref index, .. }) if index == &vec![0, 1]));
    }

    #[test]
    fn contact_elements_give_points_planes_and_lines() {
        let doc = torus_doc();
        let lines = doc.contact_elements(TOL).unwrap();
        let again = isotropic_lines_document(&lines, TOL).unwrap();
        for (a, b) in doc.entries.iter().flatten().zip(again.entries.iter().flatten()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
        assert!(doc.spheres().is_err());
        assert_eq!(doc.points().unwrap().len(), 20);
    }

    #[test]
    fn missing_entries_survive() {
        let doc = NetDocument::new(Kind::Points, &[2, 1], vec![Some(vec![1.0, 2.0, 3.0]), None]);
        let back = NetDocument::from_json(&doc.to_json().unwrap(), TOL).unwrap();
        assert!(!back.is_complete());
        assert!(back.points().unwrap().get(&[1, 0]).is_none());
    }
}
