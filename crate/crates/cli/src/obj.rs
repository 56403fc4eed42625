//! Quad-mesh export of two-dimensional point nets.

use std::fmt::Write;

use crate::document::{DocError, DocResult, NetDocument};

/// One `v` line per grid point in storage order and one `f` line per quad,
/// visiting `(u,v), (u+1,v), (u+1,v+1), (u,v+1)` with 1-based indices.
pub fn export_obj(doc: &NetDocument) -> DocResult<String> {
    if doc.dims != 2 {
        return Err(DocError::Schema(format!("mesh export needs a 2-dimensional net, got {}", doc.dims)));
    }
    let pts = doc.points()?;
    if !pts.is_complete() {
        return Err(DocError::Schema("mesh export needs every point".into()));
    }
    let (n0, n1) = (doc.extents[0], doc.extents[1]);
    let mut out = String::new();
    for x in pts.values().iter().flatten() {
        writeln!(out, "v {:?} {:?} {:?}", x.x, x.y, x.z).expect("writing to a string");
    }
    let id = |a: usize, b: usize| a + n0 * b + 1;
    for b in 0..n1.saturating_sub(1) {
        for a in 0..n0 - 1 {
            writeln!(out, "f {} {} {} {}", id(a, b), id(a + 1, b), id(a + 1, b + 1), id(a, b + 1))
                .expect("writing to a string");
        }
    }
    Ok(out)
}
