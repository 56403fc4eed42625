//! Signature-aware linear algebra over homogeneous coordinates.
//!
//! Storage bases: the Lie space uses `(e1, e2, e3, e0, e∞, e6)` with
//! `<e0, e∞> = -1/2` and `<e6, e6> = -1`; the Möbius space drops `e6`.
//! The Blaschke space `(e1, e2, e3, e6, e∞)` carries the degenerate form
//! `diag(1, 1, 1, -1, 0)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Index of the `e0` coordinate in Lie and Möbius vectors.
pub const E0: usize = 3;
/// Index of the `e∞` coordinate in Lie and Möbius vectors.
pub const EINF: usize = 4;
/// Index of the extra time-like coordinate in Lie vectors.
pub const E6: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// R^{4,2}: oriented spheres, planes, points and infinity.
    Lie,
    /// R^{4,1}: non-oriented spheres and points.
    Moebius,
    /// R^{3,1,1}: oriented planes, degenerate form.
    Blaschke,
    /// R^{3,1}: (center, signed radius).
    Minkowski,
    /// Homogeneous coordinates of projective space with the Euclidean form.
    Projective(usize),
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::Lie => 6,
            Space::Moebius | Space::Blaschke => 5,
            Space::Minkowski => 4,
            Space::Projective(n) => n,
        }
    }

    pub fn gram(self) -> DMatrix<f64> {
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        match self {
            Space::Lie | Space::Moebius => {
                for i in 0..3 {
                    g[(i, i)] = 1.0;
                }
                g[(E0, EINF)] = -0.5;
                g[(EINF, E0)] = -0.5;
                if self == Space::Lie {
                    g[(E6, E6)] = -1.0;
                }
            }
            Space::Blaschke => {
                for i in 0..3 {
                    g[(i, i)] = 1.0;
                }
                g[(3, 3)] = -1.0;
            }
            Space::Minkowski => {
                for i in 0..3 {
                    g[(i, i)] = 1.0;
                }
                g[(3, 3)] = -1.0;
            }
            Space::Projective(_) => g.fill_with_identity(),
        }
        g
    }

    pub fn signature(self) -> Signature {
        match self {
            Space::Lie => Signature::new(4, 2, 0),
            Space::Moebius => Signature::new(4, 1, 0),
            Space::Blaschke => Signature::new(3, 1, 1),
            Space::Minkowski => Signature::new(3, 1, 0),
            Space::Projective(n) => Signature::new(n, 0, 0),
        }
    }

    pub fn is_degenerate(self) -> bool {
        self.signature().degenerate > 0
    }

    fn form(self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        match self {
            Space::Lie | Space::Moebius => {
                let mut s = a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
                    - 0.5 * (a[E0] * b[EINF] + a[EINF] * b[E0]);
                if self == Space::Lie {
                    s -= a[E6] * b[E6];
                }
                s
            }
            Space::Blaschke | Space::Minkowski => {
                a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3]
            }
            Space::Projective(_) => a.dot(b),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Lie => write!(f, "R^(4,2)"),
            Space::Moebius => write!(f, "R^(4,1)"),
            Space::Blaschke => write!(f, "R^(3,1,1)"),
            Space::Minkowski => write!(f, "R^(3,1)"),
            Space::Projective(n) => write!(f, "R^{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub degenerate: usize,
}

impl Signature {
    pub const fn new(plus: usize, minus: usize, degenerate: usize) -> Self {
        Signature {
            plus,
            minus,
            degenerate,
        }
    }

    pub fn total(&self) -> usize {
        self.plus + self.minus + self.degenerate
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.plus, self.minus, self.degenerate)
    }
}

/// Coordinates in one of the storage bases together with the space they live in.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedVector {
    space: Space,
    coords: DVector<f64>,
}

impl SignedVector {
    pub fn new(space: Space, coords: DVector<f64>) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: coords.len(),
            });
        }
        Ok(SignedVector { space, coords })
    }

    pub fn from_slice(space: Space, coords: &[f64]) -> Result<Self> {
        Self::new(space, DVector::from_column_slice(coords))
    }

    pub(crate) fn raw(space: Space, coords: DVector<f64>) -> Self {
        debug_assert_eq!(coords.len(), space.dim());
        SignedVector { space, coords }
    }

    pub fn zero(space: Space) -> Self {
        SignedVector::raw(space, DVector::zeros(space.dim()))
    }

    pub fn basis(space: Space, i: usize) -> Self {
        let mut v = Self::zero(space);
        v.coords[i] = 1.0;
        v
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn get(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn inner(&self, other: &SignedVector) -> Result<f64> {
        check_same_space(self.space, other.space)?;
        Ok(self.space.form(&self.coords, &other.coords))
    }

    /// Inner product without the space check; callers guarantee matching spaces.
    pub(crate) fn dot(&self, other: &SignedVector) -> f64 {
        debug_assert_eq!(self.space, other.space);
        self.space.form(&self.coords, &other.coords)
    }

    pub fn square(&self) -> f64 {
        self.dot(self)
    }

    pub fn euclid_norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.amax()
    }

    /// Isotropy relative to the coordinate norm.
    pub fn is_isotropic(&self, tol: f64) -> bool {
        self.isotropy_residual() <= tol
    }

    pub fn isotropy_residual(&self) -> f64 {
        let n2 = self.coords.norm_squared();
        if n2 == 0.0 {
            return 0.0;
        }
        self.square().abs() / n2
    }

    pub fn scaled(&self, s: f64) -> SignedVector {
        SignedVector::raw(self.space, &self.coords * s)
    }

    /// Unit Euclidean coordinate norm; the zero vector is returned unchanged.
    pub fn unit(&self) -> SignedVector {
        let n = self.coords.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(1.0 / n)
        }
    }
}

fn check_same_space(a: Space, b: Space) -> Result<()> {
    if a != b {
        return Err(Error::SpaceMismatch(a.to_string(), b.to_string()));
    }
    Ok(())
}

impl Add<&SignedVector> for &SignedVector {
    type Output = SignedVector;
    fn add(self, rhs: &SignedVector) -> SignedVector {
        assert_eq!(self.space, rhs.space, "adding vectors of different spaces");
        SignedVector::raw(self.space, &self.coords + &rhs.coords)
    }
}

impl Add for SignedVector {
    type Output = SignedVector;
    fn add(self, rhs: SignedVector) -> SignedVector {
        &self + &rhs
    }
}

impl Sub<&SignedVector> for &SignedVector {
    type Output = SignedVector;
    fn sub(self, rhs: &SignedVector) -> SignedVector {
        assert_eq!(self.space, rhs.space, "subtracting vectors of different spaces");
        SignedVector::raw(self.space, &self.coords - &rhs.coords)
    }
}

impl Sub for SignedVector {
    type Output = SignedVector;
    fn sub(self, rhs: SignedVector) -> SignedVector {
        &self - &rhs
    }
}

impl Mul<f64> for &SignedVector {
    type Output = SignedVector;
    fn mul(self, s: f64) -> SignedVector {
        self.scaled(s)
    }
}

impl Mul<f64> for SignedVector {
    type Output = SignedVector;
    fn mul(self, s: f64) -> SignedVector {
        self.scaled(s)
    }
}

impl Neg for &SignedVector {
    type Output = SignedVector;
    fn neg(self) -> SignedVector {
        self.scaled(-1.0)
    }
}

impl Neg for SignedVector {
    type Output = SignedVector;
    fn neg(self) -> SignedVector {
        self.scaled(-1.0)
    }
}

// ---- dense helpers ----

/// Thin SVD with descending singular values. Backed by faer: nalgebra's
/// bidiagonal SVD returns inaccurate singular vectors for some rank-deficient inputs.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub(crate) fn svd(m: &DMatrix<f64>) -> Svd {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Svd {
            u: DMatrix::zeros(r, 0),
            s: Vec::new(),
            v: DMatrix::zeros(c, 0),
        };
    }
    let a = faer::Mat::<f64>::from_fn(r, c, |i, j| m[(i, j)]);
    let d = a.thin_svd().expect("svd of a finite matrix");
    let (u, s, v) = (d.U(), d.S().column_vector(), d.V());
    Svd {
        u: DMatrix::from_fn(r, k, |i, j| u[(i, j)]),
        s: (0..k).map(|i| s[i]).collect(),
        v: DMatrix::from_fn(c, k, |i, j| v[(i, j)]),
    }
}

/// Minimum-norm least-squares solution, cutting singular values below `rcond·σ_max`.
pub(crate) fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> Option<DVector<f64>> {
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return None;
    }
    let utb = d.u.transpose() * b;
    let mut x = DVector::zeros(a.ncols());
    for (i, &sv) in d.s.iter().enumerate() {
        if sv > rcond * smax {
            x += d.v.column(i) * (utb[i] / sv);
        }
    }
    Some(x)
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    svd(m).s
}

/// Matrix whose columns are the given vectors scaled to unit length; zero columns are dropped.
pub fn unit_columns<'a>(cols: impl IntoIterator<Item = &'a DVector<f64>>) -> Option<DMatrix<f64>> {
    let unit: Vec<DVector<f64>> = cols
        .into_iter()
        .filter_map(|c| {
            let n = c.norm();
            (n > 0.0).then(|| c / n)
        })
        .collect();
    if unit.is_empty() {
        None
    } else {
        Some(DMatrix::from_columns(&unit))
    }
}

/// How far the vectors are from spanning at most `rank` dimensions:
/// the ratio of the `(rank+1)`-th to the largest singular value of the
/// column-normalized matrix. Zero when there are not enough vectors.
pub fn rank_residual<'a>(cols: impl IntoIterator<Item = &'a DVector<f64>>, rank: usize) -> f64 {
    let Some(m) = unit_columns(cols) else {
        return 0.0;
    };
    let s = singular_values(&m);
    if s.len() <= rank || s[0] == 0.0 {
        return 0.0;
    }
    s[rank] / s[0]
}

/// Orthonormal basis (columns) of the right nullspace of `m`.
pub fn nullspace(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let (s, v) = right_singular_pairs(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let cols: Vec<DVector<f64>> = s
        .iter()
        .zip(v)
        .filter(|(sv, _)| smax == 0.0 || **sv <= tol * smax)
        .map(|(_, c)| c)
        .collect();
    columns_or_empty(n, &cols)
}

/// The `k` right singular vectors of smallest singular value, with those values.
pub(crate) fn smallest_right_singular(m: &DMatrix<f64>, k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.ncols();
    let (s, v) = right_singular_pairs(m);
    let start = n - k;
    (s[start..].to_vec(), columns_or_empty(n, &v[start..]))
}

/// All n right singular vectors of `m` paired with singular values (descending).
fn right_singular_pairs(m: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let n = m.ncols();
    let rows = m.nrows().max(n);
    let mut a = DMatrix::zeros(rows, n);
    a.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let d = svd(&a);
    let pairs: Vec<(f64, DVector<f64>)> = d
        .s
        .iter()
        .enumerate()
        .map(|(i, &sv)| (sv, d.v.column(i).into_owned()))
        .collect();
    pairs.into_iter().unzip()
}

/// Orthonormal basis of the column space, keeping singular values above `tol·σ_max`.
pub fn column_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if m.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let d = svd(m);
    let smax = d.s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return DMatrix::zeros(n, 0);
    }
    let u = d.u;
    let cols: Vec<DVector<f64>> = d
        .s
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol * smax)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    columns_or_empty(n, &cols)
}

fn columns_or_empty(n: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(cols)
    }
}

/// Linear subspace stored by a Euclidean-orthonormal coordinate basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    space: Space,
    basis: DMatrix<f64>,
}

/// A basis adapted to the induced form: `positive` vectors square to +1,
/// `negative` to -1, `null` span the radical.
#[derive(Clone, Debug)]
pub struct FormFrame {
    pub positive: Vec<SignedVector>,
    pub negative: Vec<SignedVector>,
    pub null: Vec<SignedVector>,
}

impl Subspace {
    pub fn span(vectors: &[SignedVector], tol: f64) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::Invalid("span of an empty vector list".into()));
        };
        let space = first.space;
        for v in vectors {
            check_same_space(space, v.space)?;
        }
        let basis = match unit_columns(vectors.iter().map(|v| &v.coords)) {
            Some(m) => column_space(&m, tol),
            None => DMatrix::zeros(space.dim(), 0),
        };
        Ok(Subspace { space, basis })
    }

    /// Span of matrix columns (coordinates in the storage basis).
    pub fn from_columns(space: Space, m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.nrows() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: m.nrows(),
            });
        }
        let basis = match unit_columns(m.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>().iter()) {
            Some(u) => column_space(&u, tol),
            None => DMatrix::zeros(space.dim(), 0),
        };
        Ok(Subspace { space, basis })
    }

    pub fn zero(space: Space) -> Self {
        Subspace {
            space,
            basis: DMatrix::zeros(space.dim(), 0),
        }
    }

    pub fn whole(space: Space) -> Self {
        Subspace {
            space,
            basis: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis(&self) -> Vec<SignedVector> {
        (0..self.dim()).map(|k| self.vector(k)).collect()
    }

    pub fn vector(&self, k: usize) -> SignedVector {
        SignedVector::raw(self.space, self.basis.column(k).into_owned())
    }

    /// Gram matrix of the stored basis under the ambient form.
    pub fn gram(&self) -> DMatrix<f64> {
        self.basis.transpose() * self.space.gram() * &self.basis
    }

    pub fn signature(&self, tol: f64) -> Signature {
        if self.dim() == 0 {
            return Signature::new(0, 0, 0);
        }
        let eig = SymmetricEigen::new(self.gram());
        classify_eigenvalues(eig.eigenvalues.as_slice(), tol)
    }

    /// Coordinates of the orthogonal projection in the stored basis.
    pub fn local(&self, v: &SignedVector) -> DVector<f64> {
        self.basis.transpose() * &v.coords
    }

    pub fn from_local(&self, y: &DVector<f64>) -> SignedVector {
        SignedVector::raw(self.space, &self.basis * y)
    }

    /// Relative distance of `v` from the subspace (sine of the angle).
    pub fn residual(&self, v: &SignedVector) -> f64 {
        let n = v.coords.norm();
        if n == 0.0 {
            return 0.0;
        }
        let p = &self.basis * (self.basis.transpose() * &v.coords);
        (&v.coords - p).norm() / n
    }

    pub fn contains(&self, v: &SignedVector, tol: f64) -> bool {
        self.space == v.space && self.residual(v) <= tol
    }

    pub fn contains_subspace(&self, other: &Subspace, tol: f64) -> bool {
        self.space == other.space && other.basis().iter().all(|v| self.contains(v, tol))
    }

    pub fn same_span(&self, other: &Subspace, tol: f64) -> bool {
        self.dim() == other.dim() && self.contains_subspace(other, tol)
    }

    pub fn orthogonal_complement(&self) -> Result<Subspace> {
        if self.space.is_degenerate() {
            return Err(Error::DegenerateAmbient(self.space.to_string()));
        }
        let n = self.space.dim();
        let k = self.dim();
        if k == 0 {
            return Ok(Subspace::whole(self.space));
        }
        let functionals = (self.space.gram() * &self.basis).transpose();
        let (_, basis) = smallest_right_singular(&functionals, n - k);
        Ok(Subspace {
            space: self.space,
            basis,
        })
    }

    pub fn intersect(&self, other: &Subspace, tol: f64) -> Result<Subspace> {
        check_same_space(self.space, other.space)?;
        let (ka, kb) = (self.dim(), other.dim());
        if ka == 0 || kb == 0 {
            return Ok(Subspace::zero(self.space));
        }
        let n = self.space.dim();
        let mut m = DMatrix::zeros(n, ka + kb);
        m.view_mut((0, 0), (n, ka)).copy_from(&self.basis);
        m.view_mut((0, ka), (n, kb)).copy_from(&(-&other.basis));
        let null = nullspace(&m, tol);
        if null.ncols() == 0 {
            return Ok(Subspace::zero(self.space));
        }
        let pts = &self.basis * null.rows(0, ka);
        Ok(Subspace {
            space: self.space,
            basis: column_space(&pts, tol),
        })
    }

    pub fn join(&self, other: &Subspace, tol: f64) -> Result<Subspace> {
        check_same_space(self.space, other.space)?;
        let mut vs = self.basis();
        vs.extend(other.basis());
        if vs.is_empty() {
            return Ok(Subspace::zero(self.space));
        }
        Subspace::span(&vs, tol)
    }

    /// Eigenbasis of the induced form, rescaled so non-null vectors square to ±1.
    /// Positive vectors come in descending eigenvalue order, negative ones in ascending.
    pub fn form_frame(&self, tol: f64) -> FormFrame {
        let mut frame = FormFrame {
            positive: Vec::new(),
            negative: Vec::new(),
            null: Vec::new(),
        };
        if self.dim() == 0 {
            return frame;
        }
        let eig = SymmetricEigen::new(self.gram());
        let scale = eig.eigenvalues.amax().max(1.0);
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for k in order {
            let lambda = eig.eigenvalues[k];
            let v = self.from_local(&eig.eigenvectors.column(k).into_owned());
            if lambda.abs() < tol * scale {
                frame.null.push(v);
            } else if lambda > 0.0 {
                frame.positive.push(v.scaled(1.0 / lambda.sqrt()));
            } else {
                frame.negative.push(v.scaled(1.0 / (-lambda).sqrt()));
            }
        }
        frame.negative.reverse();
        frame
    }
}

fn classify_eigenvalues(eigs: &[f64], tol: f64) -> Signature {
    let scale = eigs.iter().fold(0.0_f64, |m, e| m.max(e.abs())).max(1.0);
    let mut sig = Signature::new(0, 0, 0);
    for &e in eigs {
        if e.abs() < tol * scale {
            sig.degenerate += 1;
        } else if e > 0.0 {
            sig.plus += 1;
        } else {
            sig.minus += 1;
        }
    }
    sig
}

/// Signature of the form restricted to the span; zero vectors are dropped.
pub fn subspace_signature(vectors: &[SignedVector], tol: f64) -> Result<Signature> {
    Ok(Subspace::span(vectors, tol)?.signature(tol))
}

pub fn orthogonal_complement(s: &Subspace) -> Result<Subspace> {
    s.orthogonal_complement()
}

pub fn intersect_subspaces(a: &Subspace, b: &Subspace, tol: f64) -> Result<Subspace> {
    a.intersect(b, tol)
}

/// Rescales `v` so that the pivot coordinate is exactly 1.
pub fn projective_normalize(v: &SignedVector, pivot: usize, tol: f64) -> Result<SignedVector> {
    if pivot >= v.coords.len() {
        return Err(Error::DimensionMismatch {
            expected: v.coords.len(),
            got: pivot,
        });
    }
    let p = v.coords[pivot];
    if p.abs() <= tol {
        return Err(Error::VanishingPivot { index: pivot, value: p });
    }
    let mut out = v.scaled(1.0 / p);
    out.coords[pivot] = 1.0;
    Ok(out)
}

/// Sine of the angle between the lines spanned by two coordinate vectors.
pub fn projective_distance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let a = a / na;
    let b = b / nb;
    (&a - &b * a.dot(&b)).norm()
}

/// Sine of the largest principal angle between two subspaces of equal dimension.
pub fn subspace_distance(a: &Subspace, b: &Subspace) -> f64 {
    if a.dim() != b.dim() {
        return 1.0;
    }
    let proj = &a.basis * (a.basis.transpose() * &b.basis);
    let resid = &b.basis - proj;
    singular_values(&resid).first().copied().unwrap_or(0.0)
}

/// Reflection in the hyperplane orthogonal to a non-null `mirror`.
pub fn reflect(v: &SignedVector, mirror: &SignedVector) -> Result<SignedVector> {
    let mm = mirror.inner(mirror)?;
    if mm.abs() <= f64::EPSILON * mirror.coords.norm_squared() {
        return Err(Error::Degenerate("reflection in a null vector".into()));
    }
    let k = 2.0 * mirror.inner(v)? / mm;
    Ok(v - &mirror.scaled(k))
}
