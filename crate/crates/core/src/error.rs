use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vectors live in different spaces ({0} vs {1})")]
    SpaceMismatch(String, String),

    #[error("orthogonal complement is undefined in the degenerate space {0}")]
    DegenerateAmbient(String),

    #[error("cannot normalize on component {index}: value {value:e} is below tolerance")]
    VanishingPivot { index: usize, value: f64 },

    #[error("vector is not isotropic (relative residual {0:e})")]
    NotIsotropic(f64),

    #[error("imaginary sphere: representative is time-like")]
    ImaginarySphere,

    #[error("plane normal must be a unit vector (|v| = {0})")]
    NonUnitNormal(f64),

    #[error("point is not incident with the plane (residual {0:e})")]
    NotIncident(f64),

    #[error("not an isotropic line: {0}")]
    NotIsotropicLine(String),

    #[error("no finite circle: points are collinear or coincident")]
    NoFiniteCircle,

    #[error("element kind not supported here: {0}")]
    UnsupportedElement(String),

    #[error("quad ({i},{j}) is not planar (residual {residual:e})")]
    NonPlanarQuad { i: usize, j: usize, residual: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("lines are coincident")]
    Coincident,

    #[error("lines do not intersect (residual {0:e})")]
    NoIntersection(f64),

    #[error("not conical: {0}")]
    NotConical(String),

    #[error("not concircular (residual {0:e})")]
    NotConcircular(f64),

    #[error("not an R-congruence: {0}")]
    NotRCongruence(String),

    #[error("degenerate family: {0}")]
    DegenerateFamily(String),

    #[error("non-generic configuration: {0}")]
    NonGeneric(String),

    #[error("point lies at infinity")]
    AtInfinity,

    #[error("umbilic quad at {0:?}")]
    Umbilic(Vec<usize>),

    #[error("at cell {index:?}: {source}")]
    AtCell {
        index: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn at(self, index: &[usize]) -> Error {
        match self {
            e @ Error::AtCell { .. } => e,
            e => Error::AtCell {
                index: index.to_vec(),
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
