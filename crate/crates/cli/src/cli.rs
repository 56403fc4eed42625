//! Command-line grammar.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::report::ReportFormat;

#[derive(Debug, Parser)]
#[command(name = "curvnet", version, about = "Checks, completions and generators for discrete curvature-line nets")]
pub struct Cli {
    /// Numerical tolerance for every rank and residual decision.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for random generation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the produced document (or the report, if nothing else is produced).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub report: ReportFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Circular,
    Conical,
    Principal,
    QCongruence,
    RCongruence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CompleteKind {
    Qnet,
    Miquel,
    Conical,
    Congruence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SystemKind {
    Qnet,
    Congruence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SurfaceKind {
    Torus,
    Sphere,
    Revolution,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmitKind {
    ContactElements,
    Points,
    Planes,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify a net property quad by quad (or edge by edge for principal nets).
    Check {
        #[arg(value_enum)]
        what: CheckKind,
        input: PathBuf,
    },
    /// Fill the empty cells of a net from its coordinate surfaces.
    Complete {
        #[arg(value_enum)]
        what: CompleteKind,
        input: PathBuf,
        /// Unit normals (points document) for the planes to be added by a conical completion.
        #[arg(long)]
        normals: Option<PathBuf>,
    },
    /// Principal contact elements through a sphere net, fixed by one element at the first cell.
    Synthesize {
        input: PathBuf,
        /// Plane `vx,vy,vz,d` touching the first sphere.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "point")]
        plane: Option<String>,
        /// Point `x,y,z` on the first sphere (used when the net consists of planes).
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Random Ribaucour transform of a contact element net.
    Ribaucour { input: PathBuf },
    /// Common orthogonal circle, point pair or point of a 2x2 sphere net.
    Classify { input: PathBuf },
    /// Compare every route to the far corner of random cubes.
    ConsistencyTest {
        #[arg(value_enum)]
        what: SystemKind,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(4..=5))]
        dim: u8,
        #[arg(long)]
        instances: Option<usize>,
        /// Largest accepted deviation between routes.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Sample a curvature-line net of a surface of revolution.
    Generate {
        #[arg(value_enum)]
        what: SurfaceKind,
        /// Samples along the meridian and the parallel.
        #[arg(long, default_value = "6,8")]
        extents: String,
        #[arg(long, default_value_t = 3.0)]
        major: f64,
        #[arg(long, default_value_t = 1.0)]
        minor: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Meridian angle (or latitude) range.
        #[arg(long, default_value = "-1.2,1.2", allow_hyphen_values = true)]
        theta_range: String,
        /// Rotation angle range.
        #[arg(long, default_value = "0,5", allow_hyphen_values = true)]
        phi_range: String,
        /// Meridian samples `r,z;r,z;...` for a general surface of revolution.
        #[arg(long, allow_hyphen_values = true)]
        meridian: Option<String>,
        #[arg(long, value_enum, default_value = "contact-elements")]
        emit: EmitKind,
    },
    /// Write a two-dimensional point net as an OBJ quad mesh.
    ExportObj { input: PathBuf },
}
