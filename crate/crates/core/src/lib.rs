//! Fourier analysis on `F^n` over finite fields of odd characteristic, the
//! paraboloid `{(g, g.g)}`, and exact or seeded verification of the
//! incidence, energy and extension estimates built on it.

pub mod checks;
pub mod energy;
pub mod error;
pub mod estimates;
pub mod field;
pub mod fourier;
pub mod geometry;
pub mod report;
pub mod sampling;

pub use checks::{replay, run_check, CheckConfig, CheckKind, Mode};
pub use energy::{additive_energy, bilinear_l2, m_quantity, EnergyCount, MValue};
pub use error::{Error, Result};
pub use estimates::{
    dyadic_decompose, estimate_constant, paper_constant_3d, restriction_ratio, scan_fields, Argmax,
    DyadicDecomposition, SearchResult, Strategy,
};
pub use field::{make_field, ArithOp, FieldElement, FieldSpec, UnitComplex, DEFAULT_ORDER_CAP};
pub use fourier::{Exponent, ExponentPair, ExtensionOperator, LqNorm, SpaceFunction, SurfaceFunction};
pub use geometry::{Line, Paraboloid, ParaboloidPoint, Subset, VectorSpace};
pub use report::{LemmaReport, OutputFormat, Report, ReportRow, RowContext, Verdict, Witness};
