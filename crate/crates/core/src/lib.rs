//! Convergent presentations of categories, their critical branchings, and
//! the polygraphic resolution built from the rightmost normalisation
//! strategy, with its abelianisation into free natural systems.

pub mod branchings;
pub mod cellalg;
pub mod error;
pub mod homology;
pub mod presentation;
pub mod resolution;
pub mod rewriting;

pub use branchings::{critical_branchings, critical_nfold, critical_tower, CriticalBranching, Extension};
pub use cellalg::{Cell, HigherGen, Sphere};
pub use error::{PolyError, Result};
pub use homology::{syzygy_generators, verify_complex, Basis, Complex, NatElem, Term, VerifyReport};
pub use presentation::{
    builtin, parse_polygraph, reduced_standard, validate, Builtin, CategoryTable, Path, Polygraph,
};
pub use resolution::{build_resolution, build_resolution_arc, Resolution, ResolutionCell};
pub use rewriting::{
    check_confluence, check_termination, normal_form, reduce, word_problem, Normalizer, RewriteStep, Side,
};
