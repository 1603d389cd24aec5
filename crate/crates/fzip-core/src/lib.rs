//! Linear algebra over small finite fields, bounded chain complexes,
//! filtrations with their spectral sequences, and F-zips — classical
//! (filtered vector spaces with Frobenius-twisted graded comparisons) and
//! derived (filtered complexes with twisted graded equivalences).  The
//! central computable facts: a bounded filtration over a field is strong
//! exactly when its spectral sequence degenerates at page one, and
//! degenerate derived zips project onto classical ones degree by degree.

pub mod chain;
pub mod filt;
pub mod fixtures;
pub mod fzip;
pub mod gen;
pub mod gf;
pub mod mat;
pub mod pinched;

pub use chain::{ChainMap, Complex};
pub use filt::{Direction, FiltError, Filtration, PageEntry, SpectralPage};
pub use fzip::{ClassicalFZip, DerivedFZip, EulerType, Glue, ZipError, ZipType};
pub use gf::{make_field, Field, FieldError};
pub use mat::Mat;
pub use pinched::{GradedChainModule, PinchedError, PinchedPerfData, TransitionDegree};
