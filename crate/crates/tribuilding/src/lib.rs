//! Triangle-building groups over finite projective planes.
//!
//! Starting from a projective plane of order `q` and a point–line
//! correspondence, a triangle presentation defines a group acting simply
//! transitively on the vertices of an affine building of type Ã₂. This crate
//! constructs those presentations, solves the word problem by rewriting to a
//! left normal form, materialises finite pieces of the building (residues,
//! galleries, sector diagrams, apartment patches) and computes the transition
//! structure of the boundary subshift, together with an exhaustive
//! verification suite for the combinatorial identities that tie all of these
//! together.

pub mod building;
pub mod plane;
pub mod presentation;
pub mod sector;
pub mod subshift;
pub mod verify;
pub mod words;

mod par;


pub use plane::{LineId, Plane, PlaneError, PointId};
pub use building::{Chamber, ChamberBall, Gallery, ResidueGraph};
pub use presentation::{Lambda, Presentation, Triple, VerifyReport};
pub use sector::{ApartmentPatch, ChamberLabel, SectorDiagram, SectorError};
pub use subshift::{FormalSum, IsometrySymbol, TransitionMatrix};


pub use words::{Letter, NormalForm, Shape, Sign, Word};

pub use par::run_sequential;
