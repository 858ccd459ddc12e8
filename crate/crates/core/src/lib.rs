//! Unitary irreducible representations of the Euclidean motion group M(3)
//! built by deformation quantization on coadjoint orbits, together with
//! machine checks of the identities involved.

pub mod expr;
pub mod lie;
pub mod orbit;
pub mod moyal;
pub mod repn;
pub mod polarization;
pub mod report;
pub mod suites;
