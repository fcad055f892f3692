//! Spectral computations for self-adjoint extensions of symmetric operators
//! with finite deficiency indices.
//!
//! The crate is organised around the Krein resolvent formula: a distinguished
//! extension `H⁰` with known spectrum, a Q-function `Q(z)` acting in a finite
//! boundary space, and a self-adjoint boundary relation `Λ`. Spectral data of
//! the extension `H_Λ` in the gaps of `H⁰` is read off `Q(z) − Λ`.
//!
//! Three solvable families are provided on top of the generic machinery:
//!
//! - [`sturm_liouville`]: segments `−f″ + Uf = zf` on `[0, 1]`.
//! - [`quantum_graph`]: equilateral magnetic quantum graphs, through the
//!   duality with discrete magnetic Laplacians ([`discrete_graph`]).
//! - [`dot_array`]: periodic arrays of quantum dots in a magnetic field with a
//!   digamma-based scalar Q-function.

pub mod discrete_graph;
pub mod dot_array;
pub mod error;
pub mod krein;
pub mod linalg;
pub mod linrel;
pub mod probe;
pub mod quadrature;
pub mod quantum_graph;
pub mod roots;
pub mod special;
pub mod spectrum;
pub mod sturm_liouville;

pub use error::{Error, Result};
pub use krein::{QFunction, RationalNevanlinna, ScalarQ};
pub use linrel::{BoundaryPair, CayleyRelation, RelationProjector};
pub use spectrum::{Multiplicity, SpectralBand, SpectralPoint, SpectralTypes, SpectrumDescription};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;
