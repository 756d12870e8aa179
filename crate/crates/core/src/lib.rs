//! Lefschetz numbers of geometric endomorphisms of Cuntz-Krieger algebras.
//!
//! The crate is organised bottom-up:
//!
//! * [`sft`]: transition matrices, allowable words, path counts and the
//!   cylinder-set algebra of the one-sided shift space.
//! * [`algebra`]: exact integer calculus on monomials `s_ν s_μ*` in `O_A`.
//! * [`endo`]: geometric endomorphisms given by `(ν, μ)` presentations, their
//!   Cuntz-Krieger validation, composition and the induced partial path map.
//! * [`index`]: the index of the partial path map by four routes (per-length
//!   series, boundary counts, the closed matrix-power formula and a truncated
//!   permutation-operator index).
//! * [`ktheory`]: Smith normal form, `K_0`/`K_1` of `O_A`, the induced map on
//!   `K_0`, Lefschetz numbers and zeta functions.
//! * [`graded`]: a finite-dimensional model of graded duality pairings used to
//!   check the abstract Lefschetz identity exactly.
//! * [`random`]: sampling of valid geometric endomorphisms.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod algebra;
pub mod endo;
pub mod graded;
pub mod index;
pub mod ktheory;
pub mod linalg;
pub mod random;
pub mod sft;

pub use algebra::{AlgebraError, Element, Monomial};
pub use endo::{EndoError, GeometricEndomorphism, PartialPathMap, Validity};
pub use index::{IndexConfig, IndexError, IndexMethod, IndexReport, LengthTransfer};
pub use ktheory::{
    KTheoryData, KTheoryError, KZeroClass, LefschetzMode, LefschetzReport, RationalFunction, SmithDecomposition,
};
pub use sft::{ClopenSet, Letter, SftError, TransitionMatrix, Word};
