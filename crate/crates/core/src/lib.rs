//! Complete symplectic spreads over finite fields of odd characteristic.
//!
//! The crate builds the field tower `F_p ⊂ F_q ⊂ F_{q^{2m}}`, the alternating
//! trace form on `F_{q^{2m}}` viewed as `F_q^{2m}`, the field-reduction
//! spread of `q^m + 1` totally isotropic `m`-spaces, and the metacyclic
//! isometry group `G = ⟨π, ρ⟩`, together with a small matrix-group engine
//! and a registry of named checks that exercise all of it.

pub mod cli;
pub mod error;
pub mod gf;
pub mod grp;
pub mod linalg;
pub mod spread;
pub mod symplectic;
pub mod verify;
pub mod zsig;

pub use error::{Error, Result};
pub use gf::{BaseField, FFElem, TowerCtx};
pub use grp::MatGroup;
pub use linalg::{MatQ, Poly, Scalar, Subspace, VecQ};
pub use spread::Spread;
pub use symplectic::GramForm;
pub use verify::{Caps, Status, VerifyReport};
