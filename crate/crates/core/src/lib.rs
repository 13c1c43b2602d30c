//! Exact computer algebra for rooted trees whose edge and vertex decorations
//! interact through a map `φ: D_E ⊗ D_V → D_E ⊗ D_V`.
//!
//! The crate covers deformed grafting products and the map `Θ_φ` intertwining
//! them, post-Lie extensions, the Guin-Oudom product and cut coproduct on
//! planted forests with their duality pairing, and the multi-index instance
//! that appears in the algebra of singular SPDEs.

pub mod decorations;
pub mod error;
pub mod hopf;
pub mod lincomb;
pub mod matrix;
pub mod phimaps;
pub mod postlie;
pub mod prelie;
pub mod spde;
pub mod trees;

pub use decorations::{Basis, Label, MultiIndex};
pub use error::{Error, Result};
pub use lincomb::{LinComb, Scalar};
pub use phimaps::PhiMap;
pub use trees::{Forest, Planted, Tree};
