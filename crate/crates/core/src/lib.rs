//! Construction and verification of maximal graded subalgebras of the modular
//! Lie superalgebras of Cartan type W, S, H and K.

pub mod cartan;
pub mod cli;
pub mod error;
pub mod exactla;
pub mod flags;
pub mod mgs;
pub mod scalars;
pub mod superspace;
pub mod verify;

pub use cartan::{build, build_algebra, CartanAlgebra, Element, Family};
pub use error::{Error, Result};
pub use scalars::{make_field, Fe, Field};
