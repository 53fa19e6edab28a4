//! Generation and certification of three-qubit bound entangled states.

pub mod certify;
pub mod circuit;
pub mod error;
pub mod io;
pub mod optim;
pub mod pptlab;
pub mod qmat;
pub mod rng;
pub mod states;
pub mod tomo;
pub mod witness;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/qmat.md")]
    mod qmat {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/witness.md")]
    mod witness {}
    #[doc = include_str!("../../../book/src/pptlab.md")]
    mod pptlab {}
    #[doc = include_str!("../../../book/src/tomo.md")]
    mod tomo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
