//! Self-similar blow-up and extension profiles for `u_t = (u u_x)_xx`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod bundles;
pub mod cli;
pub mod error;
pub mod euler;
pub mod extension;
pub mod odeint;
pub mod output;
pub mod regpde;
pub mod shock;
pub mod similarity;
pub mod tail;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/similarity.md")]
    mod similarity {}
    #[doc = include_str!("../../../book/src/blowup.md")]
    mod blowup {}
    #[doc = include_str!("../../../book/src/extension.md")]
    mod extension {}
    #[doc = include_str!("../../../book/src/shocks.md")]
    mod shocks {}
    #[doc = include_str!("../../../book/src/euler.md")]
    mod euler {}
    #[doc = include_str!("../../../book/src/regpde.md")]
    mod regpde {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
