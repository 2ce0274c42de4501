//! Exact enumeration, uniform sampling and asymptotic estimates for linear
//! `k`-partite `r`-uniform hypergraphs with `m` edges.

pub mod asymptotics;
pub mod census;
pub mod error;
pub mod hypergraphs;
pub mod montecarlo;
pub mod partitions;
pub mod switching;
pub mod util;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/partitions.md")]
    struct Partitions;
    #[doc = include_str!("../../../book/src/hypergraphs.md")]
    struct Hypergraphs;
    #[doc = include_str!("../../../book/src/census.md")]
    struct Census;
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    struct Asymptotics;
    #[doc = include_str!("../../../book/src/switching.md")]
    struct Switching;
    #[doc = include_str!("../../../book/src/montecarlo.md")]
    struct Montecarlo;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
