//! Abelian relations, rank bounds and tautological connections for
//! holomorphic webs.

pub mod analysis;
pub mod combinat;
pub mod connection;
pub mod error;
pub mod jets;
pub mod symbolic;
pub mod webmodel;

pub use error::{Error, Result};
