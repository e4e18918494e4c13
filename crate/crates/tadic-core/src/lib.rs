//! Exact arithmetic for T-adic exponential sums over finite fields.
//!
//! The library computes character sums S_f(k, T) attached to a Laurent
//! polynomial f over F_q, assembles their L- and C-functions, and compares
//! the resulting T-adic and pi_m-adic Newton polygons against two explicit
//! lower bounds: the classical Hodge bound and the sharper arithmetic
//! polygon. A companion construction produces the Hasse polynomials whose
//! nonvanishing at the coefficients of f certifies that the bound is
//! attained, and a truncated Dwork operator provides an independent
//! certification path through Fredholm determinants.
//!
//! All arithmetic is exact: polygons use arbitrary-precision rationals,
//! character sums use cyclotomic integers, and the p-adic side tracks
//! explicit precision everywhere.

pub mod cyclotomic;
pub mod dwork;
mod error;
pub mod ff;
pub mod galois;
pub mod hasse;
pub mod polygons;
pub mod sums;

pub mod acceptance;

pub use error::Error;

/// Default point-evaluation budget for brute-force sums.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

pub type Result<T> = std::result::Result<T, Error>;
