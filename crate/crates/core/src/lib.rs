//! The twisted triality hexagon T(q^3, q) in its natural embedding in PG(7, q^3).
//!
//! - [`field`]: GF(q^3) with sigma: x -> x^q, and GF(q) for the split Cayley case.
//! - [`projspace`]: subspaces of PG(7, K) in canonical reduced row-echelon form.
//! - [`forms`]: the quadric Q+(7, K), its polarity, the trilinear form and the triality.
//! - [`hexagon`]: construction by closure, incidence and distances.
//! - [`subspaces`]: supported subspaces, their taxonomy and the intersection properties.
//! - [`characterize`]: deciding whether a line set is a naturally embedded T(q^3, q).
//! - [`io`] and [`cli`]: line-set files, reports and the `trihex` command.

pub mod characterize;
pub mod cli;
pub mod error;
pub mod field;
pub mod forms;
pub mod hexagon;
pub mod io;
pub mod projspace;
pub mod subspaces;

pub use error::{Error, Result};
