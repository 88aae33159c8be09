//! Desk-scale workbench for index theory with decomposable twists.
//!
//! The crate is organized around seven subsystems:
//!
//! - [`simplicial`]: finite ordered simplicial complexes, Smith normal form,
//!   integer/real cohomology and Alexander-Whitney cup products.
//! - [`cech`]: Cech cohomology over nerves of good covers and the
//!   Dixmier-Douady cocycle of a decomposable twist.
//! - [`bundlegeom`]: discretized Hermitian line bundles, circle-bundle totals,
//!   the shift character, the primitive bundle J and holonomy.
//! - [`twistedderham`]: the twisted de Rham complex d + delta^ and twisted
//!   Hodge dimension counts.
//! - [`fiberops`]: truncated smoothing-operator algebra on circle fibers,
//!   parametrices and the idempotent analytic index.
//! - [`cherncalc`]: odd/even twisted Chern character forms, the relative
//!   symbol character, the cohomological index pushforward, and the exact
//!   rational Riemann-Roch computation.
//! - [`sclquant`]: semiclassical quantization on circle fibers and the
//!   isotropic Thom check.
//!
//! The [`scenario`] module drives cross-module verification pipelines from
//! JSON configs; the `tkindex` binary exposes them on the command line.

pub mod bundlegeom;
pub mod cech;
pub mod cherncalc;
pub mod fiberops;
pub mod forms;
pub mod mesh;
pub mod scenario;
pub mod sclquant;
pub mod simplicial;
pub mod twistedderham;

mod error;
pub use error::{Error, Result};
