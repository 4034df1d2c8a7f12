//! Demazure products on permutations, random pipe dreams, the TASEP with
//! geometric jumps, and closed-form limiting permutons.
//!
//! The crate is organised by concern:
//!
//! * [`hecke`]: permutations, words, `tau` operators, Demazure products,
//!   inversions, pattern counts and exact height grids.
//! * [`shapes`]: boxes, lattice paths, boundary functions and order-convex
//!   shapes.
//! * [`pipedream`]: Bernoulli pipe dreams, crossing resolution, SVG output.
//! * [`tasep`]: the geometric-jump TASEP, the pipe-dream coupling and the
//!   hydrodynamic formulas.
//! * [`analytics`]: limit height functions, region classification, min-plus
//!   products of height grids and sampling from permutons.
//! * [`experiments`]: seeded Monte Carlo drivers built on the above.

pub mod analytics;
pub mod error;
pub mod experiments;
pub mod hecke;
pub mod pipedream;
pub mod rng;
pub mod shapes;
pub mod tasep;

pub use analytics::{AnalyticPermuton, BoundaryPair, RegionLabel};
pub use error::{Error, Result};
pub use hecke::{HeightGrid, Permutation, Word};
pub use pipedream::{PipeDream, ResolvedPipeDream, Tile};
pub use shapes::{BoundaryFunction, LatticeBox, LatticePath, Shape, Step};
pub use tasep::{GeomParam, TasepState};
