//! Moments of the renormalized self-intersection local time of planar
//! Brownian motion.
//!
//! The second, third and fourth moments of the renormalized intersection
//! local time admit exact expressions in terms of a small family of
//! combinatorial objects and integrals:
//!
//! * connectivity matrices with row and column sums two, enumerated and
//!   classified up to simultaneous row/column permutation
//!   ([`combinatorics`]),
//! * the Eulerian multigraphs attached to those matrices together with
//!   their spanning trees and Kirchhoff polynomials ([`multigraph`]),
//! * a generalized gamma function defined by an integral over Feynman
//!   parameters, evaluated by Monte Carlo and by recurrence
//!   ([`gammafn`]),
//! * modified Bessel kernels and a handful of zeta-like constants
//!   ([`specfun`]), integrated by deterministic cubature or sampled
//!   stochastically ([`quad`]),
//! * the specific position-space and parametric integrals entering the
//!   moment formulas ([`integrals`]), and
//! * the final moment and cumulant assembly with an explicit error
//!   budget ([`moments`]).
//!
//! The command line interface in [`cli`] exposes the same pipeline as
//! `enumerate`, `integrals`, `moments` and `verify` subcommands.
//!
//! Everything stochastic is seeded: reruns with the same seed, sample
//! count and thread count are bit-identical, and results do not depend
//! on the number of threads.

pub mod cli;
pub mod combinatorics;
pub mod gammafn;
pub mod integrals;
pub mod moments;
pub mod multigraph;
pub mod quad;
pub mod specfun;

pub use combinatorics::{classify, enumerate_matrices, ConnectivityMatrix, MatrixClass};
pub use gammafn::{gamma_value, GammaMethod, GammaQuery};
pub use moments::{build_report, closed_moments, moment2, moment3, moment4};
pub use multigraph::MultiGraph;
pub use quad::IntegralEstimate;
