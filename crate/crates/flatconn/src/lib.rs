//! Exact and numeric tools for integrable Pfaffian systems in several
//! complex variables.
//!
//! The crate is organized in layers:
//!
//! * [`scalars`] — coefficient domains (exact Gaussian rationals and complex
//!   doubles), multidegrees, weight vectors, and sparse Laurent polynomials.
//! * [`exterior`] — scalar- and matrix-valued exterior forms with Laurent
//!   coefficients: differential, wedge, adjusted bracket, pullback, and
//!   constructive division by a 1-form.
//! * [`connection`] — meromorphic connection matrices `d X = Ω X`: flatness
//!   residual, gauge transforms, local holomorphic solutions, and monomial
//!   solutions of constant-residue systems.
//! * [`logpole`] — logarithmic-pole tests, residue extraction, decompositions
//!   along normal crossings, and resonance classification.
//! * [`normalform`] — degree-by-degree normalization of flat connections with
//!   logarithmic poles over a diagonal principal part.
//! * [`transport`] — numeric parallel transport, monodromy, matrix
//!   logarithms, and reconstruction of constant-residue systems from
//!   commuting monodromy data.
//! * [`schlesinger`] — isomonodromic deformation of Fuchsian systems on the
//!   Riemann sphere with conservation monitoring.
//! * [`blowup`] — monoidal (blow-up) chart pullbacks and exceptional
//!   residues.
//! * [`picardfuchs`] — discriminants and period matrices of isolated plane
//!   singularity deformations: Milnor numbers, coframe certification, exact
//!   division of 2-forms, and numeric period integrals.

pub mod blowup;
pub mod connection;
pub mod exterior;
pub mod logpole;
pub mod normalform;
pub(crate) mod nummat;
pub mod picardfuchs;
pub mod scalars;
pub mod schlesinger;
pub mod transport;
