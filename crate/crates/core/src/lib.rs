//! Non-intrusive projection-based reduced-order modelling for
//! parametrised nonlinear PDEs on unstructured triangular meshes.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod deim;
pub mod fom;
pub mod fvm;
pub mod interp;
pub mod mesh;
pub mod observables;
pub mod persist;
pub mod pipeline;
pub mod pod;
pub mod rom;
