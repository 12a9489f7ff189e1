//! Exact finite-size laws for the homology class of toroidal Temperleyan
//! dimer configurations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crsf;
pub mod dimer;
pub mod distribution;
pub mod error;
pub mod graph;
pub mod homology;
pub mod laplacian;
pub mod linalg;
pub mod scalar;
pub mod special;
pub mod transfer;

pub use crsf::Crsf;
pub use dimer::Matching;
pub use distribution::HeightLaw;
pub use error::{Error, Result};
pub use graph::{ConductanceProfile, Modulus, TemperleyanGraph, TorusGraph};
pub use homology::{Crossing, HomologyClass};
pub use laplacian::Character;
pub use linalg::{CMatrix, LogDet};
pub use scalar::Real;

pub type Graph64 = TorusGraph<f64>;
pub type Graph32 = TorusGraph<f32>;
pub type Temperleyan64 = TemperleyanGraph<f64>;
pub type Temperleyan32 = TemperleyanGraph<f32>;
pub type LogDet64 = LogDet<f64>;
pub type LogDet32 = LogDet<f32>;
pub type Character64 = Character<f64>;
pub type Character32 = Character<f32>;
pub type HeightLaw64 = HeightLaw<f64>;
pub type HeightLaw32 = HeightLaw<f32>;
