//! Identification of lumped second-order dynamics from stochastic force
//! perturbation experiments.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`signals`]: binary excitation, biased correlation, Toeplitz
//!    deconvolution and variance-accounted-for scoring.
//! 2. [`models`]: the three second-order families (no zero, one real zero,
//!    a complex zero pair) with closed-form impulse responses, exact
//!    zero-order-hold simulation and frequency response.
//! 3. [`estimation`]: FIR estimation, Levenberg-Marquardt fitting, lumped
//!    mass/damping/stiffness extraction and sensitivity sweeps.
//! 4. [`rigsim`]: a software test rig (voice coil, sense chain, encoder)
//!    that produces realistic force/displacement records with known truth.
//!
//! [`cli`] holds the file formats and batch pipeline behind the `arrowid`
//! binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimation;
pub mod models;
pub mod rigsim;
pub mod signals;

pub use error::{Error, Result};
pub use estimation::{
    FitDomain, FitOptions, FitResult, ImpulseResponseEstimate, LumpedParams, SensitivityCurve,
    SensitivityParameter, TrialAggregate,
};
pub use models::{ModelKind, SecondOrderModel, SpineRating, TransferFunctionShape, Zeros};
pub use rigsim::{RigConfig, RigOutput};
pub use signals::{CorrelationVector, Dataset, TimeSeries};
