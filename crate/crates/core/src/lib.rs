//! Homodyne detection of macroscopically bright multimode Gaussian light.
//!
//! Unmatched bright modes leak into a multimode homodyne detector as excess
//! noise `ε_tot²·n̄`. This crate models that noise ([`detector`]), checks the
//! model against a phase-space Monte-Carlo simulation of the detector
//! ([`oracle`]), and propagates it through a lossy channel ([`channel`]) into
//! squeezing and entanglement thresholds ([`protocols`]) and asymptotic
//! CV-QKD key rates ([`qkd`]).
//!
//! All variances are in shot-noise units.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod detector;
pub mod error;
pub mod gaussian;
pub mod oracle;
pub mod protocols;
pub mod qkd;
pub mod search;

pub use channel::ChannelParams;
pub use detector::{DetectorConfig, ModeStatistics, PhotonStatistics};
pub use error::{Error, Result};
pub use gaussian::{SymplecticSpectrum, TwoModeCM};
pub use protocols::{SchemeKind, SourceParams};
pub use qkd::{AttenuationThreshold, KeyRateResult};
