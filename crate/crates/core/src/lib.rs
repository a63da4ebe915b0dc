//! Amplitude-level simulation of block-free optical quantum switching.
//!
//! The crate layers four pieces:
//!
//! - [`fock`]: exact sparse multi-photon states over labelled optical modes;
//! - [`components`]: wave plates, polarizing beam splitters, delays, gated
//!   polarization flips and detector models;
//! - [`gates`]: the heralded Fredkin gate, quantum state fusion and fission
//!   as input-output channels with their analytic success constants, plus
//!   the spatial/time mode converters built from components;
//! - [`switch`] and [`banyan`]: the 2 x 2 block-free switch unit with its
//!   composite variants, and N x N self-routing Banyan fabrics that detect
//!   classical blocking and resolve it by fusion, with end-to-end
//!   success-probability accounting.

pub mod banyan;
pub mod components;
pub mod error;
pub mod fock;
pub mod gates;
pub mod switch;

pub use components::{BinSelector, ClickPattern, DetectorModel, HwpSetting};
pub use error::{Error, Result};
pub use fock::{FockConfig, Mode, PhotonicState, Polarization, QubitSpec, Unitary};
pub use gates::{FeedForward, FusedState, HeraldOutcome};
pub use switch::{PortContent, SwitchControls, UnitOutcome};

pub use banyan::{
    BanyanTopology, Packet, RouteResult, RouteStatus, RoutingMode, TrafficSpec, Wiring,
};
