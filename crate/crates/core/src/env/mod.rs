//! Ground-truth simulators and objective functions.

pub mod bessel;
pub mod dm;
pub mod plume;
pub mod synthetic;

pub use bessel::bessel_k0;
pub use dm::{dm_respond, DmMode, HiddenUtility};
pub use plume::{PlumeField, PlumeSource};
pub use synthetic::{mo_truth, tas_truth, MoKind};
