//! Oracles and the verification battery.

pub mod battery;
pub mod oracle;
