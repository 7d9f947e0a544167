//! OTFS and OFDM link simulation over Nakagami-m fading, with closed-form
//! BER analysis for single-user MRC and moment-matched multi-user SINR.

pub mod analytic;
pub mod ddmodem;
pub mod diversity;
pub mod engine;
pub mod error;
pub mod fading;
pub mod modulation;
pub mod specfun;

pub use error::{Error, Result};
