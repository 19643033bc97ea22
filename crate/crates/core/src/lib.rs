//! Integrate-and-fire time encoding of bounded bandlimited signals.
//!
//! The crate covers the whole codec chain: random members of the signal
//! class ([`signal`]), the constant-, variable- and linear-bias encoders
//! ([`tem`]), interval quantizers ([`quantization`]), the `.tem1` bitstream
//! and decoder-side bias replay ([`codec`]), least-squares reconstruction
//! ([`reconstruction`]) and the experiment harness ([`experiments`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod error;
pub mod experiments;
pub mod quantization;
pub mod reconstruction;
pub mod signal;
pub mod special;
pub mod tem;

pub use error::{Error, Result};
