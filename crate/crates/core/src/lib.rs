//! Concatenated LDPC + autoencoder coding over a one-bit quantized,
//! faster-than-Nyquist AWGN channel.

pub mod autoencoder;
pub mod channel;
pub mod gp_theory;
pub mod harness;
pub mod ldpc;
pub mod modem;
