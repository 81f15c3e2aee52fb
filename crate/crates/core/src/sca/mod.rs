//! Synthetic side-channel traces of an AES first-round S-box, noise
//! injection, and a mutual-information key-recovery attack.

mod experiment;
pub mod io;
mod mia;
mod sbox;
mod traces;

pub use experiment::{success_rate, success_rate_with, AttackConfig, SuccessRate};
pub use mia::{mia_attack, AttackResult, DEFAULT_BINS, MIN_TRACES};
pub use sbox::{aes_sbox, leakage_bit};
pub use traces::{generate_traces, inject_noise, TraceMeta, TraceSet};
