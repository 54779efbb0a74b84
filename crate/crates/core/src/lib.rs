//! Explicit optimal-access MSR regenerating codes for `d ∈ {k+1, k+2, k+3}`.
//!
//! Each of the `n` nodes stores `α = q^⌈n/q⌉` symbols of GF(2^m), where
//! `q = d - k + 1`. Any `k` nodes recover the data, and a lost node is
//! rebuilt from any `d` helpers that each send `β = α/q` of their stored
//! symbols unchanged.
//!
//! ```
//! use msr_core::{ErasureState, Gf, MsrCode};
//!
//! let code = MsrCode::new(6, 3, 4)?;
//! let message: Vec<Gf> = (0..code.params().message_len()).map(|i| Gf(i as u16 % 64)).collect();
//! let cw = code.encode(&message)?;
//!
//! let lost = ErasureState::new(cw.clone(), [code.node(0), code.node(2), code.node(5)]);
//! assert_eq!(code.decode(&lost)?, cw);
//!
//! let helpers: Vec<_> = [0, 2, 3, 4].iter().map(|&i| code.node(i)).collect();
//! let (rebuilt, trace) = code.repair(&cw, code.node(1), &helpers)?;
//! assert_eq!(rebuilt, cw.node(code.node(1)));
//! assert_eq!(trace.downloaded(), 4 * code.params().beta);
//! # Ok::<(), msr_core::Error>(())
//! ```

pub mod codec;
pub mod cube;
pub mod error;
pub mod gf2m;
pub mod params;
pub mod solver;
pub mod verify;

pub use codec::{DecodePlan, ErasureState, HelperPayload, MsrCode, RepairPlan, RepairTrace};
pub use cube::{check_parity, Codeword, NodeId, NodeSet, PlaneGroup, PlaneIndex};
pub use error::{Error, Result};
pub use gf2m::{CosetTriple, Field, Gf};
pub use params::{select_field, CodeParams, ThetaTable};
pub use solver::GfMatrix;
pub use verify::{
    verify_all, verify_base_determinants, verify_mds, verify_repair, verify_thetas, Check,
    VerificationReport, VerifyOptions,
};
