//! Committed private information retrieval over BLS12-381.
//!
//! A database is hashed column by column, the hashes are committed with a
//! linear map commitment, and every linear PIR answer a server returns is
//! paired with an opening proof for the same combination of the hashes. The
//! client accepts an item only if every proof verifies and the recovered item
//! hashes to the recovered (certified) hash.

pub mod compir;
pub mod datahash;
pub mod error;
pub mod group;
pub mod harness;
pub mod lmc;
pub mod net;
pub mod ops;
pub mod pir;
pub mod wire;

pub use compir::{AnswerBundle, Outcome, RetrievalResult, Server, Verdict, WitnessMode};
pub use datahash::{hash_database, hash_item, Database};
pub use error::{Error, Result};
pub use group::{Gt, Scalar, G1, G2};
pub use lmc::{Commitment, PublicParams, Witness};
pub use pir::{SchemeId, SchemeParams};
