//! Fixed-width big-integer arithmetic for midsize operands (up to about
//! 2^18 bits).
//!
//! Three kernels are provided, each written as a sequence of data-parallel
//! steps over virtual threads:
//!
//! - [`scan_add`]: addition as a map, an exclusive scan over packed carry
//!   flags, and a second map. A segmented variant batches independent
//!   instances.
//! - [`classical`]: quadratic multiplication with a load-balanced partition
//!   of the result positions across threads.
//! - [`ntt`]: multiplication through the number-theoretic transform over a
//!   prime field `k * 2^n + 1` ([`field`]).
//!
//! [`block`] runs kernels as barrier-separated phases over virtual threads
//! and checks that results do not depend on the intra-phase schedule;
//! [`kernels`] expresses the three pipelines in that form. [`oracle`] is a
//! plain schoolbook reference, and [`workload`] drives benchmark workloads.

pub mod block;
pub mod classical;
pub mod error;
pub mod field;
pub mod kernels;
pub mod limb;
pub mod ntt;
pub mod oracle;
pub mod scan_add;
pub mod selfcheck;
pub mod types;
pub mod workload;

pub use block::{PhasedKernel, RunOptions, Schedule};
pub use error::{Error, Result};
pub use field::{FieldSpec, OmegaTable, PRIME_FIELD_32, PRIME_FIELD_64};
pub use limb::Limb;
pub use scan_add::CarryFlags;
pub use types::{BigUint, BlockConfig, DigitVector};
