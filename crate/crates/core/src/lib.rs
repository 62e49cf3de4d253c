//! Optimal source-prefix filtering against malicious IP blacklists.
//!
//! Given a blacklist of attacker addresses, a whitelist of legitimate
//! sources, and a budget of ACL filter slots, this crate selects the set of
//! non-overlapping source prefixes that blocks the attack traffic at minimum
//! collateral damage. Solvers cover: blocking every blacklisted address,
//! blocking only the worthwhile subset, incrementally tracking a changing
//! blacklist, fitting residual traffic under a link-capacity limit, and
//! coordinating filter placement across several routers via prices.
//!
//! All exact solvers run dynamic programs over the longest-common-prefix
//! tree of the input addresses; a brute-force enumerator over the full
//! prefix universe and a K-means baseline are included for verification and
//! comparison.

pub mod block;
pub mod dist;
pub mod dynamic;
pub mod error;
pub mod exec;
pub mod flooding;
pub mod oracle;
pub mod prefix;
pub mod solution;
pub mod traffic;
pub mod tree;

pub use error::Error;
pub use prefix::{Address, Prefix};
pub use solution::FilterSolution;
pub use traffic::{Role, WeightedAddressSet};
pub use tree::LcpTree;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
