//! Codec for `n x n` binary arrays whose rows and columns all have weight at
//! most `f(n)`, for any rational `f(n)` large enough that the redundancy
//! block fits.
//!
//! Encoding runs in three steps: each of the first `m` rows gets a
//! weight-bounded word from a 1D code, a divide-and-conquer pass swaps bits
//! between column groups until every column is under budget, and the indices
//! that pass used are spread over the last `c` rows.
//!
//! ```
//! use bwcodec::{derive_params, BitSeq, Codec};
//!
//! let params = derive_params(64, 32, 1).unwrap();
//! let codec = Codec::new(params).unwrap();
//! let message = BitSeq::zeros(codec.payload_bits());
//! let grid = codec.encode(&message).unwrap();
//! assert!(bwcodec::verify_membership(&grid, 32, 1).ok);
//! assert_eq!(codec.decode(&grid).unwrap(), message);
//! ```

pub mod analysis;
pub mod bitcore;
pub mod codec2d;
pub mod dnc;
pub mod enumcodec;
pub mod error;
pub mod redpack;
pub mod swapkit;

pub use bitcore::{BitGrid, BitSeq, ColView};
pub use codec2d::{decode, derive_params, encode, verify_membership, CodeParams, Codec};
pub use enumcodec::{OneDCode, RowCode};
pub use error::{Error, Result, Stage};
