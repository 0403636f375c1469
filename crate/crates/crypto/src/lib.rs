//! Distributed two-trapdoor public-key cryptosystem (DT-PKC).
//!
//! Every party holds a weak private key `sk` with public key
//! `h = g^sk mod N²`. The strong trapdoor `λ = lcm(p−1, q−1)` is split into
//! two additive shares, one held by the center server and one by the
//! computation provider; together they decrypt any ciphertext regardless of
//! the weak key it was produced under, which is what makes addition and
//! comparison across key domains possible.
//!
//! All operations are pure functions of their inputs and an explicit random
//! generator.

mod ciphertext;
mod error;
mod fixed;
mod hoadd;
mod holt;
mod keygen;
mod keys;
mod ops;
pub mod prime;
pub mod wire;

pub use ciphertext::Ciphertext;
pub use error::CryptoError;
pub use fixed::{fixed_decode, fixed_encode, scale_to_residue, FixedPoint};
pub use hoadd::{ho_add, ho_add_finish, ho_add_respond, ho_add_start, HoAddPending, HoAddRequest};
pub use holt::{ho_lt, ho_lt_with_coin, lt_blind, lt_decide, lt_finish, lt_operands, CompareRequest, LtOperands};
pub use keygen::{KeyGenCenter, KeyGenConfig, PublicParams, StrongKeyShares};
pub use keys::{CcShare, CsShare, KeyDomain, KeyId, PublicKey, SecretKey, StrongPartial};
pub use ops::{
    decrypt, ho_enc, ho_enc_ref, ho_re_enc, l_function, par_h_dec1, par_h_dec2, strong_decrypt,
};

pub type Result<T> = std::result::Result<T, CryptoError>;
