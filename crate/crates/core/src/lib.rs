//! Exact-arithmetic machinery for deciding whether a finitely generated
//! subgroup of a free group of finite rank is dense in the pro-supersolvable
//! topology.
//!
//! The pipeline runs in three layers:
//!
//! * free-group words and their image under a Magnus-type embedding into
//!   `T^(d-1) ⋊ Z^d`, where `T` is the additive group of an integral Laurent
//!   polynomial ring ([`words`], [`laurent`], [`magnus`]);
//! * commutative algebra over the rationals: reduced Gröbner bases and
//!   integer certificates `Σ f_i ℓ_i = a` witnessing that a polynomial
//!   system has no complex common root ([`groebner`]);
//! * finite quotients: arithmetic in the groups `V_n ⋊_α C`, exhaustive
//!   root searches modulo a prime, and an enumeration oracle that serves as
//!   ground truth for the decider ([`phyper`], [`modular`]).
//!
//! [`decider`] ties the layers together and emits a [`decider::Verdict`]
//! carrying either a denseness trail or an independently verified witness.

mod arith;
pub mod corpus;
pub mod decider;
pub mod groebner;
pub mod laurent;
pub mod magnus;
pub mod modular;
pub mod phyper;
pub mod snf;
pub mod words;
