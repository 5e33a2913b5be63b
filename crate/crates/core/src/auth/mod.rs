//! Merkle-tree authentication over a derived key.

mod merkle;
mod protocol;
mod prover;

pub use merkle::{commit, verify, MerkleCommitment, MerkleHasher, MerkleProof, MerkleTree};
pub use protocol::{
    decode_challenge, encode_challenge, leak_proof, AuthChallenger, AuthKey, Challenges, CorruptedProver, DiskKey,
    HonestProverAdversary, DEFAULT_CHALLENGES,
};
pub use prover::{OnTheFlyProver, Prover, StoredProver};
