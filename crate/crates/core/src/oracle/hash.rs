use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256, Sha512};

use super::{OracleDescriptor, RandomOracle};
use crate::bits::Bits;
use crate::error::{Error, Result};

/// Domain separation for key-derivation queries.
pub const KDF_DOMAIN: &[u8] = b"brm-kdf/disperse/v1";
/// Domain separation for Merkle-tree hashing.
pub const MERKLE_DOMAIN: &[u8] = b"brm-kdf/merkle/v1";
/// Environment variable selecting the default hash algorithm.
pub const HASH_ENV: &str = "BRMKDF_HASH";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HashAlg {
    #[default]
    Sha256,
    Sha512,
}

impl HashAlg {
    pub fn name(self) -> &'static str {
        match self {
            HashAlg::Sha256 => "sha256",
            HashAlg::Sha512 => "sha512",
        }
    }

    /// The algorithm named by `BRMKDF_HASH`, or SHA-256.
    pub fn from_env() -> Result<Self> {
        match std::env::var(HASH_ENV) {
            Ok(v) => v.parse(),
            Err(_) => Ok(HashAlg::default()),
        }
    }

    pub(crate) fn digest(self, parts: &[&[u8]]) -> Vec<u8> {
        match self {
            HashAlg::Sha256 => {
                let mut h = Sha256::new();
                parts.iter().for_each(|p| h.update(p));
                h.finalize().to_vec()
            }
            HashAlg::Sha512 => {
                let mut h = Sha512::new();
                parts.iter().for_each(|p| h.update(p));
                h.finalize().to_vec()
            }
        }
    }
}

impl fmt::Display for HashAlg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HashAlg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sha256" | "sha-256" => Ok(HashAlg::Sha256),
            "sha512" | "sha-512" => Ok(HashAlg::Sha512),
            other => Err(Error::invalid(format!("unknown hash algorithm {other:?}"))),
        }
    }
}

/// Stretches a first digest `T0` to `n` bits:
/// `T0 ‖ Hash(T0 ‖ LE32(1)) ‖ Hash(T0 ‖ LE32(2)) ‖ …`, cut to its first `n`
/// bits.
pub(crate) fn expand(alg: HashAlg, t0: Vec<u8>, n: usize) -> Bits {
    let need = n.div_ceil(8);
    let mut out = t0.clone();
    let mut counter = 1u32;
    while out.len() < need {
        out.extend(alg.digest(&[&t0, &counter.to_le_bytes()]));
        counter += 1;
    }
    Bits::from_bytes(&out, n)
}

/// `Hash(u8 len(domain) ‖ domain ‖ msg)`, expanded or truncated to `n` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyedHashOracle {
    alg: HashAlg,
    domain: Vec<u8>,
    n: usize,
}

impl KeyedHashOracle {
    pub fn new(alg: HashAlg, domain: &[u8], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("oracle output width must be positive"));
        }
        if domain.len() > 255 {
            return Err(Error::invalid("domain separator longer than 255 bytes"));
        }
        Ok(KeyedHashOracle {
            alg,
            domain: domain.to_vec(),
            n,
        })
    }

    /// SHA-256 oracle in the key-derivation domain.
    pub fn kdf(n: usize) -> Result<Self> {
        Self::new(HashAlg::Sha256, KDF_DOMAIN, n)
    }

    pub fn alg(&self) -> HashAlg {
        self.alg
    }

    pub fn domain(&self) -> &[u8] {
        &self.domain
    }
}

impl RandomOracle for KeyedHashOracle {
    fn output_bits(&self) -> usize {
        self.n
    }

    fn query(&self, msg: &[u8]) -> Bits {
        let t0 = self.alg.digest(&[&[self.domain.len() as u8], &self.domain, msg]);
        expand(self.alg, t0, self.n)
    }

    fn descriptor(&self) -> OracleDescriptor {
        OracleDescriptor::KeyedHash {
            hash_alg: self.alg.name().to_string(),
            domain_sep: hex::encode(&self.domain),
            n: self.n,
        }
    }
}

/// Serializable oracle settings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub hash_alg: HashAlg,
    pub n: usize,
    /// Bytes of the little-endian index prefix; only 4 is supported.
    pub index_width: usize,
    /// Domain-separation constant, hex.
    pub domain_sep: String,
}

impl OracleConfig {
    pub fn kdf(n: usize) -> Self {
        OracleConfig {
            hash_alg: HashAlg::default(),
            n,
            index_width: super::INDEX_BYTES,
            domain_sep: hex::encode(KDF_DOMAIN),
        }
    }

    pub fn build(&self) -> Result<KeyedHashOracle> {
        if self.index_width != super::INDEX_BYTES {
            return Err(Error::invalid(format!(
                "index width {} unsupported (only {})",
                self.index_width,
                super::INDEX_BYTES
            )));
        }
        let domain = hex::decode(&self.domain_sep).map_err(|e| Error::malformed("domain_sep", e.to_string()))?;
        KeyedHashOracle::new(self.hash_alg, &domain, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sha256() {
        let o = KeyedHashOracle::new(HashAlg::Sha256, b"dom", 256).unwrap();
        let direct = Sha256::digest(b"\x03domhello");
        assert_eq!(o.query(b"hello").as_bytes(), direct.as_slice());
    }

    #[test]
    fn truncation_is_a_prefix_of_expansion() {
        let long = KeyedHashOracle::kdf(1000).unwrap().query(b"m");
        for n in [1, 7, 8, 255, 256, 257, 999] {
            let short = KeyedHashOracle::kdf(n).unwrap().query(b"m");
            assert_eq!(short, long.slice(0, n), "n = {n}");
        }
    }

    #[test]
    fn expansion_blocks_follow_counter_rule() {
        let o = KeyedHashOracle::kdf(512).unwrap();
        let out = o.query(b"x");
        let mut pre = vec![KDF_DOMAIN.len() as u8];
        pre.extend_from_slice(KDF_DOMAIN);
        pre.extend_from_slice(b"x");
        let t0 = Sha256::digest(&pre).to_vec();
        let mut t1_in = t0.clone();
        t1_in.extend_from_slice(&1u32.to_le_bytes());
        assert_eq!(&out.as_bytes()[..32], t0.as_slice());
        assert_eq!(&out.as_bytes()[32..], Sha256::digest(&t1_in).as_slice());
    }

    #[test]
    fn domains_separate() {
        let a = KeyedHashOracle::new(HashAlg::Sha256, KDF_DOMAIN, 64).unwrap();
        let b = KeyedHashOracle::new(HashAlg::Sha256, MERKLE_DOMAIN, 64).unwrap();
        assert_ne!(a.query(b"q"), b.query(b"q"));
        let c = KeyedHashOracle::new(HashAlg::Sha512, KDF_DOMAIN, 64).unwrap();
        assert_ne!(a.query(b"q"), c.query(b"q"));
    }

    #[test]
    fn config_round_trip() {
        let cfg = OracleConfig::kdf(48);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"sha256\""));
        let back: OracleConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap(), KeyedHashOracle::kdf(48).unwrap());
        assert!(OracleConfig { index_width: 8, ..cfg }.build().is_err());
        assert!("md5".parse::<HashAlg>().is_err());
    }
}
