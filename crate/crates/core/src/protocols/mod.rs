//! Honest reference simulators for ten group-based key exchange schemes.
//!
//! A [`ProtocolInstance`] fixes a scheme, its parameters and an RNG seed;
//! [`ProtocolInstance::simulate`] plays both parties and returns a
//! [`Transcript`] split into what an eavesdropper sees and what the parties
//! keep to themselves.

mod sampler;
mod schemes;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgMatrix, AlgebraKind};
use crate::attacks::PublicData;
use crate::error::{Error, Result};
use crate::linalg::FVector;

pub use sampler::{commuting_subgroup_sampler, random_word, CommutingFamilies, Generator, SamplerStyle};

/// Degenerate draws (singular matrices, commuting Stickel pairs, ...) are
/// retried at most this many times.
pub const MAX_RESAMPLES: usize = 64;

/// Element orders are searched up to this bound.
pub const ORDER_CAP: u64 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolTag {
    KoLee,
    WangCao,
    Hurley,
    Stickel,
    Alvarez,
    ShpilrainUshakov,
    Romanczuk,
    Mahalanobis1,
    Mahalanobis2,
    Hkks,
}

impl ProtocolTag {
    pub const ALL: [ProtocolTag; 10] = [
        ProtocolTag::KoLee,
        ProtocolTag::WangCao,
        ProtocolTag::Hurley,
        ProtocolTag::Stickel,
        ProtocolTag::Alvarez,
        ProtocolTag::ShpilrainUshakov,
        ProtocolTag::Romanczuk,
        ProtocolTag::Mahalanobis1,
        ProtocolTag::Mahalanobis2,
        ProtocolTag::Hkks,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolTag::KoLee => "ko_lee",
            ProtocolTag::WangCao => "wang_cao",
            ProtocolTag::Hurley => "hurley",
            ProtocolTag::Stickel => "stickel",
            ProtocolTag::Alvarez => "alvarez",
            ProtocolTag::ShpilrainUshakov => "shpilrain_ushakov",
            ProtocolTag::Romanczuk => "romanczuk",
            ProtocolTag::Mahalanobis1 => "mahalanobis1",
            ProtocolTag::Mahalanobis2 => "mahalanobis2",
            ProtocolTag::Hkks => "hkks",
        }
    }

    /// One-line description of the scheme and the shared secret.
    pub fn description(&self) -> &'static str {
        match self {
            ProtocolTag::KoLee => "Ko-Lee et al. conjugation key exchange; K = (ab) g (ab)^-1",
            ProtocolTag::WangCao => "Wang-Cao et al. power conjugation; K = x^(s+t) g x^-(s+t)",
            ProtocolTag::Hurley => "Hurley-Hurley authentication over a commutative matrix group; secret = message x",
            ProtocolTag::Stickel => "Stickel key exchange; K = g^(k+r) f^(l+s)",
            ProtocolTag::Alvarez => "Alvarez et al. block triangular matrices; K = (1,2) block of M1^(k1+l1) M2^(k2+l2)",
            ProtocolTag::ShpilrainUshakov => "Shpilrain-Ushakov decomposition; K = a b g b' a'",
            ProtocolTag::Romanczuk => "Romanczuk-Ustimenko polynomials in commuting C, D; K = g Q P",
            ProtocolTag::Mahalanobis1 => "Mahalanobis protocol 1 with commuting automorphisms; K = phi(psi(g))",
            ProtocolTag::Mahalanobis2 => "Mahalanobis protocol 2 (three pass); Bob's session key g^xi",
            ProtocolTag::Hkks => "Habeeb-Kahrobaei-Koupparis-Shpilrain semidirect product; K = a_(m+n)",
        }
    }

    /// Names of the secret exponents accepted through `Params::exponents`.
    pub fn exponent_names(&self) -> &'static [&'static str] {
        match self {
            ProtocolTag::WangCao => &["s", "t"],
            ProtocolTag::Stickel => &["k", "l", "r", "s"],
            ProtocolTag::Alvarez => &["k1", "k2", "l1", "l2"],
            ProtocolTag::Hkks => &["m", "n"],
            _ => &[],
        }
    }
}

impl fmt::Display for ProtocolTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::ParameterRejection(format!("unknown protocol {s:?}")))
    }
}

/// Scheme parameters. Not every field applies to every scheme; see
/// [`Params::defaults`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Characteristic of the ground field.
    pub p: u64,
    /// Coefficient algebra of the matrix entries.
    pub algebra: AlgebraKind,
    /// Matrix size (for Alvarez: size of the upper-left block).
    pub n: usize,
    /// Size of the lower-right block (Alvarez only).
    pub m: usize,
    /// Generators per side for subgroup-based schemes.
    pub generators: usize,
    /// Length of random words over the generators.
    pub word_length: usize,
    /// Upper bound for secret exponents.
    pub exponent_bound: u64,
    pub style: SamplerStyle,
    /// Degree bound of the secret polynomials (Romanczuk-Ustimenko).
    pub poly_degree: usize,
    /// Fixed secret exponents, in the order of [`ProtocolTag::exponent_names`].
    pub exponents: Option<Vec<u64>>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            p: 7,
            algebra: AlgebraKind::Trivial,
            n: 3,
            m: 2,
            generators: 2,
            word_length: 8,
            exponent_bound: 32,
            style: SamplerStyle::PolynomialInMatrix,
            poly_degree: 3,
            exponents: None,
        }
    }
}

impl Params {
    /// Desk-scale defaults per scheme.
    pub fn defaults(tag: ProtocolTag) -> Params {
        let base = Params::default();
        match tag {
            ProtocolTag::KoLee => Params {
                p: 5,
                n: 4,
                style: SamplerStyle::BlockDiagonalSplit,
                ..base
            },
            ProtocolTag::WangCao => base,
            ProtocolTag::Hurley => Params { n: 4, ..base },
            ProtocolTag::Stickel => Params { p: 5, ..base },
            ProtocolTag::Alvarez => Params {
                p: 11,
                n: 2,
                m: 2,
                ..base
            },
            ProtocolTag::ShpilrainUshakov => Params { p: 5, ..base },
            ProtocolTag::Romanczuk => Params {
                p: 11,
                n: 4,
                ..base
            },
            ProtocolTag::Mahalanobis1 | ProtocolTag::Mahalanobis2 => Params {
                style: SamplerStyle::BlockDiagonalSplit,
                ..base
            },
            ProtocolTag::Hkks => Params {
                n: 2,
                algebra: AlgebraKind::GroupAlgebra {
                    generators: vec!["(1 2 3)".into()],
                    degree: None,
                    order_bound: None,
                },
                ..base
            },
        }
    }

    /// HKKS with 3 x 3 matrices over F_7[A_5] (flattened dimension 540).
    pub fn hkks_large() -> Params {
        Params {
            p: 7,
            n: 3,
            algebra: AlgebraKind::GroupAlgebra {
                generators: vec!["(1 2 3 4 5)".into(), "(1 2 3)".into()],
                degree: Some(5),
                order_bound: None,
            },
            ..Params::defaults(ProtocolTag::Hkks)
        }
    }

    /// Overrides one field from a `key=value` pair; the value is read as JSON
    /// when it parses, otherwise as a bare string.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut obj = serde_json::to_value(&*self).expect("params serialize");
        let parsed = serde_json::from_str(value)
            .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
        match obj.as_object_mut() {
            Some(map) if map.contains_key(key) => {
                map.insert(key.to_string(), parsed);
            }
            _ => return Err(Error::ParameterRejection(format!("unknown parameter {key:?}"))),
        }
        *self = serde_json::from_value(obj)
            .map_err(|e| Error::ParameterRejection(format!("bad value for {key}: {e}")))?;
        Ok(())
    }

    pub fn validate(&self, tag: ProtocolTag) -> Result<()> {
        let reject = |msg: String| Err(Error::ParameterRejection(msg));
        if !(1..=8).contains(&self.n) {
            return reject(format!("n = {} outside 1..=8", self.n));
        }
        if !(1..=8).contains(&self.generators) {
            return reject(format!("generators = {} outside 1..=8", self.generators));
        }
        if self.word_length == 0 || self.word_length > 1024 {
            return reject("word_length must be in 1..=1024".into());
        }
        if !(1..=1 << 20).contains(&self.exponent_bound) {
            return reject("exponent_bound must be in 1..=2^20".into());
        }
        if let Some(e) = &self.exponents {
            if e.len() != tag.exponent_names().len() {
                return reject(format!(
                    "{tag} takes exponents {:?}",
                    tag.exponent_names()
                ));
            }
            if e.iter().any(|&x| x > self.exponent_bound) {
                return reject("fixed exponents exceed exponent_bound".into());
            }
        }
        let needs_field = matches!(
            tag,
            ProtocolTag::Hurley | ProtocolTag::Romanczuk | ProtocolTag::Alvarez
        );
        if needs_field && self.algebra != AlgebraKind::Trivial {
            return reject(format!("{tag} is defined over the ground field only"));
        }
        match tag {
            ProtocolTag::Alvarez if !(1..=8).contains(&self.m) => {
                reject(format!("m = {} outside 1..=8", self.m))
            }
            ProtocolTag::Stickel if self.exponent_bound >= ORDER_CAP => reject(format!(
                "Stickel needs exponent_bound below the order cap {ORDER_CAP}"
            )),
            ProtocolTag::KoLee
            | ProtocolTag::ShpilrainUshakov
            | ProtocolTag::Mahalanobis1
            | ProtocolTag::Mahalanobis2
                if self.style == SamplerStyle::BlockDiagonalSplit && self.n < 2 =>
            {
                reject("block_diagonal_split needs n >= 2".into())
            }
            _ => Ok(()),
        }
    }
}

/// A scheme, its parameters and the seed that drives every random choice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolInstance {
    pub protocol: ProtocolTag,
    pub params: Params,
    pub seed: u64,
}

/// The parties' secrets.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PrivateView {
    pub matrices: BTreeMap<String, AlgMatrix>,
    pub vectors: BTreeMap<String, FVector>,
    pub integers: BTreeMap<String, u64>,
}

#[derive(Clone, Debug)]
pub struct Transcript {
    pub public: PublicData,
    pub private: PrivateView,
    /// The shared secret both parties computed (they are checked to agree).
    pub honest_key: FVector,
    /// Field operations spent by the honest parties on their matrix products.
    pub generation_ops: u64,
}

impl Transcript {
    /// JSON form; the private view is included only on request.
    pub fn to_json(&self, emit_private: bool) -> serde_json::Value {
        let mut v = serde_json::json!({
            "public": self.public,
            "honest_key": self.honest_key,
            "generation_ops": self.generation_ops,
        });
        if emit_private {
            v["private"] = serde_json::to_value(&self.private).expect("private view serializes");
        }
        v
    }
}

impl ProtocolInstance {
    pub fn new(protocol: ProtocolTag, seed: u64) -> Self {
        ProtocolInstance {
            protocol,
            params: Params::defaults(protocol),
            seed,
        }
    }

    pub fn with_params(protocol: ProtocolTag, params: Params, seed: u64) -> Self {
        ProtocolInstance {
            protocol,
            params,
            seed,
        }
    }

    /// Plays the scheme honestly, resampling degenerate draws.
    pub fn simulate(&self) -> Result<Transcript> {
        self.params.validate(self.protocol)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..MAX_RESAMPLES {
            if let Some(t) = schemes::simulate(self.protocol, &self.params, &mut rng)? {
                return Ok(t);
            }
        }
        Err(Error::ParameterRejection(format!(
            "{}: no valid draw after {MAX_RESAMPLES} attempts",
            self.protocol
        )))
    }
}
