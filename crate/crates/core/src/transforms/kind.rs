use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Identifier of one deterministic transform, or the seeded random baseline.
///
/// Equality on `Random` compares seeds, so two random kinds with the same seed
/// describe the same matrix family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    /// Orthonormal DCT-II.
    Dct2,
    /// Orthonormal DST-I.
    Dst1,
    /// Walsh-Hadamard in natural (Hadamard) order, scaled by 1/sqrt(N).
    FwhtNatural,
    /// Walsh-Hadamard in sequency order, scaled by 1/sqrt(N).
    FwhtSequency,
    /// Discrete Hartley transform, scaled by 1/sqrt(N).
    Dht,
    /// Full-depth orthonormal Haar transform.
    Haar,
    Db4,
    Db20,
    Sym2,
    Coif1,
    Bior1_3,
    Rbior1_1,
    /// Dense i.i.d. Gaussian matrix drawn from a seeded generator.
    Random { seed: u64 },
}

impl TransformKind {
    /// Every deterministic kind, in the canonical bag order.
    pub const DETERMINISTIC: [TransformKind; 12] = [
        TransformKind::Dct2,
        TransformKind::Dst1,
        TransformKind::FwhtNatural,
        TransformKind::FwhtSequency,
        TransformKind::Dht,
        TransformKind::Haar,
        TransformKind::Db4,
        TransformKind::Db20,
        TransformKind::Sym2,
        TransformKind::Coif1,
        TransformKind::Bior1_3,
        TransformKind::Rbior1_1,
    ];

    pub fn is_wavelet(self) -> bool {
        matches!(
            self,
            TransformKind::Db4
                | TransformKind::Db20
                | TransformKind::Sym2
                | TransformKind::Coif1
                | TransformKind::Bior1_3
                | TransformKind::Rbior1_1
        )
    }

    /// Kinds that only exist on power-of-two lengths and are zero-padded up to one.
    pub fn needs_power_of_two(self) -> bool {
        matches!(
            self,
            TransformKind::FwhtNatural | TransformKind::FwhtSequency | TransformKind::Haar
        )
    }

    /// Kinds whose matrix is orthonormal for every admissible size.
    pub fn is_orthonormal(self) -> bool {
        matches!(
            self,
            TransformKind::Dct2
                | TransformKind::Dst1
                | TransformKind::FwhtNatural
                | TransformKind::FwhtSequency
                | TransformKind::Dht
                | TransformKind::Haar
        )
    }

    pub fn is_biorthogonal(self) -> bool {
        matches!(self, TransformKind::Bior1_3 | TransformKind::Rbior1_1)
    }

    pub fn is_random(self) -> bool {
        matches!(self, TransformKind::Random { .. })
    }

    /// Short label used in architecture strings and reports.
    pub fn label(self) -> String {
        match self {
            TransformKind::Dct2 => "DCT".into(),
            TransformKind::Dst1 => "DST".into(),
            TransformKind::FwhtNatural => "FWHT1".into(),
            TransformKind::FwhtSequency => "FWHT2".into(),
            TransformKind::Dht => "DHT".into(),
            TransformKind::Haar => "Haar".into(),
            TransformKind::Db4 => "DB4".into(),
            TransformKind::Db20 => "DB20".into(),
            TransformKind::Sym2 => "sym2".into(),
            TransformKind::Coif1 => "coif1".into(),
            TransformKind::Bior1_3 => "bior1.3".into(),
            TransformKind::Rbior1_1 => "rbior1.1".into(),
            TransformKind::Random { seed } => format!("RAND({seed})"),
        }
    }
}

/// The default bag of candidate transforms, in tie-break order.
pub fn bag_default() -> Vec<TransformKind> {
    TransformKind::DETERMINISTIC.to_vec()
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let random_seed = |rest: &str| -> Result<TransformKind, Error> {
            rest.trim()
                .parse::<u64>()
                .map(|seed| TransformKind::Random { seed })
                .map_err(|_| Error::InvalidParameter(format!("bad random seed in {s:?}")))
        };
        if let Some(rest) = t.strip_prefix("rand(").and_then(|r| r.strip_suffix(')')) {
            return random_seed(rest);
        }
        if let Some(rest) = t
            .strip_prefix("random:")
            .or_else(|| t.strip_prefix("rand:"))
        {
            return random_seed(rest);
        }
        let kind = match t.as_str() {
            "dct" | "dct2" | "dct-ii" => TransformKind::Dct2,
            "dst" | "dst1" | "dst-i" => TransformKind::Dst1,
            "fwht1" | "fwht_natural" | "fwht-natural" => TransformKind::FwhtNatural,
            "fwht2" | "fwht_sequency" | "fwht-sequency" => TransformKind::FwhtSequency,
            "dht" => TransformKind::Dht,
            "haar" => TransformKind::Haar,
            "db4" => TransformKind::Db4,
            "db20" => TransformKind::Db20,
            "sym2" => TransformKind::Sym2,
            "coif1" => TransformKind::Coif1,
            "bior1.3" | "bior1_3" => TransformKind::Bior1_3,
            "rbior1.1" | "rbio1.1" | "rbior1_1" => TransformKind::Rbior1_1,
            _ => return Err(Error::InvalidParameter(format!("unknown transform {s:?}"))),
        };
        Ok(kind)
    }
}

impl Serialize for TransformKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for TransformKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
