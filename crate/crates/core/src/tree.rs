//! Addresses of vertices in the binary tree and in the countable-offspring tree.
//!
//! A [`VertexId`] is the sequence of child indices from the root. Trees are
//! never materialized; simulators carry the vertices they have realized and
//! derive per-vertex randomness from [`PathKey`], an incrementally computable
//! digest of the address.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Address of a tree vertex. The root is the empty path.
///
/// Ordering is lexicographic on the index sequence, with a prefix ordered
/// before its extensions.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(Vec<u32>);

impl VertexId {
    pub fn root() -> Self {
        VertexId(Vec::new())
    }

    /// Builds an address from child indices; every index must be at least 1.
    pub fn from_path(path: &[u32]) -> Result<Self> {
        if path.contains(&0) {
            return Err(Error::Domain("child indices start at 1".into()));
        }
        Ok(VertexId(path.to_vec()))
    }

    pub fn path(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// The k-th child (k ≥ 1).
    pub fn child(&self, k: u32) -> Self {
        assert!(k >= 1, "child indices start at 1");
        let mut path = Vec::with_capacity(self.0.len() + 1);
        path.extend_from_slice(&self.0);
        path.push(k);
        VertexId(path)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.is_root() {
            None
        } else {
            Some(VertexId(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Restriction to the first `n` generations.
    pub fn truncate(&self, n: usize) -> Self {
        VertexId(self.0[..n.min(self.0.len())].to_vec())
    }

    /// The genealogy `[v|0, v|1, ..., v]`, root first.
    pub fn prefixes(&self) -> Vec<VertexId> {
        (0..=self.depth()).map(|n| self.truncate(n)).collect()
    }

    /// True iff the vertex lies in the binary tree (indices 1 and 2 only).
    pub fn is_binary(&self) -> bool {
        self.0.iter().all(|&k| k == 1 || k == 2)
    }

    pub fn key(&self) -> PathKey {
        self.0.iter().fold(PathKey::ROOT, |key, &k| key.child(k))
    }
}

impl fmt::Display for VertexId {
    /// Dotted indices, e.g. `1.2.2`; the root renders as `θ`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            return f.write_str("θ");
        }
        f.write_str(&self.dotted())
    }
}

impl VertexId {
    /// Dotted indices with the root as the empty string.
    pub fn dotted(&self) -> String {
        self.0
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(".")
    }
}

impl FromStr for VertexId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "θ" {
            return Ok(VertexId::root());
        }
        let path = s
            .split('.')
            .map(|part| {
                part.parse::<u32>()
                    .map_err(|_| Error::Domain(format!("bad vertex address {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        VertexId::from_path(&path)
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.dotted())
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// 128-bit digest of a vertex address, extendable one child at a time.
///
/// Distinct addresses collide with negligible probability; the digest is
/// used only to key random streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathKey {
    pub hi: u64,
    pub lo: u64,
}

impl PathKey {
    pub const ROOT: PathKey = PathKey {
        hi: 0x6a09_e667_f3bc_c908,
        lo: 0xbb67_ae85_84ca_a73b,
    };

    pub fn child(self, k: u32) -> PathKey {
        let k = u64::from(k);
        PathKey {
            hi: splitmix64(self.hi ^ splitmix64(k.wrapping_mul(0x9e37_79b9_7f4a_7c15))),
            lo: splitmix64(self.lo.rotate_left(17) ^ k ^ 0xd1b5_4a32_d192_ed03),
        }
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(path: &[u32]) -> VertexId {
        VertexId::from_path(path).unwrap()
    }

    #[test]
    fn child_appends_index() {
        assert_eq!(VertexId::root().child(1), v(&[1]));
        assert_eq!(v(&[1, 2]).child(2), v(&[1, 2, 2]));
        let c = v(&[2]).child(3);
        assert_eq!(c, v(&[2, 3]));
        assert!(!c.is_binary());
    }

    #[test]
    fn prefixes_run_root_to_leaf() {
        assert_eq!(VertexId::root().prefixes(), vec![VertexId::root()]);
        assert_eq!(
            v(&[1, 2]).prefixes(),
            vec![VertexId::root(), v(&[1]), v(&[1, 2])]
        );
        assert_eq!(v(&[2, 2, 1]).prefixes().len(), 4);
    }

    #[test]
    fn binary_membership() {
        assert!(VertexId::root().is_binary());
        assert!(v(&[1, 2, 2]).is_binary());
        assert!(!v(&[1, 3]).is_binary());
    }

    #[test]
    fn zero_index_rejected() {
        assert!(VertexId::from_path(&[1, 0]).is_err());
    }

    #[test]
    fn dotted_serialization() {
        assert_eq!(serde_json::to_string(&v(&[1, 2, 2])).unwrap(), "\"1.2.2\"");
        assert_eq!(serde_json::to_string(&VertexId::root()).unwrap(), "\"\"");
        assert_eq!(VertexId::root().to_string(), "θ");
        let back: VertexId = serde_json::from_str("\"1.2.2\"").unwrap();
        assert_eq!(back, v(&[1, 2, 2]));
        assert_eq!("θ".parse::<VertexId>().unwrap(), VertexId::root());
    }

    #[test]
    fn lexicographic_order() {
        assert!(VertexId::root() < v(&[1]));
        assert!(v(&[1]) < v(&[1, 1]));
        assert!(v(&[1, 2]) < v(&[2]));
    }

    #[test]
    fn sibling_keys_differ() {
        let p = v(&[1, 2]).key();
        assert_ne!(p.child(1), p.child(2));
        assert_ne!(v(&[1, 2]).key(), v(&[2, 1]).key());
        assert_ne!(v(&[1]).key(), v(&[1, 1]).key());
    }

    proptest! {
        #[test]
        fn child_parent_roundtrip(path in prop::collection::vec(1u32..5, 0..30), k in 1u32..6) {
            let v = VertexId::from_path(&path).unwrap();
            let c = v.child(k);
            prop_assert_eq!(c.parent().unwrap(), v.clone());
            prop_assert_eq!(c.depth(), v.depth() + 1);
            let mut expected = v.prefixes();
            expected.push(c.clone());
            prop_assert_eq!(c.prefixes(), expected);
            prop_assert_eq!(c.key(), v.key().child(k));
        }
    }
}
