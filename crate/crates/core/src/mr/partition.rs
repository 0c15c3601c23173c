use crate::rdf::Term;

/// A shuffle key with a platform-independent byte encoding, used by the
/// hash partitioner.
pub trait PartitionKey {
    fn write_key(&self, out: &mut Vec<u8>);
}

impl PartitionKey for Term {
    fn write_key(&self, out: &mut Vec<u8>) {
        self.write_canonical(out);
    }
}

impl PartitionKey for String {
    fn write_key(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        out.extend_from_slice(self.as_bytes());
    }
}

impl PartitionKey for u64 {
    fn write_key(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
}

impl PartitionKey for usize {
    fn write_key(&self, out: &mut Vec<u8>) {
        (*self as u64).write_key(out);
    }
}

impl<T: PartitionKey> PartitionKey for Option<T> {
    fn write_key(&self, out: &mut Vec<u8>) {
        match self {
            None => out.push(0),
            Some(t) => {
                out.push(1);
                t.write_key(out);
            }
        }
    }
}

impl<T: PartitionKey> PartitionKey for Vec<T> {
    fn write_key(&self, out: &mut Vec<u8>) {
        (self.len() as u64).write_key(out);
        for t in self {
            t.write_key(out);
        }
    }
}

impl<A: PartitionKey, B: PartitionKey> PartitionKey for (A, B) {
    fn write_key(&self, out: &mut Vec<u8>) {
        self.0.write_key(out);
        self.1.write_key(out);
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Seeded 64-bit FNV-1a.
pub fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for b in seed.to_le_bytes().iter().chain(bytes) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub const DEFAULT_SEED: u64 = 0x5eed;

/// The partition a key is routed to.
pub fn partition_of<K: PartitionKey>(key: &K, partitions: usize, seed: u64) -> usize {
    let mut buf = Vec::with_capacity(32);
    key.write_key(&mut buf);
    (fnv1a(seed, &buf) % partitions as u64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_hash_values() {
        // Reference values of unseeded FNV-1a-64 for the empty string and "a".
        let unseeded = |bytes: &[u8]| {
            let mut h = FNV_OFFSET;
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(FNV_PRIME);
            }
            h
        };
        assert_eq!(unseeded(b""), 0xcbf29ce484222325);
        assert_eq!(unseeded(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(1, b"x"), fnv1a(1, b"x"));
        assert_ne!(fnv1a(1, b"x"), fnv1a(2, b"x"));
    }

    #[test]
    fn partition_in_range() {
        for n in 1..8 {
            for k in 0..50u64 {
                assert!(partition_of(&k, n, DEFAULT_SEED) < n);
            }
        }
    }
}
