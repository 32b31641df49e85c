//! Stable 64-bit FNV-1a. Split assignment and feature hashing must agree
//! across platforms and toolchains, which rules out `std`'s randomized hasher.

const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const PRIME: u64 = 0x0000_0100_0000_01b3;

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    fnv1a_from(OFFSET, bytes)
}

pub(crate) fn fnv1a_from(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Hash of `s` under `seed`, with a final avalanche so nearby seeds decorrelate.
pub(crate) fn seeded(s: &str, seed: u64) -> u64 {
    let h = fnv1a_from(fnv1a(&seed.to_le_bytes()), s.as_bytes());
    mix(h)
}

fn mix(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_vectors() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn seed_changes_hash() {
        assert_ne!(seeded("word", 1), seeded("word", 2));
        assert_eq!(seeded("word", 7), seeded("word", 7));
    }
}
