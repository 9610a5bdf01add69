//! Site-keyed random streams.
//!
//! Every draw is a pure function of `(seed, sample, site)`: the triple is
//! packed into a ChaCha20 key and stream id, so the value at a site does not
//! depend on the box it is drawn in or on the order of the draws.
//!
//! Layout: key words `[seed, sample, x₀, x₁]` (little endian, coordinates as
//! two's complement), stream id `x₂`. Coordinates beyond the third are folded
//! into the stream id with a SplitMix64 step each.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator owned by one site of one sample.
pub fn site_rng(seed: u64, sample: u64, site: &[i64]) -> ChaCha20Rng {
    let coord = |i: usize| site.get(i).copied().unwrap_or(0) as u64;
    let words = [seed, sample, coord(0), coord(1)];
    let mut key = [0u8; 32];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    let mut stream = coord(2);
    for &c in site.iter().skip(3) {
        stream = splitmix(stream ^ c as u64);
    }
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_triple_same_draw() {
        let a: f64 = site_rng(7, 3, &[1, -2]).random();
        let b: f64 = site_rng(7, 3, &[1, -2]).random();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_triples_differ() {
        let base: u64 = site_rng(7, 3, &[1, -2]).random();
        assert_ne!(base, site_rng(8, 3, &[1, -2]).random::<u64>());
        assert_ne!(base, site_rng(7, 4, &[1, -2]).random::<u64>());
        assert_ne!(base, site_rng(7, 3, &[-2, 1]).random::<u64>());
        assert_ne!(
            site_rng(1, 1, &[0, 0, 0, 1]).random::<u64>(),
            site_rng(1, 1, &[0, 0, 0, 2]).random::<u64>()
        );
    }
}
