use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for one unit of work (a restart, a tree, a
/// district) derived from the master seed. Streams never overlap, so results
/// do not depend on which thread runs which unit.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a namespace tag into a seed so that stages sharing a master seed
/// draw from unrelated sequences.
pub(crate) fn derive_seed(seed: u64, tag: &str) -> u64 {
    // FNV-1a over the tag, folded into the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h.rotate_left(17)
}
