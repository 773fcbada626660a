use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams of one episode.
///
/// All four share the ChaCha8 key expanded from the base seed and differ in
/// the 64-bit stream id (1 to 4). ChaCha keystreams under distinct stream ids
/// do not overlap, so the streams are independent and each is reproducible
/// from `(base_seed, id)` alone.
#[derive(Debug, Clone)]
pub struct SeedStreams {
    pub spawn: ChaCha8Rng,
    pub jitter: ChaCha8Rng,
    pub procgen: ChaCha8Rng,
    pub policy: ChaCha8Rng,
}

pub const SPAWN_STREAM: u64 = 1;
pub const JITTER_STREAM: u64 = 2;
pub const PROCGEN_STREAM: u64 = 3;
pub const POLICY_STREAM: u64 = 4;

pub fn stream(base_seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(id);
    rng
}

pub fn seed_streams(base_seed: u64) -> SeedStreams {
    SeedStreams {
        spawn: stream(base_seed, SPAWN_STREAM),
        jitter: stream(base_seed, JITTER_STREAM),
        procgen: stream(base_seed, PROCGEN_STREAM),
        policy: stream(base_seed, POLICY_STREAM),
    }
}
