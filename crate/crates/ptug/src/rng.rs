//! Deterministic random-number streams.
//!
//! Every trajectory draws from four disjoint ChaCha8 streams derived from one
//! master seed: coin flips, noise directions, and one private stream per
//! player. Stream separation keeps results bit-identical regardless of worker
//! count or replay order, and lets a strategy consume any number of draws
//! without perturbing the coins or the noise of later steps.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which of a trajectory's four streams a generator draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Coin = 0,
    Noise = 1,
    PlayerOne = 2,
    PlayerTwo = 3,
}

/// Factory for per-trajectory stream bundles under one master seed.
#[derive(Clone, Copy, Debug)]
pub struct StreamFamily {
    master: u64,
}

impl StreamFamily {
    pub fn new(master: u64) -> Self {
        StreamFamily { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// The four independent generators for trajectory `index`.
    pub fn trajectory(&self, index: u64) -> GameStreams {
        GameStreams {
            coin: self.stream(index, Role::Coin),
            noise: self.stream(index, Role::Noise),
            player_one: self.stream(index, Role::PlayerOne),
            player_two: self.stream(index, Role::PlayerTwo),
            seed_tag: format!("master:{}/traj:{}", self.master, index),
        }
    }

    fn stream(&self, index: u64, role: Role) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        // ChaCha streams are indexed by a 64-bit word; four roles per
        // trajectory partition the space without overlap.
        rng.set_stream(index.wrapping_mul(4).wrapping_add(role as u64));
        rng
    }
}

/// The random state for one game: coin, noise, and per-player generators,
/// plus the tag recorded in transcripts for exact replay.
#[derive(Clone, Debug)]
pub struct GameStreams {
    pub coin: ChaCha8Rng,
    pub noise: ChaCha8Rng,
    pub player_one: ChaCha8Rng,
    pub player_two: ChaCha8Rng,
    pub seed_tag: String,
}

/// Parse a transcript seed tag back into (master, trajectory index).
pub fn parse_seed_tag(tag: &str) -> Option<(u64, u64)> {
    let rest = tag.strip_prefix("master:")?;
    let (m, t) = rest.split_once("/traj:")?;
    Some((m.parse().ok()?, t.parse().ok()?))
}
