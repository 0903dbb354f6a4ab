use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// Identifier of the random stream layout, stamped into every report.
pub const RNG_ID: &str = "chacha8/seed_from_u64(master)/stream=trial/2-bit-directions/v1";

/// One of the four unit lattice directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    PosX,
    NegX,
    PosY,
    NegY,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::PosX,
        Direction::NegX,
        Direction::PosY,
        Direction::NegY,
    ];

    /// Direction from the two low bits of `bits`.
    #[inline]
    pub fn from_bits(bits: u64) -> Self {
        Direction::ALL[(bits & 3) as usize]
    }

    /// `(κ, ε)`: κ = 1 for horizontal steps, ε the sign of the nonzero
    /// coordinate.
    #[inline]
    pub fn decompose(self) -> (u8, i8) {
        match self {
            Direction::PosX => (1, 1),
            Direction::NegX => (1, -1),
            Direction::PosY => (0, 1),
            Direction::NegY => (0, -1),
        }
    }

    pub fn from_decomposition(kappa: u8, eps: i8) -> Option<Self> {
        match (kappa, eps) {
            (1, 1) => Some(Direction::PosX),
            (1, -1) => Some(Direction::NegX),
            (0, 1) => Some(Direction::PosY),
            (0, -1) => Some(Direction::NegY),
            _ => None,
        }
    }

    #[inline]
    pub fn is_horizontal(self) -> bool {
        matches!(self, Direction::PosX | Direction::NegX)
    }

    /// The unit vector.
    #[inline]
    pub fn unit(self) -> (i64, i64) {
        match self {
            Direction::PosX => (1, 0),
            Direction::NegX => (-1, 0),
            Direction::PosY => (0, 1),
            Direction::NegY => (0, -1),
        }
    }
}

pub fn decompose_step(direction: Direction) -> (u8, i8) {
    direction.decompose()
}

/// The generator for trial `trial` under `master_seed`: ChaCha8 keyed by the
/// master seed, on stream number `trial`. Streams are independent and do not
/// depend on how trials are scheduled.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// SplitMix64 finalizer; derives sub-seeds such as per-round seeds.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draws directions two bits at a time from a buffered 64-bit word.
pub struct StepSampler<R = ChaCha8Rng> {
    rng: R,
    buffer: u64,
    left: u32,
}

impl<R: RngCore> StepSampler<R> {
    pub fn new(rng: R) -> Self {
        StepSampler {
            rng,
            buffer: 0,
            left: 0,
        }
    }

    #[inline]
    pub fn sample_step(&mut self) -> Direction {
        if self.left == 0 {
            self.buffer = self.rng.next_u64();
            self.left = 32;
        }
        let d = Direction::from_bits(self.buffer);
        self.buffer >>= 2;
        self.left -= 1;
        d
    }

    /// A uniform integer in `0..n`, drawn from a fresh 64-bit word.
    pub fn index_below(&mut self, n: u64) -> u64 {
        ((self.rng.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

impl StepSampler<ChaCha8Rng> {
    pub fn for_trial(master_seed: u64, trial: u64) -> Self {
        StepSampler::new(trial_rng(master_seed, trial))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_is_a_bijection() {
        assert_eq!(decompose_step(Direction::PosX), (1, 1));
        assert_eq!(decompose_step(Direction::NegY), (0, -1));
        assert_eq!(decompose_step(Direction::NegX), (1, -1));
        for d in Direction::ALL {
            let (k, e) = d.decompose();
            assert_eq!(Direction::from_decomposition(k, e), Some(d));
            assert_eq!(k == 1, d.is_horizontal());
            let (x, y) = d.unit();
            assert_eq!(if k == 1 { x } else { y }, e as i64);
        }
        assert_eq!(Direction::from_decomposition(2, 1), None);
    }

    #[test]
    fn same_seed_same_draws() {
        let mut a = StepSampler::for_trial(7, 3);
        let mut b = StepSampler::for_trial(7, 3);
        let mut c = StepSampler::for_trial(7, 4);
        let xs: Vec<_> = (0..200).map(|_| a.sample_step()).collect();
        let ys: Vec<_> = (0..200).map(|_| b.sample_step()).collect();
        let zs: Vec<_> = (0..200).map(|_| c.sample_step()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn directions_are_uniform() {
        let draws = 1_000_000u64;
        let mut s = StepSampler::for_trial(20_240_601, 0);
        let mut counts = [0u64; 4];
        for _ in 0..draws {
            counts[s.sample_step() as usize] += 1;
        }
        let sigma = (0.25f64 * 0.75 / draws as f64).sqrt();
        for c in counts {
            let p = c as f64 / draws as f64;
            assert!((p - 0.25).abs() < 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(1, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(derive_seed(5, 9), derive_seed(5, 9));
    }
}
