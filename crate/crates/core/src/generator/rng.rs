//! SplitMix64, the portable seeded generator behind every random choice.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Generator for task `ordinal` of a job seeded with `seed`. Its seed is
    /// output number `ordinal` (0-based) of `SplitMix64::new(seed)`, so tasks
    /// never share a stream and can run in any order.
    pub fn for_task(seed: u64, ordinal: u64) -> Self {
        Self::new(Self::task_seed(seed, ordinal))
    }

    /// The seed [`for_task`](Self::for_task) starts from.
    pub fn task_seed(seed: u64, ordinal: u64) -> u64 {
        mix(seed.wrapping_add(ordinal.wrapping_add(1).wrapping_mul(GAMMA)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [0, n) by multiply-shift; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    /// Fisher-Yates permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i as u64 + 1) as usize;
            p.swap(i, j);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_vectors() {
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xe220a8397b1dcdaf);
        assert_eq!(r.next_u64(), 0x6e789e6aa1b965f4);
        assert_eq!(r.next_u64(), 0x06c45d188009454f);
        let mut r = SplitMix64::new(7);
        assert_eq!(r.next_u64(), 0x63cbe1e459320dd7);
        assert_eq!(r.next_u64(), 0x044c3cd7f43c661c);
        assert_eq!(r.next_u64(), 0xe6984080bab12a02);
    }

    #[test]
    fn task_streams_follow_parent_outputs() {
        let mut parent = SplitMix64::new(7);
        for i in 0..5 {
            let expected = parent.next_u64();
            assert_eq!(SplitMix64::for_task(7, i).state, expected);
        }
    }

    #[test]
    fn bounded_draws() {
        let mut r = SplitMix64::new(1);
        for n in 1..50 {
            assert!(r.below(n) < n);
            let f = r.next_f64();
            assert!((0.0..1.0).contains(&f));
        }
        let mut p = SplitMix64::new(3).permutation(10);
        p.sort_unstable();
        assert_eq!(p, (0..10).collect::<Vec<_>>());
    }
}
