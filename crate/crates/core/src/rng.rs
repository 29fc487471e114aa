//! Deterministic per-trial random streams.
//!
//! Every sampling site derives its own generator from
//! `(master_seed, trial_index, stream)`. Trials therefore produce identical
//! results regardless of how they are scheduled across workers, and any one
//! trial can be replayed in isolation.
//!
//! The generator is xoshiro256++ seeded through a splitmix64 chain. Not
//! cryptographic; stable output across platforms.

/// Sampling sites. Each site consumes an independent stream within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Nature = 1,
    Dataset = 2,
    SideInfo = 3,
    Mechanism = 4,
    FreshT = 5,
    MiaMember = 6,
    MiaFresh = 7,
    Coupled = 8,
    Aux = 9,
}

#[inline]
fn mix64(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xoshiro256++ generator owned by a single sampling site of a single trial.
#[derive(Debug, Clone)]
pub struct TrialRng {
    s: [u64; 4],
}

impl TrialRng {
    /// Derive the generator for one `(master_seed, trial, stream)` triple.
    pub fn derive(master_seed: u64, trial: u64, stream: Stream) -> Self {
        let mut k = mix64(master_seed);
        k = mix64(k ^ trial);
        k = mix64(k ^ (stream as u64));
        Self::from_key(k)
    }

    /// Seed directly from a 64-bit key (used by tests and one-shot samplers).
    pub fn from_key(key: u64) -> Self {
        let mut x = key;
        let mut s = [0u64; 4];
        for w in s.iter_mut() {
            x = mix64(x);
            *w = x;
        }
        if s == [0, 0, 0, 0] {
            s[0] = 0x9E37_79B9_7F4A_7C15;
        }
        TrialRng { s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw in the open interval (0, 1).
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.open01() < p
    }

    /// Uniform integer in `[0, n)` without modulo bias (Lemire's method).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (n as u128);
            let low = m as u64;
            if low >= n {
                return (m >> 64) as u64;
            }
            let threshold = n.wrapping_neg() % n;
            if low >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Laplace(0, scale) via the inverse CDF: one uniform draw, `scale·ln(u)`
    /// with the sign taken from which half of (0,1) the draw landed in.
    #[inline]
    pub fn laplace(&mut self, scale: f64) -> f64 {
        let u = self.open01();
        if u < 0.5 {
            scale * (2.0 * u).ln()
        } else {
            -scale * (2.0 * (1.0 - u)).ln()
        }
    }

    /// Ordered sample of `n` distinct values from `[0, pool)`.
    ///
    /// Partial Fisher-Yates; the returned order is part of the sampling law
    /// (the first element is a uniform pick, and so on).
    pub fn distinct_ordered(&mut self, n: usize, pool: usize) -> Vec<usize> {
        debug_assert!(n <= pool);
        let mut idx: Vec<usize> = (0..pool).collect();
        for i in 0..n {
            let j = i + self.below((pool - i) as u64) as usize;
            idx.swap(i, j);
        }
        idx.truncate(n);
        idx
    }
}
