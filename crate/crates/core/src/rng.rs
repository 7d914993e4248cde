//! Counter-addressed random streams.
//!
//! Each (seed, purpose) pair keys a ChaCha8 generator; the trajectory index
//! selects the stream and the step index selects the block offset, so any
//! draw can be regenerated without replaying earlier ones.

use core::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Independent uses of the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Dynamics,
    Initial,
    Conversion(u32),
    Auxiliary(u32),
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Dynamics => 0x1,
            Purpose::Initial => 0x2,
            Purpose::Conversion(k) => 0x1_0000_0000 | k as u64,
            Purpose::Auxiliary(k) => 0x2_0000_0000 | k as u64,
        }
    }
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_key(seed: u64, purpose: Purpose) -> [u8; 32] {
    let mut state = seed ^ purpose.tag().wrapping_mul(0xd6e8_feb8_6659_fd93);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
    }
    key
}

/// How real Gaussian noises are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Gaussian,
    /// Scaled sum of `n` uniforms; matches the first two moments.
    Binomial(u32),
}

impl NoiseKind {
    fn words_per_normal(self) -> u128 {
        match self {
            NoiseKind::Gaussian => 2,
            NoiseKind::Binomial(n) => 2 * n.max(1) as u128,
        }
    }
}

/// Random source for one trajectory and purpose.
#[derive(Clone)]
pub struct TrajectoryStream {
    rng: ChaCha8Rng,
}

impl TrajectoryStream {
    pub fn new(seed: u64, purpose: Purpose, trajectory: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(derive_key(seed, purpose));
        rng.set_stream(trajectory);
        TrajectoryStream { rng }
    }

    /// Moves to the block reserved for `step`, where each step owns `stride` 32-bit words.
    pub fn seek(&mut self, step: u64, stride: u128) {
        let target = step as u128 * stride;
        if self.rng.get_word_pos() != target {
            self.rng.set_word_pos(target);
        }
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fills `out` with unit-variance normals.
    pub fn fill_normals(&mut self, kind: NoiseKind, out: &mut [f64]) {
        match kind {
            NoiseKind::Gaussian => {
                for pair in out.chunks_mut(2) {
                    let (z0, z1) = self.box_muller();
                    pair[0] = z0;
                    if pair.len() > 1 {
                        pair[1] = z1;
                    }
                }
            }
            NoiseKind::Binomial(n) => {
                let n = n.max(1);
                let scale = libm::sqrt(12.0 / n as f64);
                for x in out.iter_mut() {
                    let mut acc = 0.0;
                    for _ in 0..n {
                        acc += self.uniform() - 0.5;
                    }
                    *x = scale * acc;
                }
            }
        }
    }

    fn box_muller(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let (sin, cos) = libm::sincos(TAU * u2);
        (r * cos, r * sin)
    }
}

/// Number of 32-bit words one step of `count` normals consumes.
pub fn step_stride(count: usize, kind: NoiseKind) -> u128 {
    let n = count.div_ceil(2) as u128 * 2;
    (n * kind.words_per_normal()).max(1)
}

/// Real white noises for one time step, each with variance `1 / dt`.
pub struct StepNoise<'a> {
    stream: &'a mut TrajectoryStream,
    kind: NoiseKind,
    stride: u128,
}

impl<'a> StepNoise<'a> {
    pub fn new(stream: &'a mut TrajectoryStream, kind: NoiseKind, count: usize) -> Self {
        StepNoise { stream, kind, stride: step_stride(count, kind) }
    }

    pub fn draw(&mut self, step: u64, dt: f64, out: &mut [f64]) {
        self.stream.seek(step, self.stride);
        self.stream.fill_normals(self.kind, out);
        let scale = 1.0 / libm::sqrt(dt);
        for x in out.iter_mut() {
            *x *= scale;
        }
    }
}
