//! Two-dimensional Sobol low-discrepancy sequence.
//!
//! Gray-code construction with the classic direction numbers: the first
//! coordinate is the van der Corput sequence in base 2 (mₖ = 1), the second
//! uses the degree-one primitive polynomial x + 1 (mₖ = 2mₖ₋₁ ⊕ mₖ₋₁).
//! Index 0 (the all-zero point) is skipped, so the first returned point is
//! (0.5, 0.5) and every point lies strictly inside (0,1)².

use crate::error::{Error, Result};
use crate::scalar::Real;

const BITS: u32 = 32;

fn direction_numbers() -> [[u32; BITS as usize]; 2] {
    let mut v = [[0u32; BITS as usize]; 2];
    // Dimension 1: v_k = 2^(31-k).
    for k in 0..BITS {
        v[0][k as usize] = 1u32 << (31 - k);
    }
    // Dimension 2: m_1 = 1, m_k = 2 m_{k-1} XOR m_{k-1}. m_k has k bits, so
    // the recurrence is run in u64 and only the shifted value is truncated.
    let mut m = 1u64;
    for k in 0..BITS {
        v[1][k as usize] = (m << (31 - k)) as u32;
        m = (2 * m) ^ m;
    }
    v
}

/// Streaming 2-D Sobol generator. Deterministic: equal lengths always yield
/// bitwise identical sequences.
#[derive(Debug, Clone)]
pub struct Sobol2d {
    dirs: [[u32; BITS as usize]; 2],
    state: [u32; 2],
    index: u64,
}

impl Sobol2d {
    pub fn new() -> Self {
        Sobol2d {
            dirs: direction_numbers(),
            state: [0, 0],
            index: 0,
        }
    }
}

impl Default for Sobol2d {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for Sobol2d {
    type Item = [f64; 2];

    fn next(&mut self) -> Option<[f64; 2]> {
        // Gray-code update: flip the direction given by the lowest zero bit
        // of the running index (equivalently, trailing ones of index).
        let c = self.index.trailing_ones();
        if c >= BITS {
            return None;
        }
        self.state[0] ^= self.dirs[0][c as usize];
        self.state[1] ^= self.dirs[1][c as usize];
        self.index += 1;
        let scale = 1.0 / (1u64 << BITS) as f64;
        Some([self.state[0] as f64 * scale, self.state[1] as f64 * scale])
    }
}

/// First `n` points of the 2-D Sobol sequence (index 0 skipped).
pub fn sobol_2d<T: Real>(n: usize) -> Result<Vec<[T; 2]>> {
    if n == 0 {
        return Err(Error::domain("sobol_2d requires n >= 1"));
    }
    Ok(Sobol2d::new()
        .take(n)
        .map(|p| [T::of(p[0]), T::of(p[1])])
        .collect())
}
