//! Sobol low-discrepancy points in up to four dimensions, Gray-code order.
//!
//! Direction numbers for dimensions 2-4 are the first rows of the Joe-Kuo
//! table `new-joe-kuo-6.21201`:
//!
//! ```text
//! d  s  a  m_i
//! 2  1  0  1
//! 3  2  1  1 3
//! 4  3  1  1 3 1
//! ```
//!
//! Dimension 1 is the van der Corput sequence in base 2.

use crate::error::{EpwError, Result};

const BITS: usize = 32;
const TABLE: [(u32, u32, &[u32]); 3] = [(1, 0, &[1]), (2, 1, &[1, 3]), (3, 1, &[1, 3, 1])];

/// Supported number of dimensions.
pub const SOBOL_MAX_DIM: usize = 4;

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = 1u32 << (BITS - 1 - i);
        }
        return v;
    }
    let (s, a, m) = TABLE[dim - 1];
    let s = s as usize;
    for i in 0..BITS {
        if i < s {
            v[i] = m[i] << (BITS - 1 - i);
        } else {
            let mut x = v[i - s] ^ (v[i - s] >> s);
            for k in 1..s {
                if (a >> (s - 1 - k)) & 1 == 1 {
                    x ^= v[i - k];
                }
            }
            v[i] = x;
        }
    }
    v
}

/// Streaming Sobol generator; the first point produced is the all-zero point.
#[derive(Debug, Clone)]
pub struct Sobol {
    dim: usize,
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

impl Sobol {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > SOBOL_MAX_DIM {
            return Err(EpwError::Unsupported(format!(
                "Sobol dimension {dim} outside 1..={SOBOL_MAX_DIM}"
            )));
        }
        Ok(Self {
            dim,
            directions: (0..dim).map(direction_numbers).collect(),
            state: vec![0; dim],
            index: 0,
        })
    }

    /// Returns the next point and advances.
    pub fn next_point(&mut self) -> Vec<f64> {
        let out = self.state.iter().map(|&x| x as f64 / 4294967296.0).collect();
        let c = (!self.index).trailing_zeros() as usize;
        for d in 0..self.dim {
            self.state[d] ^= self.directions[d][c.min(BITS - 1)];
        }
        self.index += 1;
        out
    }
}

/// `n` Sobol points in `[0,1)^dim` after discarding the first `skip`.
pub fn sobol(dim: usize, n: usize, skip: usize) -> Result<Vec<Vec<f64>>> {
    let mut g = Sobol::new(dim)?;
    for _ in 0..skip {
        g.next_point();
    }
    Ok((0..n).map(|_| g.next_point()).collect())
}
