use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::linalg::{c, C64};

/// The `q`-th roots of unity together with FFT plans of matching length.
///
/// Node `k` is `exp(2πik/q)`; Laurent index `n` is stored at `n mod q`, so
/// storage slots `q/2..q` carry the negative frequencies.
pub struct Grid {
    q: usize,
    nodes: Vec<C64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("q", &self.q).finish()
    }
}

impl Grid {
    pub fn new(q: usize) -> Arc<Self> {
        assert!(
            q.is_power_of_two() && q >= 4,
            "grid size must be a power of two >= 4"
        );
        let mut planner = FftPlanner::new();
        let nodes = (0..q)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / q as f64;
                c(t.cos(), t.sin())
            })
            .collect();
        Arc::new(Self {
            q,
            nodes,
            forward: planner.plan_fft_forward(q),
            inverse: planner.plan_fft_inverse(q),
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn node(&self, k: usize) -> C64 {
        self.nodes[k]
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    /// Storage slot of Laurent index `n`.
    pub fn slot(&self, n: i64) -> usize {
        n.rem_euclid(self.q as i64) as usize
    }

    /// Laurent index held in storage slot `k`, taken in `[-q/2, q/2)`.
    pub fn freq(&self, k: usize) -> i64 {
        if k < self.q / 2 {
            k as i64
        } else {
            k as i64 - self.q as i64
        }
    }

    /// Slot of the conjugate node: `conj(z_k) = z_{q-k}`.
    pub fn mirror(&self, k: usize) -> usize {
        (self.q - k) % self.q
    }

    /// Samples to coefficients, in place: `a_n = (1/q) Σ_k conj(z_k)^n s_k`.
    pub fn analyze(&self, buf: &mut [C64]) {
        self.forward.process(buf);
        let s = 1.0 / self.q as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }

    /// Coefficients to samples, in place: `s_k = Σ_n a_n z_k^n`.
    pub fn synthesize(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
    }
}

pub fn same_grid(a: &Grid, b: &Grid) -> bool {
    a.q == b.q
}
