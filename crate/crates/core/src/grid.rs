//! Peeling thresholds and the geometric grid of `(D, z)` guesses.
//!
//! `D` guesses the optimal density and `z` guesses `sqrt(|S*| / |T*|)`. Both
//! are powers of `1 + ε`, stored by exponent. Degrees are integers, so every
//! "degree below a real threshold" test is reduced once to an integer
//! comparison against the threshold's ceiling.

use serde::Serialize;

use crate::error::GraphError;

/// Relative slack for the few comparisons that stay in floating point.
pub const REL_SLACK: f64 = 1e-9;

/// `a >= b`, tolerating a relative error of [`REL_SLACK`].
pub fn at_least(a: f64, b: f64) -> bool {
    a >= b - REL_SLACK * b.abs().max(1.0)
}

/// Smallest integer `c >= 1` with `d < k  <=>  d < c` for every integer `d >= 0`.
/// Values within [`REL_SLACK`] of an integer snap to it.
pub fn ceil_threshold(k: f64) -> u64 {
    let r = k.round();
    let c = if (k - r).abs() <= REL_SLACK * r.max(1.0) {
        r
    } else {
        k.ceil()
    };
    if c < 1.0 {
        1
    } else if c >= u64::MAX as f64 {
        u64::MAX
    } else {
        c as u64
    }
}

/// `d > x` for an integer `d`, with the same snapping as [`ceil_threshold`].
pub fn exceeds(d: u64, x: f64) -> bool {
    if x < 0.0 {
        return true;
    }
    // d > x  <=>  d >= floor(x) + 1
    let r = x.round();
    let floor = if (x - r).abs() <= REL_SLACK * r.max(1.0) {
        r
    } else {
        x.floor()
    };
    (d as f64) >= floor + 1.0
}

/// `base^exp` by repeated multiplication, so the result does not depend on
/// the platform's `pow` implementation.
pub fn power(base: f64, exp: i32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..exp.unsigned_abs() {
        acc *= base;
    }
    if exp < 0 {
        1.0 / acc
    } else {
        acc
    }
}

/// `log_{1+ε} x`, zero for `x <= 1`.
pub fn log_step(x: f64, epsilon: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        x.ln() / (1.0 + epsilon).ln()
    }
}

/// Smallest `i >= 0` with `(1+ε)^i >= x`, evaluated on the same powers the
/// grid uses.
pub fn ceil_log_step(x: f64, epsilon: f64) -> i32 {
    let base = 1.0 + epsilon;
    let mut i = 0;
    let mut acc = 1.0;
    while !at_least(acc, x) {
        acc *= base;
        i += 1;
    }
    i
}

pub fn check_epsilon(epsilon: f64) -> Result<(), GraphError> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(GraphError::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )))
    }
}

/// Fixed peeling thresholds `k_S = D / (2z)` and `k_T = D z / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub density_guess: f64,
    pub ratio_guess: f64,
    pub epsilon: f64,
    k_s: f64,
    k_t: f64,
    k_s_ceil: u64,
    k_t_ceil: u64,
}

impl Thresholds {
    pub fn new(density_guess: f64, ratio_guess: f64, epsilon: f64) -> Result<Self, GraphError> {
        check_epsilon(epsilon)?;
        for (name, v) in [("D", density_guess), ("z", ratio_guess)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(GraphError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let k_s = density_guess / (2.0 * ratio_guess);
        let k_t = density_guess * ratio_guess / 2.0;
        Ok(Self {
            density_guess,
            ratio_guess,
            epsilon,
            k_s,
            k_t,
            k_s_ceil: ceil_threshold(k_s),
            k_t_ceil: ceil_threshold(k_t),
        })
    }

    pub fn k_s(&self) -> f64 {
        self.k_s
    }

    pub fn k_t(&self) -> f64 {
        self.k_t
    }

    /// A left vertex survives a peeling iteration iff its degree is at least this.
    pub fn k_s_ceil(&self) -> u64 {
        self.k_s_ceil
    }

    pub fn k_t_ceil(&self) -> u64 {
        self.k_t_ceil
    }

    pub fn z_squared(&self) -> f64 {
        self.ratio_guess * self.ratio_guess
    }

    /// `ε / (1 + ε)`, the fraction of a side that may fail the threshold
    /// before the current pair is accepted.
    pub fn slack_fraction(&self) -> f64 {
        self.epsilon / (1.0 + self.epsilon)
    }

    /// `|S| >= z² |T|`
    pub fn source_heavy(&self, s: usize, t: usize) -> bool {
        at_least(s as f64, self.z_squared() * t as f64)
    }

    /// `|S| <= z² |T|`
    pub fn target_heavy(&self, s: usize, t: usize) -> bool {
        at_least(self.z_squared() * t as f64, s as f64)
    }
}

/// One `(D, z)` guess with its position in the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub d_index: usize,
    pub z_index: usize,
    pub d_exp: i32,
    pub z_exp: i32,
    pub density_guess: f64,
    pub ratio_guess: f64,
}

/// `D ∈ {(1+ε)^i : 0 <= i <= ⌈log_{1+ε} n⌉}` and
/// `z ∈ {(1+ε)^j : |j| <= ⌈log_{1+ε} √n⌉}`, iterated D-major, z ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuessGrid {
    pub epsilon: f64,
    pub n: usize,
    d_max_exp: i32,
    z_max_exp: i32,
}

impl GuessGrid {
    /// `n` is the bipartite vertex count `|S| + |T|`.
    pub fn new(n: usize, epsilon: f64) -> Result<Self, GraphError> {
        check_epsilon(epsilon)?;
        let nf = n.max(1) as f64;
        Ok(Self {
            epsilon,
            n,
            d_max_exp: ceil_log_step(nf, epsilon),
            z_max_exp: ceil_log_step(nf.sqrt(), epsilon),
        })
    }

    pub fn base(&self) -> f64 {
        1.0 + self.epsilon
    }

    pub fn d_count(&self) -> usize {
        self.d_max_exp as usize + 1
    }

    pub fn z_count(&self) -> usize {
        2 * self.z_max_exp as usize + 1
    }

    pub fn len(&self) -> usize {
        self.d_count() * self.z_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn d_values(&self) -> Vec<f64> {
        (0..=self.d_max_exp).map(|i| power(self.base(), i)).collect()
    }

    pub fn z_values(&self) -> Vec<f64> {
        (-self.z_max_exp..=self.z_max_exp)
            .map(|j| power(self.base(), j))
            .collect()
    }

    pub fn cell(&self, d_index: usize, z_index: usize) -> GridCell {
        let d_exp = d_index as i32;
        let z_exp = z_index as i32 - self.z_max_exp;
        GridCell {
            d_index,
            z_index,
            d_exp,
            z_exp,
            density_guess: power(self.base(), d_exp),
            ratio_guess: power(self.base(), z_exp),
        }
    }

    /// Flat position of a cell in D-major order.
    pub fn flat_index(&self, d_index: usize, z_index: usize) -> usize {
        d_index * self.z_count() + z_index
    }

    pub fn cells(&self) -> Vec<GridCell> {
        (0..self.d_count())
            .flat_map(|d| (0..self.z_count()).map(move |z| (d, z)))
            .map(|(d, z)| self.cell(d, z))
            .collect()
    }

    pub fn thresholds(&self, cell: &GridCell) -> Thresholds {
        Thresholds::new(cell.density_guess, cell.ratio_guess, self.epsilon)
            .expect("grid values are positive")
    }

    /// Largest grid index whose value does not exceed `x` (clamped to the grid).
    pub fn d_index_at_most(&self, x: f64) -> usize {
        let vals = self.d_values();
        vals.iter().rposition(|&v| at_least(x, v)).unwrap_or(0)
    }

    pub fn z_index_at_most(&self, x: f64) -> usize {
        let vals = self.z_values();
        vals.iter().rposition(|&v| at_least(x, v)).unwrap_or(0)
    }
}
