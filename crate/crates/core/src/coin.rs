//! Coin-betting update engines.
//!
//! Outcomes `c` are negative gradients (directions to move along). Both
//! engines bet the displacement from the initial position `y0`.
//!
//! * [`KtCoin`]: Krichevsky-Trofimov betting on the whole particle,
//!   `y_t = y0 + (sum_{s<t} c_s) / t * (1 + sum_{s<t} <c_s, y_s - y0>)`.
//!   Valid for outcomes bounded by one; an optional known scale `L`
//!   normalizes `c <- c / L`.
//! * [`AdaptiveCoin`]: per-coordinate variant with running max scale `L`,
//!   absolute-gradient sum `G` and clipped reward `R`,
//!   `y = y0 + (sum c) / (G + L) * (1 + R / L)`, optionally with the
//!   denominator floored at `100 L`.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoinGuard {
    #[default]
    None,
    /// Denominator `max(G + L, 100 L)`.
    Max100L,
}

#[derive(Debug, Clone)]
pub struct KtCoin {
    y0: Array2<f64>,
    sum_c: Array2<f64>,
    reward: Array1<f64>,
    scale: Option<f64>,
    t: usize,
}

impl KtCoin {
    pub fn new(y0: Array2<f64>) -> Self {
        let (n, d) = y0.dim();
        Self {
            y0,
            sum_c: Array2::zeros((n, d)),
            reward: Array1::zeros(n),
            scale: None,
            t: 1,
        }
    }

    /// Normalizes every outcome by a known bound `L`.
    pub fn with_scale(y0: Array2<f64>, scale: f64) -> Self {
        assert!(scale > 0.0, "outcome scale must be positive");
        Self {
            scale: Some(scale),
            ..Self::new(y0)
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn initial(&self) -> &Array2<f64> {
        &self.y0
    }

    /// `y_t` from the outcomes recorded so far; equals `y0` at `t = 1`.
    pub fn positions(&self) -> Array2<f64> {
        let t = self.t as f64;
        let mut y = self.y0.clone();
        for (i, mut row) in y.rows_mut().into_iter().enumerate() {
            let wealth = 1.0 + self.reward[i];
            row.zip_mut_with(&self.sum_c.row(i), |yv, s| *yv += s / t * wealth);
        }
        y
    }

    /// Records the outcomes `c` observed at `current` (the positions last
    /// returned) and returns the next positions.
    pub fn step(&mut self, current: ArrayView2<f64>, c: ArrayView2<f64>) -> Array2<f64> {
        let inv = self.scale.map_or(1.0, |l| 1.0 / l);
        for i in 0..c.nrows() {
            let mut inner = 0.0;
            for j in 0..c.ncols() {
                let cv = c[[i, j]] * inv;
                inner += cv * (current[[i, j]] - self.y0[[i, j]]);
                self.sum_c[[i, j]] += cv;
            }
            self.reward[i] += inner;
        }
        self.t += 1;
        self.positions()
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveCoin {
    y0: Array2<f64>,
    sum_c: Array2<f64>,
    max_abs: Array2<f64>,
    sum_abs: Array2<f64>,
    reward: Array2<f64>,
    guard: CoinGuard,
    t: usize,
}

impl AdaptiveCoin {
    pub fn new(y0: Array2<f64>, guard: CoinGuard) -> Self {
        let shape = y0.dim();
        Self {
            y0,
            sum_c: Array2::zeros(shape),
            max_abs: Array2::zeros(shape),
            sum_abs: Array2::zeros(shape),
            reward: Array2::zeros(shape),
            guard,
            t: 0,
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn initial(&self) -> &Array2<f64> {
        &self.y0
    }

    /// Per-coordinate max observed `|c|`.
    pub fn max_scale(&self) -> &Array2<f64> {
        &self.max_abs
    }

    pub fn abs_sum(&self) -> &Array2<f64> {
        &self.sum_abs
    }

    pub fn reward(&self) -> &Array2<f64> {
        &self.reward
    }

    /// Records outcomes `c` observed at `current` and returns the next
    /// positions. Coordinates that have only seen zero outcomes stay at `y0`.
    pub fn step(&mut self, current: ArrayView2<f64>, c: ArrayView2<f64>) -> Array2<f64> {
        let mut out = self.y0.clone();
        for ((i, j), y) in out.indexed_iter_mut() {
            let cv = c[[i, j]];
            let y0 = self.y0[[i, j]];
            let a = cv.abs();
            let l = self.max_abs[[i, j]].max(a);
            let g = self.sum_abs[[i, j]] + a;
            let r = (self.reward[[i, j]] + cv * (current[[i, j]] - y0)).max(0.0);
            let sum = self.sum_c[[i, j]] + cv;
            self.max_abs[[i, j]] = l;
            self.sum_abs[[i, j]] = g;
            self.reward[[i, j]] = r;
            self.sum_c[[i, j]] = sum;
            if l > 0.0 {
                let denom = match self.guard {
                    CoinGuard::None => g + l,
                    CoinGuard::Max100L => (g + l).max(100.0 * l),
                };
                *y = y0 + sum / denom * (1.0 + r / l);
            }
        }
        self.t += 1;
        out
    }
}
