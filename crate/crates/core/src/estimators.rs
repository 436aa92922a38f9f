//! Per-provider online estimators: a sliding-window ridge regression
//! head with incremental inverse maintenance, an EMA latency tracker,
//! and a windowed scalar mean.
//!
//! The ridge head keeps `A = ridge * I + sum(x xᵀ)` and `b = sum(y x)`
//! over at most `capacity` samples. Both `A` and `A⁻¹` are maintained;
//! appends and evictions touch `A⁻¹` through rank-one updates, so a
//! routing step costs O(d²). If an eviction drives the inverse toward
//! losing positive definiteness, the head rebuilds both matrices from
//! the window; that is recovery, not failure, and is counted for
//! diagnostics.

use std::collections::VecDeque;

use crate::linalg;

/// Sliding-window ridge regression head.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedRidgeHead {
    dim: usize,
    ridge: f64,
    capacity: usize,
    a_matrix: Vec<f64>,
    a_inverse: Vec<f64>,
    b_vector: Vec<f64>,
    window: VecDeque<(Vec<f64>, f64)>,
    target_lo: f64,
    target_hi: f64,
    rebuilds: u64,
}

/// Eviction denominators below this trigger a full rebuild.
const PD_GUARD: f64 = 1e-12;

impl WindowedRidgeHead {
    /// Head for quality targets in [0, 1].
    pub fn new(dim: usize, ridge: f64, capacity: usize) -> Self {
        Self::with_target_bounds(dim, ridge, capacity, 0.0, 1.0)
    }

    /// Head accepting targets in [lo, hi]; the additive baselines train
    /// on composite rewards in [-1, 1].
    pub fn with_target_bounds(dim: usize, ridge: f64, capacity: usize, lo: f64, hi: f64) -> Self {
        assert!(dim >= 1, "dim must be at least 1");
        assert!(ridge > 0.0, "ridge must be positive, got {ridge}");
        assert!(capacity >= 1, "capacity must be at least 1");
        assert!(lo < hi, "target bounds must be ordered");
        WindowedRidgeHead {
            dim,
            ridge,
            capacity,
            a_matrix: linalg::identity(dim, ridge),
            a_inverse: linalg::identity(dim, 1.0 / ridge),
            b_vector: vec![0.0; dim],
            window: VecDeque::with_capacity(capacity),
            target_lo: lo,
            target_hi: hi,
            rebuilds: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    /// Number of positive-definiteness recovery rebuilds so far.
    pub fn rebuild_count(&self) -> u64 {
        self.rebuilds
    }

    /// Row-major `A = ridge * I + sum(x xᵀ)` over the current window.
    pub fn a_matrix(&self) -> &[f64] {
        &self.a_matrix
    }

    /// Row-major maintained inverse of `a_matrix`.
    pub fn a_inverse(&self) -> &[f64] {
        &self.a_inverse
    }

    /// Point estimate `xᵀ A⁻¹ b`. A fresh head predicts 0 everywhere.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.check_vector(x);
        let theta = linalg::mat_vec(&self.a_inverse, &self.b_vector, self.dim);
        linalg::dot(x, &theta)
    }

    /// Confidence width `sqrt(xᵀ A⁻¹ x)`. A materially negative
    /// quadratic form means the inverse lost positive definiteness,
    /// which the eviction guard is supposed to make impossible.
    pub fn uncertainty(&self, x: &[f64]) -> f64 {
        self.check_vector(x);
        let v = linalg::mat_vec(&self.a_inverse, x, self.dim);
        let q = linalg::dot(x, &v);
        assert!(
            q > -1e-9,
            "quadratic form {q} is negative: inverse lost positive definiteness"
        );
        q.max(0.0).sqrt()
    }

    /// Appends a sample. At capacity, the oldest sample is evicted
    /// (rank-one downdate) before the append (rank-one update).
    pub fn update(&mut self, x: &[f64], y: f64) {
        self.check_vector(x);
        assert!(
            y.is_finite() && y >= self.target_lo && y <= self.target_hi,
            "target {y} outside [{}, {}]",
            self.target_lo,
            self.target_hi
        );
        if self.window.len() == self.capacity {
            let (old_x, old_y) = self.window.pop_front().expect("window nonempty at capacity");
            self.evict(&old_x, old_y);
        }
        linalg::add_outer(&mut self.a_matrix, x, 1.0, self.dim);
        for (bi, xi) in self.b_vector.iter_mut().zip(x) {
            *bi += y * xi;
        }
        let v = linalg::mat_vec(&self.a_inverse, x, self.dim);
        let denom = 1.0 + linalg::dot(x, &v);
        rank_one(&mut self.a_inverse, &v, -1.0 / denom, self.dim);
        self.window.push_back((x.to_vec(), y));
    }

    fn evict(&mut self, x: &[f64], y: f64) {
        linalg::add_outer(&mut self.a_matrix, x, -1.0, self.dim);
        for (bi, xi) in self.b_vector.iter_mut().zip(x) {
            *bi -= y * xi;
        }
        let v = linalg::mat_vec(&self.a_inverse, x, self.dim);
        let denom = 1.0 - linalg::dot(x, &v);
        if denom <= PD_GUARD {
            self.rebuild();
            return;
        }
        rank_one(&mut self.a_inverse, &v, 1.0 / denom, self.dim);
    }

    /// Recomputes `A`, `b`, and `A⁻¹` from the window contents.
    pub fn rebuild(&mut self) {
        self.a_matrix = linalg::identity(self.dim, self.ridge);
        self.b_vector = vec![0.0; self.dim];
        for (x, y) in &self.window {
            linalg::add_outer(&mut self.a_matrix, x, 1.0, self.dim);
            for (bi, xi) in self.b_vector.iter_mut().zip(x) {
                *bi += y * xi;
            }
        }
        self.a_inverse = linalg::invert(&self.a_matrix, self.dim)
            .expect("ridge-regularized matrix is invertible");
        self.rebuilds += 1;
    }

    fn check_vector(&self, x: &[f64]) {
        assert_eq!(x.len(), self.dim, "feature dimension mismatch");
        assert!(x.iter().all(|v| v.is_finite()), "features must be finite");
    }
}

/// m += scale * v vᵀ (symmetric rank-one correction).
fn rank_one(m: &mut [f64], v: &[f64], scale: f64, d: usize) {
    for i in 0..d {
        let vi = scale * v[i];
        let row = &mut m[i * d..(i + 1) * d];
        for j in 0..d {
            row[j] += vi * v[j];
        }
    }
}

/// EMA latency tracker. The first observation replaces the initial
/// value outright, so a cold-start prior cannot drag early estimates;
/// afterwards `tau_hat <- (1 - rho) * tau_hat + rho * tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmaLatency {
    tau_hat_ms: f64,
    rho: f64,
    initialized: bool,
}

impl EmaLatency {
    pub fn new(tau_init_ms: f64, rho: f64) -> Self {
        assert!(
            tau_init_ms.is_finite() && tau_init_ms >= 0.0,
            "tau_init_ms must be nonnegative"
        );
        assert!(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1], got {rho}");
        EmaLatency {
            tau_hat_ms: tau_init_ms,
            rho,
            initialized: false,
        }
    }

    pub fn update(&mut self, tau_ms: f64) {
        assert!(
            tau_ms.is_finite() && tau_ms >= 0.0,
            "latency must be a nonnegative real, got {tau_ms}"
        );
        if self.initialized {
            self.tau_hat_ms = (1.0 - self.rho) * self.tau_hat_ms + self.rho * tau_ms;
        } else {
            self.tau_hat_ms = tau_ms;
            self.initialized = true;
        }
    }

    pub fn estimate(&self) -> f64 {
        self.tau_hat_ms
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }
}

/// Unbounded scalar EMA with the same first-sample seeding; used for
/// reward tracking where values may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Ema {
    value: f64,
    rho: f64,
    initialized: bool,
}

impl Ema {
    pub fn new(rho: f64) -> Self {
        assert!(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1], got {rho}");
        Ema {
            value: 0.0,
            rho,
            initialized: false,
        }
    }

    pub fn update(&mut self, x: f64) {
        assert!(x.is_finite(), "EMA input must be finite");
        if self.initialized {
            self.value = (1.0 - self.rho) * self.value + self.rho * x;
        } else {
            self.value = x;
            self.initialized = true;
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }
}

/// Sliding-window mean and count of a scalar stream. The empty window
/// reports mean 0, matching a cold-start quality estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedScalarStats {
    window: VecDeque<f64>,
    capacity: usize,
    sum: f64,
}

impl WindowedScalarStats {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "capacity must be at least 1");
        WindowedScalarStats {
            window: VecDeque::with_capacity(capacity),
            capacity,
            sum: 0.0,
        }
    }

    pub fn push(&mut self, x: f64) {
        assert!(x.is_finite(), "stats input must be finite");
        if self.window.len() == self.capacity {
            let old = self.window.pop_front().expect("window nonempty");
            self.sum -= old;
        }
        self.window.push_back(x);
        self.sum += x;
    }

    pub fn count(&self) -> usize {
        self.window.len()
    }

    pub fn mean(&self) -> f64 {
        if self.window.is_empty() {
            0.0
        } else {
            self.sum / self.window.len() as f64
        }
    }
}
