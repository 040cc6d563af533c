//! Upper and lower bounds on the quantum block error probability of
//! erasure-channel codes, and rate–error trade-off curves built from them.
//!
//! With `A` the amplitude-good set, `U = Σ_{i∈A} Z_i` bounds the amplitude
//! error from above and `L = max_{i∈A} ½(1 − √(1 − Z_i²))` from below.
//! Amplitude and phase errors are equally likely on an erasure channel, so
//! `L(2 − U) ≤ P_e ≤ U(2 − L)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::construction::{bec_profile, IndexSet, ReliabilityProfile};
use crate::error::{invalid, Result};
use crate::numeric::{compensated_sum, CompensatedSum};

/// Sum of `Z` over `good`, compensated.
pub fn upper_u(profile: &ReliabilityProfile, good: &IndexSet) -> Result<f64> {
    check_indices(profile, good)?;
    Ok(compensated_sum(good.iter().map(|i| profile.z(i))))
}

/// `½(1 − √(1 − Z_max²))` over `good`; undefined for an empty set.
pub fn lower_l(profile: &ReliabilityProfile, good: &IndexSet) -> Result<f64> {
    check_indices(profile, good)?;
    if good.is_empty() {
        return invalid("lower bound needs a nonempty index set");
    }
    let z_max = good.iter().map(|i| profile.z(i)).fold(0.0, f64::max);
    Ok(bit_error_floor(z_max))
}

#[inline]
fn bit_error_floor(z: f64) -> f64 {
    // 1 − √(1 − z²) written to avoid cancellation for tiny z.
    let z2 = z * z;
    0.5 * z2 / (1.0 + (1.0 - z2).sqrt())
}

fn check_indices(profile: &ReliabilityProfile, set: &IndexSet) -> Result<()> {
    match set.max_index() {
        Some(m) if m > profile.blocklength() => {
            invalid(format!("index {m} exceeds blocklength {}", profile.blocklength()))
        }
        _ => Ok(()),
    }
}

/// `(pe_lower, pe_upper)` from `U` and `L`. `U` is not a probability; it is
/// capped at 1 inside the lower bound and the upper bound is capped at 1.
pub fn error_bracket(u: f64, l: f64) -> (f64, f64) {
    let lower = l * (2.0 - u.min(1.0));
    let upper = (u * (2.0 - l)).min(1.0);
    (lower.max(0.0), upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub blocklength: usize,
    /// Requested quantum rate.
    pub target_rate: f64,
    /// Quantum rate achieved after intersecting amplitude and reversed phase sets.
    pub quantum_rate: f64,
    /// Number of amplitude-good (equivalently phase-good) indices.
    pub classical_dimension: usize,
    pub u: f64,
    pub l: f64,
    pub pe_lower: f64,
    pub pe_upper: f64,
}

/// Everything needed to evaluate bound points at any rate for one `(ε, N)`.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    epsilon: f64,
    n: usize,
    /// `Z` values in reliability order.
    sorted_z: Vec<f64>,
    /// `prefix_u[k]` = compensated sum of the `k` smallest `Z`.
    prefix_u: Vec<f64>,
    /// Sorted values of `max(rank(i), rank(N+1-i))`: index `i` is in the
    /// quantum information set at classical dimension `k` iff that value is `< k`.
    sorted_joint_rank: Vec<usize>,
}

impl BoundCurve {
    pub fn new(epsilon: f64, n: usize) -> Result<Self> {
        let profile = bec_profile(epsilon, n)?;
        Ok(Self::from_profile(epsilon, &profile))
    }

    pub fn from_profile(epsilon: f64, profile: &ReliabilityProfile) -> Self {
        let n = profile.blocklength();
        let order = profile.ranking();
        let mut rank = vec![0usize; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let sorted_z: Vec<f64> = order.iter().map(|&i| profile.z_values()[i]).collect();
        let mut acc = CompensatedSum::new();
        let mut prefix_u = Vec::with_capacity(n + 1);
        prefix_u.push(0.0);
        for &z in &sorted_z {
            acc.add(z);
            prefix_u.push(acc.value());
        }
        let mut sorted_joint_rank: Vec<usize> = (0..n).map(|i| rank[i].max(rank[n - 1 - i])).collect();
        sorted_joint_rank.sort_unstable();
        Self { epsilon, n, sorted_z, prefix_u, sorted_joint_rank }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    /// Size of the quantum information set at classical dimension `k`.
    pub fn info_count(&self, k: usize) -> usize {
        self.sorted_joint_rank.partition_point(|&m| m < k)
    }

    /// Smallest classical dimension whose information set has `count` indices.
    pub fn dimension_for_count(&self, count: usize) -> usize {
        if count == 0 {
            0
        } else {
            self.sorted_joint_rank[count - 1] + 1
        }
    }

    /// Bound point at classical dimension `k`.
    pub fn point_at_dimension(&self, k: usize, target_rate: f64) -> BoundPoint {
        let u = self.prefix_u[k];
        let l = if k == 0 { 0.0 } else { bit_error_floor(self.sorted_z[k - 1]) };
        let (pe_lower, pe_upper) = error_bracket(u, l);
        BoundPoint {
            blocklength: self.n,
            target_rate,
            quantum_rate: self.info_count(k) as f64 / self.n as f64,
            classical_dimension: k,
            u,
            l,
            pe_lower,
            pe_upper,
        }
    }

    /// Bound point for the cheapest code reaching quantum rate `rate`.
    pub fn point(&self, rate: f64) -> Result<BoundPoint> {
        if !(0.0..=1.0).contains(&rate) {
            return invalid(format!("quantum rate {rate} outside [0, 1]"));
        }
        let count = ((rate * self.n as f64) - 1e-9).ceil().max(0.0) as usize;
        Ok(self.point_at_dimension(self.dimension_for_count(count.min(self.n)), rate))
    }

    /// Highest achieved quantum rate whose upper bound stays at or below `target`.
    pub fn max_rate_with_upper_below(&self, target: f64) -> f64 {
        // pe_upper is nondecreasing in k; find the first k above target.
        let (mut lo, mut hi) = (0usize, self.n + 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.point_at_dimension(mid, 0.0).pe_upper <= target {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == 0 {
            0.0
        } else {
            self.info_count(lo - 1) as f64 / self.n as f64
        }
    }
}

/// Bound points for every rate in `rate_grid`, in grid order.
pub fn tradeoff_curve(epsilon: f64, n: usize, rate_grid: &[f64]) -> Result<Vec<BoundPoint>> {
    let curve = BoundCurve::new(epsilon, n)?;
    crate::exec::map_ordered(rate_grid, |&r| curve.point(r))
}

/// Write points with columns `N,R_Q,U,L,pe_lower,pe_upper`.
pub fn write_bounds_csv<W: Write>(points: &[BoundPoint], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["N", "R_Q", "U", "L", "pe_lower", "pe_upper"])?;
    for p in points {
        w.write_record([
            p.blocklength.to_string(),
            format!("{:?}", p.quantum_rate),
            format!("{:?}", p.u),
            format!("{:?}", p.l),
            format!("{:?}", p.pe_lower),
            format!("{:?}", p.pe_upper),
        ])?;
    }
    w.flush()?;
    Ok(())
}
