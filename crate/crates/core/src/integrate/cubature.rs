//! Globally adaptive cubature on hyper-rectangles with the embedded
//! degree-7/degree-5 Genz-Malik rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Estimate, Tolerance};

const LAMBDA2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const LAMBDA4: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const LAMBDA5: f64 = 0.688_247_201_611_685_3; // sqrt(9/19)

struct Rule {
    dim: usize,
    w1: f64,
    w2: f64,
    w3: f64,
    w4: f64,
    w5: f64,
    e1: f64,
    e2: f64,
    e3: f64,
    e4: f64,
}

impl Rule {
    fn new(dim: usize) -> Self {
        let n = dim as f64;
        Rule {
            dim,
            w1: (12824.0 - 9120.0 * n + 400.0 * n * n) / 19683.0,
            w2: 980.0 / 6561.0,
            w3: (1820.0 - 400.0 * n) / 19683.0,
            w4: 200.0 / 19683.0,
            w5: 6859.0 / 19683.0 / (1u64 << dim) as f64,
            e1: (729.0 - 950.0 * n + 50.0 * n * n) / 729.0,
            e2: 245.0 / 486.0,
            e3: (265.0 - 100.0 * n) / 1458.0,
            e4: 25.0 / 729.0,
        }
    }

    fn evals_per_region(&self) -> u64 {
        let n = self.dim as u64;
        1 + 4 * n + 2 * n * (n - 1) + (1 << n)
    }

    fn apply<F: FnMut(&[f64]) -> f64>(&self, f: &mut F, center: &[f64], half: &[f64]) -> Region {
        let n = self.dim;
        let volume: f64 = half.iter().map(|h| 2.0 * h).product();
        let mut x = center.to_vec();
        let f0 = f(&x);
        let mut sum2 = 0.0;
        let mut sum3 = 0.0;
        let mut best_dim = 0;
        let mut best_diff = -1.0;
        let ratio = (LAMBDA2 * LAMBDA2) / (LAMBDA4 * LAMBDA4);
        for i in 0..n {
            x[i] = center[i] - LAMBDA2 * half[i];
            let mut f2 = f(&x);
            x[i] = center[i] + LAMBDA2 * half[i];
            f2 += f(&x);
            x[i] = center[i] - LAMBDA4 * half[i];
            let mut f3 = f(&x);
            x[i] = center[i] + LAMBDA4 * half[i];
            f3 += f(&x);
            x[i] = center[i];
            sum2 += f2;
            sum3 += f3;
            let diff = (f2 - 2.0 * f0 - ratio * (f3 - 2.0 * f0)).abs();
            // Ties go to the wider side.
            if diff > best_diff * (1.0 + 1e-10) || (diff >= best_diff * (1.0 - 1e-10) && half[i] > half[best_dim]) {
                best_diff = diff;
                best_dim = i;
            }
        }
        let mut sum4 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                for (si, sj) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                    x[i] = center[i] + si * LAMBDA4 * half[i];
                    x[j] = center[j] + sj * LAMBDA4 * half[j];
                    sum4 += f(&x);
                }
                x[i] = center[i];
                x[j] = center[j];
            }
        }
        let mut sum5 = 0.0;
        for mask in 0..(1usize << n) {
            for i in 0..n {
                let s = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                x[i] = center[i] + s * LAMBDA5 * half[i];
            }
            sum5 += f(&x);
        }
        let r7 = volume * (self.w1 * f0 + self.w2 * sum2 + self.w3 * sum3 + self.w4 * sum4 + self.w5 * sum5);
        let r5 = volume * (self.e1 * f0 + self.e2 * sum2 + self.e3 * sum3 + self.e4 * sum4);
        let error = if r7.is_finite() { (r7 - r5).abs() } else { f64::INFINITY };
        Region {
            center: center.to_vec(),
            half: half.to_vec(),
            value: r7,
            error,
            split: best_dim,
        }
    }
}

struct Region {
    center: Vec<f64>,
    half: Vec<f64>,
    value: f64,
    error: f64,
    split: usize,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| {
            // Deterministic tie-break on position.
            for (a, b) in other.center.iter().zip(&self.center) {
                match a.total_cmp(b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

/// Integrates `f` over the box `lower..upper` (dimension at least 2).
pub fn integrate<F: FnMut(&[f64]) -> f64>(mut f: F, lower: &[f64], upper: &[f64], tol: Tolerance) -> Estimate {
    let dim = lower.len();
    assert!(dim >= 2 && upper.len() == dim, "cubature needs matching bounds of dimension >= 2");
    let rule = Rule::new(dim);
    let per_region = rule.evals_per_region();
    let center: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| 0.5 * (a + b)).collect();
    let half: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| 0.5 * (b - a)).collect();

    let mut heap = BinaryHeap::new();
    let first = rule.apply(&mut f, &center, &half);
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    let mut evals = per_region;
    loop {
        if error <= tol.target(value) || evals + 2 * per_region > tol.max_evals {
            value = heap.iter().map(|r| r.value).sum();
            error = heap.iter().map(|r| r.error).sum();
            let converged = error <= tol.target(value);
            if converged || evals + 2 * per_region > tol.max_evals {
                return Estimate {
                    value,
                    error,
                    evals,
                    converged,
                };
            }
        }
        let worst = heap.pop().expect("heap is never empty");
        let d = worst.split;
        let mut half = worst.half.clone();
        half[d] *= 0.5;
        let mut c_lo = worst.center.clone();
        c_lo[d] -= half[d];
        let mut c_hi = worst.center.clone();
        c_hi[d] += half[d];
        let lo = rule.apply(&mut f, &c_lo, &half);
        let hi = rule.apply(&mut f, &c_hi, &half);
        evals += 2 * per_region;
        value += lo.value + hi.value - worst.value;
        error += lo.error + hi.error - worst.error;
        heap.push(lo);
        heap.push(hi);
    }
}
