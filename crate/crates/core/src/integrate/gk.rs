//! Globally adaptive 15-point Gauss-Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Estimate, Tolerance};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn qk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);
    let fc = f(centr);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let absc = hlgth * XGK[j];
        let f1 = f(centr - absc);
        let f2 = f(centr + absc);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let h = hlgth.abs();
    let value = resk * hlgth;
    resabs *= h;
    resasc *= h;
    let mut error = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Estimate {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the partition given
/// by the sorted `points` (discontinuities or kinks of `f`).
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
) -> Estimate {
    assert!(points.len() >= 2, "need at least an interval");
    let mut heap = BinaryHeap::new();
    let mut evals = 0u64;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(qk15(&mut f, w[0], w[1]));
            evals += 15;
        }
    }
    refine(&mut f, heap, evals, tol)
}

fn refine<F: FnMut(f64) -> f64>(
    f: &mut F,
    mut heap: BinaryHeap<Segment>,
    mut evals: u64,
    tol: Tolerance,
) -> Estimate {
    // Segments too narrow to split further keep their contribution here.
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let totals = |heap: &BinaryHeap<Segment>, fv: f64, fe: f64| {
        (
            fv + heap.iter().map(|s| s.value).sum::<f64>(),
            fe + heap.iter().map(|s| s.error).sum::<f64>(),
        )
    };
    let (mut value, mut error) = totals(&heap, 0.0, 0.0);
    loop {
        if error <= tol.target(value) {
            (value, error) = totals(&heap, frozen_value, frozen_error);
            if error <= tol.target(value) {
                return Estimate {
                    value,
                    error,
                    evals,
                    converged: true,
                };
            }
        }
        let Some(worst) = heap.pop() else {
            let (value, error) = totals(&heap, frozen_value, frozen_error);
            return Estimate {
                value,
                error,
                evals,
                converged: false,
            };
        };
        if evals >= tol.max_evals {
            heap.push(worst);
            let (value, error) = totals(&heap, frozen_value, frozen_error);
            return Estimate {
                value,
                error,
                evals,
                converged: false,
            };
        }
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs());
        if !(mid > worst.a && mid < worst.b) || worst.b - worst.a < 1e-13 * scale {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        let left = qk15(f, worst.a, mid);
        let right = qk15(f, mid, worst.b);
        evals += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

/// Integrates `f` over `[0, inf)` with a geometric initial partition around `scale`
/// (eight pieces per octave across 2^-20..2^20 times `scale`) and an inverted tail.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(mut f: F, scale: f64, tol: Tolerance) -> Estimate {
    let top = scale * 2f64.powi(20);
    let mut points = vec![0.0];
    for j in -160..=160 {
        points.push(scale * 2f64.powf(j as f64 / 8.0));
    }
    let body = integrate_with_breaks(&mut f, &points, Tolerance {
        max_evals: tol.max_evals / 2,
        ..tol
    });
    // x = top / u maps (0, 1] onto [top, inf).
    let tail = integrate(
        |u: f64| {
            if u <= 0.0 {
                0.0
            } else {
                f(top / u) * top / (u * u)
            }
        },
        0.0,
        1.0,
        Tolerance {
            rel: tol.rel,
            abs: tol.abs * 0.1,
            max_evals: tol.max_evals / 2,
        },
    );
    Estimate {
        value: body.value + tail.value,
        error: body.error + tail.error,
        evals: body.evals + tail.evals,
        converged: body.converged && tail.converged,
    }
}
