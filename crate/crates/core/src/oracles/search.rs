/// Inverse golden ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping when the bracket is narrower than `tol`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..500 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Result of [`grid_then_golden`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
    /// Best value on the bracketing grid alone.
    pub grid_value: f64,
}

/// Samples `f` on a uniform grid over `[lo, hi]`, then refines the best grid
/// point by golden section between its neighbours.
pub fn grid_then_golden(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64, tol: f64) -> Maximum {
    let n = ((hi - lo) / step).round() as usize;
    let x_at = |i: usize| lo + (hi - lo) * i as f64 / n as f64;
    let (best, grid_value) = (0..=n)
        .map(|i| (i, f(x_at(i))))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let a = x_at(best.saturating_sub(1));
    let b = x_at((best + 1).min(n));
    let (argmax, value) = golden_section_max(&f, a, b, tol);
    if value >= grid_value {
        Maximum {
            argmax,
            value,
            grid_value,
        }
    } else {
        Maximum {
            argmax: x_at(best),
            value: grid_value,
            grid_value,
        }
    }
}
