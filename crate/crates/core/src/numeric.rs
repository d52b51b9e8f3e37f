//! Small numeric helpers shared by the modules.

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximum of `f` on `[lo, hi]`, stopping once
/// the bracket is narrower than `tol`. Returns `(argmax, max)`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // the bracket shrinks geometrically; 200 rounds is far past f64 resolution
    for _ in 0..200 {
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
    let (mut best_x, mut best_f) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi, 0.5 * (lo + hi)] {
        let fx = f(x);
        if fx > best_f {
            best_x = x;
            best_f = fx;
        }
    }
    (best_x, best_f)
}

/// Grid scan followed by golden-section refinement around the best grid
/// point. `points` grid points span `[lo, hi]` inclusive.
pub(crate) fn grid_then_golden<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
) -> (f64, f64) {
    debug_assert!(points >= 2);
    let step = (hi - lo) / (points - 1) as f64;
    let mut best_i = 0;
    let mut best_f = f64::NEG_INFINITY;
    for i in 0..points {
        let x = if i + 1 == points { hi } else { lo + step * i as f64 };
        let fx = f(x);
        if fx > best_f {
            best_f = fx;
            best_i = i;
        }
    }
    let a = if best_i == 0 { lo } else { lo + step * (best_i - 1) as f64 };
    let b = if best_i + 1 >= points { hi } else { (lo + step * (best_i + 1) as f64).min(hi) };
    let best_x = if best_i + 1 == points { hi } else { lo + step * best_i as f64 };
    let (x, fx) = golden_max(&f, a, b, tol);
    if fx >= best_f {
        (x, fx)
    } else {
        (best_x, best_f)
    }
}

/// Two-sided 95% normal quantile.
pub(crate) const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `n` at quantile `z`.
pub(crate) fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
