//! Quadrature, root finding, and scalar maximization shared by the modules.

use crate::error::{Error, Result};

/// Recursion depth cap for adaptive Simpson; at this depth an interval has
/// shrunk by 2^-54 and any unresolved feature contributes only rounding-level
/// error, so the Richardson estimate is accepted.
const MAX_DEPTH: u32 = 54;

/// Evaluation budget per integral; exceeding it means the integrand is
/// pathological rather than merely sharp.
const MAX_EVALS: u64 = 40_000_000;

/// Adaptive Simpson quadrature.
///
/// Each interval is split until the classic Richardson error estimate
/// `|S_left + S_right - S_whole| / 15` meets its share of `tol`, so panels
/// concentrate where the integrand has structure; isolated jumps and kinks
/// cost a single recursion path instead of global refinement. Known
/// discontinuity locations are still worth seeding via
/// [`integrate_with_breakpoints`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a < b) {
        return Err(Error::Parameter(format!(
            "integration bounds out of order: [{a}, {b}]"
        )));
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson_estimate(a, b, fa, fm, fb);
    let mut budget = MAX_EVALS;
    adaptive(&f, a, fa, m, fm, b, fb, whole, tol, MAX_DEPTH, &mut budget)
}

fn simpson_estimate(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut u64,
) -> Result<f64> {
    if *budget < 2 {
        return Err(Error::Numerics(format!(
            "quadrature exhausted its evaluation budget near [{a}, {b}]"
        )));
    }
    *budget -= 2;
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() || !frm.is_finite() || !whole.is_finite() {
        return Err(Error::Numerics(format!(
            "non-finite integrand value inside [{a}, {b}]"
        )));
    }
    let left = simpson_estimate(a, m, fa, flm, fm);
    let right = simpson_estimate(m, b, fm, frm, fb);
    let eps = left + right - whole;
    // The first few levels always split: symmetric integrands can fool the
    // Richardson estimate into agreeing before any structure is seen.
    let warmed_up = depth <= MAX_DEPTH - 3;
    if (eps.abs() <= 15.0 * tol && warmed_up) || depth == 0 {
        return Ok(left + right + eps / 15.0);
    }
    let half = 0.5 * tol;
    Ok(
        adaptive(f, a, fa, lm, flm, m, fm, left, half, depth - 1, budget)?
            + adaptive(f, m, fm, rm, frm, b, fb, right, half, depth - 1, budget)?,
    )
}

/// Integrate over `[a, b]` split at the given breakpoints.
///
/// Breakpoints outside `(a, b)` are discarded; each segment gets an equal
/// share of the tolerance budget.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let seg_tol = tol / (edges.len() - 1) as f64;
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += integrate(&f, w[0], w[1], seg_tol)?;
    }
    Ok(total)
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
///
/// Shrinks the bracket to width `tol` and returns `(x_max, f_max)`. Correct
/// for unimodal `f`; callers bracket the global maximum first (grid scan).
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Bisection for the root of a monotone function with `f(lo)` and `f(hi)` of
/// opposite sign (either order). Runs to fixed-point precision.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Precondition(format!(
            "bisection bracket [{lo}, {hi}] does not straddle a root ({flo}, {fhi})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket exhausted at f64 resolution
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}
