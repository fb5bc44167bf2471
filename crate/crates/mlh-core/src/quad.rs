//! Adaptive Simpson quadrature.
//!
//! Used by the comparison pipeline to integrate initial data against a
//! closed-form kernel, and by the test suite as the independent oracle
//! behind normalization, semigroup and moment checks. Integrands are
//! smooth between the medium's interface points, so callers split at the
//! breakpoints via [`integrate_with_breaks`].

/// Adaptive Simpson integration of `f` on `[lo, hi]` to absolute
/// tolerance `tol`. The interval is pre-split into uniform panels so
/// that narrowly concentrated mass cannot slip between the initial
/// sample points of the adaptive refinement.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> f64 {
    const PANELS: usize = 16;
    if lo == hi {
        return 0.0;
    }
    if lo > hi {
        return -integrate_adaptive(f, hi, lo, tol);
    }
    let width = (hi - lo) / PANELS as f64;
    let mut total = 0.0;
    for i in 0..PANELS {
        let a = lo + i as f64 * width;
        let b = if i == PANELS - 1 { hi } else { a + width };
        let mid = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(mid), f(b));
        let whole = simpson(a, b, fa, fm, fb);
        total += adaptive_step(f, a, b, fa, fm, fb, whole, tol / PANELS as f64, 48);
    }
    total
}

/// Integrate `f` on `[lo, hi]` splitting the interval at the given
/// breakpoints (kinks of the integrand).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    tol: f64,
) -> f64 {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut total = 0.0;
    let mut left = lo;
    let per_piece = tol / (cuts.len() as f64 + 1.0);
    for c in cuts {
        total += integrate_adaptive(f, left, c, per_piece);
        left = c;
    }
    total + integrate_adaptive(f, left, hi, per_piece)
}

fn simpson(lo: f64, hi: f64, flo: f64, fmid: f64, fhi: f64) -> f64 {
    (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let lmid = 0.5 * (lo + mid);
    let rmid = 0.5 * (mid + hi);
    let (flm, frm) = (f(lmid), f(rmid));
    let left = simpson(lo, mid, flo, flm, fmid);
    let right = simpson(mid, hi, fmid, frm, fhi);
    let delta = left + right - whole;
    // Converged, out of depth, or at the roundoff floor of the values
    // themselves (guards against tolerances below machine resolution).
    if depth == 0
        || delta.abs() <= 15.0 * tol
        || delta.abs() <= 4e-16 * (left.abs() + right.abs() + whole.abs())
    {
        // Richardson extrapolation of the composite Simpson pair.
        return left + right + delta / 15.0;
    }
    adaptive_step(f, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1)
        + adaptive_step(f, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let f = |x: f64| 3.0 * x * x;
        assert!((integrate_adaptive(&f, 0.0, 2.0, 1e-12) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_integral() {
        let f = |x: f64| (-x * x / 2.0).exp();
        let v = integrate_adaptive(&f, -40.0, 40.0, 1e-12);
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn kinked_integrand_with_breaks() {
        let f = |x: f64| x.abs();
        let v = integrate_with_breaks(&f, -1.0, 2.0, &[0.0], 1e-12);
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn orientation() {
        let f = |x: f64| x;
        assert!((integrate_adaptive(&f, 1.0, 0.0, 1e-12) + 0.5).abs() < 1e-13);
    }
}
