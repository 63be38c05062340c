//! Adaptive Simpson quadrature on a finite interval.
//!
//! Used for the kernel norms that have no closed form and as an independent
//! numerical route in tests. The interval is first cut into uniform panels so
//! that narrow features (small-bandwidth kernels inside a wide window) cannot
//! hide between the initial sample points, then each panel is refined
//! adaptively.

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    /// Estimated integral value.
    pub value: f64,
    /// Estimated absolute error.
    pub abs_error: f64,
    /// Whether the requested tolerance was met everywhere.
    pub converged: bool,
}

const INITIAL_PANELS: usize = 32;
const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    assert!(b >= a, "inverted interval [{a}, {b}]");
    let panel = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut value = 0.0;
    let mut abs_error = 0.0;
    let mut converged = true;
    for i in 0..INITIAL_PANELS {
        let lo = a + i as f64 * panel;
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + panel };
        let flo = f(lo);
        let fhi = f(hi);
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let whole = simpson(lo, hi, flo, fmid, fhi);
        let (v, e, ok) = adapt(&f, lo, hi, flo, fmid, fhi, whole, panel_tol, MAX_DEPTH);
        value += v;
        abs_error += e;
        converged &= ok;
    }
    Quadrature { value, abs_error, converged }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64, bool) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0, true);
    }
    if depth == 0 {
        return (left + right + delta / 15.0, delta.abs() / 15.0, false);
    }
    let (lv, le, lok) = adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1);
    let (rv, re, rok) = adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
    (lv + rv, le + re, lok && rok)
}
