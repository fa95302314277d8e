//! One-dimensional adaptive Simpson quadrature.

/// Integrate `f` over `[a, b]`, first splitting into `panels` equal pieces so
/// that kinks of a piecewise-smooth integrand are bracketed early.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize, tol: f64) -> f64 {
    let w = (b - a) / panels as f64;
    let ptol = tol / panels as f64;
    (0..panels)
        .map(|k| {
            let (x0, x1) = (a + k as f64 * w, a + (k + 1) as f64 * w);
            let xm = 0.5 * (x0 + x1);
            let (f0, fm, f1) = (f(x0), f(xm), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson(f, x0, x1, f0, fm, f1, whole, ptol, 40)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_kink() {
        let v = integrate(&|x: f64| x * x, 0.0, 3.0, 1, 1e-12);
        assert!((v - 9.0).abs() < 1e-12);
        let v = integrate(&|x: f64| (x - 0.3).abs(), 0.0, 1.0, 4, 1e-10);
        assert!((v - (0.045 + 0.245)).abs() < 1e-9);
    }
}
