//! Small numerical building blocks: monotone root finding, adaptive
//! quadrature, least-squares fits, convex envelopes, log-spaced grids.

use crate::error::{Error, Result};

/// Geometrically spaced grid with `count` points from `lo` to `hi` inclusive.
/// Requires `0 < lo < hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2, "bad log grid bounds");
    let (la, lb) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            let f = i as f64 / (count - 1) as f64;
            (la + f * (lb - la)).exp()
        })
        .collect()
}

/// Leftmost solution of `f(t) >= y` for a nondecreasing `f` on `[0, inf)`.
///
/// Grows the bracket geometrically, then bisects. Returns 0 when `f(0) >= y`.
/// The result approximates `inf { t >= 0 : f(t) >= y }` to relative width
/// `rel_tol`.
pub fn monotone_inverse(f: impl Fn(f64) -> f64, y: f64, rel_tol: f64) -> f64 {
    if f(0.0) >= y {
        return 0.0;
    }
    let mut hi = 1.0_f64;
    let mut lo = 0.0_f64;
    let mut grow = 0;
    while f(hi) < y {
        lo = hi;
        hi *= 4.0;
        grow += 1;
        if grow > 600 {
            return f64::INFINITY;
        }
    }
    // f(lo) < y <= f(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= y {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= rel_tol * hi.max(1e-300) {
            break;
        }
    }
    hi
}

/// Safeguarded secant/bisection root find for `f(x) = 0` on a bracket with
/// a sign change. Panics if the bracket does not straddle a root.
pub fn secant_bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    assert!(
        fa == 0.0 || fb == 0.0 || (fa < 0.0) != (fb < 0.0),
        "secant_bisect: no sign change on [{a}, {b}]"
    );
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        // Secant proposal, clipped into the bracket interior; fall back to
        // the midpoint when it degenerates.
        let mut x = if fb != fa {
            b - fb * (b - a) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        let width = b - a;
        if !(x > a + 1e-3 * width && x < b - 1e-3 * width) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 || width.abs() <= tol * x.abs().max(1.0) {
            return x;
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    0.5 * (a + b)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` with relative tolerance
/// `rel_tol`. The integrand must be finite on the closed interval.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let scale = whole.abs().max(1e-300);
    simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * scale, 28)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    abs_tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * abs_tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * abs_tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * abs_tol, depth - 1)
}

/// Ordinary least squares fit `y = intercept + slope * x`.
/// Returns `(slope, intercept, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert!(xs.len() == ys.len() && xs.len() >= 2, "linear_fit needs >= 2 points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Least squares fit with two regressors, `y = c0 + c1 * x1 + c2 * x2`,
/// solved through the 3x3 normal equations. Returns `(c1, c2, r_squared)`.
pub fn bilinear_fit(x1: &[f64], x2: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = ys.len();
    assert!(x1.len() == n && x2.len() == n && n >= 3);
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for i in 0..n {
        let row = [1.0, x1[i], x2[i]];
        for j in 0..3 {
            for k in 0..3 {
                a[j][k] += row[j] * row[k];
            }
            rhs[j] += row[j] * ys[i];
        }
    }
    let c = solve3(a, rhs);
    let my = ys.iter().sum::<f64>() / n as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..n {
        let pred = c[0] + c[1] * x1[i] + c[2] * x2[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - my) * (ys[i] - my);
    }
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (c[1], c[2], r2)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    // Gaussian elimination with partial pivoting.
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        assert!(a[col][col] != 0.0, "singular normal equations");
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in (row + 1)..3 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Lower convex envelope of a point set (Andrew's monotone chain, lower
/// hull). Input must be sorted by strictly increasing x; output is the
/// subset of points on the envelope, still sorted.
pub fn lower_convex_envelope(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Keep b only if it lies strictly below the chord a-p.
            let cross = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Growth/decay certificate data: a sampled grid and the sampled values.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SampledTrace {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Richardson-style observed order from three values at a refinement
/// factor of 2: `log2(|v0 - v1| / |v1 - v2|)`.
pub fn observed_order(v0: f64, v1: f64, v2: f64) -> Option<f64> {
    let d0 = (v0 - v1).abs();
    let d1 = (v1 - v2).abs();
    if d0 > 0.0 && d1 > 0.0 {
        Some((d0 / d1).log2())
    } else {
        None
    }
}

/// Bracketed bisection for `f(x) = target` with `f` nondecreasing on
/// `[lo, hi]`; expands the bracket by doubling up to `max_expansions`
/// times when the target is not straddled.
pub fn expand_and_bisect(
    f: impl Fn(f64) -> f64,
    center: f64,
    half_width: f64,
    target: f64,
    max_expansions: usize,
    what: &'static str,
) -> Result<f64> {
    let mut w = half_width.max(1e-300);
    for _ in 0..=max_expansions {
        let (a, b) = (center - w, center + w);
        let (fa, fb) = (f(a) - target, f(b) - target);
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if (fa < 0.0) != (fb < 0.0) {
            return Ok(secant_bisect(|x| f(x) - target, a, b, 1e-14));
        }
        w *= 2.0;
    }
    Err(Error::BracketFailure {
        what,
        expansions: max_expansions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_inverse_quadratic() {
        let inv = monotone_inverse(|t| t * t, 9.0, 1e-14);
        assert!((inv - 3.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_matches_polynomial() {
        let v = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-10);
    }

    #[test]
    fn simpson_integrable_singularity() {
        // integral of x^(-1/2) on (0,1] = 2. Raw Simpson loses accuracy at
        // the endpoint singularity; callers substitute x = e^u there.
        let v = adaptive_simpson(&|x: f64| x.sqrt().recip(), 1e-12, 1.0, 1e-9);
        assert!((v - 2.0).abs() < 1e-3, "got {v}");
        let sub = adaptive_simpson(&|u: f64| (0.5 * u).exp(), (1e-12f64).ln(), 0.0, 1e-9);
        let truncated = 2.0 * (1.0 - 1e-6);
        assert!((sub - truncated).abs() < 1e-9, "substituted form got {sub}");
    }

    #[test]
    fn fit_recovers_slope() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let (m, b, r2) = linear_fit(&xs, &ys);
        assert!((m + 2.0).abs() < 1e-12 && (b - 3.0).abs() < 1e-12 && r2 > 0.999999);
    }

    #[test]
    fn envelope_drops_interior_bumps() {
        let pts = vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.5), (3.0, 9.0)];
        let env = lower_convex_envelope(&pts);
        // (1.0, 2.0) lies above the chord from (0,0) to (2,2.5)
        assert_eq!(env.len(), 3);
        assert_eq!(env[1], (2.0, 2.5));
    }
}
