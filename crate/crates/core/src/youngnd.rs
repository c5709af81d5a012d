//! n-dimensional N-functions `Φ: ℝⁿ → [0, ∞)` with gradients and Young
//! conjugation.
//!
//! The structure tag records how `Φ` was assembled, which unlocks analytic
//! shortcuts: separable sums conjugate coordinate-wise, radial functions
//! conjugate through their 1-D profile, and square linear composites reduce
//! to a separable sum in transformed coordinates. Everything else falls back
//! to a concave maximization.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{log_grid, lower_convex_envelope};
use crate::young1d::{ProfileTable, YoungFunction1D};

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Structural form of an n-dimensional N-function.
#[derive(Clone)]
pub enum Structure {
    /// `Φ(ξ) = Σ A_i(ξ_i)`, one 1-D N-function per coordinate.
    SeparableSum(Vec<YoungFunction1D>),
    /// `Φ(ξ) = profile(|ξ|)`.
    Radial { dim: usize, profile: YoungFunction1D },
    /// `Φ(ξ) = Σ_k A_k(|Σ_i rows[k][i] ξ_i|)`.
    LinearComposite {
        dim: usize,
        rows: Vec<Vec<f64>>,
        parts: Vec<YoungFunction1D>,
        /// Inverse of the row matrix when it is square and invertible;
        /// enables the separable-coordinates shortcut.
        inverse_rows: Option<Vec<Vec<f64>>>,
    },
    /// Caller-supplied value and gradient maps.
    Custom { dim: usize, value: ValueFn, gradient: GradFn },
}

impl std::fmt::Debug for Structure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Structure::SeparableSum(parts) => f.debug_tuple("SeparableSum").field(&parts.len()).finish(),
            Structure::Radial { dim, .. } => f.debug_struct("Radial").field("dim", dim).finish(),
            Structure::LinearComposite { dim, rows, .. } => f
                .debug_struct("LinearComposite")
                .field("dim", dim)
                .field("rows", &rows.len())
                .finish(),
            Structure::Custom { dim, .. } => f.debug_struct("Custom").field("dim", dim).finish(),
        }
    }
}

/// An n-dimensional N-function with its gradient.
#[derive(Clone, Debug)]
pub struct NFunction {
    structure: Structure,
}

impl NFunction {
    pub fn separable_sum(parts: Vec<YoungFunction1D>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::invalid("separable sum needs dimension >= 2"));
        }
        Ok(Self { structure: Structure::SeparableSum(parts) })
    }

    pub fn radial(dim: usize, profile: YoungFunction1D) -> Result<Self> {
        if dim < 1 {
            return Err(Error::invalid("radial N-function needs dimension >= 1"));
        }
        Ok(Self { structure: Structure::Radial { dim, profile } })
    }

    pub fn linear_composite(rows: Vec<Vec<f64>>, parts: Vec<YoungFunction1D>) -> Result<Self> {
        if rows.is_empty() || rows.len() != parts.len() {
            return Err(Error::invalid("composite needs one coefficient row per part"));
        }
        let dim = rows[0].len();
        if dim < 2 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("coefficient rows must share a dimension >= 2"));
        }
        let inverse_rows = if rows.len() == dim { invert(&rows) } else { None };
        Ok(Self {
            structure: Structure::LinearComposite { dim, rows, parts, inverse_rows },
        })
    }

    pub fn custom(dim: usize, value: ValueFn, gradient: GradFn) -> Self {
        Self { structure: Structure::Custom { dim, value, gradient } }
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn dim(&self) -> usize {
        match &self.structure {
            Structure::SeparableSum(parts) => parts.len(),
            Structure::Radial { dim, .. } => *dim,
            Structure::LinearComposite { dim, .. } => *dim,
            Structure::Custom { dim, .. } => *dim,
        }
    }

    /// `Φ(ξ)`.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        assert_eq!(xi.len(), self.dim(), "dimension mismatch");
        debug_assert!(xi.iter().all(|v| v.is_finite()));
        match &self.structure {
            Structure::SeparableSum(parts) => {
                parts.iter().zip(xi).map(|(a, &x)| a.eval(x)).sum()
            }
            Structure::Radial { profile, .. } => profile.eval(norm(xi)),
            Structure::LinearComposite { rows, parts, .. } => rows
                .iter()
                .zip(parts)
                .map(|(row, a)| a.eval(dot(row, xi)))
                .sum(),
            Structure::Custom { value, .. } => value(xi),
        }
    }

    /// Gradient `Φ_ξ(ξ)`. At coordinate kinks of composite parts the two
    /// one-sided limits coincide because every registered density vanishes
    /// at 0, so the value returned is the symmetric choice.
    pub fn grad(&self, xi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.grad_into(xi, &mut out);
        out
    }

    pub fn grad_into(&self, xi: &[f64], out: &mut [f64]) {
        assert_eq!(xi.len(), self.dim(), "dimension mismatch");
        assert_eq!(out.len(), self.dim());
        match &self.structure {
            Structure::SeparableSum(parts) => {
                for ((o, a), &x) in out.iter_mut().zip(parts).zip(xi) {
                    *o = a.density(x);
                }
            }
            Structure::Radial { profile, .. } => {
                let r = norm(xi);
                if r == 0.0 {
                    out.fill(0.0);
                } else {
                    let d = profile.density(r) / r;
                    for (o, &x) in out.iter_mut().zip(xi) {
                        *o = d * x;
                    }
                }
            }
            Structure::LinearComposite { rows, parts, .. } => {
                out.fill(0.0);
                for (row, a) in rows.iter().zip(parts) {
                    let y = dot(row, xi);
                    let d = a.density(y);
                    if d != 0.0 {
                        for (o, &c) in out.iter_mut().zip(row) {
                            *o += d * c;
                        }
                    }
                }
            }
            Structure::Custom { gradient, .. } => {
                out.copy_from_slice(&gradient(xi));
            }
        }
    }

    /// Rescaled copy `ξ ↦ Φ(ξ / s)`.
    pub fn rescaled(&self, s: f64) -> NFunction {
        assert!(s > 0.0 && s.is_finite());
        let inner = self.clone();
        let inner_grad = self.clone();
        let dim = self.dim();
        NFunction::custom(
            dim,
            Arc::new(move |xi: &[f64]| {
                let scaled: Vec<f64> = xi.iter().map(|&x| x / s).collect();
                inner.eval(&scaled)
            }),
            Arc::new(move |xi: &[f64]| {
                let scaled: Vec<f64> = xi.iter().map(|&x| x / s).collect();
                inner_grad.grad(&scaled).into_iter().map(|g| g / s).collect()
            }),
        )
    }
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|&x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn invert(rows: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for k in 0..n {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for row in 0..n {
            if row != col {
                let f = a[row][col];
                for k in 0..n {
                    a[row][k] -= f * a[col][k];
                    inv[row][k] -= f * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}

/// Young conjugate evaluator with the analytic shortcuts resolved once and
/// a warm start retained between ascent queries. One handle per solver
/// instance; handles are not shared across concurrent solves.
pub struct ConjugateHandle {
    source: NFunction,
    route: ConjugateRoute,
    warm_start: Vec<f64>,
    /// Most recent (query, value, argmax) triple.
    last: Option<(Vec<f64>, f64, Vec<f64>)>,
}

enum ConjugateRoute {
    Separable(Vec<YoungFunction1D>),
    Radial(YoungFunction1D),
    /// `Φ = Ψ ∘ M` with `Ψ` separable: `Φ*(η) = Ψ*(M^{-T} η)`.
    Transformed {
        inverse: Vec<Vec<f64>>,
        conjugates: Vec<YoungFunction1D>,
    },
    Ascent,
}

impl ConjugateHandle {
    pub fn new(phi: &NFunction) -> Self {
        let route = match &phi.structure {
            Structure::SeparableSum(parts) => {
                ConjugateRoute::Separable(parts.iter().map(|a| a.conjugate()).collect())
            }
            Structure::Radial { profile, .. } => ConjugateRoute::Radial(profile.conjugate()),
            Structure::LinearComposite { parts, inverse_rows: Some(inv), .. } => {
                ConjugateRoute::Transformed {
                    inverse: inv.clone(),
                    conjugates: parts.iter().map(|a| a.conjugate()).collect(),
                }
            }
            _ => ConjugateRoute::Ascent,
        };
        Self {
            warm_start: vec![0.0; phi.dim()],
            source: phi.clone(),
            route,
            last: None,
        }
    }

    pub fn source(&self) -> &NFunction {
        &self.source
    }

    /// `Φ*(η)`.
    pub fn eval(&mut self, eta: &[f64]) -> Result<f64> {
        self.eval_with_argmax(eta).map(|(v, _)| v)
    }

    /// `Φ*(η)` together with a maximizer of `ξ·η − Φ(ξ)`.
    pub fn eval_with_argmax(&mut self, eta: &[f64]) -> Result<(f64, Vec<f64>)> {
        assert_eq!(eta.len(), self.source.dim(), "dimension mismatch");
        if let Some((q, v, arg)) = &self.last {
            if q == eta {
                return Ok((*v, arg.clone()));
            }
        }
        let (value, argmax) = match &self.route {
            ConjugateRoute::Separable(conjugates) => {
                let mut value = 0.0;
                let mut arg = vec![0.0; eta.len()];
                for (i, c) in conjugates.iter().enumerate() {
                    let (v, t) = conjugate_pair(c, eta[i]);
                    value += v;
                    arg[i] = t;
                }
                (value, arg)
            }
            ConjugateRoute::Radial(conj_profile) => {
                let r = norm(eta);
                let (v, t) = conjugate_pair(conj_profile, r);
                let arg = if r == 0.0 {
                    vec![0.0; eta.len()]
                } else {
                    eta.iter().map(|&e| t * e / r).collect()
                };
                (v, arg)
            }
            ConjugateRoute::Transformed { inverse, conjugates } => {
                let n = eta.len();
                // M^{-T} η: component k is column k of M^{-1} dotted with η
                let eta_t: Vec<f64> = (0..n)
                    .map(|k| (0..n).map(|i| inverse[i][k] * eta[i]).sum())
                    .collect();
                let mut value = 0.0;
                let mut y = vec![0.0; n];
                for (k, c) in conjugates.iter().enumerate() {
                    let (v, t) = conjugate_pair(c, eta_t[k]);
                    value += v;
                    y[k] = t;
                }
                // maximizer in the original coordinates: ξ = M^{-1} y
                let arg: Vec<f64> = (0..n)
                    .map(|i| (0..n).map(|k| inverse[i][k] * y[k]).sum())
                    .collect();
                (value, arg)
            }
            ConjugateRoute::Ascent => ascend(&self.source, eta, &self.warm_start)?,
        };
        self.warm_start = argmax.clone();
        self.last = Some((eta.to_vec(), value, argmax.clone()));
        Ok((value, argmax))
    }
}

fn conjugate_pair(conjugate: &YoungFunction1D, s: f64) -> (f64, f64) {
    // derivative of the conjugate at s is the maximizing t, signed like s
    (conjugate.eval(s), conjugate.density(s))
}

/// Gradient ascent with backtracking on `ξ ↦ ξ·η − Φ(ξ)` from the warm
/// start (origin on first use). The objective is concave and coercive;
/// termination is on the gradient residual `|η − Φ_ξ(ξ)|`.
fn ascend(phi: &NFunction, eta: &[f64], start: &[f64]) -> Result<(f64, Vec<f64>)> {
    const MAX_ITERS: usize = 10_000;
    let n = eta.len();
    let eta_norm = norm(eta);
    let tol = 1e-9 * (1.0 + eta_norm);
    let objective = |xi: &[f64]| dot(xi, eta) - phi.eval(xi);

    let mut xi = start.to_vec();
    if !objective(&xi).is_finite() {
        xi = vec![0.0; n];
    }
    let mut f = objective(&xi);
    let mut grad = vec![0.0; n];
    let mut step = 1.0 / (1.0 + eta_norm);
    for iter in 0..MAX_ITERS {
        phi.grad_into(&xi, &mut grad);
        for (g, &e) in grad.iter_mut().zip(eta) {
            *g = e - *g;
        }
        let gnorm = norm(&grad);
        if gnorm <= tol {
            return Ok((f, xi));
        }
        let mut accepted = false;
        let mut t = step;
        for _ in 0..60 {
            let trial: Vec<f64> = xi.iter().zip(&grad).map(|(&x, &g)| x + t * g).collect();
            let ft = objective(&trial);
            if ft.is_finite() && ft > f + 1e-4 * t * gnorm * gnorm {
                xi = trial;
                f = ft;
                step = t * 1.5;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            if iter > 0 {
                // flat to machine precision around the maximizer
                return Ok((f, xi));
            }
            return Err(Error::Convergence { what: "conjugate ascent", iterations: iter, best: f });
        }
    }
    Err(Error::Convergence { what: "conjugate ascent", iterations: MAX_ITERS, best: f })
}

/// `Φ(ξ) + Φ*(η) − ξ·η`, nonnegative up to round-off, zero exactly at
/// `η = Φ_ξ(ξ)`.
pub fn young_gap(handle: &mut ConjugateHandle, xi: &[f64], eta: &[f64]) -> Result<f64> {
    let v = handle.eval(eta)?;
    Ok(handle.source().eval(xi) + v - dot(xi, eta))
}

/// Checks `Φ*(Φ_ξ(ξ)) <= Φ_ξ(ξ)·ξ <= Φ(2ξ)` with `1e-9` absolute slack.
pub fn gradient_sandwich_check(handle: &mut ConjugateHandle, xi: &[f64]) -> Result<bool> {
    let g = handle.source().grad(xi);
    let middle = dot(&g, xi);
    let left = handle.eval(&g)?;
    let double: Vec<f64> = xi.iter().map(|&x| 2.0 * x).collect();
    let right = handle.source().eval(&double);
    Ok(left <= middle + 1e-9 && middle <= right + 1e-9)
}

/// Largest radial N-function below `Φ`: samples directions on the unit
/// sphere, takes the directional minimum of `Φ(r ω)` at log-spaced radii,
/// and returns the greatest nondecreasing convex minorant pinned at 0.
pub fn radial_minorant(
    phi: &NFunction,
    sphere_samples: usize,
    radial_knots: usize,
) -> Result<YoungFunction1D> {
    let n = phi.dim();
    if sphere_samples < 64 * n || radial_knots < 64 {
        return Err(Error::Precondition(format!(
            "radial minorant needs >= {} directions and >= 64 knots",
            64 * n
        )));
    }
    let dirs = unit_directions(n, sphere_samples);
    let radii = log_grid(1e-6, 1e6, radial_knots);
    let mut pts = Vec::with_capacity(radial_knots);
    let mut xi = vec![0.0; n];
    for &r in &radii {
        let mut m = f64::INFINITY;
        for dir in &dirs {
            for (x, &d) in xi.iter_mut().zip(dir) {
                *x = r * d;
            }
            m = m.min(phi.eval(&xi));
        }
        if m.is_finite() && m > 0.0 {
            pts.push((r, m));
        }
    }
    let mut with_origin = vec![(0.0, 0.0)];
    with_origin.extend(pts);
    let hull = lower_convex_envelope(&with_origin);
    let table: Vec<(f64, f64)> = hull.into_iter().filter(|&(x, _)| x > 0.0).collect();
    Ok(YoungFunction1D::from_profile(ProfileTable::new(&table)?))
}

/// Deterministic unit directions: evenly spaced angles in 2-D, a Fibonacci
/// sphere in 3-D, seeded Gaussian directions beyond.
pub fn unit_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    use rand::Rng as _;
    use rand::SeedableRng as _;
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = std::f64::consts::TAU * i as f64 / golden;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5EED_D19C);
            (0..count)
                .map(|_| loop {
                    let v: Vec<f64> = (0..n).map(|_| {
                        let u1: f64 = rng.gen_range(1e-12..1.0);
                        let u2: f64 = rng.gen_range(0.0..1.0);
                        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                    }).collect();
                    let r = norm(&v);
                    if r > 1e-6 {
                        return v.into_iter().map(|x| x / r).collect();
                    }
                })
                .collect()
        }
    }
}

/// Strictly convex N-function equivalent to `Φ`: adds `G(Φ₋(|ξ|))` where
/// `Φ₋` is the radial minorant and `G(t) = c (t − ln(1+t))` integrates
/// `g(s) = c s / (1+s)`, a strictly increasing density bounded by `c`.
/// The result satisfies `Φ(ξ) <= Ψ(ξ) <= Φ((1+c)ξ)` up to sampling slack.
pub fn strictly_convexify(phi: &NFunction, c: f64) -> Result<NFunction> {
    if !(c > 0.0) {
        return Err(Error::invalid("convexification constant must be positive"));
    }
    let n = phi.dim();
    let minorant = radial_minorant(phi, 64 * n, 96)?;
    let phi_v = phi.clone();
    let phi_g = phi.clone();
    let minorant_g = minorant.clone();
    let big_g = move |t: f64| c * (t - t.ln_1p());
    let small_g = move |s: f64| c * s / (1.0 + s);
    let value: ValueFn = Arc::new(move |xi: &[f64]| {
        let r = norm(xi);
        phi_v.eval(xi) + big_g(minorant.eval(r))
    });
    let gradient: GradFn = Arc::new(move |xi: &[f64]| {
        let r = norm(xi);
        let mut g = phi_g.grad(xi);
        if r > 0.0 {
            let chain = small_g(minorant_g.eval(r)) * minorant_g.density(r) / r;
            for (gi, &x) in g.iter_mut().zip(xi) {
                *gi += chain * x;
            }
        }
        g
    });
    Ok(NFunction::custom(n, value, gradient))
}

/// Sampled N-function invariants. Returns the list of violations.
pub fn check_invariants(phi: &NFunction, rng: &mut impl rand::Rng) -> Vec<String> {
    let n = phi.dim();
    let mut violations = Vec::new();
    if phi.eval(&vec![0.0; n]) != 0.0 {
        violations.push("Φ(0) != 0".to_string());
    }
    fn sample(rng: &mut dyn rand::RngCore, n: usize, scale: f64) -> Vec<f64> {
        (0..n).map(|_| scale * (uniform(rng) * 2.0 - 1.0)).collect()
    }
    for _ in 0..256 {
        let xi = sample(rng, n, 3.0);
        let neg: Vec<f64> = xi.iter().map(|&x| -x).collect();
        let (a, b) = (phi.eval(&xi), phi.eval(&neg));
        if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
            violations.push(format!("evenness failed at {xi:?}"));
            break;
        }
    }
    for _ in 0..256 {
        let xi = sample(rng, n, 3.0);
        let eta = sample(rng, n, 3.0);
        let mid: Vec<f64> = xi.iter().zip(&eta).map(|(&x, &y)| 0.5 * (x + y)).collect();
        if phi.eval(&mid) > 0.5 * (phi.eval(&xi) + phi.eval(&eta)) + 1e-9 {
            violations.push("midpoint convexity failed".to_string());
            break;
        }
    }
    // superlinear growth / sublinear decay along sampled rays
    for _ in 0..16 {
        let v = sample(rng, n, 1.0);
        let r = norm(&v);
        if r < 1e-9 {
            continue;
        }
        let dir: Vec<f64> = v.into_iter().map(|x| x / r).collect();
        let ratio = |s: f64| {
            let xi: Vec<f64> = dir.iter().map(|&d| s * d).collect();
            phi.eval(&xi) / s
        };
        let big: Vec<f64> = (1..=4).map(|k| ratio(10f64.powi(2 * k))).collect();
        if !big.windows(2).all(|w| w[1] > w[0] || !w[1].is_finite()) {
            violations.push("Φ(ξ)/|ξ| not increasing at large |ξ|".to_string());
            break;
        }
        let small: Vec<f64> = (1..=4).map(|k| ratio(10f64.powi(-2 * k))).collect();
        if !small.windows(2).all(|w| w[1] < w[0] + 1e-300) {
            violations.push("Φ(ξ)/|ξ| not decreasing at small |ξ|".to_string());
            break;
        }
    }
    // gradient consistency with central differences
    let mut bad_grad = 0usize;
    for _ in 0..1000 {
        let xi = sample(rng, n, 2.0);
        let g = phi.grad(&xi);
        let h = 1e-5;
        for d in 0..n {
            let mut plus = xi.clone();
            let mut minus = xi.clone();
            plus[d] += h;
            minus[d] -= h;
            let fd = (phi.eval(&plus) - phi.eval(&minus)) / (2.0 * h);
            if (fd - g[d]).abs() > 1e-4 * g[d].abs().max(1.0) {
                bad_grad += 1;
                break;
            }
        }
    }
    if bad_grad > 10 {
        violations.push(format!(
            "gradient disagrees with central differences at {bad_grad}/1000 points"
        ));
    }
    // scaling inequality Φ(hξ) <= |h| Φ(ξ) for |h| <= 1
    for _ in 0..512 {
        let xi = sample(rng, n, 3.0);
        let h = uniform(rng);
        let scaled: Vec<f64> = xi.iter().map(|&x| h * x).collect();
        if phi.eval(&scaled) > h * phi.eval(&xi) + 1e-12 {
            violations.push("Φ(hξ) <= hΦ(ξ) failed".to_string());
            break;
        }
    }
    violations
}

fn uniform(rng: &mut dyn rand::RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn half_norm_sq(dim: usize) -> NFunction {
        NFunction::radial(dim, YoungFunction1D::power(2.0).unwrap()).unwrap()
    }

    fn example_composite(p: f64, q: f64, alpha: f64, c: f64) -> NFunction {
        // |x1 - x2|^p + |x1|^q ln^alpha(c + |x1|)
        NFunction::linear_composite(
            vec![vec![1.0, -1.0], vec![1.0, 0.0]],
            vec![
                YoungFunction1D::power_scaled(p, p).unwrap(),
                YoungFunction1D::from_density(crate::young1d::Density1D::PowerLog {
                    p: q,
                    alpha,
                    c,
                    scale: q,
                })
                .unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn eval_separable_quadratic() {
        let phi = NFunction::separable_sum(vec![
            YoungFunction1D::power(2.0).unwrap(),
            YoungFunction1D::power(2.0).unwrap(),
        ])
        .unwrap();
        assert_relative_eq!(phi.eval(&[3.0, 4.0]), 12.5);
        assert_eq!(phi.eval(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn eval_composite_hand_value() {
        let phi = example_composite(2.0, 2.0, 1.0, std::f64::consts::E);
        let expected = (std::f64::consts::E + 1.0).ln();
        assert_relative_eq!(phi.eval(&[1.0, 1.0]), expected, max_relative = 1e-12);
    }

    #[test]
    fn gradient_closed_forms() {
        let phi = half_norm_sq(2);
        let g = phi.grad(&[1.0, 2.0]);
        assert_relative_eq!(g[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(g[1], 2.0, max_relative = 1e-12);

        let quartic = NFunction::separable_sum(vec![
            YoungFunction1D::power(4.0).unwrap(),
            YoungFunction1D::power(4.0).unwrap(),
        ])
        .unwrap();
        let g = quartic.grad(&[2.0, 0.0]);
        assert_relative_eq!(g[0], 8.0, max_relative = 1e-12);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let phi = NFunction::separable_sum(vec![
            YoungFunction1D::exp_power(2.0).unwrap(),
            YoungFunction1D::exp_power(1.5).unwrap(),
        ])
        .unwrap();
        let xi = [1.0, 1.0];
        let g = phi.grad(&xi);
        let h = 1e-5;
        for d in 0..2 {
            let mut plus = xi;
            let mut minus = xi;
            plus[d] += h;
            minus[d] -= h;
            let fd = (phi.eval(&plus) - phi.eval(&minus)) / (2.0 * h);
            assert_relative_eq!(g[d], fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn conjugate_quadratic_identity() {
        let phi = half_norm_sq(2);
        let mut handle = ConjugateHandle::new(&phi);
        assert_relative_eq!(handle.eval(&[1.0, 1.0]).unwrap(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn conjugate_separable_power() {
        let phi = NFunction::separable_sum(vec![
            YoungFunction1D::power(3.0).unwrap(),
            YoungFunction1D::power(3.0).unwrap(),
        ])
        .unwrap();
        let mut handle = ConjugateHandle::new(&phi);
        let expected = 2f64.powf(1.5) / 1.5;
        assert_relative_eq!(handle.eval(&[2.0, 0.0]).unwrap(), expected, max_relative = 1e-10);
    }

    #[test]
    fn conjugate_ascent_matches_analytic_on_custom() {
        // a custom wrapper around 0.5 |ξ|^2 forces the ascent route
        let value: ValueFn = Arc::new(|xi: &[f64]| 0.5 * xi.iter().map(|&x| x * x).sum::<f64>());
        let gradient: GradFn = Arc::new(|xi: &[f64]| xi.to_vec());
        let phi = NFunction::custom(2, value, gradient);
        let mut handle = ConjugateHandle::new(&phi);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let eta = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let expected = 0.5 * (eta[0] * eta[0] + eta[1] * eta[1]);
            let got = handle.eval(&eta).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-7, epsilon = 1e-9);
        }
    }

    #[test]
    fn conjugate_transformed_route_matches_grid_search() {
        let phi = example_composite(2.0, 2.0, 1.0, std::f64::consts::E);
        let mut handle = ConjugateHandle::new(&phi);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..3 {
            let eta = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let numeric = handle.eval(&eta).unwrap();
            // dense-grid oracle on [-20, 20]^2
            let m = 2001usize;
            let mut best = f64::NEG_INFINITY;
            for i in 0..m {
                let x = -20.0 + 40.0 * i as f64 / (m - 1) as f64;
                for j in 0..m {
                    let y = -20.0 + 40.0 * j as f64 / (m - 1) as f64;
                    let v = x * eta[0] + y * eta[1] - phi.eval(&[x, y]);
                    if v > best {
                        best = v;
                    }
                }
            }
            assert!(
                (numeric - best).abs() <= 1e-3 * (1.0 + best.abs()),
                "conjugate {numeric} vs grid {best} at {eta:?}"
            );
        }
    }

    #[test]
    fn young_gap_nonnegative_zero_at_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phis = vec![
            half_norm_sq(2),
            NFunction::separable_sum(vec![
                YoungFunction1D::power(2.5).unwrap(),
                YoungFunction1D::power_log(2.0, 1.0, 10.0).unwrap(),
            ])
            .unwrap(),
            example_composite(2.0, 2.0, 1.0, 10.0),
        ];
        for phi in &phis {
            let mut handle = ConjugateHandle::new(phi);
            for _ in 0..300 {
                let xi = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
                let eta = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
                let gap = young_gap(&mut handle, &xi, &eta).unwrap();
                assert!(gap >= -1e-10, "negative gap {gap}");
                let g = phi.grad(&xi);
                let gap0 = young_gap(&mut handle, &xi, &g).unwrap();
                assert!(
                    gap0 <= 1e-8 * (1.0 + phi.eval(&xi)),
                    "gap at gradient too large: {gap0}"
                );
            }
        }
    }

    #[test]
    fn young_gap_trivial_cases() {
        let phi = half_norm_sq(2);
        let mut handle = ConjugateHandle::new(&phi);
        let g0 = young_gap(&mut handle, &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!(g0.abs() <= 1e-12);
        assert_relative_eq!(
            young_gap(&mut handle, &[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sandwich_holds_across_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let phis = vec![
            half_norm_sq(2),
            NFunction::separable_sum(vec![
                YoungFunction1D::power(1.6).unwrap(),
                YoungFunction1D::exp_power(2.0).unwrap(),
            ])
            .unwrap(),
            example_composite(2.0, 1.5, 1.0, 10.0),
        ];
        for phi in &phis {
            let mut handle = ConjugateHandle::new(phi);
            assert!(gradient_sandwich_check(&mut handle, &[0.0, 0.0]).unwrap());
            for _ in 0..200 {
                let xi = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
                assert!(
                    gradient_sandwich_check(&mut handle, &xi).unwrap(),
                    "sandwich failed at {xi:?}"
                );
            }
        }
        let phi = half_norm_sq(2);
        let mut handle = ConjugateHandle::new(&phi);
        assert!(gradient_sandwich_check(&mut handle, &[1.0, 1.0]).unwrap());
    }

    #[test]
    fn radial_minorant_of_radial_is_profile() {
        let phi = NFunction::radial(2, YoungFunction1D::power_scaled(2.0, 2.0).unwrap()).unwrap();
        let m = radial_minorant(&phi, 128, 96).unwrap();
        for r in [0.01, 0.5, 2.0, 100.0] {
            assert_relative_eq!(m.eval(r), r * r, max_relative = 2e-3);
        }
    }

    #[test]
    fn radial_minorant_separable_matches_direction_sweep() {
        // |x|^2 + |y|^4: minorant sits below the directional minimum
        let phi = NFunction::separable_sum(vec![
            YoungFunction1D::power_scaled(2.0, 2.0).unwrap(),
            YoungFunction1D::power_scaled(4.0, 4.0).unwrap(),
        ])
        .unwrap();
        let m = radial_minorant(&phi, 256, 128).unwrap();
        let dirs = unit_directions(2, 10_000);
        for r in [0.05, 1.0, 20.0] {
            let mut direct = f64::INFINITY;
            for d in &dirs {
                direct = direct.min(phi.eval(&[r * d[0], r * d[1]]));
            }
            let got = m.eval(r);
            assert!(
                got <= direct * (1.0 + 1e-3) + 1e-12,
                "minorant above direct minimum at r = {r}: {got} > {direct}"
            );
            assert!(
                got >= 0.2 * direct,
                "minorant far below direct minimum at r = {r}: {got} vs {direct}"
            );
        }
        // rotation-invariant value for equal quadratic parts
        let iso = NFunction::separable_sum(vec![
            YoungFunction1D::power_scaled(2.0, 2.0).unwrap(),
            YoungFunction1D::power_scaled(2.0, 2.0).unwrap(),
        ])
        .unwrap();
        let m = radial_minorant(&iso, 256, 96).unwrap();
        for r in [0.1, 1.0, 10.0] {
            assert_relative_eq!(m.eval(r), r * r, max_relative = 2e-3);
        }
    }

    #[test]
    fn convexified_satisfies_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = 1.0;
        let phis = vec![
            NFunction::radial(2, YoungFunction1D::power(4.0).unwrap()).unwrap(),
            NFunction::separable_sum(vec![
                YoungFunction1D::power(2.0).unwrap(),
                YoungFunction1D::power(3.0).unwrap(),
            ])
            .unwrap(),
        ];
        for phi in &phis {
            let psi = strictly_convexify(phi, c).unwrap();
            assert_eq!(psi.eval(&[0.0, 0.0]), 0.0);
            for _ in 0..1000 {
                let xi = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
                let stretched: Vec<f64> = xi.iter().map(|&x| (1.0 + c) * x).collect();
                let lo = phi.eval(&xi);
                let hi = phi.eval(&stretched);
                let v = psi.eval(&xi);
                assert!(v >= lo - 1e-9, "Ψ below Φ at {xi:?}");
                assert!(v <= hi * (1.0 + 1e-6) + 1e-9, "Ψ above Φ((1+c)ξ) at {xi:?}");
            }
        }
        // radial quartic spot check against the sandwich endpoints
        let phi = NFunction::radial(2, YoungFunction1D::power_scaled(4.0, 4.0).unwrap()).unwrap();
        let psi = strictly_convexify(&phi, 1.0).unwrap();
        let v = psi.eval(&[1.0, 0.0]);
        assert!((4.0 * 0.25..=4.0 * 4.0).contains(&v), "sandwich endpoints violated: {v}");
    }

    #[test]
    fn invariants_hold_for_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let phis = vec![
            half_norm_sq(2),
            NFunction::separable_sum(vec![
                YoungFunction1D::power(1.8).unwrap(),
                YoungFunction1D::power_log(2.0, 1.0, 10.0).unwrap(),
            ])
            .unwrap(),
            example_composite(2.0, 2.0, 1.0, 10.0),
        ];
        for phi in &phis {
            let violations = check_invariants(phi, &mut rng);
            assert!(violations.is_empty(), "{violations:?}");
        }
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn eval_rejects_dimension_mismatch() {
        half_norm_sq(2).eval(&[1.0]);
    }

    #[test]
    fn separable_conjugate_consistency_with_ascent() {
        // the numeric ascent on a custom copy must agree with the
        // coordinate-wise analytic route
        let parts = vec![
            YoungFunction1D::power(2.5).unwrap(),
            YoungFunction1D::power_log(2.0, 1.0, 10.0).unwrap(),
        ];
        let phi = NFunction::separable_sum(parts).unwrap();
        let phi_c = phi.clone();
        let phi_g = phi.clone();
        let custom = NFunction::custom(
            2,
            Arc::new(move |xi: &[f64]| phi_c.eval(xi)),
            Arc::new(move |xi: &[f64]| phi_g.grad(xi)),
        );
        let mut fast = ConjugateHandle::new(&phi);
        let mut slow = ConjugateHandle::new(&custom);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let eta = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let a = fast.eval(&eta).unwrap();
            let b = slow.eval(&eta).unwrap();
            assert!(
                (a - b).abs() <= 1e-6 * (1.0 + a.abs()),
                "separable {a} vs ascent {b} at {eta:?}"
            );
        }
    }
}
