//! One-dimensional N-functions `B(t) = integral of b over [0, |t|]` with
//! increasing density `b`, their generalized inverses and Young conjugates,
//! plus sampled growth certificates (doubling condition, "grows essentially
//! slower" ordering).
//!
//! Conventions: functions are even and evaluated at `|t|`; densities are
//! reported with odd symmetry (`density(-t) = -density(t)`). Generalized
//! inverses are left-continuous: `inverse(y) = inf { t >= 0 : B(t) >= y }`.

use crate::error::{Error, Result};
use crate::numerics::{log_grid, lower_convex_envelope, monotone_inverse, SampledTrace};

/// Parametric density families plus tabulated data.
///
/// Each analytic kind fixes both the density `b` and its antiderivative in
/// closed form:
///
/// * `Power`:    `b(t) = scale * t^(p-1)`,            `B(t) = scale * |t|^p / p`
/// * `PowerLog`: `B(t) = (scale/p) |t|^p ln^alpha(c + |t|)`, `b = B'`
/// * `ExpPow`:   `b(t) = scale * alpha t^(alpha-1) e^(t^alpha)`, `B(t) = scale (e^(|t|^alpha) - 1)`
/// * `ExpLin`:   `b(t) = scale * (e^t - 1)`,          `B(t) = scale (e^|t| - |t| - 1)`
/// * `Tabulated`: piecewise-linear density through `(tau_i, b_i)` breakpoints,
///   continued linearly from the origin below the first breakpoint and with
///   the last segment slope above the final one.
#[derive(Clone, Debug)]
pub enum Density1D {
    Power { p: f64, scale: f64 },
    PowerLog { p: f64, alpha: f64, c: f64, scale: f64 },
    ExpPow { alpha: f64, scale: f64 },
    ExpLin { scale: f64 },
    Tabulated(TabulatedDensity),
}

#[derive(Clone, Debug)]
pub struct TabulatedDensity {
    taus: Vec<f64>,
    values: Vec<f64>,
    /// Prefix integrals of the density up to each breakpoint.
    prefix: Vec<f64>,
}

impl TabulatedDensity {
    /// Builds a tabulated density from `(tau, b(tau))` breakpoints with
    /// strictly increasing `tau > 0` and nondecreasing `b >= 0`. The density
    /// is extended linearly from `(0, 0)` to the first breakpoint.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("tabulated density needs at least 2 breakpoints"));
        }
        let mut taus = Vec::with_capacity(points.len());
        let mut values = Vec::with_capacity(points.len());
        for &(t, b) in points {
            if !t.is_finite() || !b.is_finite() || t <= 0.0 || b < 0.0 {
                return Err(Error::invalid(format!("bad breakpoint ({t}, {b})")));
            }
            if let Some(&last) = taus.last() {
                if t <= last {
                    return Err(Error::invalid("breakpoint abscissae must be strictly increasing"));
                }
            }
            if let Some(&last) = values.last() {
                if b < last {
                    return Err(Error::invalid("tabulated density must be nondecreasing"));
                }
            }
            taus.push(t);
            values.push(b);
        }
        // Trapezoid prefix integrals are exact for a piecewise-linear density.
        let mut prefix = Vec::with_capacity(taus.len());
        let mut acc = 0.5 * taus[0] * values[0];
        prefix.push(acc);
        for i in 1..taus.len() {
            acc += 0.5 * (values[i] + values[i - 1]) * (taus[i] - taus[i - 1]);
            prefix.push(acc);
        }
        Ok(Self { taus, values, prefix })
    }

    fn density(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        if t <= self.taus[0] {
            return self.values[0] * t / self.taus[0];
        }
        let n = self.taus.len();
        if t >= self.taus[n - 1] {
            let slope = if n >= 2 {
                (self.values[n - 1] - self.values[n - 2]) / (self.taus[n - 1] - self.taus[n - 2])
            } else {
                0.0
            };
            return self.values[n - 1] + slope * (t - self.taus[n - 1]);
        }
        let i = self.taus.partition_point(|&x| x < t);
        let (t0, t1) = (self.taus[i - 1], self.taus[i]);
        let (b0, b1) = (self.values[i - 1], self.values[i]);
        b0 + (b1 - b0) * (t - t0) / (t1 - t0)
    }

    fn integral(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        if t <= self.taus[0] {
            return 0.5 * self.density(t) * t;
        }
        let n = self.taus.len();
        if t >= self.taus[n - 1] {
            let bt = self.density(t);
            return self.prefix[n - 1] + 0.5 * (bt + self.values[n - 1]) * (t - self.taus[n - 1]);
        }
        let i = self.taus.partition_point(|&x| x < t);
        let bt = self.density(t);
        self.prefix[i - 1] + 0.5 * (bt + self.values[i - 1]) * (t - self.taus[i - 1])
    }
}

impl Density1D {
    /// Density value at `t >= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0 && t.is_finite());
        match *self {
            Density1D::Power { p, scale } => scale * t.powf(p - 1.0),
            Density1D::PowerLog { p, alpha, c, scale } => {
                if t == 0.0 {
                    return 0.0;
                }
                let l = (c + t).ln();
                scale * t.powf(p - 1.0) * l.powf(alpha - 1.0) * (l + alpha * t / (p * (c + t)))
            }
            Density1D::ExpPow { alpha, scale } => {
                if t == 0.0 {
                    0.0
                } else {
                    scale * alpha * t.powf(alpha - 1.0) * t.powf(alpha).exp()
                }
            }
            Density1D::ExpLin { scale } => scale * t.exp_m1(),
            Density1D::Tabulated(ref tab) => tab.density(t),
        }
    }

    fn antiderivative(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match *self {
            Density1D::Power { p, scale } => scale * t.powf(p) / p,
            Density1D::PowerLog { p, alpha, c, scale } => {
                if t == 0.0 {
                    0.0
                } else {
                    scale / p * t.powf(p) * (c + t).ln().powf(alpha)
                }
            }
            Density1D::ExpPow { alpha, scale } => scale * t.powf(alpha).exp_m1(),
            Density1D::ExpLin { scale } => scale * (t.exp() - t - 1.0),
            Density1D::Tabulated(ref tab) => tab.integral(t),
        }
    }

    fn ln_antiderivative(&self, t: f64) -> f64 {
        match *self {
            Density1D::Power { p, scale } => (scale / p).ln() + p * t.ln(),
            Density1D::PowerLog { p, alpha, c, scale } => {
                (scale / p).ln() + p * t.ln() + alpha * (c + t).ln().ln()
            }
            Density1D::ExpPow { alpha, scale } => {
                let e = t.powf(alpha);
                // ln(scale (e^e - 1)) without overflow for large e
                if e > 40.0 {
                    scale.ln() + e
                } else {
                    (scale * e.exp_m1()).ln()
                }
            }
            Density1D::ExpLin { scale } => {
                if t > 40.0 {
                    scale.ln() + t
                } else {
                    (scale * (t.exp() - t - 1.0)).ln()
                }
            }
            Density1D::Tabulated(_) => self.antiderivative(t).ln(),
        }
    }

    fn check_params(&self) -> Result<()> {
        let ok = match *self {
            Density1D::Power { p, scale } => p > 0.0 && p.is_finite() && scale > 0.0 && scale.is_finite(),
            Density1D::PowerLog { p, alpha, c, scale } => {
                p > 0.0 && c > 1.0 && scale > 0.0 && alpha.is_finite() && p.is_finite() && c.is_finite()
            }
            Density1D::ExpPow { alpha, scale } => alpha > 1.0 && alpha.is_finite() && scale > 0.0,
            Density1D::ExpLin { scale } => scale > 0.0 && scale.is_finite(),
            Density1D::Tabulated(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("density parameters out of range: {self:?}")))
        }
    }
}

/// Value table in log-log coordinates with power-law continuation outside
/// the tabulated range. Used for profiles built from sampled data. A
/// `blow_up` bound marks functions that are `+inf` beyond it.
#[derive(Clone, Debug)]
pub struct ProfileTable {
    ln_x: Vec<f64>,
    ln_y: Vec<f64>,
    blow_up: Option<f64>,
}

impl ProfileTable {
    /// Builds a table from `(x, y)` samples with positive coordinates.
    /// Samples are sorted, made nondecreasing, and convexified by a lower
    /// convex envelope in linear coordinates.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        Self::with_blow_up(points, None)
    }

    pub fn with_blow_up(points: &[(f64, f64)], blow_up: Option<f64>) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = points
            .iter()
            .copied()
            .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-14 * b.0);
        if pts.len() < 2 {
            return Err(Error::invalid("profile table needs at least 2 positive samples"));
        }
        // Monotone repair then convex envelope (pinned at the origin).
        let mut running = 0.0f64;
        for p in pts.iter_mut() {
            running = running.max(p.1);
            p.1 = running;
        }
        let mut with_origin = Vec::with_capacity(pts.len() + 1);
        with_origin.push((0.0, 0.0));
        with_origin.extend(pts.iter().copied());
        let hull = lower_convex_envelope(&with_origin);
        let mut ln_x = Vec::new();
        let mut ln_y = Vec::new();
        for &(x, y) in hull.iter().skip_while(|&&(x, _)| x == 0.0) {
            if y > 0.0 {
                ln_x.push(x.ln());
                ln_y.push(y.ln());
            }
        }
        if ln_x.len() < 2 {
            return Err(Error::invalid("profile table degenerate after convexification"));
        }
        Ok(Self { ln_x, ln_y, blow_up })
    }

    pub fn ln_eval(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        if let Some(b) = self.blow_up {
            if x > b {
                return f64::INFINITY;
            }
        }
        let lx = x.ln();
        let n = self.ln_x.len();
        let i = if lx <= self.ln_x[0] {
            0
        } else if lx >= self.ln_x[n - 1] {
            n - 2
        } else {
            self.ln_x.partition_point(|&v| v < lx).max(1) - 1
        };
        let (x0, x1) = (self.ln_x[i], self.ln_x[i + 1]);
        let (y0, y1) = (self.ln_y[i], self.ln_y[i + 1]);
        y0 + (y1 - y0) * (lx - x0) / (x1 - x0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            self.ln_eval(x).exp()
        }
    }

    /// Derivative from the local log-log slope: `y'(x) = m y / x`.
    pub fn derivative(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        if let Some(b) = self.blow_up {
            if x > b {
                return f64::INFINITY;
            }
        }
        let lx = x.ln();
        let n = self.ln_x.len();
        let i = if lx <= self.ln_x[0] {
            0
        } else if lx >= self.ln_x[n - 1] {
            n - 2
        } else {
            self.ln_x.partition_point(|&v| v < lx).max(1) - 1
        };
        let m = (self.ln_y[i + 1] - self.ln_y[i]) / (self.ln_x[i + 1] - self.ln_x[i]);
        m * self.eval(x) / x
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.ln_x[0].exp(), self.ln_x[self.ln_x.len() - 1].exp())
    }

    pub fn blow_up(&self) -> Option<f64> {
        self.blow_up
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ln_x
            .iter()
            .zip(&self.ln_y)
            .map(|(&lx, &ly)| (lx.exp(), ly.exp()))
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Analytic(Density1D),
    Conjugate(Box<YoungFunction1D>),
    Profile(ProfileTable),
}

/// A 1-dimensional N-function.
#[derive(Clone, Debug)]
pub struct YoungFunction1D {
    repr: Repr,
}

impl YoungFunction1D {
    pub fn from_density(density: Density1D) -> Result<Self> {
        density.check_params()?;
        Ok(Self { repr: Repr::Analytic(density) })
    }

    /// `B(t) = |t|^p / p`.
    pub fn power(p: f64) -> Result<Self> {
        Self::from_density(Density1D::Power { p, scale: 1.0 })
    }

    /// `B(t) = scale * |t|^p / p`.
    pub fn power_scaled(p: f64, scale: f64) -> Result<Self> {
        Self::from_density(Density1D::Power { p, scale })
    }

    /// `B(t) = (1/p) |t|^p ln^alpha(c + |t|)`.
    pub fn power_log(p: f64, alpha: f64, c: f64) -> Result<Self> {
        Self::from_density(Density1D::PowerLog { p, alpha, c, scale: 1.0 })
    }

    /// `B(t) = e^(|t|^alpha) - 1`, `alpha > 1`.
    pub fn exp_power(alpha: f64) -> Result<Self> {
        Self::from_density(Density1D::ExpPow { alpha, scale: 1.0 })
    }

    /// `B(t) = e^|t| - |t| - 1`.
    pub fn exp_linear() -> Result<Self> {
        Self::from_density(Density1D::ExpLin { scale: 1.0 })
    }

    pub fn from_profile(table: ProfileTable) -> Self {
        Self { repr: Repr::Profile(table) }
    }

    /// Reads a two-column CSV of `(tau, b(tau))` density breakpoints.
    pub fn from_density_csv(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let tau: f64 = cols
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::config("expected numeric tau column", Some(lineno + 1)))?;
            let b: f64 = cols
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::config("expected numeric density column", Some(lineno + 1)))?;
            points.push((tau, b));
        }
        Ok(Self {
            repr: Repr::Analytic(Density1D::Tabulated(TabulatedDensity::new(&points)?)),
        })
    }

    pub fn profile_table(&self) -> Option<&ProfileTable> {
        match &self.repr {
            Repr::Profile(t) => Some(t),
            _ => None,
        }
    }

    /// `B(|t|)`.
    pub fn eval(&self, t: f64) -> f64 {
        assert!(t.is_finite(), "eval requires a finite argument, got {t}");
        let a = t.abs();
        match &self.repr {
            Repr::Analytic(d) => d.antiderivative(a),
            Repr::Conjugate(src) => conjugate_value(src, a).0,
            Repr::Profile(p) => p.eval(a),
        }
    }

    /// `ln B(|t|)`, stable for values far beyond f64 range.
    pub fn ln_eval(&self, t: f64) -> f64 {
        assert!(t.is_finite());
        let a = t.abs();
        if a == 0.0 {
            return f64::NEG_INFINITY;
        }
        match &self.repr {
            Repr::Analytic(d) => d.ln_antiderivative(a),
            Repr::Conjugate(src) => conjugate_value(src, a).0.ln(),
            Repr::Profile(p) => p.ln_eval(a),
        }
    }

    /// Density `b` with odd symmetry: `density(t) = sign(t) b(|t|)`.
    pub fn density(&self, t: f64) -> f64 {
        assert!(t.is_finite());
        let a = t.abs();
        let v = match &self.repr {
            Repr::Analytic(d) => d.eval(a),
            Repr::Conjugate(src) => {
                // derivative of the conjugate is the generalized inverse of b
                if a == 0.0 {
                    0.0
                } else {
                    monotone_inverse(|x| src.density(x), a, 1e-13)
                }
            }
            Repr::Profile(p) => p.derivative(a),
        };
        if t < 0.0 {
            -v
        } else {
            v
        }
    }

    /// Left-continuous generalized inverse `inf { t >= 0 : B(t) >= y }`.
    pub fn inverse(&self, y: f64) -> f64 {
        assert!(y >= 0.0 && y.is_finite(), "inverse requires finite y >= 0");
        if y == 0.0 {
            return 0.0;
        }
        monotone_inverse(|t| self.eval(t), y, 1e-13)
    }

    /// Young conjugate `B*(s) = sup_{t >= 0} (s t - B(t))`.
    ///
    /// Power families conjugate in closed form; everything else evaluates
    /// the supremum on demand by a monotone root find on the density.
    /// Conjugates of tabulated densities additionally carry a 256-knot
    /// cache interpolated in log-log coordinates.
    pub fn conjugate(&self) -> YoungFunction1D {
        if let Repr::Analytic(Density1D::Power { p, scale }) = self.repr {
            let q = p / (p - 1.0);
            // sup_t (s t - (scale/p) t^p) = (scale^(1-q)/q) s^q
            let conj_scale = scale.powf(1.0 - q);
            return YoungFunction1D {
                repr: Repr::Analytic(Density1D::Power { p: q, scale: conj_scale }),
            };
        }
        if let Repr::Analytic(Density1D::Tabulated(_)) = self.repr {
            if let Some(table) = tabulated_conjugate_cache(self) {
                return YoungFunction1D { repr: Repr::Profile(table) };
            }
        }
        YoungFunction1D {
            repr: Repr::Conjugate(Box::new(self.clone())),
        }
    }

    /// Conjugate value together with the maximizing `t`.
    pub fn conjugate_with_argmax(&self, s: f64) -> (f64, f64) {
        assert!(s.is_finite());
        conjugate_value(self, s.abs())
    }

    /// Samples `B(2t)/B(t)` on a geometric grid in `(k_threshold, t_max]`
    /// and reports whether the ratio stays bounded without an upward trend
    /// over the final decade. This is a sampled certificate, not a proof.
    pub fn delta2_check(&self, k_threshold: f64, t_max: f64) -> Result<Delta2Report> {
        if !(k_threshold >= 0.0) || !(t_max > k_threshold) || !t_max.is_finite() {
            return Err(Error::invalid(format!(
                "degenerate doubling-check range ({k_threshold}, {t_max}]"
            )));
        }
        let lo = k_threshold.max(t_max * 1e-12);
        let grid = log_grid(lo, t_max, 96);
        let mut ratios = Vec::with_capacity(grid.len());
        let mut bounded = true;
        for &t in &grid {
            // ln-space ratio survives overflow of either value
            let r = (self.ln_eval(2.0 * t) - self.ln_eval(t)).exp();
            if !r.is_finite() {
                bounded = false;
            }
            ratios.push(r);
        }
        let decade = |lo: f64, hi: f64| -> f64 {
            grid.iter()
                .zip(&ratios)
                .filter(|(&t, _)| t > lo && t <= hi)
                .map(|(_, &r)| r)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let last = decade(t_max / 10.0, t_max);
        let prev = decade(t_max / 100.0, t_max / 10.0);
        let trending_up = !(last <= prev * 1.02);
        let holds = bounded && !trending_up;
        let c_estimate = if holds {
            Some(ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        } else {
            None
        };
        Ok(Delta2Report {
            holds,
            c_estimate,
            samples: SampledTrace { grid, values: ratios },
        })
    }
}

/// Outcome of [`YoungFunction1D::delta2_check`], with the sampling grid so
/// callers can pin exactly what was tested.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Delta2Report {
    pub holds: bool,
    pub c_estimate: Option<f64>,
    pub samples: SampledTrace,
}

/// Sampled certificate that `A` increases essentially more slowly than `D`
/// near infinity: for every `gamma` the ratio `A(gamma t)/D(t)` must fall
/// to `1e-6` by the end of a geometric grid reaching `t = 1e8`.
pub fn grows_essentially_slower(
    a: &YoungFunction1D,
    d: &YoungFunction1D,
    gammas: &[f64],
) -> GrowthOrderReport {
    assert!(!gammas.is_empty() && gammas.iter().all(|&g| g > 0.0));
    let grid = log_grid(1.0, 1e8, 81);
    let threshold = 1e-6f64.ln() + 1e-9;
    let mut per_gamma = Vec::with_capacity(gammas.len());
    let mut holds = true;
    for &gamma in gammas {
        let ln_ratios: Vec<f64> = grid
            .iter()
            .map(|&t| a.ln_eval(gamma * t) - d.ln_eval(t))
            .collect();
        let final_ln = *ln_ratios.last().unwrap();
        let ok = final_ln <= threshold;
        holds &= ok;
        per_gamma.push(GammaTrace {
            gamma,
            final_ratio: final_ln.exp(),
            samples: SampledTrace {
                grid: grid.clone(),
                values: ln_ratios.iter().map(|&l| l.exp()).collect(),
            },
        });
    }
    GrowthOrderReport { holds, per_gamma }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GammaTrace {
    pub gamma: f64,
    pub final_ratio: f64,
    pub samples: SampledTrace,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GrowthOrderReport {
    pub holds: bool,
    pub per_gamma: Vec<GammaTrace>,
}

fn conjugate_value(source: &YoungFunction1D, s: f64) -> (f64, f64) {
    if s == 0.0 {
        return (0.0, 0.0);
    }
    let t_star = monotone_inverse(|t| source.density(t), s, 1e-14);
    if !t_star.is_finite() {
        return (f64::INFINITY, t_star);
    }
    ((s * t_star - source.eval(t_star)).max(0.0), t_star)
}

fn tabulated_conjugate_cache(source: &YoungFunction1D) -> Option<ProfileTable> {
    let (s_lo, s_hi) = match &source.repr {
        Repr::Analytic(Density1D::Tabulated(tab)) => {
            let lo = tab.values.iter().copied().find(|&v| v > 0.0)?;
            let hi = tab.density(4.0 * tab.taus[tab.taus.len() - 1]);
            (lo * 1e-3, hi)
        }
        _ => return None,
    };
    if !(s_hi > s_lo) {
        return None;
    }
    let knots: Vec<(f64, f64)> = log_grid(s_lo, s_hi, 256)
        .into_iter()
        .map(|s| (s, conjugate_value(source, s).0))
        .filter(|&(_, v)| v > 0.0)
        .collect();
    ProfileTable::new(&knots).ok()
}

/// Sampled N-function self-checks. Returns human-readable violations; an
/// empty list means every sampled invariant held.
pub fn check_invariants(b: &YoungFunction1D, rng: &mut impl rand::Rng) -> Vec<String> {
    let mut violations = Vec::new();
    if b.eval(0.0) != 0.0 {
        violations.push(format!("B(0) = {} != 0", b.eval(0.0)));
    }
    if b.density(0.0) != 0.0 {
        violations.push(format!("b(0) = {} != 0", b.density(0.0)));
    }
    // density: nondecreasing, positive for t > 0, divergent trend at decades.
    // Overflow to +inf at large t counts as growth, not a violation.
    let decade: Vec<f64> = (1..=6).map(|k| 10f64.powi(k)).collect();
    let mut prev = 0.0;
    for &t in &decade {
        let v = b.density(t);
        if v.is_infinite() {
            break;
        }
        if v <= prev {
            violations.push(format!("density not strictly increasing at t = {t}"));
            break;
        }
        prev = v;
    }
    if b.density(1e6) <= 1.02 * b.density(10.0) {
        violations.push("density shows no unbounded trend across sampled decades".into());
    }
    for _ in 0..64 {
        let t = 10f64.powf(rng.gen_range(-3.0..2.0));
        if b.density(t) <= 0.0 {
            violations.push(format!("density nonpositive at t = {t}"));
            break;
        }
    }
    // convexity: midpoint test on random triples
    for _ in 0..128 {
        let t1 = 10f64.powf(rng.gen_range(-2.0..1.3));
        let t2 = 10f64.powf(rng.gen_range(-2.0..1.3));
        let mid = 0.5 * (t1 + t2);
        let lhs = b.eval(mid);
        let rhs = 0.5 * (b.eval(t1) + b.eval(t2));
        if lhs > rhs + 1e-9 * (1.0 + rhs.abs()) {
            violations.push(format!("midpoint convexity failed at ({t1}, {t2})"));
            break;
        }
    }
    // superlinear growth and sublinear decay of B(t)/t
    let big: Vec<f64> = (2..=7).map(|k| 10f64.powi(k)).collect();
    let ratios_up: Vec<f64> = big.iter().map(|&t| b.ln_eval(t) - t.ln()).collect();
    if !ratios_up.windows(2).all(|w| w[1] > w[0]) {
        violations.push("B(t)/t not increasing at large sampled t".into());
    }
    let small: Vec<f64> = (2..=7).map(|k| 10f64.powi(-k)).collect();
    let ratios_down: Vec<f64> = small.iter().map(|&t| b.eval(t) / t).collect();
    if !ratios_down.windows(2).all(|w| w[1] < w[0] + 1e-300) {
        violations.push("B(t)/t not decreasing at small sampled t".into());
    }
    // scaling inequality B(h t) <= h B(t) for h in (0, 1]
    for _ in 0..256 {
        let h = rng.gen_range(1e-6..=1.0);
        let t = 10f64.powf(rng.gen_range(-2.0..1.3));
        if b.eval(h * t) > h * b.eval(t) + 1e-12 {
            violations.push(format!("B(h t) <= h B(t) failed at h = {h}, t = {t}"));
            break;
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quadratic() -> YoungFunction1D {
        // B(t) = t^2 / 2
        YoungFunction1D::power(2.0).unwrap()
    }

    #[test]
    fn eval_quadratic_closed_form() {
        assert_relative_eq!(quadratic().eval(3.0), 4.5);
        assert_eq!(quadratic().eval(0.0), 0.0);
        assert_relative_eq!(quadratic().eval(-3.0), 4.5);
    }

    #[test]
    fn eval_cubic_density_hand_integral() {
        // b(tau) = tau^2  =>  B(2) = 8/3; cross-checked against adaptive
        // quadrature of the density.
        let b = YoungFunction1D::power_scaled(3.0, 3.0).unwrap(); // 3 * t^3/3 = t^3 ... density 3 t^2
        assert_relative_eq!(b.density(2.0), 12.0);
        let b = YoungFunction1D::power(3.0).unwrap(); // density tau^2
        assert_relative_eq!(b.eval(2.0), 8.0 / 3.0, max_relative = 1e-14);
        let quad = crate::numerics::adaptive_simpson(&|x: f64| x * x, 0.0, 2.0, 1e-12);
        assert_relative_eq!(b.eval(2.0), quad, max_relative = 1e-10);
    }

    #[test]
    fn tabulated_eval_matches_quadrature() {
        // tabulate b(tau) = tau on [0.01, 50]; B(t) = t^2/2 up to the
        // piecewise-linear representation (exact for a linear density)
        let pts: Vec<(f64, f64)> = (1..=500).map(|i| (0.1 * i as f64, 0.1 * i as f64)).collect();
        let b = YoungFunction1D::from_density(Density1D::Tabulated(
            TabulatedDensity::new(&pts).unwrap(),
        ))
        .unwrap();
        assert_relative_eq!(b.eval(3.0), 4.5, max_relative = 1e-10);
        assert_relative_eq!(b.eval(17.3), 17.3 * 17.3 / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn inverse_left_continuous_convention() {
        let b = YoungFunction1D::power_scaled(2.0, 2.0).unwrap(); // B(t) = t^2
        assert_relative_eq!(b.inverse(9.0), 3.0, max_relative = 1e-12);
        assert_eq!(b.inverse(0.0), 0.0);
    }

    #[test]
    fn inverse_power_log_matches_long_bisection() {
        // B(t) = t^2 ln(e + t): oracle is a plain 200-step bisection
        let b = YoungFunction1D::from_density(Density1D::PowerLog {
            p: 2.0,
            alpha: 1.0,
            c: std::f64::consts::E,
            scale: 2.0,
        })
        .unwrap();
        let y = 10.0;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while b.eval(hi) < y {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if b.eval(mid) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert_relative_eq!(b.inverse(y), hi, max_relative = 1e-9);
        assert!((b.eval(b.inverse(y)) - y).abs() <= 1e-9 * y);
    }

    #[test]
    fn conjugate_quadratic_self() {
        let c = quadratic().conjugate();
        for s in [0.0, 0.5, 1.0, 2.0, 7.5] {
            assert_relative_eq!(c.eval(s), s * s / 2.0, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn conjugate_power_pair() {
        // B = t^p/p  =>  B* = s^q/q with 1/p + 1/q = 1
        let p = 3.0;
        let q = 1.5;
        let c = YoungFunction1D::power(p).unwrap().conjugate();
        for s in [0.3, 1.0, 2.0, 11.0] {
            assert_relative_eq!(c.eval(s), s.powf(q) / q, max_relative = 1e-12);
        }
        assert_relative_eq!(c.eval(2.0), 2.0f64.powf(1.5) / 1.5, max_relative = 1e-12);
    }

    #[test]
    fn conjugate_exp_linear_closed_form() {
        // B(t) = e^|t| - |t| - 1  =>  B*(s) = (1+s) ln(1+s) - s
        let c = YoungFunction1D::exp_linear().unwrap().conjugate();
        for s in [0.5f64, 1.0, 2.0] {
            let expected = (1.0 + s) * (1.0 + s).ln() - s;
            assert_relative_eq!(c.eval(s), expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn involution_on_analytic_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut families: Vec<YoungFunction1D> = Vec::new();
        while families.len() < 50 {
            let pick = families.len() % 4;
            let f = match pick {
                0 => YoungFunction1D::power(rng.gen_range(1.2..5.0)).unwrap(),
                1 => YoungFunction1D::power_log(
                    rng.gen_range(1.5..3.5),
                    rng.gen_range(0.2..2.0),
                    rng.gen_range(3.0..20.0),
                )
                .unwrap(),
                2 => YoungFunction1D::exp_power(rng.gen_range(1.3..2.5)).unwrap(),
                _ => YoungFunction1D::from_density(Density1D::ExpLin {
                    scale: rng.gen_range(0.5..3.0),
                })
                .unwrap(),
            };
            families.push(f);
        }
        for b in &families {
            let bb = b.conjugate().conjugate();
            for t in log_grid(1e-2, 1e2, 20) {
                // keep exp families inside f64 range
                if b.eval(t).is_finite() {
                    let rel = (bb.eval(t) - b.eval(t)).abs() / b.eval(t).max(1.0);
                    assert!(rel <= 1e-6, "involution broke at t = {t}: rel = {rel}");
                }
            }
        }
    }

    #[test]
    fn young_inequality_and_equality_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fams = [
            YoungFunction1D::power(2.5).unwrap(),
            YoungFunction1D::power_log(2.0, 1.0, 10.0).unwrap(),
            YoungFunction1D::exp_power(1.7).unwrap(),
        ];
        for _ in 0..10_000 {
            let b = &fams[rng.gen_range(0..fams.len())];
            let conj = b.conjugate();
            let s = 10f64.powf(rng.gen_range(-2.0..1.0));
            let t = 10f64.powf(rng.gen_range(-2.0..1.0));
            let gap = b.eval(t) + conj.eval(s) - s * t;
            assert!(gap >= -1e-10, "Young inequality violated: gap = {gap}");
        }
        for _ in 0..200 {
            let b = &fams[rng.gen_range(0..fams.len())];
            let conj = b.conjugate();
            let t = 10f64.powf(rng.gen_range(-1.0..1.0));
            let s = b.density(t);
            let gap = b.eval(t) + conj.eval(s) - s * t;
            assert!(
                gap.abs() <= 1e-8 * (1.0 + b.eval(t)),
                "equality case off: gap = {gap} at t = {t}"
            );
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fams = [
            YoungFunction1D::power(1.7).unwrap(),
            YoungFunction1D::power_log(2.2, 0.7, 5.0).unwrap(),
            YoungFunction1D::exp_power(2.0).unwrap(),
        ];
        for _ in 0..300 {
            let b = &fams[rng.gen_range(0..fams.len())];
            let t = 10f64.powf(rng.gen_range(-2.0..1.0));
            let back = b.inverse(b.eval(t));
            assert!(
                (back - t).abs() <= 1e-8 * t.max(1.0),
                "inverse round trip failed: {t} -> {back}"
            );
        }
    }

    #[test]
    fn doubling_certificate_examples() {
        let p = 3.0;
        let rep = YoungFunction1D::power(p).unwrap().delta2_check(0.0, 1e6).unwrap();
        assert!(rep.holds);
        assert_relative_eq!(rep.c_estimate.unwrap(), 2f64.powf(p), max_relative = 1e-9);

        let rep = YoungFunction1D::from_density(Density1D::ExpPow { alpha: 2.0, scale: 1.0 })
            .unwrap()
            .delta2_check(0.0, 1e3)
            .unwrap();
        assert!(!rep.holds);
        assert!(rep.c_estimate.is_none());

        // B(t) = t^2 ln(e + t): ratio tends to 4 from above
        let rep = YoungFunction1D::from_density(Density1D::PowerLog {
            p: 2.0,
            alpha: 1.0,
            c: std::f64::consts::E,
            scale: 2.0,
        })
        .unwrap()
        .delta2_check(0.0, 1e6)
        .unwrap();
        assert!(rep.holds);
        let c = rep.c_estimate.unwrap();
        assert!(c > 4.0 && c < 8.0, "C estimate {c}");
        // the ratio peaks and then decreases toward 4 from above
        let last = *rep.samples.values.last().unwrap();
        let peak = rep.samples.values.iter().copied().fold(f64::MIN, f64::max);
        assert!(last < peak && last > 4.0 && last < 4.3, "tail ratio {last}");
    }

    #[test]
    fn doubling_check_rejects_degenerate_range() {
        assert!(quadratic().delta2_check(10.0, 1.0).is_err());
    }

    #[test]
    fn growth_order_certificates() {
        let t2 = YoungFunction1D::power_scaled(2.0, 2.0).unwrap(); // t^2
        let t3 = YoungFunction1D::power_scaled(3.0, 3.0).unwrap(); // t^3
        assert!(grows_essentially_slower(&t2, &t3, &[0.5, 1.0, 10.0]).holds);
        assert!(!grows_essentially_slower(&t3, &t3, &[2.0]).holds);
        let exp = YoungFunction1D::from_density(Density1D::ExpLin { scale: 1.0 }).unwrap();
        for q in [2.0, 5.0] {
            let tq = YoungFunction1D::power_scaled(q, q).unwrap();
            assert!(grows_essentially_slower(&tq, &exp, &[1.0, 3.0]).holds);
        }
    }

    #[test]
    fn invariants_hold_for_registered_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for b in [
            YoungFunction1D::power(2.0).unwrap(),
            YoungFunction1D::power(1.3).unwrap(),
            YoungFunction1D::power_log(2.0, 1.0, 10.0).unwrap(),
            YoungFunction1D::exp_power(2.0).unwrap(),
            YoungFunction1D::exp_linear().unwrap(),
        ] {
            let violations = check_invariants(&b, &mut rng);
            assert!(violations.is_empty(), "violations: {violations:?}");
        }
    }

    #[test]
    fn profile_table_round_trip() {
        let pts: Vec<(f64, f64)> = log_grid(1e-3, 1e3, 40)
            .into_iter()
            .map(|x| (x, 0.5 * x * x))
            .collect();
        let table = ProfileTable::new(&pts).unwrap();
        let f = YoungFunction1D::from_profile(table);
        for x in [1e-2, 0.7, 3.0, 500.0] {
            assert_relative_eq!(f.eval(x), 0.5 * x * x, max_relative = 1e-6);
        }
        // extrapolation continues the boundary power law
        assert_relative_eq!(f.eval(1e5), 0.5e10, max_relative = 1e-3);
        assert_relative_eq!(f.density(2.0), 2.0, max_relative = 1e-6);
    }
}
