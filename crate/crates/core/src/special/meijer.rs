//! Meijer G-function `G^{m,n}_{p,q}(z | a; b)` for positive real `z`.
//!
//! The primary route is the residue series over the poles of the
//! `Γ(b_j + s)`, `j <= m` (Slater's expansion into `pFq` series). Lower
//! parameters that collide (differ by an integer to within
//! [`MeijerOptions::collision_spacing`]) are split by `±ε` and the two
//! evaluations averaged.
//!
//! Every series result carries a rounding estimate built from the summed
//! term magnitudes. When it exceeds [`MeijerOptions::max_series_error`]
//! (large `z`, heavy cancellation between conjugate terms, or the `1/ε`
//! blow-up of a split pair), or when three or more lower parameters
//! collide, the value comes from a trapezoidal quadrature of the
//! Mellin–Barnes integral on a vertical line instead.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::ln_gamma_complex;
use super::hypergeometric::pfq_series;
use crate::error::{Error, Result};

/// Complex parameter of a Meijer G-function.
pub type ComplexValue = Complex64;

/// A Meijer G-function instance.
///
/// `a_front` holds the `n` upper parameters that enter as `Γ(1 - a - s)`,
/// `a_back` the remaining `p - n`; `b_front` the `m` lower parameters that
/// enter as `Γ(b + s)`, `b_back` the remaining `q - m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    pub a_front: Vec<ComplexValue>,
    pub a_back: Vec<ComplexValue>,
    pub b_front: Vec<ComplexValue>,
    pub b_back: Vec<ComplexValue>,
    pub z: f64,
}

/// Tuning knobs of [`meijer_g_with`].
#[derive(Debug, Clone, Copy)]
pub struct MeijerOptions {
    /// Split applied to colliding lower parameters.
    pub epsilon: f64,
    /// Lower parameters whose difference is this close to an integer collide.
    pub collision_spacing: f64,
    /// Largest predicted relative rounding error accepted from the series.
    pub max_series_error: f64,
}

impl Default for MeijerOptions {
    fn default() -> Self {
        Self { epsilon: 1e-6, collision_spacing: 1e-8, max_series_error: 1e-9 }
    }
}

/// Which route produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    ResidueSeries,
    ContourQuadrature,
}

/// Raw (complex) evaluation with provenance.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub value: Complex64,
    pub method: EvalMethod,
    /// Whether the z ↦ 1/z identity was applied before summing.
    pub inverted: bool,
}

fn all_finite(v: &[Complex64]) -> bool {
    v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

fn near_integer(d: Complex64, tol: f64) -> Option<i64> {
    let r = d.re.round();
    if d.im.abs() <= tol && (d.re - r).abs() <= tol {
        Some(r as i64)
    } else {
        None
    }
}

fn is_closed_under_conjugation(v: &[Complex64]) -> bool {
    let mut used = vec![false; v.len()];
    for (i, x) in v.iter().enumerate() {
        if used[i] {
            continue;
        }
        if x.im == 0.0 {
            used[i] = true;
            continue;
        }
        let scale = x.norm().max(1.0);
        let partner = (0..v.len()).find(|&j| j != i && !used[j] && (v[j] - x.conj()).norm() <= 1e-13 * scale);
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return false,
        }
    }
    true
}

impl MeijerGSpec {
    /// Builds and validates a spec.
    pub fn new(
        a_front: Vec<ComplexValue>,
        a_back: Vec<ComplexValue>,
        b_front: Vec<ComplexValue>,
        b_back: Vec<ComplexValue>,
        z: f64,
    ) -> Result<Self> {
        let spec = Self { a_front, a_back, b_front, b_back, z };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from real parameter lists.
    pub fn real(a_front: &[f64], a_back: &[f64], b_front: &[f64], b_back: &[f64], z: f64) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(c(a_front), c(a_back), c(b_front), c(b_back), z)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(Error::InvalidArgument(format!("Meijer G argument must be positive, got {}", self.z)));
        }
        if ![&self.a_front, &self.a_back, &self.b_front, &self.b_back]
            .iter()
            .all(|v| all_finite(v))
        {
            return Err(Error::InvalidArgument("non-finite Meijer G parameter".into()));
        }
        for a in &self.a_front {
            for b in &self.b_front {
                if let Some(k) = near_integer(a - b, 1e-12) {
                    if k >= 1 {
                        return Err(Error::ContourInseparable(format!(
                            "pole of Γ({b} + s) coincides with a pole of Γ(1 - {a} - s)"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `(m, n, p, q)`
    pub fn orders(&self) -> (usize, usize, usize, usize) {
        let m = self.b_front.len();
        let n = self.a_front.len();
        (m, n, n + self.a_back.len(), m + self.b_back.len())
    }

    /// The equivalent spec at `1/z`: `G^{m,n}_{p,q}(z | a; b) = G^{n,m}_{q,p}(1/z | 1-b; 1-a)`.
    pub fn inverted(&self) -> Self {
        let flip = |v: &[Complex64]| v.iter().map(|x| 1.0 - x).collect::<Vec<_>>();
        Self {
            a_front: flip(&self.b_front),
            a_back: flip(&self.b_back),
            b_front: flip(&self.a_front),
            b_back: flip(&self.a_back),
            z: 1.0 / self.z,
        }
    }

    /// True when every parameter list is closed under complex conjugation,
    /// which makes the function real for real `z`.
    pub fn is_conjugate_closed(&self) -> bool {
        [&self.a_front, &self.a_back, &self.b_front, &self.b_back]
            .iter()
            .all(|v| is_closed_under_conjugation(v))
    }

    /// `ln[Φ(s) z^{-s}]` of the Mellin–Barnes integrand, or `None` where a
    /// reciprocal gamma in the denominator vanishes.
    pub fn ln_integrand(&self, s: Complex64) -> Result<Option<Complex64>> {
        let mut acc = -s * self.z.ln();
        for b in &self.b_front {
            acc += ln_gamma_complex(b + s)?;
        }
        for a in &self.a_front {
            acc += ln_gamma_complex(1.0 - a - s)?;
        }
        for b in &self.b_back {
            match ln_gamma_complex(1.0 - b - s) {
                Ok(v) => acc -= v,
                Err(Error::Pole { .. }) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        for a in &self.a_back {
            match ln_gamma_complex(a + s) {
                Ok(v) => acc -= v,
                Err(Error::Pole { .. }) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        Ok(Some(acc))
    }

    /// The Mellin–Barnes integrand `Φ(s) z^{-s}`.
    pub fn integrand(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.ln_integrand(s)?.map_or(Complex64::new(0.0, 0.0), |v| v.exp()))
    }

    /// Open interval `(lo, hi)` of abscissae whose vertical line separates
    /// the `b_front` poles (left) from the `a_front` poles (right).
    pub fn separating_strip(&self) -> Result<(f64, f64)> {
        let lo = self.b_front.iter().map(|b| -b.re).fold(f64::NEG_INFINITY, f64::max);
        let hi = self.a_front.iter().map(|a| 1.0 - a.re).fold(f64::INFINITY, f64::min);
        if lo < hi {
            Ok((lo, hi))
        } else {
            Err(Error::ContourInseparable(format!(
                "rightmost left pole at Re s = {lo} is not left of leftmost right pole at Re s = {hi}"
            )))
        }
    }
}

/// A vertical integration line `Re s = c` inside the separating strip.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ContourLine {
    pub c: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ContourLine {
    /// Horizontal distance to the nearest pole.
    pub fn pole_distance(&self) -> f64 {
        (self.c - self.lo).min(self.hi - self.c)
    }
}

/// Picks the abscissa minimising `|Φ(c) z^{-c}|` on the real axis, which
/// keeps the oscillating line integral close to its own magnitude.
pub(crate) fn saddle_line(spec: &MeijerGSpec) -> Result<ContourLine> {
    let (lo, hi) = spec.separating_strip()?;
    let cost = |c: f64| -> f64 {
        match spec.ln_integrand(Complex64::new(c, 0.0)) {
            Ok(Some(v)) if v.re.is_finite() => v.re,
            _ => f64::INFINITY,
        }
    };
    // an open side is pushed outward while the cost keeps falling there
    let reach = |from: f64, dir: f64| -> f64 {
        let mut span = 8.0;
        while span < 1e6 && cost(from + dir * span) < cost(from + dir * 0.5 * span) {
            span *= 2.0;
        }
        from + dir * span
    };
    let (left, right) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let margin = 0.02_f64.min(0.25 * (hi - lo));
            (lo + margin, hi - margin)
        }
        (true, false) => (lo + 0.02, reach(lo + 0.02, 1.0)),
        (false, true) => (reach(hi - 0.02, -1.0), hi - 0.02),
        (false, false) => (reach(0.0, -1.0), reach(0.0, 1.0)),
    };
    const GRID: usize = 64;
    let mut best = (f64::INFINITY, 0.5 * (left + right));
    for i in 0..=GRID {
        let c = left + (right - left) * i as f64 / GRID as f64;
        let v = cost(c);
        if v < best.0 {
            best = (v, c);
        }
    }
    // golden-section polish around the best grid point
    let step = (right - left) / GRID as f64;
    let (mut a, mut b) = ((best.1 - step).max(left), (best.1 + step).min(right));
    let g = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..40 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(x2);
        }
    }
    let c = if f1.min(f2) < best.0 { 0.5 * (a + b) } else { best.1 };
    Ok(ContourLine { c, lo, hi })
}

/// Trapezoidal rule on the line `Re s = c`; exponentially convergent for
/// the analytic, exponentially decaying integrand.
fn contour_trapezoid(spec: &MeijerGSpec) -> Result<Complex64> {
    let line = saddle_line(spec)?;
    let d = line.pole_distance().min(1.0);
    let ln_z = spec.z.ln().abs();
    let h = 2.0 * PI * d / (46.0 + d * ln_z);
    let symmetric = spec.is_conjugate_closed();
    let f = |t: f64| spec.integrand(Complex64::new(line.c, t));

    let f0 = f(0.0)?;
    let mut sum = f0;
    let mut peak = f0.norm();
    let mut quiet = 0;
    const MAX_STEPS: usize = 400_000;
    for k in 1..MAX_STEPS {
        let t = k as f64 * h;
        let fp = f(t)?;
        let pair = if symmetric {
            Complex64::new(2.0 * fp.re, 0.0)
        } else {
            fp + f(-t)?
        };
        sum += pair;
        let size = pair.norm();
        if !size.is_finite() {
            return Err(Error::QuadratureNonConvergence(format!("non-finite integrand at t = {t}")));
        }
        peak = peak.max(size);
        if size < 1e-18 * peak && t > 1.0 {
            quiet += 1;
            if quiet >= 8 {
                return Ok(sum * (h / (2.0 * PI)));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::QuadratureNonConvergence(
        "Mellin–Barnes integrand does not decay along the contour".into(),
    ))
}

/// Union-find clusters of lower parameters that differ by integers.
fn collision_clusters(b: &[Complex64], spacing: f64) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..b.len()).collect();
    fn root(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..b.len() {
        for j in (i + 1)..b.len() {
            if near_integer(b[i] - b[j], spacing).is_some() {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..b.len() {
        let r = root(&mut parent, i);
        match groups.iter_mut().find(|g| root(&mut parent.clone(), g[0]) == r) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups.retain(|g| g.len() > 1);
    groups
}

/// Slater's residue expansion; returns the value and a bound on the summed
/// term magnitudes.
fn slater_sum(spec: &MeijerGSpec) -> Result<(Complex64, f64)> {
    let (m, _n, p, q) = spec.orders();
    let ln_z = spec.z.ln();
    let sign = if (p + m + spec.a_front.len()) % 2 == 0 { 1.0 } else { -1.0 };
    let arg = Complex64::new(sign * spec.z, 0.0);
    let all_a: Vec<Complex64> = spec.a_front.iter().chain(&spec.a_back).copied().collect();

    let mut value = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for (h, &bh) in spec.b_front.iter().enumerate() {
        let mut ln_c = bh * ln_z;
        let mut vanishes = false;
        for (j, &bj) in spec.b_front.iter().enumerate() {
            if j != h {
                ln_c += ln_gamma_complex(bj - bh)?;
            }
        }
        for &a in &spec.a_front {
            ln_c += ln_gamma_complex(1.0 + bh - a)?;
        }
        for &b in &spec.b_back {
            match ln_gamma_complex(1.0 + bh - b) {
                Ok(v) => ln_c -= v,
                Err(Error::Pole { .. }) => vanishes = true,
                Err(e) => return Err(e),
            }
        }
        for &a in &spec.a_back {
            match ln_gamma_complex(a - bh) {
                Ok(v) => ln_c -= v,
                Err(Error::Pole { .. }) => vanishes = true,
                Err(e) => return Err(e),
            }
        }
        if vanishes {
            continue;
        }
        let upper: Vec<Complex64> = all_a.iter().map(|&a| 1.0 + bh - a).collect();
        let lower: Vec<Complex64> = spec
            .b_front
            .iter()
            .chain(&spec.b_back)
            .enumerate()
            .filter(|&(j, _)| j != h)
            .map(|(_, &b)| 1.0 + bh - b)
            .collect();
        debug_assert_eq!(lower.len() + 1, q);
        debug_assert_eq!(upper.len(), p);
        let series = pfq_series(&upper, &lower, arg)?;
        let c = ln_c.exp();
        value += c * series.value;
        // absolute error of ln c (phase included) scales with its size
        magnitude += c.norm() * series.magnitude * (1.0 + ln_c.norm());
    }
    Ok((value, magnitude))
}

/// Residue series with collision handling; `None` means "use the contour".
fn residue_series(spec: &MeijerGSpec, opts: &MeijerOptions) -> Result<Option<Complex64>> {
    let (_, _, p, q) = spec.orders();
    if p < q {
        let d = (q - p) as f64;
        // terms peak near exp(d · z^{1/d}) before the series settles
        if d * spec.z.powf(1.0 / d) > 30.0 {
            return Ok(None);
        }
    } else if spec.z > 0.95 {
        return Ok(None);
    }

    let clusters = collision_clusters(&spec.b_front, opts.collision_spacing);
    if clusters.iter().any(|g| g.len() > 2) {
        return Ok(None);
    }
    let (value, magnitude) = if clusters.is_empty() {
        slater_sum(spec)?
    } else {
        let split = |eps: f64| -> Result<(Complex64, f64)> {
            let mut s = spec.clone();
            for g in &clusters {
                s.b_front[g[0]] += eps;
            }
            slater_sum(&s)
        };
        let (plus, mp) = split(opts.epsilon)?;
        let (minus, mm) = split(-opts.epsilon)?;
        (0.5 * (plus + minus), 0.5 * (mp + mm))
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Ok(None);
    }
    let predicted = 5e-16 * magnitude;
    if predicted > opts.max_series_error * value.norm() {
        return Ok(None);
    }
    Ok(Some(value))
}

/// Evaluates a Meijer G-function and reports the route taken.
pub fn meijer_g_with(spec: &MeijerGSpec, opts: &MeijerOptions) -> Result<Evaluation> {
    spec.validate()?;
    let (_, _, p, q) = spec.orders();
    let inverted = p > q || (p == q && spec.z > 1.0);
    let work = if inverted { spec.inverted() } else { spec.clone() };
    if let Some(value) = residue_series(&work, opts)? {
        return Ok(Evaluation { value, method: EvalMethod::ResidueSeries, inverted });
    }
    let value = contour_trapezoid(spec)?;
    Ok(Evaluation { value, method: EvalMethod::ContourQuadrature, inverted: false })
}

/// Raw complex value of the G-function.
pub fn meijer_g_complex(spec: &MeijerGSpec) -> Result<Complex64> {
    meijer_g_with(spec, &MeijerOptions::default()).map(|e| e.value)
}

/// Real value of a G-function whose parameters are closed under
/// conjugation. Errors if the imaginary residue exceeds `1e-8 |re|`.
pub fn meijer_g(spec: &MeijerGSpec) -> Result<f64> {
    real_part(meijer_g_complex(spec)?)
}

pub(crate) fn real_part(v: Complex64) -> Result<f64> {
    if v.im.abs() <= 1e-8 * v.re.abs() {
        Ok(v.re)
    } else {
        Err(Error::NotReal { re: v.re, im: v.im })
    }
}
