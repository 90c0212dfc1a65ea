//! Composite Gauss-Legendre rules on `[0, L]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// `P_n` from the Chebyshev initial guesses.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule on `[-1, 1]` that can be stamped onto sub-intervals.
#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Append the rule mapped onto `[a, b]` cut into `panels` equal panels.
    pub fn push_composite(&self, a: f64, b: f64, panels: usize, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + h * p as f64;
            let hi = if p + 1 == panels { b } else { lo + h };
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
    }

    /// Composite rule on `[a, b]` with the interval first cut at every
    /// breakpoint strictly inside it. Degenerate intervals yield nothing.
    pub fn push_split(
        &self,
        a: f64,
        b: f64,
        breakpoints: &[f64],
        panels: usize,
        nodes: &mut Vec<f64>,
        weights: &mut Vec<f64>,
    ) {
        if !(b > a) {
            return;
        }
        let mut lo = a;
        for &bp in breakpoints {
            if bp > lo && bp < b {
                self.push_composite(lo, bp, panels, nodes, weights);
                lo = bp;
            }
        }
        self.push_composite(lo, b, panels, nodes, weights);
    }

    /// Like [`Rule::push_split`], but each segment gets a panel count
    /// proportional to its length: `density` panels per `scale`, at least one.
    pub fn push_split_scaled(
        &self,
        a: f64,
        b: f64,
        breakpoints: &[f64],
        density: usize,
        scale: f64,
        nodes: &mut Vec<f64>,
        weights: &mut Vec<f64>,
    ) {
        if !(b > a) {
            return;
        }
        let panels_for = |lo: f64, hi: f64| ((density as f64 * (hi - lo) / scale) - 1e-9).ceil().max(1.0) as usize;
        let mut lo = a;
        for &bp in breakpoints {
            if bp > lo && bp < b {
                self.push_composite(lo, bp, panels_for(lo, bp), nodes, weights);
                lo = bp;
            }
        }
        self.push_composite(lo, b, panels_for(lo, b), nodes, weights);
    }
}

/// `P_0(x), …, P_{count−1}(x)`.
pub fn legendre_values(count: usize, x: f64, out: &mut [f64]) {
    debug_assert!(out.len() >= count);
    if count == 0 {
        return;
    }
    out[0] = 1.0;
    if count > 1 {
        out[1] = x;
    }
    for k in 2..count {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

/// Spherical Bessel functions `j_0(x), …, j_{n−1}(x)` with `n = out.len()`.
/// Upward recurrence where it is stable (`|x| ≥ n`), Miller's downward
/// recurrence otherwise.
pub fn spherical_bessel_j(x: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let ax = x.abs();
    if ax == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    let (s, c) = ax.sin_cos();
    let j0 = s / ax;
    let j1 = s / (ax * ax) - c / ax;
    if ax >= n as f64 {
        out[0] = j0;
        if n > 1 {
            out[1] = j1;
        }
        for k in 1..n.saturating_sub(1) {
            out[k + 1] = (2 * k + 1) as f64 / ax * out[k] - out[k - 1];
        }
    } else {
        let start = n + 40 + ax as usize;
        let (mut upper, mut f) = (0.0_f64, 1e-280_f64);
        let (mut f0, mut f1) = (0.0, 0.0);
        for k in (1..=start).rev() {
            let lower = (2 * k + 1) as f64 / ax * f - upper;
            upper = f;
            f = lower;
            // f now holds the unnormalized j_{k−1}
            if k - 1 < n {
                out[k - 1] = f;
            }
            if k == 2 {
                f1 = f;
            }
            if k == 1 {
                f0 = f;
            }
            if f.abs() > 1e250 {
                f *= 1e-250;
                upper *= 1e-250;
                for v in out.iter_mut().skip(k - 1) {
                    *v *= 1e-250;
                }
                if k <= 2 {
                    f1 *= 1e-250;
                }
            }
        }
        if n == 1 {
            f1 = upper;
        }
        let scale = if j0.abs() >= j1.abs() { j0 / f0 } else { j1 / f1 };
        for v in out.iter_mut() {
            *v *= scale;
        }
    }
    if x < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
}

/// Piecewise Legendre series of a function sampled on a composite
/// Gauss-Legendre grid of equal panels; exact for piecewise polynomials of
/// degree below the order.
#[derive(Debug, Clone)]
pub struct LegendreExpansion {
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
    /// `coeffs[p * order + n]`.
    coeffs: Vec<Complex64>,
}

impl LegendreExpansion {
    /// `values` are samples at the nodes produced by
    /// `Rule::new(order).push_composite(a, b, panels, ..)`.
    pub fn new(a: f64, b: f64, panels: usize, order: usize, values: &[Complex64]) -> Result<Self> {
        if values.len() != panels * order || panels == 0 || order < 2 || !(b > a) {
            return Err(invalid(
                "expansion needs panels * order samples on a non-empty interval",
            ));
        }
        let (t, w) = gauss_legendre(order);
        let mut table = vec![0.0; order * order];
        for (j, &tj) in t.iter().enumerate() {
            legendre_values(order, tj, &mut table[j * order..(j + 1) * order]);
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); panels * order];
        for p in 0..panels {
            for n in 0..order {
                let mut sum = Complex64::new(0.0, 0.0);
                for j in 0..order {
                    sum += values[p * order + j] * (w[j] * table[j * order + n]);
                }
                coeffs[p * order + n] = sum * (0.5 * (2 * n + 1) as f64);
            }
        }
        Ok(Self {
            a,
            b,
            panels,
            order,
            coeffs,
        })
    }

    fn panel_of(&self, x: f64) -> (usize, f64, f64) {
        let h = (self.b - self.a) / self.panels as f64;
        let p = (((x - self.a) / h).floor().max(0.0) as usize).min(self.panels - 1);
        let lo = self.a + h * p as f64;
        (p, lo + 0.5 * h, 0.5 * h)
    }

    /// Interpolated value; `x` must lie in `[a, b]`.
    pub fn eval(&self, x: f64) -> Complex64 {
        let (p, mid, half) = self.panel_of(x);
        let mut pn = [0.0; 64];
        let pn = &mut pn[..self.order.min(64)];
        legendre_values(pn.len(), (x - mid) / half, pn);
        let mut sum = Complex64::new(0.0, 0.0);
        for (n, v) in pn.iter().enumerate() {
            sum += self.coeffs[p * self.order + n] * *v;
        }
        sum
    }

    /// `∫_a^b f(x) e^{iqx} dx` of the interpolant, via
    /// `∫_{−1}^{1} P_n(t) e^{iωt} dt = 2 iⁿ j_n(ω)`.
    pub fn fourier(&self, q: f64, scratch: &mut Vec<f64>) -> Complex64 {
        let h = (self.b - self.a) / self.panels as f64;
        let half = 0.5 * h;
        scratch.resize(self.order, 0.0);
        spherical_bessel_j(q * half, scratch);
        const I_POW: [Complex64; 4] = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..self.panels {
            let mid = self.a + h * (p as f64 + 0.5);
            let mut sum = Complex64::new(0.0, 0.0);
            for n in 0..self.order {
                sum += self.coeffs[p * self.order + n] * I_POW[n % 4] * scratch[n];
            }
            total += sum * Complex64::from_polar(2.0 * half, q * mid);
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Sorted, includes both ends `0` and `L`.
    pub panel_boundaries: Vec<f64>,
    pub order: usize,
    pub length: f64,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Composite grid of `panels` equal panels of `order` points on `[0, L]`.
///
/// Breakpoints, when given, cut the interval into segments first; each segment
/// then receives `panels` panels, so no panel straddles a breakpoint.
pub fn build_grid(panels: usize, order: usize, length: f64, breakpoints: &[f64]) -> Result<QuadratureGrid> {
    if panels < 1 {
        return Err(invalid("need at least one panel"));
    }
    if order < 2 {
        return Err(invalid(format!("Gauss-Legendre order {order} must be >= 2")));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(invalid(format!("length {length} must be > 0")));
    }
    if let Some(b) = breakpoints.iter().find(|&&b| !(b > 0.0 && b < length)) {
        return Err(invalid(format!("breakpoint {b} outside (0, {length})")));
    }
    let mut cuts = vec![0.0];
    let mut inner: Vec<f64> = breakpoints.to_vec();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(length);

    let rule = Rule::new(order);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut boundaries = vec![0.0];
    for seg in cuts.windows(2) {
        rule.push_composite(seg[0], seg[1], panels, &mut nodes, &mut weights);
        let h = (seg[1] - seg[0]) / panels as f64;
        for p in 1..panels {
            boundaries.push(seg[0] + h * p as f64);
        }
        boundaries.push(seg[1]);
    }
    Ok(QuadratureGrid {
        nodes,
        weights,
        panel_boundaries: boundaries,
        order,
        length,
    })
}
