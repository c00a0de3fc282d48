use super::GeometryError;
use super::triangle::Side;

/// Piecewise-linear boundary function phi over one triangle side, stored as
/// strictly increasing abscissae with nonnegative heights. Heights are measured
/// along the inward side normal, so phi >= 0 always, and phi(0) = phi(l) = 0.
#[derive(Debug, Clone)]
pub struct SideFunction {
    pub side: Side,
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Abscissa of the triple-point projection (the apex of the tent shape).
    pub apex: f64,
}

impl SideFunction {
    pub fn new(side: Side, knots: Vec<f64>, values: Vec<f64>, apex: f64) -> Result<Self, GeometryError> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(GeometryError::BadSideFunction(
                "need matching knot/value lists with at least two knots",
            ));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeometryError::BadSideFunction("abscissae must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < -1e-12) {
            return Err(GeometryError::BadSideFunction("heights must be finite and nonnegative"));
        }
        Ok(SideFunction { side, knots, values, apex })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain_length(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn knot_count(&self) -> usize {
        self.knots.len()
    }

    /// Pointwise evaluation (linear interpolation; constant 0 outside [0, l]
    /// would never be queried: callers stay inside the domain).
    pub fn eval(&self, s: f64) -> f64 {
        let k = &self.knots;
        if s <= k[0] {
            return self.values[0];
        }
        if s >= *k.last().unwrap() {
            return *self.values.last().unwrap();
        }
        // partition_point: first knot > s
        let hi = k.partition_point(|&x| x <= s);
        let (s0, s1) = (k[hi - 1], k[hi]);
        let (v0, v1) = (self.values[hi - 1], self.values[hi]);
        v0 + (v1 - v0) * (s - s0) / (s1 - s0)
    }

    /// Height of the apex knot, i.e. the height of the triple point over the side.
    pub fn apex_value(&self) -> f64 {
        self.eval(self.apex)
    }

    /// Length of the polyline graph.
    pub fn graph_length(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(s, v)| (s[1] - s[0]).hypot(v[1] - v[0]))
            .sum()
    }

    /// Largest absolute slope of any linear piece.
    pub fn lipschitz_constant(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(s, v)| ((v[1] - v[0]) / (s[1] - s[0])).abs())
            .fold(0.0, f64::max)
    }

    /// Exact integral of |self - other| over the common domain (both are
    /// piecewise linear; integrate on the merged knot set, splitting at sign
    /// changes of the difference).
    pub fn l1_distance(&self, other: &SideFunction) -> f64 {
        let mut merged: Vec<f64> = self.knots.iter().chain(other.knots.iter()).copied().collect();
        merged.sort_by(f64::total_cmp);
        merged.dedup();
        let mut acc = 0.0;
        for w in merged.windows(2) {
            let (a, b) = (w[0], w[1]);
            let da = self.eval(a) - other.eval(a);
            let db = self.eval(b) - other.eval(b);
            acc += segment_abs_integral(a, b, da, db);
        }
        acc
    }

    /// Exact integral of sqrt(1 + phi'^2), i.e. graph_length for PL functions.
    pub fn graph_arclength_integral(&self) -> f64 {
        self.graph_length()
    }

    /// Mollification with pinned values at 0, apex, and l: convolve the
    /// zero-extension with a smooth bump of radius sigma/2, then rescale the
    /// argument to restore the zero endpoints and the values to restore the
    /// apex height. Returns a densely sampled piecewise-linear approximation.
    pub fn mollify(&self, sigma: f64, samples: usize) -> Result<SideFunction, GeometryError> {
        if sigma <= 0.0 {
            return Err(GeometryError::BadSideFunction("mollification radius must be positive"));
        }
        let ell = self.domain_length();
        let w = self.apex;
        let p = self.apex_value();
        let n = samples.max(64);
        if p > 0.0 {
            let smoothed = |s: f64| -> f64 {
                let arg = (ell + 2.0 * sigma) / ell * s - sigma;
                mollify_at(self, arg, sigma)
            };
            let c = smoothed(w) - p;
            let scale = p / (p + c);
            let mut knots = Vec::with_capacity(n + 2);
            for m in 0..=n {
                knots.push(ell * m as f64 / n as f64);
            }
            knots.push(w);
            knots.sort_by(f64::total_cmp);
            knots.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * ell);
            let values: Vec<f64> = knots.iter().map(|&s| (scale * smoothed(s)).max(0.0)).collect();
            let mut out = SideFunction::new(self.side, knots, values, w)?;
            pin(&mut out, w, p);
            Ok(out)
        } else {
            // Apex height zero: mollify [0,w] and [w,l] separately and glue;
            // both halves vanish near w so the glue is smooth.
            let halves = [(0.0, w), (w, ell)];
            let mut knots = Vec::new();
            let mut values = Vec::new();
            for (lo, hi) in halves {
                let len = hi - lo;
                if len <= 0.0 {
                    continue;
                }
                let restricted = self.restrict(lo, hi);
                let m = (n / 2).max(32);
                for k in 0..=m {
                    let s = lo + len * k as f64 / m as f64;
                    let arg = (len + 2.0 * sigma) / len * (s - lo) - sigma;
                    knots.push(s);
                    values.push(mollify_at(&restricted, arg + lo, sigma).max(0.0));
                }
            }
            let mut keep_k = Vec::new();
            let mut keep_v = Vec::new();
            for (i, &s) in knots.iter().enumerate() {
                if keep_k.last().map_or(true, |&last: &f64| s - last > 1e-13 * ell) {
                    keep_k.push(s);
                    keep_v.push(values[i]);
                }
            }
            let mut out = SideFunction::new(self.side, keep_k, keep_v, w)?;
            pin(&mut out, w, 0.0);
            Ok(out)
        }
    }

    fn restrict(&self, lo: f64, hi: f64) -> SideFunction {
        let mut knots = vec![lo];
        let mut values = vec![self.eval(lo)];
        for (i, &s) in self.knots.iter().enumerate() {
            if s > lo && s < hi {
                knots.push(s);
                values.push(self.values[i]);
            }
        }
        knots.push(hi);
        values.push(self.eval(hi));
        SideFunction { side: self.side, knots, values, apex: self.apex.clamp(lo, hi) }
    }
}

fn pin(f: &mut SideFunction, w: f64, p: f64) {
    let last = f.values.len() - 1;
    f.values[0] = 0.0;
    f.values[last] = 0.0;
    if let Some(i) = f.knots.iter().position(|&s| (s - w).abs() < 1e-12 * f.domain_length().max(1.0)) {
        f.values[i] = p;
    }
}

/// Convolution (eta_sigma * phi0)(x) where phi0 is `f` extended by zero and
/// eta_sigma a C-infinity bump supported on (-sigma/2, sigma/2). Evaluated by
/// Gauss-Legendre quadrature on the bump support.
fn mollify_at(f: &SideFunction, x: f64, sigma: f64) -> f64 {
    let r = 0.5 * sigma;
    let ell = f.domain_length();
    let phi0 = |s: f64| if s < 0.0 || s > ell { 0.0 } else { f.eval(s) };
    // normalization of exp(-1/(1-u^2)) on (-1,1)
    const NORM: f64 = 0.443_993_816_168_079_44;
    let kernel = |u: f64| {
        if u.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - u * u)).exp() / NORM
        }
    };
    // 64-point composite Gauss on [-1, 1] in the kernel variable
    let (nodes, weights) = gauss_legendre_32();
    let mut acc = 0.0;
    for half in 0..2 {
        let (a, b) = if half == 0 { (-1.0, 0.0) } else { (0.0, 1.0) };
        let mid = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        for k in 0..nodes.len() {
            let u = mid + hw * nodes[k];
            acc += hw * weights[k] * kernel(u) * phi0(x - r * u);
        }
    }
    acc
}

/// Integral of |linear interpolant| over [a, b] given endpoint values.
pub(crate) fn segment_abs_integral(a: f64, b: f64, va: f64, vb: f64) -> f64 {
    let len = b - a;
    if len <= 0.0 {
        return 0.0;
    }
    if va * vb >= 0.0 {
        0.5 * (va.abs() + vb.abs()) * len
    } else {
        // sign change at the root
        let t = va / (va - vb);
        0.5 * va.abs() * (t * len) + 0.5 * vb.abs() * ((1.0 - t) * len)
    }
}

pub(crate) fn gauss_legendre_32() -> (&'static [f64; 16], &'static [f64; 16]) {
    // 32-point rule, symmetric: positive nodes and weights (used mirrored).
    // Standard Abramowitz-Stegun values.
    const N: [f64; 16] = [
        0.048307665687738316,
        0.144471961582796493,
        0.239287362252137075,
        0.331868602282127650,
        0.421351276130635345,
        0.506899908932229390,
        0.587715757240762329,
        0.663044266930215201,
        0.732182118740289680,
        0.794483795967942407,
        0.849367613732569970,
        0.896321155766052124,
        0.934906075937739689,
        0.964762255587506430,
        0.985611511545268335,
        0.997263861849481564,
    ];
    const W: [f64; 16] = [
        0.096540088514727801,
        0.095638720079274859,
        0.093844399080804566,
        0.091173878695763885,
        0.087652093004403811,
        0.083311924226946755,
        0.078193895787070306,
        0.072345794108848506,
        0.065822222776361847,
        0.058684093478535547,
        0.050998059262376176,
        0.042835898022226681,
        0.034273862913021433,
        0.025392065309262059,
        0.016274394730905671,
        0.007018610009470097,
    ];
    (&N, &W)
}

/// Piecewise-linear interpolation of a (densely sampled) side function on a
/// reduced knot budget: n pieces, n+1 knots always including 0, the apex, and l.
/// Knots are snapped to input sample abscissae so the output vertices lie on
/// the input graph; the polyline length can then never exceed the input length.
pub fn piecewise_linear_approximate(input: &SideFunction, n: usize) -> Result<SideFunction, GeometryError> {
    if n < 2 {
        return Err(GeometryError::KnotBudgetTooSmall { budget: n });
    }
    if input.knot_count() <= n + 1 {
        return Ok(input.clone());
    }
    let ell = input.domain_length();
    let w = input.apex.clamp(0.0, ell);

    // split the budget proportionally between [0, w] and [w, l]
    let mut targets: Vec<f64> = Vec::with_capacity(n + 1);
    let left_frac = w / ell;
    let mut n_left = (n as f64 * left_frac).round() as usize;
    if w > 0.0 {
        n_left = n_left.max(1);
    }
    if w < ell {
        n_left = n_left.min(n - 1);
    } else {
        n_left = n;
    }
    let n_right = n - n_left;
    for k in 0..=n_left {
        targets.push(w * k as f64 / n_left.max(1) as f64);
    }
    for k in 1..=n_right {
        targets.push(w + (ell - w) * k as f64 / n_right.max(1) as f64);
    }

    // snap every target to the nearest input knot; keep 0, w, l exactly
    let mut knots: Vec<f64> = targets
        .iter()
        .map(|&t| nearest_knot(input.knots(), t))
        .collect();
    knots.push(0.0);
    knots.push(ell);
    if input.knots().iter().any(|&s| (s - w).abs() < 1e-14 * ell.max(1.0)) || (0.0..=ell).contains(&w) {
        knots.push(nearest_knot(input.knots(), w));
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let values: Vec<f64> = knots.iter().map(|&s| input.eval(s)).collect();
    SideFunction::new(input.side, knots, values, w)
}

fn nearest_knot(knots: &[f64], t: f64) -> f64 {
    let hi = knots.partition_point(|&x| x < t);
    if hi == 0 {
        knots[0]
    } else if hi == knots.len() {
        *knots.last().unwrap()
    } else if (knots[hi] - t).abs() < (t - knots[hi - 1]).abs() {
        knots[hi]
    } else {
        knots[hi - 1]
    }
}
