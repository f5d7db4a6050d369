use super::Scalar;
use crate::error::{Error, Result};

/// `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

/// Nodes and weights by Newton iteration on the three-term recurrence.
pub fn gauss_legendre<T: Scalar>(n: usize) -> GaussLegendre<T> {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::from_usize(n).unwrap();
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let fi = T::from_usize(i).unwrap();
        let mut x = (T::PI() * (fi + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::lit(2.0) {
                let (_, d) = legendre_and_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    GaussLegendre { nodes, weights }
}

fn legendre_and_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize(k).unwrap();
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf = T::from_usize(n).unwrap();
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

impl<T: Scalar> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        gauss_legendre(n)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> T {
        self.mapped(a, b).fold(T::zero(), |s, (x, w)| s + w * f(x))
    }
}

/// Result of an adaptive quadrature with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
}

/// Globally adaptive Gauss–Legendre: each panel is estimated with a 10-point
/// and a 21-point rule and the worst panel is bisected until the summed
/// estimate drops below `tol·max(1, |I|)`.
pub fn integrate_adaptive<T, F>(mut f: F, a: T, b: T, tol: T) -> Result<QuadResult<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error: T::zero(),
        });
    }
    let lo_rule = gauss_legendre::<T>(10);
    let hi_rule = gauss_legendre::<T>(21);
    let mut panel = |a: T, b: T| -> (T, T, T, T) {
        let i_lo = lo_rule.integrate(&mut f, a, b);
        let i_hi = hi_rule.integrate(&mut f, a, b);
        (a, b, i_hi, (i_hi - i_lo).abs())
    };
    let mut panels = vec![panel(a, b)];
    for _ in 0..2000 {
        let total: T = panels.iter().fold(T::zero(), |s, p| s + p.2);
        let err: T = panels.iter().fold(T::zero(), |s, p| s + p.3);
        if !total.is_finite() {
            return Err(Error::NonFinite("adaptive quadrature".into()));
        }
        if err <= tol * total.abs().max(T::one()) {
            return Ok(QuadResult {
                value: total,
                error: err,
            });
        }
        let (idx, _) =
            panels
                .iter()
                .enumerate()
                .fold((0, T::neg_infinity()), |(bi, be), (i, p)| {
                    if p.3 > be {
                        (i, p.3)
                    } else {
                        (bi, be)
                    }
                });
        let (pa, pb, _, _) = panels.swap_remove(idx);
        let mid = (pa + pb) * T::lit(0.5);
        panels.push(panel(pa, mid));
        panels.push(panel(mid, pb));
    }
    let total: T = panels.iter().fold(T::zero(), |s, p| s + p.2);
    let err: T = panels.iter().fold(T::zero(), |s, p| s + p.3);
    Err(Error::QuadratureNotConverged {
        estimate: (err / total.abs().max(T::min_positive_value())).as_f64(),
    })
}

/// Quadrature grid: strictly increasing nodes with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    /// Interval covered by the weights.
    lo: T,
    hi: T,
}

impl<T: Scalar> Grid1D<T> {
    /// Composite Gauss–Legendre grid with `order` points on each panel
    /// `[edges[i], edges[i+1]]`.
    pub fn from_panels(edges: &[T], order: usize) -> Result<Self> {
        if edges.len() < 2 || edges[0] < T::zero() || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid(
                "panel edges must be non-negative and increasing".into(),
            ));
        }
        let gl = gauss_legendre::<T>(order);
        let mut nodes = Vec::with_capacity((edges.len() - 1) * order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in edges.windows(2) {
            for (x, wt) in gl.mapped(w[0], w[1]) {
                nodes.push(x);
                weights.push(wt);
            }
        }
        Ok(Self {
            nodes,
            weights,
            lo: edges[0],
            hi: *edges.last().unwrap(),
        })
    }

    /// Panels from 0 to `r_max`: one panel on `[0, r_min]`, then `panels`
    /// logarithmically spaced panels up to `r_max`.
    pub fn log_panels(r_min: T, r_max: T, panels: usize, order: usize) -> Result<Self> {
        if !(r_min > T::zero() && r_max > r_min) || panels == 0 {
            return Err(Error::Invalid("log_panels needs 0 < r_min < r_max".into()));
        }
        let mut edges = vec![T::zero()];
        edges.extend(super::logspace(r_min, r_max, panels + 1));
        Self::from_panels(&edges, order)
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Interval `[lo, hi]` integrated by the weights.
    pub fn span(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    /// Σ w_i f_i for node values `f`.
    pub fn integrate(&self, values: &[T]) -> T {
        assert_eq!(values.len(), self.nodes.len());
        self.weights
            .iter()
            .zip(values)
            .fold(T::zero(), |s, (w, f)| s + *w * *f)
    }

    pub fn integrate_fn<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |s, (&x, &w)| s + w * f(x))
    }

    /// Checks the documented invariants.
    pub fn validate(&self) -> Result<()> {
        let increasing = self.nodes.windows(2).all(|w| w[1] > w[0]);
        let positive = self.weights.iter().all(|&w| w > T::zero());
        let first_ok = self.nodes.first().is_some_and(|&x| x >= T::zero());
        let len = self.hi - self.lo;
        let sum = self.weights.iter().fold(T::zero(), |s, &w| s + w);
        let exact = ((sum - len) / len).abs() < T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        if increasing && positive && first_ok && exact {
            Ok(())
        } else {
            Err(Error::Invalid("grid invariants violated".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_exact_for_design_degree() {
        for n in [1usize, 2, 5, 10, 21] {
            let gl = gauss_legendre::<f64>(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let got = gl.integrate(|x| x.powi(deg as i32), -1.0, 1.0);
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate_adaptive(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-10).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn log_grid_invariants() {
        let g = Grid1D::<f64>::log_panels(1e-6, 1e4, 400, 4).unwrap();
        g.validate().unwrap();
        let cubic = g.integrate_fn(|x| x * x * x);
        assert_relative_eq!(cubic, 1e16 / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn f32_rule() {
        let gl = gauss_legendre::<f32>(8);
        let v = gl.integrate(|x| x.exp(), 0.0, 1.0);
        assert!((v - (1f32.exp() - 1.0)).abs() < 1e-5);
    }
}
