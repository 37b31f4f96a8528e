//! Gauss-Legendre quadrature with panel-doubling refinement.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes nodes as Legendre-polynomial roots by Newton iteration from
    /// the Chebyshev initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be at least 1");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (p, d) = legendre_with_derivative(n, x);
                    dp = d;
                    x -= p / d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over `[a, b]` with `panels` equal panels of this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            let half = 0.5 * h;
            let mut acc = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += w * f(mid + half * x);
            }
            total += acc * half;
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Convergence record attached to adaptively refined integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadDiagnostics {
    pub converged: bool,
    pub refinements: u32,
    pub last_rel_delta: f64,
}

impl QuadDiagnostics {
    pub fn merge(self, other: QuadDiagnostics) -> QuadDiagnostics {
        QuadDiagnostics {
            converged: self.converged && other.converged,
            refinements: self.refinements.max(other.refinements),
            last_rel_delta: self.last_rel_delta.max(other.last_rel_delta),
        }
    }
}

/// Refines a panel-doubling integration until two successive refinements
/// agree to `rel_tol` (relative, with an absolute floor for near-zero
/// integrals), or `max_refinements` doublings have been spent.
pub fn refine_to_convergence<F: FnMut(usize) -> f64>(
    initial_panels: usize,
    rel_tol: f64,
    abs_floor: f64,
    max_refinements: u32,
    mut eval: F,
) -> (f64, QuadDiagnostics) {
    let mut panels = initial_panels.max(1);
    let mut value = eval(panels);
    let mut diag = QuadDiagnostics { converged: false, refinements: 0, last_rel_delta: f64::INFINITY };
    for r in 1..=max_refinements {
        panels *= 2;
        let next = eval(panels);
        let delta = (next - value).abs();
        let scale = next.abs().max(abs_floor);
        diag.refinements = r;
        diag.last_rel_delta = delta / scale;
        value = next;
        if delta <= rel_tol * scale {
            diag.converged = true;
            break;
        }
    }
    (value, diag)
}
