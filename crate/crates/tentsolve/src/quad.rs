//! Gauss quadrature on the reference interval [0,1] and the reference
//! triangle {x >= 0, y >= 0, x + y <= 1}.
//!
//! Triangle rules are collapsed tensor products of Gauss-Legendre rules, so
//! arbitrary exactness degrees are available without hardcoded point tables.

/// Value and derivative of the Legendre polynomial P_n at x.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut pm, mut p) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * pm) / (kf + 1.0);
        pm = p;
        p = next;
    }
    // derivative from the standard identity on (-1, 1)
    let dp = n as f64 * (x * p - pm) / (x * x - 1.0);
    (p, dp)
}

/// Jacobi polynomial P_n^{(alpha, beta)} at x.
pub fn jacobi(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut pm = 1.0;
    let mut p = (alpha + 1.0) + (alpha + beta + 2.0) * 0.5 * (x - 1.0);
    for k in 1..n {
        let kf = k as f64;
        let a2b = alpha + beta;
        let c1 = 2.0 * (kf + 1.0) * (kf + a2b + 1.0) * (2.0 * kf + a2b);
        let c2 = (2.0 * kf + a2b + 1.0) * (alpha * alpha - beta * beta);
        let c3 = (2.0 * kf + a2b) * (2.0 * kf + a2b + 1.0) * (2.0 * kf + a2b + 2.0);
        let c4 = 2.0 * (kf + alpha) * (kf + beta) * (2.0 * kf + a2b + 2.0);
        let next = ((c2 + c3 * x) * p - c4 * pm) / c1;
        pm = p;
        p = next;
    }
    p
}

/// Derivative of P_n^{(alpha, beta)} at x.
pub fn jacobi_derivative(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    0.5 * (n as f64 + alpha + beta + 1.0) * jacobi(n - 1, alpha + 1.0, beta + 1.0, x)
}

/// Gauss-Legendre nodes and weights on [-1, 1], exact to degree 2n-1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, then Newton
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Quadrature rule in reference coordinates. Weights include the reference
/// measure: they sum to 1 on the interval and 1/2 on the triangle.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Rule on [0, 1] exact for polynomials up to `degree`.
pub fn interval_rule(degree: usize) -> QuadRule {
    let n = degree / 2 + 1;
    let (xs, ws) = gauss_legendre(n);
    QuadRule {
        points: xs.iter().map(|&x| [0.5 * (x + 1.0), 0.0]).collect(),
        weights: ws.iter().map(|&w| 0.5 * w).collect(),
    }
}

/// Rule on the reference triangle exact for polynomials up to `degree`.
///
/// Built from the Duffy-type collapse x = (1+a)(1-b)/4 rescaled, which turns
/// degree-d polynomials into degree <= d (in a) and d+1 (in b) integrands.
pub fn triangle_rule(degree: usize) -> QuadRule {
    let na = degree / 2 + 1;
    let nb = (degree + 1) / 2 + 1;
    let (xa, wa) = gauss_legendre(na);
    let (xb, wb) = gauss_legendre(nb);
    let mut points = Vec::with_capacity(na * nb);
    let mut weights = Vec::with_capacity(na * nb);
    for (&b, &wbv) in xb.iter().zip(&wb) {
        let y = 0.5 * (1.0 + b);
        for (&a, &wav) in xa.iter().zip(&wa) {
            let x = 0.5 * (1.0 + a) * (1.0 - y);
            points.push([x, y]);
            weights.push(wav * wbv * (1.0 - b) / 8.0);
        }
    }
    QuadRule { points, weights }
}
