//! Quasi-time integration on the tent cylinder.
//!
//! The tent ODE is d/dt(M U) = A U on quasi-time (0,1), with A constant and
//! M affine in quasi-time. The structure-aware Taylor (SAT) scheme exploits
//! that structure: on each of m subintervals it builds degree-q Taylor
//! polynomials of Y = M U whose coefficients follow from the Leibniz rule,
//!
//!   Y_{i,n} = A U_{i,n-1},            1 <= n <= q,
//!   M_i U_{i,n} = Y_{i,n} - n M' U_{i,n-1},   1 <= n <= q-1,
//!
//! then advances by Horner evaluation at the subinterval end. The classical
//! Runge-Kutta comparator integrates the substituted form
//! dY/dt = A M(t)^{-1} Y with exact mass solves at the stage times.

use crate::error::{Error, Result};

/// Operators of one tent system. All methods are pure; implementations must
/// be safe to call concurrently from several tents.
pub trait TentOperators {
    fn n_dofs(&self) -> usize;
    /// out = A u (volume + facet terms, weighted by the local tent height).
    fn apply_a(&self, u: &[f64], out: &mut [f64]);
    /// out = M(quasi_time) u.
    fn apply_m(&self, quasi_time: f64, u: &[f64], out: &mut [f64]);
    /// out = M' u, the quasi-time derivative of the mass operator.
    fn apply_m_prime(&self, u: &[f64], out: &mut [f64]);
    /// Solve M(quasi_time) out = y.
    fn solve_m(&self, quasi_time: f64, y: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Taylor coefficients of one subinterval, exposed for verification.
#[derive(Debug, Clone)]
pub struct TaylorState {
    pub subinterval: usize,
    pub quasi_time: f64,
    /// Y_{i,0..q}.
    pub y_coeffs: Vec<Vec<f64>>,
    /// U_{i,0..q-1}.
    pub u_coeffs: Vec<Vec<f64>>,
}

fn check_stage_params(stages: usize, subintervals: usize) -> Result<()> {
    if stages < 1 {
        return Err(Error::invalid("SAT needs at least one stage"));
    }
    if subintervals < 1 {
        return Err(Error::invalid("need at least one subinterval"));
    }
    Ok(())
}

fn sat_propagate_impl<O: TentOperators>(
    ops: &O,
    y0: &[f64],
    stages: usize,
    subintervals: usize,
    mut trace: Option<&mut Vec<TaylorState>>,
) -> Result<Vec<f64>> {
    check_stage_params(stages, subintervals)?;
    let n = ops.n_dofs();
    if y0.len() != n {
        return Err(Error::invalid("initial vector length mismatch"));
    }
    let q = stages;
    let h = 1.0 / subintervals as f64;
    let mut y: Vec<Vec<f64>> = vec![vec![0.0; n]; q + 1];
    let mut u_prev = vec![0.0; n];
    let mut u_next = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    y[0].copy_from_slice(y0);
    for i in 0..subintervals {
        let ti = i as f64 * h;
        ops.solve_m(ti, &y[0], &mut u_prev)?;
        let mut us: Vec<Vec<f64>> = Vec::new();
        if trace.is_some() {
            us.push(u_prev.clone());
        }
        for order in 1..=q {
            ops.apply_a(&u_prev, &mut y[order]);
            if order < q {
                ops.apply_m_prime(&u_prev, &mut rhs);
                let f = order as f64;
                for k in 0..n {
                    rhs[k] = y[order][k] - f * rhs[k];
                }
                ops.solve_m(ti, &rhs, &mut u_next)?;
                std::mem::swap(&mut u_prev, &mut u_next);
                if trace.is_some() {
                    us.push(u_prev.clone());
                }
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(TaylorState {
                subinterval: i,
                quasi_time: ti,
                y_coeffs: y.clone(),
                u_coeffs: us,
            });
        }
        // Horner: acc = Y_q; acc = Y_n + h/(n+1) acc gives sum h^n/n! Y_n
        rhs.copy_from_slice(&y[q]);
        for order in (0..q).rev() {
            let f = h / (order as f64 + 1.0);
            for k in 0..n {
                rhs[k] = y[order][k] + f * rhs[k];
            }
        }
        y[0].copy_from_slice(&rhs);
    }
    Ok(y.swap_remove(0))
}

/// q-stage SAT propagation of Y = M U from quasi-time 0 to 1.
pub fn sat_propagate<O: TentOperators>(
    ops: &O,
    y0: &[f64],
    stages: usize,
    subintervals: usize,
) -> Result<Vec<f64>> {
    sat_propagate_impl(ops, y0, stages, subintervals, None)
}

/// SAT propagation that also returns all Taylor coefficients, for
/// verification of the coefficient recursion.
pub fn sat_propagate_traced<O: TentOperators>(
    ops: &O,
    y0: &[f64],
    stages: usize,
    subintervals: usize,
) -> Result<(Vec<f64>, Vec<TaylorState>)> {
    let mut trace = Vec::new();
    let y = sat_propagate_impl(ops, y0, stages, subintervals, Some(&mut trace))?;
    Ok((y, trace))
}

/// Classical 4-stage Runge-Kutta on dY/dt = A M(t)^{-1} Y with m steps.
pub fn rk4_propagate<O: TentOperators>(ops: &O, y0: &[f64], subintervals: usize) -> Result<Vec<f64>> {
    if subintervals < 1 {
        return Err(Error::invalid("need at least one subinterval"));
    }
    let n = ops.n_dofs();
    if y0.len() != n {
        return Err(Error::invalid("initial vector length mismatch"));
    }
    let h = 1.0 / subintervals as f64;
    let mut y = y0.to_vec();
    let mut u = vec![0.0; n];
    let mut k = vec![vec![0.0; n]; 4];
    let mut ytmp = vec![0.0; n];
    for i in 0..subintervals {
        let t = i as f64 * h;
        let mut eval = |t_stage: f64, y_in: &[f64], out: &mut Vec<f64>| -> Result<()> {
            ops.solve_m(t_stage, y_in, &mut u)?;
            ops.apply_a(&u, out);
            Ok(())
        };
        let (k0, rest) = k.split_at_mut(1);
        let (k1, rest) = rest.split_at_mut(1);
        let (k2, k3) = rest.split_at_mut(1);
        eval(t, &y, &mut k0[0])?;
        for j in 0..n {
            ytmp[j] = y[j] + 0.5 * h * k0[0][j];
        }
        eval(t + 0.5 * h, &ytmp, &mut k1[0])?;
        for j in 0..n {
            ytmp[j] = y[j] + 0.5 * h * k1[0][j];
        }
        eval(t + 0.5 * h, &ytmp, &mut k2[0])?;
        for j in 0..n {
            ytmp[j] = y[j] + h * k2[0][j];
        }
        eval(t + h, &ytmp, &mut k3[0])?;
        for j in 0..n {
            y[j] += h / 6.0 * (k0[0][j] + 2.0 * k1[0][j] + 2.0 * k2[0][j] + k3[0][j]);
        }
    }
    Ok(y)
}

/// n-th Taylor coefficient U^{(n)}(0) of the tent solution, computed from
/// the coefficient recursion at quasi-time 0. Requires n <= stages - 1 to
/// match a q-stage propagation.
pub fn taylor_order_probe<O: TentOperators>(
    ops: &O,
    u0: &[f64],
    order: usize,
    stages: usize,
) -> Result<Vec<f64>> {
    check_stage_params(stages, 1)?;
    if order + 1 > stages {
        return Err(Error::invalid(format!(
            "derivative order {order} out of range for {stages}-stage scheme"
        )));
    }
    let n = ops.n_dofs();
    let mut u_prev = u0.to_vec();
    let mut y = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut u_next = vec![0.0; n];
    for k in 1..=order {
        ops.apply_a(&u_prev, &mut y);
        ops.apply_m_prime(&u_prev, &mut rhs);
        let f = k as f64;
        for j in 0..n {
            rhs[j] = y[j] - f * rhs[j];
        }
        ops.solve_m(0.0, &rhs, &mut u_next)?;
        std::mem::swap(&mut u_prev, &mut u_next);
    }
    Ok(u_prev)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Scalar system M(t) = m0 + mp t, A = a, as an independent oracle bed.
    pub(crate) struct ScalarSystem {
        pub m0: f64,
        pub mp: f64,
        pub a: f64,
    }

    impl TentOperators for ScalarSystem {
        fn n_dofs(&self) -> usize {
            1
        }
        fn apply_a(&self, u: &[f64], out: &mut [f64]) {
            out[0] = self.a * u[0];
        }
        fn apply_m(&self, t: f64, u: &[f64], out: &mut [f64]) {
            out[0] = (self.m0 + self.mp * t) * u[0];
        }
        fn apply_m_prime(&self, u: &[f64], out: &mut [f64]) {
            out[0] = self.mp * u[0];
        }
        fn solve_m(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
            let m = self.m0 + self.mp * t;
            if m.abs() < 1e-300 {
                return Err(Error::SingularMass {
                    element: 0,
                    quasi_time: t,
                    det: m,
                });
            }
            out[0] = y[0] / m;
            Ok(())
        }
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn sat_reproduces_truncated_exponential() {
        // M = 1, A = a, m = 1: the recursion collapses to the Taylor series
        // of exp(a) truncated at degree q
        let a = 0.7;
        let ops = ScalarSystem {
            m0: 1.0,
            mp: 0.0,
            a,
        };
        for q in 1..=6 {
            let y = sat_propagate(&ops, &[1.0], q, 1).unwrap();
            let expect: f64 = (0..=q).map(|n| a.powi(n as i32) / factorial(n)).sum();
            assert!((y[0] - expect).abs() < 1e-13, "q={q}: {} vs {expect}", y[0]);
        }
    }

    #[test]
    fn sat_handles_affine_mass_with_zero_a() {
        // M = 1 + t, A = 0: Y stays constant and the U coefficients follow
        // the Leibniz chain U_n = (-1)^n n! U_0
        let ops = ScalarSystem {
            m0: 1.0,
            mp: 1.0,
            a: 0.0,
        };
        for q in 2..=5 {
            let (y, trace) = sat_propagate_traced(&ops, &[3.0], q, 1).unwrap();
            assert!((y[0] - 3.0).abs() < 1e-13);
            let us = &trace[0].u_coeffs;
            for (n, u) in us.iter().enumerate() {
                let expect = (-1.0_f64).powi(n as i32) * factorial(n) * us[0][0];
                assert!((u[0] - expect).abs() < 1e-13 * expect.abs().max(1.0));
            }
        }
        // arbitrary affine M, any q and m: exact, since dY/dt = 0
        let ops = ScalarSystem {
            m0: 2.0,
            mp: -0.5,
            a: 0.0,
        };
        for (q, m) in [(1, 1), (3, 4), (2, 7)] {
            let y = sat_propagate(&ops, &[-1.25], q, m).unwrap();
            assert_eq!(y[0], -1.25);
        }
    }

    #[test]
    fn sat_exact_on_manufactured_polynomial_solutions() {
        // M = 1 + t, A = 1: exact solution U = 1, Y = 1 + t (degree 1)
        let ops = ScalarSystem {
            m0: 1.0,
            mp: 1.0,
            a: 1.0,
        };
        for (q, m) in [(1, 1), (2, 3), (4, 2)] {
            let y = sat_propagate(&ops, &[1.0], q, m).unwrap();
            assert!((y[0] - 2.0).abs() < 1e-14, "q={q} m={m}: {}", y[0]);
        }
        // M = 1 + t, A = 2: exact solution U = 1 + t, Y = (1 + t)^2
        let ops = ScalarSystem {
            m0: 1.0,
            mp: 1.0,
            a: 2.0,
        };
        for (q, m) in [(2, 1), (3, 2), (5, 3)] {
            let y = sat_propagate(&ops, &[1.0], q, m).unwrap();
            assert!((y[0] - 4.0).abs() < 1e-13, "q={q} m={m}: {}", y[0]);
        }
    }

    #[test]
    fn sat_converges_at_stage_order() {
        // M = 1 + t, A = -3: exact Y(1) = Y0 / 8, no polynomial shortcut
        let ops = ScalarSystem {
            m0: 1.0,
            mp: 1.0,
            a: -3.0,
        };
        let exact = 1.0 / 8.0;
        for q in 2..=4 {
            let e1 = (sat_propagate(&ops, &[1.0], q, 8).unwrap()[0] - exact).abs();
            let e2 = (sat_propagate(&ops, &[1.0], q, 16).unwrap()[0] - exact).abs();
            let rate = (e1 / e2).log2();
            assert!(
                rate > q as f64 - 0.4,
                "q={q}: observed rate {rate} (errors {e1:e}, {e2:e})"
            );
        }
    }

    #[test]
    fn rk4_matches_classical_stability_polynomial() {
        let a = 0.9;
        let ops = ScalarSystem {
            m0: 1.0,
            mp: 0.0,
            a,
        };
        let y = rk4_propagate(&ops, &[1.0], 1).unwrap();
        let expect = 1.0 + a + a * a / 2.0 + a * a * a / 6.0 + a.powi(4) / 24.0;
        assert!((y[0] - expect).abs() < 1e-14);
        // A = 0 returns the input exactly
        let ops0 = ScalarSystem {
            m0: 1.0,
            mp: 0.7,
            a: 0.0,
        };
        let y0 = rk4_propagate(&ops0, &[2.5], 3).unwrap();
        assert_eq!(y0[0], 2.5);
    }

    #[test]
    fn rk4_self_convergence_is_fourth_order() {
        let ops = ScalarSystem {
            m0: 1.0,
            mp: 1.0,
            a: -3.0,
        };
        let exact = 1.0 / 8.0;
        let e1 = (rk4_propagate(&ops, &[1.0], 8).unwrap()[0] - exact).abs();
        let e2 = (rk4_propagate(&ops, &[1.0], 16).unwrap()[0] - exact).abs();
        let rate = (e1 / e2).log2();
        assert!(rate > 3.6, "observed rate {rate}");
    }

    #[test]
    fn recursion_validity_recheck() {
        let ops = ScalarSystem {
            m0: 1.0,
            mp: 0.4,
            a: -1.3,
        };
        let (_, trace) = sat_propagate_traced(&ops, &[1.0], 4, 3).unwrap();
        for state in &trace {
            for n in 1..state.y_coeffs.len() {
                let u = &state.u_coeffs[n - 1];
                let mut au = vec![0.0; 1];
                ops.apply_a(u, &mut au);
                let y = state.y_coeffs[n][0];
                assert!(
                    (y - au[0]).abs() <= 1e-13 * y.abs().max(1.0),
                    "Y_{{i,{n}}} mismatch"
                );
            }
        }
    }

    #[test]
    fn propagation_is_deterministic() {
        let ops = ScalarSystem {
            m0: 1.3,
            mp: -0.2,
            a: 0.8,
        };
        let a = sat_propagate(&ops, &[0.37], 3, 5).unwrap();
        let b = sat_propagate(&ops, &[0.37], 3, 5).unwrap();
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        let a = rk4_propagate(&ops, &[0.37], 5).unwrap();
        let b = rk4_propagate(&ops, &[0.37], 5).unwrap();
        assert_eq!(a[0].to_bits(), b[0].to_bits());
    }

    #[test]
    fn taylor_probe_orders() {
        let ops = ScalarSystem {
            m0: 1.0,
            mp: 1.0,
            a: 0.0,
        };
        // order 0 returns the input
        let u = taylor_order_probe(&ops, &[2.0], 0, 3).unwrap();
        assert_eq!(u[0], 2.0);
        // with A = 0 the Leibniz chain gives U_n = (-1)^n n! U_0
        let u = taylor_order_probe(&ops, &[2.0], 2, 3).unwrap();
        assert!((u[0] - 4.0).abs() < 1e-13);
        // with M' = 0 and A = 0 all higher coefficients vanish exactly
        let flat = ScalarSystem {
            m0: 2.0,
            mp: 0.0,
            a: 0.0,
        };
        let u = taylor_order_probe(&flat, &[2.0], 2, 3).unwrap();
        assert_eq!(u[0], 0.0);
        // out of range
        assert!(taylor_order_probe(&ops, &[1.0], 3, 3).is_err());
    }

    #[test]
    fn singular_mass_propagates() {
        let ops = ScalarSystem {
            m0: 1.0,
            mp: -1.0,
            a: 1.0,
        };
        // M(1) = 0: the final subinterval start at t = (m-1)/m stays
        // regular, but solving at t = 1 fails
        let mut out = vec![0.0];
        assert!(ops.solve_m(1.0, &[1.0], &mut out).is_err());
    }
}
