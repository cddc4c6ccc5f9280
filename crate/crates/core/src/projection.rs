//! Truncated Jacobi projection `u_I` of a smooth function.
//!
//! On every element `u_I` is the Hermite cubic interpolant of `u` plus the
//! bubble expansion of `u - H_3 u` truncated at degree `k`. Since
//! `d²/ds² J_n^{-2,-2} = c_n L_{n-2}`, the bubble coefficients follow from the
//! Legendre coefficients of `u''`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::c1space::{C1Function, DofLayout, SpaceConfig};
use crate::error::{invalid, Error, Result};
use crate::mesh::Mesh1D;
use crate::orthopoly::{cn, gauss_rule, kappa, legendre_table, JacobiIndex, QuadratureRule};

/// Gauss points used for the Legendre moments of `u''`.
pub const COEFFICIENT_QUAD_POINTS: usize = 24;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function given together with its first two derivatives.
#[derive(Clone)]
pub struct SmoothFunction {
    value: ScalarFn,
    d1: ScalarFn,
    d2: ScalarFn,
}

impl fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SmoothFunction { .. }")
    }
}

impl SmoothFunction {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn d1(&self, x: f64) -> f64 {
        (self.d1)(x)
    }

    pub fn d2(&self, x: f64) -> f64 {
        (self.d2)(x)
    }

    /// Derivative of order `d` (0..=2).
    pub fn eval(&self, x: f64, d: usize) -> f64 {
        match d {
            0 => self.value(x),
            1 => self.d1(x),
            _ => self.d2(x),
        }
    }

    /// Checks `d1`, `d2` against central differences at `samples` interior points.
    pub fn check_consistency(&self, a: f64, b: f64, samples: usize) -> Result<()> {
        let step = 1e-5 * (b - a);
        for i in 0..samples {
            let x = a + (b - a) * (i as f64 + 0.5) / samples as f64;
            let fd1 = (self.value(x + step) - self.value(x - step)) / (2.0 * step);
            let fd2 = (self.d1(x + step) - self.d1(x - step)) / (2.0 * step);
            for (name, exact, fd) in [("d1", self.d1(x), fd1), ("d2", self.d2(x), fd2)] {
                if (exact - fd).abs() > 1e-6 * (1.0 + exact.abs()) {
                    return invalid(format!(
                        "{name} inconsistent at x = {x}: analytic {exact}, difference {fd}"
                    ));
                }
            }
        }
        Ok(())
    }
}

fn coefficient_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_rule(COEFFICIENT_QUAD_POINTS).expect("valid point count"))
}

fn check_element(mesh: &Mesh1D, e: usize) -> Result<()> {
    if e >= mesh.n_elements() {
        return invalid(format!("element {e} out of range for {} elements", mesh.n_elements()));
    }
    Ok(())
}

/// Hermite data `(u(x_l), u'(x_l), u(x_r), u'(x_r))` of element `e`.
pub fn hermite_h3(u: &SmoothFunction, mesh: &Mesh1D, e: usize) -> Result<[f64; 4]> {
    check_element(mesh, e)?;
    let (xl, xr) = mesh.element(e);
    Ok([u.value(xl), u.d1(xl), u.value(xr), u.d1(xr)])
}

/// Bubble coefficient `u_n` of element `e`:
/// `h² / (4 c_n) · ∫ u'' L_{n-2} / ∫ L_{n-2}²` over the element.
pub fn jacobi_coefficient(u: &SmoothFunction, mesh: &Mesh1D, e: usize, n: usize) -> Result<f64> {
    check_element(mesh, e)?;
    if n < 4 {
        return invalid(format!("bubble degree must be >= 4, got {n}"));
    }
    let rule = coefficient_rule();
    let h = mesh.h(e);
    let moment: f64 = rule
        .iter()
        .map(|(s, w)| {
            let x = mesh.from_reference(e, s);
            w * u.d2(x) * legendre_table(n - 2, s)[n - 2][0]
        })
        .sum::<f64>()
        * 0.5
        * h;
    let norm = 0.5 * h * kappa(n - 2, JacobiIndex::LEGENDRE)?;
    Ok(h * h / (4.0 * cn(n)) * moment / norm)
}

/// All bubble coefficients `u_4..=u_k` of element `e` in one pass.
fn element_coefficients(u: &SmoothFunction, mesh: &Mesh1D, e: usize, k: usize) -> Vec<f64> {
    if k < 4 {
        return Vec::new();
    }
    let rule = coefficient_rule();
    let h = mesh.h(e);
    let mut moments = vec![0.0; k - 3];
    for (s, w) in rule.iter() {
        let x = mesh.from_reference(e, s);
        let leg = legendre_table(k - 2, s);
        let wd2 = w * u.d2(x);
        for (m, n) in moments.iter_mut().zip(4..=k) {
            *m += wd2 * leg[n - 2][0];
        }
    }
    moments
        .into_iter()
        .zip(4..=k)
        .map(|(m, n)| {
            // ∫ L_{n-2}² ds = 2/(2n-3); the element Jacobians h/2 cancel
            let norm = 2.0 / (2.0 * n as f64 - 3.0);
            h * h / (4.0 * cn(n)) * m / norm
        })
        .collect()
}

/// The truncated Jacobi projection of `u` into the degree-`k` C1 space.
pub fn truncated_projection(u: &SmoothFunction, mesh: &Mesh1D, k: usize) -> Result<C1Function> {
    let layout = DofLayout::new(SpaceConfig::new(k)?, mesh.n_elements());
    let mut coeffs = vec![0.0; layout.n_dofs()];
    for (j, &x) in mesh.nodes().iter().enumerate() {
        if let Some(id) = layout.value_id(j) {
            coeffs[id] = u.value(x);
        }
        coeffs[layout.slope_id(j)] = u.d1(x);
    }
    for e in 0..mesh.n_elements() {
        for (&id, c) in layout.bubble_ids(e).iter().zip(element_coefficients(u, mesh, e, k)) {
            coeffs[id] = c;
        }
    }
    let boundary = (u.value(mesh.a()), u.value(mesh.b()));
    C1Function::with_boundary(mesh.clone(), k, coeffs, boundary).map_err(|err| match err {
        Error::InvalidArgument(msg) => Error::InvalidArgument(format!("projection: {msg}")),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, MeshSpec};
    use crate::orthopoly::jacobi_eval;
    use std::f64::consts::PI;

    fn perturbed(n: usize) -> Mesh1D {
        build_mesh(&MeshSpec::Perturbed {
            a: 0.0,
            b: 1.0,
            n,
            amplitude: 0.01,
            seed: 11,
        })
        .unwrap()
    }

    fn uniform(n: usize) -> Mesh1D {
        build_mesh(&MeshSpec::Uniform { a: 0.0, b: 1.0, n }).unwrap()
    }

    fn sine() -> SmoothFunction {
        SmoothFunction::new(
            |x| (PI * x).sin(),
            |x| PI * (PI * x).cos(),
            |x| -PI * PI * (PI * x).sin(),
        )
    }

    fn monomial(p: i32) -> SmoothFunction {
        let pf = p as f64;
        SmoothFunction::new(
            move |x| x.powi(p),
            move |x| pf * x.powi(p - 1),
            move |x| pf * (pf - 1.0) * x.powi(p - 2),
        )
    }

    fn slope(xs: &[f64], ys: &[f64]) -> f64 {
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let n = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
        num / den
    }

    #[test]
    fn consistency_check_catches_wrong_derivative() {
        assert!(sine().check_consistency(0.0, 1.0, 50).is_ok());
        let bad = SmoothFunction::new(|x| x * x, |x| 2.0 * x, |_| 3.0);
        assert!(bad.check_consistency(0.0, 1.0, 10).is_err());
    }

    #[test]
    fn hermite_data_and_cubic_reproduction() {
        let mesh = uniform(4);
        let d = hermite_h3(&sine(), &mesh, 0).unwrap();
        let s4 = (PI / 4.0).sin();
        assert_eq!(d[0], 0.0);
        assert!((d[1] - PI).abs() < 1e-15);
        assert!((d[2] - s4).abs() < 1e-15);
        assert!((d[3] - PI * (PI / 4.0).cos()).abs() < 1e-15);
        assert!(hermite_h3(&sine(), &mesh, 4).is_err());

        let cubic = SmoothFunction::new(|x| 1.0 - 2.0 * x + 0.5 * x * x * x, |x| -2.0 + 1.5 * x * x, |x| 3.0 * x);
        let p = truncated_projection(&cubic, &perturbed(5), 3).unwrap();
        for e in 0..5 {
            let (xl, xr) = p.mesh().element(e);
            for t in 1..=5 {
                let x = xl + (xr - xl) * t as f64 / 6.0;
                assert!((p.eval(x, 0).unwrap() - cubic.value(x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hermite_error_is_fourth_order() {
        let ns = [8.0, 16.0, 32.0, 64.0];
        let errs: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let p = truncated_projection(&sine(), &uniform(n as usize), 3).unwrap();
                (0..=400)
                    .map(|i| {
                        let x = i as f64 / 400.0;
                        (p.eval(x, 0).unwrap() - sine().value(x)).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        let hs: Vec<f64> = ns.iter().map(|n| 1.0 / n).collect();
        let s = slope(&hs, &errs);
        assert!((s - 4.0).abs() < 0.2, "slope {s}");
    }

    #[test]
    fn coefficients_pick_out_single_bubble() {
        let mesh = perturbed(6);
        let e = 2;
        let (xl, xr) = mesh.element(e);
        let h = xr - xl;
        for m in 4..=7 {
            let to_s = move |x: f64| (2.0 * x - xl - xr) / h;
            let u = SmoothFunction::new(
                move |x| jacobi_eval(m, JacobiIndex::BUBBLE, to_s(x), 0).unwrap(),
                move |x| 2.0 / h * jacobi_eval(m, JacobiIndex::BUBBLE, to_s(x), 1).unwrap(),
                move |x| 4.0 / (h * h) * jacobi_eval(m, JacobiIndex::BUBBLE, to_s(x), 2).unwrap(),
            );
            for n in 4..=8 {
                let c = jacobi_coefficient(&u, &mesh, e, n).unwrap();
                let expect = if n == m { 1.0 } else { 0.0 };
                assert!((c - expect).abs() < 1e-11, "m={m} n={n}: {c}");
            }
        }
        assert!(jacobi_coefficient(&sine(), &mesh, 0, 3).is_err());
    }

    #[test]
    fn coefficient_decays_like_h_to_the_n() {
        let u = SmoothFunction::new(f64::exp, f64::exp, f64::exp);
        let ns = [8.0, 16.0, 32.0, 64.0];
        for n in 4..=6 {
            let cs: Vec<f64> = ns
                .iter()
                .map(|&m| jacobi_coefficient(&u, &uniform(m as usize), 0, n).unwrap().abs())
                .collect();
            let hs: Vec<f64> = ns.iter().map(|m| 1.0 / m).collect();
            let s = slope(&hs, &cs);
            assert!((s - n as f64).abs() < 0.2, "n={n} slope {s}");
        }
    }

    #[test]
    fn batched_and_single_coefficients_agree() {
        let mesh = perturbed(5);
        for e in 0..5 {
            let batch = element_coefficients(&sine(), &mesh, e, 7);
            for (n, c) in (4..=7).zip(batch) {
                let single = jacobi_coefficient(&sine(), &mesh, e, n).unwrap();
                assert!((c - single).abs() < 1e-15 + 1e-12 * single.abs());
            }
        }
    }

    #[test]
    fn reproduces_degree_k_polynomials() {
        for k in 3..=7 {
            let u = monomial(k as i32);
            let p = truncated_projection(&u, &perturbed(5), k).unwrap();
            for i in 0..50 {
                let x = crate::mesh::node_uniform(99, i);
                let exact = u.value(x);
                assert!((p.eval(x, 0).unwrap() - exact).abs() < 1e-11 * exact.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn nodal_values_and_slopes_are_exact() {
        let p = truncated_projection(&sine(), &perturbed(16), 3).unwrap();
        for &x in p.mesh().nodes() {
            assert!((p.eval(x, 0).unwrap() - sine().value(x)).abs() < 1e-13);
            assert!((p.eval(x, 1).unwrap() - sine().d1(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn error_is_orthogonal_to_low_degree_tests() {
        let u = SmoothFunction::new(
            |x| (2.0 * x).exp() * (3.0 * x).sin(),
            |x| (2.0 * x).exp() * (2.0 * (3.0 * x).sin() + 3.0 * (3.0 * x).cos()),
            |x| (2.0 * x).exp() * (12.0 * (3.0 * x).cos() - 5.0 * (3.0 * x).sin()),
        );
        let rule = gauss_rule(30).unwrap();
        for k in 3..=6 {
            let mesh = perturbed(6);
            let p = truncated_projection(&u, &mesh, k).unwrap();
            for e in 0..6 {
                let h = mesh.h(e);
                for j in 0..=k - 2 {
                    let mut moments = [0.0; 3];
                    for (s, w) in rule.iter() {
                        let x = mesh.from_reference(e, s);
                        let leg = legendre_table(j, s)[j];
                        let diff = |d: usize| u.eval(x, d) - p.eval_in(e, s, d);
                        let wj = 0.5 * h * w;
                        moments[0] += wj * diff(2) * leg[0];
                        moments[1] += wj * diff(1) * leg[1] * 2.0 / h;
                        moments[2] += wj * diff(0) * leg[2] * 4.0 / (h * h);
                    }
                    for m in moments {
                        assert!(m.abs() < 1e-10 * h, "k={k} e={e} j={j}: {m}");
                    }
                }
            }
        }
    }
}
