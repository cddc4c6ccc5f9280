//! Legendre and Jacobi polynomials on the reference interval `[-1, 1]`.
//!
//! Classical Jacobi polynomials `J_n^{r,l}` (`r, l > -1`) use the standard
//! normalization `J_n^{r,l}(1) = binom(n + r, n)`, so `J_n^{0,0}` is the
//! Legendre polynomial `L_n`. For `r, l` in `{-1, -2}` the family is extended by
//!
//! ```text
//! J_n^{r,l}(s) = (1 - s)^{-r} (1 + s)^{-l} J_{n+r+l}^{-r,-l}(s)
//! ```
//!
//! which gives the boundary bubbles `J_n^{-2,-2}` used by the C1 trial space.
//! All point families (Gauss, Lobatto-type, Jacobi roots) are produced by
//! Golub-Welsch eigenvalues followed by Newton polishing.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

/// Largest point count accepted by [`gauss_rule`].
pub const MAX_GAUSS_POINTS: usize = 64;

/// Jacobi parameter pair `(r, l)` with weight `(1 - s)^r (1 + s)^l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiIndex {
    r: f64,
    l: f64,
}

impl JacobiIndex {
    pub const LEGENDRE: JacobiIndex = JacobiIndex { r: 0.0, l: 0.0 };
    pub const BUBBLE: JacobiIndex = JacobiIndex { r: -2.0, l: -2.0 };

    /// Accepts either a classical pair (`r, l > -1`) or an extended pair with
    /// both entries in `{-1, -2}`.
    pub fn new(r: f64, l: f64) -> Result<Self> {
        let classical = r > -1.0 && l > -1.0 && r.is_finite() && l.is_finite();
        let ext = |v: f64| v == -1.0 || v == -2.0;
        if classical || (ext(r) && ext(l)) {
            Ok(Self { r, l })
        } else {
            invalid(format!("unsupported Jacobi index ({r}, {l})"))
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn is_classical(&self) -> bool {
        self.r > -1.0 && self.l > -1.0
    }

    /// `(1 - s)^r (1 + s)^l`.
    pub fn weight(&self, s: f64) -> f64 {
        (1.0 - s).powf(self.r) * (1.0 + s).powf(self.l)
    }
}

/// `C_n^{r,l}` in `d/ds J_n^{r,l} = C_n^{r,l} J_{n-1}^{r+1,l+1}`.
///
/// The mixed branch is not used by the solvers.
pub fn deriv_coeff(n: usize, r: f64, l: f64) -> f64 {
    let n = n as f64;
    match (r <= -1.0, l <= -1.0) {
        (true, true) => -2.0 * (n + r + l + 1.0),
        (true, false) | (false, true) => -n,
        (false, false) => 0.5 * (n + r + l + 1.0),
    }
}

/// `c_n = 4 (n - 3) (n - 2)`, the factor in `d²/ds² J_n^{-2,-2} = c_n L_{n-2}`.
pub fn cn(n: usize) -> f64 {
    let n = n as f64;
    4.0 * (n - 3.0) * (n - 2.0)
}

/// Squared weighted norm of `J_n^{r,l}` for classical indices.
pub fn kappa(n: usize, idx: JacobiIndex) -> Result<f64> {
    if !idx.is_classical() {
        return invalid("kappa is only defined for classical Jacobi indices");
    }
    let (r, l) = (idx.r, idx.l);
    let nf = n as f64;
    let scale = 2f64.powf(r + l + 1.0);
    // (2n+r+l+1) Γ(n+r+l+1) collapses to Γ(r+l+2) at n = 0, which also covers r+l+1 = 0.
    let denom = if n == 0 {
        gamma(r + l + 2.0)
    } else {
        (2.0 * nf + r + l + 1.0) * gamma(nf + 1.0) * gamma(nf + r + l + 1.0)
    };
    Ok(scale * gamma(nf + r + 1.0) * gamma(nf + l + 1.0) / denom)
}

/// Values `(L_j, L_j', L_j'')` for `j = 0..=nmax` at `s`.
pub fn legendre_table(nmax: usize, s: f64) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push([1.0, 0.0, 0.0]);
    if nmax == 0 {
        return out;
    }
    out.push([s, 1.0, 0.0]);
    for j in 1..nmax {
        let jf = j as f64;
        let [p, dp, _] = out[j];
        let [pm, dpm, ddpm] = out[j - 1];
        let next = ((2.0 * jf + 1.0) * s * p - jf * pm) / (jf + 1.0);
        let dnext = dpm + (2.0 * jf + 1.0) * p;
        let ddnext = ddpm + (2.0 * jf + 1.0) * dp;
        out.push([next, dnext, ddnext]);
    }
    out
}

fn check_order(d: usize) -> Result<()> {
    if d > 2 {
        return invalid(format!("derivative order {d} not supported (max 2)"));
    }
    Ok(())
}

/// `d^d/ds^d L_n(s)`.
pub fn legendre_eval(n: usize, s: f64, d: usize) -> Result<f64> {
    check_order(d)?;
    Ok(legendre_table(n, s)[n][d])
}

/// Classical `J_n^{a,b}(s)` by the forward three-term recurrence.
fn jacobi_classical(n: usize, a: f64, b: f64, s: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut pm = 1.0;
    let mut p = 0.5 * ((a + b + 2.0) * s + (a - b));
    for j in 2..=n {
        let j = j as f64;
        let ab = 2.0 * j + a + b;
        let c0 = 2.0 * j * (j + a + b) * (ab - 2.0);
        let c1 = (ab - 1.0) * (ab * (ab - 2.0) * s + a * a - b * b);
        let c2 = 2.0 * (j + a - 1.0) * (j + b - 1.0) * ab;
        let next = (c1 * p - c2 * pm) / c0;
        pm = p;
        p = next;
    }
    p
}

/// `d^d/ds^d` of the classical `J_n^{a,b}` via repeated derivative recurrence.
fn jacobi_classical_deriv(n: usize, a: f64, b: f64, s: f64, d: usize) -> f64 {
    if d > n {
        return 0.0;
    }
    let mut coeff = 1.0;
    for t in 0..d {
        coeff *= 0.5 * ((n - t) as f64 + a + b + 1.0 + 2.0 * t as f64);
    }
    coeff * jacobi_classical(n - d, a + d as f64, b + d as f64, s)
}

/// Integer power `(1 - s)^p (1 + s)^q` and its first two derivatives.
fn endpoint_factor(p: u32, q: u32, s: f64) -> [f64; 3] {
    // derivatives of (1-s)^p and (1+s)^q
    let pw = |x: f64, e: u32| if e == 0 { 1.0 } else { x.powi(e as i32) };
    let left = [
        pw(1.0 - s, p),
        if p >= 1 { -(p as f64) * pw(1.0 - s, p - 1) } else { 0.0 },
        if p >= 2 {
            (p * (p - 1)) as f64 * pw(1.0 - s, p - 2)
        } else {
            0.0
        },
    ];
    let right = [
        pw(1.0 + s, q),
        if q >= 1 { q as f64 * pw(1.0 + s, q - 1) } else { 0.0 },
        if q >= 2 {
            (q * (q - 1)) as f64 * pw(1.0 + s, q - 2)
        } else {
            0.0
        },
    ];
    [
        left[0] * right[0],
        left[1] * right[0] + left[0] * right[1],
        left[2] * right[0] + 2.0 * left[1] * right[1] + left[0] * right[2],
    ]
}

/// Extended-index evaluation through the product form and the Leibniz rule.
fn jacobi_extended_product(n: usize, idx: JacobiIndex, s: f64, d: usize) -> f64 {
    let p = (-idx.r) as u32;
    let q = (-idx.l) as u32;
    let m = n - (p + q) as usize;
    let (a, b) = (-idx.r, -idx.l);
    let w = endpoint_factor(p, q, s);
    let j: Vec<f64> = (0..=d).map(|t| jacobi_classical_deriv(m, a, b, s, t)).collect();
    match d {
        0 => w[0] * j[0],
        1 => w[1] * j[0] + w[0] * j[1],
        _ => w[2] * j[0] + 2.0 * w[1] * j[1] + w[0] * j[2],
    }
}

/// `d^d/ds^d J_n^{r,l}(s)` for classical or extended indices.
///
/// Extended indices need `n + r + l >= 0`. Derivatives of `J_n^{-2,-2}` and
/// `J_n^{-1,-1}` follow the derivative recurrence down to Legendre polynomials.
pub fn jacobi_eval(n: usize, idx: JacobiIndex, s: f64, d: usize) -> Result<f64> {
    check_order(d)?;
    if idx.is_classical() {
        return Ok(jacobi_classical_deriv(n, idx.r, idx.l, s, d));
    }
    let shift = -(idx.r + idx.l) as usize;
    if n < shift {
        return invalid(format!("J_{n}^{{{},{}}} needs degree at least {shift}", idx.r, idx.l));
    }
    if d == 0 {
        return Ok(jacobi_extended_product(n, idx, s, 0));
    }
    let value = match (idx.r as i32, idx.l as i32) {
        (-2, -2) => {
            if d == 1 {
                let lower = JacobiIndex { r: -1.0, l: -1.0 };
                deriv_coeff(n, idx.r, idx.l) * jacobi_extended_product(n - 1, lower, s, 0)
            } else {
                cn(n) * legendre_table(n - 2, s)[n - 2][0]
            }
        }
        (-1, -1) => deriv_coeff(n, idx.r, idx.l) * legendre_table(n - 1, s)[n - 1][d - 1],
        _ => jacobi_extended_product(n, idx, s, d),
    };
    Ok(value)
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Polynomials up to this degree are integrated exactly.
    pub fn exactness(&self) -> usize {
        2 * self.len() - 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Approximates `∫_{-1}^{1} f(s) ds`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(s, w)| w * f(s)).sum()
    }
}

/// Eigenvalues of the symmetric Jacobi matrix of the weight `(1-s)^a (1+s)^b`.
fn golub_welsch_nodes(n: usize, a: f64, b: f64) -> Vec<f64> {
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let jf = j as f64;
        let ab = 2.0 * jf + a + b;
        jm[(j, j)] = if j == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (ab * (ab + 2.0))
        };
        if j + 1 < n {
            let k = jf + 1.0;
            let abk = 2.0 * k + a + b;
            let off = (4.0 * k * (k + a) * (k + b) * (k + a + b) / (abk * abk * (abk + 1.0) * (abk - 1.0))).sqrt();
            jm[(j, j + 1)] = off;
            jm[(j + 1, j)] = off;
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(jm).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Roots of the classical `J_n^{a,b}`, strictly increasing.
fn jacobi_roots(n: usize, a: f64, b: f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let mut roots = golub_welsch_nodes(n, a, b);
    for x in roots.iter_mut() {
        for _ in 0..NEWTON_MAX_ITER {
            let p = jacobi_classical(n, a, b, *x);
            let dp = jacobi_classical_deriv(n, a, b, *x, 1);
            let step = p / dp;
            *x -= step;
            if step.abs() <= NEWTON_TOL * x.abs().max(1.0) {
                break;
            }
        }
    }
    // odd-symmetric weights put an exact zero in the middle
    if a == b && n % 2 == 1 {
        roots[n / 2] = 0.0;
    }
    roots
}

/// `m`-point Gauss-Legendre rule, `1 <= m <= 64`.
pub fn gauss_rule(m: usize) -> Result<QuadratureRule> {
    if m == 0 || m > MAX_GAUSS_POINTS {
        return invalid(format!("Gauss rule needs 1..={MAX_GAUSS_POINTS} points, got {m}"));
    }
    let mut nodes = jacobi_roots(m, 0.0, 0.0);
    // symmetrize so that node pairs agree to the last bit
    for i in 0..m / 2 {
        let avg = 0.5 * (nodes[m - 1 - i] - nodes[i]);
        nodes[i] = -avg;
        nodes[m - 1 - i] = avg;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let dl = legendre_table(m, x)[m][1];
            2.0 / ((1.0 - x * x) * dl * dl)
        })
        .collect();
    Ok(QuadratureRule { nodes, weights })
}

/// Interior zeros of `d/ds J_{k+1}^{-2,-2}`, i.e. the `k - 2` roots of `J_{k-2}^{1,1}`.
pub fn interior_lobatto_points(k: usize) -> Result<Vec<f64>> {
    if k < 3 {
        return invalid(format!("Lobatto points need k >= 3, got {k}"));
    }
    Ok(jacobi_roots(k - 2, 1.0, 1.0))
}

/// Interior zeros of `J_{k+1}^{-2,-2}`, i.e. the `k - 3` roots of `J_{k-3}^{2,2}`.
pub fn jacobi_m2_roots(k: usize) -> Result<Vec<f64>> {
    if k < 3 {
        return invalid(format!("Jacobi roots need k >= 3, got {k}"));
    }
    Ok(jacobi_roots(k - 3, 2.0, 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn idx(r: f64, l: f64) -> JacobiIndex {
        JacobiIndex::new(r, l).unwrap()
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_eval(2, 0.0, 0).unwrap(), -0.5);
        assert_eq!(legendre_eval(5, 1.0, 0).unwrap(), 1.0);
        let h = 1e-5;
        let fd = (legendre_eval(4, 0.3 + h, 0).unwrap() - legendre_eval(4, 0.3 - h, 0).unwrap()) / (2.0 * h);
        assert!((legendre_eval(4, 0.3, 1).unwrap() - fd).abs() < 1e-7);
        assert!(legendre_eval(3, 0.1, 3).is_err());
    }

    #[test]
    fn index_validation() {
        assert!(JacobiIndex::new(-1.0, 0.5).is_err());
        assert!(JacobiIndex::new(-1.5, -1.5).is_err());
        assert!(JacobiIndex::new(-3.0, -2.0).is_err());
        assert!(JacobiIndex::new(-1.0, -2.0).is_ok());
        assert!(JacobiIndex::new(-0.5, 3.0).is_ok());
        assert!(jacobi_eval(3, JacobiIndex::BUBBLE, 0.0, 0).is_err());
    }

    #[test]
    fn bubble_values() {
        for s in [-1.0, 1.0] {
            assert_eq!(jacobi_eval(4, JacobiIndex::BUBBLE, s, 0).unwrap(), 0.0);
        }
        let v = jacobi_eval(4, JacobiIndex::BUBBLE, 0.5, 2).unwrap();
        assert!((v - -1.0).abs() < 1e-14);
        assert_eq!(cn(4), 8.0);
    }

    #[test]
    fn bubble_recurrence_matches_product_rule() {
        for n in 4..=9 {
            for i in 0..=20 {
                let s = -1.0 + 0.1 * i as f64;
                for d in 1..=2 {
                    let rec = jacobi_eval(n, JacobiIndex::BUBBLE, s, d).unwrap();
                    let prod = jacobi_extended_product(n, JacobiIndex::BUBBLE, s, d);
                    assert!((rec - prod).abs() < 1e-11 * (1.0 + prod.abs()), "n={n} s={s} d={d}");
                }
            }
        }
    }

    /// Monic orthogonal polynomial for weight (1-s^2)^2 from exact moments.
    fn gram_schmidt_weight22(n: usize, s: f64) -> f64 {
        let moment = |j: usize| -> f64 {
            if j % 2 == 1 {
                0.0
            } else {
                let j = j as f64;
                2.0 / (j + 1.0) - 4.0 / (j + 3.0) + 2.0 / (j + 5.0)
            }
        };
        let inner = |p: &[f64], q: &[f64]| -> f64 {
            let mut acc = 0.0;
            for (i, a) in p.iter().enumerate() {
                for (j, b) in q.iter().enumerate() {
                    acc += a * b * moment(i + j);
                }
            }
            acc
        };
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for deg in 0..=n {
            let mut p = vec![0.0; deg + 1];
            p[deg] = 1.0;
            for q in &basis {
                let c = inner(&p, q) / inner(q, q);
                for (i, qi) in q.iter().enumerate() {
                    p[i] -= c * qi;
                }
            }
            basis.push(p);
        }
        basis[n].iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    #[test]
    fn jacobi_22_matches_gram_schmidt() {
        // J_6^{2,2}(1) = binom(8, 6) = 28 fixes the scaling of the monic oracle.
        let oracle = gram_schmidt_weight22(6, 0.2) / gram_schmidt_weight22(6, 1.0) * 28.0;
        let v = jacobi_eval(6, idx(2.0, 2.0), 0.2, 0).unwrap();
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
    }

    #[test]
    fn gauss_rule_examples() {
        let r1 = gauss_rule(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert_relative_eq!(r1.weights()[0], 2.0, epsilon = 1e-15);
        let r2 = gauss_rule(2).unwrap();
        let g = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r2.nodes()[0], -g, epsilon = 1e-15);
        assert_relative_eq!(r2.nodes()[1], g, epsilon = 1e-15);
        assert_relative_eq!(r2.weights()[0], 1.0, epsilon = 1e-14);
        let r5 = gauss_rule(5).unwrap();
        assert!((r5.integrate(|s| s.powi(8)) - 2.0 / 9.0).abs() < 1e-13);
        assert!(gauss_rule(0).is_err());
        assert!(gauss_rule(65).is_err());
        assert!(gauss_rule(64).is_ok());
    }

    #[test]
    fn root_families() {
        assert_eq!(interior_lobatto_points(3).unwrap(), vec![0.0]);
        let l4 = interior_lobatto_points(4).unwrap();
        assert_eq!(l4.len(), 2);
        for &p in &l4 {
            assert!(jacobi_eval(2, idx(1.0, 1.0), p, 0).unwrap().abs() < 1e-12);
        }
        for &p in &interior_lobatto_points(5).unwrap() {
            assert!(jacobi_eval(6, JacobiIndex::BUBBLE, p, 1).unwrap().abs() < 1e-10);
        }
        assert!(interior_lobatto_points(2).is_err());

        assert!(jacobi_m2_roots(3).unwrap().is_empty());
        assert_eq!(jacobi_m2_roots(4).unwrap(), vec![0.0]);
        let r6 = jacobi_m2_roots(6).unwrap();
        assert_eq!(r6.len(), 3);
        for &p in &r6 {
            assert!(p > -1.0 && p < 1.0);
            assert!(jacobi_eval(7, JacobiIndex::BUBBLE, p, 0).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_examples() {
        assert_relative_eq!(kappa(2, JacobiIndex::LEGENDRE).unwrap(), 0.4, max_relative = 1e-13);
        assert_relative_eq!(kappa(0, JacobiIndex::LEGENDRE).unwrap(), 2.0, max_relative = 1e-13);
        let rule = gauss_rule(40).unwrap();
        let i11 = idx(1.0, 1.0);
        let quad = rule.integrate(|s| {
            let j = jacobi_eval(3, i11, s, 0).unwrap();
            j * j * (1.0 - s * s)
        });
        assert!((kappa(3, i11).unwrap() - quad).abs() < 1e-11);
        let l2 = rule.integrate(|s| legendre_eval(2, s, 0).unwrap().powi(2));
        assert!((l2 - 0.4).abs() < 1e-14);
        assert!(kappa(2, JacobiIndex::BUBBLE).is_err());
    }

    #[test]
    fn kappa_handles_degenerate_zero_degree() {
        // r + l + 1 = 0: κ_0 = ∫ (1-s)^{-1/2} (1+s)^{-1/2} ds = π
        let v = kappa(0, idx(-0.5, -0.5)).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI, max_relative = 1e-13);
    }

    #[test]
    fn deriv_coeff_cases() {
        assert_eq!(deriv_coeff(6, -2.0, -2.0), -6.0);
        assert_eq!(deriv_coeff(6, -1.0, -2.0), -8.0);
        assert_eq!(deriv_coeff(6, -1.0, 0.5), -6.0);
        assert_eq!(deriv_coeff(6, 0.5, -2.0), -6.0);
        assert_eq!(deriv_coeff(3, 1.0, 1.0), 3.0);
        assert_eq!(deriv_coeff(5, 0.0, 0.0), 3.0);
    }
}
