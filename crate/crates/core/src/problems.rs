//! Registered test problems with closed-form data.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::assembly::{Coefficients, Problem};
use crate::error::{Error, Result};
use crate::projection::SmoothFunction;

pub const PROBLEM_IDS: [&str; 4] = ["example1", "example2-case1", "example2-case2", "example2-case3"];

/// Constants `α, β, γ` used by `example1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for ConstantCoefficients {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        }
    }
}

/// `u = sin(πx)` on (0, 1) with constant coefficients.
pub fn example1(c: ConstantCoefficients) -> Result<Problem> {
    let ConstantCoefficients { alpha, beta, gamma } = c;
    let exact = SmoothFunction::new(
        |x| (PI * x).sin(),
        |x| PI * (PI * x).cos(),
        |x| -PI * PI * (PI * x).sin(),
    );
    let f = move |x: f64| (alpha * PI * PI + gamma) * (PI * x).sin() + beta * PI * (PI * x).cos();
    Problem::new(
        "example1",
        (0.0, 1.0),
        Coefficients::constant(alpha, beta, gamma),
        f,
        exact,
        true,
    )
}

fn example2_exact() -> SmoothFunction {
    // u = sin(x) p(x), p = x^12 - x^11
    SmoothFunction::new(
        |x| x.sin() * (x.powi(12) - x.powi(11)),
        |x| x.cos() * (x.powi(12) - x.powi(11)) + x.sin() * (12.0 * x.powi(11) - 11.0 * x.powi(10)),
        |x| {
            let p = x.powi(12) - x.powi(11);
            let dp = 12.0 * x.powi(11) - 11.0 * x.powi(10);
            let d2p = 132.0 * x.powi(10) - 110.0 * x.powi(9);
            (d2p - p) * x.sin() + 2.0 * dp * x.cos()
        },
    )
}

type Profile = fn(f64) -> f64;

/// `u = sin(x)(x^12 - x^11)` on (0, 1) with `α = e^x`; the case picks `β, γ`:
/// 1: `β = cos x, γ = x`; 2: `β = 0, γ = x`; 3: `β = γ = 0`.
pub fn example2(case: u8) -> Result<Problem> {
    let (beta, gamma): (Profile, Profile) = match case {
        1 => (f64::cos, |x| x),
        2 => (|_| 0.0, |x| x),
        3 => (|_| 0.0, |_| 0.0),
        _ => {
            return Err(Error::UnknownProblem {
                id: format!("example2-case{case}"),
                available: PROBLEM_IDS.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    let coeffs = Coefficients {
        alpha: Arc::new(f64::exp),
        dalpha: Arc::new(f64::exp),
        beta: Arc::new(beta),
        gamma: Arc::new(gamma),
    };
    let f = move |x: f64| {
        let (s, c) = x.sin_cos();
        let p = x.powi(12) - x.powi(11);
        let dp = 12.0 * x.powi(11) - 11.0 * x.powi(10);
        let d2p = 132.0 * x.powi(10) - 110.0 * x.powi(9);
        let u = s * p;
        let du = c * p + s * dp;
        // -(e^x u')' = -e^x (u' + u'')
        let sum = c * (p + 2.0 * dp) + s * (dp + d2p - p);
        -x.exp() * sum + beta(x) * du + gamma(x) * u
    };
    Problem::new(
        format!("example2-case{case}"),
        (0.0, 1.0),
        coeffs,
        f,
        example2_exact(),
        false,
    )
}

/// Looks up a registered problem; `c` only affects `example1`.
pub fn lookup(id: &str, c: ConstantCoefficients) -> Result<Problem> {
    match id {
        "example1" => example1(c),
        "example2-case1" => example2(1),
        "example2-case2" => example2(2),
        "example2-case3" => example2(3),
        _ => Err(Error::UnknownProblem {
            id: id.to_string(),
            available: PROBLEM_IDS.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

/// Every registered problem, with default constants for `example1`.
pub fn registry() -> Vec<Problem> {
    PROBLEM_IDS
        .iter()
        .map(|id| lookup(id, ConstantCoefficients::default()).expect("registered problem is valid"))
        .collect()
}
