//! One-dimensional partitions `a = x_0 < x_1 < ... < x_N = b`.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};

/// How to lay out the nodes of a [`Mesh1D`].
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSpec {
    Uniform {
        a: f64,
        b: f64,
        n: usize,
    },
    /// Uniform nodes with interior node `j` moved by
    /// `amplitude * (b - a) / N * sin(jπ/N) * U_j`, `U_j ~ uniform(0, 1)`.
    Perturbed {
        a: f64,
        b: f64,
        n: usize,
        amplitude: f64,
        seed: u64,
    },
    /// `N/2` equal elements on `[a, breakpoint]` and `N/2` on `[breakpoint, b]`.
    PiecewiseUniform {
        a: f64,
        b: f64,
        breakpoint: f64,
        n: usize,
    },
}

impl MeshSpec {
    pub fn n_elements(&self) -> usize {
        match *self {
            MeshSpec::Uniform { n, .. } | MeshSpec::Perturbed { n, .. } | MeshSpec::PiecewiseUniform { n, .. } => n,
        }
    }

    /// Same layout with a different element count.
    pub fn with_elements(&self, n: usize) -> MeshSpec {
        let mut out = self.clone();
        match &mut out {
            MeshSpec::Uniform { n: m, .. }
            | MeshSpec::Perturbed { n: m, .. }
            | MeshSpec::PiecewiseUniform { n: m, .. } => *m = n,
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let (a, b, n) = match *self {
            MeshSpec::Uniform { a, b, n }
            | MeshSpec::Perturbed { a, b, n, .. }
            | MeshSpec::PiecewiseUniform { a, b, n, .. } => (a, b, n),
        };
        if !(a.is_finite() && b.is_finite() && a < b) {
            return invalid(format!("mesh interval [{a}, {b}] is empty or not finite"));
        }
        if n < 2 {
            return invalid(format!("mesh needs at least 2 elements, got {n}"));
        }
        match *self {
            MeshSpec::Perturbed { amplitude, .. } if !(0.0..0.25).contains(&amplitude) => {
                invalid(format!("perturbation amplitude {amplitude} outside [0, 0.25)"))
            }
            MeshSpec::PiecewiseUniform { breakpoint, .. } if !(a < breakpoint && breakpoint < b) => {
                invalid(format!("breakpoint {breakpoint} not inside ({a}, {b})"))
            }
            MeshSpec::PiecewiseUniform { n, .. } if n % 2 != 0 => {
                invalid(format!("piecewise-uniform mesh needs an even element count, got {n}"))
            }
            _ => Ok(()),
        }
    }
}

/// SplitMix64 finalizer applied to `seed + (j + 1) * golden`.
///
/// Each node draws from its own stream, so the variate for node `j` does not
/// depend on how many other nodes exist.
pub fn node_uniform(seed: u64, j: u64) -> f64 {
    let mut z = seed.wrapping_add(j.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    // 53 random bits, offset by half an ulp so the result lies in (0, 1)
    ((z >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// A strictly increasing partition of `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::MeshConstruction("need at least two nodes".into()));
        }
        if let Some(j) = nodes
            .windows(2)
            .position(|w| w[0].is_nan() || w[1].is_nan() || w[0] >= w[1])
        {
            return Err(Error::MeshConstruction(format!(
                "nodes {} and {} are not strictly increasing",
                j,
                j + 1
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::MeshConstruction("non-finite node".into()));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn a(&self) -> f64 {
        self.nodes[0]
    }

    pub fn b(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Endpoints of element `e` (0-based).
    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    pub fn h(&self, e: usize) -> f64 {
        self.nodes[e + 1] - self.nodes[e]
    }

    pub fn max_h(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.h(e)).fold(0.0, f64::max)
    }

    pub fn min_h(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.h(e)).fold(f64::INFINITY, f64::min)
    }

    /// `max h / min h`.
    pub fn quasi_uniformity(&self) -> f64 {
        self.max_h() / self.min_h()
    }

    /// `s = (2x - x_{e} - x_{e+1}) / h_e`.
    pub fn to_reference(&self, e: usize, x: f64) -> Result<f64> {
        if e >= self.n_elements() {
            return invalid(format!("element {e} out of range"));
        }
        let (xl, xr) = self.element(e);
        let slack = 1e-12 * (xr - xl);
        if x < xl - slack || x > xr + slack {
            return invalid(format!("x = {x} outside element [{xl}, {xr}]"));
        }
        Ok((2.0 * x - xl - xr) / (xr - xl))
    }

    pub fn from_reference(&self, e: usize, s: f64) -> f64 {
        let (xl, xr) = self.element(e);
        0.5 * (xl + xr) + 0.5 * (xr - xl) * s
    }

    /// Element owning `x`; interior nodes belong to the element on their left.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !(x >= self.a() && x <= self.b()) {
            return invalid(format!("x = {x} outside domain [{}, {}]", self.a(), self.b()));
        }
        // first node >= x; x in (x_{j-1}, x_j] belongs to element j-1
        let j = self.nodes.partition_point(|&xn| xn < x);
        Ok(j.saturating_sub(1).min(self.n_elements() - 1))
    }

    /// One node per line, 17 significant digits.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for x in &self.nodes {
            let _ = writeln!(out, "{x:.16e}");
        }
        out
    }
}

pub fn build_mesh(spec: &MeshSpec) -> Result<Mesh1D> {
    spec.validate()?;
    let nodes = match *spec {
        MeshSpec::Uniform { a, b, n } => uniform_nodes(a, b, n),
        MeshSpec::Perturbed {
            a,
            b,
            n,
            amplitude,
            seed,
        } => {
            let mut nodes = uniform_nodes(a, b, n);
            let nf = n as f64;
            let len = b - a;
            for (j, x) in nodes.iter_mut().enumerate().take(n).skip(1) {
                let bump = (j as f64 * std::f64::consts::PI / nf).sin();
                *x += amplitude * len / nf * bump * node_uniform(seed, j as u64);
            }
            nodes
        }
        MeshSpec::PiecewiseUniform { a, b, breakpoint, n } => {
            let mut nodes = uniform_nodes(a, breakpoint, n / 2);
            nodes.pop();
            nodes.extend(uniform_nodes(breakpoint, b, n / 2));
            nodes
        }
    };
    Mesh1D::from_nodes(nodes)
}

fn uniform_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut nodes: Vec<f64> = (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect();
    nodes[n] = b;
    nodes
}
