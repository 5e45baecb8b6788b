//! Ball domains in R^n and their quadrature grids.
//!
//! The planar grid is a polar product rule: uniform radial cell boundaries,
//! one node per (ring, angle) cell placed at the cell's radial centroid
//! (the one-point Gauss node for the weight rho drho), plus a node at the
//! origin carrying the innermost disk. Weights are exact cell areas, so the
//! weight sum reproduces the ball volume to rounding.
//!
//! All nodes are strictly interior. Solutions of the Dirichlet problems
//! handled by this crate are only Hölder-continuous at the sphere, so
//! placing nodes on the boundary would poison convergence measurements.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma_fn;

/// Euclidean ball centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallDomain {
    dim: usize,
    radius: f64,
}

impl BallDomain {
    /// Requires `dim >= 2` (so the Green kernel formula is valid for every
    /// order in (0, 1)) and `radius > 0`.
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "ball dimension must be >= 2, got {dim}"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { dim, radius })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Volume pi^{n/2} r^n / Gamma(n/2 + 1).
    pub fn volume(&self) -> f64 {
        let n = self.dim as f64;
        std::f64::consts::PI.powf(n / 2.0) * self.radius.powi(self.dim as i32)
            / gamma_fn(n / 2.0 + 1.0).expect("n/2 + 1 > 0")
    }

    /// Strict interior test.
    pub fn contains(&self, x: &[f64]) -> bool {
        norm_sq(x) < self.radius * self.radius
    }
}

/// Free-function form of [`BallDomain::volume`].
pub fn ball_volume(domain: &BallDomain) -> f64 {
    domain.volume()
}

/// Exact geometry of the cell a node represents; used for near-field
/// integration of singular kernels (planar grids only).
#[derive(Debug, Clone, PartialEq)]
pub enum CellGeom {
    /// Disk of radius `r_out` around the origin.
    CenterDisk { r_out: f64 },
    /// Annulus sector rho in [rho0, rho1], theta in [theta0, theta1].
    Sector {
        rho0: f64,
        rho1: f64,
        theta0: f64,
        theta1: f64,
    },
    /// No exact geometry recorded (grids in dimension >= 3).
    Unspecified,
}

/// Structural description of the node ordering, when the grid has one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridLayout {
    /// Node 0 at the origin, then `rings` rings of `angles` uniformly
    /// rotated nodes each, ring-major. The rotation symmetry makes kernel
    /// matrices on this layout block-circulant.
    PolarProduct { rings: usize, angles: usize },
    Irregular,
}

/// Quadrature nodes and positive weights on a ball.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    domain: BallDomain,
    resolution: usize,
    layout: GridLayout,
    /// N x n node coordinates, all strictly inside the ball.
    nodes: Array2<f64>,
    /// Positive weights; their sum is the ball volume.
    weights: Array1<f64>,
    /// Radius of the equal-measure ball matching each node's weight.
    cell_radius: Array1<f64>,
    cells: Vec<CellGeom>,
}

impl QuadratureGrid {
    pub fn domain(&self) -> &BallDomain {
        &self.domain
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn layout(&self) -> GridLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nodes(&self) -> &Array2<f64> {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> &[f64] {
        self.nodes.row(j).to_slice().expect("row-major layout")
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    pub fn cell_radius(&self, j: usize) -> f64 {
        self.cell_radius[j]
    }

    pub fn cell(&self, j: usize) -> &CellGeom {
        &self.cells[j]
    }

    /// Sum of w_j f(x_j).
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        let mut sum = 0.0;
        for j in 0..self.len() {
            sum += self.weights[j] * f(self.node(j));
        }
        sum
    }

    /// Index of the node closest to `p` (ties broken by lowest index).
    pub fn nearest_node(&self, p: &[f64]) -> Result<usize> {
        if p.len() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                got: p.len(),
            });
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for j in 0..self.len() {
            let d = dist_sq(self.node(j), p);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        Ok(best)
    }
}

/// Build a quadrature grid on `domain` with `resolution >= 4` radial cells.
///
/// The construction is a pure function of its arguments: two calls with the
/// same inputs produce bit-identical grids.
pub fn build_grid(domain: &BallDomain, resolution: usize) -> Result<QuadratureGrid> {
    if resolution < 4 {
        return Err(Error::InvalidParameter(format!(
            "grid resolution must be >= 4, got {resolution}"
        )));
    }
    match domain.dim() {
        2 => Ok(build_grid_2d(domain, resolution)),
        _ => Ok(build_grid_nd(domain, resolution)),
    }
}

fn build_grid_2d(domain: &BallDomain, resolution: usize) -> QuadratureGrid {
    let r = domain.radius();
    let n_rings = resolution;
    let n_theta = resolution;
    let dr = r / n_rings as f64;
    let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;

    let mut nodes: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut cells: Vec<CellGeom> = Vec::new();

    // Center: the disk [0, dr/2] keeps one node exactly at the origin.
    let r_center = 0.5 * dr;
    nodes.extend_from_slice(&[0.0, 0.0]);
    weights.push(std::f64::consts::PI * r_center * r_center);
    cells.push(CellGeom::CenterDisk { r_out: r_center });

    // Rings: [dr/2, dr], then [dr, 2 dr], ..., up to [r - dr, r].
    let mut lo = r_center;
    for k in 1..=n_rings {
        let hi = k as f64 * dr;
        let rho = radial_centroid(lo, hi);
        let area = std::f64::consts::PI * (hi * hi - lo * lo);
        let w = area / n_theta as f64;
        for m in 0..n_theta {
            let theta = (m as f64 + 0.5) * dtheta;
            nodes.extend_from_slice(&[rho * theta.cos(), rho * theta.sin()]);
            weights.push(w);
            cells.push(CellGeom::Sector {
                rho0: lo,
                rho1: hi,
                theta0: m as f64 * dtheta,
                theta1: (m as f64 + 1.0) * dtheta,
            });
        }
        lo = hi;
    }

    finish_grid(
        domain,
        resolution,
        GridLayout::PolarProduct {
            rings: n_rings,
            angles: n_theta,
        },
        nodes,
        weights,
        cells,
    )
}

/// One-point Gauss node for the weight rho drho on [a, b].
fn radial_centroid(a: f64, b: f64) -> f64 {
    2.0 / 3.0 * (b * b * b - a * a * a) / (b * b - a * a)
}

/// One-point Gauss node for the weight rho^{n-1} drho on [a, b].
fn radial_centroid_nd(a: f64, b: f64, n: u32) -> f64 {
    let p = n as i32;
    (n as f64) / (n as f64 + 1.0) * (b.powi(p + 1) - a.powi(p + 1)) / (b.powi(p) - a.powi(p))
}

fn build_grid_nd(domain: &BallDomain, resolution: usize) -> QuadratureGrid {
    let n = domain.dim();
    let r = domain.radius();
    let n_shells = resolution;
    let n_dirs = direction_count(n, resolution);
    let dirs = sphere_directions(n, n_dirs);
    let dr = r / n_shells as f64;

    let total_volume = domain.volume();
    // Volume of the ball of radius rho is total * (rho/r)^n.
    let shell_volume = |a: f64, b: f64| total_volume * ((b / r).powi(n as i32) - (a / r).powi(n as i32));

    let mut nodes: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut cells: Vec<CellGeom> = Vec::new();

    let r_center = 0.5 * dr;
    nodes.extend(std::iter::repeat_n(0.0, n));
    weights.push(shell_volume(0.0, r_center));
    cells.push(CellGeom::Unspecified);

    let mut lo = r_center;
    for k in 1..=n_shells {
        let hi = k as f64 * dr;
        let rho = radial_centroid_nd(lo, hi, n as u32);
        let w = shell_volume(lo, hi) / n_dirs as f64;
        for d in &dirs {
            for &c in d.iter() {
                nodes.push(rho * c);
            }
            weights.push(w);
            cells.push(CellGeom::Unspecified);
        }
        lo = hi;
    }

    finish_grid(domain, resolution, GridLayout::Irregular, nodes, weights, cells)
}

fn direction_count(dim: usize, resolution: usize) -> usize {
    // Scale the angular point count with the shell count, as in the plane.
    resolution * 2usize.pow(dim as u32 - 1)
}

/// Repeatable quasi-uniform unit vectors: Fibonacci spiral on S^2,
/// seeded low-discrepancy-ish normals in higher dimension.
fn sphere_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    if dim == 3 {
        let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
        (0..count)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                let rho = (1.0 - z * z).sqrt();
                let phi = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
                vec![rho * phi.cos(), rho * phi.sin(), z]
            })
            .collect()
    } else {
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_BA11);
        (0..count)
            .map(|_| {
                loop {
                    let v: Vec<f64> = (0..dim).map(|_| standard_normal(&mut rng)).collect();
                    let norm = norm_sq(&v).sqrt();
                    if norm > 1e-6 {
                        return v.into_iter().map(|c| c / norm).collect();
                    }
                }
            })
            .collect()
    }
}

fn standard_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    // Box-Muller; u1 in (0,1].
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn finish_grid(
    domain: &BallDomain,
    resolution: usize,
    layout: GridLayout,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cells: Vec<CellGeom>,
) -> QuadratureGrid {
    let n = domain.dim();
    let count = weights.len();
    let dim_exp = 1.0 / n as f64;
    let unit_ball = BallDomain::new(n, 1.0).expect("valid").volume();
    let cell_radius = Array1::from_iter(weights.iter().map(|w| (w / unit_ball).powf(dim_exp)));
    QuadratureGrid {
        domain: *domain,
        resolution,
        layout,
        nodes: Array2::from_shape_vec((count, n), nodes).expect("consistent shape"),
        weights: Array1::from_vec(weights),
        cell_radius,
        cells,
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn volume_disk_and_ball() {
        let disk = BallDomain::new(2, 1.0).unwrap();
        assert_relative_eq!(disk.volume(), std::f64::consts::PI, max_relative = 1e-12);
        let ball = BallDomain::new(3, 1.0).unwrap();
        assert_relative_eq!(
            ball.volume(),
            4.0 / 3.0 * std::f64::consts::PI,
            max_relative = 1e-12
        );
        let half = BallDomain::new(2, 0.5).unwrap();
        assert_relative_eq!(
            half.volume(),
            std::f64::consts::PI / 4.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rejects_bad_domains_and_resolution() {
        assert!(BallDomain::new(1, 1.0).is_err());
        assert!(BallDomain::new(2, 0.0).is_err());
        assert!(BallDomain::new(2, -2.0).is_err());
        let d = BallDomain::new(2, 1.0).unwrap();
        assert!(build_grid(&d, 3).is_err());
        assert!(build_grid(&d, 4).is_ok());
    }

    #[test]
    fn weights_sum_to_area() {
        for (r, res, tol) in [(1.0, 32, 1e-3), (2.0, 32, 1e-3), (1.0, 128, 1e-4)] {
            let d = BallDomain::new(2, r).unwrap();
            let g = build_grid(&d, res).unwrap();
            let sum: f64 = g.weights().sum();
            assert_relative_eq!(sum, d.volume(), max_relative = tol);
        }
    }

    #[test]
    fn weights_positive_nodes_interior() {
        let d = BallDomain::new(2, 1.5).unwrap();
        let g = build_grid(&d, 16).unwrap();
        for j in 0..g.len() {
            assert!(g.weights()[j] > 0.0);
            assert!(norm_sq(g.node(j)).sqrt() < d.radius());
        }
    }

    #[test]
    fn quadratic_moment_on_unit_disk() {
        // int_{B_1} |x|^2 dx = pi/2
        let d = BallDomain::new(2, 1.0).unwrap();
        let g = build_grid(&d, 64).unwrap();
        let got = g.integrate(norm_sq);
        assert_relative_eq!(got, std::f64::consts::PI / 2.0, epsilon = 1e-4);
    }

    #[test]
    fn deterministic_construction() {
        let d = BallDomain::new(2, 1.0).unwrap();
        let a = build_grid(&d, 24).unwrap();
        let b = build_grid(&d, 24).unwrap();
        assert_eq!(a, b);
        let d3 = BallDomain::new(3, 1.0).unwrap();
        let a3 = build_grid(&d3, 8).unwrap();
        let b3 = build_grid(&d3, 8).unwrap();
        assert_eq!(a3, b3);
    }

    #[test]
    fn origin_is_a_node() {
        let d = BallDomain::new(2, 1.0).unwrap();
        let g = build_grid(&d, 32).unwrap();
        let j = g.nearest_node(&[0.0, 0.0]).unwrap();
        assert_eq!(g.node(j), &[0.0, 0.0]);
    }

    #[test]
    fn three_dimensional_grid_tiles_volume() {
        let d = BallDomain::new(3, 1.0).unwrap();
        let g = build_grid(&d, 8).unwrap();
        let sum: f64 = g.weights().sum();
        assert_relative_eq!(sum, d.volume(), max_relative = 1e-12);
        for j in 0..g.len() {
            assert!(g.weights()[j] > 0.0);
            assert!(norm_sq(g.node(j)).sqrt() < 1.0);
        }
    }

    #[test]
    fn cell_radius_matches_weight() {
        let d = BallDomain::new(2, 1.0).unwrap();
        let g = build_grid(&d, 16).unwrap();
        for j in 0..g.len() {
            let h = g.cell_radius(j);
            assert_relative_eq!(
                std::f64::consts::PI * h * h,
                g.weights()[j],
                max_relative = 1e-12
            );
        }
    }
}
