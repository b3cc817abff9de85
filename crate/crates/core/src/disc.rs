//! Radial discretization of one angular mode.
//!
//! For `u(r, theta) = v(r) e^{i n theta}` the weak form of the problem on the
//! disk reduces to
//!
//! ```text
//! K: 2 pi int_0^1 (v' w' + n^2 v w / r^2) r dr + 2 pi n^2 v(1) w(1)
//! M: 2 pi int_0^1 v w r dr + 2 pi v(1) w(1)
//! D: 2 pi v(1) w(1)
//! ```
//!
//! which is discretized by degree-3 spectral elements on a uniform mesh with
//! lumped (nodal quadrature) mass. The first element uses right Gauss-Radau
//! points so that no node sits on the axis `r = 0`; the others use
//! Gauss-Lobatto-Legendre points. The last node is `r = 1` and carries the
//! boundary trace, so the Wentzell degree of freedom is shared with the interior.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{BandLu, BandMatrix, Scalar};

/// Polynomial degree of each element.
pub const DEGREE: usize = 3;
const BW: usize = DEGREE;
const TWO_PI: f64 = 2.0 * PI;

/// Nodes, weights and differentiation matrix on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `d[i][j] = l_j'(x_i)` for the Lagrange basis on `nodes`.
    pub d: Vec<Vec<f64>>,
}

/// `P_m(x)` and `P_m'(x)`.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    if m == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for k in 1..m {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

fn newton_polish(mut x: f64, f: impl Fn(f64) -> (f64, f64)) -> f64 {
    for _ in 0..100 {
        let (v, d) = f(x);
        let step = v / d;
        x -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    x
}

impl ReferenceElement {
    /// Gauss-Lobatto-Legendre points: `+-1` and the roots of `P_p'`.
    pub fn gauss_lobatto(p: usize) -> Self {
        assert!(p >= 1);
        let mut nodes = vec![-1.0];
        for j in 1..p {
            let seed = -(PI * j as f64 / p as f64).cos();
            let x = newton_polish(seed, |x| {
                let (pv, dv) = legendre(p, x);
                let pf = (p * (p + 1)) as f64;
                // Legendre equation gives P''
                let d2 = (2.0 * x * dv - pf * pv) / (1.0 - x * x);
                (dv, d2)
            });
            nodes.push(x);
        }
        nodes.push(1.0);
        let pf = (p * (p + 1)) as f64;
        let weights = nodes.iter().map(|&x| 2.0 / (pf * legendre(p, x).0.powi(2))).collect();
        let d = diff_matrix(&nodes);
        Self { nodes, weights, d }
    }

    /// Gauss-Radau points including `x = 1`: roots of `P_{m-1} - P_m`, `m = p + 1`.
    pub fn gauss_radau_right(p: usize) -> Self {
        assert!(p >= 1);
        let m = p + 1;
        let mf = m as f64;
        let mut nodes = Vec::with_capacity(m);
        for j in (1..m).rev() {
            // mirror of the usual left-Radau guesses
            let seed = (2.0 * PI * j as f64 / (2.0 * mf - 1.0)).cos();
            let x = newton_polish(seed, |x| {
                let (a, da) = legendre(m - 1, x);
                let (b, db) = legendre(m, x);
                (a - b, da - db)
            });
            nodes.push(x);
        }
        nodes.push(1.0);
        let weights = nodes
            .iter()
            .map(|&x| {
                if x == 1.0 {
                    2.0 / (mf * mf)
                } else {
                    (1.0 + x) / (mf * mf * legendre(m - 1, x).0.powi(2))
                }
            })
            .collect();
        let d = diff_matrix(&nodes);
        Self { nodes, weights, d }
    }
}

/// Lagrange differentiation matrix with the negative-sum diagonal, so rows
/// annihilate constants to rounding.
fn diff_matrix(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let bary: Vec<f64> = (0..n)
        .map(|j| 1.0 / (0..n).filter(|&k| k != j).map(|k| x[j] - x[k]).product::<f64>())
        .collect();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if i != j {
                d[i][j] = bary[j] / bary[i] / (x[i] - x[j]);
                s += d[i][j];
            }
        }
        d[i][i] = -s;
    }
    d
}

/// Node layout for one angular mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    pub n: u32,
    /// Requested resolution; the mesh has `ceil(points / 3)` elements.
    pub points: usize,
    pub elements: usize,
    /// Element width.
    pub h_r: f64,
    /// Radius of every degree of freedom, strictly increasing in `(0, 1]`.
    pub nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n: u32, points: usize) -> Result<Self> {
        if points < 16 {
            return Err(Error::InvalidArgument(format!("grid needs N >= 16, got {points}")));
        }
        let elements = points.div_ceil(DEGREE);
        let h_r = 1.0 / elements as f64;
        let radau = ReferenceElement::gauss_radau_right(DEGREE);
        let gll = ReferenceElement::gauss_lobatto(DEGREE);
        let mut nodes = Vec::with_capacity(DEGREE * elements + 1);
        for &x in &radau.nodes {
            nodes.push((x + 1.0) * h_r / 2.0);
        }
        for e in 1..elements {
            let a = e as f64 * h_r;
            for &x in &gll.nodes[1..] {
                nodes.push(a + (x + 1.0) * h_r / 2.0);
            }
        }
        *nodes.last_mut().unwrap() = 1.0;
        Ok(Self { n, points, elements, h_r, nodes })
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// Index of the boundary degree of freedom (`r = 1`).
    pub fn boundary(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn sample<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }
}

/// `K + z D + z^2 M` for one angular mode.
///
/// `K` is kept as its strictly upper band plus the diagonal potential
/// `n^2` part; the gradient part of the diagonal is minus the off-diagonal row
/// sum, which keeps `K 1 = 0` exact for `n = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePencil {
    pub grid: RadialGrid,
    /// `upper[i][d - 1] = K[i][i + d]`
    upper: Vec<[f64; BW]>,
    potential: Vec<f64>,
    mass: Vec<f64>,
    /// The single nonzero entry of `D`, at the boundary index.
    pub damping: f64,
}

/// Assembles the pencil for mode `n` on a grid of resolution `N`.
pub fn assemble(n: u32, points: usize) -> Result<DiscretePencil> {
    let grid = RadialGrid::new(n, points)?;
    let dim = grid.dim();
    let radau = ReferenceElement::gauss_radau_right(DEGREE);
    let gll = ReferenceElement::gauss_lobatto(DEGREE);
    let nn = f64::from(n) * f64::from(n);
    let jac = grid.h_r / 2.0;
    let mut upper = vec![[0.0; BW]; dim];
    let mut potential = vec![0.0; dim];
    let mut mass = vec![0.0; dim];
    for e in 0..grid.elements {
        let re = if e == 0 { &radau } else { &gll };
        let a = e as f64 * grid.h_r;
        let base = DEGREE * e;
        let rq: Vec<f64> = re.nodes.iter().map(|&x| a + (x + 1.0) * jac).collect();
        for q in 0..=DEGREE {
            let wq = re.weights[q];
            mass[base + q] += TWO_PI * wq * jac * rq[q];
            potential[base + q] += TWO_PI * nn * wq * jac / rq[q];
        }
        for i in 0..=DEGREE {
            for j in i + 1..=DEGREE {
                let s: f64 = (0..=DEGREE)
                    .map(|q| re.weights[q] * rq[q] * re.d[q][i] * re.d[q][j])
                    .sum();
                upper[base + i][j - i - 1] += TWO_PI * s / jac;
            }
        }
    }
    let b = dim - 1;
    mass[b] += TWO_PI;
    potential[b] += TWO_PI * nn;
    Ok(DiscretePencil { grid, upper, potential, mass, damping: TWO_PI })
}

impl DiscretePencil {
    pub fn n(&self) -> u32 {
        self.grid.n
    }

    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn boundary(&self) -> usize {
        self.mass.len() - 1
    }

    /// Diagonal of `M`.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Diagonal of `D`.
    pub fn damping_diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim()];
        d[self.boundary()] = self.damping;
        d
    }

    /// Entry `K[i][j]`.
    pub fn stiffness(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        if a == b {
            self.stiffness_diag(a)
        } else if b - a <= BW {
            self.upper[a][b - a - 1]
        } else {
            0.0
        }
    }

    fn stiffness_diag(&self, i: usize) -> f64 {
        let mut s = self.potential[i];
        for d in 1..=BW {
            if i + d < self.dim() {
                s -= self.upper[i][d - 1];
            }
            if i >= d {
                s -= self.upper[i - d][d - 1];
            }
        }
        s
    }

    /// `K u`, evaluated in difference form `sum_j K_ij (u_j - u_i) + V_i u_i`.
    pub fn apply_stiffness<T: Scalar>(&self, u: &[T]) -> Vec<T> {
        let dim = self.dim();
        assert_eq!(u.len(), dim);
        (0..dim)
            .map(|i| {
                let ui = u[i];
                let mut acc = ui * T::from_real(self.potential[i]);
                for d in 1..=BW {
                    if i + d < dim {
                        acc = acc + (u[i + d] - ui) * T::from_real(self.upper[i][d - 1]);
                    }
                    if i >= d {
                        acc = acc + (u[i - d] - ui) * T::from_real(self.upper[i - d][d - 1]);
                    }
                }
                acc
            })
            .collect()
    }

    /// Band matrix `a K + b D + c M`.
    pub fn combination(&self, a: Complex64, b: Complex64, c: Complex64) -> BandMatrix<Complex64> {
        let dim = self.dim();
        let mut m = BandMatrix::zeros(dim, BW, BW);
        for i in 0..dim {
            m.add(i, i, a * self.stiffness_diag(i) + c * self.mass[i]);
            for d in 1..=BW {
                if i + d < dim {
                    let v = a * self.upper[i][d - 1];
                    m.add(i, i + d, v);
                    m.add(i + d, i, v);
                }
            }
        }
        m.add(dim - 1, dim - 1, b * self.damping);
        m
    }

    /// `P(z) = K + z D + z^2 M` in band storage.
    pub fn pencil_matrix(&self, z: Complex64) -> BandMatrix<Complex64> {
        self.combination(Complex64::new(1.0, 0.0), z, z * z)
    }

    /// Smallest generalized eigenvalue of `(K, M)` above `shift`, by inverse iteration.
    pub fn min_generalized_eigenvalue(&self, shift: f64, steps: usize) -> Result<f64> {
        let lu = self
            .combination(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-shift, 0.0))
            .factorize()?;
        let dim = self.dim();
        let mut x: Vec<Complex64> = (0..dim).map(|i| Complex64::new(1.0 + (i % 7) as f64, 0.0)).collect();
        let mut mu = 0.0;
        for _ in 0..steps {
            let mx: Vec<Complex64> = x.iter().zip(&self.mass).map(|(v, m)| v * m).collect();
            let y = lu.solve(&mx);
            let nrm = m_norm(&self.mass, &y);
            x = y.iter().map(|v| v / nrm).collect();
            let kx = self.apply_stiffness(&x);
            mu = dot(&x, &kx).re;
        }
        Ok(mu)
    }
}

/// `(K + z D + z^2 M) v`.
pub fn apply_pencil(p: &DiscretePencil, z: Complex64, v: &[Complex64]) -> Result<Vec<Complex64>> {
    if v.len() != p.dim() {
        return Err(Error::InvalidArgument(format!(
            "vector length {} does not match pencil dimension {}",
            v.len(),
            p.dim()
        )));
    }
    let mut out = p.apply_stiffness(v);
    for (i, o) in out.iter_mut().enumerate() {
        *o += z * z * p.mass[i] * v[i];
    }
    let b = p.boundary();
    out[b] += z * p.damping * v[b];
    Ok(out)
}

/// `sum conj(a_i) b_i`
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `sqrt(v* W v)` for a positive diagonal weight.
pub fn m_norm(w: &[f64], v: &[Complex64]) -> f64 {
    v.iter().zip(w).map(|(x, m)| m * x.norm_sqr()).sum::<f64>().sqrt()
}

/// `sqrt(v* W^{-1} v)`
pub fn m_inv_norm(w: &[f64], v: &[Complex64]) -> f64 {
    v.iter().zip(w).map(|(x, m)| x.norm_sqr() / m).sum::<f64>().sqrt()
}

/// `||P(z) v||_{M^-1} / ||v||_M`
pub fn pencil_residual(p: &DiscretePencil, z: Complex64, v: &[Complex64]) -> Result<f64> {
    let r = apply_pencil(p, z, v)?;
    Ok(m_inv_norm(p.mass(), &r) / m_norm(p.mass(), v))
}

/// `E = (u* K u + v* M v) / 2` and
/// `E1 = (v* K v + ||M^-1 K u||_M^2 + v* M v) / 2`.
pub fn discrete_energy(p: &DiscretePencil, u: &[Complex64], v: &[Complex64]) -> (f64, f64) {
    let ku = p.apply_stiffness(u);
    let kv = p.apply_stiffness(v);
    let vmv = m_norm(p.mass(), v).powi(2);
    let e = 0.5 * (dot(u, &ku).re.max(0.0) + vmv);
    let e1 = 0.5 * (dot(v, &kv).re.max(0.0) + m_inv_norm(p.mass(), &ku).powi(2) + vmv);
    (e, e1)
}

/// `||P(i lambda)^-1||` sampled at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventSample {
    pub lambda: f64,
    pub n_max: u32,
    pub grid_n: usize,
    /// `+inf` when `singular` is set.
    pub norm: f64,
    pub singular: bool,
    /// Mode attaining the maximum.
    pub argmax_n: u32,
}

const RESOLVENT_RTOL: f64 = 1e-6;
const RESOLVENT_MAX_ITER: usize = 2000;

/// `1 / sigma_min(M^-1/2 P(i lambda) M^-1/2)` for one mode, or `None` if singular.
pub fn mode_resolvent_norm(p: &DiscretePencil, lambda: f64) -> Option<f64> {
    let z = Complex64::new(0.0, lambda);
    let lu = p.pencil_matrix(z).factorize().ok()?;
    // B^-1 = M^1/2 P^-1 M^1/2 is complex symmetric, so B^-H x = conj(B^-1 conj x)
    let s: Vec<f64> = p.mass().iter().map(|m| m.sqrt()).collect();
    let binv = |x: &[Complex64]| -> Vec<Complex64> {
        let mut y: Vec<Complex64> = x.iter().zip(&s).map(|(v, w)| v * w).collect();
        lu.solve_in_place(&mut y);
        y.iter_mut().zip(&s).for_each(|(v, w)| *v *= w);
        y
    };
    let dim = p.dim();
    let mut x: Vec<Complex64> = (0..dim)
        .map(|i| Complex64::new(1.0 + 0.5 * (i as f64 * 0.7).sin(), 0.0))
        .collect();
    normalize(&mut x);
    let mut prev = 0.0;
    let mut est = 0.0;
    for _ in 0..RESOLVENT_MAX_ITER {
        let y = binv(&x);
        let conj_y: Vec<Complex64> = y.iter().map(|v| v.conj()).collect();
        let mut w: Vec<Complex64> = binv(&conj_y).iter().map(|v| v.conj()).collect();
        est = l2(&w).sqrt();
        if !est.is_finite() {
            return None;
        }
        normalize(&mut w);
        x = w;
        if (est - prev).abs() <= RESOLVENT_RTOL * est {
            break;
        }
        prev = est;
    }
    // beyond this the factorization carries no significant digits
    (est < 1e14).then_some(est)
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = l2(v);
    v.iter_mut().for_each(|x| *x /= n);
}

/// Largest `||P(i lambda)^-1||` over the modes `0..=n_max`.
pub fn resolvent_norm(n_max: u32, lambda: f64, points: usize) -> Result<ResolventSample> {
    if !(1.0..=500.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} outside [1, 500]")));
    }
    let pencils: Vec<DiscretePencil> =
        (0..=n_max).map(|n| assemble(n, points)).collect::<Result<_>>()?;
    let norms: Vec<Option<f64>> =
        pencils.par_iter().map(|p| mode_resolvent_norm(p, lambda)).collect();
    let mut sample = ResolventSample {
        lambda,
        n_max,
        grid_n: points,
        norm: 0.0,
        singular: false,
        argmax_n: 0,
    };
    for (n, v) in norms.into_iter().enumerate() {
        match v {
            None => {
                sample.norm = f64::INFINITY;
                sample.singular = true;
                sample.argmax_n = n as u32;
                break;
            }
            Some(v) if v > sample.norm => {
                sample.norm = v;
                sample.argmax_n = n as u32;
            }
            Some(_) => {}
        }
    }
    Ok(sample)
}

/// Dirichlet (`w(1) = 0`) restriction of the `n = 0` operator, used by the Hautus probe.
#[derive(Debug, Clone)]
pub struct DirichletOperator {
    pencil: DiscretePencil,
    dim: usize,
    last_d: [f64; DEGREE + 1],
}

/// The three terms of a Hautus ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HautusTerms {
    /// `||w||_{H^1_h}`
    pub h1: f64,
    /// `h^-1 ||(-h^2 Delta_h - 1) w||`
    pub volume: f64,
    /// `h ||d_nu w||`
    pub boundary: f64,
    pub ratio: f64,
}

impl DirichletOperator {
    pub fn new(points: usize) -> Result<Self> {
        let pencil = assemble(0, points)?;
        let dim = pencil.dim() - 1;
        let gll = ReferenceElement::gauss_lobatto(DEGREE);
        let mut last_d = [0.0; DEGREE + 1];
        last_d.copy_from_slice(&gll.d[DEGREE]);
        Ok(Self { pencil, dim, last_d })
    }

    /// Number of interior unknowns.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mass(&self) -> &[f64] {
        &self.pencil.mass()[..self.dim]
    }

    /// `K_D w` with the boundary value held at zero.
    pub fn apply_k(&self, w: &[Complex64]) -> Vec<Complex64> {
        let mut full = w.to_vec();
        full.push(Complex64::new(0.0, 0.0));
        let mut out = self.pencil.apply_stiffness(&full);
        out.pop();
        out
    }

    fn diag_k(&self, i: usize) -> f64 {
        self.pencil.stiffness_diag(i)
    }

    /// `a K_D + c M_D` in band storage.
    pub fn combination(&self, a: Complex64, c: Complex64) -> BandMatrix<Complex64> {
        let mut m = BandMatrix::zeros(self.dim, BW, BW);
        for i in 0..self.dim {
            m.add(i, i, a * self.diag_k(i) + c * self.pencil.mass[i]);
            for d in 1..=BW {
                if i + d < self.dim {
                    let v = a * self.pencil.stiffness(i, i + d);
                    m.add(i, i + d, v);
                    m.add(i + d, i, v);
                }
            }
        }
        m
    }

    /// `d w / dr` at `r = 1` from the last element's interpolant.
    pub fn normal_derivative(&self, w: &[Complex64]) -> Complex64 {
        let base = self.dim + 1 - (DEGREE + 1);
        let jac = self.pencil.grid.h_r / 2.0;
        (0..DEGREE)
            .map(|j| w[base + j] * self.last_d[j])
            .sum::<Complex64>()
            / jac
    }

    /// Hautus ratio of `w` at frequency `lambda` (`h = 1 / lambda`).
    pub fn ratio(&self, w: &[Complex64], lambda: f64) -> Result<HautusTerms> {
        if w.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "probe length {} does not match {}",
                w.len(),
                self.dim
            )));
        }
        if w.iter().all(|x| *x == Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidArgument("zero probe vector".into()));
        }
        let h = 1.0 / lambda;
        let m = self.mass();
        let kw = self.apply_k(w);
        let h1 = (h * h * dot(w, &kw).re.max(0.0) + m_norm(m, w).powi(2)).sqrt();
        let vol_sq: f64 = (0..self.dim)
            .map(|i| m[i] * (h * h * kw[i] / m[i] - w[i]).norm_sqr())
            .sum();
        let volume = vol_sq.sqrt() / h;
        let boundary = h * TWO_PI.sqrt() * self.normal_derivative(w).norm();
        Ok(HautusTerms { h1, volume, boundary, ratio: h1 / (volume + boundary) })
    }

    /// Dirichlet eigenpair `(mu^2, w)` nearest `target`, by shifted inverse iteration.
    pub fn eigenpair_near(&self, target: f64, steps: usize) -> Result<(f64, Vec<Complex64>)> {
        let lu = self
            .combination(Complex64::new(1.0, 0.0), Complex64::new(-target, 0.0))
            .factorize()?;
        let m = self.mass().to_vec();
        let mut x: Vec<Complex64> =
            (0..self.dim).map(|i| Complex64::new(1.0 + (i as f64 * 0.37).cos(), 0.0)).collect();
        let mut mu = target;
        for _ in 0..steps {
            let mx: Vec<Complex64> = x.iter().zip(&m).map(|(v, w)| v * w).collect();
            let y = lu.solve(&mx);
            let nrm = m_norm(&m, &y);
            x = y.iter().map(|v| v / nrm).collect();
            mu = dot(&x, &self.apply_k(&x)).re;
        }
        Ok((mu, x))
    }
}

/// Per-frequency result of the Hautus probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HautusRow {
    pub lambda: f64,
    pub max_ratio: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HautusReport {
    pub rows: Vec<HautusRow>,
    pub overall_max: f64,
    /// Largest over smallest per-frequency maximum.
    pub spread: f64,
}

impl HautusReport {
    /// Empirical constants stay within one order of magnitude.
    pub fn bounded(&self) -> bool {
        self.spread.is_finite() && self.spread <= 10.0
    }
}

/// Random Dirichlet probes of the Hautus inequality for the `n = 0` mode.
///
/// Each probe is white noise, damped by two Jacobi sweeps of `K_D` and then
/// filtered by `(K_D - (lambda^2 + i lambda) M_D)^-1 M_D`, which keeps the
/// spectral content within about one unit of `lambda`.
pub fn hautus_probe(
    lambdas: &[f64],
    points: usize,
    samples: usize,
    seed: u64,
) -> Result<HautusReport> {
    if lambdas.is_empty() || samples == 0 {
        return Err(Error::InvalidArgument("need at least one frequency and one sample".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument(format!("frequency {l} must be positive")));
    }
    let op = DirichletOperator::new(points)?;
    let rows: Vec<HautusRow> = lambdas
        .par_iter()
        .enumerate()
        .map(|(li, &lambda)| -> Result<HautusRow> {
            let shift = Complex64::new(lambda * lambda, lambda);
            let lu: BandLu<Complex64> =
                op.combination(Complex64::new(1.0, 0.0), -shift).factorize()?;
            let mut best = 0.0f64;
            for s in 0..samples {
                let w = probe_vector(&op, &lu, seed, li as u64, s as u64);
                best = best.max(op.ratio(&w, lambda)?.ratio);
            }
            Ok(HautusRow { lambda, max_ratio: best, samples })
        })
        .collect::<Result<_>>()?;
    let overall_max = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let overall_min = rows.iter().map(|r| r.max_ratio).fold(f64::INFINITY, f64::min);
    Ok(HautusReport { rows, overall_max, spread: overall_max / overall_min })
}

fn probe_vector(
    op: &DirichletOperator,
    lu: &BandLu<Complex64>,
    seed: u64,
    stream: u64,
    index: u64,
) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(index) * u128::from(op.dim() as u64) * 2);
    let mut w: Vec<Complex64> =
        (0..op.dim()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
    for _ in 0..2 {
        let kw = op.apply_k(&w);
        for i in 0..w.len() {
            w[i] -= kw[i] * (2.0 / 3.0) / op.diag_k(i);
        }
    }
    let m = op.mass();
    let mut y: Vec<Complex64> = w.iter().zip(m).map(|(v, m)| v * m).collect();
    lu.solve_in_place(&mut y);
    y
}
