//! Roots of the characteristic equation
//!
//! ```text
//! F_n(lambda) = (n^2 + i lambda - lambda^2) J_n(lambda) + lambda J_n'(lambda) = 0
//! ```
//!
//! whose solutions give the pencil eigenvalues `z = i lambda` for the angular
//! mode `n`. Roots are refined by Newton iteration and certified by counting
//! zeros with the argument principle on rectangles of the lambda-plane.
//!
//! The tables list the focusing family, one root per zero of `J_n`, with
//! `Re lambda > 0`. Each mode also has one boundary-dominated root with large
//! imaginary part (on the imaginary axis for `n = 0`, near `n + 0.2 + 0.4i`
//! otherwise); it is not part of the tables.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::BesselEvaluator;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Newton iterates with `|lambda|` below this are the removable zero at the origin.
pub const SPURIOUS_RADIUS: f64 = 0.5;
/// Roots closer than this are merged.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Minimum `|F|` allowed on a counting contour.
pub const BOUNDARY_FLOOR: f64 = 1e-8;
const MIN_NODES: usize = 64;
const MAX_NODES: usize = 1 << 16;
const MAX_NEWTON: usize = 50;

/// Half-width in `Re lambda` of the box that certifies a single root.
pub const CERT_HALF_WIDTH: f64 = 0.4;
/// Imaginary extent of the certification box.
pub const CERT_IM: (f64, f64) = (-0.25, 0.5);
/// Imaginary extent of the strip used to check that no root of the family was skipped.
pub const STRIP_IM: (f64, f64) = (-0.25, 0.25);
const STRIP_GROUP: usize = 8;

/// A root of `F_n` together with the pencil eigenvalue it defines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PencilEigenvalue {
    pub n: u32,
    /// Radial index, 1-based in order of increasing `Re lambda`. Zero when the root
    /// was produced outside a table.
    pub k: u32,
    #[serde(serialize_with = "ser_complex")]
    pub lambda: Complex64,
    /// `i * lambda`
    #[serde(serialize_with = "ser_complex")]
    pub z: Complex64,
    /// `|F_n(lambda)|`
    pub residual: f64,
    pub certified: bool,
    /// Argument-principle count on the certification box, when one was run.
    pub winding: Option<i64>,
    #[serde(serialize_with = "ser_opt_complex")]
    pub predicted: Option<Complex64>,
}

impl PencilEigenvalue {
    /// `sigma_k = Re z_k`
    pub fn sigma(&self) -> f64 {
        self.z.re
    }

    /// `omega_k = Im z_k`
    pub fn omega(&self) -> f64 {
        self.z.im
    }

    /// Distance to the asymptotic prediction, when there is one.
    pub fn abs_err(&self) -> Option<f64> {
        self.predicted.map(|p| (self.lambda - p).norm())
    }
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn ser_opt_complex<S: serde::Serializer>(
    z: &Option<Complex64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    z.map(|z| [z.re, z.im]).serialize(s)
}

/// Axis-aligned rectangle in the lambda-plane with its root count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub lo: Complex64,
    pub hi: Complex64,
    pub winding: i64,
    /// Trapezoid nodes on the boundary at the accepted refinement level.
    pub quadrature_nodes: usize,
}

impl SearchBox {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.lo.re && z.re < self.hi.re && z.im > self.lo.im && z.im < self.hi.im
    }
}

fn check_order(ev: &BesselEvaluator, n: u32) -> Result<()> {
    if n > ev.max_order {
        return Err(Error::InvalidArgument(format!(
            "angular mode {n} exceeds max_order {}",
            ev.max_order
        )));
    }
    Ok(())
}

fn check_point(lambda: Complex64) -> Result<()> {
    if lambda.re.is_finite() && lambda.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("non-finite lambda {lambda}")))
    }
}

/// `F_n(lambda)`.
///
/// Unlike the Bessel evaluators this accepts any finite `lambda`; accuracy
/// degrades like `eps * |lambda|^3` through the Hankel branch.
pub fn char_fn(ev: &BesselEvaluator, n: u32, lambda: Complex64) -> Result<Complex64> {
    check_order(ev, n)?;
    check_point(lambda)?;
    let j = ev.j_unchecked(n, lambda);
    let jp = ev.j_prime_unchecked(n, lambda);
    let nn = f64::from(n * n);
    finite((nn + I * lambda - lambda * lambda) * j + lambda * jp)
}

/// `F_n` and its derivative, the latter via the Bessel equation for `J_n''`.
fn char_fn_with_derivative(
    ev: &BesselEvaluator,
    n: u32,
    lambda: Complex64,
) -> Result<(Complex64, Complex64)> {
    let j = ev.j_unchecked(n, lambda);
    let jp = ev.j_prime_unchecked(n, lambda);
    let nn = f64::from(n * n);
    let a = nn + I * lambda - lambda * lambda;
    let f = a * j + lambda * jp;
    let df = (I - 2.0 * lambda + (nn - lambda * lambda) / lambda) * j + a * jp;
    Ok((finite(f)?, finite(df)?))
}

fn finite(v: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericalFailure(format!("non-finite function value {v}")))
    }
}

/// Closed-form large-k approximation of the k-th `n = 0` root:
/// `phi + 1/(8 phi) + phi/(1 + phi^2) + i/(1 + phi^2)` with `phi = k pi - pi/4`.
///
/// Only accurate for `k >= 5`; smaller `k` still give usable Newton seeds.
pub fn asymptotic_root(k: u64) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::InvalidArgument("radial index k must be >= 1".into()));
    }
    let phi = k as f64 * PI - FRAC_PI_4;
    let d = 1.0 + phi * phi;
    Ok(Complex64::new(phi + 1.0 / (8.0 * phi) + phi / d, 1.0 / d))
}

/// Result of [`newton`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub root: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

/// Central difference with step `h` and one Richardson level.
fn derivative<F>(f: &F, x: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let h = 1e-7 * (1.0 + x.norm());
    let d = |h: f64| -> Result<Complex64> {
        let h = Complex64::new(h, 0.0);
        Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
    };
    Ok((d(h / 2.0)? * 4.0 - d(h)?) / 3.0)
}

/// Complex Newton iteration with a finite-difference derivative and step halving.
///
/// Stops once `|f(x)| <= threshold(x)`, after one further polishing step.
pub fn newton<F, W>(f: F, seed: Complex64, threshold: W) -> Result<NewtonOutcome>
where
    F: Fn(Complex64) -> Result<Complex64>,
    W: Fn(Complex64) -> f64,
{
    let mut x = seed;
    let mut fx = f(x)?;
    let mut met = false;
    for it in 1..=MAX_NEWTON {
        let d = derivative(&f, x)?;
        if d.norm() == 0.0 || !d.re.is_finite() || !d.im.is_finite() {
            return Err(Error::NumericalFailure(format!("vanishing derivative at {x}")));
        }
        let step = fx / d;
        let mut t = 1.0;
        let mut next = x - step;
        let mut fnext = f(next)?;
        for _ in 0..8 {
            if fnext.norm() <= fx.norm() {
                break;
            }
            t *= 0.5;
            next = x - step * t;
            fnext = f(next)?;
        }
        if met {
            // polishing step: keep it only if it does not hurt
            if fnext.norm() <= fx.norm() {
                x = next;
                fx = fnext;
            }
            return Ok(NewtonOutcome { root: x, residual: fx.norm(), iterations: it });
        }
        x = next;
        fx = fnext;
        if !x.re.is_finite() || !x.im.is_finite() {
            break;
        }
        met = fx.norm() <= threshold(x);
    }
    Err(Error::NumericalFailure(format!(
        "Newton from {seed} did not converge in {MAX_NEWTON} iterations (|f| = {:.3e})",
        fx.norm()
    )))
}

/// Maps a root to the representative with `Re lambda >= 0`.
///
/// `F_n(-conj(lambda)) = (-1)^n conj(F_n(lambda))`, and `-conj(lambda)` is the
/// lambda of the conjugate eigenvalue `conj(z)`.
pub fn canonical(lambda: Complex64) -> Complex64 {
    if lambda.re < 0.0 {
        -lambda.conj()
    } else {
        lambda
    }
}

/// Refines `seed` to a root of `F_n` with `|F_n| <= tol (1 + |lambda|^2)`.
pub fn newton_root(
    ev: &BesselEvaluator,
    n: u32,
    seed: Complex64,
    tol: f64,
) -> Result<PencilEigenvalue> {
    check_order(ev, n)?;
    check_point(seed)?;
    if seed.norm() <= SPURIOUS_RADIUS {
        return Err(Error::InvalidArgument(format!(
            "seed {seed} lies within {SPURIOUS_RADIUS} of the removable zero"
        )));
    }
    if !(tol >= 1e-14) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!("tol must be finite and >= 1e-14, got {tol}")));
    }
    let out = newton(|l| char_fn(ev, n, l), seed, |l| tol * (1.0 + l.norm_sqr()))?;
    if out.root.norm() < SPURIOUS_RADIUS {
        return Err(Error::SpuriousRoot { modulus: out.root.norm() });
    }
    let lambda = canonical(out.root);
    Ok(PencilEigenvalue {
        n,
        k: 0,
        lambda,
        z: I * lambda,
        residual: char_fn(ev, n, lambda)?.norm(),
        certified: false,
        winding: None,
        predicted: None,
    })
}

/// Argument-principle count for `f` on the rectangle `[lo, hi]`.
///
/// `fd` returns the function and its derivative.
pub fn winding<FD>(fd: FD, lo: Complex64, hi: Complex64) -> Result<SearchBox>
where
    FD: Fn(Complex64) -> Result<(Complex64, Complex64)>,
{
    if !(hi.re > lo.re && hi.im > lo.im) {
        return Err(Error::InvalidArgument(format!(
            "degenerate search box [{lo}, {hi}]"
        )));
    }
    let corners = [lo, Complex64::new(hi.re, lo.im), hi, Complex64::new(lo.re, hi.im)];
    let perimeter = 2.0 * ((hi.re - lo.re) + (hi.im - lo.im));
    let mut prev: Option<i64> = None;
    let mut nodes = MIN_NODES;
    while nodes <= MAX_NODES {
        let mut integral = Complex64::new(0.0, 0.0);
        let mut floor = f64::INFINITY;
        for s in 0..4 {
            let (a, b) = (corners[s], corners[(s + 1) % 4]);
            let m = ((nodes as f64 * (b - a).norm() / perimeter).ceil() as usize).max(2);
            let dz = (b - a) / m as f64;
            for q in 0..=m {
                let (f, df) = fd(a + dz * q as f64)?;
                floor = floor.min(f.norm());
                let w = if q == 0 || q == m { 0.5 } else { 1.0 };
                integral += df / f * dz * w;
            }
        }
        if floor < BOUNDARY_FLOOR {
            return Err(Error::BoundaryTooClose { min_modulus: floor });
        }
        let count = integral / (2.0 * PI * I);
        let rounded = count.re.round();
        let near = (count.re - rounded).abs() <= 0.25 && count.im.abs() <= 0.25;
        if near && prev == Some(rounded as i64) {
            return Ok(SearchBox { lo, hi, winding: rounded as i64, quadrature_nodes: nodes });
        }
        prev = near.then_some(rounded as i64);
        nodes *= 2;
    }
    Err(Error::NumericalFailure(format!(
        "winding number on [{lo}, {hi}] not integral with {MAX_NODES} nodes"
    )))
}

/// Number of zeros of `F_n` inside the rectangle `[lo, hi]`.
pub fn count_roots(ev: &BesselEvaluator, n: u32, lo: Complex64, hi: Complex64) -> Result<SearchBox> {
    check_order(ev, n)?;
    check_point(lo)?;
    check_point(hi)?;
    winding(|l| char_fn_with_derivative(ev, n, l), lo, hi)
}

/// Seeds for the first `count` roots of the focusing family.
fn seeds(ev: &BesselEvaluator, n: u32, count: usize) -> Result<Vec<Complex64>> {
    if n == 0 {
        return (1..=count as u64).map(asymptotic_root).collect();
    }
    // root ~ j + 1/j + i/j^2 near each zero j of J_n
    Ok(real_zeros(ev, n, count)
        .into_iter()
        .map(|j| Complex64::new(j + 1.0 / j, 1.0 / (j * j)))
        .collect())
}

/// First `count` positive zeros of `J_n`, by a sign-change scan and bisection.
fn real_zeros(ev: &BesselEvaluator, n: u32, count: usize) -> Vec<f64> {
    let jr = |x: f64| ev.j_unchecked(n, Complex64::new(x, 0.0)).re;
    let step = 0.25;
    let mut out = Vec::with_capacity(count);
    let mut a = 0.5;
    let mut fa = jr(a);
    while out.len() < count {
        let b = a + step;
        let fb = jr(b);
        if fa == 0.0 {
            out.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = jr(mid);
                if fm * flo <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    out
}

/// First `k_max` roots of the focusing family for mode `n`, sorted by `Re lambda`.
///
/// Every root gets a certification box `[Re lambda -/+ 0.4] x [-0.25, 0.5]` that
/// must contain exactly one zero. The strip `Im lambda in [-0.25, 0.25]` up to the
/// last root is also counted, in groups, to make sure no root was skipped;
/// a group whose count disagrees leaves its roots uncertified.
pub fn root_table(
    ev: &BesselEvaluator,
    n: u32,
    k_max: usize,
    tol: f64,
) -> Result<Vec<PencilEigenvalue>> {
    check_order(ev, n)?;
    if k_max == 0 || k_max > 10_000 {
        return Err(Error::InvalidArgument(format!("k_max must be in [1, 10000], got {k_max}")));
    }
    let seeds = seeds(ev, n, k_max + 1)?;
    let found: Vec<PencilEigenvalue> = seeds
        .par_iter()
        .filter_map(|&s| newton_root(ev, n, s, tol).ok())
        .filter(|r| r.lambda.im.abs() <= STRIP_IM.1)
        .collect();
    let mut roots = dedup_sorted(found);
    let end = if roots.len() > k_max {
        0.5 * (roots[k_max - 1].lambda.re + roots[k_max].lambda.re)
    } else {
        roots.last().map_or(1.0, |r| r.lambda.re + 1.0)
    };
    roots.truncate(k_max);

    roots.par_iter_mut().enumerate().for_each(|(i, r)| {
        r.k = i as u32 + 1;
        if n == 0 {
            r.predicted = asymptotic_root(u64::from(r.k)).ok();
        }
        let lo = Complex64::new(r.lambda.re - CERT_HALF_WIDTH, CERT_IM.0);
        let hi = Complex64::new(r.lambda.re + CERT_HALF_WIDTH, CERT_IM.1);
        r.winding = count_roots(ev, n, lo, hi).ok().map(|b| b.winding);
        r.certified = r.winding == Some(1) && r.residual <= tol * (1.0 + r.lambda.norm_sqr());
    });

    // group boundaries sit halfway between neighbouring roots; J_n has no zeros
    // below n, and F_n is too flat near its order-n zero at the origin
    let mut edges = vec![SPURIOUS_RADIUS.max(f64::from(n))];
    let mut groups = Vec::new();
    for start in (0..roots.len()).step_by(STRIP_GROUP) {
        let stop = (start + STRIP_GROUP).min(roots.len());
        let right = if stop < roots.len() {
            0.5 * (roots[stop - 1].lambda.re + roots[stop].lambda.re)
        } else {
            end
        };
        edges.push(right);
        groups.push(start..stop);
    }
    let ok: Vec<bool> = groups
        .par_iter()
        .enumerate()
        .map(|(g, range)| {
            let lo = Complex64::new(edges[g], STRIP_IM.0);
            let hi = Complex64::new(edges[g + 1], STRIP_IM.1);
            count_roots(ev, n, lo, hi).map_or(false, |b| b.winding == range.len() as i64)
        })
        .collect();
    for (range, ok) in groups.into_iter().zip(ok) {
        if !ok {
            for r in &mut roots[range] {
                r.certified = false;
            }
        }
    }
    Ok(roots)
}

fn dedup_sorted(mut v: Vec<PencilEigenvalue>) -> Vec<PencilEigenvalue> {
    v.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    let mut out: Vec<PencilEigenvalue> = Vec::with_capacity(v.len());
    for r in v {
        if out.iter().rev().take(4).all(|o| (o.lambda - r.lambda).norm() > DEDUP_RADIUS) {
            out.push(r);
        }
    }
    out
}

/// `J_n(lambda r) e^{i n theta}`.
pub fn eigenfunction(
    ev: &BesselEvaluator,
    n: u32,
    lambda: Complex64,
    r: f64,
    theta: f64,
) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("radius {r} outside [0, 1]")));
    }
    let radial = ev.j(n, lambda * r)?;
    Ok(radial * Complex64::from_polar(1.0, f64::from(n) * theta))
}

/// One row of a [`SharpnessReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub k: u32,
    pub omega: f64,
    pub sigma: f64,
    /// `sigma * omega^2`, which tends to -1.
    pub product: f64,
}

/// Checks that the `n = 0` family approaches the imaginary axis like `-1/omega^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub rows: Vec<SharpnessRow>,
    pub violations: Vec<String>,
}

impl SharpnessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Index from which `|sigma omega^2 + 1| <= 0.05` is required.
pub const SHARPNESS_FROM_K: u32 = 20;
pub const SHARPNESS_TOL: f64 = 0.05;

pub fn sharpness_report(table: &[PencilEigenvalue]) -> SharpnessReport {
    let mut rows = Vec::with_capacity(table.len());
    let mut violations = Vec::new();
    for r in table {
        if r.n != 0 {
            violations.push(format!("k = {}: mode n = {} in an n = 0 report", r.k, r.n));
        }
        let row = SharpnessRow {
            k: r.k,
            omega: r.omega(),
            sigma: r.sigma(),
            product: r.sigma() * r.omega() * r.omega(),
        };
        if !(row.sigma < 0.0) {
            violations.push(format!("k = {}: sigma = {} is not negative", r.k, row.sigma));
        }
        if r.k >= SHARPNESS_FROM_K && (row.product + 1.0).abs() > SHARPNESS_TOL {
            violations.push(format!(
                "k = {}: sigma * omega^2 = {:.6} differs from -1 by more than {SHARPNESS_TOL}",
                r.k, row.product
            ));
        }
        rows.push(row);
    }
    SharpnessReport { rows, violations }
}

/// Roots `z` with `Im z > 0` of `tanh(l z) + 1/(1 + z) = 0`, the interval analogue
/// of the characteristic equation, each certified by a box
/// `Re z in [-1, 0]`, `Im z in [k pi / l -/+ 0.45 pi / l]`.
pub fn oracle_1d_roots(length: f64, count: usize) -> Result<Vec<Complex64>> {
    if !(0.1..=10.0).contains(&length) {
        return Err(Error::InvalidArgument(format!("length {length} outside [0.1, 10]")));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let l = length;
    let g = move |z: Complex64| finite((l * z).tanh() + 1.0 / (1.0 + z));
    let gd = move |z: Complex64| {
        let c = (l * z).cosh();
        Ok((g(z)?, finite(l / (c * c) - 1.0 / ((1.0 + z) * (1.0 + z)))?))
    };
    (1..=count)
        .into_par_iter()
        .map(|k| {
            let w = I * (k as f64 * PI / l);
            let seed = w - 1.0 / (l * (1.0 + w));
            let out = newton(g, seed, |_| 1e-13)?;
            let lo = Complex64::new(-1.0, (k as f64 - 0.45) * PI / l);
            let hi = Complex64::new(0.0, (k as f64 + 0.45) * PI / l);
            let b = winding(gd, lo, hi)?;
            if b.winding != 1 || !b.contains(out.root) {
                return Err(Error::NumericalFailure(format!(
                    "1-D root {k}: box count {} for Newton result {}",
                    b.winding, out.root
                )));
            }
            Ok(out.root)
        })
        .collect()
}
