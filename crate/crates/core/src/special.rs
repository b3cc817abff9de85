//! Bessel functions of the first kind, integer order, complex argument.
//!
//! Small arguments use the ascending power series
//!
//! ```text
//! J_n(z) = sum_m (-1)^m / (m! (m+n)!) (z/2)^(2m+n)
//! ```
//!
//! and large arguments use the Hankel asymptotic expansion of `J_0` and `J_1`,
//! higher orders being reached by upward recurrence. Zeros of `J_0` are
//! obtained by Newton iteration from the McMahon approximation.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest modulus accepted by the public evaluators.
pub const MAX_ARGUMENT: f64 = 1e4;

/// Above this order the leading series coefficient is formed in log space.
const LOG_FACTORIAL_THRESHOLD: u32 = 20;

/// Relative size below which a series term ends the summation.
const SERIES_CUTOFF: f64 = 1e-18;

/// Configuration for evaluating `J_n` and `J_n'`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BesselEvaluator {
    /// Highest order accepted.
    pub max_order: u32,
    /// Cap on the number of power-series terms.
    pub series_terms: usize,
    /// `|z|` above which the Hankel branch replaces the series.
    pub switch_radius: f64,
    /// Number of terms `a_k(nu) / z^k` kept in the Hankel expansion (k = 0, 1, ...).
    /// The expansion is also cut at its smallest term.
    pub hankel_terms: usize,
}

impl Default for BesselEvaluator {
    fn default() -> Self {
        Self { max_order: 10, series_terms: 60, switch_radius: 12.0, hankel_terms: 40 }
    }
}

impl BesselEvaluator {
    pub fn new(
        max_order: u32,
        series_terms: usize,
        switch_radius: f64,
        hankel_terms: usize,
    ) -> Result<Self> {
        if series_terms == 0 {
            return Err(Error::InvalidArgument("series_terms must be positive".into()));
        }
        if !(switch_radius >= 10.0) || !switch_radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "switch_radius must be finite and >= 10, got {switch_radius}"
            )));
        }
        if hankel_terms < 2 {
            return Err(Error::InvalidArgument("hankel_terms must be at least 2".into()));
        }
        // upward recurrence is only stable while the order stays below |z|
        if f64::from(max_order) >= switch_radius {
            return Err(Error::InvalidArgument(format!(
                "max_order {max_order} must stay below switch_radius {switch_radius}"
            )));
        }
        Ok(Self { max_order, series_terms, switch_radius, hankel_terms })
    }

    fn check(&self, n: u32, z: Complex64) -> Result<()> {
        if n > self.max_order {
            return Err(Error::InvalidArgument(format!(
                "order {n} exceeds max_order {}",
                self.max_order
            )));
        }
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite argument {z}")));
        }
        if z.norm() > MAX_ARGUMENT {
            return Err(Error::InvalidArgument(format!(
                "|z| = {} exceeds {MAX_ARGUMENT}",
                z.norm()
            )));
        }
        Ok(())
    }

    /// `J_n(z)`.
    pub fn j(&self, n: u32, z: Complex64) -> Result<Complex64> {
        self.check(n, z)?;
        finite(self.j_unchecked(n, z), "J_n", z)
    }

    /// `J_n'(z)`.
    pub fn j_prime(&self, n: u32, z: Complex64) -> Result<Complex64> {
        self.check(n, z)?;
        finite(self.j_prime_unchecked(n, z), "J_n'", z)
    }

    pub(crate) fn j_unchecked(&self, n: u32, z: Complex64) -> Complex64 {
        if z.norm() <= self.switch_radius {
            return self.series_j(n, z);
        }
        match n {
            0 => self.hankel_expansion(0, z),
            1 => self.hankel_expansion(1, z),
            _ => {
                let mut prev = self.hankel_expansion(0, z);
                let mut cur = self.hankel_expansion(1, z);
                for m in 1..n {
                    let next = cur * (2.0 * f64::from(m)) / z - prev;
                    prev = cur;
                    cur = next;
                }
                cur
            }
        }
    }

    pub(crate) fn j_prime_unchecked(&self, n: u32, z: Complex64) -> Complex64 {
        if n == 0 {
            return -self.j_unchecked(1, z);
        }
        if z.norm() < 0.5 {
            return self.series_j_prime(n, z);
        }
        self.j_unchecked(n - 1, z) - self.j_unchecked(n, z) * f64::from(n) / z
    }

    /// Truncated power series for `J_n(z)`, without any branch selection.
    pub fn series_j(&self, n: u32, z: Complex64) -> Complex64 {
        let half = z * 0.5;
        let Some(first) = leading_term(n, half) else {
            return Complex64::new(0.0, 0.0);
        };
        // the alternating sum loses up to |z|^2/4 digits near the switch radius,
        // so the ratio to the leading term is accumulated in double-double
        let w = dd::Complex::square(half).neg();
        let mut term = dd::Complex::ONE;
        let mut sum = dd::Complex::ONE;
        for m in 1..self.series_terms {
            let m = m as f64;
            term = term.mul(w).div_real(m * (m + f64::from(n)));
            sum = sum.add(term);
            if term.norm() <= SERIES_CUTOFF * sum.norm() {
                break;
            }
        }
        first * sum.to_f64()
    }

    /// Term-by-term derivative of the power series.
    fn series_j_prime(&self, n: u32, z: Complex64) -> Complex64 {
        // d/dz (z/2)^(2m+n) = (2m+n)/2 (z/2)^(2m+n-1)
        if n == 0 {
            return -self.series_j(1, z);
        }
        let half = z * 0.5;
        let nf = f64::from(n);
        let Some(first) = leading_term(n - 1, half).map(|t| t / nf) else {
            return Complex64::new(0.0, 0.0);
        };
        // first == (z/2)^(n-1) / n!
        let w = -half * half;
        let mut base = first;
        let mut sum = base * (nf / 2.0);
        for m in 1..self.series_terms {
            let mf = m as f64;
            base = base * w / (mf * (mf + nf));
            let term = base * ((2.0 * mf + nf) / 2.0);
            sum += term;
            if term.norm() <= SERIES_CUTOFF * sum.norm() {
                break;
            }
        }
        sum
    }

    /// Hankel asymptotic expansion of `J_nu(z)` for `nu` in {0, 1}.
    ///
    /// Arguments with negative real part are reflected through
    /// `J_nu(-z) = (-1)^nu J_nu(z)` so the expansion is always used with
    /// `|arg z| <= pi/2`.
    pub fn hankel_expansion(&self, nu: u32, z: Complex64) -> Complex64 {
        debug_assert!(nu <= 1);
        if z.re < 0.0 {
            let v = self.hankel_expansion(nu, -z);
            return if nu % 2 == 1 { -v } else { v };
        }
        let (p, q) = self.hankel_pq(nu, z);
        let chi = z - (f64::from(nu) * 0.5 + 0.25) * PI;
        envelope(z) * (p * chi.cos() - q * chi.sin())
    }

    /// `P(nu, z)` and `Q(nu, z)` of the Hankel expansion.
    fn hankel_pq(&self, nu: u32, z: Complex64) -> (Complex64, Complex64) {
        let mu = 4.0 * f64::from(nu * nu);
        let mut p = Complex64::new(1.0, 0.0);
        let mut q = Complex64::new(0.0, 0.0);
        let mut a = Complex64::new(1.0, 0.0);
        let mut prev_size = f64::INFINITY;
        for k in 1..self.hankel_terms {
            let odd = (2 * k - 1) as f64;
            let next = a * (mu - odd * odd) / (8.0 * k as f64 * z);
            let size = next.norm();
            // asymptotic series: stop at the smallest term
            if size > prev_size {
                break;
            }
            a = next;
            prev_size = size;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 1 {
                q += a * sign;
            } else {
                p += a * sign;
            }
            if size < 1e-17 {
                break;
            }
        }
        (p, q)
    }

    /// `J_0(z)` from the Hankel expansion. Only valid for `|z| > switch_radius`.
    pub fn hankel_j0(&self, z: Complex64) -> Result<Complex64> {
        self.check_hankel(z)?;
        Ok(self.hankel_expansion(0, z))
    }

    /// `J_0'(z) = -sqrt(2/(pi z)) (f sin(z - pi/4) + g cos(z - pi/4))`.
    pub fn hankel_j0_prime(&self, z: Complex64) -> Result<Complex64> {
        self.check_hankel(z)?;
        if z.re < 0.0 {
            // J_0' is odd
            return Ok(-self.hankel_j0_prime_raw(-z));
        }
        Ok(self.hankel_j0_prime_raw(z))
    }

    fn hankel_j0_prime_raw(&self, z: Complex64) -> Complex64 {
        // f, g are the P, Q functions of order one
        let (f, g) = self.hankel_pq(1, z);
        let chi = z - FRAC_PI_4;
        -envelope(z) * (f * chi.sin() + g * chi.cos())
    }

    fn check_hankel(&self, z: Complex64) -> Result<()> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite argument {z}")));
        }
        if z.norm() <= self.switch_radius {
            return Err(Error::Domain(format!(
                "Hankel branch needs |z| > {}, got |z| = {}",
                self.switch_radius,
                z.norm()
            )));
        }
        Ok(())
    }
}

mod dd {
    //! Just enough double-double complex arithmetic for the power series.

    use num_complex::Complex64;

    #[derive(Debug, Clone, Copy)]
    struct Dd(f64, f64);

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd(s, (a - (s - bb)) + (b - bb))
    }

    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd(s, b - (s - a))
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd(p, a.mul_add(b, -p))
    }

    impl Dd {
        fn add(self, o: Dd) -> Dd {
            let Dd(s, e) = two_sum(self.0, o.0);
            quick_two_sum(s, e + self.1 + o.1)
        }

        fn neg(self) -> Dd {
            Dd(-self.0, -self.1)
        }

        fn mul(self, o: Dd) -> Dd {
            let Dd(p, e) = two_prod(self.0, o.0);
            quick_two_sum(p, e + self.0 * o.1 + self.1 * o.0)
        }

        fn div_real(self, d: f64) -> Dd {
            let q = self.0 / d;
            let Dd(p, e) = two_prod(q, d);
            quick_two_sum(q, (self.0 - p - e + self.1) / d)
        }
    }

    #[derive(Debug, Clone, Copy)]
    pub(super) struct Complex {
        re: Dd,
        im: Dd,
    }

    impl Complex {
        pub const ONE: Complex = Complex { re: Dd(1.0, 0.0), im: Dd(0.0, 0.0) };

        pub fn square(z: Complex64) -> Complex {
            let re = two_prod(z.re, z.re).add(two_prod(z.im, z.im).neg());
            let im = two_prod(z.re, z.im);
            Complex { re, im: Dd(2.0 * im.0, 2.0 * im.1) }
        }

        pub fn neg(self) -> Complex {
            Complex { re: self.re.neg(), im: self.im.neg() }
        }

        pub fn add(self, o: Complex) -> Complex {
            Complex { re: self.re.add(o.re), im: self.im.add(o.im) }
        }

        pub fn mul(self, o: Complex) -> Complex {
            Complex {
                re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
                im: self.re.mul(o.im).add(self.im.mul(o.re)),
            }
        }

        pub fn div_real(self, d: f64) -> Complex {
            Complex { re: self.re.div_real(d), im: self.im.div_real(d) }
        }

        pub fn norm(self) -> f64 {
            self.re.0.hypot(self.im.0)
        }

        pub fn to_f64(self) -> Complex64 {
            Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
        }
    }
}

/// `sqrt(2 / (pi z))` on the principal branch.
fn envelope(z: Complex64) -> Complex64 {
    (Complex64::new(2.0 / PI, 0.0) / z).sqrt()
}

/// `(z/2)^n / n!`, or `None` when it vanishes (z = 0, n > 0).
fn leading_term(n: u32, half: Complex64) -> Option<Complex64> {
    if n == 0 {
        return Some(Complex64::new(1.0, 0.0));
    }
    if half.norm() == 0.0 {
        return None;
    }
    if n <= LOG_FACTORIAL_THRESHOLD {
        let mut t = Complex64::new(1.0, 0.0);
        for k in 1..=n {
            t = t * half / f64::from(k);
        }
        Some(t)
    } else {
        let log_fact: f64 = (2..=n).map(|k| f64::from(k).ln()).sum();
        Some((half.ln() * f64::from(n) - log_fact).exp())
    }
}

fn finite(v: Complex64, what: &str, z: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericalFailure(format!("{what} overflowed at z = {z}")))
    }
}

/// McMahon's large-index approximation of the k-th positive zero of `J_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMahonSeed {
    pub k: u64,
    /// `k pi - pi/4`
    pub phi_k: f64,
    /// `phi_k + 1 / (8 phi_k)`
    pub seed_value: f64,
}

impl McMahonSeed {
    pub fn new(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("zero index k must be >= 1".into()));
        }
        let phi_k = k as f64 * PI - FRAC_PI_4;
        Ok(Self { k, phi_k, seed_value: phi_k + 1.0 / (8.0 * phi_k) })
    }
}

/// Outcome of [`bessel_zero_with_stats`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroRefinement {
    pub seed: McMahonSeed,
    pub value: f64,
    pub iterations: usize,
}

/// The k-th positive zero `alpha_{0k}` of `J_0`.
pub fn bessel_zero(ev: &BesselEvaluator, k: u64) -> Result<f64> {
    bessel_zero_with_stats(ev, k).map(|r| r.value)
}

/// Newton refinement of the McMahon seed, reporting the iteration count.
pub fn bessel_zero_with_stats(ev: &BesselEvaluator, k: u64) -> Result<ZeroRefinement> {
    const MAX_ITER: usize = 50;
    let seed = McMahonSeed::new(k)?;
    let mut x = seed.seed_value;
    for it in 1..=MAX_ITER {
        let z = Complex64::new(x, 0.0);
        let f = ev.j_unchecked(0, z).re;
        let df = -ev.j_unchecked(1, z).re;
        let step = f / df;
        x -= step;
        if !x.is_finite() {
            break;
        }
        if step.abs() <= 1e-12 * x.abs() {
            return Ok(ZeroRefinement { seed, value: x, iterations: it });
        }
    }
    Err(Error::NumericalFailure(format!(
        "Newton for zero {k} of J_0 did not converge in {MAX_ITER} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn series_values_at_origin() {
        let ev = BesselEvaluator::default();
        assert_eq!(ev.j(0, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(ev.j(1, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(ev.j_prime(0, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!((ev.j_prime(1, c(0.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn j0_at_one() {
        let ev = BesselEvaluator::default();
        // 40-term partial sum, unchanged with 80 terms
        let v = ev.j(0, c(1.0, 0.0)).unwrap();
        assert!((v.re - 0.765197686557967).abs() < 1e-12);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn first_zero_and_slope() {
        let ev = BesselEvaluator::default();
        let a = 2.404825557695773;
        assert!(ev.j(0, c(a, 0.0)).unwrap().norm() < 1e-12);
        let d = ev.j_prime(0, c(a, 0.0)).unwrap();
        assert!((d.re + 0.519147).abs() < 1e-5);
    }

    #[test]
    fn derivative_matches_richardson_difference() {
        let ev = BesselEvaluator::default();
        let z = c(2.404825557695773, 0.0);
        let h = 1e-6;
        let d = |h: f64| {
            (ev.j(0, z + c(h, 0.0)).unwrap() - ev.j(0, z - c(h, 0.0)).unwrap()) / (2.0 * h)
        };
        let rich = (d(h / 2.0) * 4.0 - d(h)) / 3.0;
        assert!((rich - ev.j_prime(0, z).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn errors_on_bad_input() {
        let ev = BesselEvaluator::default();
        assert!(matches!(ev.j(11, c(1.0, 0.0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(ev.j(0, c(f64::NAN, 0.0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(ev.j(0, c(2e4, 0.0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(ev.hankel_j0(c(5.0, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(ev.hankel_j0_prime(c(12.0, 0.0)), Err(Error::Domain(_))));
        assert!(BesselEvaluator::new(3, 60, 9.0, 10).is_err());
        assert!(BesselEvaluator::new(3, 60, 12.0, 1).is_err());
    }

    #[test]
    fn hankel_two_terms_matches_closed_form() {
        let ev = BesselEvaluator { hankel_terms: 2, ..Default::default() };
        let z = c(40.0, 0.3);
        let chi = z - FRAC_PI_4;
        let env = (c(2.0 / PI, 0.0) / z).sqrt();
        let p = c(1.0, 0.0);
        let q = -1.0 / (z * 8.0);
        let want = env * (p * chi.cos() - q * chi.sin());
        assert!((ev.hankel_j0(z).unwrap() - want).norm() < 1e-15);
        let g = 3.0 / (z * 8.0);
        let want_prime = -env * (chi.sin() + g * chi.cos());
        assert!((ev.hankel_j0_prime(z).unwrap() - want_prime).norm() < 1e-15);
    }

    #[test]
    fn hankel_agrees_with_series_at_twelve() {
        let ev = BesselEvaluator::default();
        let z = c(12.0 + 1e-9, 0.0);
        let diff = ev.hankel_j0(z).unwrap() - ev.series_j(0, z);
        assert!(diff.norm() < 1e-8, "diff {diff}");
    }

    #[test]
    fn near_tenth_zero_is_small() {
        let ev = BesselEvaluator::default();
        let v = ev.hankel_j0(c(30.6305, 0.0)).unwrap();
        assert!(v.norm() <= 0.15);
        assert!(v.norm() <= (2.0 / (PI * 30.6305)).sqrt());
    }

    #[test]
    fn hankel_ode_residual_off_axis() {
        let ev = BesselEvaluator::default();
        let z = c(20.0, 0.5);
        let j = ev.hankel_j0(z).unwrap();
        let jp = ev.hankel_j0_prime(z).unwrap();
        let jpp = -j - jp / z;
        let res = z * z * jpp + z * jp + z * z * j;
        assert!(j.re.is_finite());
        assert!(res.norm() / (z * z).norm() <= 1e-6);
    }

    #[test]
    fn negative_real_part_uses_parity() {
        let ev = BesselEvaluator::default();
        for &z in &[c(15.0, 0.2), c(3.0, -0.4), c(40.0, 1.0)] {
            for n in 0..4 {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let a = ev.j(n, -z).unwrap();
                let b = ev.j(n, z).unwrap() * sign;
                assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
            }
        }
    }

    #[test]
    fn large_order_uses_log_factorial() {
        let ev = BesselEvaluator::default();
        // J_25(1) ~ (1/2)^25 / 25!
        let t = leading_term(25, c(0.5, 0.0)).unwrap();
        let direct = 0.5f64.powi(25) / (1..=25).map(f64::from).product::<f64>();
        assert!((t.re - direct).abs() <= 1e-12 * direct);
        let _ = ev;
    }

    #[test]
    fn zeros_from_mcmahon() {
        let ev = BesselEvaluator::default();
        let z1 = bessel_zero(&ev, 1).unwrap();
        let z2 = bessel_zero(&ev, 2).unwrap();
        assert!((z1 - 2.404825557695773).abs() < 1e-12);
        assert!((z2 - 5.520078110286311).abs() < 1e-12);

        let r5 = bessel_zero_with_stats(&ev, 5).unwrap();
        assert!((r5.seed.seed_value - 14.9309417).abs() < 1e-7);
        assert!(((r5.value - r5.seed.seed_value).abs() - 2.4e-5).abs() < 0.1e-5);
        assert!(r5.iterations <= 8);
    }

    #[test]
    fn zero_residuals_and_iteration_budget() {
        let ev = BesselEvaluator::default();
        for k in (1..=200).chain([1_000, 10_000, 100_000]) {
            let r = bessel_zero_with_stats(&ev, k).unwrap();
            let v = ev.j_unchecked(0, Complex64::new(r.value, 0.0));
            assert!(v.norm() <= 1e-13, "k = {k}: |J0| = {}", v.norm());
            assert!(r.iterations <= 8, "k = {k}: {} iterations", r.iterations);
        }
    }

    #[test]
    fn mcmahon_seed_ordering() {
        for k in 1..1000 {
            let s = McMahonSeed::new(k).unwrap();
            assert!(s.seed_value > s.phi_k && s.phi_k > 0.0);
        }
        assert!(McMahonSeed::new(0).is_err());
    }
}
