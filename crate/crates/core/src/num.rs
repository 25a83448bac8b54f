//! Scalar numerics: bracketed root finding, adaptive quadrature, Runge-Kutta
//! steppers, and a counter-based RNG for reproducible scans.

use crate::error::{Error, Result};

/// Machine-scaled tolerance helper: `tol * (1 + |x|)`.
#[inline]
pub fn scaled(tol: f64, x: f64) -> f64 {
    tol * (1.0 + x.abs())
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Brent's method on a sign-changing bracket.
///
/// `fa` and `fb` are the function values at the endpoints; the caller is
/// expected to have verified `fa * fb <= 0`.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a0: f64,
    b0: f64,
    fa0: f64,
    fb0: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut a, mut b, mut fa, mut fb) = (a0, b0, fa0, fb0);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::Bracket {
            op: "brent",
            lo: a0,
            hi: b0,
            msg: format!("no sign change: f(lo)={fa0:.3e}, f(hi)={fb0:.3e}"),
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = b - a;
    for _ in 0..max_iter {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0));
                q = (q0 - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min(e.abs() * q.abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Ok(b)
}

/// Root of `f` on `[lo, hi]`, verifying the sign change first.
pub fn solve_bracketed<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    brent(f, lo, hi, flo, fhi, xtol, 200)
}

/// Expand a bracket geometrically from `x0` in direction `dir` until the sign
/// of `f` changes, then polish with Brent. `limit` caps the search.
pub fn expand_and_solve<F: FnMut(f64) -> f64>(
    mut f: F,
    x0: f64,
    dir: f64,
    init_step: f64,
    limit: f64,
    xtol: f64,
) -> Result<f64> {
    let f0 = f(x0);
    if f0 == 0.0 {
        return Ok(x0);
    }
    let mut step = init_step.abs() * dir.signum();
    let mut prev = x0;
    let mut fprev = f0;
    for _ in 0..128 {
        let mut next = prev + step;
        if (dir > 0.0 && next > limit) || (dir < 0.0 && next < limit) {
            next = limit;
        }
        let fnext = f(next);
        if fprev * fnext <= 0.0 {
            let (a, b, fa, fb) = if prev < next {
                (prev, next, fprev, fnext)
            } else {
                (next, prev, fnext, fprev)
            };
            return brent(f, a, b, fa, fb, xtol, 200);
        }
        if next == limit {
            break;
        }
        prev = next;
        fprev = fnext;
        step *= 1.8;
    }
    Err(Error::Bracket {
        op: "expand_and_solve",
        lo: x0.min(limit),
        hi: x0.max(limit),
        msg: "no sign change up to the window limit".into(),
    })
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// 15-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_X: [f64; 15] = [
    -0.9879925180204854,
    -0.9372733924007060,
    -0.8482065834104272,
    -0.7244177313601701,
    -0.5709721726085388,
    -0.3941513470775634,
    -0.2011940939974345,
    0.0,
    0.2011940939974345,
    0.3941513470775634,
    0.5709721726085388,
    0.7244177313601701,
    0.8482065834104272,
    0.9372733924007060,
    0.9879925180204854,
];
const GL_W: [f64; 15] = [
    0.03075324199611727,
    0.07036604748810812,
    0.1071592204671719,
    0.1395706779261543,
    0.1662692058169939,
    0.1861610000155622,
    0.1984314853271116,
    0.2025782419255613,
    0.1984314853271116,
    0.1861610000155622,
    0.1662692058169939,
    0.1395706779261543,
    0.1071592204671719,
    0.07036604748810812,
    0.03075324199611727,
];

/// Fixed 15-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss15<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..15 {
        acc += GL_W[i] * f(c + h * GL_X[i]);
    }
    acc * h
}

fn adaptive_rec<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    if !whole.is_finite() {
        return whole;
    }
    let m = 0.5 * (a + b);
    let left = gauss15(&mut *f, a, m);
    let right = gauss15(&mut *f, m, b);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= tol || !refined.is_finite() {
        return refined;
    }
    adaptive_rec(f, a, m, left, 0.5 * tol, depth - 1)
        + adaptive_rec(f, m, b, right, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss quadrature with absolute tolerance `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let whole = gauss15(&mut f, a, b);
    adaptive_rec(&mut f, a, b, whole, tol.max(1e-15), 13)
}

/// Improper integral on `(-inf, b]` or `[a, +inf)` by expanding panels until
/// a panel contributes less than `tol`. Returns `Err` when the panels keep
/// growing (divergence heuristic).
pub fn integrate_tail<F: FnMut(f64) -> f64>(
    mut f: F,
    from: f64,
    direction: f64,
    tol: f64,
    max_span: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    let mut a = from;
    let mut span = 1.0;
    let mut grew = 0usize;
    let mut last: Option<f64> = None;
    loop {
        let b = a + direction.signum() * span;
        let panel = if direction > 0.0 {
            integrate(&mut f, a, b, tol * 0.1)
        } else {
            integrate(&mut f, b, a, tol * 0.1)
        };
        acc += if direction > 0.0 { panel } else { panel };
        if panel.abs() <= tol {
            return Ok(acc);
        }
        if let Some(prev) = last {
            if panel.abs() > prev {
                grew += 1;
                if grew >= 6 {
                    return Err(Error::Divergent {
                        op: "integrate_tail",
                        msg: format!("panel magnitudes growing near {a:.3e}"),
                    });
                }
            } else {
                grew = 0;
            }
        }
        last = Some(panel.abs());
        a = b;
        span *= 1.6;
        if (a - from).abs() > max_span {
            return Ok(acc);
        }
    }
}

// ---------------------------------------------------------------------------
// ODE stepping (Dormand-Prince 5(4), scalar)
// ---------------------------------------------------------------------------

/// Integrate the scalar ODE `y' = rhs(t, y)` from `(t0, y0)` to `t1` with
/// adaptive Dormand-Prince. Tolerances are combined as `atol + rtol*|y|`.
pub fn ode_dopri5<F: FnMut(f64, f64) -> f64>(
    mut rhs: F,
    t0: f64,
    y0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
) -> f64 {
    if t0 == t1 {
        return y0;
    }
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = (0.05 * (t1 - t0).abs()).max(1e-12) * dir;
    let mut k1 = rhs(t, y);
    const A21: f64 = 0.2;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 && steps < 1_000_000 {
        steps += 1;
        if ((t + h) - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let k2 = rhs(t + 0.2 * h, y + h * A21 * k1);
        let k3 = rhs(t + 0.3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = rhs(t + 0.8 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = rhs(
            t + 8.0 / 9.0 * h,
            y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
        );
        let k6 = rhs(
            t + h,
            y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        );
        let ynew = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = rhs(t + h, ynew);
        let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let sc = atol + rtol * y.abs().max(ynew.abs());
        let ratio = (err / sc).abs();
        if ratio <= 1.0 {
            t += h;
            y = ynew;
            k1 = k7;
        }
        let factor = if ratio > 0.0 {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h.abs() < 1e-15 * (1.0 + t.abs()) {
            h = 1e-15 * (1.0 + t.abs()) * dir;
        }
    }
    y
}

// ---------------------------------------------------------------------------
// Chebyshev fits
// ---------------------------------------------------------------------------

/// Chebyshev interpolant of a smooth function on `[a, b]`.
///
/// Fits at Chebyshev-Gauss points; evaluation by Clenshaw recurrence; the
/// antiderivative is exact on the coefficients, which keeps the cached
/// kernels of a fence analytic within each knot interval.
#[derive(Debug, Clone)]
pub struct Cheb {
    a: f64,
    b: f64,
    coef: Vec<f64>,
}

impl Cheb {
    pub fn fit<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, degree: usize) -> Cheb {
        let n = degree + 1;
        let mut vals = Vec::with_capacity(n);
        for k in 0..n {
            let theta = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let x = theta.cos();
            let t = 0.5 * (a + b) + 0.5 * (b - a) * x;
            vals.push(f(t));
        }
        let mut coef = vec![0.0; n];
        for (j, c) in coef.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, v) in vals.iter().enumerate() {
                let theta = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
                acc += v * (j as f64 * theta).cos();
            }
            *c = 2.0 * acc / n as f64;
        }
        coef[0] *= 0.5;
        Cheb { a, b, coef }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = (2.0 * t - self.a - self.b) / (self.b - self.a);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coef.iter().skip(1).rev() {
            let tmp = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = tmp;
        }
        x * b1 - b2 + self.coef[0]
    }

    /// Antiderivative vanishing at `a`.
    pub fn antiderivative(&self) -> Cheb {
        let n = self.coef.len();
        let scale = 0.5 * (self.b - self.a);
        let mut out = vec![0.0; n + 1];
        // Treat coef[0] as the standard halved c0 convention: reconstruct
        // full coefficients first.
        let mut c = self.coef.clone();
        c[0] *= 2.0;
        for j in 1..=n {
            let cjm1 = if j >= 1 { c[j - 1] } else { 0.0 };
            let cjp1 = if j + 1 < n { c[j + 1] } else { 0.0 };
            out[j] = scale * (cjm1 - cjp1) / (2.0 * j as f64);
        }
        // (the constant term is fixed below so that F(a) = 0)
        let mut f = Cheb {
            a: self.a,
            b: self.b,
            coef: out,
        };
        let at_a = f.eval(self.a);
        f.coef[0] -= at_a;
        f
    }
}

// ---------------------------------------------------------------------------
// Counter-based RNG (SplitMix64 over an explicit counter)
// ---------------------------------------------------------------------------

/// Deterministic counter-based generator: the k-th draw for a given seed is a
/// pure function of `(seed, k)`, so scans are reproducible and order-free.
#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed, counter: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = Self::mix(
            self.seed
                .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(self.counter.wrapping_add(1))),
        );
        self.counter += 1;
        v
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_sqrt2() {
        let r = solve_bracketed(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn expand_finds_root_leftward() {
        let r = expand_and_solve(|x| x + 3.0, 0.0, -1.0, 0.5, -100.0, 1e-14).unwrap();
        assert!((r + 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_exp() {
        let v = integrate(|x| x.exp(), 0.0, 1.0, 1e-13);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn tail_integral_gaussian() {
        let v = integrate_tail(|x| (-x * x).exp(), 0.0, 1.0, 1e-13, 1e4).unwrap();
        assert!((v - core::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn tail_integral_divergent_reports() {
        assert!(integrate_tail(|x| x.exp(), 0.0, 1.0, 1e-13, 1e4).is_err());
    }

    #[test]
    fn dopri_matches_exp() {
        let y = ode_dopri5(|_, y| y, 0.0, 1.0, 1.0, 1e-12, 1e-14);
        assert!((y - 1f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn cheb_fit_and_antiderivative() {
        let c = Cheb::fit(|x| x.exp(), -0.5, 1.3, 14);
        for i in 0..=20 {
            let t = -0.5 + 1.8 * i as f64 / 20.0;
            assert!((c.eval(t) - t.exp()).abs() < 1e-13 * t.exp());
        }
        let ad = c.antiderivative();
        assert!(ad.eval(-0.5).abs() < 1e-14);
        for i in 0..=20 {
            let t = -0.5 + 1.8 * i as f64 / 20.0;
            let expect = t.exp() - (-0.5f64).exp();
            assert!((ad.eval(t) - expect).abs() < 1e-12, "at {t}");
        }
    }

    #[test]
    fn rng_is_counter_deterministic() {
        let mut a = CounterRng::new(42);
        let mut b = CounterRng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = CounterRng::new(43);
        assert_ne!(a.next_u64(), c.next_u64());
    }
}
