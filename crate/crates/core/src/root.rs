//! Bracketed scalar root finding (Brent's method).

use thiserror::Error;

pub const DEFAULT_X_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("invalid bracket [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("no convergence after {iterations} iterations (best x = {best}, f = {residual})")]
    MaxIterations {
        iterations: usize,
        best: f64,
        residual: f64,
    },
}

/// Interval `[lo, hi]` over which `f` changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// Evaluates `f` at both ends and checks for a sign change.
    ///
    /// An exact zero at either end is accepted.
    pub fn new<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<Self, RootError> {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let bracket = Bracket {
            lo,
            hi,
            f_lo: f(lo),
            f_hi: f(hi),
        };
        bracket.check()?;
        Ok(bracket)
    }

    fn check(&self) -> Result<(), RootError> {
        let ok = self.lo < self.hi
            && self.f_lo.is_finite()
            && self.f_hi.is_finite()
            && (self.f_lo == 0.0 || self.f_hi == 0.0 || (self.f_lo < 0.0) != (self.f_hi < 0.0));
        if ok {
            Ok(())
        } else {
            Err(RootError::InvalidBracket {
                lo: self.lo,
                hi: self.hi,
                f_lo: self.f_lo,
                f_hi: self.f_hi,
            })
        }
    }
}

/// Converged root with bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Brent's method: inverse quadratic interpolation and secant steps with a
/// bisection safeguard. Terminates once the bracket is narrower than
/// `x_tol * max(1, |x|)` or an exact zero is hit.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    bracket: Bracket,
    x_tol: f64,
    max_iter: usize,
) -> Result<Root, RootError> {
    bracket.check()?;
    if bracket.f_lo == 0.0 {
        return Ok(Root {
            x: bracket.lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if bracket.f_hi == 0.0 {
        return Ok(Root {
            x: bracket.hi,
            residual: 0.0,
            iterations: 0,
        });
    }

    // `b` is the best iterate, `a` the previous one, `c` keeps the sign change with `b`.
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (bracket.f_lo, bracket.f_hi);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 0.5 * x_tol * b.abs().max(1.0) + 0.5 * f64::EPSILON * b.abs();
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(Root {
                x: b,
                residual: fb,
                iterations: iter,
            });
        }

        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            // Fall back to the bracket midpoint; a non-finite value means we
            // stepped onto a singularity the bracket was supposed to exclude.
            b = a + m;
            fb = f(b);
        }
    }
    Err(RootError::MaxIterations {
        iterations: max_iter,
        best: b,
        residual: fb,
    })
}

/// Zero of `f` inside `bracket`, see [`brent`].
pub fn find_zero<F: FnMut(f64) -> f64>(
    f: F,
    bracket: Bracket,
    x_tol: f64,
    max_iter: usize,
) -> Result<f64, RootError> {
    brent(f, bracket, x_tol, max_iter).map(|r| r.x)
}

/// Convenience wrapper with default tolerances.
pub fn solve<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<f64, RootError> {
    let bracket = Bracket::new(&mut f, lo, hi)?;
    find_zero(f, bracket, DEFAULT_X_TOL, DEFAULT_MAX_ITER)
}
