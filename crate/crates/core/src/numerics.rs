//! Bracketing root finders used by the boundary and stationary-point solvers.
//!
//! Everything here is deterministic: the midpoint rule is fixed, and grid
//! points are computed from their index rather than by accumulation.

use crate::error::{Error, Result};
use crate::Scalar;

/// A closed interval together with the function values at its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub f_lo: T,
    pub f_hi: T,
}

impl<T: Scalar> Bracket<T> {
    /// Evaluates `f` at both ends and checks the root-bracket invariants.
    pub fn new<F: FnMut(T) -> T>(mut f: F, lo: T, hi: T) -> Result<Self> {
        let bracket = Self {
            lo,
            hi,
            f_lo: f(lo),
            f_hi: f(hi),
        };
        bracket.validate()?;
        Ok(bracket)
    }

    fn invalid(&self, reason: &str) -> Error {
        Error::InvalidBracket {
            lo: self.lo.to_f64_lossy(),
            hi: self.hi.to_f64_lossy(),
            reason: reason.to_owned(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) {
            return Err(self.invalid("requires lo < hi"));
        }
        if !(self.f_lo.is_finite() && self.f_hi.is_finite()) {
            return Err(self.invalid("function is not finite at an endpoint"));
        }
        if self.f_lo * self.f_hi > T::zero() {
            return Err(self.invalid("no sign change"));
        }
        Ok(())
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T> {
    pub x: T,
    pub fx: T,
    pub iterations: usize,
}

/// Upper bound on the bisection steps needed to shrink `width` below `tol`.
pub fn bisect_iteration_bound<T: Scalar>(width: T, tol: T) -> usize {
    if tol <= T::zero() || width <= tol {
        return 0;
    }
    (width / tol).log2().ceil().to_usize().unwrap_or(usize::MAX)
}

/// Bisection to an interval width of at most `tol`.
///
/// A `tol` of zero runs until the midpoint is no longer representable
/// between the endpoints, i.e. to full working precision. The iteration
/// also stops early on an exact zero.
pub fn bisect<T, F>(mut f: F, bracket: Bracket<T>, tol: T) -> Result<Root<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    bracket.validate()?;
    if tol < T::zero() || !tol.is_finite() {
        return Err(Error::Numerical(format!(
            "invalid bisection tolerance {tol}"
        )));
    }
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        f_hi,
    } = bracket;
    if f_lo == T::zero() {
        return Ok(Root {
            x: lo,
            fx: f_lo,
            iterations: 0,
        });
    }
    if f_hi == T::zero() {
        return Ok(Root {
            x: hi,
            fx: f_hi,
            iterations: 0,
        });
    }

    let two = T::lit(2.0);
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let f_mid = f(mid);
        if f_mid == T::zero() {
            return Ok(Root {
                x: mid,
                fx: f_mid,
                iterations,
            });
        }
        if !f_mid.is_finite() {
            return Err(Error::Numerical(format!(
                "function not finite at {mid} during bisection"
            )));
        }
        if (f_mid < T::zero()) == (f_lo < T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }

    let x = lo + (hi - lo) / two;
    Ok(Root {
        x,
        fx: f(x),
        iterations,
    })
}

/// The `i`-th of `n` equally spaced points on `[lo, hi]`, endpoints included.
#[inline]
pub fn grid_point<T: Scalar>(lo: T, hi: T, i: usize, n: usize) -> T {
    if i + 1 == n {
        return hi;
    }
    let frac = T::from_usize(i).unwrap() / T::from_usize(n - 1).unwrap();
    lo + (hi - lo) * frac
}

/// Scans `n` equally spaced points and returns every adjacent pair over
/// which `f` changes sign or reaches zero, in ascending order.
///
/// Pairs touching a non-finite value are skipped. An exact zero at an
/// interior grid point is reported once, as the bracket that ends there.
pub fn grid_sign_scan<T, F>(mut f: F, lo: T, hi: T, n: usize) -> Vec<Bracket<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if n < 2 || !(lo < hi) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut x_prev = grid_point(lo, hi, 0, n);
    let mut f_prev = f(x_prev);
    for i in 1..n {
        let x = grid_point(lo, hi, i, n);
        let fx = f(x);
        if f_prev.is_finite() && fx.is_finite() {
            let crosses = f_prev * fx < T::zero();
            let hits = fx == T::zero() || (i == 1 && f_prev == T::zero());
            if crosses || hits {
                out.push(Bracket {
                    lo: x_prev,
                    hi: x,
                    f_lo: f_prev,
                    f_hi: fx,
                });
            }
        }
        x_prev = x;
        f_prev = fx;
    }
    out
}
