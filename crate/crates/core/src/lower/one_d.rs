//! Scalar lower level (m = 1): bracketing on f_y with safeguarded Newton.

use crate::error::Result;
use crate::expr::{Expr, Jet};

pub(super) struct Lower1<'a> {
    pub f: &'a Expr,
    pub x: &'a [f64],
}

impl Lower1<'_> {
    pub fn value(&self, y: f64) -> Result<f64> {
        self.f.eval_xy(self.x, &[y])
    }
    pub fn jet(&self, y: f64) -> Result<Jet> {
        self.f.jet_y(self.x, y)
    }
    pub fn slope(&self, y: f64) -> Result<f64> {
        Ok(self.jet(y)?.d)
    }
}

/// Root of f_y in `[lo, hi]` given a sign change: Newton safeguarded by
/// bisection whenever the step leaves the bracket or stalls.
pub(super) fn slope_root(l: &Lower1, lo: f64, hi: f64) -> Result<f64> {
    let (f_lo, f_hi) = (l.slope(lo)?, l.slope(hi)?);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    // Orient so that the slope is negative at `a` and positive at `b`.
    let (mut a, mut b) = if f_lo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut y = 0.5 * (lo + hi);
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let mut j = l.jet(y)?;
    for _ in 0..300 {
        let out_of_range = ((y - b) * j.dd - j.d) * ((y - a) * j.dd - j.d) > 0.0;
        let slow = (2.0 * j.d).abs() > (dx_old * j.dd).abs();
        dx_old = dx;
        if out_of_range || slow || j.dd == 0.0 {
            dx = 0.5 * (b - a);
            y = a + dx;
        } else {
            dx = j.d / j.dd;
            y -= dx;
        }
        if dx.abs() <= 2.0 * f64::EPSILON * y.abs() || dx == 0.0 {
            return Ok(y);
        }
        j = l.jet(y)?;
        if j.d == 0.0 {
            return Ok(y);
        }
        if j.d < 0.0 {
            a = y;
        } else {
            b = y;
        }
    }
    Ok(y)
}

/// Golden-section minimization of `g` over `[lo, hi]`.
pub(super) fn golden(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    const R: f64 = 0.618_033_988_749_894_8;
    let mut c = hi - R * (hi - lo);
    let mut d = lo + R * (hi - lo);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    for _ in 0..120 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - R * (hi - lo);
            fc = g(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + R * (hi - lo);
            fd = g(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Best local minimizer of f in the bracket `[lo, hi]` around grid point `y0`.
pub(super) fn refine_min(l: &Lower1, lo: f64, hi: f64, y0: f64) -> Result<(f64, f64)> {
    let mut best = (y0, l.value(y0)?);
    let mut consider = |y: f64| -> Result<()> {
        let v = l.value(y)?;
        if v < best.1 {
            best = (y, v);
        }
        Ok(())
    };
    let (d_lo, d_hi) = (l.slope(lo)?, l.slope(hi)?);
    if d_lo < 0.0 && d_hi > 0.0 {
        consider(slope_root(l, lo, hi)?)?;
    } else {
        consider(lo)?;
        consider(hi)?;
        let (y, _) = golden(lo, hi, |y| l.value(y))?;
        consider(y)?;
    }
    Ok(best)
}

pub(super) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi == lo {
        return vec![lo];
    }
    (0..n).map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect()
}
