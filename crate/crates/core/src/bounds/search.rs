use super::BoundsRecord;
use crate::error::{QslError, Result};
use crate::scalar::Real;

/// Bracket width, in wavelengths, at which refinement stops.
pub const GOLDEN_TOL: f64 = 1e-8;

/// Grid speeds closer than this (relative) count as ties.
const TIE_SLACK: f64 = 1e-12;

/// Enough to shrink any bracket below the resolution of `f64`.
const MAX_STEPS: usize = 200;

/// Maximizes `f` on `[lo, hi]` by golden-section search. Returns `(argmax, max)`.
///
/// Assumes `f` is unimodal on the bracket; when the refined interior point is
/// not better than an endpoint, the better endpoint wins (left first).
pub fn golden_section_max<T, F>(mut f: F, lo: T, hi: T, tol: T) -> Result<(T, T)>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut steps = 0;
    while (b - a).abs() > tol && steps < MAX_STEPS {
        steps += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let mid = (a + b) / T::lit(2.0);
    let mut best = (mid, f(mid)?);
    for x in [lo, hi] {
        let fx = f(x)?;
        if fx > best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}

/// Maximum speed over a scanned grid, refined around the best grid point.
///
/// `speed_at` evaluates `|ȧ(l)|` off-grid. Ties on the grid go to the smaller `l`.
pub fn max_speed<T, F>(records: &[BoundsRecord<T>], speed_at: F) -> Result<(T, T)>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    if records.is_empty() {
        return Err(QslError::Empty("no bound records"));
    }
    let mut best = 0;
    for (i, r) in records.iter().enumerate() {
        let incumbent = records[best].speed();
        let slack = T::lit(TIE_SLACK) * (T::one() + incumbent);
        if r.speed() > incumbent + slack {
            best = i;
        }
    }
    let lo = records[best.saturating_sub(1)].l;
    let hi = records[(best + 1).min(records.len() - 1)].l;
    let grid_best = (records[best].l, records[best].speed());
    if records.len() == 1 {
        return Ok(grid_best);
    }
    let refined = golden_section_max(speed_at, lo, hi, T::tol(GOLDEN_TOL))?;
    Ok(if refined.1 > grid_best.1 {
        refined
    } else {
        grid_best
    })
}
