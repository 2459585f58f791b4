//! Adaptive Simpson quadrature for fallible integrands.

use crate::error::Result;

const MAX_DEPTH: u32 = 48;
/// Panels whose error estimate is at rounding level relative to their own
/// value stop refining, whatever the absolute tolerance.
const RELATIVE_FLOOR: f64 = 64.0 * f64::EPSILON;
/// Uniform panels evaluated before adaptation starts, so narrow features
/// are not missed by the first five-point estimate.
const INITIAL_PANELS: usize = 8;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn refine<F>(f: &mut F, p: Panel, tol: f64, depth: u32) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    let converged = delta.abs() <= 15.0 * tol || delta.abs() <= RELATIVE_FLOOR * (left + right).abs();
    if converged || depth >= MAX_DEPTH || (m - p.a) <= f64::EPSILON * p.a.abs() {
        return Ok(left + right + delta / 15.0);
    }
    let l = refine(f, Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left }, 0.5 * tol, depth + 1)?;
    let r = refine(f, Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right }, 0.5 * tol, depth + 1)?;
    Ok(l + r)
}

/// Integrate `f` over [a, b] to an absolute tolerance `abs_tol`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if b <= a {
        return Ok(0.0);
    }
    let h = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = abs_tol / INITIAL_PANELS as f64;
    let mut total = 0.0;
    let mut fa = f(a)?;
    for i in 0..INITIAL_PANELS {
        let pa = a + i as f64 * h;
        let pb = if i + 1 == INITIAL_PANELS { b } else { pa + h };
        let pm = 0.5 * (pa + pb);
        let fm = f(pm)?;
        let fb = f(pb)?;
        let whole = simpson(pa, pb, fa, fm, fb);
        total += refine(&mut f, Panel { a: pa, b: pb, fa, fm, fb, whole }, panel_tol, 0)?;
        fa = fb;
    }
    Ok(total)
}
