//! Band functions `lambda^m_V(k)`, band extents `[a_m, b_m]` and the spectrum
//! of `-Δ + V` as their union.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::hermitian_eigenvalues;
use crate::error::{Error, Result};
use crate::floquet::{build_d_numeric, char_value};
use crate::lattice::{PeriodSpec, PeriodicPotential};

/// Width below which golden-section refinement stops.
pub const REFINE_TOL: f64 = 1e-8;
/// Gap between consecutive extents below which they are merged.
pub const MERGE_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 30;

/// Sorted eigenvalues of `D_V(k)`.
pub fn eigenvalues_at(v: &PeriodicPotential, k: &[f64]) -> Result<Vec<f64>> {
    if !v.is_real() {
        return Err(Error::NotReal("band functions need a real potential"));
    }
    if k.len() != v.periods().dim() {
        return Err(Error::Shape(format!("k has {} components, d = {}", k.len(), v.periods().dim())));
    }
    Ok(hermitian_eigenvalues(&build_d_numeric(v, k)))
}

#[derive(Clone, Debug, Serialize)]
pub struct BandStructure {
    pub periods: PeriodSpec,
    pub grid: usize,
    /// Row-major over the grid `k = idx / N`; each entry holds the `Q` sorted eigenvalues.
    pub sheets: Vec<Vec<f64>>,
    /// `[a_m, b_m]` for `m = 1..Q`.
    pub extents: Vec<(f64, f64)>,
}

impl BandStructure {
    pub fn grid_point(&self, idx: usize) -> Vec<f64> {
        grid_point(self.periods.dim(), self.grid, idx)
    }

    /// Writes `k_1,..,k_d,lambda_1,..,lambda_Q` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.periods.dim();
        let q = self.periods.volume();
        let header: Vec<String> = (1..=d)
            .map(|j| format!("k_{j}"))
            .chain((1..=q).map(|m| format!("lambda_{m}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (idx, sheet) in self.sheets.iter().enumerate() {
            let row: Vec<String> = self
                .grid_point(idx)
                .iter()
                .chain(sheet)
                .map(|&x| fmt_sig15(x))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn grid_point(d: usize, n: usize, mut idx: usize) -> Vec<f64> {
    let mut k = vec![0.0; d];
    for j in (0..d).rev() {
        k[j] = (idx % n) as f64 / n as f64;
        idx /= n;
    }
    k
}

/// `%.15g`-style rendering.
pub fn fmt_sig15(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let e = x.abs().log10().floor() as i32;
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..15).contains(&e) {
        let s = format!("{:.*}", (14 - e).max(0) as usize, x);
        trim(s)
    } else {
        let s = format!("{:.14e}", x);
        let (m, ex) = s.split_once('e').unwrap();
        format!("{}e{}", trim(m.to_string()), ex)
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > REFINE_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coordinate-wise polish of a minimum of `f` starting at `k0` with window `h`.
fn polish_min(f: &dyn Fn(&[f64]) -> f64, k0: &[f64], h: f64) -> f64 {
    let mut k = k0.to_vec();
    let mut best = f(&k);
    for _ in 0..MAX_SWEEPS {
        let before = best;
        for j in 0..k.len() {
            let kj = k[j];
            let (x, fx) = golden_section(
                |t| {
                    let mut kk = k.clone();
                    kk[j] = t;
                    f(&kk)
                },
                kj - h,
                kj + h,
            );
            if fx < best {
                best = fx;
                k[j] = x;
            }
        }
        if before - best <= 1e-14 {
            break;
        }
    }
    best
}

/// Sheets on the uniform `N^d` grid and extents refined around grid extrema.
pub fn band_structure(v: &PeriodicPotential, n: usize) -> Result<BandStructure> {
    if n < 8 {
        return Err(Error::Precondition("grid resolution must be at least 8".into()));
    }
    if !v.is_real() {
        return Err(Error::NotReal("band functions need a real potential"));
    }
    let periods = v.periods().clone();
    let d = periods.dim();
    let q = periods.volume();
    let total = n
        .checked_pow(d as u32)
        .filter(|&t| t <= 50_000_000)
        .ok_or_else(|| Error::Precondition("grid too large".into()))?;
    let sheets: Vec<Vec<f64>> = (0..total)
        .into_par_iter()
        .map(|idx| hermitian_eigenvalues(&build_d_numeric(v, &grid_point(d, n, idx))))
        .collect();
    let h = 1.0 / n as f64;
    let extents = (0..q)
        .into_par_iter()
        .map(|m| {
            let (mut imin, mut imax) = (0, 0);
            for (i, s) in sheets.iter().enumerate() {
                if s[m] < sheets[imin][m] {
                    imin = i;
                }
                if s[m] > sheets[imax][m] {
                    imax = i;
                }
            }
            let low = |k: &[f64]| hermitian_eigenvalues(&build_d_numeric(v, k))[m];
            let high = |k: &[f64]| -hermitian_eigenvalues(&build_d_numeric(v, k))[m];
            let a = polish_min(&low, &grid_point(d, n, imin), h).min(sheets[imin][m]);
            let b = (-polish_min(&high, &grid_point(d, n, imax), h)).max(sheets[imax][m]);
            (a, b)
        })
        .collect();
    Ok(BandStructure {
        periods,
        grid: n,
        sheets,
        extents,
    })
}

/// Sorted disjoint closed intervals covering the given ones; intervals closer
/// than [`MERGE_TOL`] are merged.
pub fn merge_intervals(intervals: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut v = intervals.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 + MERGE_TOL => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

pub fn spectrum_union(bs: &BandStructure) -> Vec<(f64, f64)> {
    merge_intervals(&bs.extents)
}

/// Whether `lambda` lies in the interior of some band of `-Δ` with the given periods.
pub fn check_enot0(periods: &PeriodSpec, lambda: f64, n: usize) -> Result<bool> {
    if periods.dim() < 2 {
        return Err(Error::Precondition("the interior-of-band check is stated for d >= 2".into()));
    }
    let bs = band_structure(&PeriodicPotential::zero(periods), n)?;
    Ok(bs
        .extents
        .iter()
        .any(|&(a, b)| a + REFINE_TOL < lambda && lambda < b - REFINE_TOL))
}

/// Largest relative deviation between `prod_m (lambda^m(k) - lambda)` and
/// `P_V(e^{2 pi i k}, lambda)` at random real `(k, lambda)`.
///
/// Both sides are computed from different matrices: the product from the
/// Hermitian eigenvalues and the right side from an LU determinant. The
/// relative error is measured against `max(|lhs|, |rhs|, 1)`.
pub fn band_product_deviation(v: &PeriodicPotential, samples: usize, seed: u64) -> Result<f64> {
    if !v.is_real() {
        return Err(Error::NotReal("band functions need a real potential"));
    }
    let d = v.periods().dim();
    let worst = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let k: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
            let lam = rng.gen_range(-2.0 * d as f64 - 2.0..2.0 * d as f64 + 2.0);
            let ev = hermitian_eigenvalues(&build_d_numeric(v, &k));
            let lhs: f64 = ev.iter().map(|e| e - lam).product();
            let z: Vec<Complex64> = k.iter().map(|&t| Complex64::from_polar(1.0, 2.0 * PI * t)).collect();
            let rhs = char_value(v, &z, Complex64::new(lam, 0.0));
            (rhs - lhs).norm() / lhs.abs().max(rhs.norm()).max(1.0)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}
