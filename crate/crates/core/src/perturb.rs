//! Finite-volume experiments for `-Δ + V + v` with decaying `v`: box spectra,
//! eigenvalue tracks in the box size, in-band localization diagnostics and
//! gap bound states.
//!
//! Finite boxes always produce eigenvalues inside the bands. The scan below
//! flags an in-band eigenvalue only when its eigenvector stays concentrated
//! near the origin and the eigenvalue stops moving as the box grows. It is a
//! diagnostic, not a proof.

use std::io::{self, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::PeriodicPotential;
use crate::spectral::{band_structure, fmt_sig15, spectrum_union};

/// Largest number of box sites accepted.
pub const MAX_SITES: usize = 200_000;
/// Largest dimension handled by the dense solver.
pub const DENSE_LIMIT: usize = 2000;
/// Band membership margin.
pub const BAND_MARGIN: f64 = 1e-8;
/// Localization ratio above which an in-band state counts as localized.
pub const CANDIDATE_RATIO: f64 = 0.5;
/// Localization ratio required of a gap bound state at the largest box.
pub const BOUND_RATIO: f64 = 0.9;
const MAX_BAND_ENTRIES: usize = 50_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayKind {
    /// `a e^{-|n|^gamma}`, `gamma > 1`.
    SuperExponential { gamma: f64 },
    /// `a e^{-gamma |n|}`.
    Exponential { gamma: f64 },
    /// `a (1 + |n|)^{-k}`.
    PowerLaw { k: f64 },
    /// Explicit values at finitely many sites, zero elsewhere.
    FinitelySupported { sites: Vec<(Vec<i64>, f64)> },
}

/// Decaying perturbation; `|n|` is the Euclidean norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayProfile {
    pub dim: usize,
    /// Signed amplitude `a`; the decay constant is `C = |a|`.
    pub amplitude: f64,
    pub kind: DecayKind,
}

impl DecayProfile {
    pub fn new(dim: usize, amplitude: f64, kind: DecayKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if !amplitude.is_finite() {
            return Err(Error::Domain("amplitude must be finite".into()));
        }
        match &kind {
            DecayKind::SuperExponential { gamma } if !(*gamma > 1.0 && gamma.is_finite()) => {
                return Err(Error::Domain(format!("super-exponential decay needs gamma > 1, got {gamma}")));
            }
            DecayKind::Exponential { gamma } if !(*gamma > 0.0 && gamma.is_finite()) => {
                return Err(Error::Domain(format!("exponential decay needs gamma > 0, got {gamma}")));
            }
            DecayKind::PowerLaw { k } if !(*k > 0.0 && k.is_finite()) => {
                return Err(Error::Domain(format!("power-law decay needs K > 0, got {k}")));
            }
            DecayKind::FinitelySupported { sites } => {
                for (n, x) in sites {
                    if n.len() != dim || !x.is_finite() {
                        return Err(Error::Domain(format!("bad site entry {n:?} -> {x}")));
                    }
                }
            }
            _ => {}
        }
        Ok(DecayProfile { dim, amplitude, kind })
    }

    pub fn zero(dim: usize) -> Self {
        DecayProfile {
            dim,
            amplitude: 0.0,
            kind: DecayKind::FinitelySupported { sites: Vec::new() },
        }
    }

    pub fn super_exponential(dim: usize, amplitude: f64, gamma: f64) -> Result<Self> {
        Self::new(dim, amplitude, DecayKind::SuperExponential { gamma })
    }

    pub fn exponential(dim: usize, amplitude: f64, gamma: f64) -> Result<Self> {
        Self::new(dim, amplitude, DecayKind::Exponential { gamma })
    }

    pub fn power_law(dim: usize, amplitude: f64, k: f64) -> Result<Self> {
        Self::new(dim, amplitude, DecayKind::PowerLaw { k })
    }

    /// `v(n) = a` at the origin and zero elsewhere.
    pub fn point(dim: usize, amplitude: f64) -> Self {
        DecayProfile {
            dim,
            amplitude: 1.0,
            kind: DecayKind::FinitelySupported {
                sites: vec![(vec![0; dim], amplitude)],
            },
        }
    }

    /// Whether the profile decays at least like `C e^{-|n|^gamma}` with `gamma > 1`.
    pub fn is_super_exponential(&self) -> bool {
        matches!(
            self.kind,
            DecayKind::SuperExponential { .. } | DecayKind::FinitelySupported { .. }
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut p = self.clone();
        p.amplitude *= s;
        p
    }

    pub fn value(&self, n: &[i64]) -> f64 {
        let r = n.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
        match &self.kind {
            DecayKind::SuperExponential { gamma } => self.amplitude * (-r.powf(*gamma)).exp(),
            DecayKind::Exponential { gamma } => self.amplitude * (-gamma * r).exp(),
            DecayKind::PowerLaw { k } => self.amplitude * (1.0 + r).powf(-k),
            DecayKind::FinitelySupported { sites } => sites
                .iter()
                .filter(|(m, _)| m.as_slice() == n)
                .map(|(_, x)| self.amplitude * x)
                .sum(),
        }
    }

    /// `sup |v|`.
    pub fn sup_norm(&self) -> f64 {
        match &self.kind {
            DecayKind::FinitelySupported { sites } => sites
                .iter()
                .map(|(_, x)| (self.amplitude * x).abs())
                .fold(0.0, f64::max),
            _ => self.amplitude.abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `[-L, L]^d` with the hopping across the faces dropped.
    Open,
    /// `{-L, .., L-1}^d` with wrap-around; `2L` must be a multiple of every period.
    PeriodicSupercell,
}

/// Lattice box with lexicographic site order, last coordinate fastest.
#[derive(Clone, Debug)]
pub struct LatticeBox {
    pub l: usize,
    pub dim: usize,
    pub boundary: Boundary,
    side: usize,
}

impl LatticeBox {
    pub fn new(dim: usize, l: usize, boundary: Boundary) -> Result<Self> {
        let side = match boundary {
            Boundary::Open => 2 * l + 1,
            Boundary::PeriodicSupercell => 2 * l,
        };
        let sites = side
            .checked_pow(dim as u32)
            .filter(|&s| s <= MAX_SITES)
            .ok_or_else(|| Error::Domain(format!("box with side {side} in d = {dim} exceeds {MAX_SITES} sites")))?;
        debug_assert!(sites > 0);
        Ok(LatticeBox { l, dim, boundary, side })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn sites(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn coords(&self, mut idx: usize) -> Vec<i64> {
        let mut n = vec![0i64; self.dim];
        for j in (0..self.dim).rev() {
            n[j] = (idx % self.side) as i64 - self.l as i64;
            idx /= self.side;
        }
        n
    }

    fn stride(&self, j: usize) -> usize {
        self.side.pow((self.dim - 1 - j) as u32)
    }

    /// `|i - j|` bound over nonzero entries of the operator.
    pub fn bandwidth(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.stride(0).min(self.sites() - 1),
            Boundary::PeriodicSupercell => (self.side - 1) * self.stride(0),
        }
    }

    /// `Σ |ψ(n)|^2` over `|n| <= L/4` divided by `Σ |ψ(n)|^2`.
    pub fn localization_ratio(&self, psi: &[f64]) -> f64 {
        let r2 = (self.l as f64 / 4.0).powi(2);
        let (mut inner, mut total) = (0.0, 0.0);
        for (i, x) in psi.iter().enumerate() {
            let m = x * x;
            total += m;
            if self.coords(i).iter().map(|&c| (c * c) as f64).sum::<f64>() <= r2 {
                inner += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            inner / total
        }
    }
}

/// Real symmetric sparse matrix stored by rows with sorted columns.
#[derive(Clone, Debug)]
pub struct SparseSymmetric {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSymmetric {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |e| e.0)
            .map(|k| self.rows[i][k].1)
            .unwrap_or(0.0)
    }

    /// Stored entries satisfy `a_ij = a_ji` exactly.
    pub fn is_symmetric(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().all(|&(j, x)| self.get(j, i) == x))
    }

    pub fn bandwidth(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, x) in r {
                m[(i, j)] = x;
            }
        }
        m
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|e| e.1.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `-Δ + V + v` on the box `[-L, L]^d`.
pub fn finite_operator(
    v: &PeriodicPotential,
    pert: &DecayProfile,
    l: usize,
    boundary: Boundary,
) -> Result<(LatticeBox, SparseSymmetric)> {
    let periods = v.periods();
    let d = periods.dim();
    if pert.dim != d {
        return Err(Error::Shape(format!("perturbation has d = {}, potential d = {d}", pert.dim)));
    }
    let vals = v.real_values("finite-volume operators need a real potential")?;
    let qmax = *periods.periods().iter().max().unwrap();
    if l < 2 * qmax {
        return Err(Error::Precondition(format!("L = {l} is below 2 max q = {}", 2 * qmax)));
    }
    if boundary == Boundary::PeriodicSupercell && periods.periods().iter().any(|&q| !(2 * l).is_multiple_of(q)) {
        return Err(Error::Precondition(format!(
            "supercell side {} is not a multiple of the periods {:?}",
            2 * l,
            periods.periods()
        )));
    }
    let bx = LatticeBox::new(d, l, boundary)?;
    let side = bx.side();
    let rows = (0..bx.sites())
        .map(|i| {
            let n = bx.coords(i);
            let mut row = vec![(i, vals[periods.reduce_index(&n)] + pert.value(&n))];
            let mut r = i;
            for j in (0..d).rev() {
                let pos = r % side;
                r /= side;
                let st = bx.stride(j);
                if pos + 1 < side {
                    row.push((i + st, -1.0));
                } else if boundary == Boundary::PeriodicSupercell {
                    row.push((i - pos * st, -1.0));
                }
                if pos > 0 {
                    row.push((i - st, -1.0));
                } else if boundary == Boundary::PeriodicSupercell {
                    row.push((i + (side - 1) * st, -1.0));
                }
            }
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    Ok((bx, SparseSymmetric { rows }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    InBand,
    InGap,
    Outside,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::InBand => "in-band",
            Classification::InGap => "in-gap",
            Classification::Outside => "outside",
        }
    }
}

/// Classifies `lambda` against sorted disjoint bands widened by [`BAND_MARGIN`].
pub fn classify(lambda: f64, bands: &[(f64, f64)]) -> Classification {
    if bands.iter().any(|&(a, b)| lambda >= a - BAND_MARGIN && lambda <= b + BAND_MARGIN) {
        Classification::InBand
    } else if bands.first().is_some_and(|f| lambda > f.0) && bands.last().is_some_and(|l| lambda < l.1) {
        Classification::InGap
    } else {
        Classification::Outside
    }
}

/// Spectrum of the unperturbed periodic operator as disjoint intervals.
pub fn unperturbed_bands(v: &PeriodicPotential) -> Result<Vec<(f64, f64)>> {
    let n = match v.periods().dim() {
        1 => 256,
        2 => 48,
        3 => 16,
        _ => 8,
    };
    Ok(spectrum_union(&band_structure(v, n)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxSpectrum {
    pub l: usize,
    pub boundary: Boundary,
    pub sites: usize,
    /// `false` when only eigenvalues near selected shifts were computed.
    pub complete: bool,
    pub eigenvalues: Vec<f64>,
    pub classifications: Vec<Classification>,
    pub localization: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

impl BoxSpectrum {
    pub fn write_csv_rows<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for (i, lam) in self.eigenvalues.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.l,
                i,
                fmt_sig15(*lam),
                self.classifications[i].as_str(),
                fmt_sig15(self.localization[i])
            )?;
        }
        Ok(())
    }
}

/// Writes `L,index,eigenvalue,classification,localization_ratio`.
pub fn write_tracks_csv<W: Write>(spectra: &[BoxSpectrum], mut w: W) -> io::Result<()> {
    writeln!(w, "L,index,eigenvalue,classification,localization_ratio")?;
    for s in spectra {
        s.write_csv_rows(&mut w)?;
    }
    Ok(())
}

/// Which eigenpairs to compute on boxes above [`DENSE_LIMIT`].
#[derive(Clone, Debug)]
pub struct ShiftPlan {
    pub shifts: Vec<f64>,
    pub per_shift: usize,
}

impl ShiftPlan {
    /// `count` shifts spread evenly over `(a, b)`.
    pub fn spread(a: f64, b: f64, count: usize, per_shift: usize) -> Self {
        let shifts = (0..count)
            .map(|i| a + (b - a) * (i as f64 + 0.5) / count as f64)
            .collect();
        ShiftPlan { shifts, per_shift }
    }
}

/// Eigenpairs of the box operator, classified against `bands`.
pub fn box_spectrum(
    v: &PeriodicPotential,
    pert: &DecayProfile,
    l: usize,
    boundary: Boundary,
    bands: &[(f64, f64)],
    plan: Option<&ShiftPlan>,
    keep_vectors: bool,
) -> Result<BoxSpectrum> {
    let (bx, h) = finite_operator(v, pert, l, boundary)?;
    let (pairs, complete) = if h.dim() <= DENSE_LIMIT {
        (dense_eigenpairs(&h), true)
    } else {
        if boundary != Boundary::Open {
            return Err(Error::Domain(format!(
                "periodic supercells above {DENSE_LIMIT} sites are not supported"
            )));
        }
        let plan = plan.ok_or_else(|| Error::Precondition(format!("boxes above {DENSE_LIMIT} sites need shifts")))?;
        (shift_invert_eigenpairs(&h, plan)?, false)
    };
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let localization = pairs.iter().map(|p| bx.localization_ratio(&p.1)).collect();
    Ok(BoxSpectrum {
        l,
        boundary,
        sites: bx.sites(),
        complete,
        classifications: eigenvalues.iter().map(|&x| classify(x, bands)).collect(),
        eigenvalues,
        localization,
        eigenvectors: keep_vectors.then(|| pairs.into_iter().map(|p| p.1).collect()),
    })
}

fn dense_eigenpairs(h: &SparseSymmetric) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(h.to_dense());
    let mut pairs: Vec<(f64, Vec<f64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, eig.eigenvectors.column(i).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// LU factorization with partial pivoting of a banded matrix.
struct BandLu {
    n: usize,
    b: usize,
    /// Row `i` stores columns `i - b ..= i + 2b`.
    rows: Vec<f64>,
    mult: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn width(b: usize) -> usize {
        3 * b + 1
    }

    fn new(h: &SparseSymmetric, sigma: f64) -> Result<Self> {
        let n = h.dim();
        let b = h.bandwidth();
        let w = Self::width(b);
        if n.saturating_mul(w) > MAX_BAND_ENTRIES {
            return Err(Error::Domain(format!("banded factor of {n} rows with bandwidth {b} is too large")));
        }
        let mut rows = vec![0.0; n * w];
        for i in 0..n {
            for &(j, x) in h.row(i) {
                rows[i * w + j + b - i] += x;
            }
            rows[i * w + b] -= sigma;
        }
        let mut lu = BandLu {
            n,
            b,
            rows,
            mult: vec![0.0; n * b],
            piv: vec![0; n],
        };
        lu.factor();
        Ok(lu)
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        if j + self.b < i || j > i + 2 * self.b {
            0.0
        } else {
            self.rows[i * Self::width(self.b) + j + self.b - i]
        }
    }

    fn set(&mut self, i: usize, j: usize, x: f64) {
        let w = Self::width(self.b);
        self.rows[i * w + j + self.b - i] = x;
    }

    fn factor(&mut self) {
        let (n, b) = (self.n, self.b);
        for k in 0..n {
            let last = (k + b).min(n - 1);
            let p = (k..=last)
                .max_by(|&x, &y| self.at(x, k).abs().total_cmp(&self.at(y, k).abs()))
                .unwrap();
            self.piv[k] = p;
            let cend = (k + 2 * b).min(n - 1);
            if p != k {
                for j in k..=cend {
                    let (a, c) = (self.at(k, j), self.at(p, j));
                    self.set(k, j, c);
                    self.set(p, j, a);
                }
            }
            let mut pivot = self.at(k, k);
            if pivot == 0.0 {
                pivot = f64::EPSILON * (1.0 + self.at(k, k).abs());
                self.set(k, k, pivot);
            }
            for i in k + 1..=last {
                let m = self.at(i, k) / pivot;
                self.mult[k * b + (i - k - 1)] = m;
                if m != 0.0 {
                    self.set(i, k, 0.0);
                    for j in k + 1..=cend {
                        let x = self.at(i, j) - m * self.at(k, j);
                        self.set(i, j, x);
                    }
                }
            }
        }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let (n, b) = (self.n, self.b);
        for k in 0..n {
            rhs.swap(k, self.piv[k]);
            let x = rhs[k];
            for i in k + 1..=(k + b).min(n - 1) {
                rhs[i] -= self.mult[k * b + (i - k - 1)] * x;
            }
        }
        for k in (0..n).rev() {
            let mut s = rhs[k];
            for j in k + 1..=(k + 2 * b).min(n - 1) {
                s -= self.at(k, j) * rhs[j];
            }
            rhs[k] = s / self.at(k, k);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(a: &mut [f64]) -> f64 {
    let n = dot(a, a).sqrt();
    if n > 0.0 {
        a.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Converged eigenpairs nearest `sigma`, at most `k`, via Lanczos on `(H - sigma)^{-1}`.
fn nearest_eigenpairs(h: &SparseSymmetric, sigma: f64, k: usize, seed: u64) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = h.dim();
    let lu = BandLu::new(h, sigma)?;
    let tol = 1e-9 * h.norm_bound().max(1.0);
    let mut m = (4 * k).max(40).min(n);
    loop {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        normalize(&mut q0);
        let mut basis = vec![q0];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            let mut w = basis[j].clone();
            lu.solve(&mut w);
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            for _ in 0..2 {
                for qv in &basis {
                    let c = dot(&w, qv);
                    w.iter_mut().zip(qv).for_each(|(x, y)| *x -= c * y);
                }
            }
            let bnorm = normalize(&mut w);
            if j + 1 == m || bnorm < 1e-14 {
                break;
            }
            beta.push(bnorm);
            basis.push(w);
        }
        let s = alpha.len();
        let t = DMatrix::from_fn(s, s, |i, j| {
            if i == j {
                alpha[i]
            } else if i.abs_diff(j) == 1 {
                beta[i.min(j)]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
        let mut out = Vec::new();
        for &c in &order {
            let theta = eig.eigenvalues[c];
            if theta == 0.0 {
                continue;
            }
            let y = eig.eigenvectors.column(c);
            let mut x = vec![0.0; n];
            for (i, qv) in basis.iter().take(s).enumerate() {
                x.iter_mut().zip(qv).for_each(|(a, b)| *a += y[i] * b);
            }
            normalize(&mut x);
            let lam = sigma + 1.0 / theta;
            let hx = h.mul_vec(&x);
            let res = hx.iter().zip(&x).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
            if res <= tol {
                let rq = dot(&hx, &x);
                out.push((rq, x));
            }
            if out.len() == k {
                break;
            }
        }
        if out.len() == k || m == n || m >= 800 {
            return Ok(out);
        }
        m = (2 * m).min(n).min(800);
    }
}

fn shift_invert_eigenpairs(h: &SparseSymmetric, plan: &ShiftPlan) -> Result<Vec<(f64, Vec<f64>)>> {
    let found: Vec<Vec<(f64, Vec<f64>)>> = plan
        .shifts
        .par_iter()
        .enumerate()
        .map(|(i, &s)| nearest_eigenpairs(h, s, plan.per_shift, i as u64))
        .collect::<Result<_>>()?;
    let mut all: Vec<(f64, Vec<f64>)> = found.into_iter().flatten().collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tol = 1e-9 * h.norm_bound().max(1.0);
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for (lam, x) in all {
        let dup = out
            .iter()
            .rev()
            .take_while(|p| lam - p.0 <= tol)
            .any(|p| dot(&p.1, &x).abs() > 0.9);
        if !dup {
            out.push((lam, x));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanLevel {
    pub l: usize,
    pub complete: bool,
    pub in_band: usize,
    pub localized: usize,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub eigenvalues: Vec<f64>,
    pub ratios: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddedReport {
    pub band: (f64, f64),
    pub tol: f64,
    /// Set when the perturbation is outside the super-exponential regime.
    pub exploratory: bool,
    pub levels: Vec<ScanLevel>,
    pub candidates: Vec<Candidate>,
    #[serde(skip)]
    pub spectra: Vec<BoxSpectrum>,
}

fn plan_for(v: &PeriodicPotential, l: usize, lo: f64, hi: f64) -> Option<ShiftPlan> {
    let sites = (2 * l + 1).pow(v.periods().dim() as u32);
    (sites > DENSE_LIMIT).then(|| ShiftPlan::spread(lo, hi, 16, 8))
}

fn spectra_for(
    v: &PeriodicPotential,
    pert: &DecayProfile,
    l_list: &[usize],
    bands: &[(f64, f64)],
    window: (f64, f64),
) -> Result<Vec<BoxSpectrum>> {
    l_list
        .par_iter()
        .map(|&l| {
            let plan = plan_for(v, l, window.0, window.1);
            box_spectrum(v, pert, l, Boundary::Open, bands, plan.as_ref(), false)
        })
        .collect()
}

/// Looks for in-band eigenvalues inside `band` whose localization ratio stays
/// at least [`CANDIDATE_RATIO`] for every `L` and which move by less than `tol`
/// between consecutive `L`.
pub fn embedded_candidate_scan(
    v: &PeriodicPotential,
    pert: &DecayProfile,
    band: (f64, f64),
    l_list: &[usize],
    tol: f64,
) -> Result<EmbeddedReport> {
    if l_list.is_empty() || band.0 >= band.1 {
        return Err(Error::Precondition("need at least one L and a nonempty band".into()));
    }
    let bands = unperturbed_bands(v)?;
    let spectra = spectra_for(v, pert, l_list, &bands, band)?;
    let inside = |s: &BoxSpectrum, i: usize| {
        let x = s.eigenvalues[i];
        x > band.0 && x < band.1 && s.classifications[i] == Classification::InBand
    };
    let levels = spectra
        .iter()
        .map(|s| {
            let idx: Vec<usize> = (0..s.eigenvalues.len()).filter(|&i| inside(s, i)).collect();
            ScanLevel {
                l: s.l,
                complete: s.complete,
                in_band: idx.len(),
                localized: idx.iter().filter(|&&i| s.localization[i] >= CANDIDATE_RATIO).count(),
                max_ratio: idx.iter().map(|&i| s.localization[i]).fold(0.0, f64::max),
            }
        })
        .collect();
    let localized: Vec<Vec<(f64, f64)>> = spectra
        .iter()
        .map(|s| {
            (0..s.eigenvalues.len())
                .filter(|&i| inside(s, i) && s.localization[i] >= CANDIDATE_RATIO)
                .map(|i| (s.eigenvalues[i], s.localization[i]))
                .collect()
        })
        .collect();
    let mut candidates = Vec::new();
    for &(x0, r0) in &localized[0] {
        let mut c = Candidate {
            eigenvalues: vec![x0],
            ratios: vec![r0],
        };
        let persistent = localized[1..].iter().all(|lev| {
            let prev = *c.eigenvalues.last().unwrap();
            match lev.iter().min_by(|a, b| (a.0 - prev).abs().total_cmp(&(b.0 - prev).abs())) {
                Some(&(x, r)) if (x - prev).abs() < tol => {
                    c.eigenvalues.push(x);
                    c.ratios.push(r);
                    true
                }
                _ => false,
            }
        });
        if persistent {
            candidates.push(c);
        }
    }
    Ok(EmbeddedReport {
        band,
        tol,
        exploratory: !pert.is_super_exponential(),
        levels,
        candidates,
        spectra,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapTrack {
    /// One eigenvalue per `L`, the nearest in-gap eigenvalue to the next one.
    pub eigenvalues: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `|λ(L_last) - λ(L_prev)|`.
    pub last_step: f64,
    pub converged: bool,
    pub localized: bool,
}

impl GapTrack {
    pub fn is_bound_state(&self) -> bool {
        self.converged && self.localized
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub gaps: Vec<(f64, f64)>,
    pub tol: f64,
    pub tracks: Vec<GapTrack>,
    #[serde(skip)]
    pub spectra: Vec<BoxSpectrum>,
}

impl GapReport {
    pub fn bound_states(&self) -> impl Iterator<Item = &GapTrack> {
        self.tracks.iter().filter(|t| t.is_bound_state())
    }
}

/// Tracks the in-gap eigenvalues of the largest box back through `l_list`
/// (which should be increasing). A track is a bound state when its last step
/// is below `tol` and its final localization ratio is at least [`BOUND_RATIO`].
pub fn gap_bound_states(v: &PeriodicPotential, pert: &DecayProfile, l_list: &[usize], tol: f64) -> Result<GapReport> {
    if l_list.len() < 2 {
        return Err(Error::Precondition("tracking needs at least two box sizes".into()));
    }
    let bands = unperturbed_bands(v)?;
    let gaps: Vec<(f64, f64)> = bands.windows(2).map(|w| (w[0].1, w[1].0)).collect();
    if gaps.is_empty() {
        return Err(Error::Precondition("the unperturbed spectrum has no gap".into()));
    }
    let window = (gaps[0].0, gaps[gaps.len() - 1].1);
    let spectra = spectra_for(v, pert, l_list, &bands, window)?;
    let in_gap: Vec<Vec<(f64, f64)>> = spectra
        .iter()
        .map(|s| {
            (0..s.eigenvalues.len())
                .filter(|&i| s.classifications[i] == Classification::InGap)
                .map(|i| (s.eigenvalues[i], s.localization[i]))
                .collect()
        })
        .collect();
    let mut tracks = Vec::new();
    for &(x, r) in in_gap.last().unwrap() {
        let mut eigenvalues = vec![x];
        let mut ratios = vec![r];
        for lev in in_gap[..in_gap.len() - 1].iter().rev() {
            let cur = *eigenvalues.last().unwrap();
            match lev.iter().min_by(|a, b| (a.0 - cur).abs().total_cmp(&(b.0 - cur).abs())) {
                Some(&(y, ry)) => {
                    eigenvalues.push(y);
                    ratios.push(ry);
                }
                None => break,
            }
        }
        eigenvalues.reverse();
        ratios.reverse();
        let last_step = if eigenvalues.len() >= 2 {
            (eigenvalues[eigenvalues.len() - 1] - eigenvalues[eigenvalues.len() - 2]).abs()
        } else {
            f64::INFINITY
        };
        tracks.push(GapTrack {
            converged: last_step < tol,
            localized: r >= BOUND_RATIO,
            eigenvalues,
            ratios,
            last_step,
        });
    }
    Ok(GapReport {
        gaps,
        tol,
        tracks,
        spectra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::PeriodSpec;
    use crate::spectral::eigenvalues_at;

    fn zero1() -> PeriodicPotential {
        PeriodicPotential::zero(&PeriodSpec::new(&[1]).unwrap())
    }

    #[test]
    fn profile_validation() {
        assert!(DecayProfile::super_exponential(1, -3.0, 1.0).is_err());
        assert!(DecayProfile::exponential(1, 1.0, 0.0).is_err());
        assert!(DecayProfile::power_law(2, 1.0, -1.0).is_err());
        let p = DecayProfile::super_exponential(1, -3.0, 1.5).unwrap();
        assert_eq!(p.value(&[0]), -3.0);
        assert!((p.value(&[4]) + 3.0 * (-8.0f64).exp()).abs() < 1e-15);
        for n in -20..=20i64 {
            assert!(p.value(&[n]).abs() <= 3.0 * (-(n.abs() as f64).powf(1.5)).exp() + 1e-300);
        }
        assert!(p.is_super_exponential() && !DecayProfile::power_law(1, 1.0, 2.0).unwrap().is_super_exponential());
    }

    #[test]
    fn operator_shape_and_symmetry() {
        let v = PeriodicPotential::from_ints(PeriodSpec::new(&[2, 3]).unwrap(), &[1, -2, 0, 3, 1, 1]).unwrap();
        let p = DecayProfile::exponential(2, 0.7, 1.0).unwrap();
        let (bx, h) = finite_operator(&v, &p, 6, Boundary::Open).unwrap();
        assert_eq!(h.dim(), 13 * 13);
        assert!(h.is_symmetric());
        assert_eq!(h.bandwidth(), 13);
        let o = bx.coords(0);
        assert_eq!(o, vec![-6, -6]);
        assert_eq!(h.get(0, 0), v.at(&[-6, -6]).to_complex().re + p.value(&[-6, -6]));
        let (bx, h) = finite_operator(&v, &p, 6, Boundary::PeriodicSupercell).unwrap();
        assert_eq!(bx.sites(), 144);
        assert!(h.is_symmetric());
        assert!(h.row(0).len() == 5);
        assert!(finite_operator(&v, &p, 5, Boundary::Open).is_err());
        assert!(finite_operator(&v, &p, 7, Boundary::PeriodicSupercell).is_err());
        let big = DecayProfile::zero(3);
        let v3 = PeriodicPotential::zero(&PeriodSpec::new(&[1, 1, 1]).unwrap());
        assert!(matches!(finite_operator(&v3, &big, 40, Boundary::Open), Err(Error::Domain(_))));
    }

    #[test]
    fn free_box_spectrum() {
        let bands = unperturbed_bands(&zero1()).unwrap();
        assert_eq!(bands.len(), 1);
        assert!((bands[0].0 + 2.0).abs() < 1e-12 && (bands[0].1 - 2.0).abs() < 1e-12);
        let s = box_spectrum(&zero1(), &DecayProfile::zero(1), 100, Boundary::Open, &bands, None, false).unwrap();
        assert_eq!(s.eigenvalues.len(), 201);
        assert!(s.classifications.iter().all(|&c| c == Classification::InBand));
        // open chain: 2 cos(pi j / (n + 1))
        for (j, x) in s.eigenvalues.iter().enumerate() {
            let e = -2.0 * (std::f64::consts::PI * (j + 1) as f64 / 202.0).cos();
            assert!((x - e).abs() < 1e-10);
        }
    }

    #[test]
    fn point_bound_state() {
        let bands = unperturbed_bands(&zero1()).unwrap();
        let s = box_spectrum(&zero1(), &DecayProfile::point(1, -5.0), 100, Boundary::Open, &bands, None, false).unwrap();
        let below: Vec<f64> = s.eigenvalues.iter().copied().filter(|&x| x < -2.0).collect();
        assert_eq!(below.len(), 1);
        // 1 + v0 / sqrt(lambda^2 - 4) = 0 for a single site of strength v0 = -5
        assert!((below[0] + 29f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.classifications[0], Classification::Outside);
        assert!(s.localization[0] > 0.999);
    }

    #[test]
    fn supercell_matches_band_sampling() {
        let v = PeriodicPotential::from_ints(PeriodSpec::new(&[2]).unwrap(), &[0, 5]).unwrap();
        let bands = unperturbed_bands(&v).unwrap();
        assert_eq!(bands.len(), 2);
        let l = 12;
        let s = box_spectrum(&v, &DecayProfile::zero(1), l, Boundary::PeriodicSupercell, &bands, None, false).unwrap();
        assert!(s.classifications.iter().all(|&c| c == Classification::InBand));
        let cells = 2 * l / 2;
        let mut sample: Vec<f64> = (0..cells)
            .flat_map(|m| eigenvalues_at(&v, &[m as f64 / cells as f64]).unwrap())
            .collect();
        sample.sort_by(f64::total_cmp);
        for (a, b) in s.eigenvalues.iter().zip(&sample) {
            assert!((a - b).abs() < 1e-10);
        }
        let v2 = PeriodicPotential::from_ints(PeriodSpec::new(&[2, 3]).unwrap(), &[1, -2, 0, 3, 1, 1]).unwrap();
        let s = box_spectrum(&v2, &DecayProfile::zero(2), 6, Boundary::PeriodicSupercell, &[], None, false).unwrap();
        let mut sample: Vec<f64> = (0..6)
            .flat_map(|a| (0..4).map(move |b| (a, b)))
            .flat_map(|(a, b)| eigenvalues_at(&v2, &[a as f64 / 6.0, b as f64 / 4.0]).unwrap())
            .collect();
        sample.sort_by(f64::total_cmp);
        assert_eq!(sample.len(), s.eigenvalues.len());
        for (a, b) in s.eigenvalues.iter().zip(&sample) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn numerical_range_bound() {
        let v = PeriodicPotential::from_ints(PeriodSpec::new(&[2, 3]).unwrap(), &[1, -2, 0, 3, 1, 1]).unwrap();
        let bands = unperturbed_bands(&v).unwrap();
        let p = DecayProfile::super_exponential(2, 1.5, 2.0).unwrap();
        let s = box_spectrum(&v, &p, 7, Boundary::Open, &bands, None, false).unwrap();
        let (lo, hi) = (bands[0].0 - p.sup_norm(), bands.last().unwrap().1 + p.sup_norm());
        assert!(s.eigenvalues.iter().all(|&x| x >= lo - 1e-9 && x <= hi + 1e-9));
    }

    #[test]
    fn extended_states_spread() {
        let bands = unperturbed_bands(&zero1()).unwrap();
        for l in [100, 200] {
            let s = box_spectrum(&zero1(), &DecayProfile::zero(1), l, Boundary::Open, &bands, None, false).unwrap();
            let frac = (2 * (l / 4) + 1) as f64 / (2 * l + 1) as f64;
            let mut r = s.localization.clone();
            r.sort_by(f64::total_cmp);
            assert!((r[r.len() / 2] - frac).abs() < 0.05, "{} vs {frac}", r[r.len() / 2]);
        }
    }

    #[test]
    fn shift_invert_matches_dense() {
        let v = PeriodicPotential::from_ints(PeriodSpec::new(&[2, 3]).unwrap(), &[1, -2, 0, 3, 1, 1]).unwrap();
        let p = DecayProfile::exponential(2, -1.0, 0.8).unwrap();
        let (_, h) = finite_operator(&v, &p, 8, Boundary::Open).unwrap();
        let dense: Vec<f64> = dense_eigenpairs(&h).into_iter().map(|p| p.0).collect();
        let plan = ShiftPlan::spread(-3.0, 4.0, 4, 5);
        let found = shift_invert_eigenpairs(&h, &plan).unwrap();
        assert!(found.len() >= 10);
        for (x, vec) in &found {
            assert!(dense.iter().any(|d| (d - x).abs() < 1e-9));
            let hx = h.mul_vec(vec);
            assert!(hx.iter().zip(vec).all(|(a, b)| (a - x * b).abs() < 1e-7));
        }
        for &s in &plan.shifts {
            let near = dense.iter().min_by(|a, b| (*a - s).abs().total_cmp(&(*b - s).abs())).unwrap();
            assert!(found.iter().any(|f| (f.0 - near).abs() < 1e-9));
        }
    }

    #[test]
    fn embedded_scan_examples() {
        let p = DecayProfile::super_exponential(1, -3.0, 1.5).unwrap();
        let rep = embedded_candidate_scan(&zero1(), &p, (-2.0, 2.0), &[50, 100, 200], 1e-6).unwrap();
        assert!(rep.candidates.is_empty() && !rep.exploratory);
        let rep = embedded_candidate_scan(&zero1(), &DecayProfile::zero(1), (-2.0, 2.0), &[50, 100], 1e-6).unwrap();
        assert!(rep.candidates.is_empty());
        assert!(rep.levels.iter().all(|l| l.localized == 0));
    }

    #[test]
    fn gap_examples() {
        let v = PeriodicPotential::from_ints(PeriodSpec::new(&[2]).unwrap(), &[0, 5]).unwrap();
        let p = DecayProfile::exponential(1, -2.0, 1.0).unwrap();
        let rep = gap_bound_states(&v, &p, &[50, 100, 200], 1e-8).unwrap();
        assert!(rep.bound_states().count() >= 1, "{:?}", rep.tracks);
        assert!(gap_bound_states(&zero1(), &p, &[50, 100], 1e-8).is_err());
        let bands = unperturbed_bands(&v).unwrap();
        for l in [10, 20, 40] {
            let s = box_spectrum(&v, &DecayProfile::zero(1), l, Boundary::PeriodicSupercell, &bands, None, false).unwrap();
            assert!(s.classifications.iter().all(|&c| c != Classification::InGap));
        }
    }

    #[test]
    fn csv_rows() {
        let bands = unperturbed_bands(&zero1()).unwrap();
        let s = box_spectrum(&zero1(), &DecayProfile::point(1, -5.0), 4, Boundary::Open, &bands, None, false).unwrap();
        let mut out = Vec::new();
        write_tracks_csv(&[s], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("L,index,eigenvalue,classification,localization_ratio"));
        assert!(lines.next().unwrap().starts_with("4,0,-5.3"));
        assert_eq!(text.lines().count(), 10);
    }
}
