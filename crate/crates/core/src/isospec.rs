//! Fermi and Floquet isospectrality, the averaged-Fourier identities satisfied
//! by Fermi isospectral pairs, separable pair generators, and a randomized
//! search for nonzero potentials Fermi isospectral to zero.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::{char_laurent, char_value, rho};
use crate::irreducibility::exact_average;
use crate::lattice::{direct_sum, dft, is_separable, PeriodSpec, PeriodicPotential, SEPARABILITY_TOL};
use crate::laurent::{rat, LaurentPoly};
use crate::scalar::GaussRat;

/// One-dimensional Floquet isospectral move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Move {
    Identity,
    Translate(i64),
    Reflect,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// `Y = translate(V, shift)`.
    Translation(Vec<i64>),
    /// `Y(n) = V(-n)`.
    Reflection,
    /// `V = (+) V_j`, `Y = (+) T_j(V_j)` with one move per coordinate.
    Separable { moves: Vec<Move>, seed: u64 },
    Independent,
}

#[derive(Clone, Debug)]
pub struct IsoPair {
    pub v: PeriodicPotential,
    pub y: PeriodicPotential,
    pub provenance: Provenance,
}

impl IsoPair {
    pub fn new(v: PeriodicPotential, y: PeriodicPotential, provenance: Provenance) -> Result<Self> {
        same_periods(&v, &y)?;
        v.require_exact("an isospectral pair")?;
        y.require_exact("an isospectral pair")?;
        Ok(IsoPair { v, y, provenance })
    }

    pub fn translation(v: &PeriodicPotential, shift: &[i64]) -> Result<Self> {
        Self::new(v.clone(), v.translate(shift), Provenance::Translation(shift.to_vec()))
    }

    pub fn reflection(v: &PeriodicPotential) -> Result<Self> {
        Self::new(v.clone(), v.reflect(), Provenance::Reflection)
    }
}

fn same_periods(v: &PeriodicPotential, y: &PeriodicPotential) -> Result<()> {
    if v.periods().periods() != y.periods().periods() {
        return Err(Error::Shape(format!(
            "period mismatch: {:?} vs {:?}",
            v.periods().periods(),
            y.periods().periods()
        )));
    }
    Ok(())
}

/// `P_V(z, lambda0) = P_Y(z, lambda0)` as Laurent polynomials.
pub fn fermi_isospectral(v: &PeriodicPotential, y: &PeriodicPotential, lambda0: &GaussRat) -> Result<bool> {
    same_periods(v, y)?;
    Ok(char_laurent(v)?.specialize_lambda(lambda0) == char_laurent(y)?.specialize_lambda(lambda0))
}

/// `P_V(z, lambda) = P_Y(z, lambda)` identically.
pub fn floquet_isospectral(v: &PeriodicPotential, y: &PeriodicPotential) -> Result<bool> {
    same_periods(v, y)?;
    Ok(char_laurent(v)? == char_laurent(y)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct Key11Report {
    pub passed: bool,
    pub averages_equal: bool,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub worst_relative_gap: f64,
    /// Smallest `|sum_j rho^j z_j| / |z|` over accepted sample points.
    pub min_pole_distance: f64,
}

const KEY11_TOL: f64 = 1e-9;
const POLE_MARGIN: f64 = 1e-2;
const MAX_REJECTIONS: usize = 100;

/// The two sides of the averaged identity at one point `z`.
fn key11_sides(
    periods: &PeriodSpec,
    av: &[f64],
    ay: &[f64],
    z: &[Complex64],
) -> (Complex64, Complex64) {
    let q = periods.periods();
    let lin: Vec<Complex64> = periods
        .domain()
        .iter()
        .map(|n| n.iter().zip(q).zip(z).map(|((&nj, &qj), &zj)| rho(qj, nj) * zj).sum())
        .collect();
    let w = periods.domain();
    let mut s = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (i, n) in w.iter().enumerate() {
        for (j, m) in w.iter().enumerate() {
            let l: Vec<i64> = n.iter().zip(m).map(|(&a, &b)| a as i64 - b as i64).collect();
            let idx = periods.reduce_index(&l);
            let den = lin[i] * lin[j];
            s.0 += av[idx] / den;
            s.1 += ay[idx] / den;
        }
    }
    s
}

fn pole_distance(periods: &PeriodSpec, z: &[Complex64]) -> f64 {
    let q = periods.periods();
    let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    periods
        .domain()
        .iter()
        .map(|n| {
            n.iter()
                .zip(q)
                .zip(z)
                .map(|((&nj, &qj), &zj)| rho(qj, nj) * zj)
                .sum::<Complex64>()
                .norm()
                / norm
        })
        .fold(f64::INFINITY, f64::min)
}

/// Checks `[V] = [Y]` exactly and the identity
/// `sum |V^(n - n')|^2 / (L_n(z) L_n'(z)) = sum |Y^(n - n')|^2 / (L_n(z) L_n'(z))`,
/// `L_n(z) = sum_j rho^j_{n_j} z_j`, at random complex points away from the poles.
pub fn verify_key11(
    v: &PeriodicPotential,
    y: &PeriodicPotential,
    lambda0: &GaussRat,
    samples: usize,
    seed: u64,
) -> Result<Key11Report> {
    if !v.is_real() || !y.is_real() {
        return Err(Error::NotReal("the averaged identity is checked for real potentials"));
    }
    if !fermi_isospectral(v, y, lambda0)? {
        return Err(Error::Precondition("the potentials are not Fermi isospectral at lambda0".into()));
    }
    let averages_equal = exact_average(v)? == exact_average(y)?;
    let periods = v.periods().clone();
    let d = periods.dim();
    let av: Vec<f64> = dft(v).complex_coeffs().iter().map(|c| c.norm_sqr()).collect();
    let ay: Vec<f64> = dft(y).complex_coeffs().iter().map(|c| c.norm_sqr()).collect();
    let per_point: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut round = 0u64;
            loop {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(round));
                rng.set_stream(i as u64);
                for _ in 0..MAX_REJECTIONS {
                    let z: Vec<Complex64> = (0..d)
                        .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                        .collect();
                    let dist = pole_distance(&periods, &z);
                    if dist < POLE_MARGIN {
                        continue;
                    }
                    let (l, r) = key11_sides(&periods, &av, &ay, &z);
                    let gap = (l - r).norm() / l.norm().max(r.norm()).max(f64::MIN_POSITIVE);
                    return (gap, dist);
                }
                round += 1;
            }
        })
        .collect();
    let worst = per_point.iter().map(|p| p.0).fold(0.0, f64::max);
    let min_dist = per_point.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(Key11Report {
        passed: averages_equal && worst <= KEY11_TOL,
        averages_equal,
        samples,
        seed,
        tol: KEY11_TOL,
        worst_relative_gap: worst,
        min_pole_distance: min_dist,
    })
}

/// Random one-dimensional integer potential with values in `[-5, 5]`.
fn random_1d(q: usize, rng: &mut ChaCha8Rng) -> Result<PeriodicPotential> {
    let vals: Vec<i64> = (0..q).map(|_| rng.gen_range(-5..=5)).collect();
    PeriodicPotential::from_ints(PeriodSpec::new(&[q])?, &vals)
}

/// `V = (+) V_j` with random one-dimensional `V_j` and `Y = (+) T_j(V_j)`.
pub fn generate_isospectral_pair(periods: &PeriodSpec, moves: &[Move], seed: u64) -> Result<IsoPair> {
    let d = periods.dim();
    if d < 2 {
        return Err(Error::Precondition("separable pairs need d >= 2".into()));
    }
    if moves.len() != d {
        return Err(Error::Shape(format!("{} moves for d = {d}", moves.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vs = Vec::with_capacity(d);
    let mut ys = Vec::with_capacity(d);
    for (&q, mv) in periods.periods().iter().zip(moves) {
        let vj = random_1d(q, &mut rng)?;
        let yj = match mv {
            Move::Identity => vj.clone(),
            Move::Translate(s) => vj.translate(&[*s]),
            Move::Reflect => vj.reflect(),
        };
        vs.push(vj);
        ys.push(yj);
    }
    let partition = vec![1; d];
    let v = direct_sum(&vs, &partition)?;
    let y = direct_sum(&ys, &partition)?;
    if !floquet_isospectral(&v, &y)? {
        return Err(Error::Internal("generated pair is not Floquet isospectral".into()));
    }
    IsoPair::new(
        v,
        y,
        Provenance::Separable {
            moves: moves.to_vec(),
            seed,
        },
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityReport {
    pub budget: usize,
    pub seed: u64,
    /// Trials whose numeric values matched the zero potential.
    pub prefilter_hits: usize,
    /// Matches that were the zero potential itself.
    pub trivial_matches: usize,
    /// Nonzero potentials verified exactly; each entry is the value list on `W`.
    pub candidates: Vec<Vec<String>>,
}

fn random_small_rational(periods: &PeriodSpec, mean_zero: bool, rng: &mut ChaCha8Rng) -> PeriodicPotential {
    let q = periods.volume();
    let mut vals: Vec<GaussRat> = (0..q)
        .map(|_| GaussRat::real(rat(rng.gen_range(-3..=3), rng.gen_range(1..=3))))
        .collect();
    if mean_zero {
        let mut s = GaussRat::zero();
        for x in &vals {
            s += x;
        }
        let m = s.scale(&rat(1, q as i64));
        vals.iter_mut().for_each(|x| *x = &*x - &m);
    }
    PeriodicPotential::exact(periods.clone(), vals).expect("value count matches")
}

/// Randomized search for nonzero `V` with `P_V(., lambda0) = P_0(., lambda0)`.
///
/// Trial 0 is the zero potential itself, which must match and is filtered
/// as trivial. Odd trials draw potentials with `[V] = 0`. A cheap numeric
/// comparison at two fixed points screens every trial; survivors are
/// compared exactly.
pub fn rigidity_search_zero(periods: &PeriodSpec, lambda0: &GaussRat, budget: usize, seed: u64) -> Result<RigidityReport> {
    let zero = PeriodicPotential::zero(periods);
    let target = char_laurent(&zero)?.specialize_lambda(lambda0);
    let d = periods.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probes: Vec<Vec<Complex64>> = (0..2)
        .map(|_| {
            (0..d)
                .map(|_| Complex64::from_polar(rng.gen_range(0.7..1.4), rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect()
        })
        .collect();
    let lam = lambda0.to_complex();
    let reference: Vec<Complex64> = probes.iter().map(|z| char_value(&zero, z, lam)).collect();
    let hits: Vec<(usize, PeriodicPotential)> = (0..budget)
        .into_par_iter()
        .filter_map(|t| {
            let v = if t == 0 {
                zero.clone()
            } else {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(t as u64);
                random_small_rational(periods, t % 2 == 1, &mut r)
            };
            let close = probes.iter().zip(&reference).all(|(z, r)| {
                let x = char_value(&v, z, lam);
                (x - r).norm() <= 1e-8 * r.norm().max(1.0)
            });
            close.then_some((t, v))
        })
        .collect();
    let mut report = RigidityReport {
        budget,
        seed,
        prefilter_hits: hits.len(),
        trivial_matches: 0,
        candidates: Vec::new(),
    };
    for (_, v) in hits {
        if char_laurent(&v)?.specialize_lambda(lambda0) != target {
            continue;
        }
        if v.exact_values().unwrap().iter().all(GaussRat::is_zero) {
            report.trivial_matches += 1;
        } else {
            report
                .candidates
                .push(v.exact_values().unwrap().iter().map(|x| x.to_string()).collect());
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferReport {
    pub partition: Vec<usize>,
    pub v_separable: bool,
    /// `Some` for two-block splits whose first block has dimension at least 2.
    pub second_block_floquet_isospectral: Option<bool>,
    /// `[Y_2] - [V_2]`.
    pub constant: Option<String>,
}

impl TransferReport {
    pub fn holds(&self) -> bool {
        self.v_separable && self.second_block_floquet_isospectral != Some(false)
    }
}

/// For a Fermi isospectral pair with `Y` separable, checks that `V` is
/// separable for the same partition and, for `(d_1, d_2)` splits with
/// `d_1 >= 2`, that the second blocks are Floquet isospectral up to a constant.
pub fn separability_transfer_check(pair: &IsoPair, partition: &[usize], lambda0: &GaussRat) -> Result<TransferReport> {
    if !fermi_isospectral(&pair.v, &pair.y, lambda0)? {
        return Err(Error::Precondition("the pair is not Fermi isospectral at lambda0".into()));
    }
    let ysep = is_separable(&pair.y, partition, SEPARABILITY_TOL)?;
    if !ysep.separable {
        return Err(Error::Precondition(format!("Y is not separable for partition {partition:?}")));
    }
    let vsep = is_separable(&pair.v, partition, SEPARABILITY_TOL)?;
    let mut report = TransferReport {
        partition: partition.to_vec(),
        v_separable: vsep.separable,
        second_block_floquet_isospectral: None,
        constant: None,
    };
    if vsep.separable && partition.len() == 2 && partition[0] >= 2 {
        let (v2, y2) = (&vsep.parts[1], &ysep.parts[1]);
        let c = &exact_average(y2)? - &exact_average(v2)?;
        report.second_block_floquet_isospectral = Some(floquet_isospectral(&v2.shifted(&c), y2)?);
        report.constant = Some(c.to_string());
    }
    Ok(report)
}

/// `P_V(., lambda0)` for callers that compare many potentials against one.
pub fn fermi_polynomial(v: &PeriodicPotential, lambda0: &GaussRat) -> Result<LaurentPoly> {
    Ok(char_laurent(v)?.specialize_lambda(lambda0))
}
