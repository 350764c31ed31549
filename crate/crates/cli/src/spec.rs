//! Potential-spec documents.
//!
//! ```json
//! {"dims": 1, "periods": [2], "potential": {"type": "explicit", "values": [[0, 1], [5, 1]]}}
//! ```
//!
//! Values are exact: `[p, q]` for `p/q` or `[re_p, re_q, im_p, im_q]`.

use fermikit::lattice::{direct_sum, PeriodSpec, PeriodicPotential};
use fermikit::laurent::rat;
use fermikit::scalar::GaussRat;
use fermikit::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub dims: usize,
    pub periods: Vec<usize>,
    #[serde(default)]
    pub allow_non_coprime: bool,
    pub potential: PotentialBody,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialBody {
    Zero {},
    Constant { value: Vec<i64> },
    /// Row-major over the fundamental domain, last coordinate fastest.
    Explicit { values: Vec<Vec<i64>> },
    /// One sub-document per block of `partition`.
    Separable { partition: Vec<usize>, parts: Vec<PotentialSpec> },
    /// Values `a/b` with `|a| <= num`, `1 <= b <= den`.
    Random { num: i64, den: i64, seed: u64 },
}

pub fn parse_scalar(v: &[i64]) -> Result<GaussRat> {
    let check = |q: i64| {
        if q == 0 {
            Err(Error::Parse("zero denominator".into()))
        } else {
            Ok(())
        }
    };
    match v {
        [p, q] => {
            check(*q)?;
            Ok(GaussRat::real(rat(*p, *q)))
        }
        [a, b, c, d] => {
            check(*b)?;
            check(*d)?;
            Ok(GaussRat::new(rat(*a, *b), rat(*c, *d)))
        }
        _ => Err(Error::Parse(format!("expected [p,q] or [re_p,re_q,im_p,im_q], got {v:?}"))),
    }
}

impl PotentialSpec {
    pub fn period_spec(&self) -> Result<PeriodSpec> {
        if self.dims == 0 || self.dims != self.periods.len() {
            return Err(Error::Shape(format!(
                "dims = {} but {} periods given",
                self.dims,
                self.periods.len()
            )));
        }
        if self.allow_non_coprime {
            PeriodSpec::new_unchecked_coprime(&self.periods)
        } else {
            PeriodSpec::new(&self.periods)
        }
    }

    pub fn build(&self) -> Result<PeriodicPotential> {
        let ps = self.period_spec()?;
        match &self.potential {
            PotentialBody::Zero {} => Ok(PeriodicPotential::zero(&ps)),
            PotentialBody::Constant { value } => Ok(PeriodicPotential::constant(&ps, parse_scalar(value)?)),
            PotentialBody::Explicit { values } => {
                if values.len() != ps.volume() {
                    return Err(Error::Shape(format!("{} values given, Q = {}", values.len(), ps.volume())));
                }
                let vals = values.iter().map(|v| parse_scalar(v)).collect::<Result<Vec<_>>>()?;
                PeriodicPotential::exact(ps, vals)
            }
            PotentialBody::Separable { partition, parts } => {
                if parts.len() != partition.len() {
                    return Err(Error::Shape(format!(
                        "{} parts for a partition with {} blocks",
                        parts.len(),
                        partition.len()
                    )));
                }
                let mut start = 0;
                let mut built = Vec::with_capacity(parts.len());
                for (part, &size) in parts.iter().zip(partition) {
                    let end = start + size;
                    if part.dims != size || self.periods.get(start..end) != Some(part.periods.as_slice()) {
                        return Err(Error::Shape(format!(
                            "part periods {:?} do not match block {start}..{end} of {:?}",
                            part.periods, self.periods
                        )));
                    }
                    built.push(part.build()?);
                    start = end;
                }
                let v = direct_sum(&built, partition)?;
                if self.allow_non_coprime {
                    PeriodicPotential::exact(ps, v.exact_values().unwrap().to_vec())
                } else {
                    Ok(v)
                }
            }
            PotentialBody::Random { num, den, seed } => {
                if *num < 0 || *den < 1 {
                    return Err(Error::Parse("random bounds need num >= 0 and den >= 1".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(PeriodicPotential::random_rational(&ps, *num, *den, &mut rng))
            }
        }
    }
}

pub fn parse_potential_spec(document: &str) -> Result<PeriodicPotential> {
    let spec: PotentialSpec = serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    spec.build()
}
