//! Seeded random rational sample points.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest numerator magnitude and denominator of sampled coordinates.
pub const MAX_ENTRY: i64 = 97;
/// Attempts per requested point before giving up.
pub const MAX_RETRIES: usize = 100;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rational(&mut self) -> BigRational {
        let num = self.rng.gen_range(-MAX_ENTRY..=MAX_ENTRY);
        let den = self.rng.gen_range(1..=MAX_ENTRY);
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn point(&mut self, n: usize) -> Vec<BigRational> {
        (0..n).map(|_| self.rational()).collect()
    }

    pub fn small_int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    /// A rational in `(0, 1]`.
    pub fn unit_rational(&mut self) -> BigRational {
        let num = self.rng.gen_range(1..=MAX_ENTRY);
        let den = self.rng.gen_range(num..=MAX_ENTRY);
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn positive_point(&mut self, n: usize) -> Vec<BigRational> {
        (0..n).map(|_| self.unit_rational()).collect()
    }

    /// Draws `count` points of dimension `n` accepted by `accept`, rejecting
    /// and redrawing up to [`MAX_RETRIES`] times per point.
    pub fn accepted_points<T>(
        &mut self,
        n: usize,
        count: usize,
        accept: impl FnMut(&[BigRational]) -> Option<T>,
    ) -> Result<Vec<(Vec<BigRational>, T)>> {
        self.accepted_with(n, count, Sampler::point, accept)
    }

    /// As [`Sampler::accepted_points`], inside the box `(0, 1]^n`.
    pub fn accepted_positive_points<T>(
        &mut self,
        n: usize,
        count: usize,
        accept: impl FnMut(&[BigRational]) -> Option<T>,
    ) -> Result<Vec<(Vec<BigRational>, T)>> {
        self.accepted_with(n, count, Sampler::positive_point, accept)
    }

    fn accepted_with<T>(
        &mut self,
        n: usize,
        count: usize,
        draw: fn(&mut Sampler, usize) -> Vec<BigRational>,
        mut accept: impl FnMut(&[BigRational]) -> Option<T>,
    ) -> Result<Vec<(Vec<BigRational>, T)>> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut found = None;
            for _ in 0..MAX_RETRIES {
                let p = draw(self, n);
                if let Some(v) = accept(&p) {
                    found = Some((p, v));
                    break;
                }
            }
            out.push(found.ok_or(Error::PointSelectionFailed(MAX_RETRIES))?);
        }
        Ok(out)
    }
}

/// Parses a point such as `x=1/3, y=2, z=0` against the variable order.
pub fn parse_point(src: &str, vars: &[&str]) -> Result<Vec<BigRational>> {
    let mut vals: Vec<Option<BigRational>> = vec![None; vars.len()];
    for part in src.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidWeb(format!("point entry `{part}` is not name=value")))?;
        let idx = vars
            .iter()
            .position(|v| *v == name.trim())
            .ok_or_else(|| Error::InvalidWeb(format!("unknown variable `{}` in point", name.trim())))?;
        let e = super::parse::parse(value.trim())?;
        let c = e
            .as_const()
            .ok_or_else(|| Error::InvalidWeb(format!("point value `{value}` is not a rational constant")))?;
        vals[idx] = Some(c.clone());
    }
    vals.into_iter()
        .zip(vars)
        .map(|(v, n)| v.ok_or_else(|| Error::InvalidWeb(format!("point misses variable `{n}`"))))
        .collect()
}
