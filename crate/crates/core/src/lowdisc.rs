//! Generalized Faure low-discrepancy sequences.
//!
//! Dimension `j` of a stream in prime base `b` uses the generator matrix
//! `C_j = A_j · P^j` where `P` is the upper-triangular Pascal matrix mod `b`
//! and `A_j` is a nonsingular lower-triangular scrambling matrix. With all
//! `A_j = I` and no digital shift this is the classical Faure sequence; the
//! one-dimensional base-2 stream is the van der Corput sequence.
//!
//! Points are produced incrementally: moving from index `i` to `i + 1` only
//! touches the generator columns of the digits that change, so the amortized
//! cost is one column update per dimension.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported stream dimension.
pub const MAX_DIM: usize = 128;

/// Exclusive upper bound on stream indices (keeps digit expansions exact in f64).
pub const MAX_INDEX: u64 = 1 << 48;

/// Digit scrambling applied on top of the Faure generator matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scramble {
    /// Classical Faure sequence: identity scrambling, no digital shift.
    None,
    /// Random lower-triangular scrambling plus digital shift, derived from the seed.
    Seeded(u64),
}

#[derive(Debug)]
struct Generator {
    dim: usize,
    base: u32,
    /// Digits of the index that can ever be nonzero (`base^index_digits >= 2^48`).
    index_digits: usize,
    /// Output digits per coordinate; `base^out_digits <= 2^53`.
    out_digits: usize,
    /// `cols[j][r]` is column `r` of `C_j`, stored as `out_digits` entries.
    cols: Vec<Vec<Vec<u32>>>,
    shift: Vec<Vec<u32>>,
    scale: f64,
}

/// Deterministic point source in `[0,1)^dim` with index-addressable skipping.
#[derive(Debug, Clone)]
pub struct QmcStream {
    gen: Arc<Generator>,
    scramble: Scramble,
    cursor: u64,
    digits: Vec<u32>,
    /// `acc[j]` holds the unshifted output digits of dimension `j` at `cursor`.
    acc: Vec<Vec<u32>>,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime `>= max(n, 2)`.
pub fn smallest_prime_at_least(n: usize) -> u32 {
    let mut p = n.max(2) as u32;
    while !is_prime(p) {
        p += 1;
    }
    p
}

fn binom_mod(n: u32, k: u32, b: u32) -> u32 {
    // Lucas' theorem.
    let (mut n, mut k) = (n, k);
    let mut out = 1u64;
    while n > 0 || k > 0 {
        let (ni, ki) = (n % b, k % b);
        if ki > ni {
            return 0;
        }
        // small binomial mod prime via multiplicative formula on u64
        let mut num = 1u64;
        let mut den = 1u64;
        for i in 0..ki {
            num = num * u64::from(ni - i) % u64::from(b);
            den = den * u64::from(i + 1) % u64::from(b);
        }
        out = out * num % u64::from(b) * pow_mod(den, u64::from(b) - 2, u64::from(b)) % u64::from(b);
        n /= b;
        k /= b;
    }
    out as u32
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % m;
        }
        a = a * a % m;
        e >>= 1;
    }
    r
}

impl Generator {
    fn build(dim: usize, base: u32, scramble: Scramble) -> Self {
        let lb = f64::from(base).log2();
        let mut index_digits = 1;
        while (index_digits as f64) * lb < 48.0 {
            index_digits += 1;
        }
        let out_digits = ((53.0 / lb).floor() as usize).max(index_digits);
        debug_assert!((out_digits as f64) * lb <= 53.0 + 1e-9);
        let b = u64::from(base);

        let mut rng = match scramble {
            Scramble::None => None,
            Scramble::Seeded(seed) => Some(ChaCha20Rng::seed_from_u64(seed)),
        };

        let mut cols = Vec::with_capacity(dim);
        let mut shift = Vec::with_capacity(dim);
        for j in 0..dim {
            // P^j restricted to out_digits x index_digits: entry (k, r) = C(r,k) j^(r-k).
            let mut pj = vec![vec![0u32; index_digits]; out_digits];
            for (k, row) in pj.iter_mut().enumerate() {
                for (r, entry) in row.iter_mut().enumerate() {
                    if k <= r {
                        let c = u64::from(binom_mod(r as u32, k as u32, base));
                        *entry = (c * pow_mod(j as u64, (r - k) as u64, b) % b) as u32;
                    }
                }
            }
            let (a, s) = match rng.as_mut() {
                None => {
                    let mut a = vec![vec![0u32; out_digits]; out_digits];
                    for (k, row) in a.iter_mut().enumerate() {
                        row[k] = 1;
                    }
                    (a, vec![0u32; out_digits])
                }
                Some(rng) => {
                    let mut a = vec![vec![0u32; out_digits]; out_digits];
                    for (k, row) in a.iter_mut().enumerate() {
                        for (l, entry) in row.iter_mut().enumerate().take(k + 1) {
                            *entry = if l == k {
                                rng.gen_range(1..base)
                            } else {
                                rng.gen_range(0..base)
                            };
                        }
                    }
                    let s = (0..out_digits).map(|_| rng.gen_range(0..base)).collect();
                    (a, s)
                }
            };
            let mut c = vec![vec![0u32; out_digits]; index_digits];
            for (r, col) in c.iter_mut().enumerate() {
                for (k, out) in col.iter_mut().enumerate() {
                    let mut acc = 0u64;
                    for l in 0..=k {
                        acc += u64::from(a[k][l]) * u64::from(pj[l][r]);
                    }
                    *out = (acc % b) as u32;
                }
            }
            cols.push(c);
            shift.push(s);
        }
        let scale = (f64::from(base)).powi(out_digits as i32);
        Generator {
            dim,
            base,
            index_digits,
            out_digits,
            cols,
            shift,
            scale,
        }
    }
}

impl QmcStream {
    /// Stream in the smallest prime base `>= dimension`.
    pub fn new(dimension: usize, scramble: Scramble) -> Result<Self> {
        Self::with_base(dimension, smallest_prime_at_least(dimension), scramble)
    }

    pub fn with_base(dimension: usize, base: u32, scramble: Scramble) -> Result<Self> {
        if dimension == 0 || dimension > MAX_DIM {
            return Err(Error::Config(format!(
                "stream dimension {dimension} outside 1..={MAX_DIM}"
            )));
        }
        if !is_prime(base) || (base as usize) < dimension {
            return Err(Error::Config(format!(
                "base {base} must be a prime >= dimension {dimension}"
            )));
        }
        let gen = Arc::new(Generator::build(dimension, base, scramble));
        let digits = vec![0; gen.index_digits];
        let acc = vec![vec![0; gen.out_digits]; dimension];
        Ok(QmcStream {
            gen,
            scramble,
            cursor: 0,
            digits,
            acc,
        })
    }

    pub fn dimension(&self) -> usize {
        self.gen.dim
    }

    pub fn base(&self) -> u32 {
        self.gen.base
    }

    pub fn scramble(&self) -> Scramble {
        self.scramble
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    /// Position the stream so the next call returns point number `index`.
    pub fn skip_to(&mut self, index: u64) -> Result<()> {
        if index >= MAX_INDEX {
            return Err(Error::StreamExhausted(index));
        }
        let b = u64::from(self.gen.base);
        let mut rest = index;
        for d in self.digits.iter_mut() {
            *d = (rest % b) as u32;
            rest /= b;
        }
        for (j, acc) in self.acc.iter_mut().enumerate() {
            let cols = &self.gen.cols[j];
            for (k, out) in acc.iter_mut().enumerate() {
                let mut s = 0u64;
                for (r, &a) in self.digits.iter().enumerate() {
                    s += u64::from(a) * u64::from(cols[r][k]);
                }
                *out = (s % b) as u32;
            }
        }
        self.cursor = index;
        Ok(())
    }

    /// Write the point at the cursor into `out` and advance.
    pub fn next_into(&mut self, out: &mut [f64]) -> Result<()> {
        assert_eq!(out.len(), self.gen.dim, "output buffer has wrong length");
        if self.cursor >= MAX_INDEX {
            return Err(Error::StreamExhausted(self.cursor));
        }
        let g = &*self.gen;
        let b = u64::from(g.base);
        for (j, o) in out.iter_mut().enumerate() {
            let mut v = 0u64;
            for (y, s) in self.acc[j].iter().zip(&g.shift[j]) {
                v = v * b + (u64::from(*y) + u64::from(*s)) % b;
            }
            *o = v as f64 / g.scale;
        }
        self.advance();
        Ok(())
    }

    pub fn next_point(&mut self) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.gen.dim];
        self.next_into(&mut out)?;
        Ok(out)
    }

    fn advance(&mut self) {
        self.cursor += 1;
        if self.cursor >= MAX_INDEX {
            return;
        }
        let g = &*self.gen;
        let base = g.base;
        for r in 0..g.index_digits {
            self.digits[r] += 1;
            if self.digits[r] == base {
                self.digits[r] = 0;
            }
            for (acc, cols) in self.acc.iter_mut().zip(&g.cols) {
                for (y, c) in acc.iter_mut().zip(&cols[r]) {
                    let t = *y + *c;
                    *y = if t >= base { t - base } else { t };
                }
            }
            if self.digits[r] != 0 {
                break;
            }
        }
    }
}

/// Per-coordinate deviation of empirical moments from those of U(0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct EquidistributionReport {
    pub moment_order: u32,
    pub n: usize,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
}

/// Compare `E[u^order]` per coordinate against `1/(order+1)` over the next `n` points.
pub fn equidistribution_check(
    stream: &mut QmcStream,
    n: usize,
    moment_order: u32,
) -> Result<EquidistributionReport> {
    if n < 1000 {
        return Err(Error::Config(format!(
            "equidistribution check needs n >= 1000, got {n}"
        )));
    }
    let d = stream.dimension();
    let mut sums = vec![0.0f64; d];
    let mut p = vec![0.0; d];
    for _ in 0..n {
        stream.next_into(&mut p)?;
        for (s, x) in sums.iter_mut().zip(&p) {
            *s += x.powi(moment_order as i32);
        }
    }
    let target = 1.0 / f64::from(moment_order + 1);
    let deviations: Vec<f64> = sums.iter().map(|s| (s / n as f64 - target).abs()).collect();
    let max_deviation = deviations.iter().cloned().fold(0.0, f64::max);
    Ok(EquidistributionReport {
        moment_order,
        n,
        deviations,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn van_der_corput_base_two() {
        let mut s = QmcStream::with_base(1, 2, Scramble::None).unwrap();
        let pts: Vec<f64> = (0..4).map(|_| s.next_point().unwrap()[0]).collect();
        assert_eq!(pts, vec![0.0, 0.5, 0.25, 0.75]);
    }

    #[test]
    fn base_must_be_prime_and_large_enough() {
        assert!(QmcStream::with_base(3, 2, Scramble::None).is_err());
        assert!(QmcStream::with_base(3, 4, Scramble::None).is_err());
        assert!(QmcStream::new(0, Scramble::None).is_err());
        assert!(QmcStream::new(MAX_DIM + 1, Scramble::None).is_err());
        assert_eq!(QmcStream::new(36, Scramble::None).unwrap().base(), 37);
    }

    #[test]
    fn coordinates_in_unit_interval() {
        let mut s = QmcStream::new(9, Scramble::Seeded(3)).unwrap();
        for _ in 0..5000 {
            let p = s.next_point().unwrap();
            assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
        let mut s = QmcStream::new(9, Scramble::Seeded(3)).unwrap();
        s.skip_to(MAX_INDEX - 1).unwrap();
        let p = s.next_point().unwrap();
        assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn exhausted_stream_errors() {
        let mut s = QmcStream::new(2, Scramble::None).unwrap();
        assert!(matches!(s.skip_to(MAX_INDEX), Err(Error::StreamExhausted(_))));
        s.skip_to(MAX_INDEX - 1).unwrap();
        s.next_point().unwrap();
        assert!(matches!(s.next_point(), Err(Error::StreamExhausted(_))));
    }

    #[test]
    fn skip_matches_sequential_replay() {
        for scramble in [Scramble::None, Scramble::Seeded(11)] {
            let mut seq = QmcStream::new(15, scramble).unwrap();
            let replay: Vec<Vec<f64>> = (0..1001).map(|_| seq.next_point().unwrap()).collect();
            for k in [0u64, 1, 17, 1000] {
                let mut s = QmcStream::new(15, scramble).unwrap();
                s.skip_to(k).unwrap();
                assert_eq!(s.next_point().unwrap(), replay[k as usize]);
            }
        }
    }

    #[test]
    fn elementary_interval_property_unscrambled() {
        // b^m consecutive points: one point per interval of length b^-m in every coordinate.
        let mut s = QmcStream::new(5, Scramble::None).unwrap();
        let b = s.base() as usize;
        let m = 3;
        let n = b.pow(m);
        let mut counts = vec![vec![0usize; n]; 5];
        for _ in 0..n {
            let p = s.next_point().unwrap();
            for (j, x) in p.iter().enumerate() {
                counts[j][(x * n as f64) as usize] += 1;
            }
        }
        assert!(counts.iter().all(|c| c.iter().all(|&k| k == 1)));
    }

    #[test]
    fn scrambled_streams_depend_on_seed() {
        let mut a = QmcStream::new(4, Scramble::Seeded(1)).unwrap();
        let mut b = QmcStream::new(4, Scramble::Seeded(2)).unwrap();
        a.skip_to(10).unwrap();
        b.skip_to(10).unwrap();
        assert_ne!(a.next_point().unwrap(), b.next_point().unwrap());
    }

    #[test]
    fn equidistribution_report_shape() {
        let mut s = QmcStream::new(35, Scramble::Seeded(5)).unwrap();
        let r = equidistribution_check(&mut s, 1000, 1).unwrap();
        assert_eq!(r.deviations.len(), 35);
        let mut s = QmcStream::new(4, Scramble::None).unwrap();
        assert!(equidistribution_check(&mut s, 999, 1).is_err());
    }

    #[test]
    fn binomials_mod_prime() {
        assert_eq!(binom_mod(5, 2, 7), 3);
        assert_eq!(binom_mod(10, 3, 13), 120 % 13);
        assert_eq!(binom_mod(7, 3, 2), 1);
    }
}
