//! Determinant basis of the antisymmetric sectors H^∧k.
//!
//! A determinant `|i₁,…,i_k⟩` (1-based orbitals, strictly increasing) is
//! stored as a bitmask over `n ≤ 63` bits. Determinants are unit vectors, so
//! inserting an orbital into a normalized determinant yields a normalized
//! determinant up to the parity sign. Ranks follow the lexicographic order of
//! the sorted index tuples and are computed with the combinatorial number
//! system.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_ORBITALS: usize = 63;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Dimension of the sector H^∧k over an n-dimensional one-particle space.
pub fn sector_dim(n: usize, k: usize) -> usize {
    binomial(n, k) as usize
}

fn check_sector(n: usize, k: usize) -> Result<()> {
    if n > MAX_ORBITALS {
        return Err(Error::DimensionTooLarge { n, max: MAX_ORBITALS });
    }
    if k > n {
        return Err(Error::InvalidSector { n, k });
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Determinant {
    bits: u64,
    n: u8,
}

impl Determinant {
    /// Builds a determinant from strictly increasing 1-based orbitals.
    pub fn new(n: usize, orbitals: &[usize]) -> Result<Self> {
        check_sector(n, orbitals.len())?;
        let mut bits = 0u64;
        let mut last = 0usize;
        for &p in orbitals {
            if p == 0 || p > n {
                return Err(Error::OrbitalOutOfRange { orbital: p, n });
            }
            if p <= last {
                return Err(Error::NotCanonical(orbitals.to_vec()));
            }
            last = p;
            bits |= 1 << (p - 1);
        }
        Ok(Self { bits, n: n as u8 })
    }

    /// Sorts an arbitrary orbital sequence, returning the canonical
    /// determinant and the permutation sign, or `None` when an orbital repeats.
    pub fn from_unordered(n: usize, orbitals: &[usize]) -> Result<Option<(Self, i8)>> {
        check_sector(n, orbitals.len().min(n))?;
        let mut det = Self { bits: 0, n: n as u8 };
        let mut sign = 1i8;
        for &p in orbitals {
            if p == 0 || p > n {
                return Err(Error::OrbitalOutOfRange { orbital: p, n });
            }
            match det.insert(p) {
                Some((next, s)) => {
                    det = next;
                    sign *= s;
                }
                None => return Ok(None),
            }
        }
        Ok(Some((det, sign)))
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn k(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn contains(&self, p: usize) -> bool {
        p >= 1 && p <= self.n() && self.bits & (1 << (p - 1)) != 0
    }

    /// Occupied orbitals in ascending order, 1-based.
    pub fn orbitals(&self) -> impl Iterator<Item = usize> + '_ {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(tz + 1)
            }
        })
    }

    /// Lexicographic position among all k-subsets of {1..n}.
    pub fn rank(&self) -> u64 {
        let n = self.n();
        let k = self.k();
        // Reflect p -> n - p (0-based n-1-(p-1)) turns lex order into reversed colex order.
        let colex: u64 = self
            .orbitals()
            .collect::<Vec<_>>()
            .iter()
            .rev()
            .enumerate()
            .map(|(j, &p)| binomial(n - p, j + 1))
            .sum();
        binomial(n, k) - 1 - colex
    }

    pub fn unrank(n: usize, k: usize, rank: u64) -> Result<Self> {
        check_sector(n, k)?;
        let total = binomial(n, k);
        if rank >= total {
            return Err(Error::RankOutOfRange { rank, n, k });
        }
        let mut colex = total - 1 - rank;
        let mut bits = 0u64;
        let mut upper = n;
        for j in (1..=k).rev() {
            // Largest reflected index x < upper with C(x, j) <= colex.
            let mut x = upper - 1;
            while binomial(x, j) > colex {
                x -= 1;
            }
            colex -= binomial(x, j);
            let p = n - x;
            bits |= 1 << (p - 1);
            upper = x;
        }
        Ok(Self { bits, n: n as u8 })
    }

    /// All determinants of the sector in rank order.
    pub fn all(n: usize, k: usize) -> Result<impl Iterator<Item = Determinant>> {
        check_sector(n, k)?;
        Ok((0..binomial(n, k)).map(move |r| {
            Determinant::unrank(n, k, r).expect("rank within sector")
        }))
    }

    /// Wedges orbital `p` onto the right end and re-sorts. The sign is
    /// `(-1)^(#orbitals greater than p)`; `None` when `p` is already occupied.
    pub fn insert(&self, p: usize) -> Option<(Determinant, i8)> {
        debug_assert!(p >= 1 && p <= self.n());
        let bit = 1u64 << (p - 1);
        if self.bits & bit != 0 {
            return None;
        }
        let above = (self.bits & !(bit | (bit - 1))).count_ones();
        let sign = if above.is_multiple_of(2) { 1 } else { -1 };
        Some((
            Determinant {
                bits: self.bits | bit,
                n: self.n,
            },
            sign,
        ))
    }
}

impl fmt::Display for Determinant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.orbitals().map(|p| p.to_string()).collect();
        write!(f, "|{}⟩", labels.join(","))
    }
}

impl fmt::Debug for Determinant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Dense complex amplitude vector over the determinant basis of one sector.
#[derive(Clone, Debug, PartialEq)]
pub struct WedgeVector {
    n: usize,
    k: usize,
    amps: Vec<Complex64>,
}

impl WedgeVector {
    pub fn zeros(n: usize, k: usize) -> Result<Self> {
        check_sector(n, k)?;
        Ok(Self {
            n,
            k,
            amps: vec![ZERO; sector_dim(n, k)],
        })
    }

    pub fn from_determinant(det: Determinant) -> Self {
        let mut v = Self::zeros(det.n(), det.k()).expect("determinant sector is valid");
        v.amps[det.rank() as usize] = Complex64::new(1.0, 0.0);
        v
    }

    /// Accumulates `Σ c·|d⟩`; every determinant must lie in sector (n, k).
    pub fn from_terms<I>(n: usize, k: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Determinant, Complex64)>,
    {
        let mut v = Self::zeros(n, k)?;
        for (det, c) in terms {
            v.check_det(&det)?;
            v.amps[det.rank() as usize] += c;
        }
        Ok(v)
    }

    pub fn from_amplitudes(n: usize, k: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_sector(n, k)?;
        let expected = sector_dim(n, k);
        if amps.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: amps.len(),
            });
        }
        Ok(Self { n, k, amps })
    }

    pub fn from_dvector(n: usize, k: usize, v: &DVector<Complex64>) -> Result<Self> {
        Self::from_amplitudes(n, k, v.iter().copied().collect())
    }

    fn check_det(&self, det: &Determinant) -> Result<()> {
        if det.n() != self.n || det.k() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: det.k(),
            });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, det: &Determinant) -> Complex64 {
        if det.n() != self.n || det.k() != self.k {
            return ZERO;
        }
        self.amps[det.rank() as usize]
    }

    /// Nonzero terms in rank order.
    pub fn terms(&self) -> impl Iterator<Item = (Determinant, Complex64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(move |(r, c)| {
                (
                    Determinant::unrank(self.n, self.k, r as u64).expect("rank within sector"),
                    *c,
                )
            })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &WedgeVector) -> Result<Complex64> {
        self.check_same_sector(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_same_sector(&self, other: &WedgeVector) -> Result<()> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex64) -> WedgeVector {
        WedgeVector {
            n: self.n,
            k: self.k,
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    /// `self += c·other`
    pub fn axpy(&mut self, c: Complex64, other: &WedgeVector) -> Result<()> {
        self.check_same_sector(other)?;
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &WedgeVector) -> Result<WedgeVector> {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn normalized(&self) -> Option<WedgeVector> {
        let norm = self.norm();
        (norm > 0.0).then(|| self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    /// Wedge product with the unit orbital `p`, extended linearly from
    /// [`Determinant::insert`]. Terms already containing `p` vanish.
    pub fn lift(&self, p: usize) -> Result<WedgeVector> {
        if p == 0 || p > self.n {
            return Err(Error::OrbitalOutOfRange { orbital: p, n: self.n });
        }
        let mut out = WedgeVector::zeros(self.n, self.k + 1)?;
        for (det, c) in self.terms() {
            if let Some((lifted, sign)) = det.insert(p) {
                out.amps[lifted.rank() as usize] += c * f64::from(sign);
            }
        }
        Ok(out)
    }

    pub fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amps)
    }
}

/// k-th exterior power of a one-particle basis change.
///
/// If the columns of `u` express new orbitals in the old basis, entry
/// `(I, J)` of the result is the minor `det u[I, J]`, mapping sector
/// amplitudes in the new basis to amplitudes in the old one.
pub fn exterior_power(u: &DMatrix<Complex64>, k: usize) -> Result<DMatrix<Complex64>> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.ncols(),
        });
    }
    let dets: Vec<Vec<usize>> = Determinant::all(n, k)?
        .map(|d| d.orbitals().map(|p| p - 1).collect())
        .collect();
    let dim = dets.len();
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    let mut minor = DMatrix::from_element(k, k, ZERO);
    for (a, rows) in dets.iter().enumerate() {
        for (b, cols) in dets.iter().enumerate() {
            for (i, &r) in rows.iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    minor[(i, j)] = u[(r, c)];
                }
            }
            out[(a, b)] = small_determinant(&minor);
        }
    }
    Ok(out)
}

fn small_determinant(m: &DMatrix<Complex64>) -> Complex64 {
    match m.nrows() {
        0 => Complex64::new(1.0, 0.0),
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => m.clone().determinant(),
    }
}
