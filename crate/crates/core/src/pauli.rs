//! Weighted Pauli strings and sums of them.
//!
//! Strings are stored in symplectic form: one X bit and one Z bit per qubit,
//! with `Y = i·X·Z`. Qubit 0 is the leftmost letter of the textual form and
//! the most significant bit of a computational-basis index.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Coefficients below this magnitude are removed by [`PauliSum::simplify`].
pub const DEFAULT_DROP_TOLERANCE: f64 = 1e-12;

/// Largest qubit count [`PauliSum::to_matrix`] accepts unless told otherwise.
pub const DEFAULT_MATRIX_QUBIT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::InvalidLetter(other)),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// A power of `i`: one of `1, i, -1, -i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString {
            n,
            x: vec![0; words(n)],
            z: vec![0; words(n)],
        }
    }

    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut s = PauliString::identity(letters.len());
        for (q, &p) in letters.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    /// A string that is `p` on qubit `q` and identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = PauliString::identity(n);
        s.set(q, p);
        s
    }

    /// Builds a string from `(qubit, letter)` pairs; later pairs overwrite earlier ones.
    pub fn from_sparse(n: usize, letters: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        let mut s = PauliString::identity(n);
        for (q, p) in letters {
            s.set(q, p);
        }
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, q: usize) -> Pauli {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / 64, q % 64);
        Pauli::from_bits(self.x[w] >> b & 1 == 1, self.z[w] >> b & 1 == 1)
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / 64, q % 64);
        let (x, z) = p.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | (u64::from(x) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | (u64::from(z) << b);
    }

    pub fn letters(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n).map(|q| self.get(q))
    }

    /// Qubits carrying a non-identity letter, in increasing order.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.get(q) != Pauli::I).collect()
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    fn count_y(&self) -> u32 {
        self.x.iter().zip(&self.z).map(|(x, z)| (x & z).count_ones()).sum()
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }

    /// Letter-wise product: returns `(phase, p)` with `self · other = phase · p`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        self.check_len(other)?;
        let mut plus = 0u32;
        let mut minus = 0u32;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let (ax, ay, az) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (bx, by, bz) = (x2 & !z2, x2 & z2, !x2 & z2);
            // XY = iZ, YZ = iX, ZX = iY; the reversed products carry -i.
            plus += (ax & by).count_ones() + (ay & bz).count_ones() + (az & bx).count_ones();
            minus += (ay & bx).count_ones() + (az & by).count_ones() + (ax & bz).count_ones();
            x.push(x1 ^ x2);
            z.push(z1 ^ z2);
        }
        let phase = Phase::from_power(i64::from(plus) - i64::from(minus));
        Ok((phase, PauliString { n: self.n, x, z }))
    }

    /// True when the two strings commute, i.e. they anticommute on an even
    /// number of qubits.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.commutes_unchecked(other))
    }

    fn commutes_unchecked(&self, other: &PauliString) -> bool {
        let odd: u32 = (0..self.x.len())
            .map(|w| ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones())
            .sum();
        odd % 2 == 0
    }

    /// Bit masks over computational-basis indices: `(x_mask, z_mask, y_count)`,
    /// so that `P|b> = i^y_count · (-1)^popcount(b & z_mask) · |b ^ x_mask>`.
    ///
    /// Only valid for strings on at most 63 qubits.
    pub fn index_masks(&self) -> (u64, u64, u32) {
        assert!(self.n < 64, "index masks need fewer than 64 qubits");
        let mut xm = 0u64;
        let mut zm = 0u64;
        for q in 0..self.n {
            let bit = 1u64 << (self.n - 1 - q);
            match self.get(q) {
                Pauli::I => {}
                Pauli::X => xm |= bit,
                Pauli::Y => {
                    xm |= bit;
                    zm |= bit;
                }
                Pauli::Z => zm |= bit,
            }
        }
        (xm, zm, self.count_y())
    }

    /// Places this string on qubits `offset..offset + n` of a wider register.
    pub fn embed(&self, width: usize, offset: usize) -> PauliString {
        assert!(offset + self.n <= width);
        PauliString::from_sparse(width, self.letters().enumerate().map(|(q, p)| (q + offset, p)))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.letters().cmp(other.letters()))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.letters() {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters = s.chars().map(Pauli::from_char).collect::<Result<Vec<_>>>()?;
        Ok(PauliString::from_letters(&letters))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: Complex64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coeff: Complex64, string: PauliString) -> Result<Self> {
        if !(coeff.re.is_finite() && coeff.im.is_finite()) {
            return Err(Error::NonFinite(coeff.to_string()));
        }
        Ok(PauliTerm { coeff, string })
    }

    pub fn real(coeff: f64, string: PauliString) -> Result<Self> {
        PauliTerm::new(Complex64::new(coeff, 0.0), string)
    }

    /// Shorthand for tests and examples: `PauliTerm::parse(0.5, "XZ")`.
    pub fn parse(coeff: f64, letters: &str) -> Result<Self> {
        PauliTerm::real(coeff, letters.parse()?)
    }

    pub fn num_qubits(&self) -> usize {
        self.string.num_qubits()
    }
}

/// `[a, b] = ab - ba`: empty when the strings commute, otherwise the single
/// term `2·phase·c_a·c_b·(a·b)`.
pub fn commutator(a: &PauliTerm, b: &PauliTerm) -> Result<PauliSum> {
    let n = a.num_qubits();
    let mut out = PauliSum::new(n);
    if let Some((c, s)) = commutator_term(a, b)? {
        out.terms.push(PauliTerm { coeff: c, string: s });
    }
    Ok(out.simplify())
}

pub(crate) fn commutator_term(a: &PauliTerm, b: &PauliTerm) -> Result<Option<(Complex64, PauliString)>> {
    if a.string.commutes(&b.string)? {
        return Ok(None);
    }
    let (phase, s) = a.string.multiply(&b.string)?;
    Ok(Some((2.0 * phase.to_complex() * a.coeff * b.coeff, s)))
}

/// Ordered weighted sum of Pauli strings on a fixed number of qubits.
///
/// Insertion order is kept; merging of duplicates only happens in
/// [`PauliSum::simplify`].
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn new(n: usize) -> Self {
        PauliSum {
            n,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        let mut sum = PauliSum::new(n);
        for t in terms {
            sum.push(t)?;
        }
        Ok(sum)
    }

    /// Parses `(coeff, letters)` pairs. Mostly for tests.
    pub fn from_pairs(pairs: &[(f64, &str)]) -> Result<Self> {
        let terms = pairs
            .iter()
            .map(|&(c, s)| PauliTerm::parse(c, s))
            .collect::<Result<Vec<_>>>()?;
        let n = terms.first().map_or(0, PauliTerm::num_qubits);
        PauliSum::from_terms(n, terms)
    }

    pub fn push(&mut self, term: PauliTerm) -> Result<()> {
        if term.num_qubits() != self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: term.num_qubits(),
            });
        }
        if !(term.coeff.re.is_finite() && term.coeff.im.is_finite()) {
            return Err(Error::NonFinite(term.coeff.to_string()));
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<PauliTerm> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn simplify(&self) -> PauliSum {
        self.simplify_with(DEFAULT_DROP_TOLERANCE)
    }

    /// Merges duplicate strings (at the position of their first occurrence)
    /// and drops coefficients with magnitude below `tol`.
    pub fn simplify_with(&self, tol: f64) -> PauliSum {
        let mut acc = Accumulator::new(self.n);
        for t in &self.terms {
            acc.add(t.coeff, &t.string);
        }
        acc.finish(tol)
    }

    /// True when every coefficient has imaginary part below `tol` after merging.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.simplify_with(0.0)
            .terms
            .iter()
            .all(|t| t.coeff.im.abs() <= tol)
    }

    /// Sum of absolute coefficients, an upper bound on the spectral norm.
    pub fn coeff_one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    pub fn scale(&self, c: Complex64) -> PauliSum {
        PauliSum {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm {
                    coeff: t.coeff * c,
                    string: t.string.clone(),
                })
                .collect(),
        }
    }

    /// Concatenation; call `simplify` to merge.
    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        Ok(out)
    }

    /// Operator product, simplified.
    pub fn multiply(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut acc = Accumulator::new(self.n);
        for a in &self.terms {
            for b in &other.terms {
                let (phase, s) = a.string.multiply(&b.string)?;
                acc.add(phase.to_complex() * a.coeff * b.coeff, &s);
            }
        }
        Ok(acc.finish(DEFAULT_DROP_TOLERANCE))
    }

    /// `[self, other]`, simplified.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut acc = Accumulator::new(self.n);
        for a in &self.terms {
            for b in &other.terms {
                if let Some((c, s)) = commutator_term(a, b)? {
                    acc.add(c, &s);
                }
            }
        }
        Ok(acc.finish(DEFAULT_DROP_TOLERANCE))
    }

    /// Dense matrix `Σ c·P` on up to [`DEFAULT_MATRIX_QUBIT_CAP`] qubits.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.to_matrix_capped(DEFAULT_MATRIX_QUBIT_CAP)
    }

    pub fn to_matrix_capped(&self, max_qubits: usize) -> Result<DMatrix<Complex64>> {
        if self.n > max_qubits || self.n >= 64 {
            return Err(Error::cap("matrix qubits", self.n, max_qubits));
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for t in &self.terms {
            let (xm, zm, ny) = t.string.index_masks();
            let base = Phase::from_power(i64::from(ny)).to_complex() * t.coeff;
            for col in 0..dim as u64 {
                let sign = if (col & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[((col ^ xm) as usize, col as usize)] += base * sign;
            }
        }
        Ok(m)
    }

    /// Terms sorted by string, letters compared as `I < X < Y < Z`.
    pub fn sorted_by_string(&self) -> PauliSum {
        let mut terms = self.terms.clone();
        terms.sort_by(|a, b| a.string.cmp(&b.string));
        PauliSum { n: self.n, terms }
    }

    /// Real coefficients for a Hermitian sum; imaginary parts above `tol` are an error.
    pub fn real_coefficients(&self, tol: f64) -> Result<Vec<f64>> {
        self.terms
            .iter()
            .map(|t| {
                if t.coeff.im.abs() > tol {
                    Err(Error::NotHermitian(format!(
                        "coefficient {} on {}",
                        t.coeff, t.string
                    )))
                } else {
                    Ok(t.coeff.re)
                }
            })
            .collect()
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if t.coeff.im == 0.0 {
                write!(f, "{}·{}", t.coeff.re, t.string)?;
            } else {
                write!(f, "({})·{}", t.coeff, t.string)?;
            }
        }
        Ok(())
    }
}

/// Insertion-ordered accumulator used to build large sums without
/// materializing duplicates.
#[derive(Debug, Clone)]
pub struct Accumulator {
    n: usize,
    map: IndexMap<PauliString, Complex64>,
}

impl Accumulator {
    pub fn new(n: usize) -> Self {
        Accumulator {
            n,
            map: IndexMap::new(),
        }
    }

    pub fn add(&mut self, coeff: Complex64, string: &PauliString) {
        debug_assert_eq!(string.num_qubits(), self.n);
        if let Some(c) = self.map.get_mut(string) {
            *c += coeff;
        } else {
            self.map.insert(string.clone(), coeff);
        }
    }

    pub fn add_sum(&mut self, sum: &PauliSum, scale: Complex64) {
        for t in &sum.terms {
            self.add(t.coeff * scale, &t.string);
        }
    }

    pub fn finish(self, tol: f64) -> PauliSum {
        let terms = self
            .map
            .into_iter()
            .filter(|(_, c)| c.norm() >= tol)
            .map(|(string, coeff)| PauliTerm { coeff, string })
            .collect();
        PauliSum { n: self.n, terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use proptest::prelude::*;

    fn s(letters: &str) -> PauliString {
        letters.parse().unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(s("X").multiply(&s("Y")).unwrap(), (Phase::I, s("Z")));
        assert_eq!(s("Y").multiply(&s("X")).unwrap(), (Phase::MINUS_I, s("Z")));
        assert_eq!(s("Z").multiply(&s("X")).unwrap(), (Phase::I, s("Y")));
        assert_eq!(s("XX").multiply(&s("XX")).unwrap(), (Phase::ONE, s("II")));
        // X·Z = -iY and Z·X = iY cancel.
        assert_eq!(s("XZ").multiply(&s("ZX")).unwrap(), (Phase::ONE, s("YY")));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(
            s("X").multiply(&s("XX")),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
        assert!(s("X").commutes(&s("XX")).is_err());
    }

    #[test]
    fn commutation() {
        assert!(!s("X").commutes(&s("Z")).unwrap());
        assert!(s("XZ").commutes(&s("ZX")).unwrap());
        assert!(s("XI").commutes(&s("IZ")).unwrap());
    }

    #[test]
    fn weight_and_support() {
        let p = s("IXYZI");
        assert_eq!(p.weight(), 3);
        assert_eq!(p.support(), vec![1, 2, 3]);
        assert!(s("III").is_identity());
        assert_eq!(p.to_string(), "IXYZI");
    }

    #[test]
    fn long_strings_cross_word_boundaries() {
        let mut a = PauliString::identity(130);
        a.set(3, Pauli::X);
        a.set(70, Pauli::Y);
        a.set(129, Pauli::Z);
        let mut b = PauliString::identity(130);
        b.set(70, Pauli::X);
        b.set(129, Pauli::X);
        let (phase, p) = a.multiply(&b).unwrap();
        // Y·X = -iZ, Z·X = iY.
        assert_eq!(phase, Phase::ONE);
        assert_eq!(p.get(70), Pauli::Z);
        assert_eq!(p.get(129), Pauli::Y);
        assert_eq!(p.get(3), Pauli::X);
        assert!(a.commutes(&b).unwrap());
        assert_eq!(p.to_string().parse::<PauliString>().unwrap(), p);
    }

    #[test]
    fn commutator_examples() {
        let a = PauliTerm::parse(0.5, "X").unwrap();
        let b = PauliTerm::parse(0.3, "Z").unwrap();
        let comm = commutator(&a, &b).unwrap();
        assert_eq!(comm.len(), 1);
        assert_eq!(comm.terms()[0].string, s("Y"));
        assert!((comm.terms()[0].coeff - c(0.0, -0.3)).norm() < 1e-15);
        assert!((comm.coeff_one_norm() - 0.3).abs() < 1e-15);

        let x = PauliTerm::parse(1.0, "X").unwrap();
        assert!(commutator(&x, &x).unwrap().is_empty());
    }

    #[test]
    fn commutator_matches_dense_matrices() {
        let a = PauliTerm::parse(1.0, "XX").unwrap();
        let b = PauliTerm::parse(1.0, "ZI").unwrap();
        let comm = commutator(&a, &b).unwrap();
        assert_eq!(comm.len(), 1);
        assert_eq!(comm.terms()[0].string, s("YX"));
        assert!((comm.terms()[0].coeff - c(0.0, -2.0)).norm() < 1e-15);

        let ma = PauliSum::from_terms(2, [a]).unwrap().to_matrix().unwrap();
        let mb = PauliSum::from_terms(2, [b]).unwrap().to_matrix().unwrap();
        let dense = &ma * &mb - &mb * &ma;
        assert!(max_abs(&(dense - comm.to_matrix().unwrap())) < 1e-12);
    }

    #[test]
    fn one_norm() {
        let h = PauliSum::from_pairs(&[(0.5, "X"), (0.5, "Z")]).unwrap();
        assert_eq!(h.coeff_one_norm(), 1.0);
        assert_eq!(PauliSum::new(3).coeff_one_norm(), 0.0);
    }

    #[test]
    fn small_matrices() {
        let z = PauliSum::from_pairs(&[(1.0, "Z")]).unwrap().to_matrix().unwrap();
        assert_eq!(z[(0, 0)], c(1.0, 0.0));
        assert_eq!(z[(1, 1)], c(-1.0, 0.0));
        assert_eq!(z[(0, 1)], c(0.0, 0.0));

        let xz = PauliSum::from_pairs(&[(1.0, "X"), (1.0, "Z")])
            .unwrap()
            .to_matrix()
            .unwrap();
        let expect = DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)],
        );
        assert_eq!(xz, expect);

        let y = PauliSum::from_pairs(&[(1.0, "Y")]).unwrap().to_matrix().unwrap();
        assert_eq!(y[(0, 1)], c(0.0, -1.0));
        assert_eq!(y[(1, 0)], c(0.0, 1.0));
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        // n_0 = (I - Z_0)/2 is diag(0, 0, 1, 1) when qubit 0 is the high bit.
        let n0 = PauliSum::from_pairs(&[(0.5, "II"), (-0.5, "ZI")])
            .unwrap()
            .to_matrix()
            .unwrap();
        let diag: Vec<f64> = (0..4).map(|i| n0[(i, i)].re).collect();
        assert_eq!(diag, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn matrix_cap() {
        let h = PauliSum::new(13);
        assert!(matches!(h.to_matrix(), Err(Error::CapExceeded { .. })));
        assert!(h.to_matrix_capped(13).is_ok());
    }

    #[test]
    fn simplify_merges_and_drops() {
        let h = PauliSum::from_pairs(&[(0.5, "XI"), (0.25, "ZZ"), (0.5, "XI"), (-0.25, "ZZ")])
            .unwrap();
        let s1 = h.simplify();
        assert_eq!(s1.len(), 1);
        assert_eq!(s1.terms()[0].coeff, c(1.0, 0.0));
        let tiny = PauliSum::from_pairs(&[(1e-13, "X"), (1.0, "Z")]).unwrap();
        assert_eq!(tiny.simplify().len(), 1);
        assert_eq!(tiny.simplify_with(1e-14).len(), 2);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(PauliTerm::parse(f64::NAN, "X").is_err());
        assert!(PauliTerm::parse(f64::INFINITY, "X").is_err());
    }

    fn letter() -> impl Strategy<Value = Pauli> {
        prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
    }

    fn string(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(letter(), n).prop_map(|l| PauliString::from_letters(&l))
    }

    fn hermitian_sum(n: usize) -> impl Strategy<Value = PauliSum> {
        proptest::collection::vec((-1.0f64..1.0, string(n)), 1..8).prop_map(move |ts| {
            PauliSum::from_terms(
                n,
                ts.into_iter().map(|(c, s)| PauliTerm::real(c, s).unwrap()),
            )
            .unwrap()
        })
    }

    fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
        m.clone().singular_values().max()
    }

    proptest! {
        #[test]
        fn multiplication_is_associative((a, b, c) in (1usize..6).prop_flat_map(|n| (string(n), string(n), string(n)))) {
            let (p1, ab) = a.multiply(&b).unwrap();
            let (p2, ab_c) = ab.multiply(&c).unwrap();
            let (p3, bc) = b.multiply(&c).unwrap();
            let (p4, a_bc) = a.multiply(&bc).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            prop_assert_eq!(p1 * p2, p3 * p4);
            prop_assert!(((p1 * p2).to_complex().norm() - 1.0).abs() < 1e-15);
        }

        #[test]
        fn product_matches_matrix_product((a, b) in (1usize..6).prop_flat_map(|n| (string(n), string(n)))) {
            let n = a.num_qubits();
            let (phase, p) = a.multiply(&b).unwrap();
            let ma = PauliSum::from_terms(n, [PauliTerm::real(1.0, a.clone()).unwrap()]).unwrap().to_matrix().unwrap();
            let mb = PauliSum::from_terms(n, [PauliTerm::real(1.0, b.clone()).unwrap()]).unwrap().to_matrix().unwrap();
            let mp = PauliSum::from_terms(n, [PauliTerm::new(phase.to_complex(), p).unwrap()]).unwrap().to_matrix().unwrap();
            prop_assert!(max_abs(&(&ma * &mb - mp)) < 1e-12);
            prop_assert_eq!(a.commutes(&b).unwrap(), max_abs(&(&ma * &mb - &mb * &ma)) < 1e-12);
        }

        #[test]
        fn commutator_is_antisymmetric((a, b, ca, cb) in (1usize..6).prop_flat_map(|n| (string(n), string(n), -2.0f64..2.0, -2.0f64..2.0))) {
            let ta = PauliTerm::real(ca, a).unwrap();
            let tb = PauliTerm::real(cb, b).unwrap();
            let ab = commutator(&ta, &tb).unwrap();
            let ba = commutator(&tb, &ta).unwrap();
            prop_assert_eq!(ab.len(), ba.len());
            for (x, y) in ab.terms().iter().zip(ba.terms()) {
                prop_assert_eq!(&x.string, &y.string);
                prop_assert!((x.coeff + y.coeff).norm() < 1e-12);
            }
        }

        #[test]
        fn one_norm_bounds_spectral_norm(h in (1usize..6).prop_flat_map(hermitian_sum)) {
            let h = h.simplify();
            let m = h.to_matrix().unwrap();
            prop_assert!(h.coeff_one_norm() + 1e-12 >= spectral_norm(&m));
        }

        #[test]
        fn simplify_is_idempotent_and_exact(h in (1usize..5).prop_flat_map(hermitian_sum)) {
            let once = h.simplify();
            prop_assert_eq!(once.simplify(), once.clone());
            let diff = h.to_matrix().unwrap() - once.to_matrix().unwrap();
            prop_assert!(max_abs(&diff) < 1e-12);
            prop_assert!(once.is_hermitian(1e-12));
        }
    }
}
