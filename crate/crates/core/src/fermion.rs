//! Second-quantized Hamiltonians and their qubit encodings.
//!
//! The Hamiltonian convention is
//!
//! ```text
//! H = constant + Σ_pq h_pq a†_p a_q + ½ Σ_pqrs h_pqrs a†_p a†_q a_r a_s
//! ```
//!
//! Both mappings are instances of a linear encoding: qubit values are
//! `b = β·n (mod 2)` for occupation numbers `n`. For a binary matrix `β` the
//! ladder operators are
//!
//! ```text
//! a†_j = X_U(j) · Z_P(j) · (I + Z_O(j)) / 2
//! a_j  = X_U(j) · Z_P(j) · (I − Z_O(j)) / 2
//! ```
//!
//! where `U(j)` is column `j` of `β` (the update set), `O(j)` is row `j` of
//! `β⁻¹` (qubits whose parity is `n_j`) and `P(j)` is the sum of rows `k < j`
//! of `β⁻¹` (qubits whose parity is the occupation below `j`). Jordan–Wigner
//! is `β = I`; Bravyi–Kitaev uses the Fenwick-tree matrix.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Accumulator, Pauli, PauliString, PauliSum, PauliTerm, DEFAULT_DROP_TOLERANCE};

/// Tolerance for the Hermiticity checks on input tensors.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mapping {
    JordanWigner,
    BravyiKitaev,
}

/// One- and two-body integrals over `n_modes` spin orbitals, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTensors {
    pub n_modes: usize,
    pub constant: f64,
    /// `h_pq` at `p * n + q`.
    pub one_body: Vec<Complex64>,
    /// `h_pqrs` at `((p * n + q) * n + r) * n + s`.
    pub two_body: Vec<Complex64>,
}

impl FermionTensors {
    pub fn zeros(n_modes: usize) -> Self {
        FermionTensors {
            n_modes,
            constant: 0.0,
            one_body: vec![Complex64::default(); n_modes * n_modes],
            two_body: vec![Complex64::default(); n_modes.pow(4)],
        }
    }

    pub fn one(&self, p: usize, q: usize) -> Complex64 {
        self.one_body[p * self.n_modes + q]
    }

    pub fn two(&self, p: usize, q: usize, r: usize, s: usize) -> Complex64 {
        let n = self.n_modes;
        self.two_body[((p * n + q) * n + r) * n + s]
    }

    pub fn set_one(&mut self, p: usize, q: usize, v: Complex64) {
        self.one_body[p * self.n_modes + q] = v;
    }

    pub fn set_two(&mut self, p: usize, q: usize, r: usize, s: usize, v: Complex64) {
        let n = self.n_modes;
        self.two_body[((p * n + q) * n + r) * n + s] = v;
    }

    /// Checks shapes and the Hermiticity conditions `h_pq = conj(h_qp)` and
    /// `h_pqrs = conj(h_srqp)`.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_modes;
        if n == 0 {
            return Err(Error::InvalidTensors("n_modes must be positive".into()));
        }
        if self.one_body.len() != n * n {
            return Err(Error::InvalidTensors(format!(
                "one_body has {} entries, expected {}",
                self.one_body.len(),
                n * n
            )));
        }
        if self.two_body.len() != n.pow(4) {
            return Err(Error::InvalidTensors(format!(
                "two_body has {} entries, expected {}",
                self.two_body.len(),
                n.pow(4)
            )));
        }
        if !self.constant.is_finite()
            || self
                .one_body
                .iter()
                .chain(&self.two_body)
                .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("tensor entry".into()));
        }
        for p in 0..n {
            for q in 0..n {
                if (self.one(p, q) - self.one(q, p).conj()).norm() > HERMITIAN_TOLERANCE {
                    return Err(Error::NotHermitian(format!(
                        "h_{p}{q} = {} but conj(h_{q}{p}) = {}",
                        self.one(p, q),
                        self.one(q, p).conj()
                    )));
                }
                for r in 0..n {
                    for s in 0..n {
                        let a = self.two(p, q, r, s);
                        let b = self.two(s, r, q, p).conj();
                        if (a - b).norm() > HERMITIAN_TOLERANCE {
                            return Err(Error::NotHermitian(format!(
                                "h_{p}{q}{r}{s} = {a} but conj(h_{s}{r}{q}{p}) = {b}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Dense random tensors satisfying the Hermiticity conditions. With
    /// `real = true` every entry is real, which makes the Hamiltonian
    /// time-reversal symmetric as well.
    pub fn random<R: Rng + ?Sized>(n_modes: usize, rng: &mut R, real: bool) -> Self {
        let sample = |rng: &mut R| {
            let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
            Complex64::new(rng.random_range(-1.0..1.0), im)
        };
        let n = n_modes;
        let mut t = FermionTensors::zeros(n);
        t.constant = rng.random_range(-1.0..1.0);
        let raw1: Vec<Complex64> = (0..n * n).map(|_| sample(rng)).collect();
        let raw2: Vec<Complex64> = (0..n.pow(4)).map(|_| sample(rng)).collect();
        for p in 0..n {
            for q in 0..n {
                let v = (raw1[p * n + q] + raw1[q * n + p].conj()) * 0.5;
                t.set_one(p, q, v);
                for r in 0..n {
                    for s in 0..n {
                        let a = raw2[((p * n + q) * n + r) * n + s];
                        let b = raw2[((s * n + r) * n + q) * n + p].conj();
                        t.set_two(p, q, r, s, (a + b) * 0.5);
                    }
                }
            }
        }
        t
    }
}

/// Binary encoding matrix together with the derived index sets.
struct LinearEncoding {
    n: usize,
    update: Vec<Vec<usize>>,
    parity: Vec<Vec<usize>>,
    occupation: Vec<Vec<usize>>,
}

impl LinearEncoding {
    fn new(beta: Vec<Vec<bool>>) -> Self {
        let n = beta.len();
        let inv = gf2_inverse(&beta).expect("encoding matrix is invertible");
        let update = (0..n)
            .map(|j| (0..n).filter(|&i| beta[i][j]).collect())
            .collect();
        let occupation = (0..n)
            .map(|j| (0..n).filter(|&i| inv[j][i]).collect())
            .collect();
        let mut parity = Vec::with_capacity(n);
        let mut acc = vec![false; n];
        for j in 0..n {
            parity.push((0..n).filter(|&i| acc[i]).collect());
            for i in 0..n {
                acc[i] ^= inv[j][i];
            }
        }
        LinearEncoding {
            n,
            update,
            parity,
            occupation,
        }
    }

    fn jordan_wigner(n: usize) -> Self {
        LinearEncoding::new((0..n).map(|i| (0..n).map(|j| i == j).collect()).collect())
    }

    /// Fenwick-tree matrix: qubit `i` stores the parity of modes
    /// `i - lowbit(i + 1) + 1 ..= i`.
    fn bravyi_kitaev(n: usize) -> Self {
        let beta = (0..n)
            .map(|i| {
                let low = (i + 1) & (i + 1).wrapping_neg();
                (0..n).map(|j| j <= i && j + low > i).collect()
            })
            .collect();
        LinearEncoding::new(beta)
    }

    fn ladder(&self, j: usize, dagger: bool) -> PauliSum {
        let n = self.n;
        let flip = PauliString::from_sparse(n, self.update[j].iter().map(|&q| (q, Pauli::X)));
        let sign = PauliString::from_sparse(n, self.parity[j].iter().map(|&q| (q, Pauli::Z)));
        let occ = PauliString::from_sparse(n, self.occupation[j].iter().map(|&q| (q, Pauli::Z)));
        let (ph1, base) = flip.multiply(&sign).expect("same length");
        let (ph2, with_occ) = base.multiply(&occ).expect("same length");
        let half = Complex64::new(0.5, 0.0);
        let sgn = if dagger { 1.0 } else { -1.0 };
        PauliSum::from_terms(
            n,
            [
                PauliTerm {
                    coeff: half * ph1.to_complex(),
                    string: base,
                },
                PauliTerm {
                    coeff: half * sgn * (ph1 * ph2).to_complex(),
                    string: with_occ,
                },
            ],
        )
        .expect("same length")
    }
}

fn gf2_inverse(m: &[Vec<bool>]) -> Option<Vec<Vec<bool>>> {
    let n = m.len();
    let mut a: Vec<Vec<bool>> = m.to_vec();
    let mut inv: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r][col])?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        for r in 0..n {
            if r != col && a[r][col] {
                for c in 0..n {
                    a[r][c] ^= a[col][c];
                    inv[r][c] ^= inv[col][c];
                }
            }
        }
    }
    Some(inv)
}

/// Qubit operators for `a_j` (`dagger = false`) or `a†_j` under `mapping`.
pub fn ladder_operator(mapping: Mapping, n_modes: usize, j: usize, dagger: bool) -> PauliSum {
    encoding(mapping, n_modes).ladder(j, dagger)
}

fn encoding(mapping: Mapping, n: usize) -> LinearEncoding {
    match mapping {
        Mapping::JordanWigner => LinearEncoding::jordan_wigner(n),
        Mapping::BravyiKitaev => LinearEncoding::bravyi_kitaev(n),
    }
}

pub fn jordan_wigner(t: &FermionTensors) -> Result<PauliSum> {
    map_tensors(t, Mapping::JordanWigner)
}

pub fn bravyi_kitaev(t: &FermionTensors) -> Result<PauliSum> {
    map_tensors(t, Mapping::BravyiKitaev)
}

pub fn map_tensors(t: &FermionTensors, mapping: Mapping) -> Result<PauliSum> {
    t.validate()?;
    let n = t.n_modes;
    let enc = encoding(mapping, n);
    let create: Vec<PauliSum> = (0..n).map(|j| enc.ladder(j, true)).collect();
    let annihilate: Vec<PauliSum> = (0..n).map(|j| enc.ladder(j, false)).collect();

    let mut acc = Accumulator::new(n);
    acc.add(Complex64::new(t.constant, 0.0), &PauliString::identity(n));

    for p in 0..n {
        for q in 0..n {
            let h = t.one(p, q);
            if h != Complex64::default() {
                acc.add_sum(&create[p].multiply(&annihilate[q])?, h);
            }
        }
    }

    let pairs = |ops_l: &[PauliSum], ops_r: &[PauliSum]| -> Result<Vec<PauliSum>> {
        let mut out = Vec::with_capacity(n * n);
        for p in 0..n {
            for q in 0..n {
                out.push(ops_l[p].multiply(&ops_r[q])?);
            }
        }
        Ok(out)
    };
    let cc = pairs(&create, &create)?;
    let aa = pairs(&annihilate, &annihilate)?;
    for p in 0..n {
        for q in 0..n {
            let left = &cc[p * n + q];
            if left.is_empty() {
                continue;
            }
            // Accumulate per (p, q) row before merging, which bounds the
            // size of intermediate sums.
            let mut row = Accumulator::new(n);
            for r in 0..n {
                for s in 0..n {
                    let h = t.two(p, q, r, s);
                    let right = &aa[r * n + s];
                    if h == Complex64::default() || right.is_empty() {
                        continue;
                    }
                    row.add_sum(&left.multiply(right)?, h * 0.5);
                }
            }
            acc.add_sum(&row.finish(0.0), Complex64::new(1.0, 0.0));
        }
    }
    Ok(acc.finish(DEFAULT_DROP_TOLERANCE))
}

/// Number of distinct Pauli strings in `h`.
pub fn pauli_count(h: &PauliSum) -> usize {
    h.simplify().len()
}
