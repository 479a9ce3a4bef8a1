//! n-qubit Pauli operators in bit-symplectic form.
//!
//! A [`PauliString`] stores the X and Z components as packed bit vectors plus a
//! quarter phase `i^phase`. Per qubit the Hermitian operator for `(x, z)` is
//! `I, X, Z` or `Y = i·X·Z`, so `(x=1, z=1, phase=0)` is exactly `Y`.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, Error, Result};

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli1 {
    I,
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli1::I,
            (true, false) => Pauli1::X,
            (true, true) => Pauli1::Y,
            (false, true) => Pauli1::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli1::I => (false, false),
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }

    /// Position in the canonical index ordering (I=0, X=1, Y=2, Z=3).
    pub fn code(self) -> u64 {
        match self {
            Pauli1::I => 0,
            Pauli1::X => 1,
            Pauli1::Y => 2,
            Pauli1::Z => 3,
        }
    }

    pub fn from_code(code: u64) -> Self {
        match code & 3 {
            0 => Pauli1::I,
            1 => Pauli1::X,
            2 => Pauli1::Y,
            _ => Pauli1::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli1::I => 'I',
            Pauli1::X => 'X',
            Pauli1::Y => 'Y',
            Pauli1::Z => 'Z',
        }
    }
}

/// Canonical index of a phase-free Pauli: `sum_q 4^q * code(q)`, qubit 0 least
/// significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct PauliIndex(pub u64);

impl PauliIndex {
    /// Number of Paulis on `n` qubits, `4^n`.
    pub fn count(n: usize) -> u64 {
        1u64 << (2 * n)
    }

    /// Splits into the `(x, z)` masks used by the dense kernels (bit q = qubit q).
    pub fn to_masks(self, n: usize) -> (u64, u64) {
        let mut x = 0u64;
        let mut z = 0u64;
        for q in 0..n {
            let (xb, zb) = Pauli1::from_code(self.0 >> (2 * q)).bits();
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        (x, z)
    }

    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        let mut idx = 0u64;
        for q in 0..n {
            let p = Pauli1::from_bits((x >> q) & 1 == 1, (z >> q) & 1 == 1);
            idx |= p.code() << (2 * q);
        }
        PauliIndex(idx)
    }
}

/// An n-qubit Pauli operator `i^phase * P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliString {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    /// `p` acting on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli1) -> Self {
        let mut out = Self::identity(n);
        out.set(q, p);
        out
    }

    pub fn from_bits(x: &[bool], z: &[bool], phase: u8) -> Result<Self> {
        check_dim(x.len(), z.len())?;
        let mut out = Self::identity(x.len());
        for q in 0..x.len() {
            out.set_x(q, x[q]);
            out.set_z(q, z[q]);
        }
        out.phase = phase & 3;
        Ok(out)
    }

    /// Builds a phase-0 Pauli from `(x, z)` masks on up to 64 qubits.
    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        let mut out = Self::identity(n);
        if n > 0 {
            let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
            out.x[0] = x & mask;
            out.z[0] = z & mask;
        }
        out
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    /// Hermitian operators carry phase 0 or 2 (a real sign).
    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    /// Sign of a Hermitian Pauli, `+1` for phase 0 and `-1` for phase 2.
    pub fn sign(&self) -> i8 {
        if self.phase == 2 {
            -1
        } else {
            1
        }
    }

    pub fn x(&self, q: usize) -> bool {
        (self.x[q / WORD] >> (q % WORD)) & 1 == 1
    }

    pub fn z(&self, q: usize) -> bool {
        (self.z[q / WORD] >> (q % WORD)) & 1 == 1
    }

    pub fn set_x(&mut self, q: usize, v: bool) {
        let bit = 1u64 << (q % WORD);
        if v {
            self.x[q / WORD] |= bit;
        } else {
            self.x[q / WORD] &= !bit;
        }
    }

    pub fn set_z(&mut self, q: usize, v: bool) {
        let bit = 1u64 << (q % WORD);
        if v {
            self.z[q / WORD] |= bit;
        } else {
            self.z[q / WORD] &= !bit;
        }
    }

    pub fn get(&self, q: usize) -> Pauli1 {
        Pauli1::from_bits(self.x(q), self.z(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli1) {
        let (x, z) = p.bits();
        self.set_x(q, x);
        self.set_z(q, z);
    }

    /// Multiplies by `-1`.
    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub(crate) fn add_phase(&mut self, k: u8) {
        self.phase = (self.phase + k) & 3;
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// X-component mask (valid for n ≤ 64).
    pub fn x_mask(&self) -> u64 {
        self.x.first().copied().unwrap_or(0)
    }

    pub fn z_mask(&self) -> u64 {
        self.z.first().copied().unwrap_or(0)
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// Exponent `k` such that `a_herm * b_herm = i^k (a·b)_herm`, summed over qubits.
    fn product_phase(&self, other: &Self) -> u8 {
        let mut plus = 0u32;
        let mut minus = 0u32;
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let a_x = x1 & !z1;
            let a_y = x1 & z1;
            let a_z = !x1 & z1;
            let b_x = x2 & !z2;
            let b_y = x2 & z2;
            let b_z = !x2 & z2;
            // XY = iZ, YZ = iX, ZX = iY and the reverses pick up -i.
            plus += ((a_x & b_y) | (a_y & b_z) | (a_z & b_x)).count_ones();
            minus += ((a_x & b_z) | (a_y & b_x) | (a_z & b_y)).count_ones();
        }
        ((plus + 3 * minus) % 4) as u8
    }

    /// Exact group product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    /// `self <- self · other`; both must have the same qubit count.
    pub(crate) fn mul_assign_unchecked(&mut self, other: &Self) {
        let k = self.product_phase(other);
        for w in 0..self.x.len() {
            self.x[w] ^= other.x[w];
            self.z[w] ^= other.z[w];
        }
        self.phase = (self.phase + other.phase + k) & 3;
    }

    /// True iff the symplectic product `<x_a, z_b> + <z_a, x_b>` is even.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        check_dim(self.n, other.n)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones() & 1;
        }
        parity == 0
    }

    /// Canonical index; the phase is dropped.
    pub fn to_index(&self) -> Result<PauliIndex> {
        if self.n > 31 {
            return Err(Error::Capacity {
                what: "qubits for Pauli indexing",
                requested: self.n,
                limit: 31,
            });
        }
        let mut idx = 0u64;
        for q in 0..self.n {
            idx |= self.get(q).code() << (2 * q);
        }
        Ok(PauliIndex(idx))
    }

    pub fn from_index(index: PauliIndex, n: usize) -> Result<Self> {
        if n > 31 {
            return Err(Error::Capacity {
                what: "qubits for Pauli indexing",
                requested: n,
                limit: 31,
            });
        }
        let limit = PauliIndex::count(n);
        if index.0 >= limit {
            return Err(Error::Range { index: index.0, limit });
        }
        let mut out = Self::identity(n);
        for q in 0..n {
            out.set(q, Pauli1::from_code(index.0 >> (2 * q)));
        }
        Ok(out)
    }

    /// Tensor product `self ⊗ other`, with `self` on the low qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::identity(self.n + other.n);
        for q in 0..self.n {
            out.set(q, self.get(q));
        }
        for q in 0..other.n {
            out.set(self.n + q, other.get(q));
        }
        out.phase = (self.phase + other.phase) & 3;
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `[+|-|+i|-i]{I,X,Y,Z}*`, qubit 0 leftmost.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s)
        };
        let mut out = PauliString::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            let p = match c.to_ascii_uppercase() {
                'I' | '_' => Pauli1::I,
                'X' => Pauli1::X,
                'Y' => Pauli1::Y,
                'Z' => Pauli1::Z,
                other => return Err(Error::Parse(format!("invalid Pauli symbol {other:?}"))),
            };
            out.set(q, p);
        }
        out.phase = phase;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    type Mat = Vec<Vec<Complex64>>;

    fn single_matrix(p: Pauli1) -> Mat {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match p {
            Pauli1::I => vec![vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(1., 0.)]],
            Pauli1::X => vec![vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]],
            Pauli1::Y => vec![vec![c(0., 0.), c(0., -1.)], vec![c(0., 1.), c(0., 0.)]],
            Pauli1::Z => vec![vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(-1., 0.)]],
        }
    }

    // Dense matrix with qubit q on bit q of the basis index.
    fn dense(pauli: &PauliString) -> Mat {
        let n = pauli.num_qubits();
        let d = 1 << n;
        let phase = Complex64::i().powu(pauli.phase() as u32);
        let mut m = vec![vec![Complex64::new(0.0, 0.0); d]; d];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                let mut v = phase;
                for q in 0..n {
                    v *= single_matrix(pauli.get(q))[(r >> q) & 1][(c >> q) & 1];
                }
                *entry = v;
            }
        }
        m
    }

    fn matmul(a: &Mat, b: &Mat) -> Mat {
        let d = a.len();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); d]; d];
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    #[test]
    fn single_qubit_products() {
        let xz = p("X").multiply(&p("Z")).unwrap();
        assert_eq!(xz, p("-iY"));
        assert_eq!((xz.x(0), xz.z(0), xz.phase()), (true, true, 3));
        assert_eq!(p("X").multiply(&p("X")).unwrap(), p("I"));
        assert_eq!(p("XZ").multiply(&p("ZZ")).unwrap(), p("-iYI"));
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Y")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(p("XYZ").commutes(&p("XYZ")).unwrap());
        assert!(matches!(p("X").commutes(&p("XX")), Err(Error::Dimension { .. })));
    }

    #[test]
    fn index_ordering() {
        assert!(PauliString::from_index(PauliIndex(0), 3).unwrap().is_identity());
        let labels: Vec<String> = (0..4)
            .map(|i| PauliString::from_index(PauliIndex(i), 1).unwrap().to_string())
            .collect();
        assert_eq!(labels, ["I", "X", "Y", "Z"]);
        for i in 0..256 {
            let ps = PauliString::from_index(PauliIndex(i), 4).unwrap();
            assert_eq!(ps.to_index().unwrap(), PauliIndex(i));
        }
        assert!(matches!(
            PauliString::from_index(PauliIndex(16), 2),
            Err(Error::Range { .. })
        ));
        // qubit 1 carries weight 4
        assert_eq!(p("IX").to_index().unwrap(), PauliIndex(4));
    }

    #[test]
    fn masks_roundtrip() {
        for i in 0..64 {
            let idx = PauliIndex(i);
            let (x, z) = idx.to_masks(3);
            assert_eq!(PauliIndex::from_masks(3, x, z), idx);
            let ps = PauliString::from_masks(3, x, z);
            assert_eq!(ps.to_index().unwrap(), idx);
        }
    }

    #[test]
    fn parse_display() {
        for s in ["XIZ", "-YY", "+iZ", "-iXYZI"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("+XZ").to_string(), "XZ");
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn multiply_matches_dense_matrices() {
        for n in 1..=3usize {
            let count = 1u64 << (2 * n);
            for a in 0..count {
                for b in 0..count {
                    for phase in [0u8, 1] {
                        let pa = PauliString::from_index(PauliIndex(a), n).unwrap().with_phase(phase);
                        let pb = PauliString::from_index(PauliIndex(b), n).unwrap();
                        let prod = pa.multiply(&pb).unwrap();
                        let expect = matmul(&dense(&pa), &dense(&pb));
                        let got = dense(&prod);
                        for (re, rg) in expect.iter().zip(&got) {
                            for (e, g) in re.iter().zip(rg) {
                                assert!((e - g).norm() < 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn wide_strings_cross_word_boundary() {
        let n = 130;
        let mut a = PauliString::identity(n);
        let mut b = PauliString::identity(n);
        a.set(0, Pauli1::X);
        a.set(70, Pauli1::Z);
        a.set(129, Pauli1::Y);
        b.set(70, Pauli1::X);
        b.set(129, Pauli1::Y);
        // ZX = iY on qubit 70, YY = I on 129
        let prod = a.multiply(&b).unwrap();
        assert_eq!(prod.phase(), 1);
        assert_eq!(prod.get(70), Pauli1::Y);
        assert_eq!(prod.get(129), Pauli1::I);
        assert!(!a.commutes(&b).unwrap());
        assert_eq!(prod.weight(), 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
            (proptest::collection::vec(0u64..4, n), 0u8..4).prop_map(move |(codes, ph)| {
                let mut out = PauliString::identity(n);
                for (q, c) in codes.into_iter().enumerate() {
                    out.set(q, Pauli1::from_code(c));
                }
                out.with_phase(ph)
            })
        }

        fn triple() -> impl Strategy<Value = (PauliString, PauliString, PauliString)> {
            (1usize..=8).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n), arb_pauli(n)))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]
            #[test]
            fn associative((a, b, c) in triple()) {
                let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
                let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
                prop_assert_eq!(&left, &right);
                prop_assert_eq!(left.num_qubits(), a.num_qubits());
                prop_assert!(left.phase() < 4);
            }

            #[test]
            fn commutation_is_phase_difference((a, b, _c) in triple()) {
                let ab = a.multiply(&b).unwrap();
                let ba = b.multiply(&a).unwrap();
                prop_assert_eq!(ab.x_words(), ba.x_words());
                let diff = (ab.phase() + 4 - ba.phase()) % 4;
                if a.commutes(&b).unwrap() {
                    prop_assert_eq!(diff, 0);
                } else {
                    prop_assert_eq!(diff, 2);
                }
            }
        }
    }
}
