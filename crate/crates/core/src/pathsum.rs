//! Phase-exact amplitudes of Clifford circuits.
//!
//! A Clifford circuit applied to a basis state is tracked as a sum over paths
//!
//! ```text
//!   C|b> = 2^{-h/2} e^{i pi m/4} sum_{v in F_2^k} i^{l·v} (-1)^{v^T Q v} |A v + c>
//! ```
//!
//! where every Hadamard introduces one path variable, `l` has entries in `Z_4`
//! and `Q` is a symmetric bit matrix with zero diagonal. Amplitudes
//! `<x|C|b>` are exponential sums of this shape, evaluated exactly in
//! `O(k^3)` by eliminating one variable at a time; the class is closed under
//! every elimination step, so the result is always `b 2^{-p/2} e^{i pi m/4}`.

use crate::circuit::CliffordGate;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64).max(1)])
    }

    fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    fn toggle(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn xor(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * 64 + b)
                }
            })
        })
    }
}

/// Affine F_2 form `sum_{j in vars} v_j + c`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Affine {
    vars: Bits,
    c: bool,
}

impl Affine {
    fn constant(width: usize, c: bool) -> Self {
        Affine {
            vars: Bits::zeros(width),
            c,
        }
    }

    fn var(width: usize, j: usize) -> Self {
        let mut a = Self::constant(width, false);
        a.vars.toggle(j);
        a
    }

    fn xor(&mut self, other: &Affine) {
        self.vars.xor(&other.vars);
        self.c ^= other.c;
    }
}

/// Exact amplitude `b * 2^{-p/2} * e^{i pi m / 4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct StabInnerProduct {
    pub b: u8,
    pub p: u32,
    pub m: u8,
}

impl StabInnerProduct {
    pub const ZERO: StabInnerProduct = StabInnerProduct { b: 0, p: 0, m: 0 };

    pub fn to_complex(self) -> num_complex::Complex64 {
        if self.b == 0 {
            return num_complex::Complex64::new(0.0, 0.0);
        }
        let mag = 2f64.powf(-(self.p as f64) / 2.0);
        num_complex::Complex64::from_polar(mag, std::f64::consts::FRAC_PI_4 * self.m as f64)
    }
}

/// Path-sum representation of `C|input>` for a Clifford circuit `C`.
#[derive(Debug, Clone)]
pub(crate) struct PathSum {
    width: usize,
    used: usize,
    lin: Vec<u8>,
    quad: Vec<Bits>,
    phase8: u8,
    half: i64,
    qubits: Vec<Affine>,
}

impl PathSum {
    /// `n` qubits initialised to `|0^n>`, with room for `capacity` path variables.
    pub fn new(n: usize, capacity: usize) -> Self {
        let width = capacity.max(1);
        PathSum {
            width,
            used: 0,
            lin: vec![0; width],
            quad: vec![Bits::zeros(width); width],
            phase8: 0,
            half: 0,
            qubits: (0..n).map(|_| Affine::constant(width, false)).collect(),
        }
    }

    /// Variable budget needed to run `gates` with `inputs` free input qubits.
    pub fn capacity_for(gates: &[CliffordGate], inputs: usize) -> usize {
        inputs + gates.iter().filter(|g| matches!(g, CliffordGate::H(_))).count()
    }

    fn fresh(&mut self) -> usize {
        assert!(self.used < self.width, "path-sum variable capacity exhausted");
        self.used += 1;
        self.used - 1
    }

    pub fn set_basis(&mut self, q: usize, bit: bool) {
        self.qubits[q] = Affine::constant(self.width, bit);
    }

    /// Makes qubit `q` start in a symbolic basis value; returns the variable.
    /// The variable must later be pinned through [`PathSum::amplitude`].
    pub fn set_input_var(&mut self, q: usize) -> usize {
        let v = self.fresh();
        self.qubits[q] = Affine::var(self.width, v);
        v
    }

    /// Multiplies by `i^{c f(v)}` for an affine `f`.
    fn add_i_power(&mut self, f: &Affine, c: u8) {
        let mut c = c & 3;
        if c == 0 {
            return;
        }
        if f.c {
            // 1 xor g = 1 - g over the integers
            self.phase8 = (self.phase8 + 2 * c) & 7;
            c = (4 - c) & 3;
        }
        // xor_{j in S} v_j = sum_j v_j - 2 sum_{i<j} v_i v_j (mod 4)
        let members: Vec<usize> = f.vars.ones().collect();
        for &j in &members {
            self.lin[j] = (self.lin[j] + c) & 3;
        }
        if c & 1 == 1 {
            for &i in &members {
                self.quad[i].xor(&f.vars);
                self.quad[i].toggle(i);
            }
        }
    }

    /// Multiplies by `(-1)^{f(v) g(v)}`.
    fn add_sign_product(&mut self, f: &Affine, g: &Affine) {
        let fv: Vec<usize> = f.vars.ones().collect();
        let gv: Vec<usize> = g.vars.ones().collect();
        for &i in &fv {
            self.quad[i].xor(&g.vars);
        }
        for &j in &gv {
            self.quad[j].xor(&f.vars);
        }
        // v_i v_i = v_i; the double toggle above already cleared the diagonal
        for &i in &fv {
            if g.vars.get(i) {
                self.lin[i] = (self.lin[i] + 2) & 3;
            }
        }
        if g.c {
            for &i in &fv {
                self.lin[i] = (self.lin[i] + 2) & 3;
            }
        }
        if f.c {
            for &j in &gv {
                self.lin[j] = (self.lin[j] + 2) & 3;
            }
        }
        if f.c && g.c {
            self.phase8 = (self.phase8 + 4) & 7;
        }
    }

    pub fn apply(&mut self, gate: &CliffordGate) {
        match *gate {
            CliffordGate::H(q) => {
                let u = self.fresh();
                let uf = Affine::var(self.width, u);
                let f = self.qubits[q].clone();
                self.add_sign_product(&f, &uf);
                self.qubits[q] = uf;
                self.half += 1;
            }
            CliffordGate::S(q) => {
                let f = self.qubits[q].clone();
                self.add_i_power(&f, 1);
            }
            CliffordGate::Sdg(q) => {
                let f = self.qubits[q].clone();
                self.add_i_power(&f, 3);
            }
            CliffordGate::Z(q) => {
                let f = self.qubits[q].clone();
                self.add_i_power(&f, 2);
            }
            CliffordGate::X(q) => self.qubits[q].c ^= true,
            CliffordGate::Y(q) => {
                // Y = i X Z
                let f = self.qubits[q].clone();
                self.add_i_power(&f, 2);
                self.qubits[q].c ^= true;
                self.phase8 = (self.phase8 + 2) & 7;
            }
            CliffordGate::CX(c, t) => {
                let f = self.qubits[c].clone();
                self.qubits[t].xor(&f);
            }
            CliffordGate::CZ(a, b) => {
                let f = self.qubits[a].clone();
                let g = self.qubits[b].clone();
                self.add_sign_product(&f, &g);
            }
            CliffordGate::Swap(a, b) => self.qubits.swap(a, b),
        }
    }

    /// Replaces `v_p` by the affine form `h` (which must not contain `p`).
    fn substitute(&mut self, p: usize, h: &Affine) {
        let lp = self.lin[p];
        self.lin[p] = 0;
        let neighbours = std::mem::replace(&mut self.quad[p], Bits::zeros(self.width));
        for j in neighbours.ones() {
            self.quad[j].clear(p);
        }
        self.add_i_power(h, lp);
        if !neighbours.is_zero() {
            let nb = Affine {
                vars: neighbours,
                c: false,
            };
            self.add_sign_product(h, &nb);
        }
    }

    /// Imposes `g(v) = 0`, pivoting on an unprotected variable when possible.
    /// Returns false when the constraint is unsatisfiable.
    fn constrain(&mut self, g: &Affine, pending: &mut [Affine], st: &mut Elimination) -> bool {
        let mut free = g.vars.clone();
        for (a, b) in free.0.iter_mut().zip(&st.protected.0) {
            *a &= !b;
        }
        let p = match free.first().or_else(|| g.vars.first()) {
            Some(p) => p,
            None => return !g.c,
        };
        let mut h = g.clone();
        h.vars.toggle(p);
        if st.protected.get(p) {
            st.equations.push(h.clone());
            st.pivots.push(p);
        }
        self.substitute(p, &h);
        for other in pending.iter_mut() {
            if other.vars.get(p) {
                other.xor(g);
            }
        }
        st.eliminated[p] = true;
        true
    }

    /// Sums out every unprotected variable of `<x| C |input>`, leaving an
    /// exact function of the protected input variables.
    pub fn reduce(&self, x: &[bool], fixes: &[(usize, bool)], protected: &[usize]) -> Reduced {
        debug_assert_eq!(x.len(), self.qubits.len());
        let mut form = self.clone();
        let mut st = Elimination {
            protected: Bits::zeros(self.width),
            eliminated: vec![false; self.width],
            equations: Vec::new(),
            pivots: Vec::new(),
        };
        for &v in protected {
            st.protected.toggle(v);
        }
        let zero = Reduced {
            nonzero: false,
            ..Reduced::default()
        };
        let mut constraints: Vec<Affine> = Vec::with_capacity(x.len() + fixes.len());
        for &(v, bit) in fixes {
            let mut a = Affine::var(self.width, v);
            a.c = bit;
            constraints.push(a);
        }
        for (q, &bit) in x.iter().enumerate() {
            let mut a = form.qubits[q].clone();
            a.c ^= bit;
            constraints.push(a);
        }
        for i in 0..constraints.len() {
            let (head, tail) = constraints.split_at_mut(i + 1);
            if !form.constrain(&head[i], tail, &mut st) {
                return zero;
            }
        }
        let mut empty: [Affine; 0] = [];
        for k in 0..form.used {
            if st.eliminated[k] || st.protected.get(k) {
                continue;
            }
            st.eliminated[k] = true;
            let lk = form.lin[k];
            form.lin[k] = 0;
            let neighbours = std::mem::replace(&mut form.quad[k], Bits::zeros(self.width));
            for j in neighbours.ones() {
                form.quad[j].clear(k);
            }
            let l = Affine {
                vars: neighbours,
                c: lk & 2 == 2,
            };
            if lk & 1 == 0 {
                // sum_v (-1)^{v L} = 2 [L = 0]
                form.half -= 2;
                if !form.constrain(&l, &mut empty, &mut st) {
                    return zero;
                }
            } else {
                // sum_v i^v (-1)^{v L} = sqrt2 e^{i pi/4} (-i)^L
                form.half -= 1;
                form.phase8 = (form.phase8 + 1) & 7;
                form.add_i_power(&l, 3);
            }
        }
        let compact = |a: &Bits| -> u64 {
            protected
                .iter()
                .enumerate()
                .filter(|(_, &v)| a.get(v))
                .fold(0, |m, (i, _)| m | (1 << i))
        };
        let mut quad = vec![0u64; protected.len()];
        let mut lin = vec![0u8; protected.len()];
        for (i, &v) in protected.iter().enumerate() {
            if !st.eliminated[v] {
                lin[i] = form.lin[v];
                quad[i] = compact(&form.quad[v]);
            }
        }
        let equations = st
            .pivots
            .iter()
            .zip(&st.equations)
            .map(|(&p, h)| {
                let i = protected.iter().position(|&v| v == p).expect("protected pivot");
                (i, compact(&h.vars), h.c)
            })
            .collect();
        debug_assert!(form.half >= 0, "amplitude magnitude above one");
        Reduced {
            nonzero: true,
            half: form.half.max(0) as u32,
            phase8: form.phase8,
            lin,
            quad,
            equations,
        }
    }

    /// `<x| C |input>` with input variables pinned by `fixes` (variable, value).
    pub fn amplitude(&self, x: &[bool], fixes: &[(usize, bool)]) -> StabInnerProduct {
        let r = self.reduce(x, fixes, &[]);
        match r.phase_at(0) {
            Some(m) => StabInnerProduct { b: 1, p: r.half, m },
            None => StabInnerProduct::ZERO,
        }
    }
}

struct Elimination {
    protected: Bits,
    eliminated: Vec<bool>,
    equations: Vec<Affine>,
    pivots: Vec<usize>,
}

/// `<x| C |y>` as an explicit function of the protected bits `y` (at most 64):
/// zero unless every `y_i = mask·y + c` holds, otherwise
/// `2^{-half/2} e^{i pi (phase8 + 2 l·y + 4 y^T Q y)/4}`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Reduced {
    nonzero: bool,
    pub half: u32,
    phase8: u8,
    lin: Vec<u8>,
    /// Symmetric with zero diagonal; row `i` as a bit mask.
    quad: Vec<u64>,
    equations: Vec<(usize, u64, bool)>,
}

impl Reduced {
    /// Phase exponent (units of pi/4) of the term at `y`, or `None` if it vanishes.
    pub fn phase_at(&self, y: u64) -> Option<u8> {
        if !self.nonzero {
            return None;
        }
        for &(i, mask, c) in &self.equations {
            if ((y >> i) & 1 == 1) != (((mask & y).count_ones() & 1 == 1) ^ c) {
                return None;
            }
        }
        let mut lin = 0u32;
        let mut pairs = 0u32;
        let mut rest = y;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            lin += self.lin[i] as u32;
            pairs += (self.quad[i] & y).count_ones();
        }
        // each pair is counted twice
        let quad = (pairs / 2) & 1;
        Some(((self.phase8 as u32 + 2 * lin + 4 * quad) & 7) as u8)
    }
}

/// `<x| C |b>` for a Clifford circuit `C` on `n` qubits.
pub(crate) fn clifford_amplitude(n: usize, gates: &[CliffordGate], input: &[bool], x: &[bool]) -> StabInnerProduct {
    let mut ps = PathSum::new(n, PathSum::capacity_for(gates, 0));
    for (q, &b) in input.iter().enumerate() {
        ps.set_basis(q, b);
    }
    for g in gates {
        ps.apply(g);
    }
    ps.amplitude(x, &[])
}
