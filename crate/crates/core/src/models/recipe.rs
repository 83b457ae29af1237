//! Generic construction of the per-endpoint singular IVP fields, symbolic in
//! the model parameters.
//!
//! Starting from the second-order Einstein equation for `f_i` and the change
//! of variables `x_i = f_i^2/t^2` (collapsing summands), `x_i = f_i^2`
//! (others), `x' = 2y`, the right-hand side `y_i'` splits by powers of `t`
//! into `A_i/t^2 + B_i/t + C_i` with `C_i` polynomial of degree 2 in `t`.
//! With `e_i = 1` on collapsing summands and `e_i = 0` otherwise, and
//! `L = sum of d_i over collapsing i` the sphere dimension:
//!
//! ```text
//! A_i = e_i (b_i/2 - (L-1) x_i)                                 [+ brackets]
//! B_i = -(e_i d_i + L) y_i - e_i x_i sum_{k!=i} d_k y_k/x_k
//! C_i = (2-d_i) y_i^2/x_i + (1-e_i) b_i/2 - lambda x_i
//!       - sum_{k!=i} d_k y_i y_k/x_k                            [+ brackets]
//! ```
//!
//! Each ordered bracket pair `(k,l)` with `w = [ikl] != 0` contributes
//! `w/(4 d_i) * x_i^2/(x_k x_l) * t^(2(e_i-e_k-e_l))` and
//! `-w/(2 d_i) * x_k/x_l * t^(2(e_k-e_i-e_l))`; exponent `-2` lands in `A_i`,
//! `0` and `+2` in `C_i`. Exponent `-4` cannot occur: a bracket coupling two
//! collapsing summands to a non-collapsing one vanishes, because the
//! collapsing block brackets into the singular isotropy algebra, which is
//! orthogonal to the non-collapsing block.
//!
//! Coefficients are carried as factored rational functions of `(p, q, n)` so
//! that the rendered systems come out in the hand-derived shape (cancelled
//! factors, merged constants and monomials). The shipped data files were
//! frozen from this construction; tests cross-check both against the
//! transcribed per-model systems.

use super::{ModelId, SingularIVP};
use crate::algebra::{rat, ratio, Rational};
use crate::expr::Expr;
use num::bigint::BigInt;
use num::{One, Signed};
use std::collections::BTreeMap;
use std::str::FromStr;

// ---------------------------------------------------------------------------
// Polynomials in (p, q, n) over the rationals, plus factored quotients
// ---------------------------------------------------------------------------

const VAR_NAMES: [&str; 3] = ["p", "q", "n"];

/// Multivariate polynomial in `(p, q, n)`; key = exponent triple.
#[derive(Clone, Debug, PartialEq, Eq)]
struct MPoly(BTreeMap<[u32; 3], Rational>);

impl MPoly {
    fn zero() -> Self {
        MPoly(BTreeMap::new())
    }

    fn constant(c: Rational) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert([0, 0, 0], c);
        }
        MPoly(m)
    }

    fn int(c: i64) -> Self {
        Self::constant(rat(c))
    }

    fn var(idx: usize) -> Self {
        let mut key = [0u32; 3];
        key[idx] = 1;
        let mut m = BTreeMap::new();
        m.insert(key, Rational::one());
        MPoly(m)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn as_constant(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => self.0.get(&[0, 0, 0]).cloned(),
            _ => None,
        }
    }

    fn add(&self, o: &Self) -> Self {
        let mut out = self.0.clone();
        for (k, v) in &o.0 {
            let e = out.entry(*k).or_insert_with(Rational::zero);
            *e += v;
            if e.is_zero() {
                out.remove(k);
            }
        }
        MPoly(out)
    }

    fn neg(&self) -> Self {
        MPoly(self.0.iter().map(|(k, v)| (*k, -v)).collect())
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out: BTreeMap<[u32; 3], Rational> = BTreeMap::new();
        for (ka, va) in &self.0 {
            for (kb, vb) in &o.0 {
                let key = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
                let e = out.entry(key).or_insert_with(Rational::zero);
                *e += va * vb;
                if e.is_zero() {
                    out.remove(&key);
                }
            }
        }
        MPoly(out)
    }

    fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        MPoly(self.0.iter().map(|(k, v)| (*k, v * c)).collect())
    }

    fn leading(&self) -> Option<([u32; 3], Rational)> {
        self.0.iter().next_back().map(|(k, v)| (*k, v.clone()))
    }

    /// Exact polynomial division; `None` when `d` does not divide `self`.
    fn try_div(&self, d: &Self) -> Option<Self> {
        let mut rem = self.clone();
        let mut quo = MPoly::zero();
        let (ld_key, ld_coef) = d.leading()?;
        while !rem.is_zero() {
            let (lr_key, lr_coef) = rem.leading().unwrap();
            if lr_key.iter().zip(&ld_key).any(|(a, b)| a < b) {
                return None;
            }
            let tk = [lr_key[0] - ld_key[0], lr_key[1] - ld_key[1], lr_key[2] - ld_key[2]];
            let tc = &lr_coef / &ld_coef;
            let mut tm = BTreeMap::new();
            tm.insert(tk, tc);
            let term = MPoly(tm);
            quo = quo.add(&term);
            rem = rem.sub(&term.mul(d));
        }
        Some(quo)
    }

    /// Renders as a plain expression, highest-order terms first.
    fn raw_expr(&self) -> Expr {
        if self.is_zero() {
            return Expr::int(0);
        }
        let mut acc = Expr::int(0);
        for (key, coef) in self.0.iter().rev() {
            let is_const_mono = key.iter().all(|&e| e == 0);
            let mut term = if is_const_mono || !coef.abs().is_one() {
                Expr::cnst(coef.abs())
            } else {
                Expr::int(1)
            };
            for (idx, &e) in key.iter().enumerate() {
                if e > 0 {
                    term = term.mul(Expr::param(VAR_NAMES[idx]).pow(e));
                }
            }
            if coef.is_negative() {
                term = term.neg();
            }
            acc = acc.add(term);
        }
        acc
    }

    /// Renders factored over the linear atoms when that is tidier.
    fn to_expr(&self) -> Expr {
        if self.is_zero() {
            return Expr::int(0);
        }
        if let Some(c) = self.as_constant() {
            return Expr::cnst(c);
        }
        let (content, factors, prim) = factor_poly(self);
        let mut e = if content.abs().is_one() {
            Expr::int(1)
        } else {
            Expr::cnst(content.abs())
        };
        for (atom, pow) in &factors {
            e = e.mul(atom.raw_expr().pow(*pow));
        }
        if prim.as_constant() != Some(Rational::one()) {
            e = e.mul(prim.raw_expr());
        }
        if content.is_negative() {
            e = e.neg();
        }
        e
    }
}

/// Linear atoms the rendered coefficients are factored over.
fn atoms() -> Vec<MPoly> {
    vec![
        p(),
        q(),
        n(),
        lin(1, p(), 1),
        lin(1, q(), 1),
        p().add(&q()),
        lin(-2, n(), 1),
        lin(-1, n(), 1),
        lin(1, n(), 1),
        lin(2, n(), 1),
        lin(3, n(), 1),
    ]
}

/// Splits `mp = content * prod(atom^pow) * residual`, `residual` primitive
/// (integer coprime coefficients, positive leading one); the sign travels in
/// `content`.
fn factor_poly(mp: &MPoly) -> (Rational, Vec<(MPoly, u32)>, MPoly) {
    assert!(!mp.is_zero(), "factoring the zero polynomial");
    let mut rest = mp.clone();
    let mut factors: Vec<(MPoly, u32)> = Vec::new();
    for atom in atoms() {
        let mut pow = 0u32;
        while let Some(q) = rest.try_div(&atom) {
            rest = q;
            pow += 1;
        }
        if pow > 0 {
            factors.push((atom, pow));
        }
    }
    let mut gnum = BigInt::from(0);
    let mut lden = BigInt::from(1);
    for coef in rest.0.values() {
        gnum = num::integer::gcd(gnum, coef.numer().abs());
        lden = num::integer::lcm(lden, coef.denom().clone());
    }
    let mut content = Rational::from_str(&format!("{gnum}/{lden}")).unwrap();
    if rest.leading().unwrap().1.is_negative() {
        content = -content;
    }
    let prim = rest.scale(&content.recip());
    (content, factors, prim)
}

/// Rational function in `(p, q, n)` kept as `num / prod(den factors)`.
#[derive(Clone, Debug)]
struct Coef {
    num: MPoly,
    den: Vec<MPoly>,
}

impl Coef {
    fn zero() -> Self {
        Coef {
            num: MPoly::zero(),
            den: Vec::new(),
        }
    }

    fn from_poly(p: MPoly) -> Self {
        Coef {
            num: p,
            den: Vec::new(),
        }
    }

    fn int(c: i64) -> Self {
        Self::from_poly(MPoly::int(c))
    }

    fn ratio(n: i64, d: i64) -> Self {
        Self::from_poly(MPoly::constant(ratio(n, d)))
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn div(&self, o: &Self) -> Self {
        assert!(!o.is_zero(), "coefficient division by zero");
        let mut den = self.den.clone();
        den.push(o.num.clone());
        let mut num = self.num.clone();
        for f in &o.den {
            num = num.mul(f);
        }
        Coef { num, den }.normalized()
    }

    fn neg(&self) -> Self {
        Coef {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    fn add(&self, o: &Self) -> Self {
        // Common denominator by concatenation; normalization cancels overlap.
        let mut num_a = self.num.clone();
        for f in &o.den {
            num_a = num_a.mul(f);
        }
        let mut num_b = o.num.clone();
        for f in &self.den {
            num_b = num_b.mul(f);
        }
        let mut den = self.den.clone();
        den.extend(o.den.iter().cloned());
        Coef {
            num: num_a.add(&num_b),
            den,
        }
        .normalized()
    }

    fn scale(&self, c: &Rational) -> Self {
        Coef {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        let mut remaining = Vec::new();
        for f in std::mem::take(&mut self.den) {
            if let Some(c) = f.as_constant() {
                assert!(!c.is_zero(), "zero denominator factor");
                self.num = self.num.scale(&c.recip());
            } else if let Some(q) = self.num.try_div(&f) {
                self.num = q;
            } else {
                remaining.push(f);
            }
        }
        self.den = remaining;
        self
    }

    fn to_expr(&self) -> Expr {
        self.times_monomial(&[])
    }

    /// Renders `self * prod(x_j^expo_j)` as a single fraction with factored
    /// numerator and denominator.
    fn times_monomial(&self, expo: &[i64]) -> Expr {
        if self.is_zero() {
            return Expr::int(0);
        }
        let (content, num_factors, prim) = factor_poly(&self.num);
        let mut const_num = content.numer().clone();
        let mut const_den = content.denom().clone();
        let mut den_parts: Vec<Expr> = Vec::new();
        for f in &self.den {
            let (c, fs, pr) = factor_poly(f);
            // Denominator factors are constructed positive.
            assert!(!c.is_negative(), "negative denominator factor");
            const_num *= c.denom();
            const_den *= c.numer();
            for (atom, pow) in fs {
                den_parts.push(atom.raw_expr().pow(pow));
            }
            if pr.as_constant() != Some(Rational::one()) {
                den_parts.push(pr.raw_expr());
            }
        }
        let negative = const_num.is_negative();
        let const_num = const_num.abs();

        let prim_is_one = prim.as_constant() == Some(Rational::one());
        let mut num_parts: Vec<Expr> = Vec::new();
        let no_symbolic_num = num_factors.is_empty() && prim_is_one && expo.iter().all(|&e| e <= 0);
        if !const_num.is_one() || no_symbolic_num {
            num_parts.push(Expr::cnst(Rational::from_str(&const_num.to_string()).unwrap()));
        }
        for (atom, pow) in &num_factors {
            num_parts.push(atom.raw_expr().pow(*pow));
        }
        if !prim_is_one {
            num_parts.push(prim.raw_expr());
        }
        for (j, &e) in expo.iter().enumerate() {
            if e > 0 {
                num_parts.push(Expr::x(j + 1).pow(e as u32));
            }
        }

        if !const_den.is_one() {
            den_parts.insert(0, Expr::cnst(Rational::from_str(&const_den.to_string()).unwrap()));
        }
        for (j, &e) in expo.iter().enumerate() {
            if e < 0 {
                den_parts.push(Expr::x(j + 1).pow((-e) as u32));
            }
        }

        let product = |parts: Vec<Expr>| -> Expr {
            let mut acc = Expr::int(1);
            for part in parts {
                acc = acc.mul(part);
            }
            acc
        };
        let mut out = product(num_parts);
        if !den_parts.is_empty() {
            out = out.div(product(den_parts));
        }
        if negative {
            out = out.neg();
        }
        out
    }
}

fn p() -> MPoly {
    MPoly::var(0)
}

fn q() -> MPoly {
    MPoly::var(1)
}

fn n() -> MPoly {
    MPoly::var(2)
}

fn lin(c0: i64, var: MPoly, c1: i64) -> MPoly {
    // c1*var + c0
    var.scale(&rat(c1)).add(&MPoly::int(c0))
}

// ---------------------------------------------------------------------------
// Symbolic model tables (IVP convention: model A rescaled)
// ---------------------------------------------------------------------------

/// Symbolic boundary behaviour of one summand.
#[derive(Clone, Debug)]
enum Slot {
    Collapse(Coef),
    Group(usize),
}

struct Boundary {
    slots: Vec<Slot>,
    groups: Vec<&'static str>,
    sphere_dim: MPoly,
}

struct ModelData {
    s: usize,
    dims: Vec<MPoly>,
    b: Vec<Coef>,
    brackets: Vec<([usize; 3], Coef)>,
    boundary: [Boundary; 2],
}

impl ModelData {
    fn bracket(&self, i: usize, k: usize, l: usize) -> Option<&Coef> {
        let mut key = [i, k, l];
        key.sort_unstable();
        self.brackets.iter().find(|(e, _)| *e == key).map(|(_, w)| w)
    }
}

fn table(id: ModelId) -> ModelData {
    use Slot::{Collapse, Group};
    match id {
        ModelId::A => ModelData {
            s: 3,
            dims: vec![MPoly::int(1), p().scale(&rat(2)), q().scale(&rat(2))],
            b: vec![
                Coef::from_poly(p().add(&q()).scale(&rat(8))),
                Coef::from_poly(lin(1, p(), 1).scale(&rat(4))),
                Coef::from_poly(lin(1, q(), 1).scale(&rat(4))),
            ],
            brackets: vec![
                ([1, 2, 2], Coef::from_poly(p().scale(&rat(8)))),
                ([1, 3, 3], Coef::from_poly(q().scale(&rat(8)))),
            ],
            boundary: [
                Boundary {
                    slots: vec![Collapse(Coef::int(1)), Group(0), Collapse(Coef::int(1))],
                    groups: vec!["zeta0_sq"],
                    sphere_dim: lin(1, q(), 2),
                },
                Boundary {
                    slots: vec![Collapse(Coef::int(1)), Collapse(Coef::int(1)), Group(0)],
                    groups: vec!["zeta1_sq"],
                    sphere_dim: lin(1, p(), 2),
                },
            ],
        },
        ModelId::B => {
            let n1 = || lin(-1, n(), 1);
            let np1 = || lin(1, n(), 1);
            let np3 = || lin(3, n(), 1);
            let frac = |num: MPoly, den: Vec<MPoly>| Coef { num, den }.normalized();
            ModelData {
                s: 5,
                dims: vec![
                    MPoly::int(1),
                    MPoly::int(2),
                    MPoly::int(2),
                    n1().scale(&rat(2)),
                    n1().scale(&rat(2)),
                ],
                b: vec![Coef::int(1); 5],
                brackets: vec![
                    ([1, 2, 3], frac(MPoly::int(2), vec![np3()])),
                    ([1, 3, 3], frac(n1().mul(&n1()), vec![np1(), np3()])),
                    ([1, 4, 4], frac(n1(), vec![np1(), np3()])),
                    ([1, 5, 5], frac(n1(), vec![np1(), np3()])),
                    ([2, 4, 5], frac(n1(), vec![np3()])),
                    ([3, 4, 5], frac(n1().scale(&rat(2)), vec![np1(), np3()])),
                ],
                boundary: [
                    Boundary {
                        slots: vec![
                            Collapse(frac(np3(), vec![np1().scale(&rat(2))])),
                            Group(0),
                            Group(0),
                            Collapse(frac(MPoly::int(1), vec![np1().scale(&rat(4))])),
                            Group(0),
                        ],
                        groups: vec!["zeta0_sq"],
                        sphere_dim: lin(-1, n(), 2),
                    },
                    Boundary {
                        slots: vec![
                            Group(0),
                            Collapse(frac(MPoly::int(1), vec![np3()])),
                            Group(0),
                            Group(1),
                            Group(1),
                        ],
                        groups: vec!["zeta1_sq", "xi1_sq"],
                        sphere_dim: MPoly::int(2),
                    },
                ],
            }
        }
        ModelId::C => {
            let n1 = || lin(-1, n(), 1);
            ModelData {
                s: 3,
                dims: vec![MPoly::int(1), n1(), n1()],
                b: vec![Coef::from_poly(n1()).scale(&ratio(1, 2)); 3],
                brackets: vec![([1, 2, 3], Coef::from_poly(n1()).scale(&ratio(1, 4)))],
                boundary: [
                    Boundary {
                        slots: vec![Collapse(Coef::int(1)), Group(0), Group(0)],
                        groups: vec!["zeta0_sq"],
                        sphere_dim: MPoly::int(1),
                    },
                    Boundary {
                        slots: vec![Group(0), Collapse(Coef::ratio(1, 4)), Group(0)],
                        groups: vec!["zeta1_sq"],
                        sphere_dim: n1(),
                    },
                ],
            }
        }
        ModelId::D => ModelData {
            s: 5,
            dims: vec![MPoly::int(1), MPoly::int(4), MPoly::int(4), MPoly::int(4), MPoly::int(4)],
            b: vec![Coef::int(10); 5],
            brackets: vec![
                ([1, 2, 3], Coef::int(4)),
                ([2, 4, 5], Coef::int(4)),
                ([3, 4, 5], Coef::int(4)),
                ([1, 4, 4], Coef::int(1)),
                ([1, 5, 5], Coef::int(1)),
            ],
            boundary: [
                Boundary {
                    slots: vec![
                        Collapse(Coef::int(4)),
                        Group(0),
                        Group(0),
                        Group(0),
                        Collapse(Coef::ratio(1, 2)),
                    ],
                    groups: vec!["zeta0_sq"],
                    sphere_dim: MPoly::int(5),
                },
                Boundary {
                    slots: vec![Group(0), Collapse(Coef::int(1)), Group(0), Group(1), Group(1)],
                    groups: vec!["zeta1_sq", "xi1_sq"],
                    sphere_dim: MPoly::int(4),
                },
            ],
        },
        ModelId::E => ModelData {
            s: 5,
            dims: vec![MPoly::int(1), MPoly::int(8), MPoly::int(8), MPoly::int(6), MPoly::int(6)],
            b: vec![Coef::int(64); 5],
            brackets: vec![
                ([1, 2, 2], Coef::int(8)),
                ([1, 3, 3], Coef::int(8)),
                ([1, 4, 5], Coef::int(24)),
                ([2, 3, 4], Coef::int(48)),
                ([2, 3, 5], Coef::int(48)),
            ],
            boundary: [
                Boundary {
                    slots: vec![
                        Collapse(Coef::int(16)),
                        Collapse(Coef::int(2)),
                        Group(0),
                        Group(0),
                        Group(0),
                    ],
                    groups: vec!["zeta0_sq"],
                    sphere_dim: MPoly::int(9),
                },
                Boundary {
                    // c_4^2 = 4: forced by A_4(x0) = 0 (see models::boundary_data).
                    slots: vec![Group(0), Group(1), Group(1), Collapse(Coef::int(4)), Group(0)],
                    groups: vec!["zeta1_sq", "xi1_sq"],
                    sphere_dim: MPoly::int(6),
                },
            ],
        },
    }
}

// ---------------------------------------------------------------------------
// The construction itself
// ---------------------------------------------------------------------------

/// Term accumulator keyed by the x-monomial exponent vector.
struct TermMap {
    s: usize,
    terms: BTreeMap<Vec<i64>, Coef>,
}

impl TermMap {
    fn new(s: usize) -> Self {
        TermMap {
            s,
            terms: BTreeMap::new(),
        }
    }

    fn push(&mut self, expo: Vec<i64>, coef: &Coef) {
        assert_eq!(expo.len(), self.s);
        let slot = self.terms.entry(expo).or_insert_with(Coef::zero);
        *slot = slot.add(coef);
    }

    fn constant(&self) -> Coef {
        self.terms.get(&vec![0; self.s]).cloned().unwrap_or_else(Coef::zero)
    }

    /// Renders non-constant terms in deterministic order.
    fn render_nonconstant(&self) -> Vec<Expr> {
        self.terms
            .iter()
            .filter(|(k, v)| !k.iter().all(|&e| e == 0) && !v.is_zero())
            .map(|(k, v)| v.times_monomial(k))
            .collect()
    }
}

/// Builds the singular IVP for one endpoint of `id`, symbolic in the model
/// parameters. This is the construction the shipped data files are frozen
/// from.
pub fn derive_ivp(id: ModelId, endpoint: usize) -> SingularIVP {
    let data = table(id);
    let s = data.s;
    let boundary = &data.boundary[endpoint];
    let collapse: Vec<bool> = boundary
        .slots
        .iter()
        .map(|s| matches!(s, Slot::Collapse(_)))
        .collect();
    let sphere = &boundary.sphere_dim;

    let x0: Vec<Expr> = boundary
        .slots
        .iter()
        .map(|slot| match slot {
            Slot::Collapse(c_sq) => c_sq.to_expr(),
            Slot::Group(g) => Expr::param(boundary.groups[*g]),
        })
        .collect();

    let mut a_out = Vec::with_capacity(s);
    let mut b_out = Vec::with_capacity(s);
    let mut c_out = Vec::with_capacity(s);

    for i in 1..=s {
        let ei = collapse[i - 1];
        let di = &data.dims[i - 1];

        let mut a_map = TermMap::new(s);
        let mut c0_map = TermMap::new(s);
        let mut c2_map = TermMap::new(s);
        let zero_key = vec![0i64; s];

        let half_b = data.b[i - 1].scale(&ratio(1, 2));
        if ei {
            a_map.push(zero_key.clone(), &half_b);
            // -(L-1) x_i
            let mut key = zero_key.clone();
            key[i - 1] = 1;
            a_map.push(key, &Coef::from_poly(sphere.sub(&MPoly::int(1))).neg());
        } else {
            c0_map.push(zero_key.clone(), &half_b);
        }

        // Bracket terms, over ordered pairs (k, l).
        for k in 1..=s {
            for l in 1..=s {
                let Some(w) = data.bracket(i, k, l) else {
                    continue;
                };
                let coef = w.div(&Coef::from_poly(di.clone()).scale(&rat(4)));
                let ek = collapse[k - 1];
                let el = collapse[l - 1];

                let mut expo1 = zero_key.clone();
                expo1[i - 1] += 2;
                expo1[k - 1] -= 1;
                expo1[l - 1] -= 1;
                let e1 = (ei as i64) - (ek as i64) - (el as i64);
                push_term(id, endpoint, i, e1, &coef, expo1, &mut a_map, &mut c0_map, &mut c2_map);

                let mut expo2 = zero_key.clone();
                expo2[k - 1] += 1;
                expo2[l - 1] -= 1;
                let e2 = (ek as i64) - (ei as i64) - (el as i64);
                push_term(
                    id,
                    endpoint,
                    i,
                    e2,
                    &coef.scale(&rat(-2)),
                    expo2,
                    &mut a_map,
                    &mut c0_map,
                    &mut c2_map,
                );
            }
        }

        // A_i: merged constant first, then monomial terms.
        if !ei {
            assert!(a_map.constant().is_zero(), "non-collapsing equation acquired an A-constant");
        }
        let mut ai = a_map.constant().to_expr();
        for term in a_map.render_nonconstant() {
            ai = ai.add(term);
        }

        // B_i.
        let y_coef = if ei { di.add(sphere) } else { sphere.clone() };
        let mut bi = Coef::from_poly(y_coef).to_expr().mul(Expr::y(i)).neg();
        if ei {
            let mut mixed = Expr::int(0);
            for k in 1..=s {
                if k != i {
                    mixed = mixed.add(data.dims[k - 1].to_expr().mul(Expr::y(k)).div(Expr::x(k)));
                }
            }
            bi = bi.sub(Expr::x(i).mul(mixed));
        }

        // C_i: y_i^2 term, merged constant, -lambda x_i, mixed y-terms,
        // bracket terms, then the t^2 bracket tail.
        let mut ci = Expr::int(0);
        let ysq = MPoly::int(2).sub(di);
        if !ysq.is_zero() {
            ci = ci.add(ysq.to_expr().mul(Expr::y(i).pow(2)).div(Expr::x(i)));
        }
        ci = ci.add(c0_map.constant().to_expr());
        ci = ci.sub(Expr::param("lambda").mul(Expr::x(i)));
        for k in 1..=s {
            if k != i {
                ci = ci.sub(data.dims[k - 1].to_expr().mul(Expr::y(i)).mul(Expr::y(k)).div(Expr::x(k)));
            }
        }
        for term in c0_map.render_nonconstant() {
            ci = ci.add(term);
        }
        assert!(c2_map.constant().is_zero(), "constant t^2 term cannot arise");
        for term in c2_map.render_nonconstant() {
            ci = ci.add(term.mul(Expr::t().pow(2)));
        }

        a_out.push(ai);
        b_out.push(bi);
        c_out.push(ci);
    }

    SingularIVP {
        model: id,
        endpoint,
        dim: s,
        a: a_out,
        b: b_out,
        c: c_out,
        x0,
        collapse,
    }
}

#[allow(clippy::too_many_arguments)]
fn push_term(
    model: ModelId,
    endpoint: usize,
    i: usize,
    exponent: i64,
    coef: &Coef,
    expo: Vec<i64>,
    a_map: &mut TermMap,
    c0_map: &mut TermMap,
    c2_map: &mut TermMap,
) {
    match exponent {
        -1 => a_map.push(expo, coef),
        0 => c0_map.push(expo, coef),
        1 => c2_map.push(expo, coef),
        _ => panic!(
            "model {model} endpoint {endpoint}: bracket term of t-degree {} in equation {i}; \
             a bracket couples two collapsing summands to a non-collapsing one (model data bug)",
            2 * exponent
        ),
    }
}

/// Renders the `[ivp0]` and `[ivp1]` sections of a model data file from the
/// symbolic construction. Used to freeze the shipped files.
pub fn render_ivp_sections(id: ModelId) -> String {
    let mut out = String::new();
    for endpoint in 0..2 {
        let ivp = derive_ivp(id, endpoint);
        out.push_str(&format!("[ivp{endpoint}]\n"));
        for (prefix, exprs) in [("a", &ivp.a), ("b", &ivp.b), ("c", &ivp.c)] {
            for (i, e) in exprs.iter().enumerate() {
                out.push_str(&format!("{prefix}{} = {e}\n", i + 1));
            }
        }
        for (i, e) in ivp.x0.iter().enumerate() {
            out.push_str(&format!("x0_{} = {e}\n", i + 1));
        }
        if endpoint == 0 {
            out.push('\n');
        }
    }
    out
}
