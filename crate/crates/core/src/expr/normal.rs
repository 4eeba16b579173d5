//! Canonical forms.
//!
//! A [`Poly`] is a finite sum of rational multiples of monomials. A monomial
//! is a product of atom powers (symbols, `ln(..)` of a polynomial, unknown
//! functions) with at most one `exp(..)` factor and at most one `sin`/`cos`
//! factor. Products of trigonometric factors are rewritten with the
//! product-to-sum identities and arguments are sign-normalised
//! (`cos(-a) = cos(a)`, `sin(-a) = -sin(a)`), so two polynomials are equal as
//! functions iff they are structurally equal.
//!
//! Expressions with denominators are brought to a [`Cleared`] form
//! `numerator / Π factor^k`; a quotient vanishes iff its numerator does.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Expr, Func, Node, UnknownFn};
use crate::error::{Error, Result};
use crate::rational;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Sym(String),
    Ln(Poly),
    Unknown(UnknownFn),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trig {
    Sin,
    Cos,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub powers: BTreeMap<Atom, u32>,
    pub exp: Poly,
    pub trig: Option<(Trig, Poly)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    pub terms: BTreeMap<Mono, BigRational>,
}

impl Atom {
    pub fn to_expr(&self) -> Expr {
        match self {
            Atom::Sym(s) => Expr::sym(s.clone()),
            Atom::Ln(p) => p.to_expr().ln(),
            Atom::Unknown(u) => Expr::unknown_fn(u.clone()),
        }
    }

    fn mentions(&self, name: &str) -> bool {
        match self {
            Atom::Sym(s) => s == name,
            Atom::Ln(p) => p.mentions(name),
            Atom::Unknown(u) => u.args.iter().any(|a| a == name),
        }
    }
}

impl Mono {
    pub fn one() -> Mono {
        Mono::default()
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty() && self.exp.is_zero() && self.trig.is_none()
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.powers.keys().any(|a| a.mentions(name))
            || self.exp.mentions(name)
            || self.trig.as_ref().is_some_and(|(_, a)| a.mentions(name))
    }

    /// Total degree in the given plain symbols.
    pub fn degree_in(&self, names: &[String]) -> u32 {
        self.powers
            .iter()
            .filter(|(a, _)| matches!(a, Atom::Sym(s) if names.contains(s)))
            .map(|(_, p)| *p)
            .sum()
    }

    pub fn power_of(&self, name: &str) -> u32 {
        self.powers.get(&Atom::Sym(name.to_string())).copied().unwrap_or(0)
    }

    pub fn to_expr(&self) -> Expr {
        let mut factors: Vec<Expr> = self.powers.iter().map(|(a, p)| a.to_expr().powi(*p as i64)).collect();
        if !self.exp.is_zero() {
            factors.push(self.exp.to_expr().exp());
        }
        if let Some((kind, arg)) = &self.trig {
            let a = arg.to_expr();
            factors.push(match kind {
                Trig::Sin => a.sin(),
                Trig::Cos => a.cos(),
            });
        }
        Expr::mul_all(factors)
    }

    fn mul_plain(&self, other: &Mono) -> Mono {
        let mut powers = self.powers.clone();
        for (a, p) in &other.powers {
            *powers.entry(a.clone()).or_insert(0) += p;
        }
        Mono {
            powers,
            exp: self.exp.add(&other.exp),
            trig: None,
        }
    }
}

/// `sin`/`cos` of `arg` in canonical sign; `None` when the factor vanishes.
fn canonical_trig(kind: Trig, arg: Poly) -> Option<(BigRational, Option<(Trig, Poly)>)> {
    if arg.is_zero() {
        return match kind {
            Trig::Cos => Some((BigRational::one(), None)),
            Trig::Sin => None,
        };
    }
    if arg.leading_coefficient().is_negative() {
        let arg = arg.neg();
        return Some(match kind {
            Trig::Cos => (BigRational::one(), Some((Trig::Cos, arg))),
            Trig::Sin => (-BigRational::one(), Some((Trig::Sin, arg))),
        });
    }
    Some((BigRational::one(), Some((kind, arg))))
}

fn mono_product(a: &Mono, b: &Mono) -> Vec<(Mono, BigRational)> {
    let base = a.mul_plain(b);
    let half = rational::frac(1, 2);
    let pieces: Vec<(BigRational, Trig, Poly)> = match (&a.trig, &b.trig) {
        (None, None) => return vec![(base, BigRational::one())],
        (Some((k, p)), None) | (None, Some((k, p))) => {
            let mut m = base;
            m.trig = Some((*k, p.clone()));
            return vec![(m, BigRational::one())];
        }
        (Some((ka, pa)), Some((kb, pb))) => {
            let diff = pa.add(&pb.neg());
            let sum = pa.add(pb);
            match (ka, kb) {
                (Trig::Cos, Trig::Cos) => vec![(half.clone(), Trig::Cos, diff), (half, Trig::Cos, sum)],
                (Trig::Sin, Trig::Sin) => vec![(half.clone(), Trig::Cos, diff), (-half, Trig::Cos, sum)],
                (Trig::Sin, Trig::Cos) => vec![(half.clone(), Trig::Sin, sum), (half, Trig::Sin, diff)],
                (Trig::Cos, Trig::Sin) => vec![(half.clone(), Trig::Sin, sum), (-half, Trig::Sin, diff)],
            }
        }
    };
    let mut out = Vec::new();
    for (c, kind, arg) in pieces {
        if let Some((sign, trig)) = canonical_trig(kind, arg) {
            let mut m = base.clone();
            m.trig = trig;
            out.push((m, c * sign));
        }
    }
    out
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(r: BigRational) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Mono::one(), r);
        p
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    pub fn atom(a: Atom) -> Poly {
        let mut m = Mono::one();
        m.powers.insert(a, 1);
        Poly::mono(m)
    }

    pub fn mono(m: Mono) -> Poly {
        let mut p = Poly::zero();
        p.add_term(m, BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn leading_coefficient(&self) -> BigRational {
        self.terms.values().next().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.terms.keys().any(|m| m.mentions(name))
    }

    fn add_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Poly {
        if r.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                for (m, c) in mono_product(ma, mb) {
                    out.add_term(m, c * ca * cb);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    pub fn to_expr(&self) -> Expr {
        Expr::add_all(self.terms.iter().map(|(m, c)| Expr::num(c.clone()) * m.to_expr()))
    }

    /// True when no exponential, trigonometric or logarithmic factor depends
    /// on any of `vars`.
    pub fn is_polynomial_in(&self, vars: &[String]) -> bool {
        self.terms.keys().all(|m| {
            let free = |p: &Poly| !vars.iter().any(|v| p.mentions(v));
            free(&m.exp)
                && m.trig.as_ref().is_none_or(|(_, a)| free(a))
                && m.powers.keys().all(|a| matches!(a, Atom::Sym(_)) || !vars.iter().any(|v| a.mentions(v)))
        })
    }

    /// Splits every term into a factor free of the `spatial` symbols and a
    /// factor depending only on them. Fails when a transcendental argument
    /// mixes both.
    pub fn split_spatial(&self, spatial: &[String]) -> Result<BTreeMap<Mono, Poly>> {
        let is_spatial = |m: &Mono| spatial.iter().any(|x| m.mentions(x));
        let only_spatial = |p: &Poly| p.to_expr().symbols().iter().all(|s| spatial.contains(s));
        let mut out: BTreeMap<Mono, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut tm = Mono::one();
            let mut sm = Mono::one();
            for (a, p) in &m.powers {
                let spatial_atom = spatial.iter().any(|x| a.mentions(x));
                if spatial_atom {
                    if let Atom::Ln(arg) = a {
                        if !only_spatial(arg) {
                            return Err(Error::Unsupported(format!("mixed ln argument in `{}`", m.to_expr())));
                        }
                    }
                    sm.powers.insert(a.clone(), *p);
                } else {
                    tm.powers.insert(a.clone(), *p);
                }
            }
            for (em, ec) in &m.exp.terms {
                let target = if is_spatial(em) { &mut sm.exp } else { &mut tm.exp };
                target.add_term(em.clone(), ec.clone());
            }
            if let Some((kind, arg)) = &m.trig {
                let hits = arg.terms.keys().filter(|k| is_spatial(k)).count();
                if hits == 0 {
                    tm.trig = Some((*kind, arg.clone()));
                } else if only_spatial(arg) {
                    sm.trig = Some((*kind, arg.clone()));
                } else {
                    return Err(Error::Unsupported(format!("mixed trigonometric argument in `{}`", m.to_expr())));
                }
            }
            out.entry(tm.clone()).or_default().add_term(sm, c.clone());
            if out[&tm].is_zero() {
                out.remove(&tm);
            }
        }
        Ok(out)
    }

    /// Collects the coefficients of a polynomial that is affine in the
    /// `unknowns` (symbol name → column), one row per distinct remaining
    /// monomial.
    pub fn collect_linear(&self, unknowns: &BTreeMap<String, usize>) -> Result<Vec<LinearRow>> {
        let mut rows: BTreeMap<Mono, LinearRow> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let mut column = None;
            for (a, p) in &m.powers {
                if let Atom::Sym(s) = a {
                    if let Some(&col) = unknowns.get(s) {
                        if *p != 1 || column.is_some() {
                            return Err(Error::Unsupported(format!("nonlinear in unknowns: `{}`", m.to_expr())));
                        }
                        column = Some(col);
                        rest.powers.remove(a);
                    }
                }
            }
            if unknowns.keys().any(|u| rest.mentions(u)) {
                return Err(Error::Unsupported(format!("unknown inside a function argument: `{}`", m.to_expr())));
            }
            let row = rows.entry(rest).or_default();
            match column {
                Some(col) => {
                    let e = row.coefficients.entry(col).or_insert_with(BigRational::zero);
                    *e += c;
                    if e.is_zero() {
                        row.coefficients.remove(&col);
                    }
                }
                None => row.constant += c,
            }
        }
        Ok(rows
            .into_values()
            .filter(|r| !r.coefficients.is_empty() || !r.constant.is_zero())
            .collect())
    }
}

/// `Σ coefficients[j]·u_j + constant = 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearRow {
    pub coefficients: BTreeMap<usize, BigRational>,
    pub constant: BigRational,
}

/// Canonical polynomial form of an expression without denominators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalForm(pub Poly);

impl NormalForm {
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn poly(&self) -> &Poly {
        &self.0
    }

    pub fn to_expr(&self) -> Expr {
        self.0.to_expr()
    }

    pub fn term_count(&self) -> usize {
        self.0.terms.len()
    }
}

/// `numerator / Π denominator[f]^k` with canonical (leading-coefficient-one)
/// denominator factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cleared {
    pub numerator: Poly,
    pub denominator: BTreeMap<Poly, u32>,
}

impl Cleared {
    fn poly(p: Poly) -> Cleared {
        Cleared {
            numerator: p,
            denominator: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// The cleared denominator as an expression (`1` when there is none).
    pub fn denominator_expr(&self) -> Expr {
        Expr::mul_all(self.denominator.iter().map(|(f, k)| f.to_expr().powi(*k as i64)))
    }

    fn expand_factors(factors: &BTreeMap<Poly, u32>) -> Poly {
        factors.iter().fold(Poly::one(), |acc, (f, k)| acc.mul(&f.pow(*k)))
    }

    fn add(&self, other: &Cleared) -> Cleared {
        let mut den = self.denominator.clone();
        for (f, k) in &other.denominator {
            let e = den.entry(f.clone()).or_insert(0);
            *e = (*e).max(*k);
        }
        let lift = |c: &Cleared| {
            let missing: BTreeMap<Poly, u32> = den
                .iter()
                .filter_map(|(f, k)| {
                    let have = c.denominator.get(f).copied().unwrap_or(0);
                    (k > &have).then(|| (f.clone(), k - have))
                })
                .collect();
            c.numerator.mul(&Cleared::expand_factors(&missing))
        };
        let numerator = lift(self).add(&lift(other));
        Cleared {
            numerator,
            denominator: den,
        }
        .reduced()
    }

    fn mul(&self, other: &Cleared) -> Cleared {
        let mut den = self.denominator.clone();
        for (f, k) in &other.denominator {
            *den.entry(f.clone()).or_insert(0) += k;
        }
        Cleared {
            numerator: self.numerator.mul(&other.numerator),
            denominator: den,
        }
        .reduced()
    }

    fn neg(&self) -> Cleared {
        Cleared {
            numerator: self.numerator.neg(),
            denominator: self.denominator.clone(),
        }
    }

    fn invert(&self) -> std::result::Result<Cleared, String> {
        if self.numerator.is_zero() {
            return Err("division by zero".into());
        }
        let mut numerator = Cleared::expand_factors(&self.denominator);
        let mut denominator = BTreeMap::new();
        if self.numerator.terms.len() == 1 {
            let (m, c) = self.numerator.terms.iter().next().unwrap();
            numerator = numerator.scale(&c.recip());
            for (a, p) in &m.powers {
                *denominator.entry(Poly::atom(a.clone())).or_insert(0) += p;
            }
            if !m.exp.is_zero() {
                let mut inv = Mono::one();
                inv.exp = m.exp.neg();
                numerator = numerator.mul(&Poly::mono(inv));
            }
            if let Some(trig) = &m.trig {
                let mut tm = Mono::one();
                tm.trig = Some(trig.clone());
                *denominator.entry(Poly::mono(tm)).or_insert(0) += 1;
            }
        } else {
            let lc = self.numerator.leading_coefficient();
            numerator = numerator.scale(&lc.recip());
            denominator.insert(self.numerator.scale(&lc.recip()), 1);
        }
        Ok(Cleared {
            numerator,
            denominator,
        }
        .reduced())
    }

    fn pow(&self, k: i64) -> std::result::Result<Cleared, String> {
        let base = if k < 0 { self.invert()? } else { self.clone() };
        let n = k.unsigned_abs() as u32;
        Ok(Cleared {
            numerator: base.numerator.pow(n),
            denominator: base.denominator.iter().map(|(f, e)| (f.clone(), e * n)).collect(),
        }
        .reduced())
    }

    /// Cancels single-atom denominator factors against the numerator.
    fn reduced(mut self) -> Cleared {
        if self.numerator.is_zero() {
            self.denominator.clear();
            return self;
        }
        let keys: Vec<Poly> = self.denominator.keys().cloned().collect();
        for f in keys {
            let atom = match single_atom(&f) {
                Some(a) => a,
                None => continue,
            };
            let k = self.denominator[&f];
            let common = self
                .numerator
                .terms
                .keys()
                .map(|m| m.powers.get(&atom).copied().unwrap_or(0))
                .min()
                .unwrap_or(0)
                .min(k);
            if common == 0 {
                continue;
            }
            self.numerator = Poly {
                terms: self
                    .numerator
                    .terms
                    .iter()
                    .map(|(m, c)| {
                        let mut m = m.clone();
                        let p = m.powers.get_mut(&atom).unwrap();
                        *p -= common;
                        if *p == 0 {
                            m.powers.remove(&atom);
                        }
                        (m, c.clone())
                    })
                    .collect(),
            };
            if k == common {
                self.denominator.remove(&f);
            } else {
                self.denominator.insert(f, k - common);
            }
        }
        self
    }

    /// Rebuilds an expression; single-atom denominators become negative powers.
    pub fn to_expr(&self) -> Expr {
        let mut laurent: BTreeMap<Atom, u32> = BTreeMap::new();
        let mut other = Vec::new();
        for (f, k) in &self.denominator {
            match single_atom(f) {
                Some(a) => {
                    laurent.insert(a, *k);
                }
                None => other.push(f.to_expr().powi(-(*k as i64))),
            }
        }
        let sum = Expr::add_all(self.numerator.terms.iter().map(|(m, c)| {
            let mut factors = vec![Expr::num(c.clone())];
            let mut seen = Vec::new();
            for (a, p) in &m.powers {
                let d = laurent.get(a).copied().unwrap_or(0);
                seen.push(a.clone());
                factors.push(a.to_expr().powi(*p as i64 - d as i64));
            }
            for (a, d) in &laurent {
                if !seen.contains(a) {
                    factors.push(a.to_expr().powi(-(*d as i64)));
                }
            }
            let mut rest = m.clone();
            rest.powers.clear();
            factors.push(rest.to_expr());
            Expr::mul_all(factors)
        }));
        Expr::mul_all(std::iter::once(sum).chain(other))
    }

    /// Drops the additive constant, when the form is a Laurent polynomial.
    pub fn without_constant(&self) -> Cleared {
        let mut out = self.clone();
        if self.denominator.keys().any(|f| single_atom(f).is_none()) {
            return out;
        }
        let den: BTreeMap<Atom, u32> = self
            .denominator
            .iter()
            .map(|(f, k)| (single_atom(f).unwrap(), *k))
            .collect();
        let constant_mono = Mono {
            powers: den,
            exp: Poly::zero(),
            trig: None,
        };
        out.numerator.terms.remove(&constant_mono);
        out.reduced()
    }
}

fn single_atom(f: &Poly) -> Option<Atom> {
    if f.terms.len() != 1 {
        return None;
    }
    let (m, c) = f.terms.iter().next().unwrap();
    if !c.is_one() || !m.exp.is_zero() || m.trig.is_some() || m.powers.len() != 1 {
        return None;
    }
    let (a, p) = m.powers.iter().next().unwrap();
    (*p == 1).then(|| a.clone())
}

fn cleared(e: &Expr) -> std::result::Result<Cleared, String> {
    Ok(match e.node() {
        Node::Num(r) => Cleared::poly(Poly::constant(r.clone())),
        Node::Sym(s) => Cleared::poly(Poly::atom(Atom::Sym(s.clone()))),
        Node::Unknown(u) => Cleared::poly(Poly::atom(Atom::Unknown(u.clone()))),
        Node::Add(items) => {
            let mut acc = Cleared::poly(Poly::zero());
            for item in items {
                acc = acc.add(&cleared(item)?);
            }
            acc
        }
        Node::Mul(items) => {
            let mut acc = Cleared::poly(Poly::one());
            for item in items {
                acc = acc.mul(&cleared(item)?);
                if acc.is_zero() {
                    break;
                }
            }
            acc
        }
        Node::Neg(inner) => cleared(inner)?.neg(),
        Node::Pow(base, k) => match rational::to_i64(k) {
            Some(n) => cleared(base)?.pow(n)?,
            None => return Err(format!("rational power in `{e}`")),
        },
        Node::Func(func, arg) => {
            let a = cleared(arg)?;
            if !a.denominator.is_empty() {
                return Err(format!("function of a quotient in `{e}`"));
            }
            let p = a.numerator;
            let poly = match func {
                Func::Exp => {
                    let mut m = Mono::one();
                    m.exp = p;
                    Poly::mono(m)
                }
                Func::Sin | Func::Cos => {
                    let kind = if *func == Func::Sin { Trig::Sin } else { Trig::Cos };
                    match canonical_trig(kind, p) {
                        None => Poly::zero(),
                        Some((sign, trig)) => {
                            let mut m = Mono::one();
                            m.trig = trig;
                            Poly::mono(m).scale(&sign)
                        }
                    }
                }
                Func::Ln => {
                    if p.as_constant().is_some_and(|c| c.is_one()) {
                        Poly::zero()
                    } else if let Some(arg) = pure_exponential(&p) {
                        arg
                    } else {
                        Poly::atom(Atom::Ln(p))
                    }
                }
            };
            Cleared::poly(poly)
        }
    })
}

fn pure_exponential(p: &Poly) -> Option<Poly> {
    if p.terms.len() != 1 {
        return None;
    }
    let (m, c) = p.terms.iter().next().unwrap();
    (c.is_one() && m.powers.is_empty() && m.trig.is_none()).then(|| m.exp.clone())
}

/// Brings `e` to `numerator / denominator` form.
pub fn clear_denominators(e: &Expr) -> Result<Cleared> {
    cleared(e).map_err(Error::NonNormalizable)
}

/// Canonical normal form; expressions that still carry a denominator after
/// cancellation are reported as non-normalizable.
pub fn normalize(e: &Expr) -> Result<NormalForm> {
    let c = clear_denominators(e)?;
    if c.denominator.is_empty() {
        Ok(NormalForm(c.numerator))
    } else {
        Err(Error::NonNormalizable(format!(
            "`{e}` has denominator `{}`",
            c.denominator_expr()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Context;
    use crate::expr::parse;

    fn nf(src: &str) -> Result<NormalForm> {
        normalize(&parse(src, &Context::simple(&["x", "y"])).unwrap())
    }

    #[test]
    fn pythagorean_identity_collapses() {
        assert_eq!(nf("sin(t)^2 + cos(t)^2").unwrap(), nf("1").unwrap());
        assert!(nf("sin(t)^2 + cos(t)^2 - 1").unwrap().is_zero());
    }

    #[test]
    fn commutativity_and_expansion() {
        assert!(nf("x*xdot - xdot*x").unwrap().is_zero());
        assert_eq!(nf("(x + 1)^2").unwrap(), nf("x^2 + 2*x + 1").unwrap());
        assert_eq!(nf("exp(t)*exp(-t)").unwrap(), nf("1").unwrap());
        assert_eq!(nf("sin(-2*t)").unwrap(), nf("-sin(2*t)").unwrap());
        assert_eq!(nf("cos(-x)").unwrap(), nf("cos(x)").unwrap());
        assert_eq!(nf("2*sin(t)*cos(t)").unwrap(), nf("sin(2*t)").unwrap());
        assert_eq!(nf("ln(exp(2*t))").unwrap(), nf("2*t").unwrap());
        assert!(nf("x*x^(-1) - 1").unwrap().is_zero());
    }

    #[test]
    fn quotients_are_not_normal_forms() {
        assert!(matches!(nf("1/(x^2 + y^2)"), Err(Error::NonNormalizable(_))));
        assert!(matches!(nf("x^(1/2)"), Err(Error::NonNormalizable(_))));
        let e = parse("x/(x^2+y^2) - x^3/(x^2+y^2)^2 - x*y^2/(x^2+y^2)^2", &Context::simple(&["x", "y"])).unwrap();
        assert!(clear_denominators(&e).unwrap().is_zero());
    }

    #[test]
    fn laurent_denominators_are_cleared() {
        let e = parse("x^(-2)*t + 1/t", &Context::simple(&["x"])).unwrap();
        let c = clear_denominators(&e).unwrap();
        assert_eq!(c.denominator.len(), 2);
        let back = c.to_expr();
        assert!(clear_denominators(&(back - e)).unwrap().is_zero());
    }

    #[test]
    fn drops_constant_of_laurent_form() {
        let e = parse("-x^2/(2*t^2) + 1/2", &Context::simple(&["x"])).unwrap();
        let c = clear_denominators(&e).unwrap().without_constant();
        let expected = parse("-x^2/(2*t^2)", &Context::simple(&["x"])).unwrap();
        assert!(clear_denominators(&(c.to_expr() - expected)).unwrap().is_zero());
    }

    #[test]
    fn linear_collection() {
        let ctx = Context::simple(&["x"]);
        let mut b = BTreeMap::new();
        b.insert("x".to_string(), Expr::sym("x"));
        let e = parse("x*t + 2*t - 3*x*t", &ctx).unwrap();
        let p = normalize(&e).unwrap();
        let mut unknowns = BTreeMap::new();
        unknowns.insert("x".to_string(), 0usize);
        let rows = p.poly().collect_linear(&unknowns).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].coefficients[&0], rational::int(-2));
        assert_eq!(rows[0].constant, rational::int(2));
        let e = parse("x^2", &ctx).unwrap();
        assert!(normalize(&e).unwrap().poly().collect_linear(&unknowns).is_err());
    }
}
