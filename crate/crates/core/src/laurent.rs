//! Sparse multivariate Laurent polynomials with integer coefficients.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose ordering is
//! degree-lexicographic in variable-id order. Variable ids are handed out by a
//! [`VarTable`] in insertion order, so iteration order is the canonical order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VarId = u32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LaurentError {
    #[error("division by zero")]
    DivideByZero,
    #[error("not divisible, remainder {remainder}")]
    NotDivisible { remainder: Box<LaurentPoly> },
    #[error("value is not invertible")]
    NotInvertible,
    #[error("negative exponent survives in {monomial}")]
    NegativeExponent { monomial: String },
    #[error("operands come from different variable tables")]
    TableMismatch,
    #[error("no value supplied for variable {0}")]
    Unbound(String),
    #[error("exponent overflow")]
    ExponentOverflow,
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

static NEXT_TABLE: AtomicU32 = AtomicU32::new(1);

/// Ordered set of variable names. Ids are assigned in insertion order.
#[derive(Debug, Clone)]
pub struct VarTable {
    id: u32,
    names: Vec<String>,
    index: HashMap<String, VarId>,
}

impl Default for VarTable {
    fn default() -> Self {
        Self::new()
    }
}

impl VarTable {
    pub fn new() -> Self {
        VarTable {
            id: NEXT_TABLE.fetch_add(1, AtomicOrdering::Relaxed),
            names: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Tag carried by every polynomial built from this table.
    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn intern(&mut self, name: &str) -> VarId {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = self.names.len() as VarId;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), v);
        v
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// The polynomial consisting of the single variable `v`.
    pub fn var(&self, v: VarId) -> LaurentPoly {
        assert!((v as usize) < self.names.len(), "variable id out of range");
        LaurentPoly::from_term(self.id, Monomial::var(v, 1), BigInt::one())
    }

    /// Interns `name` and returns it as a polynomial.
    pub fn var_named(&mut self, name: &str) -> LaurentPoly {
        let v = self.intern(name);
        self.var(v)
    }
}

/// A Laurent monomial: sparse exponent vector sorted by variable id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    degree: i64,
    exps: Vec<(VarId, i32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(v: VarId, e: i32) -> Self {
        if e == 0 {
            return Monomial::one();
        }
        Monomial {
            degree: e as i64,
            exps: vec![(v, e)],
        }
    }

    /// Builds a monomial from arbitrary (variable, exponent) pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, i32)>) -> Self {
        let mut acc: BTreeMap<VarId, i32> = BTreeMap::new();
        for (v, e) in pairs {
            let slot = acc.entry(v).or_insert(0);
            *slot = slot.checked_add(e).expect("exponent overflow");
        }
        let exps: Vec<_> = acc.into_iter().filter(|&(_, e)| e != 0).collect();
        let degree = exps.iter().map(|&(_, e)| e as i64).sum();
        Monomial { degree, exps }
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn exponents(&self) -> &[(VarId, i32)] {
        &self.exps
    }

    pub fn exponent(&self, v: VarId) -> i32 {
        match self.exps.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(pos) => self.exps[pos].1,
            Err(_) => 0,
        }
    }

    fn combine(&self, other: &Monomial, sign: i32) -> Monomial {
        let mut exps = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() || j < other.exps.len() {
            let a = self.exps.get(i);
            let b = other.exps.get(j);
            match (a, b) {
                (Some(&(va, ea)), Some(&(vb, eb))) if va == vb => {
                    let e = ea
                        .checked_add(sign.checked_mul(eb).expect("exponent overflow"))
                        .expect("exponent overflow");
                    if e != 0 {
                        exps.push((va, e));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(&(va, ea)), Some(&(vb, _))) if va < vb => {
                    exps.push((va, ea));
                    i += 1;
                }
                (Some(&(va, ea)), None) => {
                    exps.push((va, ea));
                    i += 1;
                }
                (_, Some(&(vb, eb))) => {
                    exps.push((vb, sign * eb));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        let degree = exps.iter().map(|&(_, e)| e as i64).sum();
        Monomial { degree, exps }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        self.combine(other, 1)
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.combine(other, -1)
    }

    pub fn inverse(&self) -> Monomial {
        Monomial {
            degree: -self.degree,
            exps: self.exps.iter().map(|&(v, e)| (v, -e)).collect(),
        }
    }

    pub fn pow(&self, n: i32) -> Monomial {
        if n == 0 {
            return Monomial::one();
        }
        let exps: Vec<_> = self
            .exps
            .iter()
            .map(|&(v, e)| (v, e.checked_mul(n).expect("exponent overflow")))
            .collect();
        let degree = exps.iter().map(|&(_, e)| e as i64).sum();
        Monomial { degree, exps }
    }

    /// True when every exponent is non-negative.
    pub fn is_polynomial(&self) -> bool {
        self.exps.iter().all(|&(_, e)| e >= 0)
    }

    fn render(&self, out: &mut String, name: &dyn Fn(VarId) -> String) {
        for &(v, e) in &self.exps {
            out.push('·');
            out.push_str(&name(v));
            out.push('^');
            out.push_str(&e.to_string());
        }
    }
}

impl Ord for Monomial {
    /// Degree first, then lexicographic with variable 0 as the most significant.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree.cmp(&other.degree) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            let a = self.exps.get(i);
            let b = other.exps.get(j);
            match (a, b) {
                (None, None) => return Ordering::Equal,
                (Some(&(va, ea)), Some(&(vb, eb))) if va == vb => {
                    if ea != eb {
                        return ea.cmp(&eb);
                    }
                    i += 1;
                    j += 1;
                }
                (Some(&(va, ea)), Some(&(vb, _))) if va < vb => return ea.cmp(&0),
                (Some(&(_, ea)), None) => return ea.cmp(&0),
                (_, Some(&(_, eb))) => return 0.cmp(&eb),
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse Laurent polynomial over the integers.
///
/// `table` is the id of the [`VarTable`] the variables come from, or 0 for
/// constants, which combine with polynomials from any table.
#[derive(Debug, Clone, Default)]
pub struct LaurentPoly {
    table: u32,
    terms: BTreeMap<Monomial, BigInt>,
}

impl PartialEq for LaurentPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for LaurentPoly {}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn one() -> Self {
        LaurentPoly::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        LaurentPoly::from_term(0, Monomial::one(), BigInt::from(c))
    }

    pub fn from_bigint(c: BigInt) -> Self {
        LaurentPoly::from_term(0, Monomial::one(), c)
    }

    /// A single term `c * m`, tagged with `table`'s id.
    pub fn term(table: &VarTable, m: Monomial, c: BigInt) -> Self {
        LaurentPoly::from_term(table.id(), m, c)
    }

    fn from_term(table: u32, m: Monomial, c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        let table = if m.is_one() { 0 } else { table };
        if !c.is_zero() {
            terms.insert(m, c);
        }
        LaurentPoly { table, terms }
    }

    fn from_map(table: u32, terms: BTreeMap<Monomial, BigInt>) -> Self {
        let table = if terms.keys().all(|m| m.is_one()) { 0 } else { table };
        LaurentPoly { table, terms }
    }

    pub fn table_id(&self) -> u32 {
        self.table
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(m, c)| m.is_one() && c.is_one())
                .unwrap_or(false)
    }

    /// The constant value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending degree-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Every variable that occurs with a nonzero exponent.
    pub fn variables(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            out.extend(m.exps.iter().map(|&(v, _)| v));
        }
        out
    }

    /// True when all coefficients are positive (the zero polynomial is not).
    pub fn is_positive(&self) -> bool {
        !self.terms.is_empty() && self.terms.values().all(|c| c.is_positive())
    }

    /// `Some((c, m))` when the polynomial is `c * m` with `c = ±1`.
    pub fn as_unit(&self) -> Option<(BigInt, &Monomial)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        (c.abs().is_one()).then(|| (c.clone(), m))
    }

    pub fn is_unit(&self) -> bool {
        self.as_unit().is_some()
    }

    fn join(&self, other: &Self) -> Result<u32, LaurentError> {
        match (self.table, other.table) {
            (0, t) | (t, 0) => Ok(t),
            (a, b) if a == b => Ok(a),
            _ => Err(LaurentError::TableMismatch),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, LaurentError> {
        let table = self.join(other)?;
        let (mut big, small) = if self.terms.len() >= other.terms.len() {
            (self.terms.clone(), &other.terms)
        } else {
            (other.terms.clone(), &self.terms)
        };
        for (m, c) in small {
            add_term(&mut big, m.clone(), c.clone());
        }
        Ok(LaurentPoly::from_map(table, big))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, LaurentError> {
        self.try_add(&other.neg_ref())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, LaurentError> {
        let table = self.join(other)?;
        let mut out = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                add_term(&mut out, ma.mul(mb), ca * cb);
            }
        }
        Ok(LaurentPoly::from_map(table, out))
    }

    fn neg_ref(&self) -> Self {
        LaurentPoly {
            table: self.table,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    /// Multiplies every term by `c * m`.
    pub fn scale(&self, c: &BigInt, m: &Monomial) -> Self {
        if c.is_zero() {
            return LaurentPoly::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(k, v)| (k.mul(m), v * c))
            .collect();
        LaurentPoly::from_map(self.table, terms)
    }

    /// Inverse of a unit `±m`.
    pub fn inverse(&self) -> Result<Self, LaurentError> {
        if self.is_zero() {
            return Err(LaurentError::DivideByZero);
        }
        let (c, m) = self.as_unit().ok_or(LaurentError::NotInvertible)?;
        Ok(LaurentPoly::from_term(self.table, m.inverse(), c))
    }

    /// Integer power; negative powers require a unit.
    pub fn pow(&self, n: i32) -> Result<Self, LaurentError> {
        if n < 0 {
            return self.inverse()?.pow(-n);
        }
        if let Some((c, m)) = self.as_unit() {
            let c = if n % 2 == 1 { c } else { BigInt::one() };
            return Ok(LaurentPoly::from_term(self.table, m.pow(n), c));
        }
        let mut acc = LaurentPoly::one();
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.try_mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Per-variable minimum exponent over all terms (absent counts as 0).
    fn content_monomial(&self) -> Monomial {
        // A variable missing from some term has minimum exponent at most 0.
        let mut min: BTreeMap<VarId, (i32, usize)> = BTreeMap::new();
        for m in self.terms.keys() {
            for &(v, e) in &m.exps {
                let slot = min.entry(v).or_insert((e, 0));
                slot.0 = slot.0.min(e);
                slot.1 += 1;
            }
        }
        let n = self.terms.len();
        Monomial::from_pairs(
            min.into_iter()
                .map(|(v, (e, seen))| (v, if seen < n { e.min(0) } else { e })),
        )
    }

    /// Exact division in the Laurent ring.
    ///
    /// Both operands are shifted by their monomial content to become ordinary
    /// polynomials without monomial factors, then divided by repeated
    /// leading-term cancellation. A leading term that the divisor's leading
    /// term does not divide proves the quotient is not a Laurent polynomial.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self, LaurentError> {
        let table = self.join(divisor)?;
        if divisor.is_zero() {
            return Err(LaurentError::DivideByZero);
        }
        if self.is_zero() {
            return Ok(LaurentPoly::zero());
        }
        if let Some((c, m)) = divisor.as_unit() {
            let mut out = self.scale(&c, &m.inverse());
            out.table = table;
            return Ok(LaurentPoly::from_map(table, out.terms));
        }
        let dshift = divisor.content_monomial();
        let pshift = self.content_monomial();
        let inv_d = dshift.inverse();
        let inv_p = pshift.inverse();
        let dn: Vec<(Monomial, BigInt)> = divisor
            .terms
            .iter()
            .map(|(m, c)| (m.mul(&inv_d), c.clone()))
            .collect();
        let mut rem: BTreeMap<Monomial, BigInt> = self
            .terms
            .iter()
            .map(|(m, c)| (m.mul(&inv_p), c.clone()))
            .collect();
        let (lead_m, lead_c) = dn.last().cloned().unwrap();
        let mut quot: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        while let Some((m, c)) = rem.iter().next_back() {
            let qm = m.div(&lead_m);
            let (qc, r) = c.div_rem(&lead_c);
            if !qm.is_polynomial() || !r.is_zero() {
                let remainder: BTreeMap<_, _> = rem
                    .into_iter()
                    .map(|(m, c)| (m.mul(&pshift), c))
                    .collect();
                return Err(LaurentError::NotDivisible {
                    remainder: Box::new(LaurentPoly::from_map(table, remainder)),
                });
            }
            for (dm, dc) in &dn {
                add_term(&mut rem, dm.mul(&qm), -(dc * &qc));
            }
            quot.insert(qm, qc);
        }
        let shift = pshift.div(&dshift);
        let terms = quot.into_iter().map(|(m, c)| (m.mul(&shift), c)).collect();
        Ok(LaurentPoly::from_map(table, terms))
    }

    /// Replaces variables by polynomials; unmapped variables stay.
    /// A variable with a negative exponent needs a unit image.
    pub fn substitute(&self, images: &HashMap<VarId, LaurentPoly>) -> Result<Self, LaurentError> {
        let mut out = LaurentPoly::zero();
        let mut powers: HashMap<(VarId, i32), LaurentPoly> = HashMap::new();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut acc = LaurentPoly::from_bigint(c.clone());
            for &(v, e) in &m.exps {
                match images.get(&v) {
                    Some(img) => {
                        let p = match powers.get(&(v, e)) {
                            Some(p) => p.clone(),
                            None => {
                                let p = img.pow(e)?;
                                powers.insert((v, e), p.clone());
                                p
                            }
                        };
                        acc = acc.try_mul(&p)?;
                    }
                    None => kept.push((v, e)),
                }
            }
            if !kept.is_empty() {
                let mono = Monomial::from_pairs(kept);
                acc = acc.scale(&BigInt::one(), &mono);
                if acc.table == 0 {
                    acc.table = self.table;
                }
            }
            out = out.try_add(&acc)?;
        }
        Ok(out)
    }

    /// Evaluates at rational values; every variable must be bound.
    pub fn evaluate(&self, values: &HashMap<VarId, BigRational>) -> Result<BigRational, LaurentError> {
        let mut sum = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for &(v, e) in &m.exps {
                let x = values
                    .get(&v)
                    .ok_or_else(|| LaurentError::Unbound(format!("x{v}")))?;
                if e < 0 && x.is_zero() {
                    return Err(LaurentError::NotInvertible);
                }
                t *= num_traits::pow::Pow::pow(x, e);
            }
            sum += t;
        }
        Ok(sum)
    }

    /// Sets each listed variable to zero. Terms with a positive power vanish;
    /// a surviving negative power is an error.
    pub fn subst_zero(&self, vars: &BTreeSet<VarId>) -> Result<Self, LaurentError> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut dead = false;
            for &(v, e) in &m.exps {
                if vars.contains(&v) {
                    if e < 0 {
                        return Err(LaurentError::NegativeExponent {
                            monomial: format!("{}", LaurentPoly::from_term(self.table, m.clone(), c.clone())),
                        });
                    }
                    dead = true;
                }
            }
            if !dead {
                terms.insert(m.clone(), c.clone());
            }
        }
        Ok(LaurentPoly::from_map(self.table, terms))
    }

    /// The minimum exponent of `v` over all terms (0 for the zero polynomial).
    pub fn min_exponent(&self, v: VarId) -> i32 {
        self.terms.keys().map(|m| m.exponent(v)).min().unwrap_or(0)
    }

    fn render(&self, name: &dyn Fn(VarId) -> String) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                out.push(' ');
            }
            if c.is_positive() {
                out.push('+');
            }
            out.push_str(&c.to_string());
            m.render(&mut out, name);
        }
        out
    }

    /// Canonical text: terms in ascending degree-lex order, explicit-sign
    /// coefficients, factors `name^e` joined by `·`.
    pub fn canonical_text(&self, table: &VarTable) -> String {
        self.render(&|v| table.name(v).to_string())
    }

    /// Parses the canonical text form, interning unknown names.
    pub fn parse_canonical(text: &str, table: &mut VarTable) -> Result<Self, LaurentError> {
        let text = text.trim();
        if text == "0" {
            return Ok(LaurentPoly::zero());
        }
        let mut terms = BTreeMap::new();
        for token in split_terms(text) {
            let token = token.as_str();
            let mut parts = token.split('·');
            let coeff = parts.next().unwrap_or("");
            if !(coeff.starts_with('+') || coeff.starts_with('-')) {
                return Err(LaurentError::Parse(format!("missing sign in {token}")));
            }
            let c: BigInt = coeff
                .trim_start_matches('+')
                .parse()
                .map_err(|_| LaurentError::Parse(format!("bad coefficient {coeff}")))?;
            let mut pairs = Vec::new();
            for factor in parts {
                let (name, e) = factor
                    .rsplit_once('^')
                    .ok_or_else(|| LaurentError::Parse(format!("bad factor {factor}")))?;
                let e: i32 = e
                    .parse()
                    .map_err(|_| LaurentError::Parse(format!("bad exponent in {factor}")))?;
                pairs.push((table.intern(name), e));
            }
            add_term(&mut terms, Monomial::from_pairs(pairs), c);
        }
        Ok(LaurentPoly::from_map(table.id(), terms))
    }

    pub fn to_structured(&self, table: &VarTable) -> StructuredPoly {
        StructuredPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| StructuredTerm {
                    coefficient: c.to_string(),
                    exponents: m
                        .exps
                        .iter()
                        .map(|&(v, e)| (table.name(v).to_string(), e))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_structured(s: &StructuredPoly, table: &mut VarTable) -> Result<Self, LaurentError> {
        let mut terms = BTreeMap::new();
        for t in &s.terms {
            let c: BigInt = t
                .coefficient
                .parse()
                .map_err(|_| LaurentError::Parse(format!("bad coefficient {}", t.coefficient)))?;
            let pairs: Vec<_> = t
                .exponents
                .iter()
                .map(|(n, e)| (table.intern(n), *e))
                .collect();
            add_term(&mut terms, Monomial::from_pairs(pairs), c);
        }
        Ok(LaurentPoly::from_map(table.id(), terms))
    }
}

/// Splits canonical text into terms. A sign opens a new term when it follows
/// a digit, so the separating spaces are optional.
fn split_terms(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut prev: Option<char> = None;
    for ch in text.chars() {
        if ch.is_whitespace() {
            continue;
        }
        if (ch == '+' || ch == '-') && prev.map_or(false, |p| p.is_ascii_digit()) {
            out.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
        prev = Some(ch);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn add_term(map: &mut BTreeMap<Monomial, BigInt>, m: Monomial, c: BigInt) {
    if c.is_zero() {
        return;
    }
    match map.entry(m) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

/// Serializable form: a list of coefficient and exponent-map pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredPoly {
    pub terms: Vec<StructuredTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredTerm {
    pub coefficient: String,
    pub exponents: BTreeMap<String, i32>,
}

impl fmt::Display for LaurentPoly {
    /// Canonical form with placeholder names `x<id>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|v| format!("x{v}")))
    }
}

impl From<i64> for LaurentPoly {
    fn from(c: i64) -> Self {
        LaurentPoly::constant(c)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&LaurentPoly> for &LaurentPoly {
            type Output = LaurentPoly;
            fn $method(self, rhs: &LaurentPoly) -> LaurentPoly {
                self.$try(rhs).expect("operands come from different variable tables")
            }
        }
        impl $trait<LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $method(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $method(self, rhs: &LaurentPoly) -> LaurentPoly {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.neg_ref()
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (VarTable, LaurentPoly, LaurentPoly, LaurentPoly) {
        let mut t = VarTable::new();
        let x = t.var_named("x");
        let y = t.var_named("y");
        let z = t.var_named("z");
        (t, x, y, z)
    }

    #[test]
    fn canonical_text_example() {
        let mut t = VarTable::new();
        let a = t.var_named("t[1,1]");
        let b = t.var_named("t[1,2]");
        let p = &(&a * &b.inverse().unwrap()) + &LaurentPoly::one();
        assert_eq!(p.canonical_text(&t), "+1 +1·t[1,1]^1·t[1,2]^-1");
        assert_eq!(LaurentPoly::zero().canonical_text(&t), "0");
    }

    #[test]
    fn parse_round_trip() {
        let (mut t, x, y, z) = setup();
        let p = &(&(&x * &y) - &(&z.pow(-2).unwrap() * &LaurentPoly::constant(7))) + &y.pow(3).unwrap();
        let s = p.canonical_text(&t);
        let q = LaurentPoly::parse_canonical(&s, &mut t).unwrap();
        assert_eq!(p, q);
        let st = p.to_structured(&t);
        let json = serde_json::to_string(&st).unwrap();
        let back: StructuredPoly = serde_json::from_str(&json).unwrap();
        assert_eq!(LaurentPoly::from_structured(&back, &mut t).unwrap(), p);
    }

    #[test]
    fn exact_division() {
        let (_t, x, y, z) = setup();
        let a = &(&x * &y) + &z;
        let b = &x.pow(-1).unwrap() - &(&y * &z);
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a).unwrap(), b);
        assert_eq!(prod.div_exact(&b).unwrap(), a);
        let err = (&x + &LaurentPoly::one()).div_exact(&(&x + &y)).unwrap_err();
        assert!(matches!(err, LaurentError::NotDivisible { .. }));
        assert_eq!(x.div_exact(&LaurentPoly::zero()), Err(LaurentError::DivideByZero));
    }

    #[test]
    fn non_integral_coefficient_is_not_divisible() {
        let (_t, x, _y, _z) = setup();
        let two_x = &x * &LaurentPoly::constant(2);
        let num = &x + &LaurentPoly::one();
        assert!(num.div_exact(&(&two_x + &LaurentPoly::constant(2))).is_err());
    }

    #[test]
    fn inverse_requires_unit() {
        let (_t, x, y, _z) = setup();
        assert_eq!((&x + &y).inverse(), Err(LaurentError::NotInvertible));
        let u = -(&x * &y.pow(-3).unwrap());
        assert!((&u * &u.inverse().unwrap()).is_one());
    }

    #[test]
    fn subst_zero_rules() {
        let (t, x, y, _z) = setup();
        let vx: BTreeSet<_> = [t.lookup("x").unwrap()].into();
        let p = &(&x * &y) + &y;
        assert_eq!(p.subst_zero(&vx).unwrap(), y);
        let q = &x.pow(-1).unwrap() + &y;
        assert!(matches!(q.subst_zero(&vx), Err(LaurentError::NegativeExponent { .. })));
    }

    #[test]
    fn substitution_and_evaluation() {
        let (t, x, y, _z) = setup();
        let vx = t.lookup("x").unwrap();
        let vy = t.lookup("y").unwrap();
        let p = &(&x * &x) + &y.pow(-1).unwrap();
        let mut m = HashMap::new();
        m.insert(vx, &y + &LaurentPoly::one());
        let s = p.substitute(&m).unwrap();
        assert_eq!(s, &(&(&(&y * &y) + &(&y * &LaurentPoly::constant(2))) + &LaurentPoly::one()) + &y.pow(-1).unwrap());
        let mut bad = HashMap::new();
        bad.insert(vy, &x + &LaurentPoly::one());
        assert_eq!(p.substitute(&bad), Err(LaurentError::NotInvertible));
        let mut vals = HashMap::new();
        vals.insert(vx, BigRational::new(1.into(), 2.into()));
        vals.insert(vy, BigRational::new(3.into(), 1.into()));
        assert_eq!(p.evaluate(&vals).unwrap(), BigRational::new(7.into(), 12.into()));
    }

    #[test]
    fn mismatched_tables() {
        let mut t1 = VarTable::new();
        let mut t2 = VarTable::new();
        let a = t1.var_named("a");
        let b = t2.var_named("a");
        assert_eq!(a.try_add(&b), Err(LaurentError::TableMismatch));
        assert!(a.try_add(&LaurentPoly::one()).is_ok());
    }
}
