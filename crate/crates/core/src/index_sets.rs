//! Index sets for polyhomogeneous expansions with exponents linear in the
//! boundary dimension n.
//!
//! An index set is stored as a finite antichain of generators (β, k). A
//! generator stands for every (β + m, j) with m ∈ ℕ₀ and j ≤ k. Whether one
//! generator implies another depends on the value of n, so every reducing
//! operation takes a concrete `n`.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{LabError, Result};

/// Working dimension used when a caller does not pick one.
pub const DEFAULT_N: i64 = 2;

fn r(num: i64, den: i64) -> Rational64 {
    Rational64::new(num, den)
}

/// β = p + q·n with rational p, q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NDegree {
    pub q: Rational64,
    pub p: Rational64,
}

impl NDegree {
    pub fn new(p: Rational64, q: Rational64) -> Self {
        NDegree { q, p }
    }

    pub fn constant(p: Rational64) -> Self {
        NDegree::new(p, Rational64::zero())
    }

    /// Shorthand for (p_num/p_den) + (q_num/q_den)·n.
    pub fn lin(p_num: i64, p_den: i64, q_num: i64, q_den: i64) -> Self {
        NDegree::new(r(p_num, p_den), r(q_num, q_den))
    }

    pub fn half_n() -> Self {
        NDegree::lin(0, 1, 1, 2)
    }

    pub fn eval(&self, n: i64) -> Rational64 {
        self.p + self.q * Rational64::from_integer(n)
    }
}

impl Add for NDegree {
    type Output = NDegree;
    fn add(self, o: NDegree) -> NDegree {
        NDegree::new(self.p + o.p, self.q + o.q)
    }
}

impl Sub for NDegree {
    type Output = NDegree;
    fn sub(self, o: NDegree) -> NDegree {
        NDegree::new(self.p - o.p, self.q - o.q)
    }
}

impl Neg for NDegree {
    type Output = NDegree;
    fn neg(self) -> NDegree {
        NDegree::new(-self.p, -self.q)
    }
}

fn fmt_rational(x: &Rational64) -> String {
    if x.is_integer() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl fmt::Display for NDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        if !self.q.is_zero() {
            let a = self.q.abs();
            if self.q.is_negative() {
                s.push('-');
            }
            if *a.numer() != 1 {
                s.push_str(&a.numer().to_string());
            }
            s.push('n');
            if *a.denom() != 1 {
                s.push('/');
                s.push_str(&a.denom().to_string());
            }
            if !self.p.is_zero() {
                s.push(if self.p.is_positive() { '+' } else { '-' });
                s.push_str(&fmt_rational(&self.p.abs()));
            }
        } else {
            s.push_str(&fmt_rational(&self.p));
        }
        f.write_str(&s)
    }
}

impl FromStr for NDegree {
    type Err = LabError;

    /// Parses sums of terms such as `-n/2+1/2`, `3n/2`, `-1`, `n`.
    fn from_str(src: &str) -> Result<Self> {
        let bad = || LabError::InvalidParameter(format!("cannot parse exponent '{src}'"));
        let cleaned: String = src.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('−', "-");
        if cleaned.is_empty() {
            return Err(bad());
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for ch in cleaned.chars() {
            if (ch == '+' || ch == '-') && !cur.is_empty() {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut out = NDegree::constant(Rational64::zero());
        for t in terms {
            let (neg, body) = match t.strip_prefix('-') {
                Some(b) => (true, b),
                None => (false, t.strip_prefix('+').unwrap_or(&t)),
            };
            let (num_part, den) = match body.split_once('/') {
                Some((a, b)) => (a, b.parse::<i64>().map_err(|_| bad())?),
                None => (body, 1),
            };
            if den == 0 {
                return Err(bad());
            }
            let (coef, is_n) = match num_part.strip_suffix('n') {
                Some("") => (1, true),
                Some(c) => (c.parse::<i64>().map_err(|_| bad())?, true),
                None => (num_part.parse::<i64>().map_err(|_| bad())?, false),
            };
            let mut val = r(coef, den);
            if neg {
                val = -val;
            }
            if is_n {
                out.q += val;
            } else {
                out.p += val;
            }
        }
        Ok(out)
    }
}

/// (β, k) with k the logarithmic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub beta: NDegree,
    pub k: u32,
}

impl Generator {
    pub fn new(beta: NDegree, k: u32) -> Self {
        Generator { beta, k }
    }

    /// Whether `other` lies in the closure of `self` at dimension n.
    pub fn implies(&self, other: &Generator, n: i64) -> bool {
        let d = other.beta.eval(n) - self.beta.eval(n);
        d.is_integer() && !d.is_negative() && other.k <= self.k
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 0 {
            write!(f, "{}", self.beta)
        } else {
            write!(f, "({},{})", self.beta, self.k)
        }
    }
}

impl Serialize for Generator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Generator", 4)?;
        st.serialize_field("beta", &self.beta.to_string())?;
        st.serialize_field("p", &fmt_rational(&self.beta.p))?;
        st.serialize_field("q", &fmt_rational(&self.beta.q))?;
        st.serialize_field("k", &self.k)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexSet {
    gens: Vec<Generator>,
}

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet { gens: Vec::new() }
    }

    /// The shorthand β = {(β + m, 0)}.
    pub fn point(beta: NDegree) -> Self {
        IndexSet { gens: vec![Generator::new(beta, 0)] }
    }

    pub fn constant(p: Rational64) -> Self {
        IndexSet::point(NDegree::constant(p))
    }

    /// The smooth index set 0 = ℕ₀.
    pub fn smooth() -> Self {
        IndexSet::constant(Rational64::zero())
    }

    pub fn from_gens(gens: impl IntoIterator<Item = Generator>, n: i64) -> Self {
        let mut e = IndexSet { gens: gens.into_iter().collect() };
        e.reduce(n);
        e
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    fn reduce(&mut self, n: i64) {
        self.gens.sort();
        self.gens.dedup();
        let all = self.gens.clone();
        self.gens = all
            .iter()
            .enumerate()
            .filter(|(i, g)| {
                !all.iter().enumerate().any(|(j, h)| {
                    // among mutually implying generators (equal at n) keep the first
                    j != *i && h.implies(g, n) && (!g.implies(h, n) || j < *i)
                })
            })
            .map(|(_, g)| *g)
            .collect();
    }

    pub fn member(&self, beta: NDegree, k: i64, n: i64) -> Result<bool> {
        if k < 0 {
            return Err(LabError::InvalidParameter(format!("log order must be non-negative, got {k}")));
        }
        let q = Generator::new(beta, k as u32);
        Ok(self.gens.iter().any(|g| g.implies(&q, n)))
    }

    /// Closure containment self ⊆ other at dimension n.
    pub fn is_subset(&self, other: &IndexSet, n: i64) -> bool {
        self.gens.iter().all(|g| other.gens.iter().any(|h| h.implies(g, n)))
    }

    pub fn closure_eq(&self, other: &IndexSet, n: i64) -> bool {
        self.is_subset(other, n) && other.is_subset(self, n)
    }

    pub fn shift(&self, by: NDegree) -> IndexSet {
        IndexSet {
            gens: self.gens.iter().map(|g| Generator::new(g.beta + by, g.k)).collect(),
        }
    }

    pub fn sum(&self, other: &IndexSet, n: i64) -> IndexSet {
        let gens = self
            .gens
            .iter()
            .flat_map(|a| other.gens.iter().map(move |b| Generator::new(a.beta + b.beta, a.k + b.k)));
        IndexSet::from_gens(gens, n)
    }

    /// E₁ ∪ E₂ together with (β, j₁+j₂+1) for every β common to both.
    pub fn ext_union(&self, other: &IndexSet, n: i64) -> IndexSet {
        let mut gens: Vec<Generator> = self.gens.iter().chain(other.gens.iter()).copied().collect();
        for a in &self.gens {
            for b in &other.gens {
                let d = a.beta.eval(n) - b.beta.eval(n);
                if d.is_integer() {
                    let top = if d.is_negative() { b.beta } else { a.beta };
                    gens.push(Generator::new(top, a.k + b.k + 1));
                }
            }
        }
        IndexSet::from_gens(gens, n)
    }

    /// E ≥ q: every exponent is at least q, with no logarithm at q itself.
    pub fn geq(&self, q: Rational64, n: i64) -> bool {
        self.gens.iter().all(|g| {
            let b = g.beta.eval(n);
            b > q || (b == q && g.k == 0)
        })
    }

    pub fn is_integral(&self, n: i64) -> bool {
        self.gens.iter().all(|g| g.beta.eval(n).is_integer())
    }

    /// Replace a raw rule result by a sharper set known from outside the
    /// combinatorics. The sharper set must be contained in the raw one.
    pub fn refine(&self, sharper: IndexSet, n: i64) -> Result<IndexSet> {
        if sharper.is_subset(self, n) {
            let mut s = sharper;
            s.reduce(n);
            Ok(s)
        } else {
            Err(LabError::InvalidParameter(format!(
                "refinement {sharper} is not contained in {self}"
            )))
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gens.is_empty() {
            return f.write_str("∅");
        }
        let parts: Vec<String> = self.gens.iter().map(|g| g.to_string()).collect();
        f.write_str(&parts.join(" ∪ "))
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.gens.len()))?;
        for g in &self.gens {
            seq.serialize_element(g)?;
        }
        seq.end()
    }
}

impl FromStr for IndexSet {
    type Err = LabError;

    /// Parses the printed notation, e.g. `-n/2 ∪ (n/2-1,1)` or `∅`.
    fn from_str(src: &str) -> Result<Self> {
        let t = src.trim();
        if t == "∅" || t.is_empty() {
            return Ok(IndexSet::empty());
        }
        let mut gens = Vec::new();
        for part in t.split('∪') {
            let part = part.trim();
            let g = if let Some(inner) = part.strip_prefix('(').and_then(|p| p.strip_suffix(')')) {
                let (b, k) = inner
                    .rsplit_once(',')
                    .ok_or_else(|| LabError::InvalidParameter(format!("bad generator '{part}'")))?;
                let k: u32 = k
                    .trim()
                    .parse()
                    .map_err(|_| LabError::InvalidParameter(format!("bad log order in '{part}'")))?;
                Generator::new(b.parse()?, k)
            } else {
                Generator::new(part.parse()?, 0)
            };
            gens.push(g);
        }
        gens.sort();
        gens.dedup();
        Ok(IndexSet { gens })
    }
}

/// Face labels on the blown-up double spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    Ff,
    Lb,
    Rb,
}

impl FromStr for Face {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ff" => Ok(Face::Ff),
            "lb" => Ok(Face::Lb),
            "rb" => Ok(Face::Rb),
            other => Err(LabError::UnknownFace(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Kernel convention to b-half-density convention.
    To,
    /// b-half-density convention back to the kernel convention.
    From,
}

/// Exponent of the lifted half-density |dv ⊗ dv|^½ at each face.
pub fn halfdensity_weight(face: Face) -> NDegree {
    match face {
        Face::Ff => NDegree::lin(1, 1, 1, 2),
        Face::Lb | Face::Rb => NDegree::lin(1, 2, 0, 1),
    }
}

pub fn halfdensity_shift(e: &IndexSet, face: Face, dir: Direction) -> IndexSet {
    let w = halfdensity_weight(face);
    match dir {
        Direction::To => e.shift(w),
        Direction::From => e.shift(-w),
    }
}

/// String-labelled variant of [`halfdensity_shift`].
pub fn halfdensity_shift_named(e: &IndexSet, face: &str, dir: Direction) -> Result<IndexSet> {
    Ok(halfdensity_shift(e, face.parse()?, dir))
}

/// A∘B with A a boundary operator and B: interior → boundary.
/// Returns (H_ff, H_rb).
pub fn compose_boundary(e_ff: &IndexSet, f_ff: &IndexSet, f_rb: &IndexSet, n: i64) -> (IndexSet, IndexSet) {
    let h = NDegree::half_n();
    let h_ff = e_ff.sum(f_ff, n).shift(h).ext_union(&f_rb.shift(h), n);
    let h_rb = f_rb.ext_union(&f_ff.shift(h), n);
    (reduced(h_ff, n), reduced(h_rb, n))
}

/// C∘B with B: interior → boundary and C: boundary → interior.
/// Returns (I_ff, I_lb, I_rb).
pub fn compose_interior(
    f_ff: &IndexSet,
    f_rb: &IndexSet,
    g_ff: &IndexSet,
    g_lb: &IndexSet,
    n: i64,
) -> (IndexSet, IndexSet, IndexSet) {
    let h = NDegree::half_n();
    let i_ff = f_ff
        .sum(g_ff, n)
        .shift(h)
        .ext_union(&f_rb.sum(g_lb, n).shift(h), n);
    let i_lb = g_lb.ext_union(&g_ff.shift(h), n);
    let i_rb = f_rb.ext_union(&f_ff.shift(h), n);
    (reduced(i_ff, n), reduced(i_lb, n), reduced(i_rb, n))
}

fn reduced(mut e: IndexSet, n: i64) -> IndexSet {
    e.reduce(n);
    e
}

/// The index-set chain behind the Bergman projector kernel, at dimension n.
#[derive(Debug, Clone, Serialize)]
pub struct BergmanChain {
    pub n: i64,
    pub h_ff: IndexSet,
    pub h_rb_raw: IndexSet,
    pub h_rb: IndexSet,
    pub j_ff: IndexSet,
    pub j_lb_raw: IndexSet,
    pub j_rb_raw: IndexSet,
    pub j_lb: IndexSet,
    pub j_rb: IndexSet,
    pub kernel_ff: IndexSet,
    pub kernel_lb: IndexSet,
    pub kernel_rb: IndexSet,
}

/// Runs the composition rules on the inputs of the Bergman kernel argument:
/// A = (K*K)⁻¹(Id + D²)⁻¹ on the boundary, B = (Id + D²)K*, then P = K∘(A∘B).
/// The boundary-face sets are refined to ½, which the raw rules cannot see.
pub fn bergman_chain(n: i64) -> Result<BergmanChain> {
    let half = IndexSet::constant(r(1, 2));
    let e_ff = IndexSet::from_gens(
        [
            Generator::new(NDegree::lin(1, 1, -1, 2), 0),
            Generator::new(NDegree::half_n(), 1),
        ],
        n,
    );
    let f_ff = IndexSet::point(NDegree::lin(-3, 2, -1, 2));
    let f_rb = half.clone();
    let (h_ff, h_rb_raw) = compose_boundary(&e_ff, &f_ff, &f_rb, n);
    let h_rb = h_rb_raw.refine(half.clone(), n)?;

    let k_ff = IndexSet::point(NDegree::lin(1, 2, -1, 2));
    let k_lb = half.clone();
    let (j_ff, j_lb_raw, j_rb_raw) = compose_interior(&h_ff, &h_rb, &k_ff, &k_lb, n);
    let j_lb = j_lb_raw.refine(half.clone(), n)?;
    let j_rb = j_rb_raw.refine(half, n)?;

    Ok(BergmanChain {
        n,
        kernel_ff: halfdensity_shift(&j_ff, Face::Ff, Direction::From),
        kernel_lb: halfdensity_shift(&j_lb, Face::Lb, Direction::From),
        kernel_rb: halfdensity_shift(&j_rb, Face::Rb, Direction::From),
        h_ff,
        h_rb_raw,
        h_rb,
        j_ff,
        j_lb_raw,
        j_rb_raw,
        j_lb,
        j_rb,
    })
}
