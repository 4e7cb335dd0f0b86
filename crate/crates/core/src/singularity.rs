//! Exact polynomial algebra for the `Z_4`-equivariant singularity of `F4`:
//! invariants and equivariants, the cleared tangent-space generators, the
//! matrix `Q` and the codimension count.
//!
//! Everything here works over `BigRational` with `k = 1`; the scalar `k`
//! does not change ranks or spans.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Exact rational `num/den`.
pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SingularityError {
    #[error("vector field is not Z_4-equivariant")]
    NotEquivariant,
    #[error("matrix germ does not commute with the quarter turn")]
    NotEquivariantGerm,
    #[error("polynomial is not Z_4-invariant")]
    NotInvariant,
    #[error("not in module span (degree {degree})")]
    NotInSpan { degree: u32 },
    #[error("input has degree {found} above the requested maximum {max}")]
    DegreeTooHigh { found: u32, max: u32 },
    #[error("row {row} not in E^5: surviving term {term}")]
    RowNotInE5 { row: String, term: String },
}

// ---------------------------------------------------------------- Poly2

/// Sparse polynomial in `x, y` keyed by exponent pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: Rational, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term((i, j), c);
        p
    }

    pub fn x() -> Self {
        Self::monomial(Rational::one(), 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(Rational::one(), 0, 1)
    }

    /// Builds from `(coefficient, x-exponent, y-exponent)` triples.
    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, u32, u32)>) -> Self {
        let mut p = Self::zero();
        for (c, i, j) in terms {
            p.add_term((i, j), c);
        }
        p
    }

    fn add_term(&mut self, key: (u32, u32), c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.terms.iter()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    /// Total degrees of the nonzero homogeneous parts.
    pub fn degrees(&self) -> BTreeSet<u32> {
        self.terms.keys().map(|(i, j)| i + j).collect()
    }

    pub fn homogeneous_part(&self, d: u32) -> Poly2 {
        Poly2 {
            terms: self.terms.iter().filter(|((i, j), _)| i + j == d).map(|(k, c)| (*k, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly2 {
        if c.is_zero() {
            return Poly2::zero();
        }
        Poly2 { terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly2 {
        (0..e).fold(Poly2::constant(Rational::one()), |acc, _| &acc * self)
    }

    pub fn dx(&self) -> Poly2 {
        Poly2::from_terms(
            self.terms.iter().filter(|((i, _), _)| *i > 0).map(|((i, j), c)| (c * int(i64::from(*i)), i - 1, *j)),
        )
    }

    pub fn dy(&self) -> Poly2 {
        Poly2::from_terms(
            self.terms.iter().filter(|((_, j), _)| *j > 0).map(|((i, j), c)| (c * int(i64::from(*j)), *i, j - 1)),
        )
    }

    /// `p(-y, x)`.
    pub fn quarter_turn(&self) -> Poly2 {
        Poly2::from_terms(self.terms.iter().map(|((i, j), c)| {
            let c = if i % 2 == 1 { -c.clone() } else { c.clone() };
            (c, *j, *i)
        }))
    }

    pub fn is_invariant(&self) -> bool {
        self.quarter_turn() == *self
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, ((i, j), c)| {
            acc + c * num_traits::pow(x.clone(), *i as usize) * num_traits::pow(y.clone(), *j as usize)
        })
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|((i, j), c)| c.to_f64().unwrap_or(f64::NAN) * x.powi(*i as i32) * y.powi(*j as i32))
            .sum()
    }
}

impl Add<&Poly2> for &Poly2 {
    type Output = Poly2;
    fn add(self, o: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Sub<&Poly2> for &Poly2 {
    type Output = Poly2;
    fn sub(self, o: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(*k, -c.clone());
        }
        out
    }
}

impl Mul<&Poly2> for &Poly2 {
    type Output = Poly2;
    fn mul(self, o: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &o.terms {
                out.add_term((i1 + i2, j1 + j2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(&int(-1))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly2> for Poly2 {
            type Output = Poly2;
            fn $m(self, o: Poly2) -> Poly2 {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for Poly2 {
    /// Graded lexicographic order, highest degree first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by_key(|&(i, j)| std::cmp::Reverse((i + j, i)));
        for (n, (i, j)) in keys.into_iter().enumerate() {
            let c = &self.terms[&(i, j)];
            let sign = if c.is_negative() { "-" } else { "+" };
            if n == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            let mut parts = Vec::new();
            if !a.is_one() || (i == 0 && j == 0) {
                parts.push(a.to_string());
            }
            for (var, e) in [("x", i), ("y", j)] {
                match e {
                    0 => {}
                    1 => parts.push(var.to_string()),
                    _ => parts.push(format!("{var}^{e}")),
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- invariants

/// `N = x² + y²`, `A = x⁴ + y⁴ - 6x²y²`, `B = (x² - y²)xy`.
pub fn make_invariants() -> (Poly2, Poly2, Poly2) {
    let n = Poly2::from_terms([(int(1), 2, 0), (int(1), 0, 2)]);
    let a = Poly2::from_terms([(int(1), 4, 0), (int(1), 0, 4), (int(-6), 2, 2)]);
    let b = Poly2::from_terms([(int(1), 3, 1), (int(-1), 1, 3)]);
    (n, a, b)
}

/// Checks `N⁴ = A² + 16B²` exactly.
pub fn verify_invariant_relation() -> bool {
    let (n, a, b) = make_invariants();
    (&(&n.pow(4) - &a.pow(2)) - &b.pow(2).scale(&int(16))).is_zero()
}

/// A monomial `N^n A^a B^b` in the invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct InvMonomial {
    pub n: u32,
    pub a: u32,
    pub b: u32,
}

impl InvMonomial {
    pub const ONE: InvMonomial = InvMonomial { n: 0, a: 0, b: 0 };
    pub const N: InvMonomial = InvMonomial { n: 1, a: 0, b: 0 };
    pub const A: InvMonomial = InvMonomial { n: 0, a: 1, b: 0 };
    pub const B: InvMonomial = InvMonomial { n: 0, a: 0, b: 1 };

    pub const fn new(n: u32, a: u32, b: u32) -> Self {
        Self { n, a, b }
    }

    pub fn degree(self) -> u32 {
        2 * self.n + 4 * self.a + 4 * self.b
    }

    pub fn times(self, o: InvMonomial) -> InvMonomial {
        InvMonomial::new(self.n + o.n, self.a + o.a, self.b + o.b)
    }

    pub fn poly(self) -> Poly2 {
        let (n, a, b) = make_invariants();
        &(&n.pow(self.n) * &a.pow(self.a)) * &b.pow(self.b)
    }

    /// All monomials of total degree `d`.
    pub fn of_degree(d: u32) -> Vec<InvMonomial> {
        let mut out = Vec::new();
        if d % 2 == 1 {
            return out;
        }
        for n in 0..=d / 2 {
            for a in 0..=d / 4 {
                for b in 0..=d / 4 {
                    let m = InvMonomial::new(n, a, b);
                    if m.degree() == d {
                        out.push(m);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for InvMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (name, e) in [("N", self.n), ("A", self.a), ("B", self.b)] {
            match e {
                0 => {}
                1 => parts.push(name.to_string()),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

// ---------------------------------------------------------------- equivariants

/// A polynomial vector field `(u, v)` commuting with the quarter turn.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EqVectorField {
    u: Poly2,
    v: Poly2,
}

/// Exact test of `f(-y, x) = (-v, u)`.
pub fn check_equivariance(u: &Poly2, v: &Poly2) -> bool {
    u.quarter_turn() == -v && v.quarter_turn() == *u
}

impl EqVectorField {
    pub fn new(u: Poly2, v: Poly2) -> Result<Self, SingularityError> {
        if check_equivariance(&u, &v) {
            Ok(Self { u, v })
        } else {
            Err(SingularityError::NotEquivariant)
        }
    }

    pub(crate) fn from_parts(u: Poly2, v: Poly2) -> Self {
        debug_assert!(check_equivariance(&u, &v));
        Self { u, v }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn u(&self) -> &Poly2 {
        &self.u
    }

    pub fn v(&self) -> &Poly2 {
        &self.v
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn degrees(&self) -> BTreeSet<u32> {
        self.u.degrees().union(&self.v.degrees()).copied().collect()
    }

    pub fn homogeneous_part(&self, d: u32) -> EqVectorField {
        Self::from_parts(self.u.homogeneous_part(d), self.v.homogeneous_part(d))
    }

    pub fn scale(&self, c: &Rational) -> EqVectorField {
        Self::from_parts(self.u.scale(c), self.v.scale(c))
    }

    /// Product with an invariant polynomial.
    pub fn mul_invariant(&self, p: &Poly2) -> Result<EqVectorField, SingularityError> {
        if !p.is_invariant() {
            return Err(SingularityError::NotInvariant);
        }
        Ok(Self::from_parts(p * &self.u, p * &self.v))
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> (f64, f64) {
        (self.u.eval_f64(x, y), self.v.eval_f64(x, y))
    }
}

impl Add<&EqVectorField> for &EqVectorField {
    type Output = EqVectorField;
    fn add(self, o: &EqVectorField) -> EqVectorField {
        EqVectorField::from_parts(&self.u + &o.u, &self.v + &o.v)
    }
}

impl Sub<&EqVectorField> for &EqVectorField {
    type Output = EqVectorField;
    fn sub(self, o: &EqVectorField) -> EqVectorField {
        EqVectorField::from_parts(&self.u - &o.u, &self.v - &o.v)
    }
}

impl fmt::Display for EqVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// The module generators `X1..X4` over the invariant ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    X1,
    X2,
    X3,
    X4,
}

impl Generator {
    pub const ALL: [Generator; 4] = [Generator::X1, Generator::X2, Generator::X3, Generator::X4];

    pub fn degree(self) -> u32 {
        match self {
            Generator::X1 | Generator::X2 => 1,
            Generator::X3 | Generator::X4 => 3,
        }
    }

    /// `X1 = (x, y)`, `X2 = (-y, x)`, `X3 = (x(x²-3y²), y(y²-3x²))`,
    /// `X4 = (-y(y²-3x²), x(x²-3y²))`.
    pub fn field(self) -> EqVectorField {
        let x = Poly2::x();
        let y = Poly2::y();
        let p = Poly2::from_terms([(int(1), 3, 0), (int(-3), 1, 2)]);
        let q = Poly2::from_terms([(int(1), 0, 3), (int(-3), 2, 1)]);
        match self {
            Generator::X1 => EqVectorField::from_parts(x, y),
            Generator::X2 => EqVectorField::from_parts(-&y, x),
            Generator::X3 => EqVectorField::from_parts(p, q),
            Generator::X4 => EqVectorField::from_parts(-&q, p),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Generator::X1 => "X1",
            Generator::X2 => "X2",
            Generator::X3 => "X3",
            Generator::X4 => "X4",
        };
        f.write_str(s)
    }
}

pub fn make_equivariants() -> [EqVectorField; 4] {
    Generator::ALL.map(Generator::field)
}

// ---------------------------------------------------------------- matrix germs

/// A 2×2 polynomial matrix with `S(Rx)R = RS(x)` for the quarter turn `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixGerm {
    m: [[Poly2; 2]; 2],
}

impl MatrixGerm {
    pub fn new(m: [[Poly2; 2]; 2]) -> Result<Self, SingularityError> {
        let g = Self { m };
        if g.is_equivariant() {
            Ok(g)
        } else {
            Err(SingularityError::NotEquivariantGerm)
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly2 {
        &self.m[i][j]
    }

    fn is_equivariant(&self) -> bool {
        // S(Rx)·R has columns (S12, -S11), (S22, -S21) evaluated at Rx;
        // R·S(x) = [[-S21, -S22], [S11, S12]]
        let t: [[Poly2; 2]; 2] = [
            [self.m[0][0].quarter_turn(), self.m[0][1].quarter_turn()],
            [self.m[1][0].quarter_turn(), self.m[1][1].quarter_turn()],
        ];
        t[0][1] == -&self.m[1][0]
            && -&t[0][0] == -&self.m[1][1]
            && t[1][1] == self.m[0][0]
            && -&t[1][0] == self.m[0][1]
    }

    /// `J·S` with `J = [[0, 1], [-1, 0]]`.
    pub fn quarter_left(&self) -> MatrixGerm {
        MatrixGerm {
            m: [
                [self.m[1][0].clone(), self.m[1][1].clone()],
                [-&self.m[0][0], -&self.m[0][1]],
            ],
        }
    }

    /// Matrix-vector product with plain components.
    pub fn apply_parts(&self, u: &Poly2, v: &Poly2) -> (Poly2, Poly2) {
        (&self.m[0][0] * u + &self.m[0][1] * v, &self.m[1][0] * u + &self.m[1][1] * v)
    }

    pub fn apply(&self, f: &EqVectorField) -> EqVectorField {
        let (u, v) = self.apply_parts(&f.u, &f.v);
        EqVectorField::from_parts(u, v)
    }
}

/// `S1 = I`, `S2 = [[x², xy], [xy, y²]]`, `S3 = [[-x², xy], [xy, -y²]]`,
/// `S4 = [[0, x³y], [xy³, 0]]` and `T_j = J·S_j`.
pub fn make_matrix_germs() -> ([MatrixGerm; 4], [MatrixGerm; 4]) {
    let m = |c: i64, i: u32, j: u32| Poly2::monomial(int(c), i, j);
    let z = Poly2::zero;
    let s = [
        [[m(1, 0, 0), z()], [z(), m(1, 0, 0)]],
        [[m(1, 2, 0), m(1, 1, 1)], [m(1, 1, 1), m(1, 0, 2)]],
        [[m(-1, 2, 0), m(1, 1, 1)], [m(1, 1, 1), m(-1, 0, 2)]],
        [[z(), m(1, 3, 1)], [m(1, 1, 3), z()]],
    ]
    .map(|e| MatrixGerm::new(e).expect("germ commutes with R"));
    let t = s.clone().map(|g| g.quarter_left());
    (s, t)
}

// ---------------------------------------------------------------- tangent generators

/// `P = (-y³, x³)`, the numerator of `F4/k`.
pub fn szlenk_numerator() -> EqVectorField {
    EqVectorField::from_parts(Poly2::monomial(int(-1), 0, 3), Poly2::monomial(int(1), 3, 0))
}

/// Which tangent-space generator a cleared field comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TangentSource {
    /// `(dF)X_i`
    Derivative(Generator),
    /// `S_j F`, `j` in `1..=4`
    S(u8),
    /// `T_j F`, `j` in `1..=4`
    T(u8),
}

impl fmt::Display for TangentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TangentSource::Derivative(g) => write!(f, "dF({g})"),
            TangentSource::S(j) => write!(f, "S{j}F"),
            TangentSource::T(j) => write!(f, "T{j}F"),
        }
    }
}

/// The twelve tangent generators with the denominators cleared:
/// `dP·(1+N)·X_i - P·(dN·X_i)`, `S_j·P` and `T_j·P`.
pub fn cleared_tangent_generators() -> Vec<(TangentSource, EqVectorField)> {
    let p = szlenk_numerator();
    let (n, _, _) = make_invariants();
    let one_plus_n = &Poly2::constant(int(1)) + &n;
    let (dnx, dny) = (n.dx(), n.dy());
    let mut out = Vec::with_capacity(12);
    for g in Generator::ALL {
        let x = g.field();
        // dP·X = (∂_x P)·u + (∂_y P)·v componentwise
        let dpx_u = &p.u.dx() * &x.u + &p.u.dy() * &x.v;
        let dpx_v = &p.v.dx() * &x.u + &p.v.dy() * &x.v;
        let dn_x = &dnx * &x.u + &dny * &x.v;
        let u = &(&one_plus_n * &dpx_u) - &(&p.u * &dn_x);
        let v = &(&one_plus_n * &dpx_v) - &(&p.v * &dn_x);
        out.push((TangentSource::Derivative(g), EqVectorField::from_parts(u, v)));
    }
    let (s, t) = make_matrix_germs();
    for (j, germ) in s.iter().enumerate() {
        out.push((TangentSource::S(j as u8 + 1), germ.apply(&p)));
    }
    for (j, germ) in t.iter().enumerate() {
        out.push((TangentSource::T(j as u8 + 1), germ.apply(&p)));
    }
    out
}

// ---------------------------------------------------------------- module coordinates

/// Coefficients over products `m·X_i` of invariant monomials and generators.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModuleCoords {
    terms: BTreeMap<(InvMonomial, Generator), Rational>,
    pub max_degree: u32,
}

impl ModuleCoords {
    pub fn from_terms(
        terms: impl IntoIterator<Item = (InvMonomial, Generator, Rational)>,
        max_degree: u32,
    ) -> Self {
        let mut out = Self { terms: BTreeMap::new(), max_degree };
        for (m, g, c) in terms {
            out.add(m, g, c);
        }
        out
    }

    fn add(&mut self, m: InvMonomial, g: Generator, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((m, g)).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(m, g));
        }
    }

    pub fn get(&self, m: InvMonomial, g: Generator) -> Rational {
        self.terms.get(&(m, g)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(InvMonomial, Generator), &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Formal product with an invariant monomial.
    pub fn times(&self, m: InvMonomial) -> ModuleCoords {
        ModuleCoords {
            terms: self.terms.iter().map(|((mm, g), c)| ((mm.times(m), *g), c.clone())).collect(),
            max_degree: self.max_degree + m.degree(),
        }
    }

    /// The vector field this combination stands for.
    pub fn expand(&self) -> EqVectorField {
        self.terms.iter().fold(EqVectorField::zero(), |acc, ((m, g), c)| {
            let term = g.field().mul_invariant(&m.poly()).expect("monomial is invariant").scale(c);
            &acc + &term
        })
    }
}

impl fmt::Display for ModuleCoords {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((m, g), c)| {
                if *m == InvMonomial::ONE {
                    format!("{c}*{g}")
                } else {
                    format!("{c}*{m}*{g}")
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Products `m·X_i` of homogeneous degree `d`.
fn products_of_degree(d: u32) -> Vec<(InvMonomial, Generator)> {
    let mut out = Vec::new();
    for g in Generator::ALL {
        if g.degree() <= d {
            for m in InvMonomial::of_degree(d - g.degree()) {
                out.push((m, g));
            }
        }
    }
    out
}

/// Coefficient matrix of the products of degree `d` against the monomials
/// `x^i y^(d-i)` of both components.
fn degree_system(d: u32) -> (Vec<(InvMonomial, Generator)>, Vec<Vec<Rational>>) {
    let prods = products_of_degree(d);
    let expanded: Vec<EqVectorField> = prods
        .iter()
        .map(|(m, g)| g.field().mul_invariant(&m.poly()).expect("invariant"))
        .collect();
    let mut rows = Vec::with_capacity(2 * (d as usize + 1));
    for comp in 0..2 {
        for i in 0..=d {
            rows.push(
                expanded
                    .iter()
                    .map(|f| if comp == 0 { f.u.coeff(i, d - i) } else { f.v.coeff(i, d - i) })
                    .collect(),
            );
        }
    }
    (prods, rows)
}

fn field_vector(f: &EqVectorField, d: u32) -> Vec<Rational> {
    let mut b = Vec::with_capacity(2 * (d as usize + 1));
    for i in 0..=d {
        b.push(f.u.coeff(i, d - i));
    }
    for i in 0..=d {
        b.push(f.v.coeff(i, d - i));
    }
    b
}

/// Coordinates of `v` over the invariant-monomial multiples of `X1..X4`.
///
/// Each homogeneous degree is solved separately. Where the products are
/// linearly dependent the minimum-norm solution is returned, so the
/// result is canonical; any other solution differs by a relation.
pub fn module_decompose(v: &EqVectorField, max_degree: u32) -> Result<ModuleCoords, SingularityError> {
    let mut out = ModuleCoords { terms: BTreeMap::new(), max_degree };
    for d in v.degrees() {
        if d > max_degree {
            return Err(SingularityError::DegreeTooHigh { found: d, max: max_degree });
        }
        let (prods, m) = degree_system(d);
        let b = field_vector(&v.homogeneous_part(d), d);
        let x = least_norm_solution(&m, &b).ok_or(SingularityError::NotInSpan { degree: d })?;
        for ((mon, g), c) in prods.into_iter().zip(x) {
            out.add(mon, g, c);
        }
    }
    Ok(out)
}

/// Formal relations among products of degree `d`: a basis of the kernel
/// of the expansion map.
pub fn relations(d: u32) -> Vec<ModuleCoords> {
    let (prods, m) = degree_system(d);
    nullspace(&m)
        .into_iter()
        .map(|k| {
            ModuleCoords::from_terms(prods.iter().zip(k).map(|((mon, g), c)| (*mon, *g, c)), d)
        })
        .collect()
}

// ---------------------------------------------------------------- exact linear algebra

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for e in m[r].iter_mut() {
            *e *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (e, pv) in row.iter_mut().zip(&pivot_row) {
                    *e -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// A solution with free variables set to zero, if the system is consistent.
fn particular_solution(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = m.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Rational>> =
        m.iter().zip(b).map(|(row, bi)| row.iter().cloned().chain([bi.clone()]).collect()).collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

fn nullspace(m: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let cols = m.first().map_or(0, Vec::len);
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// `x0 - K(KᵀK)⁻¹Kᵀx0` for a particular solution `x0` and kernel basis `K`.
fn least_norm_solution(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let mut x = particular_solution(m, b)?;
    let kernel = nullspace(m);
    if kernel.is_empty() {
        return Some(x);
    }
    let gram: Vec<Vec<Rational>> =
        kernel.iter().map(|ki| kernel.iter().map(|kj| dot(ki, kj)).collect()).collect();
    let rhs: Vec<Rational> = kernel.iter().map(|k| dot(k, &x)).collect();
    let coef = particular_solution(&gram, &rhs).expect("Gram matrix of a basis is invertible");
    for (k, c) in kernel.iter().zip(&coef) {
        for (xi, ki) in x.iter_mut().zip(k) {
            *xi -= c * ki;
        }
    }
    Some(x)
}

/// Rank over the rationals by fraction-free (Bareiss) elimination on the
/// integer matrix obtained by clearing each row's denominators.
pub fn rank_exact(m: &[Vec<Rational>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            row.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..rows {
            for j in c + 1..cols {
                let t = &a[i][j] * &a[rank][c] - &a[i][c] * &a[rank][j];
                a[i][j] = t / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    rank
}

/// Rank by rational row reduction; a cross-check for [`rank_exact`].
pub fn rank_rref(m: &[Vec<Rational>]) -> usize {
    let mut a = m.to_vec();
    rref(&mut a).len()
}

/// Whether `v` lies in the row span of `rows`.
pub fn in_row_span(rows: &[Vec<Rational>], v: &[Rational]) -> bool {
    let mut with = rows.to_vec();
    with.push(v.to_vec());
    rank_exact(&with) == rank_exact(rows)
}

// ---------------------------------------------------------------- Q

/// The twelve generators of `E⁵` in column order.
pub fn e5_columns() -> [(InvMonomial, Generator); 12] {
    use Generator::*;
    let (one, n, n2, a, b) =
        (InvMonomial::ONE, InvMonomial::N, InvMonomial::new(2, 0, 0), InvMonomial::A, InvMonomial::B);
    let _ = one;
    [
        (n2, X1),
        (a, X1),
        (b, X1),
        (n2, X2),
        (a, X2),
        (b, X2),
        (n, X3),
        (a, X3),
        (b, X3),
        (n, X4),
        (a, X4),
        (b, X4),
    ]
}

/// Low-degree basis `X1, X2, N·X1, N·X2, X3, X4` ahead of the `E⁵` columns.
pub fn low_columns() -> [(InvMonomial, Generator); 6] {
    use Generator::*;
    let (one, n) = (InvMonomial::ONE, InvMonomial::N);
    [(one, X1), (one, X2), (n, X1), (n, X2), (one, X3), (one, X4)]
}

fn label(m: InvMonomial, g: Generator) -> String {
    if m == InvMonomial::ONE {
        g.to_string()
    } else {
        format!("{m}*{g}")
    }
}

/// `Q` with row and column labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangentMatrixQ {
    pub rows: Vec<Vec<Rational>>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl TangentMatrixQ {
    pub fn rank(&self) -> usize {
        rank_exact(&self.rows)
    }

    pub fn row(&self, label: &str) -> Option<&[Rational]> {
        self.row_labels.iter().position(|l| l == label).map(|i| self.rows[i].as_slice())
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.col_labels.iter().position(|l| l == label)
    }
}

/// Which multiple of which tangent generator forms each row of `Q`.
pub fn q_recipe() -> [(TangentSource, InvMonomial); 13] {
    use Generator::*;
    use TangentSource::*;
    let (one, n, a) = (InvMonomial::ONE, InvMonomial::N, InvMonomial::A);
    [
        (Derivative(X1), n),
        (Derivative(X2), n),
        (Derivative(X3), one),
        (Derivative(X4), one),
        (S(1), n),
        (S(2), one),
        (S(3), one),
        (S(4), one),
        (T(1), n),
        (T(2), one),
        (T(3), one),
        (T(4), one),
        (S(1), a),
    ]
}

/// Row label such as `N*dF(X1)` or `S2F`.
pub fn recipe_label(src: TangentSource, m: InvMonomial) -> String {
    if m == InvMonomial::ONE {
        src.to_string()
    } else {
        format!("{m}*{src}")
    }
}

/// Projects formal coordinates onto `columns`, dropping terms that lie in
/// `M·E⁵` and failing on anything of degree below 5 outside `columns`.
fn project(
    c: &ModuleCoords,
    columns: &[(InvMonomial, Generator)],
    row: &str,
) -> Result<Vec<Rational>, SingularityError> {
    let mut out = vec![Rational::zero(); columns.len()];
    for ((m, g), coef) in c.iter() {
        if let Some(i) = columns.iter().position(|col| *col == (*m, *g)) {
            out[i] += coef;
        } else if m.degree() + g.degree() < 5 {
            return Err(SingularityError::RowNotInE5 { row: row.to_string(), term: label(*m, *g) });
        }
    }
    Ok(out)
}

fn decomposed_generators() -> BTreeMap<TangentSource, ModuleCoords> {
    cleared_tangent_generators()
        .into_iter()
        .map(|(src, f)| (src, module_decompose(&f, 7).expect("tangent generators lie in the module")))
        .collect()
}

/// Builds `Q`: each recipe row is decomposed, multiplied by its invariant
/// monomial and reduced modulo `M·E⁵`.
pub fn build_q() -> Result<TangentMatrixQ, SingularityError> {
    let gens = decomposed_generators();
    let cols = e5_columns();
    let mut rows = Vec::with_capacity(13);
    let mut row_labels = Vec::with_capacity(13);
    for (src, m) in q_recipe() {
        let name = recipe_label(src, m);
        rows.push(project(&gens[&src].times(m), &cols, &name)?);
        row_labels.push(name);
    }
    Ok(TangentMatrixQ { rows, row_labels, col_labels: cols.iter().map(|(m, g)| label(*m, *g)).collect() })
}

/// Relations of degree 5 and 7 projected onto `columns`, zero rows removed.
pub fn relation_rows(columns: &[(InvMonomial, Generator)]) -> Vec<Vec<Rational>> {
    [5, 7]
        .into_iter()
        .flat_map(relations)
        .filter_map(|r| project(&r, columns, "relation").ok())
        .filter(|row| row.iter().any(|c| !c.is_zero()))
        .collect()
}

// ---------------------------------------------------------------- codimension

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub label: String,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodimensionReport {
    pub ambient_dim: usize,
    pub tangent_dim: usize,
    pub codimension: usize,
    pub memberships: Vec<Membership>,
    /// Dimension after adjoining `X1, X2, N·X2`.
    pub with_primary_complement: usize,
    /// Dimension after adjoining `X1, X2, X4`.
    pub with_alternative_complement: usize,
    pub complement: Vec<String>,
    pub pass: bool,
}

fn unit(columns: &[(InvMonomial, Generator)], combo: &[(i64, InvMonomial, Generator)]) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); columns.len()];
    for (c, m, g) in combo {
        let i = columns.iter().position(|col| *col == (*m, *g)).expect("known column");
        v[i] += int(*c);
    }
    v
}

/// Rows spanning the tangent space in the 18-dimensional space of
/// equivariants of degree at most 5 (plus the `E⁵` generators), together
/// with the relations.
pub fn tangent_rows() -> Vec<Vec<Rational>> {
    let columns: Vec<_> = low_columns().into_iter().chain(e5_columns()).collect();
    let mut rows = Vec::new();
    for (src, c) in decomposed_generators() {
        for m in [InvMonomial::ONE, InvMonomial::N, InvMonomial::A, InvMonomial::B] {
            let name = recipe_label(src, m);
            rows.push(project(&c.times(m), &columns, &name).expect("only degree >= 5 terms dropped"));
        }
    }
    rows.extend(relation_rows(&columns));
    rows
}

pub fn codimension_check() -> CodimensionReport {
    use Generator::*;
    let columns: Vec<_> = low_columns().into_iter().chain(e5_columns()).collect();
    let (one, n) = (InvMonomial::ONE, InvMonomial::N);
    let rows = tangent_rows();
    let tangent_dim = rank_exact(&rows);

    let targets = [
        ("N*X1", unit(&columns, &[(1, n, X1)])),
        ("X3", unit(&columns, &[(1, one, X3)])),
        ("3*N*X2 + X4", unit(&columns, &[(3, n, X2), (1, one, X4)])),
    ];
    let memberships: Vec<Membership> = targets
        .iter()
        .map(|(l, v)| Membership { label: l.to_string(), member: in_row_span(&rows, v) })
        .collect();

    let extend = |extra: &[(i64, InvMonomial, Generator)]| {
        let mut r = rows.clone();
        r.extend(extra.iter().map(|e| unit(&columns, &[*e])));
        rank_exact(&r)
    };
    let with_v2 = extend(&[(1, one, X1), (1, one, X2), (1, n, X2)]);
    let with_v1 = extend(&[(1, one, X1), (1, one, X2), (1, one, X4)]);
    let ambient = columns.len();
    let codimension = ambient - tangent_dim;
    let pass = memberships.iter().all(|m| m.member)
        && tangent_dim == 15
        && with_v2 == ambient
        && with_v1 == ambient;
    CodimensionReport {
        ambient_dim: ambient,
        tangent_dim,
        codimension,
        memberships,
        with_primary_complement: with_v2,
        with_alternative_complement: with_v1,
        complement: vec!["X1".into(), "X2".into(), "N*X2".into()],
        pass,
    }
}

/// The unfolding directions `X1, X2, N·X2` of the universal unfolding.
pub fn unfolding_directions() -> [EqVectorField; 3] {
    let (n, _, _) = make_invariants();
    [
        Generator::X1.field(),
        Generator::X2.field(),
        Generator::X2.field().mul_invariant(&n).expect("N is invariant"),
    ]
}
