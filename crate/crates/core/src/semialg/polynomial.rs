use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{check_dim, Error, Result};

/// One monomial `coeff * prod x_i^exps[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub exps: Vec<u32>,
}

/// A sparse multivariate polynomial with binary64 coefficients.
///
/// Terms are kept sorted by exponent vector with no duplicates and no exact
/// zero coefficients, so two polynomials built from the same monomials in a
/// different order compare equal. The zero polynomial has no terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    num_vars: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging
    /// repeated exponent vectors and dropping zero coefficients.
    pub fn new<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Vec<u32>)>,
    {
        let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (coeff, exps) in terms {
            check_dim(num_vars, exps.len())?;
            if !coeff.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite coefficient {coeff}"
                )));
            }
            *merged.entry(exps).or_insert(0.0) += coeff;
        }
        Ok(Self::from_map(num_vars, merged))
    }

    fn from_map(num_vars: usize, merged: BTreeMap<Vec<u32>, f64>) -> Self {
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(exps, coeff)| Term { coeff, exps })
            .collect();
        Self { num_vars, terms }
    }

    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: Vec::new(),
        }
    }

    pub fn constant(num_vars: usize, c: f64) -> Self {
        Self::from_map(num_vars, BTreeMap::from([(vec![0; num_vars], c)]))
    }

    /// The coordinate function `x_var`.
    pub fn var(num_vars: usize, var: usize) -> Self {
        assert!(var < num_vars, "variable {var} out of range {num_vars}");
        let mut exps = vec![0; num_vars];
        exps[var] = 1;
        Self::from_map(num_vars, BTreeMap::from([(exps, 1.0)]))
    }

    /// The affine form `c0 + sum coeffs[i] x_i`.
    pub fn affine(c0: f64, coeffs: &[f64]) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, c0);
        for (i, &a) in coeffs.iter().enumerate() {
            p = p + Self::var(n, i).scale(a);
        }
        p
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.exps.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Checked evaluation.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        check_dim(self.num_vars, point.len())?;
        Ok(self.value(point))
    }

    /// Evaluation without the dimension check, for hot loops whose callers
    /// validated the point once up front.
    ///
    /// Terms are accumulated with Neumaier's compensated summation.
    pub fn value(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.num_vars);
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for term in &self.terms {
            let mut t = term.coeff;
            for (x, &e) in point.iter().zip(&term.exps) {
                if e != 0 {
                    t *= x.powi(e as i32);
                }
            }
            let s = sum + t;
            if sum.abs() >= t.abs() {
                comp += (sum - s) + t;
            } else {
                comp += (t - s) + sum;
            }
            sum = s;
        }
        sum + comp
    }

    /// Exact partial derivative with respect to `var`.
    pub fn derivative(&self, var: usize) -> Result<Self> {
        if var >= self.num_vars {
            return Err(Error::InvalidInput(format!(
                "variable index {var} out of range for {} variables",
                self.num_vars
            )));
        }
        let mut merged = BTreeMap::new();
        for term in &self.terms {
            let e = term.exps[var];
            if e == 0 {
                continue;
            }
            let mut exps = term.exps.clone();
            exps[var] = e - 1;
            *merged.entry(exps).or_insert(0.0) += term.coeff * e as f64;
        }
        Ok(Self::from_map(self.num_vars, merged))
    }

    /// All first partials, in variable order.
    pub fn gradient(&self) -> Vec<Self> {
        (0..self.num_vars)
            .map(|v| self.derivative(v).expect("index in range"))
            .collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero(self.num_vars);
        }
        Self {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * c,
                    exps: t.exps.clone(),
                })
                .filter(|t| t.coeff != 0.0)
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.num_vars, 1.0);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Re-indexes into a space of `num_vars` variables, variable `i` of
    /// `self` becoming variable `offset + i`.
    pub fn embed(&self, num_vars: usize, offset: usize) -> Self {
        assert!(offset + self.num_vars <= num_vars, "embedding does not fit");
        Self {
            num_vars,
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let mut exps = vec![0; num_vars];
                    exps[offset..offset + self.num_vars].copy_from_slice(&t.exps);
                    Term {
                        coeff: t.coeff,
                        exps,
                    }
                })
                .collect(),
        }
    }

    /// Composition `p(s_1(z), ..., s_k(z))`; every substitute must share one
    /// variable count, which becomes the result's.
    pub fn substitute(&self, subs: &[Polynomial]) -> Result<Self> {
        check_dim(self.num_vars, subs.len())?;
        let target = match subs.first() {
            Some(s) => s.num_vars,
            None => return Ok(Self::constant(0, self.value(&[]))),
        };
        for s in subs {
            check_dim(target, s.num_vars)?;
        }
        // Powers of each substitute are reused across terms.
        let mut powers: Vec<Vec<Polynomial>> = subs
            .iter()
            .map(|s| vec![Self::constant(target, 1.0), s.clone()])
            .collect();
        let mut out = Self::zero(target);
        for term in &self.terms {
            let mut mono = Self::constant(target, term.coeff);
            for (v, &e) in term.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[v].len() <= e as usize {
                    let next = powers[v].last().unwrap() * &subs[v];
                    powers[v].push(next);
                }
                mono = &mono * &powers[v][e as usize];
            }
            out = out + mono;
        }
        Ok(out)
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, rhs.num_vars, "variable count mismatch");
        let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for t in self.terms.iter().chain(&rhs.terms) {
            *merged.entry(t.exps.clone()).or_insert(0.0) += t.coeff;
        }
        Polynomial::from_map(self.num_vars, merged)
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self + &(-rhs)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs.clone())
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, rhs.num_vars, "variable count mismatch");
        let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for a in &self.terms {
            for b in &rhs.terms {
                let exps = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
                *merged.entry(exps).or_insert(0.0) += a.coeff * b.coeff;
            }
        }
        Polynomial::from_map(self.num_vars, merged)
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", t.coeff)?;
            for (v, &e) in t.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{}", v + 1, e)?,
                }
            }
        }
        Ok(())
    }
}
