//! Forward-mode derivatives of holomorphic expressions.
//!
//! Code written against [`Analytic`] runs on plain complex numbers or on
//! [`Jet`]s, which carry the gradient with respect to a fixed set of variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::tensor::C64;

pub trait Analytic:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant living in the same space as `self`.
    fn lift(&self, value: C64) -> Self;
    fn value(&self) -> C64;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;

    fn scale(&self, k: C64) -> Self {
        self.clone() * self.lift(k)
    }

    fn shift(&self, k: C64) -> Self {
        self.clone() + self.lift(k)
    }
}

impl Analytic for C64 {
    fn lift(&self, value: C64) -> Self {
        value
    }
    fn value(&self) -> C64 {
        *self
    }
    fn sinh(&self) -> Self {
        C64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        C64::cosh(*self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub v: C64,
    pub d: Vec<C64>,
}

impl Jet {
    pub fn variable(value: C64, index: usize, count: usize) -> Self {
        let mut d = vec![C64::new(0.0, 0.0); count];
        d[index] = C64::new(1.0, 0.0);
        Self { v: value, d }
    }

    fn zip(&self, other: &Jet, f: impl Fn(C64, C64) -> C64) -> Vec<C64> {
        self.d
            .iter()
            .zip(&other.d)
            .map(|(a, b)| f(*a, *b))
            .collect()
    }

    fn chain(&self, value: C64, slope: C64) -> Jet {
        Jet {
            v: value,
            d: self.d.iter().map(|x| x * slope).collect(),
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d: self.zip(&o, |a, b| a + b),
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet {
            v: self.v - o.v,
            d: self.zip(&o, |a, b| a - b),
        }
    }
}

// product rule
#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let (x, y) = (self.v, o.v);
        Jet {
            v: x * y,
            d: self.zip(&o, |a, b| a * y + x * b),
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let (x, y) = (self.v, o.v);
        let y2 = y * y;
        Jet {
            v: x / y,
            d: self.zip(&o, |a, b| (a * y - x * b) / y2),
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            v: -self.v,
            d: self.d.into_iter().map(|a| -a).collect(),
        }
    }
}

impl Analytic for Jet {
    fn lift(&self, value: C64) -> Self {
        Jet {
            v: value,
            d: vec![C64::new(0.0, 0.0); self.d.len()],
        }
    }
    fn value(&self) -> C64 {
        self.v
    }
    fn sinh(&self) -> Self {
        self.chain(self.v.sinh(), self.v.cosh())
    }
    fn cosh(&self) -> Self {
        self.chain(self.v.cosh(), self.v.sinh())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::c;

    fn f<T: Analytic>(x: &T, y: &T) -> T {
        (x.clone() * y.sinh()).shift(c(0.5, -0.1)) / x.cosh() - y.scale(c(2.0, 1.0))
    }

    #[test]
    fn jet_matches_central_difference() {
        let (x0, y0) = (c(0.3, 0.7), c(-0.4, 0.2));
        let out = f(&Jet::variable(x0, 0, 2), &Jet::variable(y0, 1, 2));
        assert!((out.v - f(&x0, &y0)).norm() < 1e-15);
        let h = c(1e-6, 0.0);
        let dx = (f(&(x0 + h), &y0) - f(&(x0 - h), &y0)) / (2.0 * h);
        let dy = (f(&x0, &(y0 + h)) - f(&x0, &(y0 - h))) / (2.0 * h);
        assert!((out.d[0] - dx).norm() < 1e-9);
        assert!((out.d[1] - dy).norm() < 1e-9);
    }
}
