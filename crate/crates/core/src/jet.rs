//! Second-order jets: a value together with its first and second derivative
//! with respect to a single parameter, closed under `+`, `-` and `*`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub v: T,
    pub d: T,
    pub dd: T,
}

impl<T: Real> Jet<T> {
    pub fn new(v: T, d: T, dd: T) -> Self {
        Jet { v, d, dd }
    }

    pub fn zero() -> Self {
        Jet::constant(T::zero())
    }

    pub fn constant(v: T) -> Self {
        Jet::new(v, T::zero(), T::zero())
    }

    /// Jet of `exp(g)` given `value = exp(g)` and the first two derivatives of `g`.
    pub fn from_log_derivs(value: T, g1: T, g2: T) -> Self {
        if value == T::zero() {
            return Jet::zero();
        }
        Jet::new(value, value * g1, value * (g1 * g1 + g2))
    }

    pub fn scale(self, c: T) -> Self {
        Jet::new(self.v * c, self.d * c, self.dd * c)
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Jet<T>;
    fn add(self, o: Self) -> Self {
        Jet::new(self.v + o.v, self.d + o.d, self.dd + o.dd)
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Jet<T>;
    fn sub(self, o: Self) -> Self {
        Jet::new(self.v - o.v, self.d - o.d, self.dd - o.dd)
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Self {
        Jet::new(-self.v, -self.d, -self.dd)
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, o: Self) -> Self {
        let two = T::lit(2.0);
        Jet::new(self.v * o.v, self.d * o.v + self.v * o.d, self.dd * o.v + two * self.d * o.d + self.v * o.dd)
    }
}

impl<T: Real> std::iter::Sum for Jet<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Jet::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_matches_polynomial() {
        // f(m) = m^2, g(m) = m^3 at m = 2; fg = m^5.
        let f = Jet::new(4.0_f64, 4.0, 2.0);
        let g = Jet::new(8.0_f64, 12.0, 12.0);
        let fg = f * g;
        assert_eq!(fg, Jet::new(32.0, 80.0, 160.0));
    }

    #[test]
    fn exp_jet() {
        // exp(2m) at m = 0.
        let j = Jet::from_log_derivs(1.0_f64, 2.0, 0.0);
        assert_eq!(j, Jet::new(1.0, 2.0, 4.0));
    }
}
