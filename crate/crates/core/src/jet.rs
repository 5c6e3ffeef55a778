//! Second-order Taylor jets in two variables.

use std::ops::{Add, AddAssign, Mul};

/// `f, f_u, f_v, f_uu, f_uv, f_vv` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub val: f64,
    pub du: f64,
    pub dv: f64,
    pub duu: f64,
    pub duv: f64,
    pub dvv: f64,
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 { val: 0.0, du: 0.0, dv: 0.0, duu: 0.0, duv: 0.0, dvv: 0.0 };
    pub const ONE: Jet2 = Jet2 { val: 1.0, du: 0.0, dv: 0.0, duu: 0.0, duv: 0.0, dvv: 0.0 };

    pub fn constant(val: f64) -> Self {
        Jet2 { val, ..Jet2::ZERO }
    }

    /// Function of `u` alone with the given first and second derivatives.
    pub fn of_u(val: f64, d: f64, dd: f64) -> Self {
        Jet2 { val, du: d, duu: dd, ..Jet2::ZERO }
    }

    pub fn of_v(val: f64, d: f64, dd: f64) -> Self {
        Jet2 { val, dv: d, dvv: dd, ..Jet2::ZERO }
    }

    pub fn scale(self, c: f64) -> Self {
        Jet2 {
            val: c * self.val,
            du: c * self.du,
            dv: c * self.dv,
            duu: c * self.duu,
            duv: c * self.duv,
            dvv: c * self.dvv,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == Jet2::ZERO
    }
}

impl Mul for Jet2 {
    type Output = Jet2;

    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            val: self.val * o.val,
            du: self.du * o.val + self.val * o.du,
            dv: self.dv * o.val + self.val * o.dv,
            duu: self.duu * o.val + 2.0 * self.du * o.du + self.val * o.duu,
            duv: self.duv * o.val + self.du * o.dv + self.dv * o.du + self.val * o.duv,
            dvv: self.dvv * o.val + 2.0 * self.dv * o.dv + self.val * o.dvv,
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;

    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            val: self.val + o.val,
            du: self.du + o.du,
            dv: self.dv + o.dv,
            duu: self.duu + o.duu,
            duv: self.duv + o.duv,
            dvv: self.dvv + o.dvv,
        }
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, o: Jet2) {
        *self = *self + o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_on_polynomials() {
        // f = u^2 v at (2, 3); g = u + v^2
        let (u, v) = (2.0, 3.0);
        let f = Jet2 { val: u * u * v, du: 2.0 * u * v, dv: u * u, duu: 2.0 * v, duv: 2.0 * u, dvv: 0.0 };
        let g = Jet2 { val: u + v * v, du: 1.0, dv: 2.0 * v, duu: 0.0, duv: 0.0, dvv: 2.0 };
        let h = f * g; // u^3 v + u^2 v^3
        assert_eq!(h.val, u.powi(3) * v + u * u * v.powi(3));
        assert_eq!(h.du, 3.0 * u * u * v + 2.0 * u * v.powi(3));
        assert_eq!(h.dv, u.powi(3) + 3.0 * u * u * v * v);
        assert_eq!(h.duu, 6.0 * u * v + 2.0 * v.powi(3));
        assert_eq!(h.duv, 3.0 * u * u + 6.0 * u * v * v);
        assert_eq!(h.dvv, 6.0 * u * u * v);
    }
}
