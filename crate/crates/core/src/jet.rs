//! Truncated Taylor polynomials in one or two variables.
//!
//! A [`Jet`] of order `K` holds the Taylor coefficients of a function around a
//! point up to total degree `K`. Arithmetic on jets propagates exact derivatives,
//! which is how every catalogue symbol provides analytic ξ-derivatives of any order.

use crate::symbols::MultiIndex;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    nvars: usize,
    order: usize,
    // coefficient of h1^i h2^j stored at i * (order + 1) + j
    coef: Vec<f64>,
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, value: f64) -> Jet {
        let mut coef = vec![0.0; (order + 1) * (order + 1)];
        coef[0] = value;
        Jet { nvars, order, coef }
    }

    pub fn zero(nvars: usize, order: usize) -> Jet {
        Jet::constant(nvars, order, 0.0)
    }

    pub fn constant_like(other: &Jet, value: f64) -> Jet {
        Jet::constant(other.nvars, other.order, value)
    }

    pub fn zero_like(other: &Jet) -> Jet {
        Jet::zero(other.nvars, other.order)
    }

    /// The coordinate function `h -> value + h_axis`.
    pub fn variable(nvars: usize, order: usize, axis: usize, value: f64) -> Jet {
        let mut jet = Jet::constant(nvars, order, value);
        if order >= 1 && axis < nvars {
            let idx = if axis == 0 { order + 1 } else { 1 };
            jet.coef[idx] = 1.0;
        }
        jet
    }

    /// Jets of `(ξ_1, ξ_2)` at `xi`.
    pub fn coordinates(nvars: usize, order: usize, xi: &[f64; 2]) -> [Jet; 2] {
        [
            Jet::variable(nvars, order, 0, xi[0]),
            Jet::variable(nvars, order, 1, xi[1]),
        ]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.coef[i * (self.order + 1) + j]
    }

    fn max_j(&self, i: usize) -> usize {
        if self.nvars == 1 {
            0
        } else {
            self.order - i
        }
    }

    /// `∂^β` of the underlying function at the expansion point.
    pub fn partial(&self, beta: MultiIndex) -> f64 {
        let (i, j) = (beta.0[0], beta.0[1]);
        if i + j > self.order || (self.nvars == 1 && j > 0) {
            return 0.0;
        }
        self.at(i, j) * factorial(i) * factorial(j)
    }

    pub fn is_zero(&self) -> bool {
        self.coef.iter().all(|c| *c == 0.0)
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let coef = self.coef.iter().zip(&other.coef).map(|(a, b)| a + b).collect();
        Jet { coef, ..*self }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let coef = self.coef.iter().zip(&other.coef).map(|(a, b)| a - b).collect();
        Jet { coef, ..*self }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let coef = self.coef.iter().map(|a| a * s).collect();
        Jet { coef, ..*self }
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coef[0] += c;
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let k = self.order;
        let w = k + 1;
        let mut coef = vec![0.0; w * w];
        for i1 in 0..=k {
            for j1 in 0..=self.max_j(i1) {
                let a = self.coef[i1 * w + j1];
                if a == 0.0 {
                    continue;
                }
                for i2 in 0..=(k - i1 - j1) {
                    let jmax = if self.nvars == 1 { 0 } else { k - i1 - j1 - i2 };
                    for j2 in 0..=jmax {
                        coef[(i1 + i2) * w + j1 + j2] += a * other.coef[i2 * w + j2];
                    }
                }
            }
        }
        Jet { coef, ..*self }
    }

    /// `f(self)` given `derivs[j] = f^{(j)}(self.value())` for `j = 0..=order`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let k = self.order;
        let mut q = self.clone();
        q.coef[0] = 0.0;
        let mut out = Jet::constant(self.nvars, k, derivs[0]);
        let mut power = Jet::constant(self.nvars, k, 1.0);
        let mut fact = 1.0;
        for (j, d) in derivs.iter().enumerate().take(k + 1).skip(1) {
            power = power.mul(&q);
            fact *= j as f64;
            if *d != 0.0 {
                out = out.add(&power.scale(d / fact));
            }
        }
        out
    }

    pub fn powf(&self, a: f64) -> Jet {
        let t = self.value();
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut c = 1.0;
        for j in 0..=self.order {
            derivs.push(c * t.powf(a - j as f64));
            c *= a - j as f64;
        }
        self.compose(&derivs)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Jet {
        let t = self.value();
        let derivs: Vec<f64> = (0..=self.order)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(j) / t.powi(j as i32 + 1)
            })
            .collect();
        self.compose(&derivs)
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        // f = x^2 y + 3x at (1, 2)
        let [x, y] = Jet::coordinates(2, 4, &[1.0, 2.0]);
        let f = x.mul(&x).mul(&y).add(&x.scale(3.0));
        assert_eq!(f.value(), 5.0);
        assert_eq!(f.partial(MultiIndex([1, 0])), 2.0 * 1.0 * 2.0 + 3.0);
        assert_eq!(f.partial(MultiIndex([0, 1])), 1.0);
        assert_eq!(f.partial(MultiIndex([2, 1])), 2.0);
        assert_eq!(f.partial(MultiIndex([1, 1])), 2.0);
        assert_eq!(f.partial(MultiIndex([3, 0])), 0.0);
    }

    #[test]
    fn power_matches_closed_form() {
        // (1 + x^2)^{m/2}, m = 3, second derivative at x = 0.7
        let [x, _] = Jet::coordinates(1, 3, &[0.7, 0.0]);
        let f = x.mul(&x).add_const(1.0).powf(1.5);
        let t: f64 = 1.0 + 0.49;
        let exact = 3.0 * t.sqrt() + 3.0 * 0.49 / t.sqrt();
        assert!((f.partial(MultiIndex([2, 0])) - exact).abs() < 1e-12);
    }

    #[test]
    fn exp_of_reciprocal() {
        // g(t) = exp(-1/t), g'(t) = g(t) / t^2
        let [t, _] = Jet::coordinates(1, 2, &[0.5, 0.0]);
        let g = t.recip().scale(-1.0).exp();
        let v = (-2.0f64).exp();
        assert!((g.partial(MultiIndex([1, 0])) - v * 4.0).abs() < 1e-12);
    }
}
