//! Truncated Taylor series arithmetic (forward-mode jets of arbitrary order).
//!
//! A [`Series`] holds normalized coefficients `c[n] = f^(n)(x0) / n!` and a
//! count of trustworthy leading coefficients. Non-smooth operations such as
//! `x^0.3` at `x0 = 0` keep the coefficients that exist and shrink `valid`.

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    c: Vec<f64>,
    valid: usize,
}

impl Series {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Series { c, valid: order + 1 }
    }

    /// The independent variable expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut s = Self::constant(x0, order);
        if order >= 1 {
            s.c[1] = 1.0;
        }
        s
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(0.0, order)
    }

    fn invalid(order: usize, value: f64) -> Self {
        let mut c = vec![f64::NAN; order + 1];
        c[0] = value;
        Series { c, valid: 0 }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Number of leading coefficients that are mathematically defined.
    pub fn valid(&self) -> usize {
        self.valid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Derivatives `f^(n)(x0)` for `n < valid`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.c
            .iter()
            .take(self.valid)
            .enumerate()
            .map(|(n, &c)| {
                if n > 0 {
                    fact *= n as f64;
                }
                c * fact
            })
            .collect()
    }

    pub fn add(&self, o: &Series) -> Series {
        Series {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
            valid: self.valid.min(o.valid),
        }
    }

    pub fn sub(&self, o: &Series) -> Series {
        Series {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
            valid: self.valid.min(o.valid),
        }
    }

    pub fn scale(&self, k: f64) -> Series {
        Series {
            c: self.c.iter().map(|a| a * k).collect(),
            valid: self.valid,
        }
    }

    pub fn neg(&self) -> Series {
        self.scale(-1.0)
    }

    pub fn mul(&self, o: &Series) -> Series {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = (0..=i).map(|k| self.c[k] * o.c[i - k]).sum();
        }
        // A factor that is exactly zero to the valid depth of the other keeps
        // the product exact further out, e.g. 0 * x^0.3.
        let valid = match (self.is_exact_zero(), o.is_exact_zero()) {
            (true, _) | (_, true) => n,
            _ => self.valid.min(o.valid),
        };
        Series { c, valid }
    }

    fn is_exact_zero(&self) -> bool {
        self.valid == self.c.len() && self.c.iter().all(|&v| v == 0.0)
    }

    pub fn recip(&self) -> Series {
        let n = self.c.len();
        let a0 = self.c[0];
        if a0 == 0.0 {
            return Series::invalid(n - 1, f64::INFINITY);
        }
        let mut r = vec![0.0; n];
        r[0] = 1.0 / a0;
        for i in 1..n {
            let s: f64 = (1..=i).map(|k| self.c[k] * r[i - k]).sum();
            r[i] = -s / a0;
        }
        Series {
            c: r,
            valid: self.valid,
        }
    }

    pub fn div(&self, o: &Series) -> Series {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Series {
        let n = self.c.len();
        let mut e = vec![0.0; n];
        e[0] = self.c[0].exp();
        for i in 1..n {
            let s: f64 = (1..=i).map(|k| k as f64 * self.c[k] * e[i - k]).sum();
            e[i] = s / i as f64;
        }
        Series {
            c: e,
            valid: self.valid,
        }
    }

    pub fn ln(&self) -> Series {
        let n = self.c.len();
        let a0 = self.c[0];
        if a0 <= 0.0 {
            return Series::invalid(n - 1, a0.ln());
        }
        let mut l = vec![0.0; n];
        l[0] = a0.ln();
        for i in 1..n {
            let s: f64 = (1..i).map(|k| k as f64 * l[k] * self.c[i - k]).sum();
            l[i] = (self.c[i] - s / i as f64) / a0;
        }
        Series {
            c: l,
            valid: self.valid,
        }
    }

    /// Returns `(sin a, cos a)`.
    pub fn sin_cos(&self) -> (Series, Series) {
        let n = self.c.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for i in 1..n {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for k in 1..=i {
                let w = k as f64 * self.c[k];
                ss += w * c[i - k];
                cc += w * s[i - k];
            }
            s[i] = ss / i as f64;
            c[i] = -cc / i as f64;
        }
        (
            Series {
                c: s,
                valid: self.valid,
            },
            Series {
                c,
                valid: self.valid,
            },
        )
    }

    pub fn powi(&self, p: u32) -> Series {
        let mut result = Series::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Real power. Integer exponents use repeated products; a base that
    /// vanishes at the expansion point keeps only the coefficients of
    /// `x^(alpha m)` that exist.
    pub fn powf(&self, alpha: f64) -> Series {
        let order = self.order();
        if alpha == 0.0 {
            return Series::constant(1.0, order);
        }
        if alpha.fract() == 0.0 && alpha > 0.0 && alpha <= u32::MAX as f64 {
            return self.powi(alpha as u32);
        }
        if alpha.fract() == 0.0 && alpha < 0.0 {
            return self.powi((-alpha) as u32).recip();
        }
        let a0 = self.c[0];
        if a0 > 0.0 {
            return self.ln().scale(alpha).exp();
        }
        if a0 < 0.0 {
            return Series::invalid(order, f64::NAN);
        }
        // a0 == 0: find the leading order among the trustworthy coefficients.
        let lead = (1..self.valid).find(|&i| self.c[i] != 0.0);
        let Some(m) = lead else {
            // Vanishes to every known order.
            if alpha > 0.0 {
                let mut z = Series::zero(order);
                z.valid = self.valid;
                return z;
            }
            return Series::invalid(order, f64::INFINITY);
        };
        if alpha < 0.0 {
            return Series::invalid(order, f64::INFINITY);
        }
        let am = alpha * m as f64;
        if am.fract() == 0.0 {
            // x^(am) * b^alpha with b = a / x^m, b(0) = c_m.
            let shift = am as usize;
            let mut b = vec![0.0; order + 1];
            for (i, bi) in b.iter_mut().enumerate() {
                if i + m <= order {
                    *bi = self.c[i + m];
                }
            }
            let bvalid = self.valid.saturating_sub(m);
            let bs = Series { c: b, valid: bvalid }.powf(alpha);
            let mut c = vec![0.0; order + 1];
            for i in shift..=order {
                c[i] = bs.c[i - shift];
            }
            return Series {
                c,
                valid: (shift + bs.valid).min(order + 1),
            };
        }
        // Non-integer leading power: coefficients below x^(am) are zero, the
        // rest do not exist.
        let valid = (am.ceil() as usize).min(order + 1);
        let mut c = vec![f64::NAN; order + 1];
        for ci in c.iter_mut().take(valid) {
            *ci = 0.0;
        }
        c[0] = 0.0;
        Series { c, valid }
    }

    /// Absolute value away from zero (sign flip if negative).
    pub fn abs_away_from_zero(&self) -> Series {
        if self.c[0] < 0.0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// `exp(-1/a)` for `a > 0`, identically zero for `a <= 0`.
    pub fn flat_exp(&self) -> Series {
        if self.c[0] <= 0.0 {
            let mut z = Series::zero(self.order());
            z.valid = self.c.len();
            return z;
        }
        self.recip().neg().exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn exp_of_variable() {
        let x = Series::variable(0.3, 6);
        let d = x.exp().derivatives();
        assert!(d.iter().all(|&v| close(v, 0.3f64.exp(), 1e-14)));
    }

    #[test]
    fn sin_cos_derivatives() {
        let x = Series::variable(1.1, 5);
        let (s, c) = x.sin_cos();
        let ds = s.derivatives();
        let dc = c.derivatives();
        let expect_s = [1.1f64.sin(), 1.1f64.cos(), -1.1f64.sin(), -1.1f64.cos()];
        for n in 0..4 {
            assert!(close(ds[n], expect_s[n], 1e-13));
            assert!(close(dc[n], expect_s[(n + 1) % 4], 1e-13));
        }
    }

    #[test]
    fn recip_and_ln() {
        let x = Series::variable(2.0, 4);
        let r = x.recip().derivatives();
        assert!(close(r[3], -6.0 / 16.0, 1e-14));
        let l = x.ln().derivatives();
        assert!(close(l[2], -0.25, 1e-14));
    }

    #[test]
    fn fractional_power_at_zero_truncates() {
        let x = Series::variable(0.0, 4);
        let p = x.powf(0.3);
        assert_eq!(p.valid(), 1);
        assert_eq!(p.value(), 0.0);
        let p = x.powf(1.3);
        assert_eq!(p.valid(), 2);
        let p = x.powf(2.3);
        assert_eq!(p.valid(), 3);
    }

    #[test]
    fn half_power_of_square_is_smooth() {
        // (x^2)^(1/2) at 0 with leading coefficient 1 -> x (one-sided).
        let x = Series::variable(0.0, 3);
        let p = x.mul(&x).powf(0.5);
        // Factoring out x^2 loses two orders of the truncated input.
        assert_eq!(p.valid(), 3);
        assert!(close(p.coeffs()[1], 1.0, 1e-15));
    }

    #[test]
    fn flat_exp_is_flat_at_zero() {
        let x = Series::variable(0.0, 5);
        let f = x.flat_exp();
        assert!(f.derivatives().iter().all(|&v| v == 0.0));
    }
}
