use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::layout::Layout;
use crate::scalar::{Field, Scalar};

/// Truncated multivariate Taylor polynomial.
///
/// Coefficients are Taylor coefficients, so the partial derivative for
/// exponent vector `α` is `α! · c_α`. A jet without a layout is a constant
/// that adapts to whatever jet it is combined with.
#[derive(Clone, Debug)]
pub struct Jet<T> {
    layout: Option<Arc<Layout>>,
    coeffs: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn constant(c: T) -> Self {
        Jet {
            layout: None,
            coeffs: vec![c],
        }
    }

    pub fn zero(layout: &Arc<Layout>) -> Self {
        Jet {
            layout: Some(layout.clone()),
            coeffs: vec![T::zero(); layout.len()],
        }
    }

    pub fn constant_in(layout: &Arc<Layout>, c: T) -> Self {
        let mut j = Self::zero(layout);
        j.coeffs[0] = c;
        j
    }

    /// The coordinate function `x_var` expanded around `value`.
    pub fn variable(layout: &Arc<Layout>, var: usize, value: T) -> Self {
        let mut j = Self::constant_in(layout, value);
        if layout.order() >= 1 {
            j.coeffs[1 + var] = T::one();
        }
        j
    }

    /// `c0 + Σ a_i δ_i` where `δ` is the displacement from the base point.
    pub fn affine(layout: &Arc<Layout>, c0: T, a: &[T]) -> Self {
        let mut j = Self::constant_in(layout, c0);
        if layout.order() >= 1 {
            for (i, &ai) in a.iter().enumerate() {
                j.coeffs[1 + i] = ai;
            }
        }
        j
    }

    pub fn from_coeffs(layout: &Arc<Layout>, coeffs: Vec<T>) -> Self {
        assert_eq!(coeffs.len(), layout.len(), "coefficient count");
        Jet {
            layout: Some(layout.clone()),
            coeffs,
        }
    }

    pub fn layout(&self) -> Option<&Arc<Layout>> {
        self.layout.as_ref()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    pub fn order(&self) -> usize {
        self.layout.as_ref().map_or(0, |l| l.order())
    }

    /// Partial derivative at the base point along the listed variables.
    pub fn partial(&self, vars: &[usize]) -> T {
        if vars.is_empty() {
            return self.coeffs[0];
        }
        let Some(layout) = &self.layout else {
            return T::zero();
        };
        match layout.find_multi(vars) {
            Some(i) if i < self.coeffs.len() => self.coeffs[i] * T::c(layout.factorial(i)),
            _ => T::zero(),
        }
    }

    /// Partial derivative for an exponent vector.
    pub fn partial_exps(&self, exps: &[u8]) -> T {
        let Some(layout) = &self.layout else {
            return if exps.iter().all(|&e| e == 0) {
                self.coeffs[0]
            } else {
                T::zero()
            };
        };
        match layout.find(exps) {
            Some(i) => self.coeffs[i] * T::c(layout.factorial(i)),
            None => T::zero(),
        }
    }

    /// `∂/∂x_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Self {
        let Some(layout) = &self.layout else {
            return Jet::constant(T::zero());
        };
        if layout.order() == 0 {
            return Jet::constant_in(layout, T::zero());
        }
        let lower = Layout::get(layout.nvars(), layout.order() - 1);
        let mut out = vec![T::zero(); lower.len()];
        for &(src, dst, e) in layout.deriv_table(var) {
            out[dst as usize] += self.coeffs[src as usize] * T::c(e as f64);
        }
        Jet {
            layout: Some(lower),
            coeffs: out,
        }
    }

    /// Drops all terms above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let Some(layout) = &self.layout else {
            return self.clone();
        };
        if order >= layout.order() {
            return self.clone();
        }
        let lower = Layout::get(layout.nvars(), order);
        Jet {
            coeffs: self.coeffs[..lower.len()].to_vec(),
            layout: Some(lower),
        }
    }

    /// Restricts to the slice where the last variable has exponent `m`,
    /// returning the `m`-th derivative in that variable as a jet in the
    /// remaining variables truncated at `order`.
    pub fn last_var_slice(&self, m: usize, order: usize) -> Self {
        let Some(layout) = &self.layout else {
            return Jet::constant(if m == 0 { self.coeffs[0] } else { T::zero() });
        };
        let n = layout.nvars();
        assert!(n >= 1, "slice of a zero-variable jet");
        let target = Layout::get(n - 1, order);
        let mut out = vec![T::zero(); target.len()];
        let mfact: f64 = (1..=m as u64).product::<u64>() as f64;
        let mut e = vec![0u8; n];
        for (dst, slot) in out.iter_mut().enumerate() {
            e[..n - 1].copy_from_slice(target.exponents(dst));
            e[n - 1] = m as u8;
            if let Some(src) = layout.find(&e) {
                *slot = self.coeffs[src] * T::c(mfact);
            }
        }
        Jet {
            layout: Some(target),
            coeffs: out,
        }
    }

    /// Composes a univariate function, given its Taylor coefficients
    /// `g^{(m)}(x0)/m!` at the current value `x0`, with this jet.
    pub fn compose(&self, taylor: &[T]) -> Self {
        let order = self.order();
        let mut delta = self.clone();
        delta.coeffs[0] = T::zero();
        let top = order.min(taylor.len() - 1);
        let mut acc = Jet {
            layout: self.layout.clone(),
            coeffs: vec![T::zero(); self.coeffs.len()],
        };
        acc.coeffs[0] = taylor[top];
        for m in (0..top).rev() {
            acc = &acc * &delta;
            acc.coeffs[0] += taylor[m];
        }
        acc
    }

    fn taylor_coeffs(&self, f: impl Fn(usize, T) -> T) -> Vec<T> {
        let x0 = self.coeffs[0];
        (0..=self.order()).map(|m| f(m, x0)).collect()
    }

    pub fn recip(&self) -> Self {
        let c = self.taylor_coeffs(|m, x| {
            let s = if m % 2 == 0 { T::one() } else { -T::one() };
            s / x.powi(m as i32 + 1)
        });
        self.compose(&c)
    }

    pub fn exp(&self) -> Self {
        let c = self.taylor_coeffs(|m, x| x.exp() / T::c(fact(m)));
        self.compose(&c)
    }

    pub fn ln(&self) -> Self {
        let c = self.taylor_coeffs(|m, x| {
            if m == 0 {
                x.ln()
            } else {
                let s = if m % 2 == 1 { T::one() } else { -T::one() };
                s / (T::c(m as f64) * x.powi(m as i32))
            }
        });
        self.compose(&c)
    }

    pub fn sin(&self) -> Self {
        let c = self.taylor_coeffs(|m, x| cyclic(m, x.sin(), x.cos()) / T::c(fact(m)));
        self.compose(&c)
    }

    pub fn cos(&self) -> Self {
        let c = self.taylor_coeffs(|m, x| cyclic(m, x.cos(), -x.sin()) / T::c(fact(m)));
        self.compose(&c)
    }

    pub fn sinh(&self) -> Self {
        let c = self.taylor_coeffs(|m, x| {
            let d = if m % 2 == 0 { x.sinh() } else { x.cosh() };
            d / T::c(fact(m))
        });
        self.compose(&c)
    }

    pub fn cosh(&self) -> Self {
        let c = self.taylor_coeffs(|m, x| {
            let d = if m % 2 == 0 { x.cosh() } else { x.sinh() };
            d / T::c(fact(m))
        });
        self.compose(&c)
    }

    /// `self^p` via the generalized binomial series.
    pub fn powf(&self, p: T) -> Self {
        let c = self.taylor_coeffs(|m, x| {
            let mut binom = T::one();
            for i in 0..m {
                binom = binom * (p - T::c(i as f64)) / T::c(i as f64 + 1.0);
            }
            if binom == T::zero() {
                T::zero()
            } else {
                binom * x.powf(p - T::c(m as f64))
            }
        });
        self.compose(&c)
    }

    pub fn scale_by(&self, s: T) -> Self {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    fn unify<'a>(a: &'a Jet<T>, b: &'a Jet<T>) -> Option<&'a Arc<Layout>> {
        match (&a.layout, &b.layout) {
            (Some(la), Some(lb)) => {
                assert!(
                    Arc::ptr_eq(la, lb),
                    "jets with different layouts combined: ({}, {}) vs ({}, {})",
                    la.nvars(),
                    la.order(),
                    lb.nvars(),
                    lb.order()
                );
                Some(la)
            }
            (Some(l), None) | (None, Some(l)) => Some(l),
            (None, None) => None,
        }
    }

    fn zip(&self, o: &Jet<T>, f: impl Fn(T, T) -> T) -> Jet<T> {
        match Self::unify(self, o) {
            None => Jet::constant(f(self.coeffs[0], o.coeffs[0])),
            Some(l) => {
                let n = l.len();
                let get = |j: &Jet<T>, i: usize| {
                    if j.layout.is_some() {
                        j.coeffs[i]
                    } else if i == 0 {
                        j.coeffs[0]
                    } else {
                        T::zero()
                    }
                };
                let coeffs = (0..n).map(|i| f(get(self, i), get(o, i))).collect();
                Jet {
                    layout: Some(l.clone()),
                    coeffs,
                }
            }
        }
    }
}

fn fact(m: usize) -> f64 {
    (1..=m as u64).product::<u64>() as f64
}

fn cyclic<T: Scalar>(m: usize, f: T, df: T) -> T {
    match m % 4 {
        0 => f,
        1 => df,
        2 => -f,
        _ => -df,
    }
}

impl<T: Scalar> Add for &Jet<T> {
    type Output = Jet<T>;
    fn add(self, o: &Jet<T>) -> Jet<T> {
        self.zip(o, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for &Jet<T> {
    type Output = Jet<T>;
    fn sub(self, o: &Jet<T>) -> Jet<T> {
        self.zip(o, |a, b| a - b)
    }
}

impl<T: Scalar> Mul for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, o: &Jet<T>) -> Jet<T> {
        match (&self.layout, &o.layout) {
            (None, _) => o.scale_by(self.coeffs[0]),
            (_, None) => self.scale_by(o.coeffs[0]),
            (Some(l), Some(_)) => {
                Jet::unify(self, o);
                let mut out = vec![T::zero(); l.len()];
                let (a, b) = (&self.coeffs, &o.coeffs);
                for &(i, j, k) in l.mul_table() {
                    out[k as usize] += a[i as usize] * b[j as usize];
                }
                Jet {
                    layout: Some(l.clone()),
                    coeffs: out,
                }
            }
        }
    }
}

impl<T: Scalar> Div for &Jet<T> {
    type Output = Jet<T>;
    fn div(self, o: &Jet<T>) -> Jet<T> {
        if o.layout.is_none() {
            return self.scale_by(T::one() / o.coeffs[0]);
        }
        self * &o.recip()
    }
}

impl<T: Scalar> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.scale_by(-T::one())
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr for Jet<T> {
            type Output = Jet<T>;
            fn $m(self, o: Jet<T>) -> Jet<T> {
                (&self).$m(&o)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

impl<T: Scalar> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        -&self
    }
}

impl<T: Scalar> Field for Jet<T> {
    fn zero_like(&self) -> Self {
        Jet {
            layout: self.layout.clone(),
            coeffs: vec![T::zero(); self.coeffs.len()],
        }
    }

    fn one_like(&self) -> Self {
        let mut z = self.zero_like();
        z.coeffs[0] = T::one();
        z
    }

    fn scale(&self, s: f64) -> Self {
        self.scale_by(T::c(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn product_rule_fourth_order() {
        let l = Layout::get(2, 4);
        let x = Jet::variable(&l, 0, 0.3_f64);
        let y = Jet::variable(&l, 1, -0.7_f64);
        let f = &x.sin() * &y.exp();
        // ∂x²∂y² of sin(x)e^y = -sin(x)e^y
        let want = -(0.3_f64).sin() * (-0.7_f64).exp();
        assert!(close(f.partial(&[0, 0, 1, 1]), want, 1e-14));
    }

    #[test]
    fn ln_recip_and_pow_agree() {
        let l = Layout::get(1, 4);
        let x = Jet::variable(&l, 0, 1.7_f64);
        let a = x.recip();
        let b = x.powf(-1.0);
        let c = (-x.ln()).exp();
        for i in 0..l.len() {
            assert!(close(a.coeffs()[i], b.coeffs()[i], 1e-14));
            assert!(close(a.coeffs()[i], c.coeffs()[i], 1e-13));
        }
    }

    #[test]
    fn derivative_lowers_order() {
        let l = Layout::get(2, 3);
        let x = Jet::variable(&l, 0, 2.0_f64);
        let y = Jet::variable(&l, 1, 1.0_f64);
        let f = &(&x * &x) * &y;
        let fx = f.derivative(0);
        assert_eq!(fx.order(), 2);
        assert!(close(fx.value(), 4.0, 1e-15));
        assert!(close(fx.partial(&[0, 1]), 2.0, 1e-15));
    }

    #[test]
    fn hyperbolic_identity() {
        let l = Layout::get(2, 4);
        let s = &Jet::variable(&l, 0, 0.4_f64) + &Jet::variable(&l, 1, 0.1_f64);
        let c = s.cosh();
        let h = s.sinh();
        let one = &(&c * &c) - &(&h * &h);
        assert!(close(one.value(), 1.0, 1e-15));
        for &v in &one.coeffs()[1..] {
            assert!(v.abs() < 1e-14);
        }
    }
}
