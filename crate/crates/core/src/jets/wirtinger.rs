use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;

use super::expr::Flavor;
use super::layout::Layout;
use super::spacetime::SpaceTimeJet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

type Expansion = Vec<(usize, f64, f64)>;

/// Mixed holomorphic/antiholomorphic partials of a real function on ℂ^m.
///
/// For complex-flavored jets the first `k` variables are `z` and the last
/// `l` are `w`; a real-flavored jet of even dimension is read as `m` `z`
/// variables with `l = 0`.
///
/// Slots `0..m` are `∂_{z_a}` and slots `m..2m` are `∂_{z̄_a}`, with
/// `∂_z = ½(∂_x − i∂_y)`. Complex variable `a` pairs real coordinates
/// `2a` (real part) and `2a + 1` (imaginary part).
#[derive(Clone, Debug)]
pub struct WirtingerTable<T> {
    pub k: usize,
    pub l: usize,
    pub point: Vec<T>,
    /// `∂_t u` at the base point.
    pub ut: T,
    layout: Arc<Layout>,
    entries: Vec<Complex<T>>,
}

/// Converts a real jet on ℝ^{2m} into Wirtinger form.
pub fn wirtinger_from_real<T: Scalar>(jet: &SpaceTimeJet<T>) -> Result<WirtingerTable<T>> {
    let n = jet.dim();
    if n % 2 != 0 {
        return Err(Error::DimensionMismatch {
            what: "real dimension of a complex jet",
            expected: n + 1,
            found: n,
        });
    }
    let m = n / 2;
    if jet.flavor == Flavor::Complex && m != jet.k + jet.l {
        return Err(Error::DimensionMismatch {
            what: "complex dimension",
            expected: jet.k + jet.l,
            found: m,
        });
    }
    let real = jet.spatial();
    let real_layout = real.layout().cloned().unwrap_or_else(|| Layout::get(n, 0));
    let order = real_layout.order();
    let table = conversion(m, order);
    let layout = Layout::get(2 * m, order);
    let coeffs = real.coeffs();
    let entries = table
        .iter()
        .map(|terms| {
            let (mut re, mut im) = (T::zero(), T::zero());
            for &(ri, cr, ci) in terms.iter() {
                let d = coeffs[ri] * T::c(real_layout.factorial(ri));
                re += T::c(cr) * d;
                im += T::c(ci) * d;
            }
            Complex::new(re, im)
        })
        .collect();
    let ut = jet.time_partial(1, &[]).unwrap_or(T::zero());
    let (k, l) = match jet.flavor {
        Flavor::Complex => (jet.k, jet.l),
        Flavor::Real => (m, 0),
    };
    Ok(WirtingerTable {
        k,
        l,
        point: jet.point.clone(),
        ut,
        layout,
        entries,
    })
}

/// For each slot monomial: the real monomials and complex weights whose
/// combination gives that Wirtinger derivative.
fn conversion(m: usize, order: usize) -> Arc<Vec<Expansion>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<Expansion>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("cache").get(&(m, order)) {
        return t.clone();
    }
    let slots = Layout::get(2 * m, order);
    let real = Layout::get(2 * m, order);
    let mut out = Vec::with_capacity(slots.len());
    for s in 0..slots.len() {
        let e = slots.exponents(s);
        // polynomial in real derivative exponents
        let mut poly: HashMap<Vec<u8>, (f64, f64)> = HashMap::new();
        poly.insert(vec![0u8; 2 * m], (1.0, 0.0));
        for a in 0..m {
            for _ in 0..e[a] {
                poly = apply_factor(&poly, a, -1.0);
            }
            for _ in 0..e[m + a] {
                poly = apply_factor(&poly, a, 1.0);
            }
        }
        let mut terms: Expansion = poly
            .into_iter()
            .filter(|(_, (re, im))| *re != 0.0 || *im != 0.0)
            .map(|(exps, (re, im))| (real.find(&exps).expect("real monomial"), re, im))
            .collect();
        terms.sort_by_key(|t| t.0);
        out.push(terms);
    }
    let t = Arc::new(out);
    cache.lock().expect("cache").insert((m, order), t.clone());
    t
}

/// Multiplies by `½(∂_{x_a} + sign·i ∂_{y_a})`.
fn apply_factor(
    poly: &HashMap<Vec<u8>, (f64, f64)>,
    a: usize,
    sign: f64,
) -> HashMap<Vec<u8>, (f64, f64)> {
    let mut out: HashMap<Vec<u8>, (f64, f64)> = HashMap::new();
    for (exps, &(re, im)) in poly {
        let mut ex = exps.clone();
        ex[2 * a] += 1;
        let e = out.entry(ex).or_insert((0.0, 0.0));
        e.0 += 0.5 * re;
        e.1 += 0.5 * im;
        let mut ey = exps.clone();
        ey[2 * a + 1] += 1;
        // (re + i im)(sign i / 2) = -sign im / 2 + i sign re / 2
        let e = out.entry(ey).or_insert((0.0, 0.0));
        e.0 -= 0.5 * sign * im;
        e.1 += 0.5 * sign * re;
    }
    out
}

impl<T: Scalar> WirtingerTable<T> {
    /// Number of complex variables.
    pub fn m(&self) -> usize {
        self.k + self.l
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    /// Entry for an exponent vector over the `2m` slots.
    pub fn entry(&self, slots: &[u8]) -> Complex<T> {
        match self.layout.find(slots) {
            Some(i) => self.entries[i],
            None => Complex::new(T::zero(), T::zero()),
        }
    }

    /// `∂_{z_{h_1}} ⋯ ∂_{z̄_{a_1}} ⋯ u` for holomorphic indices `holo` and
    /// antiholomorphic indices `anti` (complex variable numbers).
    pub fn get(&self, holo: &[usize], anti: &[usize]) -> Complex<T> {
        let m = self.m();
        let mut e = vec![0u8; 2 * m];
        for &h in holo {
            e[h] += 1;
        }
        for &a in anti {
            e[m + a] += 1;
        }
        self.entry(&e)
    }

    /// `u_{a b̄}`.
    pub fn hess(&self, a: usize, b: usize) -> Complex<T> {
        self.get(&[a], &[b])
    }

    /// Recovers a real partial (exponents over the `2m` real coordinates)
    /// through `∂_x = ∂_z + ∂_z̄` and `∂_y = i(∂_z − ∂_z̄)`.
    pub fn real_partial(&self, real_exps: &[u8]) -> Complex<T> {
        let m = self.m();
        let mut poly: HashMap<Vec<u8>, Complex<f64>> = HashMap::new();
        poly.insert(vec![0u8; 2 * m], Complex::new(1.0, 0.0));
        for a in 0..m {
            for (count, factors) in [
                (real_exps[2 * a], [Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)]),
                (real_exps[2 * a + 1], [Complex::new(0.0, 1.0), Complex::new(0.0, -1.0)]),
            ] {
                for _ in 0..count {
                    let mut next: HashMap<Vec<u8>, Complex<f64>> = HashMap::new();
                    for (e, c) in &poly {
                        for (slot, f) in [(a, factors[0]), (m + a, factors[1])] {
                            let mut e2 = e.clone();
                            e2[slot] += 1;
                            *next.entry(e2).or_insert(Complex::new(0.0, 0.0)) += c * f;
                        }
                    }
                    poly = next;
                }
            }
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for (e, c) in poly {
            let v = self.entry(&e);
            acc += Complex::new(T::c(c.re), T::c(c.im)) * v;
        }
        acc
    }

    /// Wirtinger Hessian as a full `m × m` matrix `[u_{a b̄}]`.
    pub fn hessian(&self) -> Vec<Vec<Complex<T>>> {
        let m = self.m();
        (0..m)
            .map(|a| (0..m).map(|b| self.hess(a, b)).collect())
            .collect()
    }
}
