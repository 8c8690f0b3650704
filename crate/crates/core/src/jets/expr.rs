use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::jet::Jet;
use super::layout::Layout;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Real or complex variable flavor of a specification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Real,
    Complex,
}

/// Univariate analytic atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomFn {
    Sin,
    Cos,
    Exp,
    Log,
    Cosh,
    Sinh,
    Pow,
}

impl AtomFn {
    pub const NAMES: [&'static str; 7] = ["sin", "cos", "exp", "log", "cosh", "sinh", "pow"];

    pub fn name(self) -> &'static str {
        match self {
            AtomFn::Sin => "sin",
            AtomFn::Cos => "cos",
            AtomFn::Exp => "exp",
            AtomFn::Log => "log",
            AtomFn::Cosh => "cosh",
            AtomFn::Sinh => "sinh",
            AtomFn::Pow => "pow",
        }
    }
}

/// Expression tree node.
///
/// `quad` evaluates `½ xᵀ M x + bᵀ x + c`; `atom` evaluates `fn(aᵀ x + c)`
/// (or `(aᵀ x + c)^exponent` for `pow`). Variables are the real spatial
/// coordinates followed by time when the specification is time dependent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Expr {
    Sum {
        terms: Vec<Expr>,
    },
    Product {
        factors: Vec<Expr>,
    },
    Scale {
        factor: f64,
        expr: Box<Expr>,
    },
    Quad {
        matrix: Vec<Vec<f64>>,
        linear: Vec<f64>,
        #[serde(rename = "const")]
        constant: f64,
    },
    Atom {
        #[serde(rename = "fn")]
        func: AtomFn,
        affine: Vec<f64>,
        #[serde(rename = "const")]
        constant: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exponent: Option<f64>,
    },
}

/// Analytic test function on ℝ^k × ℝ^l (real flavor) or ℂ^k × ℂ^l viewed as
/// ℝ^{2k} × ℝ^{2l} (complex flavor), optionally depending on time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressionSpec {
    pub k: usize,
    pub l: usize,
    pub flavor: Flavor,
    #[serde(default)]
    pub time_dependent: bool,
    pub expr: Expr,
}

/// Highest derivative order carried by jets built from specifications.
pub const JET_ORDER: usize = 4;

impl Expr {
    pub fn sum(terms: Vec<Expr>) -> Expr {
        Expr::Sum { terms }
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        Expr::Product { factors }
    }

    pub fn scale(factor: f64, expr: Expr) -> Expr {
        Expr::Scale {
            factor,
            expr: Box::new(expr),
        }
    }

    pub fn atom(func: AtomFn, affine: Vec<f64>, constant: f64) -> Expr {
        Expr::Atom {
            func,
            affine,
            constant,
            exponent: None,
        }
    }

    pub fn pow(affine: Vec<f64>, constant: f64, exponent: f64) -> Expr {
        Expr::Atom {
            func: AtomFn::Pow,
            affine,
            constant,
            exponent: Some(exponent),
        }
    }

    pub fn quad(matrix: Vec<Vec<f64>>, linear: Vec<f64>, constant: f64) -> Expr {
        Expr::Quad {
            matrix,
            linear,
            constant,
        }
    }

    /// Diagonal quadratic `½ Σ d_i x_i²`.
    pub fn diag_quad(diag: &[f64]) -> Expr {
        let n = diag.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
            .collect();
        Expr::quad(matrix, vec![0.0; n], 0.0)
    }

    pub fn constant(nvars: usize, c: f64) -> Expr {
        Expr::quad(vec![vec![0.0; nvars]; nvars], vec![0.0; nvars], c)
    }

    fn check(&self, nvars: usize, path: &str) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidSpec(format!("{path}: {what}")));
        match self {
            Expr::Sum { terms } => {
                for (i, t) in terms.iter().enumerate() {
                    t.check(nvars, &format!("{path}.terms[{i}]"))?;
                }
            }
            Expr::Product { factors } => {
                if factors.is_empty() {
                    return bad("product without factors");
                }
                for (i, t) in factors.iter().enumerate() {
                    t.check(nvars, &format!("{path}.factors[{i}]"))?;
                }
            }
            Expr::Scale { factor, expr } => {
                if !factor.is_finite() {
                    return bad("non-finite factor");
                }
                expr.check(nvars, &format!("{path}.expr"))?;
            }
            Expr::Quad {
                matrix,
                linear,
                constant,
            } => {
                if matrix.len() != nvars || matrix.iter().any(|r| r.len() != nvars) {
                    return bad(&format!("matrix must be {nvars}x{nvars}"));
                }
                if linear.len() != nvars {
                    return bad(&format!("linear must have length {nvars}"));
                }
                for i in 0..nvars {
                    for j in 0..nvars {
                        if matrix[i][j] != matrix[j][i] {
                            return bad("matrix must be symmetric");
                        }
                    }
                }
                let finite = matrix.iter().flatten().chain(linear).all(|v| v.is_finite());
                if !finite || !constant.is_finite() {
                    return bad("non-finite coefficient");
                }
            }
            Expr::Atom {
                func,
                affine,
                constant,
                exponent,
            } => {
                if affine.len() != nvars {
                    return bad(&format!("affine must have length {nvars}"));
                }
                if !affine.iter().all(|v| v.is_finite()) || !constant.is_finite() {
                    return bad("non-finite coefficient");
                }
                match (func, exponent) {
                    (AtomFn::Pow, None) => return bad("pow requires an exponent"),
                    (AtomFn::Pow, Some(p)) if !p.is_finite() => return bad("non-finite exponent"),
                    (f, Some(_)) if *f != AtomFn::Pow => return bad("exponent only valid for pow"),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    fn jet<T: Scalar>(&self, layout: &Arc<Layout>, x: &[T]) -> Result<Jet<T>> {
        Ok(match self {
            Expr::Sum { terms } => {
                let mut acc = Jet::constant_in(layout, T::zero());
                for t in terms {
                    acc = &acc + &t.jet(layout, x)?;
                }
                acc
            }
            Expr::Product { factors } => {
                let mut acc = factors[0].jet(layout, x)?;
                for f in &factors[1..] {
                    acc = &acc * &f.jet(layout, x)?;
                }
                acc
            }
            Expr::Scale { factor, expr } => expr.jet(layout, x)?.scale_by(T::c(*factor)),
            Expr::Quad {
                matrix,
                linear,
                constant,
            } => quad_jet(layout, x, matrix, linear, *constant),
            Expr::Atom {
                func,
                affine,
                constant,
                exponent,
            } => {
                let a: Vec<T> = affine.iter().map(|&v| T::c(v)).collect();
                let s0 = T::c(*constant) + a.iter().zip(x).map(|(&ai, &xi)| ai * xi).sum::<T>();
                check_domain(*func, *exponent, s0)?;
                let s = Jet::affine(layout, s0, &a);
                match func {
                    AtomFn::Sin => s.sin(),
                    AtomFn::Cos => s.cos(),
                    AtomFn::Exp => s.exp(),
                    AtomFn::Log => s.ln(),
                    AtomFn::Cosh => s.cosh(),
                    AtomFn::Sinh => s.sinh(),
                    AtomFn::Pow => s.powf(T::c(exponent.unwrap_or(1.0))),
                }
            }
        })
    }

    fn value<T: Scalar>(&self, x: &[T]) -> Result<T> {
        Ok(match self {
            Expr::Sum { terms } => {
                let mut acc = T::zero();
                for t in terms {
                    acc += t.value(x)?;
                }
                acc
            }
            Expr::Product { factors } => {
                let mut acc = T::one();
                for f in factors {
                    acc *= f.value(x)?;
                }
                acc
            }
            Expr::Scale { factor, expr } => T::c(*factor) * expr.value(x)?,
            Expr::Quad {
                matrix,
                linear,
                constant,
            } => {
                let mut v = T::c(*constant);
                for i in 0..x.len() {
                    v += T::c(linear[i]) * x[i];
                    for j in 0..x.len() {
                        v += T::c(0.5 * matrix[i][j]) * x[i] * x[j];
                    }
                }
                v
            }
            Expr::Atom {
                func,
                affine,
                constant,
                exponent,
            } => {
                let s = T::c(*constant)
                    + affine.iter().zip(x).map(|(&a, &xi)| T::c(a) * xi).sum::<T>();
                check_domain(*func, *exponent, s)?;
                match func {
                    AtomFn::Sin => s.sin(),
                    AtomFn::Cos => s.cos(),
                    AtomFn::Exp => s.exp(),
                    AtomFn::Log => s.ln(),
                    AtomFn::Cosh => s.cosh(),
                    AtomFn::Sinh => s.sinh(),
                    AtomFn::Pow => s.powf(T::c(exponent.unwrap_or(1.0))),
                }
            }
        })
    }

    /// Rewrites the expression under the linear substitution
    /// `x_old[i] = scale[i] · x_new[map[i]]` into `new_nvars` variables.
    pub fn substitute(&self, new_nvars: usize, map: &[usize], scale: &[f64]) -> Expr {
        match self {
            Expr::Sum { terms } => Expr::sum(
                terms
                    .iter()
                    .map(|t| t.substitute(new_nvars, map, scale))
                    .collect(),
            ),
            Expr::Product { factors } => Expr::product(
                factors
                    .iter()
                    .map(|t| t.substitute(new_nvars, map, scale))
                    .collect(),
            ),
            Expr::Scale { factor, expr } => {
                Expr::scale(*factor, expr.substitute(new_nvars, map, scale))
            }
            Expr::Quad {
                matrix,
                linear,
                constant,
            } => {
                let mut m = vec![vec![0.0; new_nvars]; new_nvars];
                let mut b = vec![0.0; new_nvars];
                for i in 0..matrix.len() {
                    b[map[i]] += linear[i] * scale[i];
                    for j in 0..matrix.len() {
                        m[map[i]][map[j]] += matrix[i][j] * scale[i] * scale[j];
                    }
                }
                Expr::quad(m, b, *constant)
            }
            Expr::Atom {
                func,
                affine,
                constant,
                exponent,
            } => {
                let mut a = vec![0.0; new_nvars];
                for i in 0..affine.len() {
                    a[map[i]] += affine[i] * scale[i];
                }
                Expr::Atom {
                    func: *func,
                    affine: a,
                    constant: *constant,
                    exponent: *exponent,
                }
            }
        }
    }

    /// Shifts the argument: the result evaluates `self(x + shift)`.
    pub fn translate(&self, shift: &[f64]) -> Expr {
        match self {
            Expr::Sum { terms } => Expr::sum(terms.iter().map(|t| t.translate(shift)).collect()),
            Expr::Product { factors } => {
                Expr::product(factors.iter().map(|t| t.translate(shift)).collect())
            }
            Expr::Scale { factor, expr } => Expr::scale(*factor, expr.translate(shift)),
            Expr::Quad {
                matrix,
                linear,
                constant,
            } => {
                let n = shift.len();
                let ms: Vec<f64> = (0..n)
                    .map(|i| (0..n).map(|j| matrix[i][j] * shift[j]).sum())
                    .collect();
                let b = (0..n).map(|i| linear[i] + ms[i]).collect();
                let c = constant
                    + (0..n)
                        .map(|i| 0.5 * shift[i] * ms[i] + linear[i] * shift[i])
                        .sum::<f64>();
                Expr::quad(matrix.clone(), b, c)
            }
            Expr::Atom {
                func,
                affine,
                constant,
                exponent,
            } => Expr::Atom {
                func: *func,
                affine: affine.clone(),
                constant: constant + affine.iter().zip(shift).map(|(a, s)| a * s).sum::<f64>(),
                exponent: *exponent,
            },
        }
    }
}

fn check_domain<T: Scalar>(func: AtomFn, exponent: Option<f64>, s: T) -> Result<()> {
    let bad = || {
        Err(Error::DomainViolation {
            atom: func.name(),
            argument: s.to_f64_lossy(),
        })
    };
    if !s.is_finite() {
        return bad();
    }
    match func {
        AtomFn::Log if s <= T::zero() => bad(),
        AtomFn::Pow => {
            let p = exponent.unwrap_or(1.0);
            let integer = p.fract() == 0.0;
            if (integer && p < 0.0 && s == T::zero()) || (!integer && s <= T::zero()) {
                bad()
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

fn quad_jet<T: Scalar>(
    layout: &Arc<Layout>,
    x: &[T],
    matrix: &[Vec<f64>],
    linear: &[f64],
    constant: f64,
) -> Jet<T> {
    let n = x.len();
    let m = |i: usize, j: usize| T::c(matrix[i][j]);
    let mx: Vec<T> = (0..n)
        .map(|i| (0..n).map(|j| m(i, j) * x[j]).sum())
        .collect();
    let mut c0 = T::c(constant);
    for i in 0..n {
        c0 += T::c(0.5) * x[i] * mx[i] + T::c(linear[i]) * x[i];
    }
    let mut jet = Jet::constant_in(layout, c0);
    if layout.order() == 0 {
        return jet;
    }
    let coeffs = jet.coeffs_mut();
    for i in 0..n {
        coeffs[1 + i] = mx[i] + T::c(linear[i]);
    }
    if layout.order() >= 2 {
        for i in 0..n {
            for j in i..n {
                let idx = layout.find_multi(&[i, j]).expect("quadratic monomial");
                coeffs[idx] = if i == j {
                    T::c(0.5) * m(i, i)
                } else {
                    m(i, j)
                };
            }
        }
    }
    jet
}

impl ExpressionSpec {
    pub fn new(k: usize, l: usize, flavor: Flavor, time_dependent: bool, expr: Expr) -> Result<Self> {
        let s = ExpressionSpec {
            k,
            l,
            flavor,
            time_dependent,
            expr,
        };
        s.validate()?;
        Ok(s)
    }

    /// Real spatial dimension.
    pub fn dim(&self) -> usize {
        match self.flavor {
            Flavor::Real => self.k + self.l,
            Flavor::Complex => 2 * (self.k + self.l),
        }
    }

    /// Number of expression variables (space plus optional time).
    pub fn nvars(&self) -> usize {
        self.dim() + usize::from(self.time_dependent)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.l == 0 {
            return Err(Error::InvalidSpec("k and l must be positive".into()));
        }
        self.expr.check(self.nvars(), "expr")
    }

    fn full_point<T: Scalar>(&self, point: &[T], time: T) -> Result<Vec<T>> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "evaluation point",
                expected: self.dim(),
                found: point.len(),
            });
        }
        let mut x = point.to_vec();
        if self.time_dependent {
            x.push(time);
        }
        Ok(x)
    }

    /// Scalar value at a point and time.
    pub fn value<T: Scalar>(&self, point: &[T], time: T) -> Result<T> {
        let x = self.full_point(point, time)?;
        self.expr.value(&x)
    }

    /// Taylor jet over all variables (space, then time if present).
    pub fn raw_jet<T: Scalar>(&self, point: &[T], time: T, order: usize) -> Result<Jet<T>> {
        let x = self.full_point(point, time)?;
        let layout = Layout::get(x.len(), order);
        self.expr.jet(&layout, &x)
    }

    /// Same function with the given constant added to the time dependence:
    /// `u(x, t) + rate · t`.
    pub fn with_time_drift(&self, rate: f64) -> ExpressionSpec {
        let n = self.dim();
        let mut map: Vec<usize> = (0..n).collect();
        let mut scale = vec![1.0; n];
        if self.time_dependent {
            map.push(n);
            scale.push(1.0);
        }
        let base = self.expr.substitute(n + 1, &map, &scale);
        let mut lin = vec![0.0; n + 1];
        lin[n] = rate;
        let drift = Expr::quad(vec![vec![0.0; n + 1]; n + 1], lin, 0.0);
        ExpressionSpec {
            k: self.k,
            l: self.l,
            flavor: self.flavor,
            time_dependent: true,
            expr: Expr::sum(vec![base, drift]),
        }
    }

    /// Canonical JSON text.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specification serializes")
    }

    /// Parses JSON text, distinguishing unknown atoms from other errors.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(parse_error)?;
        if let Some(e) = find_unknown_atom(&value, "$") {
            return Err(e);
        }
        let spec: ExpressionSpec = serde_json::from_str(text).map_err(parse_error)?;
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn find_unknown_atom(v: &Value, path: &str) -> Option<Error> {
    match v {
        Value::Object(map) => {
            if let Some(Value::String(name)) = map.get("fn") {
                if !AtomFn::NAMES.contains(&name.as_str()) {
                    return Some(Error::UnknownAtom {
                        name: name.clone(),
                        path: path.to_string(),
                    });
                }
            }
            map.iter()
                .find_map(|(k, child)| find_unknown_atom(child, &format!("{path}.{k}")))
        }
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, child)| find_unknown_atom(child, &format!("{path}[{i}]"))),
        _ => None,
    }
}
