use super::expr::{ExpressionSpec, Flavor, JET_ORDER};
use super::jet::Jet;
use super::layout::Layout;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Order of the spatial jets carried for `∂_t u` and `∂_t² u`.
pub const TIME_JET_ORDER: usize = 2;

/// Derivative table of `u` at one space-time point.
///
/// Spatial partials go to total order 4; the first and second time
/// derivatives are carried as spatial jets of order 2.
#[derive(Clone, Debug)]
pub struct SpaceTimeJet<T> {
    pub k: usize,
    pub l: usize,
    pub flavor: Flavor,
    pub point: Vec<T>,
    pub time: T,
    spatial: Jet<T>,
    temporal: [Jet<T>; 2],
}

/// Evaluates the full derivative table of `spec` at `(point, time)`.
pub fn evaluate_jet<T: Scalar>(spec: &ExpressionSpec, point: &[T], time: T) -> Result<SpaceTimeJet<T>> {
    let dim = spec.dim();
    let (spatial, temporal) = if spec.time_dependent {
        let full = spec.raw_jet(point, time, JET_ORDER)?;
        (
            full.last_var_slice(0, JET_ORDER),
            [
                full.last_var_slice(1, TIME_JET_ORDER),
                full.last_var_slice(2, TIME_JET_ORDER),
            ],
        )
    } else {
        let zero = Jet::zero(&Layout::get(dim, TIME_JET_ORDER));
        (spec.raw_jet(point, time, JET_ORDER)?, [zero.clone(), zero])
    };
    Ok(SpaceTimeJet {
        k: spec.k,
        l: spec.l,
        flavor: spec.flavor,
        point: point.to_vec(),
        time,
        spatial,
        temporal,
    })
}

impl<T: Scalar> SpaceTimeJet<T> {
    /// Builds a table directly from a spatial jet (no time dependence).
    pub fn from_spatial(k: usize, l: usize, flavor: Flavor, point: Vec<T>, spatial: Jet<T>) -> Self {
        let dim = spatial.layout().map_or(point.len(), |l| l.nvars());
        let zero = Jet::zero(&Layout::get(dim, TIME_JET_ORDER));
        SpaceTimeJet {
            k,
            l,
            flavor,
            point,
            time: T::zero(),
            spatial,
            temporal: [zero.clone(), zero],
        }
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn value(&self) -> T {
        self.spatial.value()
    }

    pub fn spatial(&self) -> &Jet<T> {
        &self.spatial
    }

    /// Spatial partial along the listed coordinate indices.
    pub fn partial(&self, vars: &[usize]) -> T {
        self.spatial.partial(vars)
    }

    /// `∂_t^m` of a spatial partial; `m ≤ 2`, spatial order ≤ 2.
    pub fn time_partial(&self, m: usize, vars: &[usize]) -> Result<T> {
        match m {
            0 => Ok(self.partial(vars)),
            1 | 2 if vars.len() <= TIME_JET_ORDER => Ok(self.temporal[m - 1].partial(vars)),
            _ => Err(Error::InvalidSpec(format!(
                "time derivative of order {m} with spatial order {} not carried",
                vars.len()
            ))),
        }
    }

    pub fn time_jet(&self, m: usize) -> &Jet<T> {
        &self.temporal[m - 1]
    }

    /// Replaces `∂_t^m u` by a spatially constant value.
    pub fn inject_time_derivative(&mut self, m: usize, value: T) {
        let layout = Layout::get(self.dim(), TIME_JET_ORDER);
        self.temporal[m - 1] = Jet::constant_in(&layout, value);
    }

    /// Real Hessian at the base point.
    pub fn hessian(&self) -> Vec<Vec<T>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.partial(&[i, j])).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::expr::{AtomFn, Expr};

    #[test]
    fn time_slices_of_product() {
        // u = sin(x) e^{2t}
        let e = Expr::product(vec![
            Expr::atom(AtomFn::Sin, vec![1.0, 0.0, 0.0], 0.0),
            Expr::atom(AtomFn::Exp, vec![0.0, 0.0, 2.0], 0.0),
        ]);
        let spec = ExpressionSpec::new(1, 1, Flavor::Real, true, e).unwrap();
        let j = evaluate_jet(&spec, &[0.5_f64, 0.0], 0.25).unwrap();
        let g = (0.5_f64).exp();
        assert!((j.value() - 0.5_f64.sin() * g).abs() < 1e-15);
        let utxx = j.time_partial(1, &[0, 0]).unwrap();
        assert!((utxx + 2.0 * 0.5_f64.sin() * g).abs() < 1e-14);
        let utt = j.time_partial(2, &[]).unwrap();
        assert!((utt - 4.0 * 0.5_f64.sin() * g).abs() < 1e-14);
        assert!(j.time_partial(1, &[0, 0, 0]).is_err());
    }
}
