use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Monomial bookkeeping for truncated Taylor polynomials in `nvars`
/// variables up to total degree `order`.
///
/// Monomials are ordered by degree and lexicographically within a degree, so
/// the layout of order `r - 1` is a prefix of the layout of order `r`.
#[derive(Debug)]
pub struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<u8>,
    degree: Vec<u8>,
    degree_start: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    mul: Vec<(u32, u32, u32)>,
    deriv: Vec<Vec<(u32, u32, u8)>>,
    factorial: Vec<f64>,
}

fn push_degree(nvars: usize, d: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == nvars {
        prefix.push(d as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=d).rev() {
        prefix.push(first as u8);
        push_degree(nvars, d - first, prefix, out);
        prefix.pop();
    }
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Layout {
        let mut monos: Vec<Vec<u8>> = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(monos.len());
            if nvars == 0 {
                if d == 0 {
                    monos.push(Vec::new());
                }
            } else {
                push_degree(nvars, d, &mut Vec::new(), &mut monos);
            }
        }
        degree_start.push(monos.len());

        let index: HashMap<Vec<u8>, usize> =
            monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let degree: Vec<u8> = monos
            .iter()
            .map(|m| m.iter().map(|&e| e as usize).sum::<usize>() as u8)
            .collect();

        let size = monos.len();
        let mut mul = Vec::new();
        let mut scratch = vec![0u8; nvars];
        for i in 0..size {
            for j in 0..size {
                if degree[i] as usize + degree[j] as usize > order {
                    continue;
                }
                for v in 0..nvars {
                    scratch[v] = monos[i][v] + monos[j][v];
                }
                let k = index[&scratch];
                mul.push((i as u32, j as u32, k as u32));
            }
        }

        let mut deriv = vec![Vec::new(); nvars];
        for (src, m) in monos.iter().enumerate() {
            for v in 0..nvars {
                if m[v] == 0 {
                    continue;
                }
                scratch.copy_from_slice(m);
                scratch[v] -= 1;
                let dst = index[&scratch];
                deriv[v].push((src as u32, dst as u32, m[v]));
            }
        }

        let fact = |n: u8| (1..=n as u64).product::<u64>() as f64;
        let factorial = monos
            .iter()
            .map(|m| m.iter().map(|&e| fact(e)).product())
            .collect();

        Layout {
            nvars,
            order,
            exps: monos.concat(),
            degree,
            degree_start,
            index,
            mul,
            deriv,
            factorial,
        }
    }

    /// Shared layout for the given shape; built once per process.
    pub fn get(nvars: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(Layout::build(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of monomials.
    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    /// Number of monomials of degree at most `order`.
    pub fn len_to_order(&self, order: usize) -> usize {
        self.degree_start[order.min(self.order) + 1]
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exps[i * self.nvars..(i + 1) * self.nvars]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degree[i] as usize
    }

    /// Product of factorials of the exponents of monomial `i`.
    pub fn factorial(&self, i: usize) -> f64 {
        self.factorial[i]
    }

    pub fn find(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// Index of the monomial obtained by differentiating along each listed
    /// variable (repetitions allowed).
    pub fn find_multi(&self, vars: &[usize]) -> Option<usize> {
        let mut e = vec![0u8; self.nvars];
        for &v in vars {
            if v >= self.nvars {
                return None;
            }
            e[v] += 1;
        }
        self.find(&e)
    }

    pub(crate) fn mul_table(&self) -> &[(u32, u32, u32)] {
        &self.mul
    }

    pub(crate) fn deriv_table(&self, var: usize) -> &[(u32, u32, u8)] {
        &self.deriv[var]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts_match_binomials() {
        let l = Layout::get(3, 4);
        assert_eq!(l.len(), 35);
        assert_eq!(l.len_to_order(2), 10);
        assert_eq!(l.exponents(0), &[0, 0, 0]);
    }

    #[test]
    fn lower_order_layout_is_prefix() {
        let hi = Layout::get(4, 4);
        let lo = Layout::get(4, 3);
        for i in 0..lo.len() {
            assert_eq!(hi.exponents(i), lo.exponents(i));
        }
    }
}
