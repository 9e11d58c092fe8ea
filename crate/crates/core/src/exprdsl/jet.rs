//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A jet of order `K` over `m` variables stores the coefficients
//! `c_α = ∂^α f / α!` for every multi-index `|α| ≤ K`. Arithmetic is exact up
//! to floating-point rounding, so arbitrarily high mixed partials of an
//! expression come out without finite differences. Monomials are enumerated
//! by total degree, so a jet of lower order is a prefix of the same layout.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::scalar::Scalar;

const NONE: u32 = u32::MAX;

/// Monomial enumeration and product table for `(vars, max_order)`.
#[derive(Debug)]
pub struct JetLayout {
    vars: usize,
    max_order: usize,
    exponents: Vec<u8>,
    /// `degree_end[d]` = number of monomials of degree `≤ d`.
    degree_end: Vec<usize>,
    /// `(a, b, c)` with monomial `a · b = c`, sorted by degree of `c`.
    products: Vec<[u32; 3]>,
    product_end: Vec<usize>,
    /// `raise[idx * vars + v]` = index of monomial `idx · z_v`.
    raise: Vec<u32>,
    lookup: HashMap<Vec<u8>, u32>,
}

impl JetLayout {
    pub fn new(vars: usize, max_order: usize) -> Self {
        assert!(max_order < u8::MAX as usize);
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut degree_end = Vec::with_capacity(max_order + 1);
        for d in 0..=max_order {
            let mut current = vec![0u8; vars];
            push_monomials(&mut exps, &mut current, 0, d);
            degree_end.push(exps.len());
        }
        let lookup: HashMap<Vec<u8>, u32> = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i as u32))
            .collect();
        let degree: Vec<usize> = exps
            .iter()
            .map(|e| e.iter().map(|&p| p as usize).sum())
            .collect();

        let mut products = Vec::new();
        let mut sum = vec![0u8; vars];
        for (ia, ea) in exps.iter().enumerate() {
            let room = max_order - degree[ia];
            for (ib, eb) in exps[..degree_end[room]].iter().enumerate() {
                for v in 0..vars {
                    sum[v] = ea[v] + eb[v];
                }
                let ic = lookup[&sum];
                products.push([ia as u32, ib as u32, ic]);
            }
        }
        products.sort_by_key(|p| degree[p[2] as usize]);
        let product_end = (0..=max_order)
            .map(|d| products.partition_point(|p| degree[p[2] as usize] <= d))
            .collect();

        let mut raise = vec![NONE; exps.len() * vars];
        for (idx, e) in exps.iter().enumerate() {
            if degree[idx] == max_order {
                continue;
            }
            for v in 0..vars {
                let mut up = e.clone();
                up[v] += 1;
                raise[idx * vars + v] = lookup[&up];
            }
        }

        Self {
            vars,
            max_order,
            exponents: exps.concat(),
            degree_end,
            products,
            product_end,
            raise,
            lookup,
        }
    }

    /// Process-wide cached layout.
    pub fn shared(vars: usize, max_order: usize) -> Arc<JetLayout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((vars, max_order))
            .or_insert_with(|| Arc::new(JetLayout::new(vars, max_order)))
            .clone()
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn len(&self, order: usize) -> usize {
        self.degree_end[order]
    }

    fn exponents(&self, idx: usize) -> &[u8] {
        &self.exponents[idx * self.vars..(idx + 1) * self.vars]
    }

    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        self.lookup.get(exponents).map(|&i| i as usize)
    }
}

fn push_monomials(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, pos: usize, remaining: usize) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u8;
        out.push(current.clone());
        current[pos] = 0;
        return;
    }
    if current.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for p in (0..=remaining).rev() {
        current[pos] = p as u8;
        push_monomials(out, current, pos + 1, remaining - p);
    }
    current[pos] = 0;
}

/// Truncated Taylor polynomial around the evaluation point.
#[derive(Clone, Debug)]
pub struct Jet {
    layout: Arc<JetLayout>,
    order: usize,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(layout: &Arc<JetLayout>, order: usize, value: f64) -> Self {
        assert!(order <= layout.max_order, "jet order exceeds layout");
        let mut coeffs = vec![0.0; layout.len(order)];
        coeffs[0] = value;
        Self {
            layout: layout.clone(),
            order,
            coeffs,
        }
    }

    /// Independent variable `z_var` expanded around `value`.
    pub fn variable(layout: &Arc<JetLayout>, order: usize, var: usize, value: f64) -> Self {
        let mut jet = Self::constant(layout, order, value);
        if order >= 1 {
            let mut e = vec![0u8; layout.vars];
            e[var] = 1;
            let idx = layout.index_of(&e).expect("first-degree monomial");
            jet.coeffs[idx] = 1.0;
        }
        jet
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn jet_order(&self) -> usize {
        self.order
    }

    /// Taylor coefficient `c_α` (zero beyond the truncation order).
    pub fn coefficient(&self, exponents: &[u8]) -> f64 {
        match self.layout.index_of(exponents) {
            Some(i) if i < self.coeffs.len() => self.coeffs[i],
            _ => 0.0,
        }
    }

    /// Mixed partial `∂^α f` at the expansion point.
    pub fn derivative(&self, exponents: &[u8]) -> f64 {
        let factorial: f64 = exponents
            .iter()
            .map(|&p| (1..=p as u64).product::<u64>() as f64)
            .product();
        factorial * self.coefficient(exponents)
    }

    /// `∂f/∂z_var` as a jet of one lower order.
    pub fn partial(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let len = self.layout.len(order);
        let vars = self.layout.vars;
        let mut coeffs = vec![0.0; len];
        for (idx, c) in coeffs.iter_mut().enumerate() {
            let up = self.layout.raise[idx * vars + var] as usize;
            let power = self.layout.exponents(idx)[var] as f64 + 1.0;
            *c = power * self.coeffs[up];
        }
        Jet {
            layout: self.layout.clone(),
            order,
            coeffs,
        }
    }

    fn same_layout(&self, rhs: &Self) {
        debug_assert!(Arc::ptr_eq(&self.layout, &rhs.layout), "jets from different layouts");
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        self.same_layout(rhs);
        let order = self.order.min(rhs.order);
        let len = self.layout.len(order);
        let coeffs = self.coeffs[..len]
            .iter()
            .zip(&rhs.coeffs[..len])
            .map(|(a, b)| f(*a, *b))
            .collect();
        Jet {
            layout: self.layout.clone(),
            order,
            coeffs,
        }
    }
}

impl Scalar for Jet {
    type Shape = (Arc<JetLayout>, usize);

    fn constant(value: f64, shape: &Self::Shape) -> Self {
        Jet::constant(&shape.0, shape.1, value)
    }

    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn order(&self) -> usize {
        self.order
    }

    fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.same_layout(rhs);
        let order = self.order.min(rhs.order);
        let mut coeffs = vec![0.0; self.layout.len(order)];
        for p in &self.layout.products[..self.layout.product_end[order]] {
            let a = self.coeffs[p[0] as usize];
            let b = rhs.coeffs[p[1] as usize];
            coeffs[p[2] as usize] += a * b;
        }
        Jet {
            layout: self.layout.clone(),
            order,
            coeffs,
        }
    }

    fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    fn scale(&self, k: f64) -> Self {
        Jet {
            layout: self.layout.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    fn compose(&self, taylor: &[f64]) -> Self {
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut acc = Jet::constant(&self.layout, self.order, taylor[self.order]);
        for k in (0..self.order).rev() {
            acc = acc.mul(&delta);
            acc.coeffs[0] += taylor[k];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::taylor;

    #[test]
    fn layout_counts_are_binomial() {
        // C(m + K, K) monomials
        let l = JetLayout::new(3, 4);
        assert_eq!(l.len(4), 35);
        assert_eq!(l.len(0), 1);
        assert_eq!(l.len(1), 4);
    }

    #[test]
    fn derivatives_of_a_product() {
        let layout = JetLayout::shared(2, 4);
        let x = Jet::variable(&layout, 4, 0, 2.0);
        let y = Jet::variable(&layout, 4, 1, 3.0);
        // x^3 y^2 at (2, 3)
        let f = x.mul(&x).mul(&x).mul(&y).mul(&y);
        assert_eq!(f.value(), 72.0);
        assert_eq!(f.derivative(&[1, 0]), 3.0 * 4.0 * 9.0);
        assert_eq!(f.derivative(&[2, 1]), 6.0 * 2.0 * 2.0 * 3.0);
        assert_eq!(f.derivative(&[3, 1]), 6.0 * 6.0);
        assert_eq!(f.partial(0).partial(1).value(), 3.0 * 4.0 * 2.0 * 3.0);
    }

    #[test]
    fn composition_matches_closed_form() {
        let layout = JetLayout::shared(1, 4);
        let x = Jet::variable(&layout, 4, 0, 0.3);
        let s = x.compose(&taylor::sin(0.3, 4));
        assert!((s.derivative(&[3]) + 0.3f64.cos()).abs() < 1e-15);
        assert!((s.derivative(&[4]) - 0.3f64.sin()).abs() < 1e-15);
    }
}
