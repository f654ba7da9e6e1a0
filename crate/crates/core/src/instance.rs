//! Problem data: agents, items, influence weights and externality functions.
//!
//! Agents and items are 0-based. For item `i`, `weight(i, j, k)` is the amount by
//! which agent `j`'s utility is influenced by agent `k` when both hold item `i`.
//! An agent `j` holding item `i` together with the set `S` of agents on that item
//! receives `f_ij(sum_{k in S} weight(i, j, k))`.

mod curvature;

pub use curvature::{beta_curvature, eta, gamma_curvature, BetaCurvature, CurvatureReport};

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance used when checking row sums of fractional allocations and
/// normalized weight rows.
pub const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignRegime {
    PositiveLinear,
    PositiveConvex,
    PositiveConcave,
    NegativeLinear,
}

impl SignRegime {
    pub fn name(self) -> &'static str {
        match self {
            SignRegime::PositiveLinear => "positive-linear",
            SignRegime::PositiveConvex => "positive-convex",
            SignRegime::PositiveConcave => "positive-concave",
            SignRegime::NegativeLinear => "negative-linear",
        }
    }

    pub fn is_positive(self) -> bool {
        !matches!(self, SignRegime::NegativeLinear)
    }
}

/// A nondecreasing externality function with `f(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum ExternalitySpec {
    /// `f(y) = y`
    Linear,
    /// `f(y) = c[0] y + c[1] y^2 + ...`, all coefficients nonnegative.
    Polynomial(Vec<f64>),
    /// `f(y) = y^p` with `p` in `(0, 1]`.
    PowerConcave(f64),
    /// `f(y) = ln(1 + y)`
    LogConcave,
}

impl ExternalitySpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            ExternalitySpec::Linear => "linear",
            ExternalitySpec::Polynomial(_) => "polynomial",
            ExternalitySpec::PowerConcave(_) => "power-concave",
            ExternalitySpec::LogConcave => "log-concave",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExternalitySpec::Polynomial(c) => {
                if c.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(invalid(format!(
                        "polynomial coefficients must be finite and nonnegative, got {c:?}"
                    )));
                }
                Ok(())
            }
            ExternalitySpec::PowerConcave(p) => {
                if !(p.is_finite() && *p > 0.0 && *p <= 1.0) {
                    return Err(invalid(format!(
                        "power exponent must lie in (0, 1], got {p}"
                    )));
                }
                Ok(())
            }
            ExternalitySpec::Linear | ExternalitySpec::LogConcave => Ok(()),
        }
    }

    /// Polynomial degree for the convex families, `None` for strictly concave ones.
    /// The zero polynomial has degree 0.
    pub fn degree(&self) -> Option<usize> {
        match self {
            ExternalitySpec::Linear => Some(1),
            ExternalitySpec::Polynomial(c) => {
                Some(c.iter().rposition(|v| *v != 0.0).map_or(0, |p| p + 1))
            }
            ExternalitySpec::PowerConcave(p) if *p == 1.0 => Some(1),
            _ => None,
        }
    }

    pub fn is_convex(&self) -> bool {
        self.degree().is_some()
    }

    pub fn is_concave(&self) -> bool {
        match self {
            ExternalitySpec::Polynomial(_) => self.degree().is_some_and(|d| d <= 1),
            _ => true,
        }
    }

    /// Polynomial coefficients `c_1..c_d` for the convex families.
    pub fn coefficients(&self) -> Option<Vec<f64>> {
        match self {
            ExternalitySpec::Linear => Some(vec![1.0]),
            ExternalitySpec::Polynomial(c) => Some(c.clone()),
            ExternalitySpec::PowerConcave(p) if *p == 1.0 => Some(vec![1.0]),
            _ => None,
        }
    }

    /// Evaluates without a domain check. `Linear` is the identity on all of the
    /// reals (the negative regime relies on this); other families clamp their
    /// argument at zero.
    #[inline]
    pub fn value(&self, y: f64) -> f64 {
        match self {
            ExternalitySpec::Linear => y,
            ExternalitySpec::Polynomial(c) => {
                let y = y.max(0.0);
                c.iter().rev().fold(0.0, |acc, ci| (acc + ci) * y)
            }
            ExternalitySpec::PowerConcave(p) => y.max(0.0).powf(*p),
            ExternalitySpec::LogConcave => y.max(0.0).ln_1p(),
        }
    }

    /// Right derivative. For `y^p` with `p < 1` the argument is floored at
    /// `DERIVATIVE_FLOOR` so the value stays finite at the origin.
    #[inline]
    pub fn derivative(&self, y: f64) -> f64 {
        const DERIVATIVE_FLOOR: f64 = 1e-9;
        match self {
            ExternalitySpec::Linear => 1.0,
            ExternalitySpec::Polynomial(c) => {
                let y = y.max(0.0);
                c.iter()
                    .enumerate()
                    .rev()
                    .fold(0.0, |acc, (t, ct)| acc * y + (t as f64 + 1.0) * ct)
            }
            ExternalitySpec::PowerConcave(p) => {
                if *p == 1.0 {
                    1.0
                } else {
                    p * y.max(DERIVATIVE_FLOOR).powf(p - 1.0)
                }
            }
            ExternalitySpec::LogConcave => 1.0 / (1.0 + y.max(0.0)),
        }
    }
}

/// Evaluates `f(y)` for `y >= 0`.
pub fn eval_externality(spec: &ExternalitySpec, y: f64) -> Result<f64> {
    if !y.is_finite() || y < 0.0 {
        return Err(Error::Domain(format!(
            "externality argument must be a finite nonnegative real, got {y}"
        )));
    }
    Ok(spec.value(y))
}

/// Integral allocation: `assign[j]` is the item held by agent `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Allocation {
    assign: Vec<usize>,
}

impl Allocation {
    pub fn new(assign: Vec<usize>, m: usize) -> Result<Self> {
        if let Some((j, &i)) = assign.iter().enumerate().find(|(_, &i)| i >= m) {
            return Err(invalid(format!("agent {j} assigned item {i}, but m = {m}")));
        }
        Ok(Allocation { assign })
    }

    pub(crate) fn from_vec_unchecked(assign: Vec<usize>) -> Self {
        Allocation { assign }
    }

    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }

    pub fn item_of(&self, agent: usize) -> usize {
        self.assign[agent]
    }

    /// Agents holding `item`, in increasing order.
    pub fn members(&self, item: usize) -> Vec<usize> {
        self.assign
            .iter()
            .enumerate()
            .filter_map(|(j, &i)| (i == item).then_some(j))
            .collect()
    }

    /// Characteristic `n x m` matrix.
    pub fn to_binary(&self, m: usize) -> Array2<f64> {
        let mut x = Array2::zeros((self.assign.len(), m));
        for (j, &i) in self.assign.iter().enumerate() {
            x[[j, i]] = 1.0;
        }
        x
    }

    pub fn from_binary(x: ArrayView2<'_, f64>) -> Result<Self> {
        let m = x.ncols();
        let mut assign = Vec::with_capacity(x.nrows());
        for (j, row) in x.rows().into_iter().enumerate() {
            if row.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(invalid(format!("row {j} is not binary")));
            }
            let ones: Vec<usize> = (0..m).filter(|&i| row[i] == 1.0).collect();
            if ones.len() != 1 {
                return Err(invalid(format!(
                    "row {j} must contain exactly one 1, found {}",
                    ones.len()
                )));
            }
            assign.push(ones[0]);
        }
        Ok(Allocation { assign })
    }
}

/// Row-stochastic `n x m` matrix; column `i` holds the fractional membership of
/// every agent in item `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalAllocation {
    x: Array2<f64>,
}

impl FractionalAllocation {
    pub fn new(x: Array2<f64>) -> Result<Self> {
        for (j, row) in x.rows().into_iter().enumerate() {
            if row
                .iter()
                .any(|&v| !(-ROW_SUM_TOL..=1.0 + ROW_SUM_TOL).contains(&v))
            {
                return Err(invalid(format!("row {j} has entries outside [0, 1]")));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(invalid(format!("row {j} sums to {s}, expected 1")));
            }
        }
        Ok(FractionalAllocation { x })
    }

    pub fn uniform(n: usize, m: usize) -> Self {
        FractionalAllocation {
            x: Array2::from_elem((n, m), 1.0 / m as f64),
        }
    }

    pub fn from_allocation(alloc: &Allocation, m: usize) -> Self {
        FractionalAllocation {
            x: alloc.to_binary(m),
        }
    }

    pub(crate) fn from_array_unchecked(x: Array2<f64>) -> Self {
        FractionalAllocation { x }
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn m(&self) -> usize {
        self.x.ncols()
    }

    pub fn get(&self, agent: usize, item: usize) -> f64 {
        self.x[[agent, item]]
    }

    pub fn column(&self, item: usize) -> ArrayView1<'_, f64> {
        self.x.column(item)
    }

    pub fn row(&self, agent: usize) -> ArrayView1<'_, f64> {
        self.x.row(agent)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.x
    }

    pub fn is_binary(&self) -> bool {
        self.x.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Row-wise argmax, ties to the lowest item index.
    pub fn row_argmax(&self, agent: usize) -> usize {
        argmax_lowest(self.x.row(agent).iter().copied())
    }
}

pub(crate) fn argmax_lowest(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// A social welfare instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    m: usize,
    weights: Vec<Array2<f64>>,
    /// Indexed by `item * n + agent`.
    externality: Vec<ExternalitySpec>,
    regime: SignRegime,
    diagonally_dominant: bool,
}

impl Instance {
    /// Builds an instance where every `(item, agent)` pair shares one externality.
    pub fn new(
        regime: SignRegime,
        weights: Vec<Array2<f64>>,
        externality: ExternalitySpec,
    ) -> Result<Self> {
        let n = weights.first().map_or(0, |w| w.nrows());
        let specs = vec![externality; n * weights.len()];
        Self::with_externalities(regime, weights, specs)
    }

    /// Builds an instance with one externality per `(item, agent)` pair, laid
    /// out item-major (`specs[item * n + agent]`).
    pub fn with_externalities(
        regime: SignRegime,
        weights: Vec<Array2<f64>>,
        externality: Vec<ExternalitySpec>,
    ) -> Result<Self> {
        let m = weights.len();
        if m == 0 {
            return Err(invalid("instance needs at least one item"));
        }
        let n = weights[0].nrows();
        if n == 0 {
            return Err(invalid("instance needs at least one agent"));
        }
        for (i, w) in weights.iter().enumerate() {
            if w.dim() != (n, n) {
                return Err(invalid(format!(
                    "weight matrix for item {i} has shape {:?}, expected ({n}, {n})",
                    w.dim()
                )));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!(
                    "weight matrix for item {i} has non-finite entries"
                )));
            }
        }
        if externality.len() != n * m {
            return Err(invalid(format!(
                "expected {} externality specs, got {}",
                n * m,
                externality.len()
            )));
        }
        let inst = Instance {
            n,
            m,
            weights,
            externality,
            regime,
            diagonally_dominant: false,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Marks a negative-regime instance as diagonally dominant after checking
    /// that every weight row has a nonnegative sum.
    pub fn with_diagonal_dominance(mut self) -> Result<Self> {
        if self.regime != SignRegime::NegativeLinear {
            return Err(invalid(
                "diagonal dominance applies to the negative-linear regime only",
            ));
        }
        for (i, w) in self.weights.iter().enumerate() {
            for (j, row) in w.rows().into_iter().enumerate() {
                if row.sum() < -ROW_SUM_TOL {
                    return Err(invalid(format!(
                        "item {i} row {j} sums to {}, not diagonally dominant",
                        row.sum()
                    )));
                }
            }
        }
        self.diagonally_dominant = true;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        for spec in &self.externality {
            spec.validate()?;
        }
        let family_ok = |spec: &ExternalitySpec| match self.regime {
            SignRegime::PositiveLinear | SignRegime::NegativeLinear => spec.degree() == Some(1),
            SignRegime::PositiveConvex => spec.is_convex(),
            SignRegime::PositiveConcave => spec.is_concave(),
        };
        if let Some(bad) = self.externality.iter().find(|s| !family_ok(s)) {
            return Err(invalid(format!(
                "{} externality is not allowed in the {} regime",
                bad.family_name(),
                self.regime.name()
            )));
        }
        for (i, w) in self.weights.iter().enumerate() {
            for j in 0..self.n {
                let row = w.row(j);
                match self.regime {
                    SignRegime::NegativeLinear => {
                        if row[j].is_nan() || row[j] <= 0.0 {
                            return Err(invalid(format!(
                                "negative regime needs a positive diagonal, item {i} agent {j} has {}",
                                row[j]
                            )));
                        }
                        if let Some(k) = (0..self.n).find(|&k| k != j && row[k] > 0.0) {
                            return Err(invalid(format!(
                                "negative regime needs nonpositive off-diagonal weights, item {i} ({j}, {k}) = {}",
                                row[k]
                            )));
                        }
                    }
                    _ => {
                        if let Some(k) = (0..self.n).find(|&k| row[k] < 0.0) {
                            return Err(invalid(format!(
                                "positive regime needs nonnegative weights, item {i} ({j}, {k}) = {}",
                                row[k]
                            )));
                        }
                        if self.regime == SignRegime::PositiveConcave
                            && (row.sum() - 1.0).abs() > ROW_SUM_TOL
                        {
                            return Err(invalid(format!(
                                "concave regime needs normalized rows, item {i} row {j} sums to {}",
                                row.sum()
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn regime(&self) -> SignRegime {
        self.regime
    }

    pub fn is_diagonally_dominant(&self) -> bool {
        self.diagonally_dominant
    }

    #[inline]
    pub fn weight(&self, item: usize, agent: usize, other: usize) -> f64 {
        self.weights[item][[agent, other]]
    }

    pub fn weights(&self, item: usize) -> ArrayView2<'_, f64> {
        self.weights[item].view()
    }

    pub fn all_weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    #[inline]
    pub fn externality(&self, item: usize, agent: usize) -> &ExternalitySpec {
        &self.externality[item * self.n + agent]
    }

    pub fn externalities(&self) -> &[ExternalitySpec] {
        &self.externality
    }

    /// The shared externality when every pair uses the same one.
    pub fn uniform_externality(&self) -> Option<&ExternalitySpec> {
        let first = &self.externality[0];
        self.externality.iter().all(|s| s == first).then_some(first)
    }

    /// True when all externalities are linear (the closed-form Lovász regime).
    pub fn is_all_linear(&self) -> bool {
        self.externality.iter().all(|s| s.degree() == Some(1))
    }

    /// Largest polynomial degree over all pairs, `None` if any pair is not convex.
    pub fn max_degree(&self) -> Option<usize> {
        self.externality
            .iter()
            .map(ExternalitySpec::degree)
            .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }

    /// Set value `f_i(S) = sum_{j in S} f_ij(sum_{k in S} a^i_{jk})` for a
    /// membership indicator `in_set` of length `n`.
    pub fn set_value(&self, item: usize, in_set: &[bool]) -> f64 {
        let w = &self.weights[item];
        let mut total = 0.0;
        for j in (0..self.n).filter(|&j| in_set[j]) {
            let row = w.row(j);
            let y: f64 = (0..self.n).filter(|&k| in_set[k]).map(|k| row[k]).sum();
            total += self.externality(item, j).value(y);
        }
        total
    }

    /// `set_value` for a bitmask (bit `j` set means agent `j` is in the set).
    pub fn set_value_mask(&self, item: usize, mask: u64) -> f64 {
        let w = &self.weights[item];
        let mut total = 0.0;
        let mut js = mask;
        while js != 0 {
            let j = js.trailing_zeros() as usize;
            js &= js - 1;
            let row = w.row(j);
            let mut y = 0.0;
            let mut ks = mask;
            while ks != 0 {
                let k = ks.trailing_zeros() as usize;
                ks &= ks - 1;
                y += row[k];
            }
            total += self.externality(item, j).value(y);
        }
        total
    }

    pub(crate) fn check_allocation(&self, alloc: &Allocation) -> Result<()> {
        if alloc.n() != self.n {
            return Err(invalid(format!(
                "allocation covers {} agents, instance has {}",
                alloc.n(),
                self.n
            )));
        }
        if let Some(&i) = alloc.assign().iter().find(|&&i| i >= self.m) {
            return Err(invalid(format!(
                "allocation uses item {i}, instance has {}",
                self.m
            )));
        }
        Ok(())
    }

    pub(crate) fn check_shape(&self, x: ArrayView2<'_, f64>) -> Result<()> {
        if x.dim() != (self.n, self.m) {
            return Err(invalid(format!(
                "matrix has shape {:?}, instance needs ({}, {})",
                x.dim(),
                self.n,
                self.m
            )));
        }
        Ok(())
    }
}

/// Total welfare `sum_i sum_{j in S_i} f_ij(sum_{k in S_i} a^i_{jk})`.
pub fn welfare(inst: &Instance, alloc: &Allocation) -> Result<f64> {
    inst.check_allocation(alloc)?;
    Ok(welfare_unchecked(inst, alloc.assign()))
}

/// Welfare of a (possibly partial) assignment; `None` entries hold no item.
pub fn partial_welfare(inst: &Instance, assign: &[Option<usize>]) -> f64 {
    let mut total = 0.0;
    for (j, item) in assign.iter().enumerate() {
        let Some(i) = *item else { continue };
        let row = inst.weights[i].row(j);
        let y: f64 = assign
            .iter()
            .enumerate()
            .filter(|(_, other)| **other == Some(i))
            .map(|(k, _)| row[k])
            .sum();
        total += inst.externality(i, j).value(y);
    }
    total
}

pub(crate) fn welfare_unchecked(inst: &Instance, assign: &[usize]) -> f64 {
    let mut total = 0.0;
    for (j, &i) in assign.iter().enumerate() {
        let row = inst.weights[i].row(j);
        let y: f64 = assign
            .iter()
            .enumerate()
            .filter(|(_, &other)| other == i)
            .map(|(k, _)| row[k])
            .sum();
        total += inst.externality(i, j).value(y);
    }
    total
}

fn check_characteristic(inst: &Instance, x: ArrayView2<'_, f64>) -> Result<()> {
    inst.check_shape(x)?;
    Allocation::from_binary(x).map(|_| ())
}

/// `sum_{i,j} x_ji f_ij(sum_k a^i_{jk} x_ki)` at a characteristic matrix.
pub fn welfare_binary(inst: &Instance, x: ArrayView2<'_, f64>) -> Result<f64> {
    check_characteristic(inst, x)?;
    let mut total = 0.0;
    for i in 0..inst.m {
        let col = x.column(i);
        let w = &inst.weights[i];
        for j in 0..inst.n {
            let y = w.row(j).dot(&col);
            total += col[j] * inst.externality(i, j).value(y);
        }
    }
    Ok(total)
}

/// `sum_{i,j} f_ij(sum_k a^i_{jk} x_ji x_ki)` at a characteristic matrix.
pub fn welfare_binary_product_form(inst: &Instance, x: ArrayView2<'_, f64>) -> Result<f64> {
    check_characteristic(inst, x)?;
    let mut total = 0.0;
    for i in 0..inst.m {
        let col = x.column(i);
        let w = &inst.weights[i];
        for j in 0..inst.n {
            let y: f64 = (0..inst.n).map(|k| w[[j, k]] * col[j] * col[k]).sum();
            total += inst.externality(i, j).value(y);
        }
    }
    Ok(total)
}

/// Converts nested `[item][agent][other]` vectors into weight matrices.
pub fn weights_from_nested(nested: &[Vec<Vec<f64>>]) -> Result<Vec<Array2<f64>>> {
    nested
        .iter()
        .enumerate()
        .map(|(i, rows)| {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(invalid(format!("weight matrix for item {i} is not square")));
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            Array2::from_shape_vec((n, n), flat).map_err(|e| invalid(e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn two_by_two() -> Instance {
        Instance::new(
            SignRegime::PositiveLinear,
            vec![
                array![[1.0, 2.0], [0.0, 1.0]],
                array![[2.0, 0.0], [1.0, 3.0]],
            ],
            ExternalitySpec::Linear,
        )
        .unwrap()
    }

    #[test]
    fn single_item_grand_coalition() {
        let inst = Instance::new(
            SignRegime::PositiveLinear,
            vec![array![[1.0, 2.0], [0.0, 1.0]]],
            ExternalitySpec::Linear,
        )
        .unwrap();
        let alloc = Allocation::new(vec![0, 0], 1).unwrap();
        assert_eq!(welfare(&inst, &alloc).unwrap(), 4.0);
        let x = alloc.to_binary(1);
        assert_eq!(welfare_binary(&inst, x.view()).unwrap(), 4.0);
    }

    #[test]
    fn two_by_two_allocations() {
        let inst = two_by_two();
        // (0,1): agent 0 alone on item 0 -> 1, agent 1 alone on item 1 -> 3
        // (1,0): agent 0 alone on item 1 -> 2, agent 1 alone on item 0 -> 1
        let got: Vec<f64> = [[0, 0], [0, 1], [1, 0], [1, 1]]
            .iter()
            .map(|a| welfare(&inst, &Allocation::new(a.to_vec(), 2).unwrap()).unwrap())
            .collect();
        assert_eq!(got, vec![4.0, 4.0, 3.0, 6.0]);
    }

    #[test]
    fn zero_weights_give_zero() {
        let inst = Instance::new(
            SignRegime::PositiveLinear,
            vec![Array2::zeros((3, 3)); 2],
            ExternalitySpec::Linear,
        )
        .unwrap();
        let alloc = Allocation::new(vec![0, 1, 1], 2).unwrap();
        assert_eq!(welfare(&inst, &alloc).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let inst = two_by_two();
        let alloc = Allocation::new(vec![0, 0, 1], 2).unwrap();
        assert!(matches!(
            welfare(&inst, &alloc),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn binary_form_rejects_bad_rows() {
        let inst = two_by_two();
        let zero_row = array![[1.0, 0.0], [0.0, 0.0]];
        assert!(welfare_binary(&inst, zero_row.view()).is_err());
        let frac = array![[0.5, 0.5], [0.0, 1.0]];
        assert!(welfare_binary(&inst, frac.view()).is_err());
        let two_ones = array![[1.0, 1.0], [0.0, 1.0]];
        assert!(welfare_binary_product_form(&inst, two_ones.view()).is_err());
    }

    #[test]
    fn externality_examples() {
        let sq = ExternalitySpec::Polynomial(vec![0.0, 1.0]);
        assert_eq!(eval_externality(&sq, 3.0).unwrap(), 9.0);
        assert_eq!(
            eval_externality(&ExternalitySpec::PowerConcave(0.5), 4.0).unwrap(),
            2.0
        );
        assert_eq!(
            eval_externality(&ExternalitySpec::Linear, 7.25).unwrap(),
            7.25
        );
        assert!(matches!(
            eval_externality(&ExternalitySpec::LogConcave, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let specs = [
            ExternalitySpec::Linear,
            ExternalitySpec::Polynomial(vec![0.5, 0.0, 2.0]),
            ExternalitySpec::PowerConcave(0.3),
            ExternalitySpec::LogConcave,
        ];
        for spec in &specs {
            for &y in &[0.2, 0.7, 1.5] {
                let h = 1e-6;
                let fd = (spec.value(y + h) - spec.value(y - h)) / (2.0 * h);
                assert!((fd - spec.derivative(y)).abs() < 1e-6, "{spec:?} at {y}");
            }
        }
    }

    #[test]
    fn regime_invariants_are_enforced() {
        let neg = Instance::new(
            SignRegime::NegativeLinear,
            vec![array![[1.0, 0.5], [-1.0, 1.0]]],
            ExternalitySpec::Linear,
        );
        assert!(neg.is_err());
        let concave = Instance::new(
            SignRegime::PositiveConcave,
            vec![array![[0.5, 0.4], [0.5, 0.5]]],
            ExternalitySpec::LogConcave,
        );
        assert!(concave.is_err());
        let wrong_family = Instance::new(
            SignRegime::PositiveConvex,
            vec![array![[0.5, 0.5], [0.5, 0.5]]],
            ExternalitySpec::LogConcave,
        );
        assert!(wrong_family.is_err());
        let dd = Instance::new(
            SignRegime::NegativeLinear,
            vec![array![[1.0, -2.0], [-0.5, 1.0]]],
            ExternalitySpec::Linear,
        )
        .unwrap();
        assert!(dd.with_diagonal_dominance().is_err());
    }

    #[test]
    fn allocation_round_trips_through_binary() {
        let alloc = Allocation::new(vec![2, 0, 1, 2], 3).unwrap();
        let x = alloc.to_binary(3);
        assert_eq!(Allocation::from_binary(x.view()).unwrap(), alloc);
        assert_eq!(alloc.members(2), vec![0, 3]);
    }

    fn small_instance() -> impl Strategy<Value = (Instance, Vec<usize>)> {
        (1usize..6, 1usize..4).prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(0.0f64..2.0, n * n * m),
                proptest::collection::vec(0..m, n),
                0usize..3,
            )
                .prop_map(move |(w, assign, fam)| {
                    let weights = (0..m)
                        .map(|i| {
                            Array2::from_shape_vec((n, n), w[i * n * n..(i + 1) * n * n].to_vec())
                                .unwrap()
                        })
                        .collect();
                    let spec = match fam {
                        0 => ExternalitySpec::Linear,
                        1 => ExternalitySpec::Polynomial(vec![0.3, 0.0, 1.1]),
                        _ => ExternalitySpec::Polynomial(vec![0.0, 2.0]),
                    };
                    (
                        Instance::new(SignRegime::PositiveConvex, weights, spec).unwrap(),
                        assign,
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn both_integer_forms_agree((inst, assign) in small_instance()) {
            let alloc = Allocation::new(assign, inst.m()).unwrap();
            let x = alloc.to_binary(inst.m());
            let direct = welfare(&inst, &alloc).unwrap();
            let ip = welfare_binary(&inst, x.view()).unwrap();
            let product = welfare_binary_product_form(&inst, x.view()).unwrap();
            prop_assert!((direct - ip).abs() <= 1e-9 * (1.0 + direct.abs()));
            prop_assert!((direct - product).abs() <= 1e-9 * (1.0 + direct.abs()));
        }

        #[test]
        fn welfare_is_monotone_in_weights(
            (inst, assign) in small_instance(),
            bump in 0.0f64..3.0,
            pick in 0usize..1000,
        ) {
            let alloc = Allocation::new(assign, inst.m()).unwrap();
            let before = welfare(&inst, &alloc).unwrap();
            let (n, m) = (inst.n(), inst.m());
            let (i, j, k) = (pick % m, (pick / m) % n, (pick / (m * n)) % n);
            let mut weights = inst.all_weights().to_vec();
            weights[i][[j, k]] += bump;
            let bumped = Instance::with_externalities(
                inst.regime(), weights, inst.externalities().to_vec()).unwrap();
            prop_assert!(welfare(&bumped, &alloc).unwrap() >= before - 1e-12);
        }

        #[test]
        fn externalities_vanish_at_zero_and_are_monotone(p in 0.05f64..=1.0, c in proptest::collection::vec(0.0f64..3.0, 1..4)) {
            for spec in [
                ExternalitySpec::Linear,
                ExternalitySpec::Polynomial(c.clone()),
                ExternalitySpec::PowerConcave(p),
                ExternalitySpec::LogConcave,
            ] {
                prop_assert_eq!(eval_externality(&spec, 0.0).unwrap(), 0.0);
                let mut prev = 0.0;
                for t in 1..=100 {
                    let v = eval_externality(&spec, t as f64 * 0.05).unwrap();
                    prop_assert!(v >= prev);
                    prev = v;
                }
            }
        }
    }
}
