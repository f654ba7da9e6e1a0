//! Exhaustive reference solvers used to verify approximation guarantees at
//! desk scale.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{welfare_unchecked, Allocation, Instance};

/// Largest `m^n` enumerated by [`brute_force`].
pub const MAX_ENUMERATION: u128 = 10_000_000;
/// Largest ground set for the exhaustive set-function checks.
pub const MAX_CHECK_AGENTS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub opt_value: f64,
    pub opt_alloc: Allocation,
    pub enumerated: u64,
}

/// Enumerates all `m^n` allocations. Ties go to the lexicographically smallest
/// assignment vector.
pub fn brute_force(inst: &Instance) -> Result<OracleResult> {
    let (n, m) = (inst.n(), inst.m());
    let total = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > MAX_ENUMERATION {
        return Err(Error::SizeLimit {
            what: "allocation count m^n",
            size: total,
            limit: MAX_ENUMERATION,
        });
    }
    // split on a prefix of the leading agents; each chunk scans its suffixes in
    // lexicographic order and chunks are reduced in prefix order
    let mut prefix_len = 0;
    while prefix_len < n && (m as u64).pow(prefix_len as u32) < 64 {
        prefix_len += 1;
    }
    let prefixes = (m as u64).pow(prefix_len as u32);

    let best = (0..prefixes)
        .into_par_iter()
        .map(|p| {
            let mut assign = vec![0usize; n];
            let mut code = p;
            for slot in assign[..prefix_len].iter_mut().rev() {
                *slot = (code % m as u64) as usize;
                code /= m as u64;
            }
            let mut best_v = f64::NEG_INFINITY;
            let mut best_a = assign.clone();
            loop {
                let v = welfare_unchecked(inst, &assign);
                if v > best_v {
                    best_v = v;
                    best_a.copy_from_slice(&assign);
                }
                if !increment(&mut assign[prefix_len..], m) {
                    break;
                }
            }
            (best_v, best_a)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(None::<(f64, Vec<usize>)>, |acc, cand| match acc {
            Some(cur) if cur.0 >= cand.0 => Some(cur),
            _ => Some(cand),
        })
        .expect("at least one allocation");

    Ok(OracleResult {
        opt_value: best.0,
        opt_alloc: Allocation::new(best.1, m)?,
        enumerated: total as u64,
    })
}

/// Base-`m` increment with the last position least significant. Returns false
/// after wrapping around.
fn increment(digits: &mut [usize], m: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < m {
            return true;
        }
        *d = 0;
    }
    false
}

/// A violated inequality `lhs <= rhs` between the sets `smaller ⊆ larger`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub smaller: Vec<usize>,
    pub larger: Vec<usize>,
    /// The added element for marginal-gain checks.
    pub element: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureCheck {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl StructureCheck {
    fn from_witness(witness: Option<Witness>) -> Self {
        StructureCheck {
            holds: witness.is_none(),
            witness,
        }
    }
}

fn set_values(inst: &Instance, item: usize) -> Result<Vec<f64>> {
    let n = inst.n();
    if n > MAX_CHECK_AGENTS {
        return Err(Error::SizeLimit {
            what: "agent count for exhaustive set-function checks",
            size: n as u128,
            limit: MAX_CHECK_AGENTS as u128,
        });
    }
    if item >= inst.m() {
        return Err(crate::error::invalid(format!(
            "item {item} out of range for m = {}",
            inst.m()
        )));
    }
    Ok((0..1u64 << n)
        .map(|mask| inst.set_value_mask(item, mask))
        .collect())
}

fn members(mask: u64) -> Vec<usize> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

fn violates(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + 1e-9 * (1.0 + lhs.abs() + rhs.abs())
}

/// Scans every nested pair `A ⊆ B` and element `l ∉ B`, calling `test` with the
/// two marginals `(f(A+l) - f(A), f(B+l) - f(B))`.
fn scan_marginals(
    vals: &[f64],
    n: usize,
    mut test: impl FnMut(f64, f64) -> Option<(f64, f64)>,
) -> Option<Witness> {
    let full = (1u64 << n) - 1;
    for b in 0..=full {
        let outside = full & !b;
        let mut a = b;
        loop {
            let mut rest = outside;
            while rest != 0 {
                let l = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let bit = 1u64 << l;
                let da = vals[(a | bit) as usize] - vals[a as usize];
                let db = vals[(b | bit) as usize] - vals[b as usize];
                if let Some((lhs, rhs)) = test(da, db) {
                    return Some(Witness {
                        smaller: members(a),
                        larger: members(b),
                        element: Some(l),
                        lhs,
                        rhs,
                    });
                }
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    None
}

/// Checks `f_i(A+l) - f_i(A) <= f_i(B+l) - f_i(B)` for all `A ⊆ B`, `l ∉ B`.
pub fn check_supermodular(inst: &Instance, item: usize) -> Result<StructureCheck> {
    let vals = set_values(inst, item)?;
    let w = scan_marginals(&vals, inst.n(), |da, db| {
        violates(da, db).then_some((da, db))
    });
    Ok(StructureCheck::from_witness(w))
}

/// Checks `f_i(A+l) - f_i(A) >= f_i(B+l) - f_i(B)` for all `A ⊆ B`, `l ∉ B`.
pub fn check_submodular(inst: &Instance, item: usize) -> Result<StructureCheck> {
    let vals = set_values(inst, item)?;
    let w = scan_marginals(&vals, inst.n(), |da, db| {
        violates(db, da).then_some((db, da))
    });
    Ok(StructureCheck::from_witness(w))
}

/// Checks `f_i(A) <= f_i(B)` for all `A ⊆ B`.
pub fn check_monotone(inst: &Instance, item: usize) -> Result<StructureCheck> {
    let vals = set_values(inst, item)?;
    let full = (1u64 << inst.n()) - 1;
    for b in 0..=full {
        let mut a = b;
        loop {
            let (fa, fb) = (vals[a as usize], vals[b as usize]);
            if violates(fa, fb) {
                return Ok(StructureCheck::from_witness(Some(Witness {
                    smaller: members(a),
                    larger: members(b),
                    element: None,
                    lhs: fa,
                    rhs: fb,
                })));
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    Ok(StructureCheck::from_witness(None))
}
