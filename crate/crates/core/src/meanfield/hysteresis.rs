//! Adiabatic up/down scans that follow one stable branch until it folds.

use super::{solve_steady_states, FixedPoint, MeanFieldError};
use crate::model::{Axis, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub axis_value: f64,
    pub from: f64,
    pub to: f64,
}

/// The branch followed by one scan, stored in scan order.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTrace {
    pub direction: Direction,
    pub axis_values: Vec<f64>,
    pub n_s: Vec<f64>,
    /// True where the followed branch vanished and the scan landed on another.
    pub jumped: Vec<bool>,
}

impl BranchTrace {
    pub fn jumps(&self) -> Vec<Jump> {
        (1..self.n_s.len())
            .filter(|&i| self.jumped[i])
            .map(|i| Jump {
                axis_value: self.axis_values[i],
                from: self.n_s[i - 1],
                to: self.n_s[i],
            })
            .collect()
    }
}

/// Sum of distances when `short` is matched to `long` with the adjacent
/// pair `(k, k+1)` of `long` left out.
fn pair_removed_cost(long: &[f64], short: &[f64], k: usize) -> f64 {
    long.iter()
        .enumerate()
        .filter(|&(i, _)| i != k && i != k + 1)
        .zip(short)
        .map(|((_, a), b)| (a - b).abs())
        .sum()
}

fn best_pair(long: &[f64], short: &[f64]) -> usize {
    (0..long.len() - 1)
        .min_by(|&a, &b| pair_removed_cost(long, short, a).total_cmp(&pair_removed_cost(long, short, b)))
        .unwrap_or(0)
}

/// Index in `new` of the continuation of root `idx` of `old`, or `None` if
/// that root annihilated in a fold.
fn continue_branch(old: &[f64], new: &[f64], idx: usize) -> Option<usize> {
    match old.len() as isize - new.len() as isize {
        0 => Some(idx),
        2 => {
            let k = best_pair(old, new);
            if idx == k || idx == k + 1 {
                None
            } else if idx < k {
                Some(idx)
            } else {
                Some(idx - 2)
            }
        }
        -2 => {
            let k = best_pair(new, old);
            Some(if idx < k { idx } else { idx + 2 })
        }
        _ => None,
    }
}

fn nearest_stable(roots: &[FixedPoint], target: f64) -> Option<usize> {
    roots
        .iter()
        .enumerate()
        .filter(|(_, r)| r.stability.is_stable())
        .min_by(|a, b| (a.1.n_s - target).abs().total_cmp(&(b.1.n_s - target).abs()))
        .map(|(i, _)| i)
}

fn trace(
    base: &SystemParams,
    axis: Axis,
    values: &[f64],
    solutions: &[Vec<FixedPoint>],
    direction: Direction,
) -> Result<BranchTrace, MeanFieldError> {
    let order: Vec<usize> = match direction {
        Direction::Up => (0..values.len()).collect(),
        Direction::Down => (0..values.len()).rev().collect(),
    };
    let first = &solutions[order[0]];
    let start = match direction {
        Direction::Up => first.iter().position(|r| r.stability.is_stable()),
        Direction::Down => first.iter().rposition(|r| r.stability.is_stable()),
    }
    .ok_or(MeanFieldError::NoStableRoot {
        axis: axis.name(),
        value: base.with(axis, values[order[0]]).get(axis),
    })?;

    let mut out = BranchTrace {
        direction,
        axis_values: Vec::with_capacity(values.len()),
        n_s: Vec::with_capacity(values.len()),
        jumped: Vec::with_capacity(values.len()),
    };
    let mut idx = start;
    out.axis_values.push(values[order[0]]);
    out.n_s.push(first[idx].n_s);
    out.jumped.push(false);
    for w in order.windows(2) {
        let (old, new) = (&solutions[w[0]], &solutions[w[1]]);
        let old_n: Vec<f64> = old.iter().map(|r| r.n_s).collect();
        let new_n: Vec<f64> = new.iter().map(|r| r.n_s).collect();
        let prev = old_n[idx];
        let (next, jumped) = match continue_branch(&old_n, &new_n, idx) {
            Some(j) if new[j].stability.is_stable() || !new.iter().any(|r| r.stability.is_stable()) => (j, false),
            _ => match nearest_stable(new, prev) {
                Some(j) => (j, true),
                None => (idx.min(new.len() - 1), true),
            },
        };
        idx = next;
        out.axis_values.push(values[w[1]]);
        out.n_s.push(new[idx].n_s);
        out.jumped.push(jumped);
    }
    Ok(out)
}

/// Scans `axis` over `values` (ascending) upward from the lowest stable root
/// and downward from the highest one.
pub fn hysteresis_scan(
    base: &SystemParams,
    axis: Axis,
    values: &[f64],
) -> Result<(BranchTrace, BranchTrace), MeanFieldError> {
    if values.len() < 2 {
        return Err(MeanFieldError::InvalidScan("need at least two scan values".into()));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MeanFieldError::InvalidScan("scan values must be strictly increasing".into()));
    }
    let solutions = values
        .iter()
        .map(|&v| solve_steady_states(&base.with(axis, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((
        trace(base, axis, values, &solutions, Direction::Up)?,
        trace(base, axis, values, &solutions, Direction::Down)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bistable() -> SystemParams {
        SystemParams::default().with_g_ratios(0.35, -0.12, 2.0)
    }

    #[test]
    fn continuation_across_folds() {
        assert_eq!(continue_branch(&[0.1, 0.5, 0.9], &[0.1], 0), Some(0));
        assert_eq!(continue_branch(&[0.1, 0.5, 0.9], &[0.1], 2), None);
        assert_eq!(continue_branch(&[0.1, 0.5, 0.9], &[0.9], 0), None);
        assert_eq!(continue_branch(&[0.9], &[0.1, 0.5, 0.9], 0), Some(2));
        assert_eq!(continue_branch(&[0.1], &[0.1, 0.5, 0.9], 0), Some(0));
    }

    #[test]
    fn drive_scan_has_opposite_jumps() {
        let values: Vec<f64> = (0..=300).map(|i| 0.3 * i as f64 / 300.0).collect();
        let (up, down) = hysteresis_scan(&bistable(), Axis::Eta, &values).unwrap();
        let ju = up.jumps();
        let jd = down.jumps();
        assert_eq!(ju.len(), 1);
        assert_eq!(jd.len(), 1);
        assert!(ju[0].to > ju[0].from);
        assert!(jd[0].to < jd[0].from);
        // the upward jump happens at a larger drive than the downward one
        assert!(ju[0].axis_value > jd[0].axis_value);
        assert!(ju[0].axis_value > 0.2 && ju[0].axis_value < 0.22);
        assert!(jd[0].axis_value > 0.09 && jd[0].axis_value < 0.11);
    }

    #[test]
    fn rejects_unsorted_values() {
        assert!(hysteresis_scan(&bistable(), Axis::Eta, &[0.2, 0.1]).is_err());
        assert!(hysteresis_scan(&bistable(), Axis::Eta, &[0.2]).is_err());
    }
}
