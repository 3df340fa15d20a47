use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

/// Smallest expected cell count accepted.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatError {
    #[error("expected count {expected:.3} in cell {cell} is below {MIN_EXPECTED}")]
    LowExpected { cell: usize, expected: f64 },
    #[error("{observed} observed cells against {expected} expected")]
    LengthMismatch { observed: usize, expected: usize },
    #[error("no observations")]
    Empty,
    #[error("expected probabilities must be nonnegative and sum to 1 (sum {0})")]
    BadProbabilities(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn tail(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
}

/// Pearson goodness-of-fit of `observed` counts against cell probabilities.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquare, StatError> {
    if observed.len() != expected.len() {
        return Err(StatError::LengthMismatch {
            observed: observed.len(),
            expected: expected.len(),
        });
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(StatError::Empty);
    }
    let sum: f64 = expected.iter().sum();
    if expected.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(StatError::BadProbabilities(sum));
    }
    let n = total as f64;
    let mut statistic = 0.0;
    for (cell, (&o, &p)) in observed.iter().zip(expected).enumerate() {
        let e = n * p;
        if e < MIN_EXPECTED {
            return Err(StatError::LowExpected { cell, expected: e });
        }
        statistic += (o as f64 - e).powi(2) / e;
    }
    let dof = observed.len() - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: tail(statistic, dof),
    })
}

/// Two-sample homogeneity test on a `2 × k` table of counts. Cells empty in
/// both samples are dropped.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquare, StatError> {
    if a.len() != b.len() {
        return Err(StatError::LengthMismatch {
            observed: a.len(),
            expected: b.len(),
        });
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(StatError::Empty);
    }
    let n = na + nb;
    let mut statistic = 0.0;
    let mut cells = 0;
    for (cell, (&x, &y)) in a.iter().zip(b).enumerate() {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        for (obs, row) in [(x as f64, na), (y as f64, nb)] {
            let e = row * col / n;
            if e < MIN_EXPECTED {
                return Err(StatError::LowExpected { cell, expected: e });
            }
            statistic += (obs - e).powi(2) / e;
        }
    }
    let dof = cells.max(1) - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: tail(statistic, dof),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit() {
        let r = chi_square_gof(&[25, 25, 50], &[0.25, 0.25, 0.5]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(r.dof, 2);
    }

    #[test]
    fn known_statistic() {
        // (60-50)^2/50 + (40-50)^2/50 = 4, one degree of freedom
        let r = chi_square_gof(&[60, 40], &[0.5, 0.5]).unwrap();
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert!((r.p_value - 0.0455).abs() < 1e-3);
    }

    #[test]
    fn rejects_sparse_cells() {
        assert!(matches!(
            chi_square_gof(&[9, 1], &[0.9, 0.1]),
            Err(StatError::LowExpected { cell: 1, .. })
        ));
        assert!(matches!(chi_square_gof(&[1, 1], &[0.5, 0.6]), Err(StatError::BadProbabilities(_))));
    }

    #[test]
    fn two_sample() {
        let same = chi_square_two_sample(&[100, 200, 300], &[50, 100, 150]).unwrap();
        assert!(same.statistic.abs() < 1e-12);
        let differ = chi_square_two_sample(&[500, 500], &[300, 700]).unwrap();
        assert!(differ.p_value < 1e-6);
        let dropped = chi_square_two_sample(&[0, 10, 10], &[0, 10, 10]).unwrap();
        assert_eq!(dropped.dof, 1);
    }
}
