//! Small statistics toolkit: chi-square tests, Wilson intervals, plug-in
//! mutual information.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Upper tail `P(χ²_df ≥ x)`; `1.0` for `df = 0`.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).map(|d| d.sf(x)).unwrap_or(f64::NAN)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Goodness of fit of `counts` against `probs` (same length, probs sum to 1).
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> ChiSquare {
    let total: u64 = counts.iter().sum();
    let mut statistic = 0.0;
    let mut cells = 0;
    for (&c, &p) in counts.iter().zip(probs) {
        if p <= 0.0 {
            continue;
        }
        let e = p * total as f64;
        statistic += (c as f64 - e).powi(2) / e;
        cells += 1;
    }
    let df = cells.max(1) - 1;
    ChiSquare { statistic, df, p_value: chi_square_sf(statistic, df) }
}

/// Test of homogeneity on an `r × c` contingency table. All-zero rows and
/// columns are dropped before counting degrees of freedom.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> ChiSquare {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    if rows.is_empty() {
        return ChiSquare { statistic: 0.0, df: 0, p_value: 1.0 };
    }
    let width = rows[0].len();
    let cols: Vec<usize> = (0..width).filter(|&j| rows.iter().any(|r| r[j] > 0)).collect();
    let total: f64 = rows.iter().flat_map(|r| r.iter()).sum::<u64>() as f64;
    let row_sums: Vec<f64> = rows.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = cols.iter().map(|&j| rows.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
    let mut statistic = 0.0;
    for (i, r) in rows.iter().enumerate() {
        for (cj, &j) in cols.iter().enumerate() {
            let e = row_sums[i] * col_sums[cj] / total;
            statistic += (r[j] as f64 - e).powi(2) / e;
        }
    }
    let df = (rows.len() - 1) * (cols.len().max(1) - 1);
    ChiSquare { statistic, df, p_value: chi_square_sf(statistic, df) }
}

/// Plug-in mutual information (bits) between the row and column variables.
pub fn mutual_information_bits(table: &[Vec<u64>]) -> f64 {
    let total: u64 = table.iter().flat_map(|r| r.iter()).sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let width = table.first().map_or(0, Vec::len);
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..width).map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
    let mut mi = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, &c) in r.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c = c as f64;
            mi += c / n * (c * n / (row_sums[i] * col_sums[j])).log2();
        }
    }
    mi.max(0.0)
}

/// Wilson score interval for `successes / trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Option<(f64, f64)> {
    if trials == 0 {
        return None;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Some(((center - half).max(0.0), (center + half).min(1.0)))
}

pub fn binomial_std_error(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gof_on_exact_counts_is_perfect() {
        let c = chi_square_gof(&[25, 25, 25, 25], &[0.25; 4]);
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.df, 3);
        assert!((c.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_tail_reference_value() {
        // P(χ²₁ ≥ 3.841459) = 0.05
        assert!((chi_square_sf(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn homogeneity_detects_disjoint_rows() {
        let t = vec![vec![100, 0], vec![0, 100]];
        assert!(chi_square_homogeneity(&t).p_value < 1e-10);
        assert!((mutual_information_bits(&t) - 1.0).abs() < 1e-12);
        let same = vec![vec![50, 50], vec![50, 50]];
        assert_eq!(mutual_information_bits(&same), 0.0);
    }

    #[test]
    fn wilson_brackets_the_estimate() {
        let (lo, hi) = wilson_interval(87, 100, 1.96).unwrap();
        assert!(lo < 0.87 && 0.87 < hi);
        assert_eq!(wilson_interval(0, 0, 1.96), None);
        let (lo, hi) = wilson_interval(100, 100, 1.96).unwrap();
        assert!(lo > 0.95 && (hi - 1.0).abs() < 1e-12);
    }
}
