use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

/// Cases × raters grid; `None` marks a missing rating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterMatrix<T> {
    pub case_ids: Vec<String>,
    pub rater_ids: Vec<String>,
    pub cells: Vec<Vec<Option<T>>>,
}

impl<T: Copy> RaterMatrix<T> {
    pub fn new(case_ids: Vec<String>, rater_ids: Vec<String>, cells: Vec<Vec<Option<T>>>) -> Result<Self> {
        if cells.len() != case_ids.len() {
            return Err(Error::LengthMismatch {
                left: case_ids.len(),
                right: cells.len(),
            });
        }
        if let Some(row) = cells.iter().find(|r| r.len() != rater_ids.len()) {
            return Err(Error::LengthMismatch {
                left: rater_ids.len(),
                right: row.len(),
            });
        }
        Ok(Self {
            case_ids,
            rater_ids,
            cells,
        })
    }

    /// Builds a complete matrix from per-rater columns.
    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch { left: n, right: c.len() });
        }
        let cells = (0..n).map(|i| columns.iter().map(|c| Some(c[i])).collect()).collect();
        Self::new(
            (1..=n).map(|i| format!("case{i}")).collect(),
            (1..=columns.len()).map(|j| format!("rater{j}")).collect(),
            cells,
        )
    }

    pub fn n_raters(&self) -> usize {
        self.rater_ids.len()
    }

    /// Rows without gaps, plus the number of rows dropped.
    pub fn complete_rows(&self) -> (Vec<Vec<T>>, usize) {
        let rows: Vec<Vec<T>> = self
            .cells
            .iter()
            .filter_map(|r| r.iter().copied().collect::<Option<Vec<T>>>())
            .collect();
        let dropped = self.cells.len() - rows.len();
        (rows, dropped)
    }

    pub fn column(rows: &[Vec<T>], j: usize) -> Vec<T> {
        rows.iter().map(|r| r[j]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaWeights {
    #[default]
    Linear,
    Quadratic,
}

impl FromStr for KappaWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "quadratic" => Ok(Self::Quadratic),
            other => Err(Error::InvalidArgument(format!(
                "unknown kappa weights {other:?}; expected linear or quadratic"
            ))),
        }
    }
}

impl KappaWeights {
    /// Disagreement weight between ordinal positions `i` and `j` of `m`.
    pub fn weight(self, i: usize, j: usize, m: usize) -> f64 {
        let d = i.abs_diff(j) as f64 / (m - 1) as f64;
        match self {
            Self::Linear => d,
            Self::Quadratic => d * d,
        }
    }
}

fn positions<T: PartialEq + std::fmt::Debug>(ratings: &[T], categories: &[T]) -> Result<Vec<usize>> {
    ratings
        .iter()
        .map(|r| {
            categories.iter().position(|c| c == r).ok_or_else(|| {
                Error::InvalidArgument(format!("rating {r:?} is not a declared category"))
            })
        })
        .collect()
}

/// Weighted Cohen's kappa over an ordered category alphabet.
///
/// Returns `None` when expected disagreement is zero, i.e. both raters use a
/// single identical category throughout.
pub fn cohen_kappa_weighted<T: PartialEq + std::fmt::Debug>(
    r1: &[T],
    r2: &[T],
    categories: &[T],
    weights: KappaWeights,
) -> Result<Option<f64>> {
    if r1.len() != r2.len() {
        return Err(Error::LengthMismatch {
            left: r1.len(),
            right: r2.len(),
        });
    }
    if r1.len() < 2 {
        return Err(Error::InvalidArgument("kappa needs at least 2 rated cases".into()));
    }
    let m = categories.len();
    if m < 2 {
        return Err(Error::InvalidArgument("kappa needs at least 2 categories".into()));
    }
    let p1 = positions(r1, categories)?;
    let p2 = positions(r2, categories)?;
    let n = r1.len() as f64;

    let mut observed = vec![0.0; m * m];
    let (mut row, mut col) = (vec![0.0; m], vec![0.0; m]);
    for (&a, &b) in p1.iter().zip(&p2) {
        observed[a * m + b] += 1.0;
        row[a] += 1.0;
        col[b] += 1.0;
    }
    let (mut wo, mut we) = (0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            let w = weights.weight(i, j, m);
            wo += w * observed[i * m + j] / n;
            we += w * row[i] * col[j] / (n * n);
        }
    }
    Ok((we > 0.0).then(|| 1.0 - wo / we))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairKappa {
    pub rater_a: String,
    pub rater_b: String,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightsKappa {
    pub kappa: Option<f64>,
    pub pairwise: Vec<PairKappa>,
    /// Pairs whose kappa is undefined and left out of the mean.
    pub excluded_pairs: usize,
    pub dropped_rows: usize,
    pub n_cases: usize,
}

/// Mean of the pairwise weighted kappas over all rater pairs.
pub fn lights_kappa<T: PartialEq + Copy + std::fmt::Debug>(
    matrix: &RaterMatrix<T>,
    categories: &[T],
    weights: KappaWeights,
) -> Result<LightsKappa> {
    let k = matrix.n_raters();
    if k < 2 {
        return Err(Error::InvalidArgument("agreement needs at least 2 raters".into()));
    }
    let (rows, dropped_rows) = matrix.complete_rows();
    let cols: Vec<Vec<T>> = (0..k).map(|j| RaterMatrix::column(&rows, j)).collect();
    let mut pairwise = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            pairwise.push(PairKappa {
                rater_a: matrix.rater_ids[a].clone(),
                rater_b: matrix.rater_ids[b].clone(),
                kappa: cohen_kappa_weighted(&cols[a], &cols[b], categories, weights)?,
            });
        }
    }
    let defined: Vec<f64> = pairwise.iter().filter_map(|p| p.kappa).collect();
    Ok(LightsKappa {
        kappa: (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64),
        excluded_pairs: pairwise.len() - defined.len(),
        pairwise,
        dropped_rows,
        n_cases: rows.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccResult {
    pub icc: Option<f64>,
    pub ci95: Option<(f64, f64)>,
    pub n_cases: usize,
    pub n_raters: usize,
    pub ms_rows: f64,
    pub ms_cols: f64,
    pub ms_error: f64,
    pub dropped_rows: usize,
}

/// ICC(2,1): two-way random effects, absolute agreement, single measures,
/// with the F-distribution confidence interval.
pub fn icc_2_1(matrix: &RaterMatrix<f64>) -> Result<IccResult> {
    let k = matrix.n_raters();
    let (rows, dropped_rows) = matrix.complete_rows();
    let n = rows.len();
    if k < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "ICC needs at least 2 complete cases and 2 raters, got {n} × {k}"
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("ratings must be finite".into()));
    }
    let (nf, kf) = (n as f64, k as f64);
    let grand = rows.iter().flatten().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() / kf).collect();
    let col_means: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / nf).collect();
    let ss_rows = kf * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_cols = nf * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_total: f64 = rows.iter().flatten().map(|v| (v - grand).powi(2)).sum();
    let ss_error = (ss_total - ss_rows - ss_cols).max(0.0);
    let msr = ss_rows / (nf - 1.0);
    let msc = ss_cols / (kf - 1.0);
    let mse = ss_error / ((nf - 1.0) * (kf - 1.0));

    let denom = msr + (kf - 1.0) * mse + kf * (msc - mse) / nf;
    let icc = (msr > 0.0 && denom > 0.0).then(|| (msr - mse) / denom);
    let ci95 = icc.and_then(|icc| icc_ci(icc, n, k, msr, msc, mse));
    Ok(IccResult {
        icc,
        ci95,
        n_cases: n,
        n_raters: k,
        ms_rows: msr,
        ms_cols: msc,
        ms_error: mse,
        dropped_rows,
    })
}

fn icc_ci(icc: f64, n: usize, k: usize, msr: f64, msc: f64, mse: f64) -> Option<(f64, f64)> {
    let (nf, kf) = (n as f64, k as f64);
    if mse == 0.0 {
        return Some((icc, icc));
    }
    let a = kf * icc / (nf * (1.0 - icc));
    let b = 1.0 + kf * icc * (nf - 1.0) / (nf * (1.0 - icc));
    // Satterthwaite degrees of freedom for the denominator mean square
    let v = (a * msc + b * mse).powi(2)
        / ((a * msc).powi(2) / (kf - 1.0) + (b * mse).powi(2) / ((nf - 1.0) * (kf - 1.0)));
    if !v.is_finite() || v <= 0.0 {
        return None;
    }
    let fl = FisherSnedecor::new(nf - 1.0, v).ok()?.inverse_cdf(0.975);
    let fu = FisherSnedecor::new(v, nf - 1.0).ok()?.inverse_cdf(0.975);
    let c = kf * msc + (kf * nf - kf - nf) * mse;
    let lo = nf * (msr - fl * mse) / (fl * c + nf * msr);
    let hi = nf * (fu * msr - mse) / (c + nf * fu * msr);
    (lo.is_finite() && hi.is_finite()).then_some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const CATS: [u8; 3] = [1, 2, 3];

    /// Weighted kappa from the textbook agreement form, built from scratch.
    fn kappa_oracle(r1: &[u8], r2: &[u8], quadratic: bool) -> Option<f64> {
        let n = r1.len() as f64;
        let agree_w = |i: u8, j: u8| {
            let d = (i as f64 - j as f64).abs() / 2.0;
            1.0 - if quadratic { d * d } else { d }
        };
        let po = r1.iter().zip(r2).map(|(&a, &b)| agree_w(a, b)).sum::<f64>() / n;
        let mut pe = 0.0;
        for i in 1..=3u8 {
            for j in 1..=3u8 {
                let pi = r1.iter().filter(|&&a| a == i).count() as f64 / n;
                let pj = r2.iter().filter(|&&b| b == j).count() as f64 / n;
                pe += agree_w(i, j) * pi * pj;
            }
        }
        (pe < 1.0).then(|| (po - pe) / (1.0 - pe))
    }

    #[test]
    fn kappa_examples() {
        let k = cohen_kappa_weighted(&[1, 1, 2, 2], &[1, 2, 1, 2], &[1, 2], KappaWeights::Linear).unwrap();
        assert_eq!(k, Some(0.0));
        let k = cohen_kappa_weighted(&[1, 2, 3, 1], &[1, 2, 3, 1], &CATS, KappaWeights::Linear).unwrap();
        assert_eq!(k, Some(1.0));
        assert_eq!(cohen_kappa_weighted(&[2, 2], &[2, 2], &CATS, KappaWeights::Linear).unwrap(), None);
        assert!(cohen_kappa_weighted(&[4, 2], &[2, 2], &CATS, KappaWeights::Linear).is_err());
        assert!(cohen_kappa_weighted(&[1], &[1], &CATS, KappaWeights::Linear).is_err());
    }

    #[test]
    fn reversed_order_keeps_kappa() {
        let r1 = [1, 2, 3, 3, 1, 2, 2];
        let r2 = [1, 3, 3, 2, 1, 1, 2];
        for w in [KappaWeights::Linear, KappaWeights::Quadratic] {
            let a = cohen_kappa_weighted(&r1, &r2, &CATS, w).unwrap().unwrap();
            let b = cohen_kappa_weighted(&r1, &r2, &[3, 2, 1], w).unwrap().unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lights_three_raters() {
        let m = RaterMatrix::from_columns(&[
            vec![1u8, 2, 3, 2, 1, 3],
            vec![1, 2, 3, 2, 1, 2],
            vec![3, 2, 1, 1, 3, 1],
        ])
        .unwrap();
        let l = lights_kappa(&m, &CATS, KappaWeights::Linear).unwrap();
        let cols = [[1u8, 2, 3, 2, 1, 3], [1, 2, 3, 2, 1, 2], [3, 2, 1, 1, 3, 1]];
        let pairs = [(0, 1), (0, 2), (1, 2)];
        let expected = pairs.iter().map(|&(a, b)| kappa_oracle(&cols[a], &cols[b], false).unwrap()).sum::<f64>() / 3.0;
        assert!((l.kappa.unwrap() - expected).abs() < 1e-12);
        assert_eq!(l.pairwise.len(), 3);

        let two = RaterMatrix::from_columns(&[cols[0].to_vec(), cols[2].to_vec()]).unwrap();
        let l2 = lights_kappa(&two, &CATS, KappaWeights::Linear).unwrap();
        assert_eq!(l2.kappa, cohen_kappa_weighted(&cols[0], &cols[2], &CATS, KappaWeights::Linear).unwrap());
    }

    #[test]
    fn gaps_are_dropped() {
        let m = RaterMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["r1".into(), "r2".into()],
            vec![vec![Some(1u8), Some(1)], vec![Some(2), None], vec![Some(3), Some(3)]],
        )
        .unwrap();
        let l = lights_kappa(&m, &CATS, KappaWeights::Linear).unwrap();
        assert_eq!((l.dropped_rows, l.n_cases, l.kappa), (1, 2, Some(1.0)));
        let single = RaterMatrix::from_columns(&[vec![1u8, 2]]).unwrap();
        assert!(lights_kappa(&single, &CATS, KappaWeights::Linear).is_err());
    }

    /// Mean squares by explicit loops over the two-way layout.
    pub(crate) fn icc_oracle(cols: &[Vec<f64>]) -> f64 {
        let k = cols.len();
        let n = cols[0].len();
        let mut grand = 0.0;
        for c in cols {
            for v in c {
                grand += v;
            }
        }
        grand /= (n * k) as f64;
        let mut msr = 0.0;
        for i in 0..n {
            let m: f64 = cols.iter().map(|c| c[i]).sum::<f64>() / k as f64;
            msr += (m - grand) * (m - grand);
        }
        msr *= k as f64 / (n - 1) as f64;
        let mut msc = 0.0;
        for c in cols {
            let m: f64 = c.iter().sum::<f64>() / n as f64;
            msc += (m - grand) * (m - grand);
        }
        msc *= n as f64 / (k - 1) as f64;
        let mut sse = 0.0;
        for i in 0..n {
            let rm: f64 = cols.iter().map(|c| c[i]).sum::<f64>() / k as f64;
            for c in cols {
                let cm: f64 = c.iter().sum::<f64>() / n as f64;
                let r = c[i] - rm - cm + grand;
                sse += r * r;
            }
        }
        let mse = sse / ((n - 1) * (k - 1)) as f64;
        (msr - mse) / (msr + (k as f64 - 1.0) * mse + k as f64 * (msc - mse) / n as f64)
    }

    #[test]
    fn icc_examples() {
        let base: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        let same = RaterMatrix::from_columns(&[base.clone(), base.clone(), base.clone()]).unwrap();
        assert_eq!(icc_2_1(&same).unwrap().icc, Some(1.0));
        let shifted: Vec<f64> = base.iter().map(|v| v + 5.0).collect();
        let off = icc_2_1(&RaterMatrix::from_columns(&[base.clone(), shifted]).unwrap()).unwrap();
        assert!(off.icc.unwrap() < 1.0);
        let flat = RaterMatrix::from_columns(&[vec![1.0; 4], vec![1.0; 4]]).unwrap();
        assert_eq!(icc_2_1(&flat).unwrap().icc, None);
    }

    #[test]
    fn icc_matches_reference_values() {
        // Shrout & Fleiss (1979) six targets, four judges: ICC(2,1) = 0.29
        let cols = vec![
            vec![9.0, 6.0, 8.0, 7.0, 10.0, 6.0],
            vec![2.0, 1.0, 4.0, 1.0, 5.0, 2.0],
            vec![5.0, 3.0, 6.0, 2.0, 6.0, 4.0],
            vec![8.0, 2.0, 8.0, 6.0, 9.0, 7.0],
        ];
        let r = icc_2_1(&RaterMatrix::from_columns(&cols).unwrap()).unwrap();
        assert!((r.icc.unwrap() - 0.2897).abs() < 1e-4);
        let (lo, hi) = r.ci95.unwrap();
        // reference interval of the same formulation
        assert!((lo - 0.019).abs() < 2e-3, "{lo}");
        assert!((hi - 0.761).abs() < 2e-3, "{hi}");
    }

    #[test]
    fn random_matrices_match_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let cols: Vec<Vec<f64>> = (0..5).map(|_| (0..20).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
            let r = icc_2_1(&RaterMatrix::from_columns(&cols).unwrap()).unwrap();
            assert!((r.icc.unwrap() - icc_oracle(&cols)).abs() < 1e-9);

            let cats: Vec<Vec<u8>> = (0..5).map(|_| (0..20).map(|_| rng.gen_range(1..=3)).collect()).collect();
            let l = lights_kappa(&RaterMatrix::from_columns(&cats).unwrap(), &CATS, KappaWeights::Quadratic).unwrap();
            let mut sum = 0.0;
            for a in 0..5 {
                for b in a + 1..5 {
                    sum += kappa_oracle(&cats[a], &cats[b], true).unwrap();
                }
            }
            assert!((l.kappa.unwrap() - sum / 10.0).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn kappa_matches_oracle(pairs in proptest::collection::vec((1u8..=3, 1u8..=3), 2..30)) {
            let (r1, r2): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
            for (w, quad) in [(KappaWeights::Linear, false), (KappaWeights::Quadratic, true)] {
                let got = cohen_kappa_weighted(&r1, &r2, &CATS, w).unwrap();
                let want = kappa_oracle(&r1, &r2, quad);
                match (got, want) {
                    (Some(g), Some(o)) => prop_assert!((g - o).abs() < 1e-9),
                    (g, o) => prop_assert_eq!(g, o),
                }
            }
        }

        #[test]
        fn kappa_one_iff_identical(pairs in proptest::collection::vec((1u8..=3, 1u8..=3), 2..30)) {
            let (r1, r2): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
            if let Some(k) = cohen_kappa_weighted(&r1, &r2, &CATS, KappaWeights::Linear).unwrap() {
                prop_assert_eq!((k - 1.0).abs() < 1e-12, r1 == r2);
            }
        }

        #[test]
        fn icc_shift_invariant(
            vals in proptest::collection::vec(0.0f64..10.0, 12),
            shift in -50.0f64..50.0,
        ) {
            let cols: Vec<Vec<f64>> = vals.chunks(4).map(<[f64]>::to_vec).collect();
            let moved: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().map(|v| v + shift).collect()).collect();
            let a = icc_2_1(&RaterMatrix::from_columns(&cols).unwrap()).unwrap().icc;
            let b = icc_2_1(&RaterMatrix::from_columns(&moved).unwrap()).unwrap().icc;
            if let (Some(a), Some(b)) = (a, b) {
                prop_assert!((a - b).abs() < 1e-8);
            }
        }
    }
}
