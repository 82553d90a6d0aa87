//! Segmented least-squares regression of an annual series.
//!
//! The series is cut into `k` contiguous segments, each fitted by its own
//! ordinary least-squares line (no continuity at the breakpoints). For a
//! fixed `k` the breakpoints are found by an exact dynamic program over
//! all placements that keep every segment at least `min_len` points long;
//! segment costs come from prefix sums, so the search is `O(k n^2)`.
//! [`select_k`] chooses `k` by the Bayesian information criterion.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{ClusterId, Partition};
use crate::peaks::rank_clusters;
use crate::spectrum::SpectrumPoint;

/// Shortest allowed segment, in years.
pub const DEFAULT_MIN_LEN: usize = 5;

/// Scale the values are fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    /// `ln(1 + value)`; slopes read as growth rates.
    #[default]
    Log1p,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start_rpy: i32,
    /// Inclusive.
    pub end_rpy: i32,
    /// Change per year on the fitted scale.
    pub slope: f64,
    /// Fitted value at `start_rpy`.
    pub intercept: f64,
    pub sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentFit {
    pub segments: Vec<Segment>,
    pub k: usize,
    pub total_sse: f64,
    pub bic: f64,
    pub scale: Scale,
}

impl SegmentFit {
    /// First year of every segment after the first.
    pub fn breakpoints(&self) -> Vec<i32> {
        self.segments.iter().skip(1).map(|s| s.start_rpy).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentError {
    #[error("series of {len} points is too short: need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("number of segments must be at least 1")]
    InvalidK,
    #[error("minimum segment length must be at least 1")]
    InvalidMinLen,
    #[error("series is not dense: year {0} does not follow its predecessor")]
    NotDense(i32),
    #[error("value for year {0} is not finite on the chosen scale")]
    NonFinite(i32),
}

/// The `ncr` column of a spectrum as a fitting series.
pub fn ncr_series(spectrum: &[SpectrumPoint]) -> Vec<(i32, f64)> {
    spectrum.iter().map(|p| (p.rpy, p.ncr as f64)).collect()
}

/// Best fit with exactly `k` segments.
pub fn fit_fixed_k(
    series: &[(i32, f64)],
    k: usize,
    min_len: usize,
    scale: Scale,
) -> Result<SegmentFit, SegmentError> {
    if k == 0 {
        return Err(SegmentError::InvalidK);
    }
    let data = Prepared::new(series, min_len, scale)?;
    data.fit(k)
}

/// Fit `k = 1..=k_max` and keep the fit with the lowest BIC, where
/// `BIC = n ln(SSE / n) + (3k - 1) ln n`. Ties go to the smaller `k`;
/// values of `k` that cannot honour `min_len` are skipped.
pub fn select_k(
    series: &[(i32, f64)],
    k_max: usize,
    min_len: usize,
    scale: Scale,
) -> Result<SegmentFit, SegmentError> {
    if k_max == 0 {
        return Err(SegmentError::InvalidK);
    }
    let data = Prepared::new(series, min_len, scale)?;
    let mut best: Option<SegmentFit> = None;
    for k in (1..=k_max).take_while(|k| k * min_len <= data.len()) {
        let fit = data.fit(k)?;
        if best.as_ref().is_none_or(|b| fit.bic < b.bic) {
            best = Some(fit);
        }
    }
    best.ok_or(SegmentError::SeriesTooShort {
        len: data.len(),
        needed: min_len,
    })
}

/// The `k_per_segment` most cited clusters dated inside each segment.
pub fn segment_landmarks(
    fit: &SegmentFit,
    partition: &Partition,
    k_per_segment: usize,
) -> Vec<Vec<(ClusterId, u64)>> {
    fit.segments
        .iter()
        .map(|s| {
            let inside = partition.clusters().iter().filter(|c| {
                c.rpy
                    .is_some_and(|y| (s.start_rpy..=s.end_rpy).contains(&y))
            });
            rank_clusters(inside)
                .into_iter()
                .take(k_per_segment)
                .map(|(c, n)| (c.cluster_id.clone(), n))
                .collect()
        })
        .collect()
}

/// Transformed series with prefix sums of `1, x, y, x^2, xy, y^2`.
struct Prepared {
    first_year: i32,
    y: Vec<f64>,
    min_len: usize,
    scale: Scale,
    sums: Vec<[f64; 5]>,
    mse_floor: f64,
}

impl Prepared {
    fn new(series: &[(i32, f64)], min_len: usize, scale: Scale) -> Result<Self, SegmentError> {
        if min_len == 0 {
            return Err(SegmentError::InvalidMinLen);
        }
        let Some(&(first_year, _)) = series.first() else {
            return Err(SegmentError::SeriesTooShort {
                len: 0,
                needed: min_len,
            });
        };
        let mut y = Vec::with_capacity(series.len());
        for (i, &(year, value)) in series.iter().enumerate() {
            if year != first_year + i as i32 {
                return Err(SegmentError::NotDense(year));
            }
            let v = match scale {
                Scale::Linear => value,
                Scale::Log1p => libm::log1p(value),
            };
            if !v.is_finite() {
                return Err(SegmentError::NonFinite(year));
            }
            y.push(v);
        }

        let mut sums = Vec::with_capacity(y.len() + 1);
        let mut acc = [0.0; 5];
        sums.push(acc);
        for (i, &v) in y.iter().enumerate() {
            let x = i as f64;
            acc[0] += x;
            acc[1] += v;
            acc[2] += x * x;
            acc[3] += x * v;
            acc[4] += v * v;
            sums.push(acc);
        }
        let mean_sq = acc[4] / y.len() as f64;
        Ok(Prepared {
            first_year,
            y,
            min_len,
            scale,
            sums,
            mse_floor: 1e-12 * (1.0 + mean_sq),
        })
    }

    fn len(&self) -> usize {
        self.y.len()
    }

    /// SSE of the OLS line through points `lo..hi`.
    fn cost(&self, lo: usize, hi: usize) -> f64 {
        let n = (hi - lo) as f64;
        let (a, b) = (&self.sums[lo], &self.sums[hi]);
        let sx = b[0] - a[0];
        let sy = b[1] - a[1];
        let sxx = b[2] - a[2] - sx * sx / n;
        let sxy = b[3] - a[3] - sx * sy / n;
        let syy = b[4] - a[4] - sy * sy / n;
        let sse = if sxx > 0.0 {
            syy - sxy * sxy / sxx
        } else {
            syy
        };
        sse.max(0.0)
    }

    fn fit(&self, k: usize) -> Result<SegmentFit, SegmentError> {
        let n = self.len();
        let l = self.min_len;
        if n < k * l {
            return Err(SegmentError::SeriesTooShort {
                len: n,
                needed: k * l,
            });
        }

        // best[s][j]: cheapest cover of points 0..j by s + 1 segments.
        let mut best = alloc::vec![alloc::vec![f64::INFINITY; n + 1]; k];
        let mut cut = alloc::vec![alloc::vec![0usize; n + 1]; k];
        for (j, b) in best[0].iter_mut().enumerate().skip(l) {
            *b = self.cost(0, j);
        }
        for s in 1..k {
            for j in (s + 1) * l..=n {
                for i in s * l..=j - l {
                    let candidate = best[s - 1][i] + self.cost(i, j);
                    if candidate < best[s][j] {
                        best[s][j] = candidate;
                        cut[s][j] = i;
                    }
                }
            }
        }

        let mut bounds = alloc::vec![n];
        let mut j = n;
        for s in (1..k).rev() {
            j = cut[s][j];
            bounds.push(j);
        }
        bounds.push(0);
        bounds.reverse();

        let segments: Vec<Segment> = bounds
            .windows(2)
            .map(|w| self.segment(w[0], w[1]))
            .collect();
        let total_sse: f64 = segments.iter().map(|s| s.sse).sum();
        let nf = n as f64;
        let params = (3 * k - 1) as f64;
        let bic = nf * libm::log((total_sse / nf).max(self.mse_floor)) + params * libm::log(nf);
        Ok(SegmentFit {
            segments,
            k,
            total_sse,
            bic,
            scale: self.scale,
        })
    }

    /// Direct two-pass OLS over `lo..hi`.
    fn segment(&self, lo: usize, hi: usize) -> Segment {
        let ys = &self.y[lo..hi];
        let n = ys.len() as f64;
        let mean_x = (lo + hi - 1) as f64 / 2.0;
        let mean_y = ys.iter().sum::<f64>() / n;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (i, &v) in ys.iter().enumerate() {
            let dx = (lo + i) as f64 - mean_x;
            sxx += dx * dx;
            sxy += dx * (v - mean_y);
        }
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let intercept = mean_y + slope * (lo as f64 - mean_x);
        let sse = ys
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let r = v - (intercept + slope * i as f64);
                r * r
            })
            .sum();
        Segment {
            start_rpy: self.first_year + lo as i32,
            end_rpy: self.first_year + hi as i32 - 1,
            slope,
            intercept,
            sse,
        }
    }
}
