//! Shared statistics kernel.
//!
//! Welch's t, one-degree-of-freedom chi-square, Kendall's tau-b, Gini,
//! percentile intervals and ROC/Youden analysis. The special functions are
//! implemented here (Lanczos log-gamma, continued-fraction incomplete beta,
//! series/continued-fraction incomplete gamma).

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom; real-valued for Welch–Satterthwaite.
    pub dof: Option<f64>,
    pub n_a: usize,
    pub n_b: usize,
    /// phi = sqrt(chi2 / n) for chi-square tests.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effect_size: Option<f64>,
}

// ---------------------------------------------------------------------------
// special functions

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    // modified Lentz
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b).
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn reg_upper_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let ln_front = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        // series for P
        let mut sum = 1.0 / a;
        let mut term = sum;
        let mut ap = a;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        1.0 - sum * ln_front.exp()
    } else {
        // continued fraction for Q
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        ln_front.exp() * h
    }
}

/// Two-sided p-value of Student's t with `dof` degrees of freedom.
pub fn t_two_sided_p(t: f64, dof: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    clamp_p(reg_inc_beta(dof / 2.0, 0.5, dof / (dof + t * t)))
}

/// Survival function of the chi-square distribution.
pub fn chi2_sf(x: f64, dof: f64) -> f64 {
    clamp_p(reg_upper_gamma(dof / 2.0, x / 2.0))
}

/// Two-sided standard-normal p-value.
pub fn normal_two_sided_p(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    clamp_p(reg_upper_gamma(0.5, z * z / 2.0))
}

fn clamp_p(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// descriptive helpers

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (two-pass).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Linear-interpolated quantile of an ascending-sorted slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Some(quantile_sorted(&v, 0.5))
}

// ---------------------------------------------------------------------------
// tests

/// Welch's unequal-variance two-sample t-test, two-sided.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "welch t needs >= 2 observations per sample (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (variance(a) / na, variance(b) / nb);
    let se2 = va + vb;
    if se2 == 0.0 {
        let (statistic, p_value) = if ma == mb {
            (0.0, 1.0)
        } else if ma > mb {
            (f64::INFINITY, 0.0)
        } else {
            (f64::NEG_INFINITY, 0.0)
        };
        return Ok(TestResult {
            statistic,
            p_value,
            dof: None,
            n_a: a.len(),
            n_b: b.len(),
            effect_size: None,
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(TestResult {
        statistic: t,
        p_value: t_two_sided_p(t, dof),
        dof: Some(dof),
        n_a: a.len(),
        n_b: b.len(),
        effect_size: None,
    })
}

/// Goodness-of-fit chi-square over two cells (1 dof, no continuity correction).
pub fn chi_square_1dof(observed: [f64; 2], expected: [f64; 2]) -> Result<TestResult> {
    if expected.iter().any(|&e| e <= 0.0) {
        return Err(Error::Undefined(format!(
            "chi-square expected cell is zero ({:?})",
            expected
        )));
    }
    let stat: f64 = observed
        .iter()
        .zip(expected.iter())
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let n = observed[0] + observed[1];
    Ok(TestResult {
        statistic: stat,
        p_value: chi2_sf(stat, 1.0),
        dof: Some(1.0),
        n_a: observed[0] as usize,
        n_b: observed[1] as usize,
        effect_size: (n > 0.0).then(|| (stat / n).sqrt()),
    })
}

fn tie_sums<T: PartialEq>(sorted: &[T]) -> (f64, f64, f64) {
    // (sum t(t-1)/2, sum t(t-1)(t-2), sum t(t-1)(2t+5))
    let mut pairs = 0.0;
    let mut v0 = 0.0;
    let mut v1 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        pairs += t * (t - 1.0) / 2.0;
        v0 += t * (t - 1.0) * (t - 2.0);
        v1 += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    (pairs, v0, v1)
}

fn count_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        count_inversions(l, bl) + count_inversions(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            inv += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    inv
}

/// Kendall's tau-b with the tie-corrected normal approximation for p.
/// O(n log n) (Knight's algorithm).
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("kendall: length mismatch".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "kendall tau needs >= 2 paired items (got {n})"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(y[i].total_cmp(&y[j])));
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let joint: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();

    let (x_ties, x0, x1) = tie_sums(&xs);
    let (joint_ties, _, _) = tie_sums(&joint);
    let mut buf = vec![0.0; n];
    let swaps = count_inversions(&mut ys, &mut buf) as f64;
    let (y_ties, y0, y1) = tie_sums(&ys);

    let nf = n as f64;
    let total = nf * (nf - 1.0) / 2.0;
    let con_minus_dis = total - x_ties - y_ties + joint_ties - 2.0 * swaps;
    let denom = ((total - x_ties) * (total - y_ties)).sqrt();
    if denom == 0.0 {
        return Err(Error::Undefined(
            "kendall tau undefined: a ranking is constant".into(),
        ));
    }
    let tau = (con_minus_dis / denom).clamp(-1.0, 1.0);

    let m = nf * (nf - 1.0);
    let mut var = (m * (2.0 * nf + 5.0) - x1 - y1) / 18.0 + (2.0 * x_ties * y_ties) / m;
    if n > 2 {
        var += x0 * y0 / (9.0 * m * (nf - 2.0));
    }
    let p = if var > 0.0 {
        normal_two_sided_p(con_minus_dis / var.sqrt())
    } else {
        1.0
    };
    Ok(TestResult {
        statistic: tau,
        p_value: p,
        dof: None,
        n_a: n,
        n_b: n,
        effect_size: None,
    })
}

/// Empirical percentile interval at `(1-level)/2` and `1-(1-level)/2`.
pub fn percentile_ci(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(
            "percentile interval needs >= 2 samples".into(),
        ));
    }
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::InvalidParameter(format!("ci level {level}")));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&v, alpha), quantile_sorted(&v, 1.0 - alpha)))
}

/// Gini coefficient, mean absolute difference over twice the mean.
pub fn gini(values: &[f64]) -> Result<f64> {
    if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "gini requires finite nonnegative values".into(),
        ));
    }
    let total: f64 = values.iter().sum();
    if values.is_empty() || total <= 0.0 {
        return Err(Error::Undefined("gini of an all-zero list".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let weighted: f64 = v
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * i as f64 - n + 1.0) * x)
        .sum();
    Ok((weighted / (n * total)).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Predict positive iff score >= threshold. The origin uses +inf.
    pub threshold: f64,
}

/// ROC curve over all distinct score thresholds, descending.
pub fn roc_curve(scores: &[f64], positive: &[bool]) -> Result<Vec<RocPoint>> {
    if scores.len() != positive.len() {
        return Err(Error::InvalidParameter("roc: length mismatch".into()));
    }
    let n_pos = positive.iter().filter(|p| **p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InsufficientData(
            "roc needs both classes present".into(),
        ));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < idx.len() {
        let thr = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == thr {
            if positive[idx[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
            threshold: thr,
        });
    }
    Ok(points)
}

/// Index of the ROC point maximizing tpr - fpr; ties go to the lower
/// threshold (later point).
pub fn youden_index(points: &[RocPoint]) -> usize {
    let j = |p: &RocPoint| p.tpr - p.fpr;
    let max = points.iter().map(j).fold(f64::NEG_INFINITY, f64::max);
    // rates are ratios of counts; equal J can differ in the last ulp
    points
        .iter()
        .rposition(|p| j(p) >= max - 1e-12)
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

    #[test]
    fn t_p_values_match_reference_distribution() {
        for &dof in &[1.0, 2.5, 10.0, 37.3, 500.0] {
            let dist = StudentsT::new(0.0, 1.0, dof).unwrap();
            for &t in &[0.0, 0.3, 1.0, 2.228, 4.0, 9.0] {
                let reference = 2.0 * dist.sf(t);
                let ours = t_two_sided_p(t, dof);
                assert!(
                    (ours - reference).abs() < 1e-10,
                    "dof={dof} t={t}: {ours} vs {reference}"
                );
            }
        }
        // published two-sided critical value t(10) = 2.228 at alpha 0.05
        assert!((t_two_sided_p(2.228_138_85, 10.0) - 0.05).abs() < 1e-7);
    }

    #[test]
    fn chi2_p_values_match_reference_distribution() {
        let dist = ChiSquared::new(1.0).unwrap();
        for &x in &[0.0, 0.5, 3.841_458_820_694_124, 10.0, 64.0] {
            assert!((chi2_sf(x, 1.0) - dist.sf(x)).abs() < 1e-10, "x={x}");
        }
        assert!((chi2_sf(3.841_458_820_694_124, 1.0) - 0.05).abs() < 1e-10);
        let p = chi2_sf(672.37, 1.0);
        assert!(p > 0.0 && p < 1e-100);
    }

    #[test]
    fn welch_identical_and_antisymmetric() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = welch_t(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);

        let b = [2.0, 4.5, 3.3, 8.0, 1.0];
        let ab = welch_t(&a, &b).unwrap();
        let ba = welch_t(&b, &a).unwrap();
        assert_eq!(ab.statistic, -ba.statistic);
        assert_eq!(ab.p_value, ba.p_value);
    }

    #[test]
    fn welch_worked_example() {
        // Independent hand calculation:
        // a: mean 20.0, var 4.0 (n=6); b: mean 22.5, var 9.0 (n=6)
        let a = [18.0, 22.0, 19.0, 21.0, 17.0, 23.0];
        let b = [20.0, 25.0, 19.0, 26.0, 21.5, 23.5];
        // mean(a)=20, sum sq dev = 4+4+1+1+9+9=28, var=5.6
        // mean(b)=22.5, sum sq dev = 6.25+6.25+12.25+12.25+1+1=39, var=7.8
        let se2: f64 = 5.6 / 6.0 + 7.8 / 6.0;
        let t = -2.5 / se2.sqrt();
        let dof = se2 * se2 / ((5.6f64 / 6.0).powi(2) / 5.0 + (7.8f64 / 6.0).powi(2) / 5.0);
        let r = welch_t(&a, &b).unwrap();
        assert!((r.statistic - t).abs() < 1e-12);
        assert!((r.dof.unwrap() - dof).abs() < 1e-9);
        let reference = 2.0 * StudentsT::new(0.0, 1.0, dof).unwrap().sf(t.abs());
        assert!((r.p_value - reference).abs() < 1e-6);
    }

    #[test]
    fn welch_degenerate_variance() {
        let r = welch_t(&[1.0, 1.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = welch_t(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.p_value, 0.0);
        let jitter = [0.0, 1e-9, 0.0, -1e-9];
        let one = [1.0, 1.0 + 1e-9, 1.0, 1.0 - 1e-9];
        assert!(welch_t(&jitter, &one).unwrap().p_value < 1e-6);
        assert!(welch_t(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn chi_square_table_three() {
        let r = chi_square_1dof([295.0, 11.0], [89.0, 217.0]).unwrap();
        assert!((r.statistic - 672.37).abs() < 0.1);
        assert!(r.p_value < 1e-100);
        let r = chi_square_1dof([90.0, 10.0], [50.0, 50.0]).unwrap();
        assert!((r.statistic - 64.0).abs() < 1e-12);
        assert!((r.effect_size.unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(
            chi_square_1dof([5.0, 5.0], [5.0, 5.0]).unwrap().statistic,
            0.0
        );
        assert!(chi_square_1dof([1.0, 1.0], [0.0, 2.0]).is_err());
    }

    fn kendall_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut c, mut d, mut tx, mut ty) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..n {
            for j in i + 1..n {
                let dx = (x[i] - x[j]).signum() * ((x[i] != x[j]) as i32 as f64);
                let dy = (y[i] - y[j]).signum() * ((y[i] != y[j]) as i32 as f64);
                if dx == 0.0 && dy == 0.0 {
                    continue;
                } else if dx == 0.0 {
                    tx += 1.0;
                } else if dy == 0.0 {
                    ty += 1.0;
                } else if dx * dy > 0.0 {
                    c += 1.0;
                } else {
                    d += 1.0;
                }
            }
        }
        (c - d) / ((c + d + tx) * (c + d + ty)).sqrt()
    }

    #[test]
    fn kendall_identity_reversal_and_ties() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert!((kendall_tau_b(&x, &x).unwrap().statistic - 1.0).abs() < 1e-12);
        assert!((kendall_tau_b(&x, &rev).unwrap().statistic + 1.0).abs() < 1e-12);

        let a = [1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0, 5.0];
        let b = [2.0, 1.0, 1.0, 3.0, 5.0, 3.0, 4.0, 4.0];
        let ours = kendall_tau_b(&a, &b).unwrap().statistic;
        assert!((ours - kendall_oracle(&a, &b)).abs() < 1e-12);
        assert!(kendall_tau_b(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn percentile_ci_cases() {
        assert_eq!(percentile_ci(&[3.0, 3.0, 3.0], 0.95).unwrap(), (3.0, 3.0));
        let v: Vec<f64> = (0..=100).map(f64::from).collect();
        let (lo, hi) = percentile_ci(&v, 0.95).unwrap();
        assert!((lo - 2.5).abs() < 1e-12 && (hi - 97.5).abs() < 1e-12);
        assert_eq!(percentile_ci(&v, 1.0).unwrap(), (0.0, 100.0));
    }

    #[test]
    fn gini_cases() {
        assert_eq!(gini(&[5.0; 4]).unwrap(), 0.0);
        assert!((gini(&[0.0, 0.0, 0.0, 10.0]).unwrap() - 0.75).abs() < 1e-12);
        assert!(gini(&[0.0, 0.0]).is_err());
        assert!(gini(&[-1.0, 2.0]).is_err());
    }

    #[test]
    fn roc_and_youden_perfect_separation() {
        let scores = [0.1, 0.2, 0.3, 0.7, 0.8, 0.9];
        let pos = [false, false, false, true, true, true];
        let pts = roc_curve(&scores, &pos).unwrap();
        assert_eq!(pts.first().map(|p| (p.fpr, p.tpr)), Some((0.0, 0.0)));
        assert_eq!(pts.last().map(|p| (p.fpr, p.tpr)), Some((1.0, 1.0)));
        let best = pts[youden_index(&pts)];
        assert_eq!(best.tpr - best.fpr, 1.0);
        assert_eq!(best.threshold, 0.7);
    }
}
