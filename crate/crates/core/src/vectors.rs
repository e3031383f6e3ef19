//! Sparse row vectors, smoothed TF-IDF and cosine similarity.

use crate::par;

/// Sparse row: `(column, value)` pairs sorted by column, no explicit zeros.
pub type SparseRow = Vec<(usize, f64)>;

/// `ln((1 + n) / (1 + df)) + 1`; strictly positive, so TF-IDF keeps the
/// zero pattern of the raw counts.
pub fn smooth_idf(df: usize, n_rows: usize) -> f64 {
    ((1.0 + n_rows as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Raw-count tf times smoothed idf, with `n_rows = rows.len()`.
pub fn tfidf(rows: &[SparseRow], n_cols: usize) -> Vec<SparseRow> {
    let mut df = vec![0usize; n_cols];
    for row in rows {
        for &(c, v) in row {
            if v != 0.0 {
                df[c] += 1;
            }
        }
    }
    let idf: Vec<f64> = df.iter().map(|&d| smooth_idf(d, rows.len())).collect();
    rows.iter()
        .map(|row| {
            row.iter()
                .filter(|(_, v)| *v != 0.0)
                .map(|&(c, v)| (c, v * idf[c]))
                .collect()
        })
        .collect()
}

pub fn norm(row: &[(usize, f64)]) -> f64 {
    row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
}

pub fn l2_normalize(row: &[(usize, f64)]) -> SparseRow {
    let n = norm(row);
    if n == 0.0 {
        return Vec::new();
    }
    row.iter().map(|&(c, v)| (c, v / n)).collect()
}

pub fn dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Cosine similarity; zero when either row is empty.
pub fn cosine(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(0.0, 1.0)
}

/// All positive cosine similarities among nonnegative rows. Entry `i` lists
/// `(j, sim)` for `j > i`, ascending in `j`. Each row's sums accumulate in
/// column order, so output is identical for any worker count.
pub fn pairwise_cosine(rows: &[SparseRow], n_cols: usize) -> Vec<Vec<(usize, f64)>> {
    let unit: Vec<SparseRow> = rows.iter().map(|r| l2_normalize(r)).collect();
    let mut postings: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_cols];
    for (i, row) in unit.iter().enumerate() {
        for &(c, v) in row {
            postings[c].push((i, v));
        }
    }
    let n = unit.len();
    par::map_range_init(
        n,
        || (vec![0.0f64; n], Vec::<usize>::new()),
        |(acc, touched), i| {
            for &(c, v) in &unit[i] {
                let list = &postings[c];
                let start = list.partition_point(|&(j, _)| j <= i);
                for &(j, w) in &list[start..] {
                    if acc[j] == 0.0 {
                        touched.push(j);
                    }
                    acc[j] += v * w;
                }
            }
            touched.sort_unstable();
            let out = touched
                .iter()
                .filter_map(|&j| {
                    let s = acc[j].min(1.0);
                    (s > 0.0).then_some((j, s))
                })
                .collect();
            for &j in touched.iter() {
                acc[j] = 0.0;
            }
            touched.clear();
            out
        },
    )
}
