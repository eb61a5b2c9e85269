use super::{GbtConfig, MatrixView};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    /// Rows with `x[feature] < threshold` go left.
    pub threshold: f64,
    pub gain: f64,
}

/// Regularized gain of splitting `(G, H)` into `(G_L, H_L)` and the rest.
pub fn split_gain(g_left: f64, h_left: f64, g_total: f64, h_total: f64, lambda: f64, gamma: f64) -> f64 {
    let g_right = g_total - g_left;
    let h_right = h_total - h_left;
    0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda)
        - g_total * g_total / (h_total + lambda))
        - gamma
}

/// Midpoint of two consecutive distinct values, nudged so that
/// `lo < threshold <= hi` survives rounding.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid <= lo {
        hi
    } else {
        mid
    }
}

/// Scans one feature's rows in ascending value order. `order` lists row
/// indices sorted by that feature. Returns the best `(threshold, gain)`,
/// keeping the first (lowest threshold) on ties.
pub(crate) fn scan_feature(
    x: MatrixView<'_>,
    feature: usize,
    order: &[usize],
    g: &[f64],
    h: &[f64],
    g_total: f64,
    h_total: f64,
    config: &GbtConfig,
) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    let (mut g_left, mut h_left) = (0.0, 0.0);
    for w in 0..order.len().saturating_sub(1) {
        let i = order[w];
        g_left += g[i];
        h_left += h[i];
        let lo = x.get(i, feature);
        let hi = x.get(order[w + 1], feature);
        if lo >= hi {
            continue;
        }
        if h_left < config.min_child_weight || h_total - h_left < config.min_child_weight {
            continue;
        }
        let gain = split_gain(g_left, h_left, g_total, h_total, config.lambda, config.gamma);
        if best.is_none_or(|(_, b)| gain > b) {
            best = Some((midpoint(lo, hi), gain));
        }
    }
    best
}

/// Exact greedy search over every feature and every midpoint between
/// consecutive distinct values. Returns the highest-gain split with positive
/// gain, preferring the lowest feature index and then the lowest threshold.
pub fn best_split(x: MatrixView<'_>, g: &[f64], h: &[f64], config: &GbtConfig) -> Option<Split> {
    let rows: Vec<usize> = (0..x.rows()).collect();
    let orders: Vec<Vec<usize>> = (0..x.cols())
        .map(|f| {
            let mut o = rows.clone();
            o.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
            o
        })
        .collect();
    best_split_sorted(x, g, h, &orders, config)
}

pub(crate) fn best_split_sorted(
    x: MatrixView<'_>,
    g: &[f64],
    h: &[f64],
    orders: &[Vec<usize>],
    config: &GbtConfig,
) -> Option<Split> {
    let rows = &orders[0];
    if rows.len() < 2 {
        return None;
    }
    let g_total: f64 = rows.iter().map(|&i| g[i]).sum();
    let h_total: f64 = rows.iter().map(|&i| h[i]).sum();
    let mut best: Option<Split> = None;
    for (feature, order) in orders.iter().enumerate() {
        if let Some((threshold, gain)) = scan_feature(x, feature, order, g, h, g_total, h_total, config) {
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(Split { feature, threshold, gain });
            }
        }
    }
    best.filter(|s| s.gain > 0.0)
}
