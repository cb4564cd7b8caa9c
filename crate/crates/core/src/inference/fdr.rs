use crate::error::{Error, Result};

/// Benjamini-Hochberg step-up selection: with `p_(1) <= .. <= p_(m)`, finds the
/// largest `j` with `p_(j) <= j alpha / m` and returns the (ascending) indices
/// of the `j` smallest p-values.
pub fn fdr_select(p_values: &[f64], alpha: f64) -> Result<Vec<usize>> {
    if p_values.is_empty() {
        return Err(Error::InvalidArgument("no p-values to screen".into()));
    }
    if let Some(bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!("p-value {bad} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let cutoff = (1..=m)
        .rev()
        .find(|&j| p_values[order[j - 1]] <= j as f64 * alpha / m as f64)
        .unwrap_or(0);
    let mut selected = order[..cutoff].to_vec();
    selected.sort_unstable();
    Ok(selected)
}
