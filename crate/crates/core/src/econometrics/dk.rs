use nalgebra::{DMatrix, DVector};

/// `floor(4 (T/100)^(2/9))`.
pub fn auto_bandwidth(t: usize) -> usize {
    (4.0 * (t as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Bartlett kernel weight `1 - j/(m+1)`.
pub fn bartlett_weight(j: usize, m: usize) -> f64 {
    1.0 - j as f64 / (m as f64 + 1.0)
}

/// Driscoll–Kraay long-run covariance of the cross-sectional moment sums.
///
/// `moments[t]` is `h_t = sum_i x_it e_it` for period slot `t` (a zero vector
/// for empty slots). Returns `Omega_0 + sum_{j=1..m} w_j (Omega_j + Omega_j')`
/// with `Omega_j = sum_t h_t h_{t-j}'`.
pub fn driscoll_kraay_meat(moments: &[DVector<f64>], bandwidth: usize) -> DMatrix<f64> {
    let p = moments.first().map_or(0, |h| h.len());
    let mut s = DMatrix::zeros(p, p);
    for h in moments {
        s += h * h.transpose();
    }
    for j in 1..=bandwidth.min(moments.len().saturating_sub(1)) {
        let mut omega = DMatrix::zeros(p, p);
        for t in j..moments.len() {
            omega += &moments[t] * moments[t - j].transpose();
        }
        s += (&omega + omega.transpose()) * bartlett_weight(j, bandwidth);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_bandwidth_values() {
        // 4 * 0.05^(2/9) = 2.051...
        assert_eq!(auto_bandwidth(5), 2);
        assert_eq!(auto_bandwidth(20), 2);
        // 4 * 1 = 4
        assert_eq!(auto_bandwidth(100), 4);
        assert_eq!(auto_bandwidth(1), 1);
    }

    #[test]
    fn bartlett_weights() {
        assert_eq!(bartlett_weight(0, 2), 1.0);
        assert!((bartlett_weight(1, 2) - 2.0 / 3.0).abs() < 1e-15);
        assert!((bartlett_weight(2, 2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn meat_with_one_lag_by_hand() {
        let h = vec![
            DVector::from_vec(vec![1.0]),
            DVector::from_vec(vec![2.0]),
            DVector::from_vec(vec![-1.0]),
        ];
        // Omega_0 = 1 + 4 + 1 = 6; Omega_1 = 2*1 + (-1)*2 = 0
        assert_eq!(driscoll_kraay_meat(&h, 0)[(0, 0)], 6.0);
        assert_eq!(driscoll_kraay_meat(&h, 1)[(0, 0)], 6.0);
        // Omega_2 = -1 * 1 = -1, weight 1/3, doubled
        let s = driscoll_kraay_meat(&h, 2)[(0, 0)];
        assert!((s - (6.0 + 2.0 / 3.0 * 0.0 + 1.0 / 3.0 * -2.0)).abs() < 1e-12);
    }
}
