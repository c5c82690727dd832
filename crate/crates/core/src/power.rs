//! dBm / milliwatt conversions. An empty linear sum maps to `-inf` dBm.

#[allow(unused_imports)]
use num_traits::Float;

#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    (dbm * (core::f64::consts::LN_10 / 10.0)).exp()
}

#[inline]
pub fn mw_to_dbm(mw: f64) -> f64 {
    if mw > 0.0 {
        10.0 * mw.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// dBm of the linear sum of a set of dBm values; `-inf` entries contribute nothing.
pub fn sum_dbm(values: impl IntoIterator<Item = f64>) -> f64 {
    mw_to_dbm(values.into_iter().map(dbm_to_mw).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert!((dbm_to_mw(0.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_mw(-90.0) - 1e-9).abs() < 1e-22);
        assert_eq!(mw_to_dbm(0.0), f64::NEG_INFINITY);
        assert!((mw_to_dbm(1e-6) + 60.0).abs() < 1e-12);
        assert!((sum_dbm([-90.0, -90.0]) - -86.9897).abs() < 1e-4);
        assert_eq!(sum_dbm([f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_eq!(dbm_to_mw(f64::NEG_INFINITY), 0.0);
    }
}
