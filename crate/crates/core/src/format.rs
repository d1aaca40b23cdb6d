//! Number formatting shared by report writers and the command line.

/// 17 significant digits, enough to round-trip any `f64`.
pub fn machine(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// 6 significant digits, fixed-point for moderate magnitudes.
pub fn human(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    // Round first so that e.g. 999999.7 picks the exponent of its rounded form.
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    let exp = rounded.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, rounded)
    } else {
        format!("{rounded:.5e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_round_trips() {
        for x in [16.0 / 105.0, std::f64::consts::PI / 24.0, -1e-300, 1e300, 0.1 + 0.2] {
            assert_eq!(machine(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(machine(f64::NAN), "NaN");
    }

    #[test]
    fn human_keeps_six_significant_digits() {
        assert_eq!(human(16.0 / 105.0), "0.152381");
        assert_eq!(human(std::f64::consts::PI / 24.0), "0.130900");
        assert_eq!(human(123456.7), "123457");
        assert_eq!(human(999999.7), "1.00000e6");
        assert_eq!(human(-2.5e-7), "-2.50000e-7");
        assert_eq!(human(0.0), "0");
    }
}
