use statrs::function::erf::erfc_inv;

/// `Q^2_dB = 20 log10(sqrt(2) erfcinv(2 P_b))`.
///
/// `P_b <= 0` (no errors counted) maps to `+inf` and `P_b >= 0.5` to `-inf`.
pub fn qfactor_from_ber(ber: f64) -> f64 {
    if ber.is_nan() {
        return f64::NAN;
    }
    if ber <= 0.0 {
        return f64::INFINITY;
    }
    if ber >= 0.5 {
        return f64::NEG_INFINITY;
    }
    20.0 * (std::f64::consts::SQRT_2 * erfc_inv(2.0 * ber)).log10()
}

/// One-sigma binomial interval `[lo, hi]` of `Q^2_dB` for `errors` out of `bits`.
pub fn qfactor_interval(errors: u64, bits: u64) -> (f64, f64) {
    if bits == 0 {
        return (f64::NAN, f64::NAN);
    }
    let n = bits as f64;
    let p = errors as f64 / n;
    let sigma = (p * (1.0 - p) / n).sqrt();
    (qfactor_from_ber(p + sigma), qfactor_from_ber(p - sigma))
}
