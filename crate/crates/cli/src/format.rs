use serde_json::Value;

/// Significant digits for closed-form values.
pub const ANALYTIC_DIGITS: usize = 12;
/// Significant digits for Monte Carlo estimates.
pub const MC_DIGITS: usize = 6;

/// Rounds `x` to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// A JSON number rounded to `digits` significant digits; `null` if not finite.
pub fn num(x: f64, digits: usize) -> Value {
    serde_json::Number::from_f64(round_sig(x, digits))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Plain decimal text for CSV cells.
pub fn cell(x: f64, digits: usize) -> String {
    let r = round_sig(x, digits);
    if r == 0.0 {
        // Avoid "-0".
        return "0".to_owned();
    }
    format!("{r}")
}
