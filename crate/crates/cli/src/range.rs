use std::str::FromStr;

use crate::format::round_sig;

/// An inclusive `lo:hi:step` grid of budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl FromStr for EpsilonRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("expected lo:hi:step, got '{s}'"));
        };
        let parse = |name: &str, v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("{name} '{v}' is not a finite number"))
        };
        let range = EpsilonRange {
            lo: parse("lo", lo)?,
            hi: parse("hi", hi)?,
            step: parse("step", step)?,
        };
        if range.lo < 0.0 {
            return Err(format!("lo = {} must be >= 0", range.lo));
        }
        if range.step <= 0.0 {
            return Err(format!("step = {} must be > 0", range.step));
        }
        Ok(range)
    }
}

impl EpsilonRange {
    /// Grid values `lo + i * step` up to `hi`, rounded to 12 significant
    /// digits. Empty when `hi < lo`.
    pub fn values(&self) -> Vec<f64> {
        if self.hi < self.lo {
            return Vec::new();
        }
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| round_sig(self.lo + i as f64 * self.step, 12))
            .collect()
    }
}
