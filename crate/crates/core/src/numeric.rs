//! Small numeric helpers.

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of floats.
pub fn ksum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `-p log2 p` with the `0 log 0 = 0` convention.
pub(crate) fn plog2p(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    plog2p(p) + plog2p(1.0 - p)
}

/// Decimal rendering with `digits` significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        return format!("{:.*e}", digits - 1, x);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.116276607563325, 12), "0.116276607563");
        assert_eq!(fmt_sig(2.0, 12), "2");
        assert_eq!(fmt_sig(-1234.5, 12), "-1234.5");
        assert_eq!(fmt_sig(1.0 / 3.0, 4), "0.3333");
        assert_eq!(fmt_sig(1.5e-9, 12), "1.50000000000e-9");
        assert_eq!(fmt_sig(0.0, 12), "0");
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut xs = vec![1.0];
        xs.extend(std::iter::repeat_n(1e-16, 10_000));
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 1.0);
        assert!((ksum(xs.iter().copied()) - (1.0 + 1e-12)).abs() < 1e-20);
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((binary_entropy(0.1) - 0.468_995_593_589_281).abs() < 1e-12);
    }
}
