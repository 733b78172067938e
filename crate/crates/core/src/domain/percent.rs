use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Serialize, Serializer};

/// An exact percentage in `[0, 100]`, held as a rational number.
///
/// Comparisons and means are exact; [`Percent::render`] is the only place a
/// value is rounded (one decimal, half away from zero).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent(Ratio<u64>);

impl Percent {
    pub fn zero() -> Self {
        Percent(Ratio::zero())
    }

    pub fn hundred() -> Self {
        Percent(Ratio::from_integer(100))
    }

    /// `part / whole × 100`.
    ///
    /// # Panics
    /// If `whole` is zero or `part > whole`.
    pub fn from_fraction(part: u64, whole: u64) -> Self {
        assert!(
            whole > 0 && part <= whole,
            "invalid fraction {part}/{whole}"
        );
        Percent(Ratio::new(part * 100, whole))
    }

    /// Exact decimal value of a configured percentage (up to six decimals).
    pub fn from_decimal(value: f64) -> Self {
        let scaled = (value * 1e6).round().max(0.0) as u64;
        Percent(Ratio::new(scaled, 1_000_000))
    }

    pub fn from_ratio(value: Ratio<u64>) -> Self {
        Percent(value)
    }

    /// Arithmetic mean; `None` for an empty input.
    pub fn mean<I: IntoIterator<Item = Percent>>(values: I) -> Option<Percent> {
        let mut sum = Ratio::<u64>::zero();
        let mut n = 0u64;
        for v in values {
            sum += v.0;
            n += 1;
        }
        (n > 0).then(|| Percent(sum / n))
    }

    pub fn ratio(self) -> Ratio<u64> {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Fixed-point rendering with one decimal digit, e.g. `66.7`.
    pub fn render(self) -> String {
        let (p, q) = (*self.0.numer() as u128, *self.0.denom() as u128);
        let tenths = (20 * p + q) / (2 * q);
        format!("{}.{}", tenths / 10, tenths % 10)
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Percent({}/{})", self.0.numer(), self.0.denom())
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}
