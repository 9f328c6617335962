//! Integer-valued, right-continuous step functions with finitely many jumps.

use alloc::vec::Vec;

/// `values[0]` holds on `(-inf, breakpoints[0])`, `values[k]` on
/// `[breakpoints[k-1], breakpoints[k])` and the last value from the last
/// breakpoint on.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<i64>,
}

impl StepFunction {
    pub fn zero() -> Self {
        Self { breakpoints: Vec::new(), values: alloc::vec![0] }
    }

    /// Builds from raw data, merging equal neighbouring values. Panics if the
    /// lengths are inconsistent or breakpoints are not strictly ascending.
    pub fn new(breakpoints: Vec<f64>, values: Vec<i64>) -> Self {
        assert_eq!(values.len(), breakpoints.len() + 1, "one value per interval");
        assert!(breakpoints.windows(2).all(|w| w[0] < w[1]), "breakpoints must ascend strictly");
        let mut out = Self { breakpoints: Vec::new(), values: alloc::vec![values[0]] };
        for (b, v) in breakpoints.into_iter().zip(values.into_iter().skip(1)) {
            if v != *out.values.last().expect("non-empty") {
                out.breakpoints.push(b);
                out.values.push(v);
            }
        }
        out
    }

    /// `N_a(lambda) - N_b(lambda)` where `N` counts eigenvalues `<= lambda`.
    pub fn counting_difference(a: &[f64], b: &[f64]) -> Self {
        let mut events: Vec<(f64, i64)> = a.iter().map(|&e| (e, 1)).chain(b.iter().map(|&e| (e, -1))).collect();
        events.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut breakpoints = Vec::new();
        let mut values = alloc::vec![0i64];
        let mut level = 0i64;
        let mut i = 0;
        while i < events.len() {
            let x = events[i].0;
            while i < events.len() && events[i].0 == x {
                level += events[i].1;
                i += 1;
            }
            breakpoints.push(x);
            values.push(level);
        }
        Self::new(breakpoints, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn value_at(&self, x: f64) -> i64 {
        self.values[self.breakpoints.partition_point(|&b| b <= x)]
    }

    /// Value to the left of the first jump and to the right of the last one.
    pub fn tails(&self) -> (i64, i64) {
        (self.values[0], *self.values.last().expect("non-empty"))
    }

    pub fn is_compactly_supported(&self) -> bool {
        self.tails() == (0, 0)
    }

    /// Pointwise linear combination `alpha * self + beta * other`.
    pub fn combine(&self, alpha: i64, other: &Self, beta: i64) -> Self {
        let mut pts: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut values = alloc::vec![alpha * self.values[0] + beta * other.values[0]];
        values.extend(pts.iter().map(|&x| alpha * self.value_at(x) + beta * other.value_at(x)));
        Self::new(pts, values)
    }

    /// Pieces `(lo, hi, value)` of the restriction to `[a, b]`, skipping zeros.
    pub fn pieces(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64, i64)> + '_ {
        let n = self.breakpoints.len();
        (0..=n).filter_map(move |k| {
            let lo = if k == 0 { f64::NEG_INFINITY } else { self.breakpoints[k - 1] };
            let hi = if k == n { f64::INFINITY } else { self.breakpoints[k] };
            let (lo, hi) = (lo.max(a), hi.min(b));
            (hi > lo && self.values[k] != 0).then_some((lo, hi, self.values[k]))
        })
    }

    /// `int_a^b xi(x) f'(x) dx` given an antiderivative `big_f` of `f'`,
    /// summed exactly over the constant pieces.
    pub fn integrate_antiderivative<T, F>(&self, a: f64, b: f64, mut big_f: F) -> T
    where
        T: Default + core::ops::Add<Output = T> + core::ops::Sub<Output = T> + core::ops::Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let mut acc = T::default();
        for (lo, hi, v) in self.pieces(a, b) {
            acc = acc + (big_f(hi) - big_f(lo)) * v as f64;
        }
        acc
    }

    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        self.integrate_antiderivative(a, b, |x| x)
    }

    pub fn abs_integral_over(&self, a: f64, b: f64) -> f64 {
        self.pieces(a, b).map(|(lo, hi, v)| (hi - lo) * v.abs() as f64).sum()
    }

    /// `int xi` over the real line; `None` unless compactly supported.
    pub fn integral(&self) -> Option<f64> {
        let (lo, hi) = self.support_hull()?;
        Some(self.integral_over(lo, hi))
    }

    pub fn abs_integral(&self) -> Option<f64> {
        let (lo, hi) = self.support_hull()?;
        Some(self.abs_integral_over(lo, hi))
    }

    fn support_hull(&self) -> Option<(f64, f64)> {
        if !self.is_compactly_supported() {
            return None;
        }
        match (self.breakpoints.first(), self.breakpoints.last()) {
            (Some(&lo), Some(&hi)) => Some((lo, hi)),
            _ => Some((0.0, 0.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_difference_of_shifted_point() {
        let s = StepFunction::counting_difference(&[0.0], &[2.0]);
        assert_eq!(s.value_at(-1.0), 0);
        assert_eq!(s.value_at(0.0), 1);
        assert_eq!(s.value_at(1.9), 1);
        assert_eq!(s.value_at(2.0), 0);
        assert_eq!(s.integral(), Some(2.0));
    }

    #[test]
    fn coincident_eigenvalues_cancel() {
        let s = StepFunction::counting_difference(&[0.0, 1.0], &[1.0, 3.0]);
        assert_eq!(s.breakpoints(), &[0.0, 3.0]);
        assert_eq!(s.integral(), Some(3.0));
    }

    #[test]
    fn combine_and_tails() {
        let a = StepFunction::new(alloc::vec![0.0], alloc::vec![0, 1]);
        let b = StepFunction::new(alloc::vec![1.0], alloc::vec![0, 1]);
        let d = a.combine(1, &b, -1);
        assert!(d.is_compactly_supported());
        assert_eq!(d.integral(), Some(1.0));
        assert_eq!(a.integral(), None);
        assert_eq!(a.integral_over(-3.0, 2.5), 2.5);
    }

    #[test]
    fn antiderivative_integration() {
        let s = StepFunction::counting_difference(&[0.0], &[1.0]);
        // int_0^1 2x dx = 1
        let v: f64 = s.integrate_antiderivative(-5.0, 5.0, |x| x * x);
        assert!((v - 1.0).abs() < 1e-15);
    }
}
