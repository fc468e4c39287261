use num_complex::Complex64;

/// Values that the integrators can accumulate: reals, complex numbers and
/// small fixed-size vectors of either.
pub trait QuadValue: Copy + Send + Sync + std::fmt::Debug {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, k: f64) -> Self;
    /// Max-norm over components.
    fn norm(&self) -> f64;
    /// Componentwise absolute value, as the same type.
    fn abs(self) -> Self;
    /// One Neumaier step on `(sum, comp)`.
    fn neumaier(sum: &mut Self, comp: &mut Self, x: Self);
}

#[inline]
fn neumaier_f64(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(&self) -> f64 {
        f64::abs(*self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn neumaier(sum: &mut Self, comp: &mut Self, x: Self) {
        neumaier_f64(sum, comp, x)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
    fn abs(self) -> Self {
        Complex64::new(self.re.abs(), self.im.abs())
    }
    fn neumaier(sum: &mut Self, comp: &mut Self, x: Self) {
        neumaier_f64(&mut sum.re, &mut comp.re, x.re);
        neumaier_f64(&mut sum.im, &mut comp.im, x.im);
    }
}

impl<T: QuadValue, const N: usize> QuadValue for [T; N] {
    fn zero() -> Self {
        [T::zero(); N]
    }
    fn add(self, o: Self) -> Self {
        std::array::from_fn(|i| self[i].add(o[i]))
    }
    fn sub(self, o: Self) -> Self {
        std::array::from_fn(|i| self[i].sub(o[i]))
    }
    fn scale(self, k: f64) -> Self {
        self.map(|v| v.scale(k))
    }
    fn norm(&self) -> f64 {
        self.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
    fn abs(self) -> Self {
        self.map(|v| v.abs())
    }
    fn neumaier(sum: &mut Self, comp: &mut Self, x: Self) {
        for i in 0..N {
            T::neumaier(&mut sum[i], &mut comp[i], x[i]);
        }
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<V: QuadValue> {
    sum: V,
    comp: V,
}

impl<V: QuadValue> Default for CompensatedSum<V> {
    fn default() -> Self {
        Self { sum: V::zero(), comp: V::zero() }
    }
}

impl<V: QuadValue> CompensatedSum<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: V) {
        V::neumaier(&mut self.sum, &mut self.comp, x);
    }

    pub fn value(&self) -> V {
        self.sum.add(self.comp)
    }
}

impl<V: QuadValue> FromIterator<V> for CompensatedSum<V> {
    fn from_iter<I: IntoIterator<Item = V>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of a sequence, in iteration order.
pub fn compensated_sum<V: QuadValue, I: IntoIterator<Item = V>>(iter: I) -> V {
    iter.into_iter().collect::<CompensatedSum<V>>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_lost_bits() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn vector_values_sum_componentwise() {
        let xs = [[1.0, 2.0], [3.0, -2.0]];
        assert_eq!(compensated_sum(xs), [4.0, 0.0]);
        assert_eq!([1.0f64, -3.0].norm(), 3.0);
    }
}
