//! The sine integral `Si(x) = int_0^x sin(t)/t dt`.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// `Si(x)`: power series for `|x| < 2`, otherwise through the continued
/// fraction of `E_1(i x)`.
pub fn sine_integral(x: f64) -> f64 {
    let t = x.abs();
    let v = if t == 0.0 {
        0.0
    } else if t < 2.0 {
        let mut sum = 0.0;
        let mut term = t;
        let mut k = 0u32;
        loop {
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
            k += 1;
            term *= -t * t / ((2 * k) as f64 * (2 * k + 1) as f64);
        }
        sum
    } else if t.is_infinite() {
        FRAC_PI_2
    } else {
        // modified Lentz on E_1(i t) e^{i t} = 1/(1 + i t - 1/(3 + i t - 4/(5 + i t - ...)))
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 2..10_000u32 {
            let a = -((i - 1) as f64).powi(2);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        let e1 = Complex64::from_polar(1.0, -t) * h;
        FRAC_PI_2 + e1.im
    };
    v.copysign(x)
}
