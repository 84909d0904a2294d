use super::NumericsError;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

/// Unnormalized forward DFT, iterative decimation-in-time.
pub fn fft_radix2(input: &[Complex]) -> Result<Vec<Complex>, NumericsError> {
    let n = input.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(NumericsError::BadLength(n));
    }
    let mut x = input.to_vec();
    let bits = n.trailing_zeros();
    if bits > 0 {
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                x.swap(i, j);
            }
        }
    }

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // Twiddles are evaluated directly rather than by recurrence so the
        // error does not grow with the stage length.
        let twiddles: Vec<Complex> = (0..half)
            .map(|k| Complex::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = x[start + k];
                let b = x[start + k + half] * twiddles[k];
                x[start + k] = a + b;
                x[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
    Ok(x)
}

/// Inverse DFT as conjugate, forward, conjugate, divide by N.
pub fn ifft_radix2(input: &[Complex]) -> Result<Vec<Complex>, NumericsError> {
    let conj: Vec<Complex> = input.iter().map(|c| c.conj()).collect();
    let n = input.len() as f64;
    Ok(fft_radix2(&conj)?
        .into_iter()
        .map(|c| Complex::new(c.re / n, -c.im / n))
        .collect())
}

/// O(N^2) reference DFT.
pub fn dft_direct(input: &[Complex]) -> Vec<Complex> {
    let n = input.len();
    (0..n)
        .map(|k| {
            input.iter().enumerate().fold(Complex::ZERO, |acc, (t, &x)| {
                let theta = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                acc + x * Complex::from_polar(1.0, theta)
            })
        })
        .collect()
}
