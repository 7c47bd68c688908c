//! In-place iterative radix-2 transform.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn norm(self) -> f64 {
        self.re.hypot(self.im)
    }

    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// Forward DFT `X_k = Σ x_n e^{-2πikn/N}`; `data.len()` must be a power of two.
pub fn fft_in_place(data: &mut [Complex]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "length {n} is not a power of two");
    if n < 2 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    // twiddles for the largest stage; smaller stages stride through them
    let twiddles: Vec<Complex> = (0..n / 2)
        .map(|k| {
            let a = -2.0 * PI * k as f64 / n as f64;
            Complex::new(a.cos(), a.sin())
        })
        .collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = data[start + k];
                let b = data[start + k + half].mul(w);
                data[start + k] = Complex::new(a.re + b.re, a.im + b.im);
                data[start + k + half] = Complex::new(a.re - b.re, a.im - b.im);
            }
        }
        len *= 2;
    }
}

/// Transform of a real sequence, zero-padded to `n`.
pub fn fft_real(samples: &[f64], n: usize) -> Vec<Complex> {
    let mut data = vec![Complex::default(); n];
    for (d, &s) in data.iter_mut().zip(samples) {
        d.re = s;
    }
    fft_in_place(&mut data);
    data
}
