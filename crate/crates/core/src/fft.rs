//! Forward complex FFT for arbitrary lengths.
//!
//! Powers of two use an iterative radix-2 transform; every other length goes
//! through Bluestein's chirp-z reduction onto a power-of-two convolution.
//! The transform is unnormalized: `X[k] = sum_j x[j] exp(-2 pi i j k / n)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    kind: PlanKind,
}

#[derive(Debug, Clone)]
enum PlanKind {
    Radix2(Radix2),
    Bluestein {
        inner: Radix2,
        /// exp(-i pi j^2 / n), j = 0..n
        chirp: Vec<Complex64>,
        /// FFT of the conjugate chirp laid out circularly
        kernel_hat: Vec<Complex64>,
    },
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    /// exp(-2 pi i k / n), k = 0..n/2
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|k| expi(-2.0 * PI * k as f64 / n as f64))
            .collect();
        Self { n, twiddles }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

fn expi(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "FFT length must be positive");
        if n.is_power_of_two() {
            return Self {
                n,
                kind: PlanKind::Radix2(Radix2::new(n)),
            };
        }
        let size = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(size);
        // j^2 mod 2n keeps the chirp argument small and exact
        let chirp: Vec<Complex64> = (0..n)
            .map(|j| {
                let q = (j as u128 * j as u128 % (2 * n as u128)) as f64;
                expi(-PI * q / n as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); size];
        kernel[0] = chirp[0].conj();
        for j in 1..n {
            kernel[j] = chirp[j].conj();
            kernel[size - j] = chirp[j].conj();
        }
        inner.process(&mut kernel, false);
        Self {
            n,
            kind: PlanKind::Bluestein {
                inner,
                chirp,
                kernel_hat: kernel,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform; `buf.len()` must equal the plan length.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "buffer length does not match plan");
        match &self.kind {
            PlanKind::Radix2(r) => r.process(buf, false),
            PlanKind::Bluestein {
                inner,
                chirp,
                kernel_hat,
            } => {
                let size = inner.n;
                let mut work = vec![Complex64::new(0.0, 0.0); size];
                for (w, (x, c)) in work.iter_mut().zip(buf.iter().zip(chirp)) {
                    *w = x * c;
                }
                inner.process(&mut work, false);
                for (w, k) in work.iter_mut().zip(kernel_hat) {
                    *w *= k;
                }
                inner.process(&mut work, true);
                let scale = 1.0 / size as f64;
                for (out, (w, c)) in buf.iter_mut().zip(work.iter().zip(chirp)) {
                    *out = w * c * scale;
                }
            }
        }
    }
}
