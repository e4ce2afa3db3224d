//! Fourier-collocation operators in θ applied as circulant convolutions in
//! physical space. Symmetric kernels use paired differences
//! c_l((x_{j−l} − x_j) + (x_{j+l} − x_j)) and antisymmetric ones
//! c_l(x_{j−l} − x_{j+l}); the same operation sequence runs at every j, so
//! grid rotations and reflections commute with the operators bit for bit.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Circulant {
    n: usize,
    antisymmetric: bool,
    /// c_l for l = 0..=N/2
    c: Vec<f64>,
    /// Symbol at k = 0 (sum of the kernel).
    total: f64,
}

impl Circulant {
    /// Even real symbol σ(k) on k = 0..=N/2 (Nyquist included once).
    pub fn symmetric(n: usize, symbol: impl Fn(usize) -> f64) -> Self {
        let half = n / 2;
        let s: Vec<f64> = (0..=half).map(&symbol).collect();
        let c = (0..=half)
            .map(|l| {
                let th = 2.0 * PI * l as f64 / n as f64;
                let mut acc = s[0] + s[half] * (half as f64 * th).cos();
                for (k, sk) in s.iter().enumerate().take(half).skip(1) {
                    acc += 2.0 * sk * (k as f64 * th).cos();
                }
                acc / n as f64
            })
            .collect();
        Self { n, antisymmetric: false, c, total: s[0] }
    }

    /// ∂θ: symbol ik for |k| < N/2, zero at Nyquist.
    pub fn d1(n: usize) -> Self {
        let half = n / 2;
        let c = (0..=half)
            .map(|l| {
                let th = 2.0 * PI * l as f64 / n as f64;
                let mut acc = 0.0;
                for k in 1..half {
                    acc += k as f64 * (k as f64 * th).sin();
                }
                -2.0 * acc / n as f64
            })
            .collect();
        Self { n, antisymmetric: true, c, total: 0.0 }
    }

    /// ∂θθ: symbol −k².
    pub fn d2(n: usize) -> Self {
        Self::symmetric(n, |k| -((k * k) as f64))
    }

    /// (α − β∂θθ)⁻¹: symbol 1/(α + βk²).
    pub fn helmholtz_inverse(n: usize, alpha: f64, beta: f64) -> Self {
        Self::symmetric(n, |k| 1.0 / (alpha + beta * (k * k) as f64))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// y = K x for one ring. `ext` is scratch space of length ≥ 2N.
    pub fn apply(&self, x: &[f64], y: &mut [f64], ext: &mut Vec<f64>) {
        let n = self.n;
        let half = n / 2;
        ext.clear();
        ext.extend_from_slice(x);
        ext.extend_from_slice(x);
        if self.antisymmetric {
            y.iter_mut().for_each(|v| *v = 0.0);
            for l in 1..half {
                let cl = self.c[l];
                for j in 0..n {
                    y[j] += cl * (ext[j + n - l] - ext[j + l]);
                }
            }
        } else {
            for j in 0..n {
                y[j] = self.total * x[j];
            }
            for l in 1..half {
                let cl = self.c[l];
                for j in 0..n {
                    y[j] += cl * ((ext[j + n - l] - x[j]) + (ext[j + l] - x[j]));
                }
            }
            let cn = self.c[half];
            for j in 0..n {
                y[j] += cn * (ext[j + half] - x[j]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(k: &Circulant, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        let mut ext = Vec::new();
        k.apply(x, &mut y, &mut ext);
        y
    }

    #[test]
    fn derivatives_of_trig_polynomials() {
        let n = 32;
        let th: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
        let x: Vec<f64> = th.iter().map(|t| (3.0 * t).sin() + 0.5 * (7.0 * t).cos()).collect();
        let d1 = apply(&Circulant::d1(n), &x);
        let d2 = apply(&Circulant::d2(n), &x);
        for j in 0..n {
            let t = th[j];
            assert!((d1[j] - (3.0 * (3.0 * t).cos() - 3.5 * (7.0 * t).sin())).abs() < 1e-12);
            assert!((d2[j] - (-9.0 * (3.0 * t).sin() - 24.5 * (7.0 * t).cos())).abs() < 1e-11);
        }
    }

    #[test]
    fn constants_are_exact() {
        let x = vec![1.7; 16];
        assert!(apply(&Circulant::d2(16), &x).iter().all(|&v| v == 0.0));
        assert!(apply(&Circulant::d1(16), &x).iter().all(|&v| v == 0.0));
        let inv = apply(&Circulant::helmholtz_inverse(16, 2.0, 0.3), &x);
        assert!(inv.iter().all(|&v| v == 1.7 * 0.5));
    }

    #[test]
    fn helmholtz_inverse_inverts() {
        let n = 24;
        let (a, b) = (1.5, 0.37);
        let x: Vec<f64> = (0..n).map(|j| ((j * j) % 7) as f64 - 3.0).collect();
        let y = apply(&Circulant::helmholtz_inverse(n, a, b), &x);
        let d2y = apply(&Circulant::d2(n), &y);
        for j in 0..n {
            assert!((a * y[j] - b * d2y[j] - x[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_and_reflection_are_bitwise() {
        let n = 16;
        let x: Vec<f64> = (0..n).map(|j| (j as f64 * 0.731).sin() + 0.1 * j as f64).collect();
        for k in [Circulant::d1(n), Circulant::d2(n), Circulant::helmholtz_inverse(n, 1.0, 0.2)] {
            let y = apply(&k, &x);
            let xs: Vec<f64> = (0..n).map(|j| x[(j + n - 5) % n]).collect();
            let ys = apply(&k, &xs);
            for j in 0..n {
                assert_eq!(ys[j].to_bits(), y[(j + n - 5) % n].to_bits());
            }
            let xr: Vec<f64> = (0..n).map(|j| x[(n - j) % n]).collect();
            let yr = apply(&k, &xr);
            for j in 0..n {
                let want = y[(n - j) % n];
                let want = if k.antisymmetric { -want } else { want };
                // equal as floats (the sign of an exact zero may differ)
                assert_eq!(yr[j], want);
            }
        }
    }
}
