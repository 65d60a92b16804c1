//! Products of many per-spin factors. Past `LOG_SPACE_THRESHOLD` factors the
//! product is accumulated as a sum of logarithms so that ∏|x_k| cannot
//! underflow before it is exponentiated.

use num_complex::Complex64;

pub const LOG_SPACE_THRESHOLD: usize = 64;

pub fn complex_product<I>(factors: I, count: usize) -> Complex64
where
    I: IntoIterator<Item = Complex64>,
{
    if count <= LOG_SPACE_THRESHOLD {
        return factors.into_iter().fold(Complex64::new(1.0, 0.0), |acc, z| acc * z);
    }
    let mut log_mag = 0.0;
    let mut phase = 0.0;
    for z in factors {
        let r = z.norm();
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        log_mag += r.ln();
        phase += z.arg();
    }
    Complex64::from_polar(log_mag.exp(), phase)
}

/// Product of non-negative reals.
pub fn real_product<I>(factors: I, count: usize) -> f64
where
    I: IntoIterator<Item = f64>,
{
    if count <= LOG_SPACE_THRESHOLD {
        return factors.into_iter().product();
    }
    let mut log_sum = 0.0;
    for x in factors {
        if x <= 0.0 {
            return 0.0;
        }
        log_sum += x.ln();
    }
    log_sum.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_space_agrees_with_direct_product() {
        let zs: Vec<Complex64> = (0..200)
            .map(|k| Complex64::from_polar(0.99 - 0.001 * (k % 7) as f64, 0.01 * k as f64))
            .collect();
        let direct = zs.iter().fold(Complex64::new(1.0, 0.0), |a, z| a * z);
        let logged = complex_product(zs.iter().copied(), zs.len());
        assert!((direct - logged).norm() < 1e-13);
    }

    #[test]
    fn long_real_product() {
        let p = real_product(std::iter::repeat_n(0.5, 1000), 1000);
        assert!(p > 0.0 && (p.ln() - 1000.0 * 0.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn zero_factor() {
        let mut v = vec![0.9; 100];
        v[50] = 0.0;
        assert_eq!(real_product(v.iter().copied(), 100), 0.0);
        let mut z = vec![Complex64::new(0.9, 0.1); 100];
        z[3] = Complex64::new(0.0, 0.0);
        assert_eq!(complex_product(z.iter().copied(), 100), Complex64::new(0.0, 0.0));
    }
}
