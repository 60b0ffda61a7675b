//! Small quadrature toolbox: tanh-sinh for endpoint singularities, composite
//! Simpson, Gauss-Legendre nodes, and exact power-function cell integrals.

use crate::real::Real;

/// Tanh-sinh (double exponential) quadrature of `f` over `(a, b)`.
///
/// Handles integrable endpoint singularities; doubles the node density until
/// two successive levels agree to `rel_tol` or `max_level` is reached. The
/// distance of each node to its endpoint is computed directly (not as a
/// difference of near-equal quantities), so singular integrands keep full
/// precision.
pub fn tanh_sinh<T: Real>(f: impl Fn(T) -> T, a: T, b: T, rel_tol: T, max_level: usize) -> T {
    let half = (b - a) / T::of(2.0);
    let pi_half = T::FRAC_PI_2();
    let t_max = T::of(4.0); // tanh(pi/2 sinh 4) is 1 to double precision

    // Node pair at abscissa +-t: both share the weight; each is evaluated at
    // distance d = half * (1 - tanh(pi/2 sinh t)) from its endpoint, with
    // 1 - tanh(s) = 2 e^{-2s} / (1 + e^{-2s}) evaluated stably.
    let eval_pair = |t: T| -> T {
        let s = pi_half * t.sinh();
        let e = (-T::of(2.0) * s).exp();
        let d = half * T::of(2.0) * e / (T::one() + e);
        let c = s.cosh();
        let w = half * pi_half * t.cosh() / (c * c);
        if !w.is_finite() || w == T::zero() || d <= T::zero() {
            return T::zero();
        }
        let left = f(a + d);
        let right = if t == T::zero() { T::zero() } else { f(b - d) };
        let mut acc = T::zero();
        if left.is_finite() {
            acc += left * w;
        }
        if right.is_finite() {
            acc += right * w;
        }
        acc
    };

    let mut h = T::one();
    let mut sum = eval_pair(T::zero());
    let mut k = 1usize;
    loop {
        let t = T::of_usize(k) * h;
        if t > t_max {
            break;
        }
        sum += eval_pair(t);
        k += 1;
    }
    let mut prev = sum * h;

    for _ in 0..max_level {
        h = h / T::of(2.0);
        // add the new odd-index nodes
        let mut k = 1usize;
        loop {
            let t = T::of_usize(k) * h;
            if t > t_max {
                break;
            }
            sum += eval_pair(t);
            k += 2;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= rel_tol * cur.abs().max(T::of(1e-300)) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Composite Simpson rule with `n` subintervals (`n` is rounded up to even).
pub fn simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let n = if n % 2 == 0 { n.max(2) } else { n + 1 };
    let h = (b - a) / T::of_usize(n);
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { T::of(4.0) } else { T::of(2.0) };
        sum += w * f(a + T::of_usize(k) * h);
    }
    sum * h / T::of(3.0)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre polynomial.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::of_usize(n);
    for i in 0..n {
        // Chebyshev-based initial guess
        let theta = T::PI() * (T::of_usize(i) + T::of(0.75)) / (nf + T::of(0.5));
        let mut x = theta.cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x = x - dx;
            if dx.abs() < T::of(1e-16) {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = T::of(2.0) / ((T::one() - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::of_usize(k);
        let p2 = ((T::of(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = T::of_usize(n) * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

/// Exact `∫_{lo}^{hi} u^p du`, with the logarithmic branch at `p = -1`.
///
/// Requires `0 < lo <= hi` when `p < 0`.
pub fn int_pow<T: Real>(lo: T, hi: T, p: T) -> T {
    if (p + T::one()).abs() < T::of(1e-12) {
        (hi / lo).ln()
    } else {
        let q = p + T::one();
        (hi.powf(q) - lo.powf(q)) / q
    }
}

/// Exact `∫_{lo}^{hi} |y|^a dy` for a cell not straddling 0 (`lo, hi` of one
/// sign) or starting at 0 (`a > -1`).
pub fn weight_cell_mass<T: Real>(lo: T, hi: T, a: T) -> T {
    debug_assert!(hi >= lo);
    let (lo, hi) = if lo < T::zero() { (-hi, -lo) } else { (lo, hi) };
    let q = a + T::one();
    (hi.powf(q) - lo.max(T::zero()).powf(q)) / q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let v = tanh_sinh(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-13, 12);
        assert!((v - 2.0).abs() < 1e-11, "got {v}");
    }

    #[test]
    fn tanh_sinh_smooth_integrand() {
        let v = tanh_sinh(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 12);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_polynomial_exact() {
        let v = simpson(|x: f64| x * x * x, 0.0, 2.0, 16);
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_high_degree() {
        let (x, w) = gauss_legendre::<f64>(8);
        // degree-15 polynomial is exact for 8 nodes
        let v: f64 = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| wi * xi.powi(14))
            .sum();
        assert!((v - 2.0 / 15.0).abs() < 1e-13, "got {v}");
    }

    #[test]
    fn int_pow_log_branch() {
        assert!((int_pow(1.0f64, std::f64::consts::E, -1.0) - 1.0).abs() < 1e-12);
        assert!((int_pow(1.0f64, 2.0, 2.0) - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn weight_mass_mirrors() {
        let a = -0.5f64;
        let pos = weight_cell_mass(0.5, 1.0, a);
        let neg = weight_cell_mass(-1.0, -0.5, a);
        assert!((pos - neg).abs() < 1e-14);
        let from_zero = weight_cell_mass(0.0, 1.0, a);
        assert!((from_zero - 2.0).abs() < 1e-14); // ∫_0^1 y^{-1/2} = 2
    }
}
