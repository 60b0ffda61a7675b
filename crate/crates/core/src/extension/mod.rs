//! The extension problem: explicit kernels, Poisson and variational
//! extension solvers, weighted Neumann traces, the conjugate equation,
//! even reflection, mixed (fractional Dirichlet) problems, and the
//! nondivergence regularization.

mod conjugate;
mod nondiv;
mod poisson;
mod reflect;
mod trace;
mod variational;

pub use conjugate::conjugate_residual;
pub use nondiv::{solve_regularized_nondiv, DiscGrid, NondivSolution};
pub use poisson::{extend_poisson, PoissonClosure};
pub use reflect::{reflect_even, weak_form_residual, SmoothBump};
pub use trace::{neumann_trace, TraceMethod};
pub use variational::{
    extend_variational, solve_mixed, weighted_energy, MixedBoundarySpec, SideClosure,
    SolveOptions, TopClosure,
};

use crate::error::{Error, Result};
use crate::field::SampledFunction;
use crate::grid::VerticalGrid;
use crate::order::FracOrder;
use crate::quadrature::tanh_sinh;
use crate::real::Real;
use crate::singular_integral::normalization_constant;
use crate::symbol_ode::symbol_constant;

/// `∫_{ℝⁿ} (1 + |x|²)^{-β} dx` by tanh-sinh quadrature after `x = tan θ`
/// (radially for n = 2). The endpoint singularity `cos^{2β-2-n+1}θ` is
/// integrable for every exponent this crate needs.
fn half_space_mass<T: Real>(dim: usize, beta: T) -> T {
    match dim {
        1 => {
            // ∫ (1+x²)^{-β} dx = ∫ cos^{2β-2}θ dθ over (-π/2, π/2)
            let e = T::of(2.0) * beta - T::of(2.0);
            tanh_sinh(
                |theta: T| theta.cos().powf(e),
                -T::FRAC_PI_2(),
                T::FRAC_PI_2(),
                T::of(1e-14),
                14,
            )
        }
        2 => {
            // 2π ∫_0^∞ r (1+r²)^{-β} dr = 2π ∫ sinθ cos^{2β-3}θ dθ
            let e = T::of(2.0) * beta - T::of(3.0);
            T::of(2.0)
                * T::PI()
                * tanh_sinh(
                    |theta: T| theta.sin() * theta.cos().powf(e),
                    T::zero(),
                    T::FRAC_PI_2(),
                    T::of(1e-14),
                    14,
                )
        }
        _ => unreachable!(),
    }
}

/// The Poisson kernel of the weighted extension problem, normalized so its
/// spatial mass is exactly 1 at every height.
///
/// `P(x,y) = C_{n,a} y^{1-a} / (|x|² + y²)^{(n+1-a)/2}`; the constant comes
/// from numerical normalization, not from a closed form.
#[derive(Clone, Debug)]
pub struct PoissonKernelSpec<T> {
    order: FracOrder<T>,
    dim: usize,
    constant: T,
}

impl<T: Real> PoissonKernelSpec<T> {
    pub fn new(order: FracOrder<T>, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Domain(format!("dimension must be 1 or 2, got {dim}")));
        }
        let beta = (T::of_usize(dim) + T::one() - order.a()) / T::of(2.0);
        let mass = half_space_mass(dim, beta);
        Ok(Self {
            order,
            dim,
            constant: mass.recip(),
        })
    }

    pub fn order(&self) -> FracOrder<T> {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The normalization constant `C_{n,a}`.
    pub fn constant(&self) -> T {
        self.constant
    }

    /// `P(x, y)` for `|x| = r`.
    pub fn eval_radial(&self, r: T, y: T) -> Result<T> {
        if !(y > T::zero()) {
            return Err(Error::Domain(format!("y must be positive, got {y}")));
        }
        let a = self.order.a();
        let e = (T::of_usize(self.dim) + T::one() - a) / T::of(2.0);
        Ok(self.constant * y.powf(T::one() - a) / (r * r + y * y).powf(e))
    }

    pub fn eval(&self, x: &[T], y: T) -> Result<T> {
        self.eval_radial(norm(x), y)
    }

    /// The nondivergence-form kernel `P̃(x, z)`, equal to `P(x, y(z))`
    /// pointwise under the coordinate map.
    pub fn eval_z(&self, x: &[T], z: T) -> Result<T> {
        if !(z > T::zero()) {
            return Err(Error::Domain(format!("z must be positive, got {z}")));
        }
        let a = self.order.a();
        let c = T::one() - a;
        let r = norm(x);
        let e = (T::of_usize(self.dim) + T::one() - a) / T::of(2.0);
        // constant compensated by (1-a)^{1-a} so that P̃ = P ∘ map exactly
        Ok(self.constant * c.powf(c) * z / (r * r + c * c * z.powf(T::of(2.0) / c)).powf(e))
    }

    /// Quadrature check of `∫ P(x, y) dx`; equals 1 up to the tolerance of
    /// the normalization integral, independent of `y` by self-similarity.
    pub fn mass_check(&self, y: T) -> Result<T> {
        if !(y > T::zero()) {
            return Err(Error::Domain(format!("y must be positive, got {y}")));
        }
        let beta = (T::of_usize(self.dim) + T::one() - self.order.a()) / T::of(2.0);
        Ok(self.constant * half_space_mass(self.dim, beta))
    }
}

fn norm<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
}

/// The fundamental solution `Γ(X) = C |X|^{-(n-1+a)}` of the weighted
/// equation, singular at the origin, normalized to unit Dirac flux through
/// the weighted Neumann derivative.
///
/// Requires `n - 1 + a > 1`; the borderline and logarithmic cases are
/// rejected.
#[derive(Clone, Debug)]
pub struct FundamentalSolution<T> {
    order: FracOrder<T>,
    dim: usize,
    /// Homogeneity degree `q = n - 1 + a`.
    q: T,
    constant: T,
}

impl<T: Real> FundamentalSolution<T> {
    pub fn new(order: FracOrder<T>, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Domain(format!("dimension must be 1 or 2, got {dim}")));
        }
        let q = T::of_usize(dim) - T::one() + order.a();
        if !(q > T::one()) {
            return Err(Error::Domain(format!(
                "fundamental solution needs n - 1 + a > 1, got {q} (logarithmic regime)"
            )));
        }
        // unit flux: ∫ -y^a ∂_y Γ dx = C q ∫ (1+|x|²)^{-(q+2)/2} dx = 1
        let mass = half_space_mass(dim, (q + T::of(2.0)) / T::of(2.0));
        Ok(Self {
            order,
            dim,
            q,
            constant: (q * mass).recip(),
        })
    }

    pub fn constant(&self) -> T {
        self.constant
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn eval(&self, x: &[T], y: T) -> Result<T> {
        let r2 = x.iter().fold(y * y, |acc, &v| acc + v * v);
        if r2 == T::zero() {
            return Err(Error::Domain("fundamental solution is singular at the origin".into()));
        }
        Ok(self.constant * r2.powf(-self.q / T::of(2.0)))
    }

    /// The z-form `Γ̃(x, z)`, equal to `Γ(x, y(z))` with the same constant.
    pub fn eval_z(&self, x: &[T], z: T) -> Result<T> {
        let a = self.order.a();
        let c = T::one() - a;
        let r2 = x
            .iter()
            .fold(c * c * z.powf(T::of(2.0) / c), |acc, &v| acc + v * v);
        if r2 == T::zero() {
            return Err(Error::Domain("fundamental solution is singular at the origin".into()));
        }
        Ok(self.constant * r2.powf(-self.q / T::of(2.0)))
    }

    /// Boundary trace `Γ(x, 0) = C |x|^{-q}` — the fundamental solution of
    /// the fractional Laplacian up to its own constant.
    pub fn trace_radial(&self, r: T) -> Result<T> {
        if r <= T::zero() {
            return Err(Error::Domain("trace is singular at the origin".into()));
        }
        Ok(self.constant * r.powf(-self.q))
    }

    /// Weighted flux `∫_{|x|<R} -y^a ∂_y Γ(x, δ) dx` by quadrature. The
    /// Dirac-mass property makes this independent of `δ` (exactly 1 in the
    /// limit `R → ∞`).
    pub fn dirac_flux(&self, delta: T, radius: T) -> Result<T> {
        if !(delta > T::zero()) || !(radius > T::zero()) {
            return Err(Error::Domain("delta and radius must be positive".into()));
        }
        let a = self.order.a();
        let q = self.q;
        let e = (q + T::of(2.0)) / T::of(2.0);
        let amp = self.constant * q * delta.powf(T::one() + a);
        let integrand = |r: T| (r * r + delta * delta).powf(-e);
        let val = match self.dim {
            1 => T::of(2.0) * tanh_sinh(integrand, T::zero(), radius, T::of(1e-13), 13),
            2 => {
                T::of(2.0)
                    * T::PI()
                    * tanh_sinh(|r: T| r * integrand(r), T::zero(), radius, T::of(1e-13), 13)
            }
            _ => unreachable!(),
        };
        Ok(amp * val)
    }
}

/// `(-Δ)^s f` through the extension route: variational solve of the
/// weighted problem, Neumann trace, normalization by the symbol constant.
pub fn fraclap_extension<T: Real>(
    f: &SampledFunction<T>,
    order: FracOrder<T>,
    vgrid: &VerticalGrid<T>,
    opts: &SolveOptions<T>,
) -> Result<SampledFunction<T>> {
    let u = extend_variational(f, vgrid, order, opts)?;
    let trace = neumann_trace(&u, TraceMethod::IncrementalQuotient)?;
    let c_a = symbol_constant(order.a())?;
    trace.map(|v| v / c_a)
}

/// Convenience wrapper used by tests and the CLI: the calibrated constant of
/// the singular-integral route for this grid dimension.
pub fn calibrated_constant<T: Real>(dim: usize, order: FracOrder<T>) -> Result<T> {
    normalization_constant(dim, order.s())
}
