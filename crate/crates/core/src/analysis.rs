//! Monotonicity formulas and Harnack-type diagnostics on extension fields:
//! the scaled weighted energy, the Almgren frequency quotient, the
//! Rellich-type identity, and interior / boundary Harnack ratios.
//!
//! Half-ball and half-sphere integrals use fixed angular quadrature with the
//! weight `y^a` absorbed exactly into the angular substitution, bilinear
//! (trilinear for n = 2) interpolation of the field and its nodal gradient,
//! and a graded radial Simpson rule. The interpolation is the dominant error
//! source.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::field::{HalfPlaneField, SampledFunction};
use crate::order::FracOrder;
use crate::real::Real;
use crate::singular_integral::{fraclap_integral_at, QuadConfig, TailModel};

/// Sampled `R ↦ Φ(R)` with its quadrature metadata. For the Almgren
/// frequency `den` is the boundary mass; for the scaled energy it is the
/// scaling factor `R^{n+1+a}`.
#[derive(Clone, Debug)]
pub struct FrequencyProfile<T> {
    pub radii: Vec<T>,
    pub phi: Vec<T>,
    pub num: Vec<T>,
    pub den: Vec<T>,
    pub angular_points: usize,
    pub radial_points: usize,
}

// ---------------------------------------------------------------------------
// field sampling
// ---------------------------------------------------------------------------

struct FieldSampler<'a, T> {
    u: &'a HalfPlaneField<T>,
    /// Nodal spatial gradients, one array per x axis.
    gx: Vec<Array2<T>>,
    /// Nodal vertical gradient.
    gy: Array2<T>,
    y: Vec<T>,
}

impl<'a, T: Real> FieldSampler<'a, T> {
    fn new(u: &'a HalfPlaneField<T>) -> Result<Self> {
        let order = u.order();
        let y = u.vgrid().nodes_in_y(&order)?;
        let grid = u.xgrid();
        let n = grid.n();
        let nv = y.len();
        let h = grid.spacing();
        let vals = u.values();
        let dim = grid.dim();
        let npts = grid.num_points();
        let periodic = grid.is_torus();

        // spatial gradients by central differences (one-sided at line edges)
        let mut gx = vec![Array2::zeros((npts, nv)); dim];
        let neighbor = |i: usize, axis: usize, dir: i64| -> usize {
            match dim {
                1 => wrap_or_clamp(i as i64 + dir, n, periodic),
                2 => {
                    let (a, b) = (i / n, i % n);
                    if axis == 0 {
                        wrap_or_clamp(a as i64 + dir, n, periodic) * n + b
                    } else {
                        a * n + wrap_or_clamp(b as i64 + dir, n, periodic)
                    }
                }
                _ => unreachable!(),
            }
        };
        for axis in 0..dim {
            for i in 0..npts {
                let ip = neighbor(i, axis, 1);
                let im = neighbor(i, axis, -1);
                let denom = if ip == i || im == i {
                    h // one-sided at a clamped edge
                } else {
                    T::of(2.0) * h
                };
                for j in 0..nv {
                    gx[axis][(i, j)] = (vals[(ip, j)] - vals[(im, j)]) / denom;
                }
            }
        }

        // vertical gradient: nonuniform 3-point interior, one-sided ends
        let mut gy = Array2::zeros((npts, nv));
        for i in 0..npts {
            for j in 0..nv {
                gy[(i, j)] = if j == 0 {
                    (vals[(i, 1)] - vals[(i, 0)]) / (y[1] - y[0])
                } else if j == nv - 1 {
                    (vals[(i, nv - 1)] - vals[(i, nv - 2)]) / (y[nv - 1] - y[nv - 2])
                } else {
                    let d1 = y[j] - y[j - 1];
                    let d2 = y[j + 1] - y[j];
                    -d2 / (d1 * (d1 + d2)) * vals[(i, j - 1)]
                        + (d2 - d1) / (d1 * d2) * vals[(i, j)]
                        + d1 / (d2 * (d1 + d2)) * vals[(i, j + 1)]
                };
            }
        }

        Ok(Self { u, gx, gy, y })
    }

    fn level_below(&self, y: T) -> usize {
        let nodes = &self.y;
        let mut lo = 0usize;
        let mut hi = nodes.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if nodes[mid] <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Interpolate a nodal array at `(x, y)` (bilinear / trilinear).
    fn interp(&self, arr: &Array2<T>, x: &[T], y: T) -> T {
        let grid = self.u.xgrid();
        let n = grid.n();
        let h = grid.spacing();
        let periodic = grid.is_torus();
        let j = self.level_below(y.max(T::zero()).min(*self.y.last().unwrap()));
        let ty = (y - self.y[j]) / (self.y[j + 1] - self.y[j]);
        let ty = ty.max(T::zero()).min(T::one());

        let axis_cell = |coord: T| -> (usize, usize, T) {
            let rel = (coord - grid.coord(0)) / h;
            let i0f = rel.floor();
            let mut i0 = i0f.as_f64() as i64;
            let t = rel - i0f;
            if periodic {
                let i0w = i0.rem_euclid(n as i64) as usize;
                ((i0w) % n, (i0w + 1) % n, t)
            } else {
                i0 = i0.clamp(0, n as i64 - 2);
                let t = ((coord - grid.coord(i0 as usize)) / h)
                    .max(T::zero())
                    .min(T::one());
                (i0 as usize, i0 as usize + 1, t)
            }
        };

        match grid.dim() {
            1 => {
                let (i0, i1, tx) = axis_cell(x[0]);
                let v00 = arr[(i0, j)];
                let v10 = arr[(i1, j)];
                let v01 = arr[(i0, j + 1)];
                let v11 = arr[(i1, j + 1)];
                let bottom = v00 * (T::one() - tx) + v10 * tx;
                let top = v01 * (T::one() - tx) + v11 * tx;
                bottom * (T::one() - ty) + top * ty
            }
            2 => {
                let (a0, a1, ta) = axis_cell(x[0]);
                let (b0, b1, tb) = axis_cell(x[1]);
                let mut acc = T::zero();
                for (ai, wa) in [(a0, T::one() - ta), (a1, ta)] {
                    for (bi, wb) in [(b0, T::one() - tb), (b1, tb)] {
                        let flat = ai * n + bi;
                        let v = arr[(flat, j)] * (T::one() - ty) + arr[(flat, j + 1)] * ty;
                        acc += wa * wb * v;
                    }
                }
                acc
            }
            _ => unreachable!(),
        }
    }

    fn value(&self, x: &[T], y: T) -> T {
        self.interp(self.u.values(), x, y)
    }

    /// `(∇_x u, u_y)` at a point.
    fn gradient(&self, x: &[T], y: T) -> (Vec<T>, T) {
        let gx = self.gx.iter().map(|g| self.interp(g, x, y)).collect();
        (gx, self.interp(&self.gy, x, y))
    }
}

fn wrap_or_clamp(i: i64, n: usize, periodic: bool) -> usize {
    if periodic {
        i.rem_euclid(n as i64) as usize
    } else {
        i.clamp(0, n as i64 - 1) as usize
    }
}

// ---------------------------------------------------------------------------
// angular rules with the weight absorbed exactly
// ---------------------------------------------------------------------------

/// Angular nodes and weights for `∫_0^π F(θ) sin^a θ dθ` (n = 1): each node
/// `θ` in `(0, π/2]` stands for the mirror pair `{θ, π-θ}`.
fn angular_rule_1d<T: Real>(a: T, count: usize) -> Vec<(T, T)> {
    let m = (count / 2).max(16);
    let q = a + T::one();
    let w_total = T::FRAC_PI_2().powf(q) / q;
    let dw = w_total / T::of_usize(m);
    (0..m)
        .map(|k| {
            let w = (T::of_usize(k) + T::of(0.5)) * dw;
            let theta = (q * w).powf(q.recip());
            let weight = dw * (theta.sin() / theta).powf(a);
            (theta, weight)
        })
        .collect()
}

/// Polar nodes and weights for `∫_0^{π/2} F(φ) cos^a φ sin φ dφ` (n = 2),
/// exact in the weight via `τ = cos^{1+a} φ`.
fn polar_rule_2d<T: Real>(a: T, count: usize) -> Vec<(T, T)> {
    let m = count.max(16);
    let q = a + T::one();
    let dtau = T::one() / T::of_usize(m);
    (0..m)
        .map(|k| {
            let tau = (T::of_usize(k) + T::of(0.5)) * dtau;
            let phi = tau.powf(q.recip()).acos();
            (phi, dtau / q)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// sphere and ball integrals
// ---------------------------------------------------------------------------

enum SphereIntegrand {
    EnergyDensity,
    SquaredValue,
    RellichLhs,
    ValueTimesNormal,
    SquaredNormal,
}

struct BallQuadrature<'a, T> {
    sampler: FieldSampler<'a, T>,
    center: Vec<T>,
    a: T,
    dim: usize,
    rule_1d: Vec<(T, T)>,
    rule_2d: Vec<(T, T)>,
    psi_count: usize,
    angular_points: usize,
}

impl<'a, T: Real> BallQuadrature<'a, T> {
    fn new(u: &'a HalfPlaneField<T>, center: &[T], angular: usize) -> Result<Self> {
        let dim = u.xgrid().dim();
        if center.len() != dim {
            return Err(Error::Grid("center dimension mismatch".into()));
        }
        let a = u.order().a();
        Ok(Self {
            sampler: FieldSampler::new(u)?,
            center: center.to_vec(),
            a,
            dim,
            rule_1d: angular_rule_1d(a, angular),
            rule_2d: polar_rule_2d(a, angular / 8),
            psi_count: 64,
            angular_points: angular,
        })
    }

    fn max_radius(&self) -> T {
        let grid = self.sampler.u.xgrid();
        let height = *self.sampler.y.last().unwrap();
        let mut r = height;
        match grid.mode() {
            crate::grid::GridMode::Torus { period } => {
                r = r.min(period / T::of(2.0));
            }
            crate::grid::GridMode::Line { extent } => {
                for &c in &self.center {
                    r = r.min(extent - c.abs());
                }
            }
        }
        r
    }

    /// Evaluate the requested integrand at a point on the sphere of radius
    /// `r`, with unit normal `nu` (pointing away from the center).
    fn integrand(&self, which: &SphereIntegrand, x: &[T], y: T, nu: &[T]) -> T {
        match which {
            SphereIntegrand::SquaredValue => {
                let v = self.sampler.value(x, y);
                v * v
            }
            _ => {
                let (gx, gy) = self.sampler.gradient(x, y);
                let mut grad2 = gy * gy;
                let mut u_nu = gy * nu[self.dim];
                for k in 0..self.dim {
                    grad2 += gx[k] * gx[k];
                    u_nu += gx[k] * nu[k];
                }
                match which {
                    SphereIntegrand::EnergyDensity => grad2,
                    SphereIntegrand::RellichLhs => grad2 - T::of(2.0) * u_nu * u_nu,
                    SphereIntegrand::ValueTimesNormal => self.sampler.value(x, y) * u_nu,
                    SphereIntegrand::SquaredNormal => u_nu * u_nu,
                    SphereIntegrand::SquaredValue => unreachable!(),
                }
            }
        }
    }

    /// `∫_{∂B_r^+} G y^a dσ`.
    fn sphere(&self, which: &SphereIntegrand, r: T) -> T {
        match self.dim {
            1 => {
                let mut acc = T::zero();
                for &(theta, w) in &self.rule_1d {
                    let (sin_t, cos_t) = theta.sin_cos();
                    for side in [T::one(), -T::one()] {
                        let x = [self.center[0] + side * r * cos_t];
                        let nu = [side * cos_t, sin_t];
                        acc += w * self.integrand(which, &x, r * sin_t, &nu);
                    }
                }
                acc * r.powf(T::one() + self.a)
            }
            2 => {
                let dpsi = T::of(2.0) * T::PI() / T::of_usize(self.psi_count);
                let mut acc = T::zero();
                for &(phi, w) in &self.rule_2d {
                    let (sin_p, cos_p) = phi.sin_cos();
                    for l in 0..self.psi_count {
                        let psi = (T::of_usize(l) + T::of(0.5)) * dpsi;
                        let (sin_q, cos_q) = psi.sin_cos();
                        let nu = [sin_p * cos_q, sin_p * sin_q, cos_p];
                        let x = [
                            self.center[0] + r * nu[0],
                            self.center[1] + r * nu[1],
                        ];
                        acc += w * dpsi * self.integrand(which, &x, r * cos_p, &nu);
                    }
                }
                acc * r.powf(T::of(2.0) + self.a)
            }
            _ => unreachable!(),
        }
    }

    /// `∫_{B_R^+} G y^a dX` by the graded radial Simpson rule
    /// (`r = R v²` kills the `r^{n+a}` kink at the origin).
    fn ball(&self, which: &SphereIntegrand, radius: T, radial: usize) -> T {
        let k = if radial % 2 == 0 { radial } else { radial + 1 };
        let dv = T::one() / T::of_usize(k);
        let mut acc = T::zero();
        for i in 0..=k {
            let v = T::of_usize(i) * dv;
            let r = radius * v * v;
            // sphere() already carries r^{n+a}; jacobian adds 2 R v
            let f = if r == T::zero() {
                T::zero()
            } else {
                self.sphere(which, r) * T::of(2.0) * radius * v
            };
            let w = if i == 0 || i == k {
                T::one()
            } else if i % 2 == 1 {
                T::of(4.0)
            } else {
                T::of(2.0)
            };
            acc += w * f;
        }
        acc * dv / T::of(3.0)
    }
}

// ---------------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------------

fn validate_radii<T: Real>(radii: &[T], max: T) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::Grid("need at least one radius".into()));
    }
    for w in radii.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Grid("radii must be strictly increasing".into()));
        }
    }
    if !(radii[0] > T::zero()) {
        return Err(Error::Grid("radii must be positive".into()));
    }
    let top = *radii.last().unwrap();
    if top > max {
        return Err(Error::Radius {
            radius: top.as_f64(),
            max: max.as_f64(),
        });
    }
    Ok(())
}

/// Scaled weighted energy `Φ(R) = R^{-(n+1+a)} ∫_{B_R^+} |∇u|² y^a dX`,
/// monotone nondecreasing when the field solves the equation with zero
/// weighted Neumann trace under the half-balls.
pub fn scaled_energy<T: Real>(
    u: &HalfPlaneField<T>,
    center: &[T],
    radii: &[T],
) -> Result<FrequencyProfile<T>> {
    let quad = BallQuadrature::new(u, center, 512)?;
    validate_radii(radii, quad.max_radius())?;
    let radial = 192usize;
    let exponent = T::of_usize(quad.dim) + T::one() + quad.a;
    let mut num = Vec::with_capacity(radii.len());
    let mut den = Vec::with_capacity(radii.len());
    let mut phi = Vec::with_capacity(radii.len());
    for &r in radii {
        let e = quad.ball(&SphereIntegrand::EnergyDensity, r, radial);
        let scale = r.powf(exponent);
        num.push(e);
        den.push(scale);
        phi.push(e / scale);
    }
    Ok(FrequencyProfile {
        radii: radii.to_vec(),
        phi,
        num,
        den,
        angular_points: quad.angular_points,
        radial_points: radial,
    })
}

/// Almgren frequency
/// `Φ(R) = R ∫_{B_R^+} |∇u|² y^a dX / ∫_{∂B_R^+} u² y^a dσ`.
///
/// Radii with vanishing denominator report `Φ = NaN`. The hypothesis — each
/// bottom point under the largest ball carries either `u = 0` or a vanishing
/// weighted Neumann derivative — is the caller's to arrange (fields from
/// `solve_mixed` windows satisfy it by construction).
pub fn almgren_frequency<T: Real>(
    u: &HalfPlaneField<T>,
    center: &[T],
    radii: &[T],
) -> Result<FrequencyProfile<T>> {
    let quad = BallQuadrature::new(u, center, 512)?;
    validate_radii(radii, quad.max_radius())?;
    let radial = 192usize;
    let mut num = Vec::with_capacity(radii.len());
    let mut den = Vec::with_capacity(radii.len());
    let mut phi = Vec::with_capacity(radii.len());
    for &r in radii {
        let e = quad.ball(&SphereIntegrand::EnergyDensity, r, radial);
        let m = quad.sphere(&SphereIntegrand::SquaredValue, r);
        num.push(e);
        den.push(m);
        phi.push(if m > T::zero() { r * e / m } else { T::nan() });
    }
    Ok(FrequencyProfile {
        radii: radii.to_vec(),
        phi,
        num,
        den,
        angular_points: quad.angular_points,
        radial_points: radial,
    })
}

/// Relative defect of the Rellich-type identity
/// `R ∫_{∂B_R^+} (|u_τ|² - |u_ν|²) y^a dσ = (n+a-1) ∫_{B_R^+} |∇u|² y^a dX`.
pub fn rellich_residual<T: Real>(u: &HalfPlaneField<T>, center: &[T], radius: T) -> Result<T> {
    let quad = BallQuadrature::new(u, center, 512)?;
    validate_radii(&[radius], quad.max_radius())?;
    let lhs = radius * quad.sphere(&SphereIntegrand::RellichLhs, radius);
    let factor = T::of_usize(quad.dim) + quad.a - T::one();
    let rhs = factor * quad.ball(&SphereIntegrand::EnergyDensity, radius, 192);
    let scale = lhs.abs().max(rhs.abs());
    // both sides below roundoff of the field scale: the identity is 0 = 0
    let field_scale = u.max_abs();
    let floor = T::of(1e-20) * field_scale * field_scale + T::of(1e-300);
    if scale <= floor {
        return Ok(T::zero());
    }
    Ok((lhs - rhs).abs() / scale)
}

/// `sup / inf` of a nonnegative s-harmonic trace over the half ball
/// `B_{r/2}(center)`. Nonnegativity is checked everywhere; a nonpositive
/// infimum inside the half ball violates the Harnack hypothesis and errors.
pub fn harnack_ratio<T: Real>(
    trace: &SampledFunction<T>,
    center: &[T],
    r: T,
) -> Result<T> {
    let grid = trace.grid();
    if center.len() != grid.dim() {
        return Err(Error::Grid("center dimension mismatch".into()));
    }
    let mut sup = T::min_value();
    let mut inf = T::max_value();
    let half = r / T::of(2.0);
    let mut hits = 0usize;
    for (k, &v) in trace.values().iter().enumerate() {
        if v < T::zero() {
            return Err(Error::Hypothesis(format!(
                "trace must be nonnegative everywhere, found {v}"
            )));
        }
        let p = grid.point(k);
        let mut d2 = T::zero();
        for (pc, cc) in p.iter().zip(center) {
            let d = *pc - *cc;
            d2 += d * d;
        }
        if d2.sqrt() <= half {
            sup = sup.max(v);
            inf = inf.min(v);
            hits += 1;
        }
    }
    if hits == 0 {
        return Err(Error::Radius {
            radius: r.as_f64(),
            max: 0.0,
        });
    }
    if !(inf > T::zero()) {
        return Err(Error::Hypothesis(
            "trace infimum vanishes inside the half ball".into(),
        ));
    }
    Ok(sup / inf)
}

/// Certify s-harmonicity of a trace on `B_r(center)`: the relative size of
/// `(-Δ)^s trace` inside the ball against its scale on the annulus
/// `1.5 r < |x - center| <= 3 r`, where the data is genuinely non-harmonic.
pub fn certify_s_harmonic<T: Real>(
    trace: &SampledFunction<T>,
    order: FracOrder<T>,
    center: &[T],
    r: T,
    cfg: &QuadConfig<T>,
    tail: TailModel<T>,
) -> Result<T> {
    let grid = trace.grid();
    let mut window = Vec::new();
    let mut reference = Vec::new();
    for k in 0..trace.len() {
        let p = grid.point(k);
        let mut d2 = T::zero();
        for (pc, cc) in p.iter().zip(center) {
            let d = *pc - *cc;
            d2 += d * d;
        }
        let d = d2.sqrt();
        if d <= r {
            window.push(k);
        } else if d > r * T::of(1.5) && d <= r * T::of(3.0) {
            reference.push(k);
        }
    }
    if window.is_empty() || reference.is_empty() {
        return Err(Error::Radius {
            radius: r.as_f64(),
            max: 0.0,
        });
    }
    // thin out the reference ring to keep the quadrature affordable
    let stride = (reference.len() / 64).max(1);
    let reference: Vec<usize> = reference.into_iter().step_by(stride).collect();
    let inside = fraclap_integral_at(trace, order, cfg, tail, &window)?;
    let outside = fraclap_integral_at(trace, order, cfg, tail, &reference)?;
    let scale = outside
        .iter()
        .fold(T::zero(), |m, v| m.max(v.abs()))
        .max(T::of(1e-300));
    Ok(inside.iter().fold(T::zero(), |m, v| m.max(v.abs())) / scale)
}

/// Boundary Harnack ratio: `(sup f/g) / (inf f/g)` over the half-window,
/// evaluated at grid points at least one cell away from the window boundary.
/// 1-D traces from a shared mixed problem.
pub fn boundary_harnack_ratio<T: Real>(
    f: &SampledFunction<T>,
    g: &SampledFunction<T>,
    window: (T, T),
    half_window: (T, T),
) -> Result<T> {
    if f.grid() != g.grid() {
        return Err(Error::Grid("traces must share a grid".into()));
    }
    if f.grid().dim() != 1 {
        return Err(Error::Unsupported("boundary Harnack windows are 1-D".into()));
    }
    let grid = f.grid();
    let h = grid.spacing();
    let mut sup = T::min_value();
    let mut inf = T::max_value();
    let mut hits = 0usize;
    for i in 0..grid.n() {
        let x = grid.coord(i);
        // points at least one cell clear of the window boundary; the traces
        // legitimately vanish on the boundary itself
        if x - window.0 < h || window.1 - x < h {
            continue;
        }
        let gv = g.values()[i];
        if !(gv > T::zero()) {
            return Err(Error::Hypothesis(format!(
                "second trace vanishes inside the window at x = {x}"
            )));
        }
        if x < half_window.0 || x > half_window.1 {
            continue;
        }
        let q = f.values()[i] / gv;
        sup = sup.max(q);
        inf = inf.min(q);
        hits += 1;
    }
    if hits == 0 {
        return Err(Error::Grid(
            "half-window contains no admissible grid points".into(),
        ));
    }
    if !(inf > T::zero()) {
        return Err(Error::Hypothesis("quotient is not positive".into()));
    }
    Ok(sup / inf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::FundamentalSolution;
    use crate::grid::{SpatialGrid, VerticalCoord, VerticalGrid};
    use crate::quadrature::simpson;

    fn linear_field(a: f64) -> HalfPlaneField<f64> {
        let order = FracOrder::from_a(a).unwrap();
        let grid = SpatialGrid::line(1, 2.0f64, 129).unwrap();
        let vg = VerticalGrid::geometric_capped(VerticalCoord::Y, 1.6, 1e-3, 1.15, 0.02).unwrap();
        HalfPlaneField::from_fn(grid, vg, order, |x, _| x[0]).unwrap()
    }

    #[test]
    fn scaled_energy_of_linear_field_is_flat() {
        // u = x₁ has |∇u| ≡ 1, so Φ(R) is constant in R
        let u = linear_field(0.5);
        let radii: Vec<f64> = (1..=8).map(|k| 0.1 + 0.15 * k as f64).collect();
        let p = scaled_energy(&u, &[0.0], &radii).unwrap();
        let mean = p.phi.iter().sum::<f64>() / p.phi.len() as f64;
        for v in &p.phi {
            assert!((v - mean).abs() / mean < 1e-3, "profile {:?}", p.phi);
        }
    }

    #[test]
    fn scaled_energy_of_constant_is_zero() {
        let order = FracOrder::from_a(-0.4).unwrap();
        let grid = SpatialGrid::line(1, 2.0f64, 65).unwrap();
        let vg = VerticalGrid::geometric(VerticalCoord::Y, 1.5, 48, 1.15).unwrap();
        let u = HalfPlaneField::from_fn(grid, vg, order, |_, _| 5.0).unwrap();
        let p = scaled_energy(&u, &[0.0], &[0.5, 1.0]).unwrap();
        for v in &p.phi {
            // zero up to squared roundoff of the nodal difference quotients
            assert!(v.abs() < 1e-20, "Φ = {v}");
        }
    }

    #[test]
    fn almgren_degree_one() {
        for a in [-0.5, 0.0, 0.5] {
            let u = linear_field(a);
            let radii: Vec<f64> = (1..=10).map(|k| 0.1 + 0.13 * k as f64).collect();
            let p = almgren_frequency(&u, &[0.0], &radii).unwrap();
            for (r, v) in p.radii.iter().zip(&p.phi) {
                assert!((v - 1.0).abs() < 1e-3, "a={a}, R={r}: Φ = {v}");
            }
        }
    }

    #[test]
    fn almgren_degree_two_classical() {
        // a = 0, u = x₁ y: harmonic with u(x, 0) = 0, homogeneous of degree 2
        let order = FracOrder::from_s(0.5).unwrap();
        let grid = SpatialGrid::line(1, 2.0f64, 129).unwrap();
        let vg = VerticalGrid::geometric_capped(VerticalCoord::Y, 1.6, 1e-3, 1.15, 0.02).unwrap();
        let u = HalfPlaneField::from_fn(grid, vg, order, |x, y| x[0] * y).unwrap();
        let radii: Vec<f64> = (1..=10).map(|k| 0.1 + 0.13 * k as f64).collect();
        let p = almgren_frequency(&u, &[0.0], &radii).unwrap();
        for (r, v) in p.radii.iter().zip(&p.phi) {
            assert!((v - 2.0).abs() < 1e-3, "R={r}: Φ = {v}");
        }
    }

    #[test]
    fn almgren_scale_invariant() {
        let u = linear_field(0.3);
        let scaled = {
            let grid = *u.xgrid();
            let vg = u.vgrid().clone();
            HalfPlaneField::from_fn(grid, vg, u.order(), |x, _| 17.0 * x[0]).unwrap()
        };
        let radii = [0.4, 0.8, 1.2];
        let p1 = almgren_frequency(&u, &[0.0], &radii).unwrap();
        let p2 = almgren_frequency(&scaled, &[0.0], &radii).unwrap();
        for (a, b) in p1.phi.iter().zip(&p2.phi) {
            assert!((a - b).abs() < 1e-12 * a.abs());
        }
    }

    #[test]
    fn rellich_identity_for_linear_field() {
        // closed-form oracle: with ∇u = e₁, u_ν = cos θ on the half circle,
        // LHS = R^{2+a} ∫ (sin²θ - cos²θ) sin^a θ dθ and
        // RHS = a ∫_0^R r^{1+a} dr ∫ sin^a θ dθ; both by plain Simpson here
        let a = 0.5f64;
        let u = linear_field(a);
        let radius = 1.2f64;
        let lhs_oracle = radius.powf(2.0 + a)
            * simpson(
                |t: f64| (t.sin() * t.sin() - t.cos() * t.cos()) * t.sin().powf(a),
                0.0,
                std::f64::consts::PI,
                4000,
            );
        let rhs_oracle = a * radius.powf(2.0 + a) / (2.0 + a)
            * simpson(|t: f64| t.sin().powf(a), 0.0, std::f64::consts::PI, 4000);
        assert!(
            (lhs_oracle - rhs_oracle).abs() / rhs_oracle.abs() < 1e-5,
            "oracle identity: {lhs_oracle} vs {rhs_oracle}"
        );
        let res = rellich_residual(&u, &[0.0], radius).unwrap();
        assert!(res < 1e-3, "residual {res}");
    }

    #[test]
    fn rellich_zero_for_constants() {
        let order = FracOrder::from_a(0.2).unwrap();
        let grid = SpatialGrid::line(1, 2.0f64, 65).unwrap();
        let vg = VerticalGrid::geometric(VerticalCoord::Y, 1.5, 48, 1.15).unwrap();
        let u = HalfPlaneField::from_fn(grid, vg, order, |_, _| 3.0).unwrap();
        assert_eq!(rellich_residual(&u, &[0.0], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn radius_exceeding_grid_rejected() {
        let u = linear_field(0.0);
        assert!(matches!(
            almgren_frequency(&u, &[0.0], &[5.0]),
            Err(Error::Radius { .. })
        ));
    }

    #[test]
    fn harnack_ratio_basics() {
        let grid = SpatialGrid::line(2, 2.0f64, 65).unwrap();
        let ones = SampledFunction::from_fn(grid, |_| 1.0).unwrap();
        assert_eq!(harnack_ratio(&ones, &[0.0, 0.0], 1.0).unwrap(), 1.0);

        // ratio >= 1 and invariant under positive scaling
        let order = FracOrder::from_a(0.5).unwrap();
        let gamma = FundamentalSolution::new(order, 2).unwrap();
        let trace = SampledFunction::from_fn(grid, |x| {
            gamma.trace_radial(((x[0] - 1.5) * (x[0] - 1.5) + x[1] * x[1]).sqrt().max(1e-9))
                .unwrap()
        })
        .unwrap();
        let r = 0.6;
        let ratio = harnack_ratio(&trace, &[0.0, 0.0], r).unwrap();
        assert!(ratio >= 1.0);
        let scaled = trace.map(|v| 13.0 * v).unwrap();
        let ratio2 = harnack_ratio(&scaled, &[0.0, 0.0], r).unwrap();
        assert!((ratio - ratio2).abs() < 1e-12 * ratio);
    }

    #[test]
    fn harnack_rejects_sign_violations() {
        let grid = SpatialGrid::line(1, 2.0f64, 65).unwrap();
        let f = SampledFunction::from_fn(grid, |x| x[0]).unwrap();
        assert!(matches!(
            harnack_ratio(&f, &[0.0], 1.0),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn boundary_harnack_scale_invariance() {
        let grid = SpatialGrid::torus(1, 8.0f64, 128).unwrap();
        let f = SampledFunction::from_fn(grid, |x| {
            let d: f64 = x[0] - 4.0;
            (1.0 - d * d).max(0.0)
        })
        .unwrap();
        let g = f.map(|v| 3.0 * v).unwrap();
        let ratio = boundary_harnack_ratio(&f, &g, (3.0, 5.0), (3.5, 4.5)).unwrap();
        assert!((ratio - 1.0).abs() < 1e-12);
        let same = boundary_harnack_ratio(&f, &f, (3.0, 5.0), (3.5, 4.5)).unwrap();
        assert_eq!(same, 1.0);
    }

    #[test]
    fn boundary_harnack_rejects_vanishing_denominator() {
        let grid = SpatialGrid::torus(1, 8.0f64, 64).unwrap();
        let f = SampledFunction::from_fn(grid, |_| 1.0).unwrap();
        let g = SampledFunction::from_fn(grid, |_| 0.0).unwrap();
        assert!(matches!(
            boundary_harnack_ratio(&f, &g, (3.0, 5.0), (3.5, 4.5)),
            Err(Error::Hypothesis(_))
        ));
    }
}
