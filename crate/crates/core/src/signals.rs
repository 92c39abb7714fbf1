//! Test signals with closed-form values, their grid samples, and Gaussian
//! observation noise.
//!
//! Every family obeys the lower-semicontinuous convention on piece
//! boundaries: the value at a discontinuity is the smaller of the one-sided
//! limits.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::diagram::{DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::persistence;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disc {
    pub fn new(x: f64, y: f64, radius: f64) -> Self {
        Disc { center: [x, y], radius }
    }

    pub fn dist(&self, x: &[f64]) -> f64 {
        (x[0] - self.center[0]).hypot(x[1] - self.center[1])
    }

    /// Distance from the disc to the boundary of the unit square.
    pub fn frame_margin(&self) -> f64 {
        let [x, y] = self.center;
        x.min(y).min(1.0 - x).min(1.0 - y) - self.radius
    }
}

/// Analytic test signal on `[0,1]^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SignalSpec {
    /// `(-1)^i (2 - (|x - c_i| / r_i)^alpha)` on the i-th disc (1-based), 0 elsewhere.
    DiscBumps { discs: Vec<Disc>, alpha: f64 },
    /// Concentric discs with alternating signed power profiles.
    NestedDiscs { center: [f64; 2], radii: Vec<f64>, alpha: f64 },
    /// `min(M, L) / (2 sqrt d) * |x_1|^alpha`.
    LowerBoundBase { bound: f64, lipschitz: f64, alpha: f64, dim: usize },
    /// The base signal minus a sup-norm cone of height `min(L, M) h^alpha / sqrt d`
    /// centred at `m / floor(1/h) * (1, ..., 1)`.
    LowerBoundBump { bound: f64, lipschitz: f64, alpha: f64, dim: usize, h: f64, m: usize },
    /// `cos(2 pi x) sin(2 pi x) + 1{(x - 1/2)^2 + (y - 1/2)^2 < 1/8}`.
    CosSineDisc,
    /// `x cos(8 pi x)` on `[0, 1]`.
    OneDimCos,
}

/// Disc layout shipped with the crate: eight discs drawn by
/// [`random_disc_layout`] from seed 20240611 with radii in `[0.06, 0.13]` and
/// gaps of at least `0.04`, frozen here so results do not depend on the RNG
/// implementation.
pub const DEFAULT_DISC_LAYOUT: [Disc; 8] = [
    Disc { center: [0.2895532003757306, 0.4131719898640229], radius: 0.07342280207630641 },
    Disc { center: [0.6794413817628854, 0.6725961924922366], radius: 0.06883946599629368 },
    Disc { center: [0.4911267356990356, 0.14923955877279038], radius: 0.08098677518435375 },
    Disc { center: [0.4876966113923751, 0.5938535765479558], radius: 0.09804637687890726 },
    Disc { center: [0.17676329791518203, 0.1877061914034597], radius: 0.10033862874752736 },
    Disc { center: [0.3065563132263438, 0.7979804452698479], radius: 0.11762777869597753 },
    Disc { center: [0.8279562278394995, 0.4122319909374379], radius: 0.11961792561846835 },
    Disc { center: [0.8539679748458884, 0.13916883958628945], radius: 0.09031239964089152 },
];

pub const DEFAULT_LAYOUT_SEED: u64 = 20240611;
pub const DEFAULT_RADIUS_RANGE: (f64, f64) = (0.06, 0.13);
pub const DEFAULT_MIN_GAP: f64 = 0.04;

/// Radii of the nested-disc family, innermost first.
pub const NESTED_RADII: [f64; 5] = [1.0 / 12.0, 1.0 / 6.0, 1.0 / 4.0, 1.0 / 3.0, 1.0 / 2.2];

pub(crate) fn floor_inv(h: f64) -> usize {
    (1.0 / h + 1e-9).floor() as usize
}

impl SignalSpec {
    /// Disc bumps on the shipped eight-disc layout.
    pub fn default_disc_bumps(alpha: f64) -> Self {
        SignalSpec::DiscBumps { discs: DEFAULT_DISC_LAYOUT.to_vec(), alpha }
    }

    /// Nested discs around the centre of the square with the shipped radii.
    pub fn default_nested_discs(alpha: f64) -> Self {
        SignalSpec::NestedDiscs { center: [0.5, 0.5], radii: NESTED_RADII.to_vec(), alpha }
    }

    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SignalSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        let check_alpha = |alpha: f64| {
            if alpha > 0.0 && alpha <= 1.0 {
                Ok(())
            } else {
                Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")))
            }
        };
        match self {
            SignalSpec::DiscBumps { discs, alpha } => {
                check_alpha(*alpha)?;
                for (i, a) in discs.iter().enumerate() {
                    if !(a.radius > 0.0) || !a.radius.is_finite() {
                        return bad(format!("disc {} has non-positive radius", i + 1));
                    }
                    if !(a.frame_margin() > 0.0) {
                        return bad(format!("disc {} touches the frame", i + 1));
                    }
                    for (j, b) in discs.iter().enumerate().skip(i + 1) {
                        let gap = a.dist(&b.center) - a.radius - b.radius;
                        if !(gap > 0.0) {
                            return bad(format!("discs {} and {} intersect", i + 1, j + 1));
                        }
                    }
                }
            }
            SignalSpec::NestedDiscs { center, radii, alpha } => {
                check_alpha(*alpha)?;
                if radii.is_empty() {
                    return bad("nested discs need at least one radius".into());
                }
                if !(radii[0] > 0.0) || radii.windows(2).any(|w| !(w[0] < w[1])) {
                    return bad("nested radii must be positive and strictly increasing".into());
                }
                let outer = Disc { center: *center, radius: *radii.last().unwrap() };
                if !(outer.frame_margin() > 0.0) {
                    return bad("outermost nested disc touches the frame".into());
                }
            }
            SignalSpec::LowerBoundBase { bound, lipschitz, alpha, dim } => {
                check_alpha(*alpha)?;
                check_lower_bound_params(*bound, *lipschitz, *dim)?;
            }
            SignalSpec::LowerBoundBump { bound, lipschitz, alpha, dim, h, m } => {
                check_alpha(*alpha)?;
                check_lower_bound_params(*bound, *lipschitz, *dim)?;
                if !(*h > 0.0 && *h < 1.0) {
                    return bad(format!("bump width h must lie in (0, 1), got {h}"));
                }
                let k = floor_inv(*h);
                if *m == 0 || *m >= k {
                    return bad(format!("bump index m must satisfy 0 < m < {k}, got {m}"));
                }
            }
            SignalSpec::CosSineDisc | SignalSpec::OneDimCos => {}
        }
        Ok(())
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            SignalSpec::DiscBumps { .. } | SignalSpec::NestedDiscs { .. } | SignalSpec::CosSineDisc => 2,
            SignalSpec::OneDimCos => 1,
            SignalSpec::LowerBoundBase { dim, .. } | SignalSpec::LowerBoundBump { dim, .. } => *dim,
        }
    }

    /// Hölder exponent of the smooth pieces.
    pub fn alpha(&self) -> f64 {
        match self {
            SignalSpec::DiscBumps { alpha, .. }
            | SignalSpec::NestedDiscs { alpha, .. }
            | SignalSpec::LowerBoundBase { alpha, .. }
            | SignalSpec::LowerBoundBump { alpha, .. } => *alpha,
            SignalSpec::CosSineDisc | SignalSpec::OneDimCos => 1.0,
        }
    }

    /// Same family with a different exponent. The trigonometric families are
    /// returned unchanged.
    pub fn with_alpha(&self, a: f64) -> Self {
        let mut s = self.clone();
        match &mut s {
            SignalSpec::DiscBumps { alpha, .. }
            | SignalSpec::NestedDiscs { alpha, .. }
            | SignalSpec::LowerBoundBase { alpha, .. }
            | SignalSpec::LowerBoundBump { alpha, .. } => *alpha = a,
            SignalSpec::CosSineDisc | SignalSpec::OneDimCos => {}
        }
        s
    }

    /// Hölder constant `L` on each piece.
    pub fn holder_constant(&self) -> f64 {
        match self {
            SignalSpec::DiscBumps { discs, alpha } => {
                let rmin = discs.iter().map(|d| d.radius).fold(f64::INFINITY, f64::min);
                if rmin.is_finite() { (1.0 / rmin).powf(*alpha) } else { 0.0 }
            }
            SignalSpec::NestedDiscs { radii, alpha, .. } => (1.0 / radii[0]).powf(*alpha),
            SignalSpec::LowerBoundBase { lipschitz, .. } | SignalSpec::LowerBoundBump { lipschitz, .. } => {
                *lipschitz
            }
            SignalSpec::CosSineDisc => 2.0 * PI,
            SignalSpec::OneDimCos => 1.0 + 8.0 * PI,
        }
    }

    /// Sup-norm bound `M`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            SignalSpec::DiscBumps { .. } => 2.0,
            SignalSpec::NestedDiscs { .. } => 1.0,
            SignalSpec::LowerBoundBase { bound, .. } | SignalSpec::LowerBoundBump { bound, .. } => *bound,
            SignalSpec::CosSineDisc => 1.5,
            SignalSpec::OneDimCos => 1.0,
        }
    }

    /// Value at `x`; boundaries take the lower one-sided limit.
    pub fn eval_exact(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.eval(x))
    }

    /// [`eval_exact`](Self::eval_exact) without the dimension check.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SignalSpec::DiscBumps { discs, alpha } => {
                for (i, disc) in discs.iter().enumerate() {
                    let rho = disc.dist(x);
                    let negative = i % 2 == 0; // disc i+1 is odd
                    // Negative discs own their boundary circle (limit -1 < 0).
                    if rho < disc.radius || (negative && rho == disc.radius) {
                        let v = 2.0 - (rho / disc.radius).powf(*alpha);
                        return if negative { -v } else { v };
                    }
                }
                0.0
            }
            SignalSpec::NestedDiscs { center, radii, alpha } => {
                let rho = (x[0] - center[0]).hypot(x[1] - center[1]);
                let piece = |i: usize| -> f64 {
                    // i is 1-based; i == radii.len() + 1 is the outer region
                    if i > radii.len() {
                        rho.powf(*alpha)
                    } else if i == 1 {
                        -(rho / radii[0]).powf(*alpha)
                    } else {
                        let v = (rho / radii[i - 1]).powf(*alpha);
                        if i % 2 == 0 { v } else { -v }
                    }
                };
                let region = radii.iter().position(|&r| rho < r).map_or(radii.len() + 1, |p| p + 1);
                if region >= 2 && rho == radii[region - 2] {
                    piece(region - 1).min(piece(region))
                } else {
                    piece(region)
                }
            }
            SignalSpec::LowerBoundBase { bound, lipschitz, alpha, dim } => {
                base_coef(*bound, *lipschitz, *dim) * x[0].abs().powf(*alpha)
            }
            SignalSpec::LowerBoundBump { bound, lipschitz, alpha, dim, h, m } => {
                let base = base_coef(*bound, *lipschitz, *dim) * x[0].abs().powf(*alpha);
                let center = *m as f64 / floor_inv(*h) as f64;
                let dist = x.iter().map(|&xi| (xi - center).abs()).fold(0.0, f64::max);
                let depth = (h.powf(*alpha) - dist.powf(*alpha)).max(0.0);
                base - bound.min(*lipschitz) / (*dim as f64).sqrt() * depth
            }
            SignalSpec::CosSineDisc => {
                let (px, py) = (x[0], x[1]);
                let wave = (2.0 * PI * px).cos() * (2.0 * PI * px).sin();
                let inside = (px - 0.5).powi(2) + (py - 0.5).powi(2) < 0.125;
                wave + if inside { 1.0 } else { 0.0 }
            }
            SignalSpec::OneDimCos => x[0] * (8.0 * PI * x[0]).cos(),
        }
    }

    /// Noise-free samples on `grid`.
    pub fn sample_on_grid(&self, grid: GridSpec) -> Result<ScalarField> {
        if grid.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: grid.dim() });
        }
        ScalarField::from_fn(grid, |x| self.eval(x))
    }

    /// Diagram known in closed form for the lower-bound families.
    ///
    /// For the bump the finite point is
    /// `(c (m/K)^alpha - (L / sqrt d) h^alpha, c (m/K)^alpha - c h^alpha)` with
    /// `c = min(L, M) / (2 sqrt d)` and `K = floor(1/h)`. This agrees with the
    /// sublevel diagram of the sampled function when `alpha = 1`, `L <= M`
    /// and the bump minimum is positive.
    pub fn true_diagram_closed_form(&self) -> Result<PersistenceDiagram> {
        self.validate()?;
        let mut dgm = PersistenceDiagram::new();
        match self {
            SignalSpec::LowerBoundBase { .. } => {
                dgm.push(DiagramPoint::new(0, 0.0, f64::INFINITY))?;
            }
            SignalSpec::LowerBoundBump { bound, lipschitz, alpha, dim, h, m } => {
                let c = base_coef(*bound, *lipschitz, *dim);
                let level = c * (*m as f64 / floor_inv(*h) as f64).powf(*alpha);
                let ha = h.powf(*alpha);
                let birth = level - lipschitz / (*dim as f64).sqrt() * ha;
                let death = level - c * ha;
                dgm.push(DiagramPoint::new(0, 0.0, f64::INFINITY))?;
                if birth < death {
                    dgm.push(DiagramPoint::new(0, birth, death))?;
                }
            }
            _ => {
                return Err(Error::Unsupported(
                    "closed-form diagrams exist only for the lower-bound families".into(),
                ))
            }
        }
        Ok(dgm)
    }

    /// Reference diagram from noise-free samples at resolution `oracle_n`
    /// (at least 800). Accurate up to `L (sqrt d / oracle_n)^alpha`.
    pub fn true_diagram_oracle(&self, oracle_n: usize) -> Result<PersistenceDiagram> {
        if oracle_n < 800 {
            return Err(Error::Domain(format!("oracle resolution must be >= 800, got {oracle_n}")));
        }
        self.validate()?;
        let field = self.sample_on_grid(GridSpec::new(self.dim(), oracle_n)?)?;
        persistence::field_diagram(&field)
    }

    /// Oracle discretisation tolerance `L (sqrt d / n)^alpha`.
    pub fn oracle_tolerance(&self, n: usize) -> f64 {
        self.holder_constant() * ((self.dim() as f64).sqrt() / n as f64).powf(self.alpha())
    }
}

fn base_coef(bound: f64, lipschitz: f64, dim: usize) -> f64 {
    bound.min(lipschitz) / (2.0 * (dim as f64).sqrt())
}

fn check_lower_bound_params(bound: f64, lipschitz: f64, dim: usize) -> Result<()> {
    if !(bound > 0.0 && lipschitz > 0.0) || !bound.is_finite() || !lipschitz.is_finite() {
        return Err(Error::Domain("lower-bound family needs positive finite M and L".into()));
    }
    if dim < 1 {
        return Err(Error::Domain("lower-bound family needs dim >= 1".into()));
    }
    Ok(())
}

/// Draws `k` disjoint discs inside the unit square by rejection sampling.
/// Every pair is separated by more than `min_gap`, and so is every disc from the frame.
pub fn random_disc_layout<R: Rng + ?Sized>(
    k: usize,
    radius_range: (f64, f64),
    min_gap: f64,
    rng: &mut R,
) -> Result<Vec<Disc>> {
    let (rlo, rhi) = radius_range;
    if !(rlo > 0.0 && rlo <= rhi) {
        return Err(Error::Domain(format!("bad radius range ({rlo}, {rhi})")));
    }
    let mut discs: Vec<Disc> = Vec::with_capacity(k);
    let mut attempts = 0usize;
    while discs.len() < k {
        attempts += 1;
        if attempts > 1_000_000 {
            return Err(Error::Domain(format!("could not place {k} discs with these margins")));
        }
        let r = if rlo == rhi { rlo } else { rng.random_range(rlo..rhi) };
        let lo = r + min_gap;
        if lo >= 1.0 - lo {
            continue;
        }
        let cand = Disc::new(rng.random_range(lo..1.0 - lo), rng.random_range(lo..1.0 - lo), r);
        if cand.frame_margin() > min_gap
            && discs.iter().all(|d| d.dist(&cand.center) - d.radius - cand.radius > min_gap)
        {
            discs.push(cand);
        }
    }
    Ok(discs)
}

/// Additive Gaussian observation noise with standard deviation `sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
}

impl NoiseModel {
    /// `sigma = 0` is accepted as the noiseless limit.
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("noise level must be finite and >= 0, got {sigma}")));
        }
        Ok(NoiseModel { sigma })
    }

    /// `field + sigma * eps` with `eps` i.i.d. standard normal drawn from `rng`.
    pub fn add_noise<R: Rng + ?Sized>(&self, field: &ScalarField, rng: &mut R) -> ScalarField {
        if self.sigma == 0.0 {
            return field.clone();
        }
        let eps = standard_normals(field.values().len(), rng);
        let values = field.values().iter().zip(&eps).map(|(f, e)| f + self.sigma * e).collect();
        ScalarField::new(field.grid(), values).expect("finite signal plus finite noise")
    }
}

/// Free-function form of [`NoiseModel::add_noise`].
pub fn add_noise<R: Rng + ?Sized>(field: &ScalarField, noise: NoiseModel, rng: &mut R) -> ScalarField {
    noise.add_noise(field, rng)
}

pub fn standard_normals<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

#[cfg(test)]
mod tests;
