//! Geometric narrowband multipath channels for uniform planar arrays and an
//! additive Gaussian model of channel-estimation error.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{CMatrix, CVector, Error, Result, C64};

/// Uniform planar array in the y-z plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub n_y: usize,
    pub n_z: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl ArrayGeometry {
    pub fn new(n_y: usize, n_z: usize, spacing: f64) -> Result<Self> {
        if n_y == 0 || n_z == 0 {
            return Err(Error::InvalidArgument(format!(
                "array dimensions must be positive, got {n_y}x{n_z}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "element spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self { n_y, n_z, spacing })
    }

    /// Most nearly square factorization `n_y × n_z = n` with `n_y ≤ n_z`.
    pub fn near_square(n: usize, spacing: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("array must have at least one element".into()));
        }
        let mut n_y = (n as f64).sqrt().floor() as usize;
        while n_y > 1 && n % n_y != 0 {
            n_y -= 1;
        }
        Self::new(n_y.max(1), n / n_y.max(1), spacing)
    }

    pub fn len(&self) -> usize {
        self.n_y * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Array response `a(φ, θ)`. Entry `p·n_z + q` is
/// `exp(j·2π·spacing·(p·sinφ·sinθ + q·cosθ)) / √N`.
pub fn steering_vector(geom: &ArrayGeometry, azimuth: f64, elevation: f64) -> CVector {
    let n = geom.len();
    let amp = 1.0 / (n as f64).sqrt();
    let kd = 2.0 * PI * geom.spacing;
    let uy = azimuth.sin() * elevation.sin();
    let uz = elevation.cos();
    CVector::from_fn(n, |idx, _| {
        let p = (idx / geom.n_z) as f64;
        let q = (idx % geom.n_z) as f64;
        C64::from_polar(amp, kd * (p * uy + q * uz))
    })
}

/// One multipath component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    pub gain: C64,
    pub aoa_azimuth: f64,
    pub aoa_elevation: f64,
    pub aod_azimuth: f64,
    pub aod_elevation: f64,
}

impl PathParams {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let gain = standard_complex_normal(rng);
        Self {
            gain,
            aoa_azimuth: rng.gen_range(0.0..TAU),
            aoa_elevation: rng.gen_range(0.0..TAU),
            aod_azimuth: rng.gen_range(0.0..TAU),
            aod_elevation: rng.gen_range(0.0..TAU),
        }
    }
}

/// Draw from CN(0, 1): each real component has variance 1/2.
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Builds `√(N_t·N_r/L) Σ_ℓ α_ℓ a_r a_tᴴ` from explicit paths.
pub fn channel_from_paths(
    tx_geom: &ArrayGeometry,
    rx_geom: &ArrayGeometry,
    paths: &[PathParams],
) -> Result<CMatrix> {
    if paths.is_empty() {
        return Err(Error::InvalidArgument("at least one path is required".into()));
    }
    let nt = tx_geom.len();
    let nr = rx_geom.len();
    let scale = ((nt * nr) as f64 / paths.len() as f64).sqrt();
    let mut h = CMatrix::zeros(nr, nt);
    for path in paths {
        let ar = steering_vector(rx_geom, path.aoa_azimuth, path.aoa_elevation);
        let at = steering_vector(tx_geom, path.aod_azimuth, path.aod_elevation);
        h += (&ar * at.adjoint()) * (path.gain * scale);
    }
    Ok(h)
}

/// Random geometric channel with `n_paths` paths, `rx elements × tx elements`.
pub fn sample_channel<R: Rng + ?Sized>(
    rng: &mut R,
    tx_geom: &ArrayGeometry,
    rx_geom: &ArrayGeometry,
    n_paths: usize,
) -> Result<CMatrix> {
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be at least 1".into()));
    }
    let paths: Vec<PathParams> = (0..n_paths).map(|_| PathParams::draw(rng)).collect();
    channel_from_paths(tx_geom, rx_geom, &paths)
}

/// Per-user channels together with their row-stacked aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    per_user: Vec<CMatrix>,
    stacked: CMatrix,
}

impl ChannelRealization {
    pub fn from_users(per_user: Vec<CMatrix>) -> Result<Self> {
        let first = per_user
            .first()
            .ok_or_else(|| Error::InvalidArgument("at least one user channel is required".into()))?;
        let (nr, nt) = first.shape();
        for h in &per_user {
            if h.shape() != (nr, nt) {
                return Err(Error::shape((nr, nt), h.shape()));
            }
        }
        let mut stacked = CMatrix::zeros(nr * per_user.len(), nt);
        for (i, h) in per_user.iter().enumerate() {
            stacked.rows_mut(i * nr, nr).copy_from(h);
        }
        Ok(Self { per_user, stacked })
    }

    /// Draws `n_users` independent channels sharing the array geometries.
    pub fn draw<R: Rng + ?Sized>(
        rng: &mut R,
        tx_geom: &ArrayGeometry,
        rx_geom: &ArrayGeometry,
        n_users: usize,
        n_paths: usize,
    ) -> Result<Self> {
        let users = (0..n_users)
            .map(|_| sample_channel(rng, tx_geom, rx_geom, n_paths))
            .collect::<Result<Vec<_>>>()?;
        Self::from_users(users)
    }

    pub fn per_user(&self) -> &[CMatrix] {
        &self.per_user
    }

    pub fn user(&self, i: usize) -> &CMatrix {
        &self.per_user[i]
    }

    pub fn stacked(&self) -> &CMatrix {
        &self.stacked
    }

    pub fn n_users(&self) -> usize {
        self.per_user.len()
    }

    /// Receive elements per user.
    pub fn n_rx(&self) -> usize {
        self.per_user[0].nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.per_user[0].ncols()
    }
}

/// `Ĥ = H + E` with `E` i.i.d. CN(0, σ_e²) per complex entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiErrorModel {
    pub sigma_e: f64,
}

impl CsiErrorModel {
    pub fn new(sigma_e: f64) -> Result<Self> {
        if !(sigma_e >= 0.0) || !sigma_e.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "CSI error standard deviation must be nonnegative, got {sigma_e}"
            )));
        }
        Ok(Self { sigma_e })
    }
}

/// Adds estimation error to every entry of every user channel. For a fixed
/// random stream the error is `σ_e·Z` with the same `Z` for any `σ_e`.
pub fn perturb_csi<R: Rng + ?Sized>(
    h: &ChannelRealization,
    model: &CsiErrorModel,
    rng: &mut R,
) -> ChannelRealization {
    if model.sigma_e == 0.0 {
        return h.clone();
    }
    let users = h
        .per_user
        .iter()
        .map(|hu| hu.map(|z| z + standard_complex_normal(rng) * model.sigma_e))
        .collect();
    ChannelRealization::from_users(users).expect("perturbation preserves shapes")
}
