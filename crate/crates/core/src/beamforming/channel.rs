//! Geometric cluster channel driven by the embedded port patterns.
//!
//! Each user sees a sum of clusters; a cluster contributes its complex gain
//! times the embedded (element, port) pattern toward the cluster angle, with
//! the per-subcarrier phase exp(-j 2 pi f tau / F) of its delay. Everything
//! is reproducible from the seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::array::{ArrayLayout, PortPatternTable};
use crate::error::{Error, Result};

/// One propagation cluster of a user.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub gain_db: f64,
    /// Delay in sample units; subcarrier f rotates by -2 pi f delay / F.
    pub delay: f64,
    /// Std-dev of the angular offset around the user direction, degrees.
    pub angle_spread_deg: f64,
}

/// A downlink user: nominal direction plus its cluster list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserSpec {
    /// Azimuth in the array plane, degrees.
    pub azimuth_deg: f64,
    /// Elevation above the array plane, degrees; 90 is broadside.
    pub elevation_deg: f64,
    pub clusters: Vec<ClusterSpec>,
}

impl UserSpec {
    /// Line-of-sight user with a single zero-delay, zero-spread cluster.
    pub fn los(azimuth_deg: f64, elevation_deg: f64) -> Self {
        UserSpec {
            azimuth_deg,
            elevation_deg,
            clusters: vec![ClusterSpec {
                gain_db: 0.0,
                delay: 0.0,
                angle_spread_deg: 0.0,
            }],
        }
    }

    /// Polar/azimuth direction in radians (theta measured from broadside).
    pub fn direction(&self) -> (f64, f64) {
        (
            (90.0 - self.elevation_deg).to_radians(),
            self.azimuth_deg.to_radians(),
        )
    }
}

/// Per-subcarrier channel matrices for one seed.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// One N_users x N_Tx matrix per subcarrier, element-major port order.
    pub h: Vec<DMatrix<Complex64>>,
    pub subcarriers: usize,
    pub seed: u64,
    pub users: Vec<UserSpec>,
}

impl ChannelRealization {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_tx(&self) -> usize {
        self.h.first().map(|m| m.ncols()).unwrap_or(0)
    }

    /// Total row energy of a user across subcarriers.
    pub fn user_energy(&self, u: usize) -> f64 {
        self.h.iter().map(|h_f| h_f.row(u).norm_squared()).sum()
    }

    /// User with the strongest channel (lowest index on ties).
    pub fn strongest_user(&self) -> usize {
        let mut best = 0;
        let mut best_e = f64::NEG_INFINITY;
        for u in 0..self.n_users() {
            let e = self.user_energy(u);
            if e > best_e + 1e-15 {
                best_e = e;
                best = u;
            }
        }
        best
    }
}

fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    // Box-Muller; the log argument is bounded away from zero.
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        if u1 > 1e-300 {
            return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
    }
}

/// Draw a seeded channel realization.
///
/// H_f[u, (m, p)] = sum_clusters gain * embedded(m, p, cluster angle)
///                  * exp(-j 2 pi f delay / F)
pub fn draw_channel(
    layout: &ArrayLayout,
    patterns: &PortPatternTable,
    users: &[UserSpec],
    subcarriers: usize,
    seed: u64,
) -> Result<ChannelRealization> {
    if users.is_empty() {
        return Err(Error::InvalidArgument("at least one user required".into()));
    }
    if subcarriers == 0 {
        return Err(Error::InvalidArgument("subcarriers must be >= 1".into()));
    }
    if patterns.ports_per_element() != layout.ports_per_element {
        return Err(Error::InvalidArgument(format!(
            "pattern table has {} ports but layout expects {}",
            patterns.ports_per_element(),
            layout.ports_per_element
        )));
    }
    let n_ant = layout.element_count();
    let n_p = layout.ports_per_element;
    let n_tx = n_ant * n_p;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    // Resolve every cluster to (complex gain, theta, phi) first so RNG
    // consumption is independent of the subcarrier count.
    struct Ray {
        gain: Complex64,
        theta: f64,
        phi: f64,
        delay: f64,
    }
    let mut rays: Vec<Vec<Ray>> = Vec::with_capacity(users.len());
    for user in users {
        let (theta0, phi0) = user.direction();
        let mut list = Vec::with_capacity(user.clusters.len());
        for cluster in &user.clusters {
            let amp = 10f64.powf(cluster.gain_db / 20.0);
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let spread = cluster.angle_spread_deg.to_radians();
            let (dt, dp) = if spread > 0.0 {
                (standard_normal(&mut rng) * spread, standard_normal(&mut rng) * spread)
            } else {
                (0.0, 0.0)
            };
            list.push(Ray {
                gain: Complex64::from_polar(amp, phase),
                theta: (theta0 + dt).clamp(0.0, std::f64::consts::PI),
                phi: phi0 + dp,
                delay: cluster.delay,
            });
        }
        rays.push(list);
    }

    let mut h = Vec::with_capacity(subcarriers);
    for f in 0..subcarriers {
        let mut h_f = DMatrix::<Complex64>::zeros(users.len(), n_tx);
        for (u, list) in rays.iter().enumerate() {
            for ray in list {
                let rot = Complex64::from_polar(
                    1.0,
                    -std::f64::consts::TAU * f as f64 * ray.delay / subcarriers as f64,
                );
                let g = ray.gain * rot;
                for m in 0..n_ant {
                    for p in 0..n_p {
                        // theta-polarized receive convention
                        let (et, _ep) = patterns.embedded(layout, m, p, ray.theta, ray.phi);
                        h_f[(u, m * n_p + p)] += g * et;
                    }
                }
            }
        }
        h.push(h_f);
    }
    Ok(ChannelRealization {
        h,
        subcarriers,
        seed,
        users: users.to_vec(),
    })
}
