//! Multicarrier downlink simulator for multi-mode antenna arrays.
//!
//! The transmitter is a frequency-flat analog precoder A (identity,
//! fully-connected phase shifters, or block-diagonal sub-arrays) followed by
//! per-subcarrier zero-forcing digital precoders D_f over a greedily
//! scheduled user set; architectures are compared by sum rate.

mod campaign;
mod channel;
mod precoder;

pub use campaign::{run_campaign, CampaignSpec, MeanRow, RateRow, SumRateReport};
pub use channel::{draw_channel, ChannelRealization, ClusterSpec, UserSpec};
pub use precoder::{build_analog_precoder, AnalogPrecoder, Csi};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transmitter architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Digital,
    FullyConnected,
    SpatialFiltering,
    SingleElementSelect,
    SingleElementCombine,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Digital,
        Scheme::FullyConnected,
        Scheme::SpatialFiltering,
        Scheme::SingleElementSelect,
        Scheme::SingleElementCombine,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Digital => "digital",
            Scheme::FullyConnected => "fully_connected",
            Scheme::SpatialFiltering => "spatial_filtering",
            Scheme::SingleElementSelect => "single_element_select",
            Scheme::SingleElementCombine => "single_element_combine",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .iter()
            .find(|sch| sch.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme '{s}'")))
    }
}

/// Analog + per-subcarrier digital precoders for one scheduled user set.
#[derive(Debug, Clone)]
pub struct PrecoderStack {
    pub analog: AnalogPrecoder,
    /// One N_RF x K digital matrix per subcarrier.
    pub digital: Vec<DMatrix<Complex64>>,
    /// Scheduled user indices, ascending.
    pub scheduled: Vec<usize>,
    pub p_tx: f64,
}

impl PrecoderStack {
    /// Zero-forcing digital stage for every subcarrier of a channel behind
    /// a fixed analog precoder and schedule.
    pub fn build(
        channel: &ChannelRealization,
        analog: AnalogPrecoder,
        scheduled: Vec<usize>,
        p_tx: f64,
    ) -> Result<PrecoderStack> {
        let mut digital = Vec::with_capacity(channel.h.len());
        for h_f in &channel.h {
            digital.push(build_digital_precoder(h_f, &analog.a, &scheduled, p_tx)?);
        }
        Ok(PrecoderStack {
            analog,
            digital,
            scheduled,
            p_tx,
        })
    }

    pub fn n_rf(&self) -> usize {
        self.analog.n_rf
    }

    /// Sum rate of the stack against the channel it was built for.
    pub fn sum_rate(&self, channel: &ChannelRealization, noise_power: f64) -> Result<f64> {
        sum_rate(
            &channel.h,
            &self.analog.a,
            &self.digital,
            &self.scheduled,
            noise_power,
        )
    }
}

/// Zero-forcing digital precoder on the effective channel H_f A over the
/// scheduled users, with equal per-user power and ||A D_f||_F^2 = P_tx.
pub fn build_digital_precoder(
    h_f: &DMatrix<Complex64>,
    a: &DMatrix<Complex64>,
    scheduled: &[usize],
    p_tx: f64,
) -> Result<DMatrix<Complex64>> {
    if scheduled.is_empty() {
        return Err(Error::InvalidArgument("no scheduled users".into()));
    }
    if !(p_tx > 0.0) {
        return Err(Error::InvalidArgument("transmit power must be positive".into()));
    }
    let k = scheduled.len();
    let n_rf = a.ncols();
    if k > n_rf {
        return Err(Error::PrecoderSingular(format!(
            "{k} streams exceed {n_rf} RF chains"
        )));
    }
    // Effective channel G = H[scheduled, :] * A, K x N_RF.
    let mut g = DMatrix::<Complex64>::zeros(k, n_rf);
    for (row, &u) in scheduled.iter().enumerate() {
        if u >= h_f.nrows() {
            return Err(Error::InvalidArgument(format!("user {u} out of range")));
        }
        let hu = h_f.row(u) * a;
        g.set_row(row, &hu);
    }
    let gram = &g * g.adjoint();
    let inv = gram.clone().try_inverse().ok_or_else(|| {
        Error::PrecoderSingular("effective channel Gram matrix is singular".into())
    })?;
    // Guard against silently inaccurate inverses on ill-conditioned sets.
    let residual = (&gram * &inv - DMatrix::<Complex64>::identity(k, k)).norm();
    if !residual.is_finite() || residual > 1e-6 * k as f64 {
        return Err(Error::PrecoderSingular(format!(
            "effective channel nearly rank-deficient (inverse residual {residual:.2e})"
        )));
    }
    let mut d = g.adjoint() * inv;
    // Equal power split across streams, normalized through the analog stage.
    let per_stream = p_tx / k as f64;
    for col in 0..k {
        let ad = a * d.column(col);
        let norm = ad.norm();
        if norm < 1e-300 {
            return Err(Error::PrecoderSingular("zero-power ZF column".into()));
        }
        let scale = per_stream.sqrt() / norm;
        for row in 0..n_rf {
            d[(row, col)] *= scale;
        }
    }
    Ok(d)
}

/// Average spectral efficiency over subcarriers:
/// (1/F) sum_f sum_u log2(1 + SINR_{u,f}).
pub fn sum_rate(
    h: &[DMatrix<Complex64>],
    a: &DMatrix<Complex64>,
    d: &[DMatrix<Complex64>],
    scheduled: &[usize],
    noise_power: f64,
) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(Error::InvalidArgument("noise power must be positive".into()));
    }
    if h.len() != d.len() || h.is_empty() {
        return Err(Error::InvalidArgument(
            "channel and digital precoder lists must match per subcarrier".into(),
        ));
    }
    let k = scheduled.len();
    let mut total = 0.0;
    for (h_f, d_f) in h.iter().zip(d.iter()) {
        if d_f.nrows() != a.ncols() || d_f.ncols() != k {
            return Err(Error::InvalidArgument(
                "digital precoder has wrong dimensions".into(),
            ));
        }
        let ad = a * d_f;
        for (row, &u) in scheduled.iter().enumerate() {
            let eff = h_f.row(u) * &ad;
            let sig = eff[(0, row)].norm_sqr();
            let interference: f64 = (0..k)
                .filter(|&c| c != row)
                .map(|c| eff[(0, c)].norm_sqr())
                .sum();
            total += (1.0 + sig / (noise_power + interference)).log2();
        }
    }
    Ok(total / h.len() as f64)
}

/// Greedy scheduling: starting empty, add the user that most increases the
/// ZF sum rate until no addition helps or the RF chains are exhausted.
/// Ties break toward the lowest user index.
pub fn greedy_user_schedule(
    h: &[DMatrix<Complex64>],
    a: &DMatrix<Complex64>,
    p_tx: f64,
    noise_power: f64,
    max_streams: Option<usize>,
) -> Result<Vec<usize>> {
    if h.is_empty() || h[0].nrows() == 0 {
        return Err(Error::InvalidArgument("no candidate users".into()));
    }
    let n_users = h[0].nrows();
    let cap = max_streams
        .unwrap_or(usize::MAX)
        .min(a.ncols())
        .min(n_users);
    let mut scheduled: Vec<usize> = Vec::new();
    let mut best_rate = 0.0;
    while scheduled.len() < cap {
        let mut best: Option<(usize, f64)> = None;
        for u in 0..n_users {
            if scheduled.contains(&u) {
                continue;
            }
            let mut trial = scheduled.clone();
            trial.push(u);
            trial.sort_unstable();
            let rate = match rate_of_set(h, a, &trial, p_tx, noise_power) {
                Ok(r) => r,
                Err(Error::PrecoderSingular(_)) => continue,
                Err(e) => return Err(e),
            };
            let better = match best {
                None => true,
                Some((bu, br)) => rate > br + 1e-12 || (rate > br - 1e-12 && u < bu && false),
            };
            let _ = better;
            // strictly-greater comparison with lowest-index tie-break
            match best {
                None => best = Some((u, rate)),
                Some((_, br)) if rate > br => best = Some((u, rate)),
                _ => {}
            }
        }
        match best {
            Some((u, rate)) if rate > best_rate => {
                scheduled.push(u);
                scheduled.sort_unstable();
                best_rate = rate;
            }
            _ => break,
        }
    }
    if scheduled.is_empty() {
        // No single-user schedule improved on zero rate; fall back to the
        // strongest schedulable user so downstream stages have a stream.
        for u in 0..n_users {
            if rate_of_set(h, a, &[u], p_tx, noise_power).is_ok() {
                scheduled.push(u);
                break;
            }
        }
    }
    Ok(scheduled)
}

/// ZF sum rate of a fixed user set (mean over subcarriers).
pub fn rate_of_set(
    h: &[DMatrix<Complex64>],
    a: &DMatrix<Complex64>,
    scheduled: &[usize],
    p_tx: f64,
    noise_power: f64,
) -> Result<f64> {
    let mut d = Vec::with_capacity(h.len());
    for h_f in h {
        d.push(build_digital_precoder(h_f, a, scheduled, p_tx)?);
    }
    sum_rate(h, a, &d, scheduled, noise_power)
}
