//! Seed x scheme x SNR simulation campaigns.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{ArrayLayout, PortPatternTable};
use crate::error::{Error, Result};

use super::channel::{draw_channel, UserSpec};
use super::precoder::{build_analog_precoder, Csi};
use super::{greedy_user_schedule, rate_of_set, Scheme};

/// Campaign inputs after file references are resolved.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub users: Vec<UserSpec>,
    pub subcarriers: usize,
    pub schemes: Vec<Scheme>,
    pub snr_db: Vec<f64>,
    pub seeds: Vec<u64>,
    pub p_tx: f64,
    /// RF chain count for the fully connected scheme (required when used).
    pub n_rf_fully_connected: Option<usize>,
    /// Optional phase-shifter quantization in bits.
    pub phase_bits: Option<u32>,
    /// Optional cap on scheduled streams.
    pub max_streams: Option<usize>,
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |path: &str, message: &str| {
            Err(Error::ConfigError {
                path: path.into(),
                message: message.into(),
            })
        };
        if self.users.is_empty() {
            return fail("users", "at least one user required");
        }
        if self.subcarriers == 0 {
            return fail("subcarriers", "must be >= 1");
        }
        if self.schemes.is_empty() {
            return fail("schemes", "at least one scheme required");
        }
        if self.snr_db.is_empty() {
            return fail("snr_db", "at least one SNR point required");
        }
        if self.seeds.is_empty() {
            return fail("seeds", "at least one seed required");
        }
        if !(self.p_tx > 0.0) {
            return fail("p_tx", "must be positive");
        }
        if self.schemes.contains(&Scheme::FullyConnected) && self.n_rf_fully_connected.is_none() {
            return fail(
                "n_rf_fully_connected",
                "required when schemes include fully_connected",
            );
        }
        Ok(())
    }
}

/// One campaign cell result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRow {
    pub scheme: String,
    pub seed: u64,
    pub snr_db: f64,
    pub sum_rate: f64,
    pub scheduled: Vec<usize>,
}

/// Mean sum rate per (scheme, SNR).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanRow {
    pub scheme: String,
    pub snr_db: f64,
    pub mean_sum_rate: f64,
}

/// Full campaign output; rows are sorted (scheme, seed, snr) so reruns are
/// byte-identical.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SumRateReport {
    pub rows: Vec<RateRow>,
    pub means: Vec<MeanRow>,
    /// N_RF actually used per scheme.
    pub n_rf: std::collections::BTreeMap<String, usize>,
    /// Hash of the canonical config, for provenance.
    pub config_hash: String,
}

/// FNV-1a over the canonical JSON encoding of the spec.
pub fn config_hash(spec: &CampaignSpec) -> String {
    let text = crate::io::to_canonical_json(spec).unwrap_or_default();
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

/// Run the campaign: every (seed, scheme, snr) cell is an independent pure
/// computation; results are reassembled deterministically.
pub fn run_campaign(
    layout: &ArrayLayout,
    patterns: &PortPatternTable,
    spec: &CampaignSpec,
) -> Result<SumRateReport> {
    spec.validate()?;

    let cells: Vec<(usize, u64)> = spec
        .seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| (i, s))
        .collect();

    let per_seed: Result<Vec<Vec<RateRow>>> = cells
        .par_iter()
        .map(|&(_, seed)| {
            let channel = draw_channel(layout, patterns, &spec.users, spec.subcarriers, seed)?;
            let mut rows = Vec::new();
            for &scheme in &spec.schemes {
                let n_rf = match scheme {
                    Scheme::FullyConnected => spec.n_rf_fully_connected,
                    _ => None,
                };
                let mut analog = build_analog_precoder(
                    scheme,
                    layout,
                    patterns,
                    &Csi::Channel(&channel),
                    n_rf,
                )?;
                if let Some(bits) = spec.phase_bits {
                    analog.quantize_phases(bits);
                }
                for &snr in &spec.snr_db {
                    let noise = spec.p_tx * 10f64.powf(-snr / 10.0);
                    let scheduled = greedy_user_schedule(
                        &channel.h,
                        &analog.a,
                        spec.p_tx,
                        noise,
                        spec.max_streams,
                    )?;
                    let sum_rate = if scheduled.is_empty() {
                        0.0
                    } else {
                        rate_of_set(&channel.h, &analog.a, &scheduled, spec.p_tx, noise)?
                    };
                    rows.push(RateRow {
                        scheme: scheme.name().to_string(),
                        seed,
                        snr_db: snr,
                        sum_rate,
                        scheduled,
                    });
                }
            }
            Ok(rows)
        })
        .collect();

    let mut rows: Vec<RateRow> = per_seed?.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(a.seed.cmp(&b.seed))
            .then(a.snr_db.partial_cmp(&b.snr_db).unwrap())
    });

    let mut means = Vec::new();
    for &scheme in &spec.schemes {
        for &snr in &spec.snr_db {
            let rates: Vec<f64> = rows
                .iter()
                .filter(|r| r.scheme == scheme.name() && r.snr_db == snr)
                .map(|r| r.sum_rate)
                .collect();
            means.push(MeanRow {
                scheme: scheme.name().to_string(),
                snr_db: snr,
                mean_sum_rate: rates.iter().sum::<f64>() / rates.len() as f64,
            });
        }
    }
    means.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(a.snr_db.partial_cmp(&b.snr_db).unwrap())
    });

    let mut n_rf = std::collections::BTreeMap::new();
    for &scheme in &spec.schemes {
        let chains = match scheme {
            Scheme::Digital => layout.total_ports(),
            Scheme::FullyConnected => spec.n_rf_fully_connected.unwrap_or(0),
            Scheme::SpatialFiltering => layout.ports_per_element,
            Scheme::SingleElementSelect | Scheme::SingleElementCombine => layout.element_count(),
        };
        n_rf.insert(scheme.name().to_string(), chains);
    }

    Ok(SumRateReport {
        rows,
        means,
        n_rf,
        config_hash: config_hash(spec),
    })
}
