use serde::{Deserialize, Serialize};

use super::{base_metadata, CampaignConfig, Metadata};
use crate::channel::{
    capacity, critical_rate, cutoff_rate, gallager_exponent, jelinek_exponent,
};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub rate: f64,
    pub e_g: f64,
    pub rho_g: f64,
    pub e_j_cutoff: f64,
    pub e_j_rate: f64,
    pub r0: f64,
    pub r_crit: f64,
}

/// Exponent curves on the rate grid `step, 2·step, ...` below capacity.
pub fn run_exponents(cfg: &CampaignConfig, seed: u64) -> Result<(Metadata, Vec<ExponentRow>)> {
    let ch = cfg.channel()?;
    let (c, r0, r_crit) = (capacity(&ch), cutoff_rate(&ch), critical_rate(&ch));
    let mut rows = Vec::new();
    let mut i = 1;
    loop {
        let rate = i as f64 * cfg.rate_step;
        if rate >= c {
            break;
        }
        let g = gallager_exponent(&ch, rate);
        rows.push(ExponentRow {
            rate,
            e_g: g.value,
            rho_g: g.rho_star,
            e_j_cutoff: jelinek_exponent(&ch, r0, rate).value,
            e_j_rate: jelinek_exponent(&ch, rate, rate).value,
            r0,
            r_crit,
        });
        i += 1;
    }
    let mut meta = base_metadata(cfg, "exponents", seed);
    meta.push("capacity", c);
    Ok((meta, rows))
}
