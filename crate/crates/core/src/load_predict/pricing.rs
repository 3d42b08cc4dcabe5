use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LoadError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionClass {
    /// Up to 576 lines.
    Sd,
    /// Up to 1080 lines.
    Hd,
    Uhd,
}

impl ResolutionClass {
    pub fn of(height: u32) -> Self {
        match height {
            0..=576 => ResolutionClass::Sd,
            577..=1080 => ResolutionClass::Hd,
            _ => ResolutionClass::Uhd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FramerateClass {
    Le30,
    Le60,
    Gt60,
}

impl FramerateClass {
    pub fn of(fps: f64) -> Self {
        if fps <= 30.0 {
            FramerateClass::Le30
        } else if fps <= 60.0 {
            FramerateClass::Le60
        } else {
            FramerateClass::Gt60
        }
    }
}

/// One per-minute price: currency per minute of output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerMinuteRate {
    pub tier: String,
    pub codec: String,
    pub resolution: ResolutionClass,
    pub framerate: FramerateClass,
    pub region: String,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingTable {
    pub currency: String,
    #[serde(default)]
    pub note: Option<String>,
    /// Flat price of a reserved transcoding slot, for reference only.
    #[serde(default)]
    pub reserved_from: Option<f64>,
    #[serde(default)]
    pub per_minute: Vec<PerMinuteRate>,
    /// Instance class → currency per hour of compute.
    #[serde(default)]
    pub compute: BTreeMap<String, f64>,
}

fn rate(tier: &str, codec: &str, rate: f64) -> PerMinuteRate {
    PerMinuteRate {
        tier: tier.into(),
        codec: codec.into(),
        resolution: ResolutionClass::Hd,
        framerate: FramerateClass::Le30,
        region: "us-east".into(),
        rate,
    }
}

impl Default for PricingTable {
    /// Cloud transcoding list prices for HD ≤ 30 fps output in us-east as
    /// of February 2023, plus one illustrative compute instance.
    fn default() -> Self {
        Self {
            currency: "USD".into(),
            note: Some("list prices as of February 2023".into()),
            reserved_from: Some(400.0),
            per_minute: vec![
                rate("basic", "h264", 0.015),
                rate("professional_speed", "h264", 0.024),
                rate("professional_quality", "h264", 0.042),
                rate("professional_speed", "hevc", 0.048),
                rate("professional_quality", "hevc", 0.33),
            ],
            compute: BTreeMap::from([("standard".to_string(), 0.5)]),
        }
    }
}

impl PricingTable {
    pub fn validate(&self) -> Result<(), LoadError> {
        let bad = |what: String| Err(LoadError::Pricing(format!("{what} must be a finite non-negative rate")));
        for r in &self.per_minute {
            if !(r.rate >= 0.0 && r.rate.is_finite()) {
                return bad(format!("{}/{}/{}", r.tier, r.codec, r.region));
            }
        }
        for (k, v) in &self.compute {
            if !(*v >= 0.0 && v.is_finite()) {
                return bad(format!("instance `{k}`"));
            }
        }
        Ok(())
    }

    pub fn from_toml(s: &str) -> Result<Self, LoadError> {
        let t: Self = toml::from_str(s).map_err(|e| LoadError::Pricing(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pricing serializes")
    }

    fn lookup(
        &self,
        tier: &str,
        codec: &str,
        res: ResolutionClass,
        fps: FramerateClass,
        region: &str,
    ) -> Result<f64, LoadError> {
        self.per_minute
            .iter()
            .find(|r| {
                r.tier == tier && r.codec == codec && r.resolution == res && r.framerate == fps && r.region == region
            })
            .map(|r| r.rate)
            .ok_or_else(|| {
                LoadError::MissingPrice(format!(
                    "tier={tier} codec={codec} resolution={} framerate={} region={region}",
                    enum_name(&res),
                    enum_name(&fps)
                ))
            })
    }
}

fn enum_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    PerMinute,
    ComputeTime,
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostMode::PerMinute => "per_minute",
            CostMode::ComputeTime => "compute_time",
        })
    }
}

impl FromStr for CostMode {
    type Err = LoadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per_minute" => Ok(CostMode::PerMinute),
            "compute_time" => Ok(CostMode::ComputeTime),
            _ => Err(LoadError::Pricing(format!(
                "unknown pricing mode `{s}` (per_minute or compute_time)"
            ))),
        }
    }
}

/// A transcoding job to price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostJob {
    /// Output duration.
    pub duration_seconds: f64,
    pub height: u32,
    pub frame_rate: f64,
    pub codecs: Vec<String>,
    pub tier: String,
    pub region: String,
    #[serde(default)]
    pub instance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostItem {
    pub description: String,
    pub quantity: f64,
    pub unit: String,
    pub unit_rate: f64,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub mode: CostMode,
    pub currency: String,
    pub total: f64,
    pub items: Vec<CostItem>,
    #[serde(default)]
    pub note: Option<String>,
}

/// Amounts are rounded to millionths of the currency unit, which keeps
/// decimal prices such as 10 × 0.015 exactly at 0.15.
fn money(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

pub fn estimate_cost(
    job: &CostJob,
    pricing: &PricingTable,
    mode: CostMode,
    predicted_seconds: Option<f64>,
) -> Result<CostEstimate, LoadError> {
    let mut items = Vec::new();
    match mode {
        CostMode::PerMinute => {
            if !(job.duration_seconds >= 0.0 && job.duration_seconds.is_finite()) {
                return Err(LoadError::Pricing(format!(
                    "bad output duration {}",
                    job.duration_seconds
                )));
            }
            if job.codecs.is_empty() {
                return Err(LoadError::Pricing("no codecs requested".into()));
            }
            let (res, fps) = (ResolutionClass::of(job.height), FramerateClass::of(job.frame_rate));
            let minutes = job.duration_seconds / 60.0;
            for codec in &job.codecs {
                let r = pricing.lookup(&job.tier, codec, res, fps, &job.region)?;
                items.push(CostItem {
                    description: format!("{codec} {} {} {}", job.tier, enum_name(&res), job.region),
                    quantity: minutes,
                    unit: "minute".into(),
                    unit_rate: r,
                    amount: money(minutes * r),
                });
            }
        }
        CostMode::ComputeTime => {
            let secs = predicted_seconds
                .ok_or_else(|| LoadError::Pricing("compute_time pricing needs a predicted duration".into()))?;
            if !(secs >= 0.0 && secs.is_finite()) {
                return Err(LoadError::Pricing(format!("bad predicted duration {secs}")));
            }
            let inst = job
                .instance
                .as_deref()
                .ok_or_else(|| LoadError::Pricing("compute_time pricing needs an instance class".into()))?;
            let r = *pricing
                .compute
                .get(inst)
                .ok_or_else(|| LoadError::MissingPrice(format!("instance={inst}")))?;
            let hours = secs / 3600.0;
            items.push(CostItem {
                description: format!("{inst} compute"),
                quantity: hours,
                unit: "hour".into(),
                unit_rate: r,
                amount: money(hours * r),
            });
        }
    }
    Ok(CostEstimate {
        mode,
        currency: pricing.currency.clone(),
        total: money(items.iter().map(|i| i.amount).sum()),
        items,
        note: pricing.note.clone(),
    })
}
