//! A 2-d chemical plume field observed through a saturating particle sensor.
//!
//! Each source emits particles which a sensor of size `a` registers at rate
//! `R(x) = R_s / ln(gamma/a) * exp(-<theta - x, V> / 2D) * K0(|theta - x| / gamma)`,
//! the count over a measurement window `dt` being Poisson with mean
//! `R(x) dt`. The exponential tilt makes downwind locations hotter than
//! upwind ones at the same distance.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::env::bessel::bessel_k0;
use crate::error::{Error, Result};

/// Distance clamp at the source singularity (K0 diverges at 0).
pub const MIN_SOURCE_DISTANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlumeSource {
    /// Source location in field units.
    pub location: [f64; 2],
    /// Particle release rate (particles/s).
    pub release_rate: f64,
    /// Mean travel distance of a particle in its lifetime (field units).
    pub travel_scale: f64,
    /// Mean wind velocity (field units/s).
    pub wind: [f64; 2],
    /// Particle diffusivity (field units^2/s).
    pub diffusivity: f64,
    pub active: bool,
}

#[derive(Debug, Clone)]
pub struct PlumeField {
    /// Axis-aligned field extent; queries live in [0, extent].
    pub extent: [f64; 2],
    /// Sensor size `a` (field units).
    pub sensor_size: f64,
    /// Measurement window (seconds).
    pub dt: f64,
    /// Sensor saturation threshold (hits/second).
    pub y_max: f64,
    pub sources: Vec<PlumeSource>,
}

/// The eight standard sources. Index 0 is Source 1, etc.; all start inactive.
pub fn standard_sources() -> Vec<PlumeSource> {
    let rows: [([f64; 2], f64, f64, [f64; 2], f64); 8] = [
        ([20.0, 20.0], 100.0, 50.0, [0.5, 0.5], 10.0),
        ([30.0, 80.0], 100.0, 60.0, [-0.3, 0.2], 15.0),
        ([45.0, 55.0], 15.0, 50.0, [0.5, 0.5], 10.0),
        ([50.0, 50.0], 18.0, 30.0, [-0.3, 0.2], 15.0),
        ([55.0, 45.0], 16.0, 40.0, [0.2, -0.4], 12.0),
        ([48.0, 52.0], 17.0, 35.0, [0.1, 0.1], 11.0),
        ([52.0, 55.0], 14.0, 45.0, [-0.1, -0.1], 13.0),
        ([52.0, 52.0], 18.0, 40.0, [0.1, -0.1], 13.0),
    ];
    rows.iter()
        .map(|&(location, release_rate, travel_scale, wind, diffusivity)| PlumeSource {
            location,
            release_rate,
            travel_scale,
            wind,
            diffusivity,
            active: false,
        })
        .collect()
}

impl PlumeField {
    fn base(y_max: f64, sources: Vec<PlumeSource>) -> Self {
        Self {
            extent: [100.0, 100.0],
            sensor_size: 1.0,
            dt: 1.0,
            y_max,
            sources,
        }
    }

    /// Source localization task: Source 1 active, saturation at 60 hits/s.
    pub fn localization_task() -> Self {
        let mut sources = standard_sources();
        sources[0].active = true;
        Self::base(60.0, sources)
    }

    /// Wind estimation task: Source 2 active with wind `wind`, saturation 60.
    pub fn wind_task(wind: [f64; 2]) -> Self {
        let mut sources = standard_sources();
        sources[1].active = true;
        sources[1].wind = wind;
        Self::base(60.0, vec![sources[1]])
    }

    /// Active-source identification: Sources 3-8 present, `mask` selects the
    /// active subset, saturation at 30 hits/s.
    pub fn source_id_task(mask: [bool; 6]) -> Self {
        let all = standard_sources();
        let sources: Vec<PlumeSource> = (0..6)
            .map(|i| PlumeSource {
                active: mask[i],
                ..all[i + 2]
            })
            .collect();
        Self::base(30.0, sources)
    }

    /// The rate of hits a single source contributes at `x`, regardless of its
    /// active flag.
    pub fn source_rate(&self, source: &PlumeSource, x: [f64; 2]) -> Result<f64> {
        let gamma = source.travel_scale;
        let a = self.sensor_size;
        if gamma <= a {
            return Err(Error::Config(format!(
                "travel scale {gamma} must exceed sensor size {a}"
            )));
        }
        let dx = [source.location[0] - x[0], source.location[1] - x[1]];
        let dist = (dx[0] * dx[0] + dx[1] * dx[1]).sqrt().max(MIN_SOURCE_DISTANCE);
        let advection = -(dx[0] * source.wind[0] + dx[1] * source.wind[1])
            / (2.0 * source.diffusivity);
        let k0 = bessel_k0(dist / gamma)?;
        Ok(source.release_rate / (gamma / a).ln() * advection.exp() * k0)
    }

    /// Total rate of hits at `x`: the sum over active sources.
    pub fn total_rate(&self, x: [f64; 2]) -> Result<f64> {
        let mut rate = 0.0;
        for s in &self.sources {
            if s.active {
                rate += self.source_rate(s, x)?;
            }
        }
        Ok(rate)
    }

    /// One sensor measurement at `x`: a Poisson count with mean
    /// `total_rate(x) * dt`.
    pub fn observe(&self, x: [f64; 2], rng: &mut ChaCha8Rng) -> Result<u64> {
        let mean = self.total_rate(x)? * self.dt;
        if mean == 0.0 {
            return Ok(0);
        }
        let pois = Poisson::new(mean)
            .map_err(|e| Error::Numeric(format!("Poisson rate {mean}: {e}")))?;
        Ok(pois.sample(rng) as u64)
    }

    /// Saturation threshold expressed as a count over one measurement window.
    pub fn saturation_count(&self) -> u64 {
        (self.y_max * self.dt).floor() as u64
    }
}

/// Rate evaluator for localization hypotheses: Source-1 physics with the
/// source placed at `location`.
pub fn localization_rate(field: &PlumeField, location: [f64; 2], x: [f64; 2]) -> f64 {
    let source = PlumeSource {
        location,
        active: true,
        ..standard_sources()[0]
    };
    field.source_rate(&source, x).expect("valid standard source")
}

/// Rate evaluator for wind hypotheses: Source-2 physics with wind `wind`
/// (location and the remaining parameters fixed to the table row).
pub fn wind_rate(field: &PlumeField, wind: [f64; 2], x: [f64; 2]) -> f64 {
    let source = PlumeSource {
        wind,
        active: true,
        ..standard_sources()[1]
    };
    field.source_rate(&source, x).expect("valid standard source")
}

/// Rate evaluator for source-identification hypotheses: Sources 3-8 with the
/// given activity mask.
pub fn mask_rate(field: &PlumeField, mask: [bool; 6], x: [f64; 2]) -> f64 {
    let all = standard_sources();
    let mut rate = 0.0;
    for i in 0..6 {
        if mask[i] {
            let source = PlumeSource {
                active: true,
                ..all[i + 2]
            };
            rate += field.source_rate(&source, x).expect("valid standard source");
        }
    }
    rate
}
