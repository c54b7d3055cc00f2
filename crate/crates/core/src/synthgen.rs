//! Synthetic chromatogram generator.
//!
//! Each oil is a sum of Gaussian peaks. Mixtures are convex combinations of
//! two rendered oils with multiplicative Gaussian noise per time point. The
//! `table1` preset reproduces the nine-oil, 21-row class layout of the
//! reference HPLC study: 370 samples, 246 pure and 124 two-oil mixtures.
//!
//! `overlap` pulls every oil's peaks toward a shared template: at 1 all oils
//! render identically, at 0 they keep their own peak positions and heights.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Example, LabelSet, LabelSpace};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Feature dimension of the reference chromatograms.
pub const TABLE1_DIM: usize = 1607;

/// Oils in the order used as label indices.
pub const TABLE1_OILS: [&str; 9] = [
    "soybean", "peanut", "sunflower", "corn", "palm", "sesame", "cotton", "rap", "rice_bran",
];

/// (components, count) per class row; two-oil rows are mixtures.
pub const TABLE1_ROWS: [(&[&str], usize); 21] = [
    (&["soybean"], 34),
    (&["peanut"], 39),
    (&["sunflower"], 17),
    (&["corn"], 10),
    (&["palm"], 27),
    (&["sesame"], 37),
    (&["cotton"], 0),
    (&["rap"], 58),
    (&["rice_bran"], 24),
    (&["soybean", "sesame"], 21),
    (&["soybean", "palm"], 9),
    (&["soybean", "corn"], 3),
    (&["soybean", "sunflower"], 3),
    (&["soybean", "peanut"], 9),
    (&["sunflower", "sesame"], 21),
    (&["palm", "sesame"], 9),
    (&["peanut", "sesame"], 20),
    (&["peanut", "palm"], 9),
    (&["peanut", "corn"], 2),
    (&["peanut", "sunflower"], 9),
    (&["sesame", "cotton"], 9),
];

/// Adulteration range shared by every mixture row of the preset.
pub const TABLE1_RATIO_RANGE: (f64, f64) = (0.05, 0.99);

const PROFILE_SEED: u64 = 0x7A31_E5D0_2013_0001;
const TEMPLATE_PEAKS: usize = 18;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OilProfile {
    pub name: String,
    pub peaks: Vec<Peak>,
}

impl OilProfile {
    fn validate(&self, d: usize) -> Result<()> {
        if self.peaks.len() < 3 {
            return Err(Error::InvalidParameter(format!("profile `{}` needs at least 3 peaks", self.name)));
        }
        for p in &self.peaks {
            if !(p.center >= 0.0 && p.center < d as f64) || !(p.width > 0.0) || !(p.height > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "profile `{}` has an invalid peak {p:?} for d = {d}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Peaks moved a fraction `overlap` of the way toward `template`'s.
    pub fn blended(&self, template: &OilProfile, overlap: f64) -> OilProfile {
        let lerp = |own: f64, shared: f64| own + overlap * (shared - own);
        OilProfile {
            name: self.name.clone(),
            peaks: self
                .peaks
                .iter()
                .zip(&template.peaks)
                .map(|(p, t)| Peak {
                    center: lerp(p.center, t.center),
                    width: lerp(p.width, t.width),
                    height: lerp(p.height, t.height),
                })
                .collect(),
        }
    }
}

/// Sum of Gaussian bumps over `0..d`, scaled to a unit maximum.
pub fn render_profile(profile: &OilProfile, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for p in &profile.peaks {
        let inv = 1.0 / (2.0 * p.width * p.width);
        for (i, v) in out.iter_mut().enumerate() {
            let t = i as f64 - p.center;
            *v += p.height * (-t * t * inv).exp();
        }
    }
    let max = out.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        out.iter_mut().for_each(|v| *v /= max);
    }
    out
}

/// One class row: a pure oil or a two-oil mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    /// One or two profile names; for mixtures the first is the adulterant.
    pub components: Vec<String>,
    /// Range of the adulterant fraction, ignored for pure rows.
    pub ratio_range: (f64, f64),
    pub count: usize,
}

impl MixtureSpec {
    fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.components.len()) {
            return Err(Error::InvalidParameter(format!(
                "a row needs 1 or 2 components, got {:?}",
                self.components
            )));
        }
        if self.components.len() == 2 {
            if self.components[0] == self.components[1] {
                return Err(Error::InvalidParameter(format!("row mixes `{}` with itself", self.components[0])));
            }
            let (lo, hi) = self.ratio_range;
            if !(lo >= 0.05 && lo <= hi && hi <= 0.99) {
                return Err(Error::InvalidParameter(format!(
                    "ratio range [{lo}, {hi}] must satisfy 0.05 <= lo <= hi <= 0.99"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub d: usize,
    pub profiles: Vec<OilProfile>,
    /// Shared shape every profile converges to as `overlap` goes to 1.
    pub template: OilProfile,
    pub rows: Vec<MixtureSpec>,
    pub noise_sigma: f64,
    pub overlap: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    /// The nine-oil preset at full dimension, `noise_sigma = 0.05`, `overlap = 0.6`.
    pub fn table1(seed: u64) -> Self {
        Self::table1_with_dim(TABLE1_DIM, seed)
    }

    /// The same class layout and peak shapes, stretched to `d` time points.
    pub fn table1_with_dim(d: usize, seed: u64) -> Self {
        let (template, profiles) = table1_profiles(d);
        let rows = TABLE1_ROWS
            .iter()
            .map(|(components, count)| MixtureSpec {
                components: components.iter().map(|s| s.to_string()).collect(),
                ratio_range: if components.len() == 2 { TABLE1_RATIO_RANGE } else { (1.0, 1.0) },
                count: *count,
            })
            .collect();
        GeneratorConfig {
            d,
            profiles,
            template,
            rows,
            noise_sigma: 0.05,
            overlap: 0.6,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("generator.d must be positive".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "generator.noise_sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::InvalidParameter(format!(
                "generator.overlap must lie in [0, 1], got {}",
                self.overlap
            )));
        }
        self.template.validate(self.d)?;
        for p in &self.profiles {
            p.validate(self.d)?;
            if p.peaks.len() != self.template.peaks.len() {
                return Err(Error::InvalidParameter(format!(
                    "profile `{}` has {} peaks, the template has {}",
                    p.name,
                    p.peaks.len(),
                    self.template.peaks.len()
                )));
            }
        }
        LabelSpace::new(self.profiles.iter().map(|p| p.name.clone()))?;
        for row in &self.rows {
            row.validate()?;
        }
        Ok(())
    }

    pub fn label_space(&self) -> Result<LabelSpace> {
        LabelSpace::new(self.profiles.iter().map(|p| p.name.clone()))
    }

    /// Flat `key = value` echo of the full configuration.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "generator.d = {}", self.d);
        let _ = writeln!(out, "generator.noise_sigma = {}", self.noise_sigma);
        let _ = writeln!(out, "generator.overlap = {}", self.overlap);
        let _ = writeln!(out, "generator.seed = {}", self.seed);
        let peaks = |p: &OilProfile| {
            p.peaks
                .iter()
                .map(|k| format!("{}:{}:{}", k.center, k.width, k.height))
                .collect::<Vec<_>>()
                .join("|")
        };
        let _ = writeln!(out, "template = {}", peaks(&self.template));
        for p in &self.profiles {
            let _ = writeln!(out, "profile.{} = {}", p.name, peaks(p));
        }
        for (i, row) in self.rows.iter().enumerate() {
            let _ = writeln!(
                out,
                "row.{i:02} = {}:{}:{}:{}",
                row.components.join("&"),
                row.ratio_range.0,
                row.ratio_range.1,
                row.count
            );
        }
        out
    }

    pub fn from_config_text(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Config(m);
        let mut d = None;
        let mut noise_sigma = None;
        let mut overlap = None;
        let mut seed = None;
        let mut template = None;
        let mut profiles = Vec::new();
        let mut rows = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(format!("expected `key = value`, found `{line}`")))?;
            let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("{key}: cannot parse `{v}`")));
            let peaks = |v: &str| -> Result<Vec<Peak>> {
                v.split('|')
                    .map(|p| {
                        let parts: Vec<&str> = p.split(':').collect();
                        match parts.as_slice() {
                            [c, w, h] => Ok(Peak {
                                center: num(c)?,
                                width: num(w)?,
                                height: num(h)?,
                            }),
                            _ => Err(bad(format!("{key}: malformed peak `{p}`"))),
                        }
                    })
                    .collect()
            };
            match key {
                "generator.d" => d = Some(value.parse().map_err(|_| bad(format!("{key}: `{value}`")))?),
                "generator.noise_sigma" => noise_sigma = Some(num(value)?),
                "generator.overlap" => overlap = Some(num(value)?),
                "generator.seed" => seed = Some(value.parse().map_err(|_| bad(format!("{key}: `{value}`")))?),
                "template" => {
                    template = Some(OilProfile {
                        name: "template".into(),
                        peaks: peaks(value)?,
                    })
                }
                _ if key.starts_with("profile.") => profiles.push(OilProfile {
                    name: key["profile.".len()..].to_string(),
                    peaks: peaks(value)?,
                }),
                _ if key.starts_with("row.") => {
                    let index: usize = key["row.".len()..].parse().map_err(|_| bad(format!("bad row key `{key}`")))?;
                    let parts: Vec<&str> = value.split(':').collect();
                    let [names, lo, hi, count] = parts.as_slice() else {
                        return Err(bad(format!("{key}: malformed row `{value}`")));
                    };
                    rows.insert(
                        index,
                        MixtureSpec {
                            components: names.split('&').map(str::to_string).collect(),
                            ratio_range: (num(lo)?, num(hi)?),
                            count: count.parse().map_err(|_| bad(format!("{key}: bad count `{count}`")))?,
                        },
                    );
                }
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        let missing = |k: &str| bad(format!("missing `{k}`"));
        let config = GeneratorConfig {
            d: d.ok_or_else(|| missing("generator.d"))?,
            profiles,
            template: template.ok_or_else(|| missing("template"))?,
            rows: rows.into_values().collect(),
            noise_sigma: noise_sigma.ok_or_else(|| missing("generator.noise_sigma"))?,
            overlap: overlap.ok_or_else(|| missing("generator.overlap"))?,
            seed: seed.ok_or_else(|| missing("generator.seed"))?,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Template and nine oil profiles for dimension `d`. Peak positions are fixed
/// fractions of the time axis, so every `d` gives the same shapes.
fn table1_profiles(d: usize) -> (OilProfile, Vec<OilProfile>) {
    let mut rng = ChaCha8Rng::seed_from_u64(PROFILE_SEED);
    let scale = d as f64;
    let unit = Normal::<f64>::new(0.0, 1.0).expect("unit normal");

    let mut template = Vec::with_capacity(TEMPLATE_PEAKS + 1);
    for k in 0..TEMPLATE_PEAKS {
        let frac = 0.08 + 0.84 * k as f64 / (TEMPLATE_PEAKS - 1) as f64 + rng.random_range(-0.01..0.01);
        template.push((frac, rng.random_range(0.006..0.014), rng.random_range(0.3..1.0)));
    }
    // broad hump keeps every time point above zero
    template.push((0.5, 0.3, 0.06));

    let to_peaks = |spec: &[(f64, f64, f64)]| -> Vec<Peak> {
        spec.iter()
            .map(|&(c, w, h)| Peak {
                center: (c * scale).clamp(0.0, scale - 1.0),
                width: (w * scale).max(0.5),
                height: h,
            })
            .collect()
    };

    let profiles = TABLE1_OILS
        .iter()
        .map(|name| {
            let own: Vec<(f64, f64, f64)> = template
                .iter()
                .enumerate()
                .map(|(k, &(c, w, h))| {
                    if k == TEMPLATE_PEAKS {
                        return (c, w, h);
                    }
                    let shift = 0.006 * unit.sample(&mut rng);
                    let width = w * (0.15 * unit.sample(&mut rng)).exp();
                    let height = (h * (0.35 * unit.sample(&mut rng)).exp()).min(1.5);
                    (c + shift, width, height)
                })
                .collect();
            OilProfile {
                name: name.to_string(),
                peaks: to_peaks(&own),
            }
        })
        .collect();
    (
        OilProfile {
            name: "template".into(),
            peaks: to_peaks(&template),
        },
        profiles,
    )
}

/// Draws the dataset described by `config`. Rows are generated in order,
/// each from its own derived seed.
pub fn generate(config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    let space = config.label_space()?;
    let rendered: Vec<Vec<f64>> = config
        .profiles
        .iter()
        .map(|p| render_profile(&p.blended(&config.template, config.overlap), config.d))
        .collect();
    let noise = Normal::new(0.0, config.noise_sigma)
        .map_err(|e| Error::InvalidParameter(format!("generator.noise_sigma: {e}")))?;

    let mut examples = Vec::with_capacity(config.rows.iter().map(|r| r.count).sum());
    for (row_index, row) in config.rows.iter().enumerate() {
        let indices = row
            .components
            .iter()
            .map(|name| {
                space
                    .index_of(name)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown profile `{name}` in row {row_index}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[row_index as u64]));
        for k in 0..row.count {
            let (features, ratios) = match indices.as_slice() {
                [a] => (rendered[*a].clone(), BTreeMap::from([(*a, 1.0)])),
                [a, b] => {
                    let (lo, hi) = row.ratio_range;
                    let r = if hi > lo { rng.random_range(lo..=hi) } else { lo };
                    let mix = rendered[*a]
                        .iter()
                        .zip(&rendered[*b])
                        .map(|(x, y)| r * x + (1.0 - r) * y)
                        .collect();
                    (mix, BTreeMap::from([(*a, r), (*b, 1.0 - r)]))
                }
                _ => unreachable!("validated component count"),
            };
            let features = if config.noise_sigma > 0.0 {
                features
                    .into_iter()
                    .map(|v| (v * (1.0 + noise.sample(&mut rng))).max(0.0))
                    .collect()
            } else {
                features
            };
            let labels: LabelSet = indices.iter().copied().collect();
            let id = format!("{}-{k:03}", row.components.join("+"));
            examples.push(Example::new(id, features, labels, Some(ratios))?);
        }
    }
    Dataset::new(space, examples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn peak(center: f64, width: f64, height: f64) -> Peak {
        Peak { center, width, height }
    }

    #[test]
    fn single_peak_render() {
        let p = OilProfile {
            name: "x".into(),
            peaks: vec![peak(800.0, 10.0, 1.0)],
        };
        let v = render_profile(&p, 1607);
        assert_eq!(v.len(), 1607);
        assert_eq!(v[800], 1.0);
        assert!(v.iter().all(|&x| x <= 1.0));
        assert_eq!(render_profile(&p, 1607), v);
    }

    #[test]
    fn disjoint_peaks_leave_a_gap() {
        let p = OilProfile {
            name: "x".into(),
            peaks: vec![peak(100.0, 5.0, 1.0), peak(400.0, 5.0, 0.5)],
        };
        let v = render_profile(&p, 500);
        assert!(v[250] < 1e-12);
        assert!((v[400] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn table1_layout() {
        let ds = generate(&GeneratorConfig::table1_with_dim(120, 7)).unwrap();
        assert_eq!(ds.len(), 370);
        assert_eq!(ds.labels(), 9);
        assert_eq!(ds.examples.iter().filter(|e| e.labels.len() == 1).count(), 246);
        assert_eq!(ds.examples.iter().filter(|e| e.labels.len() == 2).count(), 124);
    }

    #[test]
    fn full_dimension_default() {
        let config = GeneratorConfig::table1(7);
        assert_eq!(config.d, 1607);
        assert_eq!(config.rows.len(), 21);
        assert_eq!(config.rows.iter().map(|r| r.count).sum::<usize>(), 370);
        config.validate().unwrap();
    }

    #[test]
    fn noiseless_mixture_is_convex() {
        let mut config = GeneratorConfig::table1_with_dim(200, 1);
        config.noise_sigma = 0.0;
        config.rows = vec![MixtureSpec {
            components: vec!["peanut".into(), "soybean".into()],
            ratio_range: (0.6, 0.6),
            count: 2,
        }];
        let ds = generate(&config).unwrap();
        let peanut = render_profile(&config.profiles[1].blended(&config.template, config.overlap), 200);
        let soybean = render_profile(&config.profiles[0].blended(&config.template, config.overlap), 200);
        for e in &ds.examples {
            assert_eq!(e.ratios.as_ref().unwrap()[&1], 0.6);
            for (i, &v) in e.features.iter().enumerate() {
                assert!((v - (0.6 * peanut[i] + 0.4 * soybean[i])).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn invalid_settings() {
        let mut config = GeneratorConfig::table1_with_dim(50, 1);
        config.noise_sigma = -0.1;
        assert!(generate(&config).unwrap_err().to_string().contains("noise_sigma"));
        let mut config = GeneratorConfig::table1_with_dim(50, 1);
        config.rows[0].components = vec!["olive".into()];
        assert!(generate(&config).is_err());
        let mut config = GeneratorConfig::table1_with_dim(50, 1);
        config.overlap = 1.5;
        assert!(generate(&config).is_err());
    }

    #[test]
    fn config_text_round_trip() {
        let config = GeneratorConfig::table1_with_dim(300, 11);
        let back = GeneratorConfig::from_config_text(&config.to_config_text()).unwrap();
        assert_eq!(back, config);
        assert!(GeneratorConfig::from_config_text("generator.bogus = 1").is_err());
    }

    #[test]
    fn full_overlap_makes_oils_identical() {
        let mut config = GeneratorConfig::table1_with_dim(150, 3);
        config.overlap = 1.0;
        let a = render_profile(&config.profiles[0].blended(&config.template, 1.0), 150);
        let b = render_profile(&config.profiles[5].blended(&config.template, 1.0), 150);
        assert_eq!(a, b);
    }
}
