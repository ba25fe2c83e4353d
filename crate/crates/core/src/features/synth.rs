//! Synthetic stand-in for the 24-instrument market panel.
//!
//! Daily returns follow a one-factor-per-class Gaussian model
//! `z_i = 0.4 f + 0.5 g_class + sqrt(0.59) e_i`, scaled by a per-class
//! volatility. The target's standardized return can be tied to the signal
//! source's previous-day standardized return:
//! `z_target(t) = s * z_source(t-1) + sqrt(1 - s^2) * z_target_noise(t)`,
//! so with `s = 1` the sign of the source's log-difference feature on day
//! `t` fixes the target's direction on day `t + 1`.
//!
//! With source [`MARKET_SOURCE`] the target follows the previous day's common
//! market factor instead. Every instrument's log-difference feature then
//! carries the signal, so it is spread evenly over the component and
//! asset-class modes and localized only along the feature modes.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{AssetClass, AssetPanel, Bar, FeatureError, Instrument};
use crate::rng;

/// Symbols per asset class, in slot order.
pub const SYMBOLS: [[&str; 6]; 4] = [
    ["SPX", "MXCA", "UKX", "FTSEMIB", "SHSZ300", "NKY"],
    ["CHFUSD", "CADUSD", "GBPUSD", "EURUSD", "CNYUSD", "JPYUSD"],
    ["GC1", "HG1", "CL1", "NG1", "S1", "C1"],
    ["USGG10YR", "GCAN10YR", "GUKG10", "GBTPGR10", "GCNY10YR", "GJGB10"],
];

/// Signal source name selecting the common market factor.
pub const MARKET_SOURCE: &str = "market";

const DAILY_VOL: [f64; 4] = [0.012, 0.006, 0.018, 0.015];
const START_PRICE: [f64; 4] = [1000.0, 1.0, 50.0, 3.0];
const MARKET_LOADING: f64 = 0.4;
const CLASS_LOADING: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub days: usize,
    /// Instruments per asset class (at most 6).
    pub components: usize,
    /// In `[0, 1]`; 0 leaves the target unpredictable.
    pub signal_strength: f64,
    pub signal_source: String,
    pub target: String,
    pub start: NaiveDate,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            days: 3300,
            components: 6,
            signal_strength: 0.0,
            signal_source: "SPX".into(),
            target: "JPYUSD".into(),
            start: NaiveDate::from_ymd_opt(2006, 5, 1).expect("valid date"),
            seed: 0,
        }
    }
}

fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Generates a panel deterministically from `config.seed`.
pub fn synth_panel(config: &SynthConfig) -> Result<AssetPanel, FeatureError> {
    let bad = |m: String| Err(FeatureError::InvalidConfig(m));
    if config.components == 0 || config.components > 6 {
        return bad(format!("components must be 1..=6, got {}", config.components));
    }
    if !(0.0..=1.0).contains(&config.signal_strength) {
        return bad(format!("signal strength {} outside [0, 1]", config.signal_strength));
    }
    if config.days < 2 {
        return bad("at least two days are required".into());
    }
    let k = config.components;
    let symbols: Vec<(AssetClass, usize, &str)> = AssetClass::ALL
        .iter()
        .flat_map(|&c| (0..k).map(move |s| (c, s + 1, SYMBOLS[c.index()][s])))
        .collect();
    let find = |sym: &str| symbols.iter().position(|(_, _, s)| *s == sym);
    let target = match find(&config.target) {
        Some(i) => i,
        None => return bad(format!("target {} not in a {k}-component panel", config.target)),
    };
    let source = if config.signal_source == MARKET_SOURCE {
        None
    } else {
        match find(&config.signal_source) {
            Some(i) if i != target => Some(i),
            Some(_) => return bad("signal source must differ from the target".into()),
            None => return bad(format!("signal source {} not in the panel", config.signal_source)),
        }
    };

    let mut rng = rng::stream(config.seed, "synth");
    let mut normal = move || -> f64 { rng.sample(StandardNormal) };
    let idio = (1.0 - MARKET_LOADING.powi(2) - CLASS_LOADING.powi(2)).sqrt();
    let s = config.signal_strength;
    let noise_weight = (1.0 - s * s).sqrt();

    let n_inst = symbols.len();
    let mut prices: Vec<f64> = symbols.iter().map(|(c, _, _)| START_PRICE[c.index()]).collect();
    let mut prev_z = vec![0.0; n_inst];
    let mut prev_market = 0.0;
    let mut bars: Vec<Vec<Bar>> = vec![Vec::with_capacity(config.days); n_inst];

    for day in 0..config.days {
        let mut z = vec![0.0; n_inst];
        let mut market = 0.0;
        if day > 0 {
            market = normal();
            let class: Vec<f64> = (0..4).map(|_| normal()).collect();
            for (i, (c, _, _)) in symbols.iter().enumerate() {
                z[i] = MARKET_LOADING * market + CLASS_LOADING * class[c.index()] + idio * normal();
            }
            let lagged = source.map_or(prev_market, |i| prev_z[i]);
            z[target] = s * lagged + noise_weight * z[target];
        }
        for (i, (c, _, _)) in symbols.iter().enumerate() {
            let vol = DAILY_VOL[c.index()];
            prices[i] *= (vol * z[i]).exp();
            let p = prices[i];
            let high = p * (0.5 * vol * normal().abs()).exp();
            let low = p * (-0.5 * vol * normal().abs()).exp();
            let volume = match c {
                AssetClass::Equities | AssetClass::Commodities => (13.8 + 0.3 * normal()).exp().round(),
                _ => 0.0,
            };
            let open_interest = match c {
                AssetClass::Commodities => (12.0 + 0.2 * normal()).exp().round(),
                _ => 0.0,
            };
            bars[i].push(Bar {
                close: p,
                high,
                low,
                volume,
                open_interest,
            });
        }
        prev_z = z;
        prev_market = market;
    }

    let instruments = symbols
        .iter()
        .zip(bars)
        .map(|(&(asset_class, class_slot, symbol), bars)| Instrument {
            symbol: symbol.to_string(),
            asset_class,
            class_slot,
            bars,
        })
        .collect();
    AssetPanel::new(business_days(config.start, config.days), instruments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{label_for, FLAT_BAND};
    use crate::neural::Label;

    #[test]
    fn deterministic_per_seed() {
        let cfg = SynthConfig {
            days: 50,
            seed: 11,
            ..SynthConfig::default()
        };
        assert_eq!(synth_panel(&cfg).unwrap(), synth_panel(&cfg).unwrap());
        let other = SynthConfig { seed: 12, ..cfg.clone() };
        assert_ne!(synth_panel(&cfg).unwrap(), synth_panel(&other).unwrap());
    }

    #[test]
    fn layout_matches_table() {
        let p = synth_panel(&SynthConfig {
            days: 30,
            ..SynthConfig::default()
        })
        .unwrap();
        assert_eq!(p.instruments().len(), 24);
        for c in AssetClass::ALL {
            assert_eq!(p.instruments().iter().filter(|i| i.asset_class == c).count(), 6);
        }
        assert_eq!(p.instrument("JPYUSD").unwrap().class_slot, 6);
        assert!(p.dates().iter().all(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)));
    }

    #[test]
    fn rejects_bad_config() {
        let base = SynthConfig::default();
        for cfg in [
            SynthConfig { components: 7, ..base.clone() },
            SynthConfig { signal_strength: 1.5, ..base.clone() },
            SynthConfig { components: 3, ..base.clone() },
            SynthConfig { signal_source: "JPYUSD".into(), ..base.clone() },
        ] {
            assert!(matches!(synth_panel(&cfg), Err(FeatureError::InvalidConfig(_))));
        }
    }

    fn target_labels(cfg: &SynthConfig) -> (Vec<Label>, Vec<f64>) {
        let p = synth_panel(cfg).unwrap();
        let c = p.instrument(&cfg.target).unwrap().closes();
        let s = p.instrument(&cfg.signal_source).unwrap().closes();
        let labels = (1..c.len() - 1).map(|t| label_for(c[t + 1].ln() - c[t].ln())).collect();
        let src = (1..c.len() - 1).map(|t| s[t].ln() - s[t - 1].ln()).collect();
        (labels, src)
    }

    #[test]
    fn no_signal_matches_label_priors() {
        let cfg = SynthConfig {
            days: 4000,
            seed: 3,
            ..SynthConfig::default()
        };
        let (labels, _) = target_labels(&cfg);
        let n = labels.len() as f64;
        let sigma = DAILY_VOL[AssetClass::Currencies.index()];
        let p_flat = statrs::function::erf::erf(FLAT_BAND / (sigma * 2f64.sqrt()));
        let priors = [(1.0 - p_flat) / 2.0, p_flat, (1.0 - p_flat) / 2.0];
        for (class, prior) in [Label::Up, Label::Flat, Label::Down].into_iter().zip(priors) {
            let freq = labels.iter().filter(|&&l| l == class).count() as f64 / n;
            let band = 3.0 * (prior * (1.0 - prior) / n).sqrt();
            assert!((freq - prior).abs() <= band, "{class:?}: {freq} vs {prior} ± {band}");
        }
    }

    #[test]
    fn full_signal_is_predictable_from_source() {
        let cfg = SynthConfig {
            days: 2000,
            signal_strength: 1.0,
            seed: 4,
            ..SynthConfig::default()
        };
        let (labels, src) = target_labels(&cfg);
        let hits = labels
            .iter()
            .zip(&src)
            .filter(|(l, r)| **l == if **r > 0.0 { Label::Up } else { Label::Down })
            .count();
        let acc = hits as f64 / labels.len() as f64;
        assert!(acc > 0.9, "{acc}");
    }
}
