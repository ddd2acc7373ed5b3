use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How codes are chosen given fixed dictionaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignOrder {
    /// One dictionary at a time, on the residual of the others.
    One,
    /// Consecutive dictionary pairs `(c, c+1 mod C)` jointly.
    Two,
    /// Every one of the `K^C` combinations. Small instances only.
    Exhaustive,
}

impl fmt::Display for AssignOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssignOrder::One => "1",
            AssignOrder::Two => "2",
            AssignOrder::Exhaustive => "exhaustive",
        })
    }
}

impl FromStr for AssignOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "one" | "o1" => Ok(AssignOrder::One),
            "2" | "two" | "o2" => Ok(AssignOrder::Two),
            "exhaustive" | "full" => Ok(AssignOrder::Exhaustive),
            other => Err(Error::Config(format!("unknown assignment order `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitScheme {
    Random,
    KMeans,
    Hierarchical,
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitScheme::Random => "random",
            InitScheme::KMeans => "kmeans",
            InitScheme::Hierarchical => "hier",
        })
    }
}

impl FromStr for InitScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(InitScheme::Random),
            "kmeans" => Ok(InitScheme::KMeans),
            "hier" | "hierarchical" => Ok(InitScheme::Hierarchical),
            other => Err(Error::Config(format!("unknown init scheme `{other}`"))),
        }
    }
}

/// Training parameters. Defaults: `K = 256` (one byte per index), at most
/// 100 outer iterations, 30 iterations per initialization sub-run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub num_dicts: usize,
    pub num_words: usize,
    pub order: AssignOrder,
    pub init: InitScheme,
    pub max_outer_iters: usize,
    /// Cap on per-point assignment sweeps per outer iteration.
    pub max_inner_sweeps: usize,
    /// Stop when the relative distortion improves by less than this.
    pub rel_tol: f64,
    /// Ridge weight, relative to the mean diagonal of the co-occurrence matrix.
    pub ridge: f64,
    pub seed: u64,
    pub init_iters: usize,
    /// Scale randomly sampled initial codewords by `1/C`.
    pub scale_random_init: bool,
    /// Move unused codewords onto the worst-reconstructed points after each update.
    pub reseed_empty: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_dicts: 4,
            num_words: 256,
            order: AssignOrder::One,
            init: InitScheme::KMeans,
            max_outer_iters: 100,
            max_inner_sweeps: 10,
            rel_tol: 1e-4,
            ridge: 1e-6,
            seed: 0,
            init_iters: 30,
            scale_random_init: true,
            reseed_empty: false,
        }
    }
}

impl TrainConfig {
    pub fn new(num_dicts: usize, num_words: usize) -> Self {
        Self {
            num_dicts,
            num_words,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_dicts == 0 {
            return Err(Error::Config("number of dictionaries must be >= 1".into()));
        }
        if self.num_words == 0 || self.num_words > crate::CodeMatrix::MAX_WORDS {
            return Err(Error::Config(format!(
                "number of words must be in 1..={}, got {}",
                crate::CodeMatrix::MAX_WORDS,
                self.num_words
            )));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::Config(format!(
                "ridge must be >= 0, got {}",
                self.ridge
            )));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::Config(format!(
                "tolerance must be >= 0, got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }

    /// `key=value` lines, one per field, in a fixed order.
    pub fn to_kv_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        };
        put("num_dicts", self.num_dicts.to_string());
        put("num_words", self.num_words.to_string());
        put("order", self.order.to_string());
        put("init", self.init.to_string());
        put("max_outer_iters", self.max_outer_iters.to_string());
        put("max_inner_sweeps", self.max_inner_sweeps.to_string());
        put("rel_tol", format!("{:?}", self.rel_tol));
        put("ridge", format!("{:?}", self.ridge));
        put("seed", self.seed.to_string());
        put("init_iters", self.init_iters.to_string());
        put("scale_random_init", self.scale_random_init.to_string());
        put("reseed_empty", self.reseed_empty.to_string());
        s
    }

    /// Applies every recognised `key=value` line to a default config.
    /// Unknown keys are ignored so newer files stay readable.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
        }
        let mut cfg = Self::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed config line `{line}`")))?;
            match k {
                "num_dicts" => cfg.num_dicts = parse(k, v)?,
                "num_words" => cfg.num_words = parse(k, v)?,
                "order" => cfg.order = v.parse()?,
                "init" => cfg.init = v.parse()?,
                "max_outer_iters" => cfg.max_outer_iters = parse(k, v)?,
                "max_inner_sweeps" => cfg.max_inner_sweeps = parse(k, v)?,
                "rel_tol" => cfg.rel_tol = parse(k, v)?,
                "ridge" => cfg.ridge = parse(k, v)?,
                "seed" => cfg.seed = parse(k, v)?,
                "init_iters" => cfg.init_iters = parse(k, v)?,
                "scale_random_init" => cfg.scale_random_init = parse(k, v)?,
                "reseed_empty" => cfg.reseed_empty = parse(k, v)?,
                _ => {}
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = TrainConfig::default();
        assert_eq!(c.num_words, 256);
        assert_eq!(c.max_outer_iters, 100);
        assert_eq!(c.init_iters, 30);
        assert_eq!(c.max_inner_sweeps, 10);
        assert_eq!(c.rel_tol, 1e-4);
        assert_eq!(c.ridge, 1e-6);
    }

    #[test]
    fn kv_text_round_trip() {
        let c = TrainConfig {
            num_dicts: 8,
            num_words: 16,
            order: AssignOrder::Two,
            init: InitScheme::Hierarchical,
            rel_tol: 1.0 / 3.0,
            seed: 42,
            ..TrainConfig::default()
        };
        assert_eq!(TrainConfig::from_kv_text(&c.to_kv_text()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(TrainConfig::from_kv_text("num_dicts=abc").is_err());
        assert!(TrainConfig::from_kv_text("no equals sign").is_err());
        assert!("3".parse::<AssignOrder>().is_err());
    }
}
