use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredictorKind {
    Uniform,
    AdaptiveFreq,
    ContextBackoff,
    CodecInverted,
    Bridge,
}

impl PredictorKind {
    pub fn name(self) -> &'static str {
        match self {
            PredictorKind::Uniform => "uniform",
            PredictorKind::AdaptiveFreq => "adaptive_freq",
            PredictorKind::ContextBackoff => "context_backoff",
            PredictorKind::CodecInverted => "codec_inverted",
            PredictorKind::Bridge => "bridge",
        }
    }

    fn parse(name: &str) -> Option<(Self, Option<(&'static str, &'static str)>)> {
        use PredictorKind::*;
        Some(match name {
            "uniform" => (Uniform, None),
            "adaptive_freq" | "adaptive" => (AdaptiveFreq, None),
            "laplace" => (AdaptiveFreq, Some(("alpha", "1"))),
            "kt" => (AdaptiveFreq, Some(("alpha", "0.5"))),
            "context_backoff" | "backoff" | "ppm" => (ContextBackoff, None),
            "codec_inverted" | "inverted" | "codec" => (CodecInverted, None),
            "bridge" => (Bridge, None),
            _ => return None,
        })
    }

    fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            PredictorKind::Uniform => &[],
            PredictorKind::AdaptiveFreq => &[("alpha", "1")],
            PredictorKind::ContextBackoff => &[("max_order", "3"), ("adapt", "true")],
            PredictorKind::CodecInverted => &[("codec", "gzip")],
            PredictorKind::Bridge => &[("top_k", "100"), ("timeout", "30")],
        }
    }

    fn allowed(self) -> &'static [&'static str] {
        match self {
            PredictorKind::Uniform => &[],
            PredictorKind::AdaptiveFreq => &["alpha"],
            PredictorKind::ContextBackoff => &["max_order", "adapt", "trie"],
            PredictorKind::CodecInverted => &["codec"],
            PredictorKind::Bridge => &["cmd", "top_k", "timeout"],
        }
    }
}

/// Keys every kind accepts.
const COMMON_KEYS: &[&str] = &["alphabet", SEVEN_BIT_KEY];

/// Marks containers whose input went through the 7-bit transform.
pub const SEVEN_BIT_KEY: &str = "seven_bit";

pub const DEFAULT_ALPHABET: usize = 256;

/// Serializable identity and configuration of a predictor.
///
/// The canonical text form is `kind:key=value,...` with every parameter
/// (defaults included) listed in key order, e.g.
/// `context_backoff:adapt=true,alphabet=256,max_order=3`. Values escape
/// `%`, `,`, `=`, `:` and whitespace as `%XX`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PredictorSpec {
    pub kind: PredictorKind,
    pub alphabet_size: usize,
    params: BTreeMap<String, String>,
}

impl PredictorSpec {
    pub fn new(kind: PredictorKind) -> Self {
        let params = kind
            .defaults()
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        PredictorSpec {
            kind,
            alphabet_size: DEFAULT_ALPHABET,
            params,
        }
    }

    pub fn uniform() -> Self {
        Self::new(PredictorKind::Uniform)
    }

    pub fn adaptive(alpha: f64) -> Self {
        Self::new(PredictorKind::AdaptiveFreq).with("alpha", alpha)
    }

    pub fn backoff(max_order: usize) -> Self {
        Self::new(PredictorKind::ContextBackoff).with("max_order", max_order)
    }

    pub fn codec_inverted(codec: &str) -> Self {
        Self::new(PredictorKind::CodecInverted).with("codec", codec)
    }

    pub fn bridge(cmd: &str) -> Self {
        Self::new(PredictorKind::Bridge).with("cmd", cmd)
    }

    pub fn with_alphabet(mut self, alphabet_size: usize) -> Self {
        self.alphabet_size = alphabet_size;
        self
    }

    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn without(mut self, key: &str) -> Self {
        self.params.remove(key);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn params(&self) -> impl Iterator<Item = (&str, &str)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::InvalidSpec(format!("{} requires `{key}`", self.kind.name())))
    }

    pub fn get_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::InvalidSpec(format!("bad value for `{key}`: {v}")))
            })
            .transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get_parsed(key)?.unwrap_or(default))
    }

    pub fn canonical(&self) -> String {
        self.to_string()
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=65536).contains(&self.alphabet_size) {
            return Err(Error::InvalidSpec(format!(
                "alphabet size {} outside 2..=65536",
                self.alphabet_size
            )));
        }
        for key in self.params.keys() {
            if !self.kind.allowed().contains(&key.as_str()) && !COMMON_KEYS.contains(&key.as_str()) {
                return Err(Error::InvalidSpec(format!(
                    "`{key}` is not a parameter of {}",
                    self.kind.name()
                )));
            }
        }
        match self.kind {
            PredictorKind::AdaptiveFreq => {
                let alpha: f64 = self.parsed_or("alpha", 1.0)?;
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidSpec(format!("alpha must be positive, got {alpha}")));
                }
            }
            PredictorKind::ContextBackoff => {
                let order: usize = self.parsed_or("max_order", 3)?;
                if order > 16 {
                    return Err(Error::InvalidSpec(format!("max_order {order} too large")));
                }
                let _: bool = self.parsed_or("adapt", true)?;
            }
            PredictorKind::CodecInverted if self.alphabet_size != 256 => {
                return Err(Error::InvalidSpec(
                    "codec_inverted predicts bytes; alphabet must be 256".into(),
                ));
            }
            PredictorKind::Bridge => {
                self.require("cmd")?;
                let _: usize = self.parsed_or("top_k", 100)?;
                let _: f64 = self.parsed_or("timeout", 30.0)?;
                if self.alphabet_size > 256 {
                    return Err(Error::InvalidSpec(
                        "bridge protocol v1 carries byte contexts; alphabet must be <= 256".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for PredictorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut all: BTreeMap<&str, String> = self
            .params
            .iter()
            .map(|(k, v)| (k.as_str(), escape(v)))
            .collect();
        all.insert("alphabet", self.alphabet_size.to_string());
        write!(f, "{}:", self.kind.name())?;
        for (i, (k, v)) in all.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for PredictorSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (kind_name, rest) = match text.split_once(':') {
            Some((k, r)) => (k.trim(), Some(r)),
            None => (text.trim(), None),
        };
        let (kind, preset) = PredictorKind::parse(kind_name)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown predictor kind `{kind_name}`")))?;
        let mut spec = PredictorSpec::new(kind);
        if let Some((k, v)) = preset {
            spec = spec.with(k, v);
        }
        for pair in rest.into_iter().flat_map(|r| r.split(',')).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("expected key=value, got `{pair}`")))?;
            let key = match key.trim() {
                "order" => "max_order",
                "k" => "top_k",
                other => other,
            };
            let value = unescape(value.trim())?;
            if key == "alphabet" {
                spec.alphabet_size = value
                    .parse()
                    .map_err(|_| Error::InvalidSpec(format!("bad alphabet `{value}`")))?;
            } else {
                spec.params.insert(key.to_string(), value);
            }
        }
        if let Some(alpha) = spec.get_parsed::<f64>("alpha")? {
            spec = spec.with("alpha", alpha);
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        if matches!(c, '%' | ',' | '=' | ':') || c.is_whitespace() || c.is_control() {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn unescape(value: &str) -> Result<String> {
    let bytes = value.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = value
                .get(i + 1..i + 3)
                .ok_or_else(|| Error::InvalidSpec(format!("truncated escape in `{value}`")))?;
            let b = u8::from_str_radix(hex, 16)
                .map_err(|_| Error::InvalidSpec(format!("bad escape in `{value}`")))?;
            out.push(b);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).map_err(|_| Error::InvalidSpec("escaped value is not UTF-8".into()))
}
