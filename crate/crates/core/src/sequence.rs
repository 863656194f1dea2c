//! Strictly decreasing positive null sequences `a_1 > a_2 > … > 0`.
//!
//! Terms are carried in log space (`ln a_m`) because several families leave
//! the range of `f64` long before interesting horizons; ratios
//! `ρ_m = a_m / a_{m+1}` have closed forms per family.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Largest block index accepted by the polynomially-bounded non-SSP family.
pub const PB_I_MAX_CAP: u32 = 6;
/// First block of that family; see [`SequenceRule::PbNotSsp`].
pub const PB_FIRST_BLOCK: u32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceRule {
    None,
    /// `1/m`
    Harmonic,
    /// `ln((m+1)/m)`
    LogRatio,
    /// `m^{-√m}`
    PowerSqrt,
    /// `q^m`
    Geometric { q: f64 },
    /// Blocks `[m_i, m_{i+1})` with `m_i = i^i`, `i = 3..=i_max`: `a_{m_i} = 1/m_i²`,
    /// `a_{m_{i+1}-1} = 1/(m_i² + m_i)`, geometric in between; `m^{-3/2}`
    /// below `m_3`, and the sequence ends at `a_{m_{i_max+1}} = 1/m_{i_max+1}²`.
    PbNotSsp { i_max: u32 },
    Sum(Box<SequenceGerm>, Box<SequenceGerm>),
    Product(Box<SequenceGerm>, Box<SequenceGerm>),
}

/// A finite prefix followed by a generator rule; index `m` starts at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceGerm {
    prefix: Vec<f64>,
    rule: SequenceRule,
}

fn block_start(i: u32) -> u64 {
    (i as u64).pow(i)
}

fn ln_add_exp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

impl SequenceGerm {
    pub fn new(prefix: Vec<f64>, rule: SequenceRule) -> Result<Self> {
        for (i, v) in prefix.iter().enumerate() {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::NonMonotone(i + 1));
            }
            if i > 0 && !(prefix[i - 1] > *v) {
                return Err(Error::NonMonotone(i));
            }
        }
        match &rule {
            SequenceRule::Geometric { q } if !(*q > 0.0 && *q < 1.0) => {
                return Err(Error::InvalidParameter(format!("geometric ratio must lie in (0,1), got {q}")));
            }
            SequenceRule::PbNotSsp { i_max } if !(PB_FIRST_BLOCK..=PB_I_MAX_CAP).contains(i_max) => {
                return Err(Error::InvalidParameter(format!(
                    "i_max must lie in {PB_FIRST_BLOCK}..={PB_I_MAX_CAP}, got {i_max}"
                )));
            }
            SequenceRule::None if prefix.is_empty() => return Err(Error::Empty("sequence")),
            _ => {}
        }
        let s = SequenceGerm { prefix, rule };
        // The seam between prefix and rule must keep decreasing.
        let n = s.prefix.len() as u64;
        if n > 0 && n < s.max_index() && !(s.ln_term(n)? > s.ln_term(n + 1)?) {
            return Err(Error::NonMonotone(n as usize));
        }
        Ok(s)
    }

    pub fn from_rule(rule: SequenceRule) -> Result<Self> {
        SequenceGerm::new(Vec::new(), rule)
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn rule(&self) -> &SequenceRule {
        &self.rule
    }

    /// Largest index at which the sequence is defined.
    pub fn max_index(&self) -> u64 {
        match &self.rule {
            SequenceRule::None => self.prefix.len() as u64,
            SequenceRule::PbNotSsp { i_max } => block_start(i_max + 1),
            SequenceRule::Sum(a, b) | SequenceRule::Product(a, b) => a.max_index().min(b.max_index()),
            _ => u64::MAX,
        }
    }

    fn check(&self, m: u64) -> Result<()> {
        if m == 0 {
            return Err(Error::InvalidParameter("sequence indices start at 1".into()));
        }
        if m > self.max_index() {
            return Err(Error::SequenceExhausted(self.max_index() as usize));
        }
        Ok(())
    }

    /// `ln a_m`.
    pub fn ln_term(&self, m: u64) -> Result<f64> {
        self.check(m)?;
        if let Some(v) = self.prefix.get(m as usize - 1) {
            return Ok(v.ln());
        }
        let x = m as f64;
        Ok(match &self.rule {
            SequenceRule::None => unreachable!("checked against max_index"),
            SequenceRule::Harmonic => -x.ln(),
            SequenceRule::LogRatio => (1.0 / x).ln_1p().ln(),
            SequenceRule::PowerSqrt => -x.sqrt() * x.ln(),
            SequenceRule::Geometric { q } => x * q.ln(),
            SequenceRule::PbNotSsp { i_max } => pb_ln_term(*i_max, m),
            SequenceRule::Sum(a, b) => ln_add_exp(a.ln_term(m)?, b.ln_term(m)?),
            SequenceRule::Product(a, b) => a.ln_term(m)? + b.ln_term(m)?,
        })
    }

    /// `a_m`; may underflow to 0 for fast families, use [`Self::ln_term`] there.
    pub fn term(&self, m: u64) -> Result<f64> {
        self.check(m)?;
        if let Some(v) = self.prefix.get(m as usize - 1) {
            return Ok(*v);
        }
        let x = m as f64;
        Ok(match &self.rule {
            SequenceRule::Harmonic => 1.0 / x,
            SequenceRule::LogRatio => (1.0 / x).ln_1p(),
            SequenceRule::Geometric { q } => q.powf(x),
            SequenceRule::Sum(a, b) => a.term(m)? + b.term(m)?,
            SequenceRule::Product(a, b) => a.term(m)? * b.term(m)?,
            _ => self.ln_term(m)?.exp(),
        })
    }

    /// `ρ_m = a_m / a_{m+1}`.
    pub fn ratio(&self, m: u64) -> Result<f64> {
        self.check(m + 1)?;
        let n = self.prefix.len() as u64;
        if m <= n {
            return Ok((self.ln_term(m)? - self.ln_term(m + 1)?).exp());
        }
        let x = m as f64;
        Ok(match &self.rule {
            SequenceRule::None => unreachable!("checked against max_index"),
            SequenceRule::Harmonic => (x + 1.0) / x,
            SequenceRule::LogRatio => (1.0 / x).ln_1p() / (1.0 / (x + 1.0)).ln_1p(),
            SequenceRule::PowerSqrt => {
                let y = x + 1.0;
                (y.sqrt() * y.ln() - x.sqrt() * x.ln()).exp()
            }
            SequenceRule::Geometric { q } => 1.0 / q,
            SequenceRule::PbNotSsp { i_max } => (pb_ln_term(*i_max, m) - pb_ln_term(*i_max, m + 1)).exp(),
            SequenceRule::Sum(a, b) => {
                // (a_m + b_m)/(a_{m+1} + b_{m+1}) as a convex combination.
                let w = 1.0 / (1.0 + (b.ln_term(m + 1)? - a.ln_term(m + 1)?).exp());
                w * a.ratio(m)? + (1.0 - w) * b.ratio(m)?
            }
            SequenceRule::Product(a, b) => a.ratio(m)? * b.ratio(m)?,
        })
    }

    /// Verifies `ρ_m > 1` for `m < horizon`.
    pub fn check_monotone(&self, horizon: u64) -> Result<()> {
        for m in 1..horizon {
            let r = self.ratio(m)?;
            if !(r > 1.0 && r.is_finite()) {
                return Err(Error::NonMonotone(m as usize));
            }
        }
        Ok(())
    }
}

fn pb_ln_term(i_max: u32, m: u64) -> f64 {
    let first = block_start(PB_FIRST_BLOCK);
    let x = m as f64;
    if m < first {
        return -1.5 * x.ln();
    }
    if m == block_start(i_max + 1) {
        return -2.0 * x.ln();
    }
    let mut i = PB_FIRST_BLOCK;
    while block_start(i + 1) <= m {
        i += 1;
    }
    let mi = block_start(i);
    let len = block_start(i + 1) - mi;
    let mf = mi as f64;
    let frac = (m - mi) as f64 / (len - 1) as f64;
    -2.0 * mf.ln() - frac * (1.0 / mf).ln_1p()
}

/// Termwise sum; rules are combined so the result stays generative.
pub fn seq_sum(a: &SequenceGerm, b: &SequenceGerm) -> Result<SequenceGerm> {
    combine(a, b, true)
}

/// Termwise product.
pub fn seq_product(a: &SequenceGerm, b: &SequenceGerm) -> Result<SequenceGerm> {
    combine(a, b, false)
}

fn combine(a: &SequenceGerm, b: &SequenceGerm, sum: bool) -> Result<SequenceGerm> {
    if a.rule == SequenceRule::None && b.rule == SequenceRule::None && a.prefix.len() != b.prefix.len() {
        return Err(Error::InvalidParameter(format!(
            "horizon mismatch without rules: {} vs {}",
            a.prefix.len(),
            b.prefix.len()
        )));
    }
    let (a, b) = (Box::new(a.clone()), Box::new(b.clone()));
    SequenceGerm::from_rule(if sum { SequenceRule::Sum(a, b) } else { SequenceRule::Product(a, b) })
}

// ---- wire format: {"prefix":[...],"rule":{"name":..,"params":{..}}} ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceRepr {
    #[serde(default)]
    prefix: Vec<f64>,
    rule: RuleRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleRepr {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometricParams {
    q: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PbParams {
    i_max: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairParams {
    a: SequenceGerm,
    b: SequenceGerm,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

fn rule_params<T: serde::de::DeserializeOwned>(name: &str, p: Option<Value>) -> Result<T> {
    let p = p.unwrap_or_else(|| Value::Object(Default::default()));
    serde_json::from_value(p).map_err(|e| Error::InvalidParameter(format!("params of rule '{name}': {e}")))
}

impl TryFrom<SequenceRepr> for SequenceGerm {
    type Error = Error;

    fn try_from(r: SequenceRepr) -> Result<Self> {
        let name = r.rule.name.as_str();
        let p = r.rule.params;
        let rule = match name {
            "none" | "harmonic" | "log_ratio" | "power_sqrt" => {
                rule_params::<NoParams>(name, p)?;
                match name {
                    "none" => SequenceRule::None,
                    "harmonic" => SequenceRule::Harmonic,
                    "log_ratio" => SequenceRule::LogRatio,
                    _ => SequenceRule::PowerSqrt,
                }
            }
            "geometric" => SequenceRule::Geometric { q: rule_params::<GeometricParams>(name, p)?.q },
            "pb_not_ssp" => SequenceRule::PbNotSsp { i_max: rule_params::<PbParams>(name, p)?.i_max },
            "sum" | "product" => {
                let PairParams { a, b } = rule_params(name, p)?;
                if name == "sum" {
                    SequenceRule::Sum(Box::new(a), Box::new(b))
                } else {
                    SequenceRule::Product(Box::new(a), Box::new(b))
                }
            }
            other => return Err(Error::InvalidParameter(format!("unknown sequence rule '{other}'"))),
        };
        SequenceGerm::new(r.prefix, rule)
    }
}

impl From<&SequenceGerm> for SequenceRepr {
    fn from(s: &SequenceGerm) -> Self {
        let (name, params) = match &s.rule {
            SequenceRule::None => ("none", None),
            SequenceRule::Harmonic => ("harmonic", None),
            SequenceRule::LogRatio => ("log_ratio", None),
            SequenceRule::PowerSqrt => ("power_sqrt", None),
            SequenceRule::Geometric { q } => ("geometric", val(&GeometricParams { q: *q })),
            SequenceRule::PbNotSsp { i_max } => ("pb_not_ssp", val(&PbParams { i_max: *i_max })),
            SequenceRule::Sum(a, b) => ("sum", val(&PairParams { a: (**a).clone(), b: (**b).clone() })),
            SequenceRule::Product(a, b) => ("product", val(&PairParams { a: (**a).clone(), b: (**b).clone() })),
        };
        SequenceRepr { prefix: s.prefix.clone(), rule: RuleRepr { name: name.to_string(), params } }
    }
}

fn val<T: Serialize>(v: &T) -> Option<Value> {
    Some(serde_json::to_value(v).expect("sequence params serialize"))
}

impl Serialize for SequenceGerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SequenceRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SequenceGerm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SequenceRepr::deserialize(d)?;
        SequenceGerm::try_from(r).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(rule: SequenceRule) -> SequenceGerm {
        SequenceGerm::from_rule(rule).unwrap()
    }

    #[test]
    fn family_values() {
        assert_eq!(fam(SequenceRule::Harmonic).term(4).unwrap(), 0.25);
        assert!((fam(SequenceRule::LogRatio).term(1).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((fam(SequenceRule::PowerSqrt).term(4).unwrap() - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn pb_boundary_ratio() {
        let s = fam(SequenceRule::PbNotSsp { i_max: 5 });
        let r = s.ratio(255).unwrap();
        assert!((r - 65536.0 / 756.0).abs() < 1e-9 * r);
        assert_eq!(s.max_index(), 46656);
        assert!(s.ratio(46656).is_err());
        s.check_monotone(46656).unwrap();
    }

    #[test]
    fn pb_sandwich() {
        let s = fam(SequenceRule::PbNotSsp { i_max: 4 });
        for m in 2..=s.max_index() {
            let la = s.ln_term(m).unwrap();
            let lm = (m as f64).ln();
            assert!(la >= -2.0 * lm - 1e-12, "lower bound at {m}");
            assert!(la < -lm, "upper bound at {m}");
        }
    }

    #[test]
    fn prefix_then_rule() {
        let s = SequenceGerm::new(vec![2.0, 1.0], SequenceRule::Harmonic).unwrap();
        assert_eq!(s.term(2).unwrap(), 1.0);
        assert_eq!(s.term(3).unwrap(), 1.0 / 3.0);
        assert!(SequenceGerm::new(vec![0.1], SequenceRule::Harmonic).is_err());
        assert!(SequenceGerm::new(vec![1.0, 1.0], SequenceRule::None).is_err());
        assert!(SequenceGerm::new(vec![1.0, -1.0], SequenceRule::None).is_err());
    }

    #[test]
    fn sum_and_product_terms() {
        let h = fam(SequenceRule::Harmonic);
        let s = seq_sum(&h, &h).unwrap();
        assert_eq!(s.term(5).unwrap(), 0.4);
        let p = seq_product(&h, &h).unwrap();
        assert_eq!(p.term(4).unwrap(), 1.0 / 16.0);
        let a = SequenceGerm::new(vec![1.0, 0.5], SequenceRule::None).unwrap();
        let b = SequenceGerm::new(vec![1.0], SequenceRule::None).unwrap();
        assert!(seq_sum(&a, &b).is_err());
    }

    #[test]
    fn json_round_trip() {
        let src = r#"{"prefix":[],"rule":{"name":"sum","params":{"a":{"prefix":[],"rule":{"name":"harmonic"}},"b":{"prefix":[],"rule":{"name":"geometric","params":{"q":0.5}}}}}}"#;
        let s: SequenceGerm = serde_json::from_str(src).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), src);
        assert!(serde_json::from_str::<SequenceGerm>(r#"{"prefix":[],"rule":{"name":"harmonic"},"x":0}"#).is_err());
        assert!(serde_json::from_str::<SequenceGerm>(r#"{"prefix":[],"rule":{"name":"geometric","params":{"q":2}}}"#).is_err());
        assert!(serde_json::from_str::<SequenceGerm>(r#"{"prefix":[],"rule":{"name":"harmonic","params":{"k":1}}}"#).is_err());
    }
}
