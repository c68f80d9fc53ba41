use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eft::TwoSumImpl;
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AddAlgorithm {
    Sloppy,
    #[default]
    Accurate,
    AccurateDirected,
}

impl AddAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            AddAlgorithm::Sloppy => "sloppy",
            AddAlgorithm::Accurate => "accurate",
            AddAlgorithm::AccurateDirected => "accurate-directed",
        }
    }

    pub fn parse(s: &str) -> Result<AddAlgorithm> {
        match s {
            "sloppy" => Ok(AddAlgorithm::Sloppy),
            "accurate" => Ok(AddAlgorithm::Accurate),
            "accurate-directed" => Ok(AddAlgorithm::AccurateDirected),
            _ => Err(Error::Parse(format!("unknown add algorithm {s:?}"))),
        }
    }
}

/// One MAA variant: addition algorithm, which normalizations run, and how
/// exact sums are formed.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "VariantRecord", from = "VariantRecord")]
pub struct VariantConfig {
    pub add_algo: AddAlgorithm,
    pub normalize_mul: bool,
    /// `false` gives pair arithmetic; no error bound is claimed for it.
    pub normalize_add: bool,
    pub include_ll: bool,
    pub two_sum_impl: TwoSumImpl,
}

/// Flat serialized form; column names follow the benchmark table.
#[derive(Serialize, Deserialize)]
struct VariantRecord {
    omit_add_normalization: bool,
    omit_mul_normalization: bool,
    add_algorithm: AddAlgorithm,
    two_sum: TwoSumImpl,
    #[serde(default)]
    include_ll: bool,
}

impl From<VariantConfig> for VariantRecord {
    fn from(c: VariantConfig) -> Self {
        VariantRecord {
            omit_add_normalization: !c.normalize_add,
            omit_mul_normalization: !c.normalize_mul,
            add_algorithm: c.add_algo,
            two_sum: c.two_sum_impl,
            include_ll: c.include_ll,
        }
    }
}

impl From<VariantRecord> for VariantConfig {
    fn from(r: VariantRecord) -> Self {
        VariantConfig {
            add_algo: r.add_algorithm,
            normalize_mul: !r.omit_mul_normalization,
            normalize_add: !r.omit_add_normalization,
            include_ll: r.include_ll,
            two_sum_impl: r.two_sum,
        }
    }
}

impl Default for VariantConfig {
    fn default() -> Self {
        VariantConfig::new(AddAlgorithm::Accurate, true, true, TwoSumImpl::Standard)
    }
}

impl VariantConfig {
    pub fn new(add_algo: AddAlgorithm, normalize_mul: bool, normalize_add: bool, two_sum_impl: TwoSumImpl) -> Self {
        VariantConfig { add_algo, normalize_mul, normalize_add, include_ll: false, two_sum_impl }
    }

    /// The twelve double-word rows of the GEMM table, in table order.
    pub fn table1_rows() -> Vec<VariantConfig> {
        use AddAlgorithm::{Accurate, Sloppy};
        let mut rows = Vec::with_capacity(12);
        for ts in [TwoSumImpl::Standard, TwoSumImpl::MagnitudeSelect] {
            for (nm, algo) in [(true, Accurate), (true, Sloppy), (false, Accurate), (false, Sloppy)] {
                rows.push(VariantConfig::new(algo, nm, true, ts));
            }
        }
        for ts in [TwoSumImpl::Standard, TwoSumImpl::MagnitudeSelect] {
            for algo in [Accurate, Sloppy] {
                rows.push(VariantConfig::new(algo, false, false, ts));
            }
        }
        rows
    }

    /// The four rows of the error table: (omit mul normalization, sloppy add).
    pub fn table2_rows() -> Vec<VariantConfig> {
        use AddAlgorithm::{Accurate, Sloppy};
        [(true, Accurate), (true, Sloppy), (false, Accurate), (false, Sloppy)]
            .into_iter()
            .map(|(nm, algo)| VariantConfig::new(algo, nm, true, TwoSumImpl::Standard))
            .collect()
    }

    /// Error-table row label such as `"no yes"`.
    pub fn table2_label(&self) -> String {
        format!("{} {}", yes_no(!self.normalize_mul), yes_no(self.add_algo == AddAlgorithm::Sloppy))
    }

    /// Selects an error-table row from its label (`"no-no"`, `"yes yes"`, ...).
    pub fn from_table2_label(label: &str) -> Result<VariantConfig> {
        let norm: String = label.split(|c: char| c == '-' || c == '_' || c.is_whitespace()).collect::<Vec<_>>().join(" ");
        VariantConfig::table2_rows()
            .into_iter()
            .find(|c| c.table2_label() == norm)
            .ok_or_else(|| Error::Parse(format!("unknown row {label:?}; expected one of no-no, no-yes, yes-no, yes-yes")))
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn parse_bool(k: &str, v: &str) -> Result<bool> {
    match v {
        "yes" | "true" | "1" => Ok(true),
        "no" | "false" | "0" => Ok(false),
        _ => Err(Error::Parse(format!("{k}: expected yes/no, got {v:?}"))),
    }
}

impl fmt::Display for VariantConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "omit_add_normalization={} omit_mul_normalization={} add_algorithm={} two_sum={}",
            yes_no(!self.normalize_add),
            yes_no(!self.normalize_mul),
            self.add_algo.name(),
            self.two_sum_impl.name()
        )?;
        if self.include_ll {
            write!(f, " include_ll=yes")?;
        }
        Ok(())
    }
}

/// Accepts `key=value` pairs separated by spaces or commas; omitted keys
/// keep their defaults.
impl FromStr for VariantConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<VariantConfig> {
        let mut c = VariantConfig::default();
        for item in s.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|t| !t.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got {item:?}")))?;
            match k {
                "omit_add_normalization" => c.normalize_add = !parse_bool(k, v)?,
                "omit_mul_normalization" => c.normalize_mul = !parse_bool(k, v)?,
                "add_algorithm" | "add" => c.add_algo = AddAlgorithm::parse(v)?,
                "sloppy_add" => {
                    c.add_algo = if parse_bool(k, v)? { AddAlgorithm::Sloppy } else { AddAlgorithm::Accurate }
                }
                "two_sum" => {
                    c.two_sum_impl = match v {
                        "standard" => TwoSumImpl::Standard,
                        "magnitude-select" | "magsel" => TwoSumImpl::MagnitudeSelect,
                        _ => return Err(Error::Parse(format!("two_sum: unknown value {v:?}"))),
                    }
                }
                "include_ll" => c.include_ll = parse_bool(k, v)?,
                _ => return Err(Error::Parse(format!("unknown key {k:?}"))),
            }
        }
        Ok(c)
    }
}
