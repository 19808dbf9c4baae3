//! JSON design files.
//!
//! Coefficients are written as decimal strings with 17 significant digits,
//! which read back to the identical `f64`.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use modfrm::frmcore::{compose_modfrm, MaskingFilter};
use modfrm::ifir::IfirPair;
use modfrm::{
    Case, CostReport, FilterSpec, Fir, InterpolationFactor, ModFrmDesign, ModalConfig, ModalFilter,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub theta: f64,
    pub phi: f64,
    pub m: usize,
    pub l: usize,
    pub case: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRecord {
    pub passband_edge: f64,
    pub stopband_edge: f64,
    pub passband_ripple_db: f64,
    pub stopband_atten_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalRecord {
    pub coefficients: Vec<String>,
    pub edge_offset: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskerRecord {
    pub l_ifir: usize,
    pub prototype: Vec<String>,
    pub image_suppressor: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRecord {
    pub m_modal: usize,
    pub m_ma_pr: usize,
    pub m_ma_is: usize,
    pub m_mc_pr: usize,
    pub m_mc_is: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command_line: String,
    pub created_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub schema_version: u32,
    pub config: ConfigRecord,
    pub spec: SpecRecord,
    pub channel_count: usize,
    pub modal: ModalRecord,
    pub ma: MaskerRecord,
    pub mc: MaskerRecord,
    #[serde(default)]
    pub allocation: Option<Vec<usize>>,
    #[serde(default)]
    pub cost: Option<CostRecord>,
    pub provenance: Provenance,
}

pub fn encode(v: f64) -> String {
    format!("{v:.16e}")
}

fn decode(field: &str, s: &str) -> CliResult<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Schema(format!(
            "{field}: '{s}' is not a finite number"
        ))),
    }
}

fn encode_real(fir: &Fir, field: &str) -> CliResult<Vec<String>> {
    fir.real_coeffs()
        .map(|c| c.into_iter().map(encode).collect())
        .ok_or_else(|| CliError::Schema(format!("{field} must be real")))
}

fn decode_fir(field: &str, values: &[String]) -> CliResult<Fir> {
    if values.is_empty() {
        return Err(CliError::Schema(format!("{field} has no coefficients")));
    }
    let c: Vec<f64> = values
        .iter()
        .map(|s| decode(field, s))
        .collect::<CliResult<_>>()?;
    Fir::from_real(&c).map_err(|e| CliError::Schema(format!("{field}: {e}")))
}

fn masker_record(mask: &MaskingFilter, field: &str) -> CliResult<MaskerRecord> {
    let (pr, is) = mask.parts();
    Ok(MaskerRecord {
        l_ifir: mask.l_ifir(),
        prototype: encode_real(pr, field)?,
        image_suppressor: encode_real(is, field)?,
    })
}

fn masker_from(rec: &MaskerRecord, field: &str) -> CliResult<MaskingFilter> {
    let l = InterpolationFactor::new(rec.l_ifir)
        .map_err(|e| CliError::Schema(format!("{field}: {e}")))?;
    Ok(MaskingFilter::Ifir(IfirPair::from_parts(
        decode_fir(&format!("{field}.prototype"), &rec.prototype)?,
        decode_fir(&format!("{field}.image_suppressor"), &rec.image_suppressor)?,
        l,
    )))
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl DesignFile {
    pub fn from_design(
        design: &ModFrmDesign,
        channel_count: usize,
        allocation: Option<Vec<usize>>,
        cost: &CostReport,
        command_line: String,
    ) -> CliResult<Self> {
        let c = &design.config;
        let s = &design.modal_spec;
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            config: ConfigRecord {
                theta: c.theta,
                phi: c.phi,
                m: c.m,
                l: c.l.get(),
                case: c.case.to_string(),
            },
            spec: SpecRecord {
                passband_edge: s.passband_edge,
                stopband_edge: s.stopband_edge,
                passband_ripple_db: s.passband_ripple_db,
                stopband_atten_db: s.stopband_atten_db,
            },
            channel_count,
            modal: ModalRecord {
                coefficients: encode_real(&design.modal, "modal")?,
                edge_offset: encode(design.edge_offset),
            },
            ma: masker_record(&design.hma, "ma")?,
            mc: masker_record(&design.hmc, "mc")?,
            allocation,
            cost: Some(CostRecord {
                m_modal: cost.m_modal,
                m_ma_pr: cost.m_ma_pr,
                m_ma_is: cost.m_ma_is,
                m_mc_pr: cost.m_mc_pr,
                m_mc_is: cost.m_mc_is,
                total: cost.total,
            }),
            provenance: Provenance {
                command_line,
                created_unix: now_unix(),
            },
        })
    }

    pub fn config(&self) -> CliResult<ModalConfig> {
        let case: Case = self
            .config
            .case
            .parse()
            .map_err(|e| CliError::Schema(format!("config.case: {e}")))?;
        let l = InterpolationFactor::new(self.config.l)
            .map_err(|e| CliError::Schema(format!("config.l: {e}")))?;
        ModalConfig::new(self.config.theta, self.config.phi, self.config.m, l, case)
            .map_err(|e| CliError::Schema(format!("config: {e}")))
    }

    pub fn spec(&self) -> CliResult<FilterSpec> {
        let s = &self.spec;
        FilterSpec::new(
            s.passband_edge,
            s.stopband_edge,
            s.passband_ripple_db,
            s.stopband_atten_db,
        )
        .map_err(|e| CliError::Schema(format!("spec: {e}")))
    }

    /// Rebuilds the composed design from the stored parts.
    pub fn to_design(&self) -> CliResult<ModFrmDesign> {
        let config = self.config()?;
        let modal = ModalFilter {
            fir: decode_fir("modal.coefficients", &self.modal.coefficients)?,
            edge_offset: decode("modal.edge_offset", &self.modal.edge_offset)?,
            spec: self.spec()?,
        };
        let design = compose_modfrm(
            &config,
            &modal,
            masker_from(&self.ma, "ma")?,
            masker_from(&self.mc, "mc")?,
        )
        .map_err(|e| CliError::Schema(format!("cannot compose stored parts: {e}")))?;
        Ok(design)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("design file serializes")
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Schema(format!("not valid JSON: {e}")))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(CliError::Schema(format!("unsupported schema_version {v}"))),
            None => return Err(CliError::Schema("missing schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_atomic(path, self.to_json().as_bytes())
    }
}

/// Writes to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Argument(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}
