//! Command implementations, independent of argument parsing.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use modfrm::bank::{build_uniform_bank, channel_count_formula, merge_channels};
use modfrm::firdesign::freq_response_uniform;
use modfrm::frmcore::{design_modal_for, masking_edges, synthesize_with_modal, ModFrmDesign};
use modfrm::{
    total_cost, Case, CostReport, FilterSpec, Fir, InterpolationFactor, ModalConfig,
    SynthesisOptions,
};
use serde::Serialize;

use crate::channelize::{channelize, encode_raw, measure, read_raw, synth_tones, SnrReport};
use crate::designfile::{write_atomic, DesignFile};
use crate::error::{CliError, CliResult};
use crate::presets::{self, PRESETS};

/// Targets shared by the modal and masking filters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Targets {
    pub theta: f64,
    pub phi: f64,
    pub ripple_db: f64,
    pub atten_db: f64,
}

impl Targets {
    pub fn spec(&self) -> CliResult<FilterSpec> {
        Ok(FilterSpec::new(
            self.theta,
            self.phi,
            self.ripple_db,
            self.atten_db,
        )?)
    }
}

fn config(t: &Targets, m: usize, l: usize, case: Case) -> CliResult<ModalConfig> {
    Ok(ModalConfig::new(
        t.theta,
        t.phi,
        m,
        InterpolationFactor::new(l)?,
        case,
    )?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignArgs {
    pub targets: Targets,
    pub m: usize,
    pub l: usize,
    pub case: Case,
    pub allocation: Option<Vec<usize>>,
    pub output: PathBuf,
    pub command_line: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignSummary {
    pub output: String,
    pub channels: usize,
    pub l_ifir_ma: usize,
    pub l_ifir_mc: usize,
    pub cost: String,
    pub total_multipliers: usize,
    /// More channels than `ceil(1 / f_s)` for the overall stopband edge.
    pub exceeds_max_channels: bool,
}

/// Full pipeline: modal, maskers, composition, bank; writes the design file.
pub fn cmd_design(args: &DesignArgs) -> CliResult<(DesignFile, DesignSummary)> {
    let cfg = config(&args.targets, args.m, args.l, args.case)?;
    let channels = channel_count_formula(cfg.m, cfg.l.get(), cfg.case)?;
    if let Some(a) = &args.allocation {
        modfrm::Allocation::new(a, channels)?;
    }
    let spec = args.targets.spec()?;
    let opts = SynthesisOptions::default();
    let modal = design_modal_for(&spec, &cfg, &opts)?;
    let design = synthesize_with_modal(&spec, &cfg, &modal, &opts)?;
    let bank = build_uniform_bank(&design)?;
    let cost = total_cost(&design);
    let file = DesignFile::from_design(
        &design,
        channels,
        args.allocation.clone(),
        &cost,
        args.command_line.clone(),
    )?;
    file.write(&args.output)?;
    let summary = DesignSummary {
        output: args.output.display().to_string(),
        channels,
        l_ifir_ma: design.hma.l_ifir(),
        l_ifir_mc: design.hmc.l_ifir(),
        cost: cost.to_string(),
        total_multipliers: cost.total,
        exceeds_max_channels: bank.exceeds_max_channels(),
    };
    Ok((file, summary))
}

pub const SWEEP_HEADER: [&str; 18] = [
    "L",
    "channels",
    "ma_pass_pi",
    "ma_stop_pi",
    "mc_pass_pi",
    "mc_stop_pi",
    "l_ifir_ma",
    "l_ifir_mc",
    "overall_pass_pi",
    "overall_stop_pi",
    "m_modal",
    "m_ma_pr",
    "m_ma_is",
    "m_mc_pr",
    "m_mc_is",
    "total",
    "cost",
    "error",
];

/// One row of a sweep, before formatting.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub l: usize,
    pub result: Result<(usize, ModFrmDesign, CostReport), String>,
}

fn pi_units(v: f64) -> String {
    format!("{:.17}", v / PI)
}

/// Designs one ModFRM filter per `L`, sharing the modal filter.
pub fn sweep_rows(
    targets: &Targets,
    m: usize,
    case: Case,
    ls: &[usize],
) -> CliResult<Vec<SweepRow>> {
    let spec = targets.spec()?;
    let opts = SynthesisOptions::default();
    let mut modal = None;
    let mut rows = Vec::with_capacity(ls.len());
    for &l in ls {
        let row = (|| -> Result<_, CliError> {
            let cfg = config(targets, m, l, case)?;
            let channels = channel_count_formula(m, l, case)?;
            if modal.is_none() {
                modal = Some(design_modal_for(&spec, &cfg, &opts)?);
            }
            let design =
                synthesize_with_modal(&spec, &cfg, modal.as_ref().expect("set above"), &opts)?;
            let cost = total_cost(&design);
            Ok((channels, design, cost))
        })();
        rows.push(SweepRow {
            l,
            result: row.map_err(|e| e.to_string()),
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        let mut rec = vec![row.l.to_string()];
        match &row.result {
            Ok((channels, d, c)) => {
                let e = masking_edges(&d.config);
                let (p, s) = d.nominal_edges();
                rec.push(channels.to_string());
                rec.extend([e.ma_pass, e.ma_stop, e.mc_pass, e.mc_stop].map(pi_units));
                rec.push(d.hma.l_ifir().to_string());
                rec.push(d.hmc.l_ifir().to_string());
                rec.push(pi_units(p));
                rec.push(pi_units(s));
                rec.extend(
                    [
                        c.m_modal, c.m_ma_pr, c.m_ma_is, c.m_mc_pr, c.m_mc_is, c.total,
                    ]
                    .map(|v| v.to_string()),
                );
                rec.push(c.to_string());
                rec.push(String::new());
            }
            Err(msg) => {
                rec.extend(std::iter::repeat(String::new()).take(SWEEP_HEADER.len() - 2));
                rec.push(msg.clone());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::io("<csv>", e))?;
    Ok(())
}

pub fn cmd_sweep(
    targets: &Targets,
    m: usize,
    case: Case,
    ls: &[usize],
    output: Option<&Path>,
) -> CliResult<Vec<SweepRow>> {
    let rows = sweep_rows(targets, m, case, ls)?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    match output {
        Some(p) => write_atomic(p, &buf)?,
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    Ok(rows)
}

/// `|H|` in dB, floored at -120 dB, on `grid_size` points of `[0, 2 pi)`.
pub fn response_table(channels: &[Fir], grid_size: usize) -> CliResult<Vec<Vec<f64>>> {
    if grid_size == 0 {
        return Err(CliError::Argument("grid size must be positive".into()));
    }
    let cols: Vec<Vec<f64>> = channels
        .iter()
        .map(|h| {
            freq_response_uniform(h, grid_size).map(|r| {
                r.iter()
                    .map(|v| (20.0 * v.norm().log10()).max(-120.0))
                    .collect()
            })
        })
        .collect::<Result<_, _>>()?;
    Ok((0..grid_size)
        .map(|k| {
            let mut row = vec![2.0 * PI * k as f64 / grid_size as f64];
            row.extend(cols.iter().map(|c| c[k]));
            row
        })
        .collect())
}

pub fn write_response_csv<W: std::io::Write>(
    table: &[Vec<f64>],
    channels: usize,
    out: W,
) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["omega".to_string()];
    header.extend((0..channels).map(|k| format!("h{k}_db")));
    w.write_record(&header)?;
    for row in table {
        w.write_record(row.iter().map(|v| format!("{v:.12e}")))?;
    }
    w.flush().map_err(|e| CliError::io("<csv>", e))?;
    Ok(())
}

/// Channels of the stored bank, merged by its allocation when `merged`.
pub fn load_channels(file: &DesignFile, merged: bool) -> CliResult<Vec<Fir>> {
    let design = file.to_design()?;
    let bank = build_uniform_bank(&design)?;
    match (merged, &file.allocation) {
        (true, Some(a)) => Ok(merge_channels(&bank, a)?.channels),
        (true, None) => Err(CliError::Argument(
            "design file has no allocation to merge".into(),
        )),
        (false, _) => Ok(bank.channels),
    }
}

pub fn cmd_respond(
    design: &Path,
    grid_size: usize,
    output: &Path,
    merged: bool,
) -> CliResult<usize> {
    if grid_size == 0 {
        return Err(CliError::Argument("grid size must be positive".into()));
    }
    let file = DesignFile::read(design)?;
    let channels = load_channels(&file, merged)?;
    let table = response_table(&channels, grid_size)?;
    let mut buf = Vec::new();
    write_response_csv(&table, channels.len(), &mut buf)?;
    write_atomic(output, &buf)?;
    Ok(channels.len())
}

/// Where the samples come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSource {
    Tones {
        tones: Vec<(f64, f64)>,
        samples: usize,
    },
    Raw(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelizeArgs {
    pub design: PathBuf,
    pub allocation: Option<Vec<usize>>,
    pub preset: Option<String>,
    pub source: SignalSource,
    pub output_dir: PathBuf,
}

/// Allocation chosen by flag, preset or design file, in that order.
pub fn resolve_allocation(
    file: &DesignFile,
    allocation: Option<&[usize]>,
    preset: Option<&str>,
) -> CliResult<Vec<usize>> {
    if let Some(name) = preset {
        let p = presets::find(name)
            .ok_or_else(|| CliError::Argument(format!("unknown preset '{name}'")))?;
        if p.uniform_channels != file.channel_count {
            return Err(CliError::Argument(format!(
                "preset {} needs a {}-channel bank, design has {}",
                p.name, p.uniform_channels, file.channel_count
            )));
        }
        return Ok(p.allocation.to_vec());
    }
    Ok(allocation
        .map(<[usize]>::to_vec)
        .or_else(|| file.allocation.clone())
        .unwrap_or_else(|| vec![1; file.channel_count]))
}

/// Runs the signal through every merged channel and writes one raw file per
/// output plus `report.json`.
pub fn cmd_channelize(args: &ChannelizeArgs) -> CliResult<SnrReport> {
    let file = DesignFile::read(&args.design)?;
    let counts = resolve_allocation(&file, args.allocation.as_deref(), args.preset.as_deref())?;
    let design = file.to_design()?;
    let bank = build_uniform_bank(&design)?;
    if bank.channel_count != file.channel_count {
        return Err(CliError::Schema(format!(
            "stored channel count {} disagrees with the geometry ({})",
            file.channel_count, bank.channel_count
        )));
    }
    let merged = merge_channels(&bank, &counts)?;
    let (signal, tones) = match &args.source {
        SignalSource::Tones { tones, samples } => (synth_tones(tones, *samples), tones.clone()),
        SignalSource::Raw(p) => (read_raw(p)?, Vec::new()),
    };
    let outputs = channelize(&signal, &merged.channels);
    let settle = merged.channels.iter().map(Fir::len).max().unwrap_or(1) - 1;
    let members: Vec<Vec<usize>> = (0..counts.len())
        .map(|i| merged.allocation.members(i).collect())
        .collect();
    let signs: Vec<Vec<i8>> = members
        .iter()
        .map(|m| m.iter().map(|&k| merged.allocation.signs[k]).collect())
        .collect();
    let report = measure(&outputs, settle, &tones, &members, &signs)?;

    std::fs::create_dir_all(&args.output_dir).map_err(|e| CliError::io(&args.output_dir, e))?;
    for (i, y) in outputs.iter().enumerate() {
        write_atomic(
            &args.output_dir.join(format!("channel_{i}.f32")),
            &encode_raw(y),
        )?;
    }
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_atomic(&args.output_dir.join("report.json"), json.as_bytes())?;
    Ok(report)
}

pub fn cmd_cost(design: &Path) -> CliResult<CostReport> {
    Ok(total_cost(&DesignFile::read(design)?.to_design()?))
}

pub fn presets_table() -> String {
    let mut out = String::from("name\tuniform_channels\tallocation\ttheta\tphi\tm\tL\tstandards\n");
    for p in PRESETS {
        let alloc: Vec<String> = p.allocation.iter().map(usize::to_string).collect();
        out.push_str(&format!(
            "{}\t{}\t({})\t{}pi\t{}pi\t{}\t{}\t{}\n",
            p.name,
            p.uniform_channels,
            alloc.join(","),
            (p.theta / PI * 1e6).round() / 1e6,
            (p.phi / PI * 1e6).round() / 1e6,
            p.m,
            p.l,
            p.standards.join(", ")
        ));
    }
    out
}
