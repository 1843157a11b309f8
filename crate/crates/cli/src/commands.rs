use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_traits::One;
use serde::Serialize;

use wavekit::construct::{
    apply_unimodular, build_matrix, build_negative_scalar, build_positive_scalar,
    notched_cube_region, notched_parallelotope_region, ConstructionTrace, QAttempt, QChoice,
    DEFAULT_Q_MAX,
};
use wavekit::polytope::Region;
use wavekit::ratgeom::{
    expansive_check, format_rat, parse_rat, scalar_power_probe, singular_values, Decision, DilationSpec, Rat,
    RatMatrix, SingularValues, DEFAULT_P_MAX,
};
use wavekit::verify::float::{FloatConstruction, FloatKind, FloatRegionFile};
use wavekit::verify::{
    verify_float_construction, verify_wavelet_set, TilingReport, VerifyMode, VerifyOptions,
    WaveletVerdict,
};

use crate::{ConstructArgs, DilationArgs, InfoArgs, RegionType, VerifyArgs};

pub fn q_max() -> Result<u32> {
    match std::env::var("WAVEKIT_QMAX") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow!("WAVEKIT_QMAX must be a positive integer, got {v:?}")),
        Err(_) => Ok(DEFAULT_Q_MAX),
    }
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn rational(s: &str) -> Result<Rat> {
    Ok(parse_rat(s)?)
}

/// A real factor: a decimal, a rational, or `sqrt(x)`.
fn real(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        return Ok(real(inner)?.sqrt());
    }
    if let Ok(x) = s.parse::<f64>() {
        return Ok(x);
    }
    Ok(wavekit::ratgeom::to_f64(&rational(s)?))
}

impl DilationArgs {
    fn is_empty(&self) -> bool {
        self.kind.is_none() && self.d.is_none() && self.matrix.is_none()
    }

    fn kind(&self) -> Result<RegionType> {
        match (self.kind, &self.matrix) {
            (Some(k), _) => Ok(k),
            (None, Some(_)) => Ok(RegionType::Matrix),
            (None, None) => bail!("--type is required"),
        }
    }

    fn dim_or(&self, fallback: Option<usize>) -> Result<usize> {
        self.dim.or(fallback).ok_or_else(|| anyhow!("--dim is required"))
    }

    fn factor(&self) -> Result<Rat> {
        rational(self.d.as_deref().ok_or_else(|| anyhow!("--d is required"))?)
    }

    /// `A`, undoing `--transpose-given`.
    fn given_matrix(&self) -> Result<RatMatrix> {
        let text = self.matrix.as_deref().ok_or_else(|| anyhow!("--matrix is required"))?;
        let m = RatMatrix::parse(text)?;
        if let Some(n) = self.dim {
            if n != m.dim() {
                bail!("--dim {n} does not match a {0}x{0} matrix", m.dim());
            }
        }
        Ok(if self.transpose_given { m.transpose() } else { m })
    }

    fn matrix(&self, fallback_dim: Option<usize>) -> Result<RatMatrix> {
        match self.kind()? {
            RegionType::Scalar => Ok(RatMatrix::scalar(self.dim_or(fallback_dim)?, &self.factor()?)),
            RegionType::NegScalar => Ok(RatMatrix::scalar(self.dim_or(fallback_dim)?, &-self.factor()?)),
            RegionType::Matrix => self.given_matrix(),
            other => bail!("{other:?} is a region type, not a dilation"),
        }
    }

    fn spec(&self, fallback_dim: Option<usize>) -> Result<DilationSpec> {
        Ok(match self.kind()? {
            RegionType::Scalar => DilationSpec::positive_scalar(self.dim_or(fallback_dim)?, &self.factor()?)?,
            RegionType::NegScalar => DilationSpec::negative_scalar(self.dim_or(fallback_dim)?, &self.factor()?)?,
            _ => DilationSpec::from_matrix(&self.matrix(fallback_dim)?, DEFAULT_P_MAX)?,
        })
    }
}

pub fn construct(args: &ConstructArgs) -> Result<u8> {
    let dil = &args.dilation;
    let kind = dil.kind()?;
    if args.float {
        return construct_float(args, kind);
    }
    let (mut region, trace): (Region, Option<ConstructionTrace>) = match kind {
        RegionType::NegScalar => {
            let (r, t) = build_negative_scalar(dil.dim_or(None)?, &dil.factor()?)?;
            (r, Some(t))
        }
        RegionType::Scalar => {
            let (r, t) = build_positive_scalar(dil.dim_or(None)?, &dil.factor()?, args.k.unwrap_or(1))?;
            (r, Some(t))
        }
        RegionType::Matrix => {
            let choice = match args.q {
                Some(q) => QChoice::Fixed(q),
                None => QChoice::Search { q_max: q_max()? },
            };
            let (r, t) = build_matrix(&dil.given_matrix()?, choice)?;
            (r, Some(t))
        }
        RegionType::NotchedCube | RegionType::NotchedParallelotope => {
            let alpha = match (&args.alpha, &dil.d) {
                (Some(a), _) => rational(a)?,
                (None, Some(_)) => dil.factor()?.recip(),
                (None, None) => bail!("--alpha or --d is required"),
            };
            let n = dil.dim_or(None)?;
            let r = if kind == RegionType::NotchedCube {
                notched_cube_region(n, &alpha)?
            } else {
                notched_parallelotope_region(n, &alpha)?
            };
            (r, None)
        }
    };
    if let Some(s) = &args.unimodular {
        region = apply_unimodular(&region, &RatMatrix::parse(s)?)?;
    }
    emit(args.output.as_deref(), &region.to_json())?;

    let mut summary = format!("cells: {}\nvolume: {}\n", region.cells.len(), region.volume());
    if let Some(t) = &trace {
        summary += &format!("q: {}\nalpha: {}\nt: {}\n", t.q, t.alpha, t.t);
        if let Some(k) = &t.k {
            summary += &format!("k: {k}\n");
        }
        if let Some(h) = &t.hypothesis {
            summary += &format!("singular-value hypothesis: {}\n", decision_word(h.satisfied));
        }
    }
    print_summary(args.output.is_some(), &summary);
    Ok(0)
}

fn construct_float(args: &ConstructArgs, kind: RegionType) -> Result<u8> {
    let dil = &args.dilation;
    let kind = match kind {
        RegionType::NegScalar => FloatKind::NegScalar,
        RegionType::Scalar => FloatKind::Scalar,
        other => bail!("--float supports neg-scalar and scalar, not {other:?}"),
    };
    let c = FloatConstruction {
        kind,
        dim: dil.dim_or(None)?,
        d: real(dil.d.as_deref().ok_or_else(|| anyhow!("--d is required"))?)?,
        k: if kind == FloatKind::Scalar { args.k.unwrap_or(1) } else { 0 },
    };
    c.validate()?;
    let text = serde_json::to_string_pretty(&FloatRegionFile { float: c.clone() })?;
    emit(args.output.as_deref(), &text)?;
    print_summary(args.output.is_some(), &format!(
            "float {} construction, dim {}, d = {}\n",
            serde_json::to_value(c.kind)?.as_str().unwrap_or_default(),
            c.dim,
            crate::export::g17(c.d)
        ),);
    Ok(0)
}

/// The summary goes to stdout unless stdout carries the region itself.
fn print_summary(stdout_free: bool, text: &str) {
    if stdout_free {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
}

fn decision_word(d: Decision) -> &'static str {
    match d {
        Decision::Yes => "yes",
        Decision::No => "no",
        Decision::Indeterminate => "indeterminate",
    }
}

pub fn verify(args: &VerifyArgs) -> Result<u8> {
    let text = read(&args.file)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.file.display()))?;
    let is_float = value.get("float").is_some();
    let mode = match (args.mode, is_float) {
        (Some(m), _) => m.into(),
        (None, true) => VerifyMode::Float,
        (None, false) => VerifyMode::Exact,
    };
    let defaults = VerifyOptions::default();
    let options = VerifyOptions {
        mode,
        samples: args.samples.unwrap_or(defaults.samples),
        seed: args.seed.unwrap_or(defaults.seed),
        tolerance: args.tolerance.unwrap_or(defaults.tolerance),
    };
    let verdict = if is_float {
        let file: FloatRegionFile = serde_json::from_value(value)?;
        file.float.validate()?;
        verify_float_construction(&file.float, &options)?
    } else {
        let region = Region::from_json(&text)?;
        let dilation = if args.dilation.is_empty() {
            region
                .metadata
                .dilation
                .clone()
                .ok_or_else(|| anyhow!("the region names no dilation; pass --type and --d, or --matrix"))?
        } else {
            args.dilation.spec(Some(region.dim))?
        };
        if dilation.dim() != region.dim {
            bail!("dilation acts on dimension {}, region has {}", dilation.dim(), region.dim);
        }
        verify_wavelet_set(&region, &dilation, &options)?
    };
    emit(args.output.as_deref(), &serde_json::to_string_pretty(&verdict)?)?;
    eprint!("{}", verdict_summary(&verdict));
    Ok(verdict.verdict.exit_code() as u8)
}

fn verdict_summary(v: &WaveletVerdict) -> String {
    let mut s = String::new();
    let mut line = |name: &str, r: &TilingReport| {
        s += &format!("{name}: {:?}", r.verdict).to_lowercase();
        if let Some(o) = r.offenders.first() {
            s += &format!(" ({}", o.label);
            if let Some(w) = &o.witness {
                s += &format!(" at {w}");
            }
            s += ")";
        }
        s += "\n";
        for w in &r.warnings {
            s += &format!("  warning: {w}\n");
        }
    };
    line("translation", &v.translation);
    line("dilation", &v.dilation);
    if let Some(r) = &v.translation_mc {
        line("translation (sampled)", r);
    }
    if let Some(r) = &v.dilation_mc {
        line("dilation (sampled)", r);
    }
    s += match v.verdict {
        wavekit::verify::Verdict::Pass => "wavelet set\n",
        wavekit::verify::Verdict::Fail => "not a wavelet set\n",
        wavekit::verify::Verdict::Indeterminate => "indeterminate\n",
    };
    s
}

#[derive(Serialize)]
struct InfoReport {
    matrix: RatMatrix,
    power: Option<u32>,
    scalar: Option<String>,
    singular_values: SingularValues,
    threshold: f64,
    hypothesis: Decision,
    expansive: Decision,
    q_max: u32,
    attempts: Vec<QAttempt>,
    accepted_q: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    search_error: Option<String>,
}

pub fn info(args: &InfoArgs) -> Result<u8> {
    let a = args.dilation.matrix(None)?;
    let n = a.dim();
    let probe = scalar_power_probe(&a, DEFAULT_P_MAX);
    let sv = singular_values(&a);
    let threshold = (n as f64).sqrt();
    let q_max = q_max()?;
    let mut report = InfoReport {
        matrix: a.clone(),
        power: probe.as_ref().map(|p| p.0),
        scalar: probe.as_ref().map(|p| format_rat(&p.1)),
        hypothesis: sv.min_exceeds(threshold),
        singular_values: sv,
        threshold,
        expansive: expansive_check(&a),
        q_max,
        attempts: Vec::new(),
        accepted_q: None,
        search_error: None,
    };
    if probe.as_ref().is_some_and(|p| p.1 > Rat::one()) {
        match build_matrix(&a, QChoice::Search { q_max }) {
            Ok((_, trace)) => {
                report.accepted_q = Some(trace.q);
                report.attempts = trace.attempts;
            }
            Err(e) => report.search_error = Some(e.to_string()),
        }
    }
    if args.json {
        emit(None, &serde_json::to_string_pretty(&report)?)?;
    } else {
        print!("{}", info_text(&report, n));
    }
    Ok(0)
}

fn info_text(r: &InfoReport, n: usize) -> String {
    let mut s = format!("matrix A: {}\n", r.matrix);
    s += &match (&r.power, r.scalar.as_deref().map(parse_rat)) {
        (Some(p), Some(Ok(d))) => format!("power: A^{p} = {d}·I (p = {p}, d = {d})\n"),
        _ => format!("power: no A^p = d·I with p <= {DEFAULT_P_MAX}\n"),
    };
    let values: Vec<String> = r.singular_values.values.iter().map(|v| format!("{v:.6}")).collect();
    s += &format!(
        "singular values: {} (±{:.1e}, {})\n",
        values.join(", "),
        r.singular_values.radius,
        if r.singular_values.certified { "certified" } else { "uncertified" }
    );
    s += &format!("threshold: sqrt({n}) = {:.6}\n", r.threshold);
    s += match r.hypothesis {
        Decision::Yes => "theorem hypothesis satisfied\n",
        Decision::No => "hypothesis NOT satisfied; direct q-search still available\n",
        Decision::Indeterminate => "hypothesis undecided at float precision; direct q-search still available\n",
    };
    s += &format!("expansive: {}\n", decision_word(r.expansive));
    if r.power.is_none() {
        s += "q-search: skipped (no scalar power)\n";
        return s;
    }
    s += &format!("q-search (q_max = {}):\n", r.q_max);
    for a in &r.attempts {
        s += &format!(
            "  q={} k={} t={} hole-inside-frame={} hole-clear-of-notch={} satellite-clear={} -> {}\n",
            a.q,
            a.k,
            a.t,
            a.hole_inside_frame,
            a.hole_clear_of_notch,
            a.satellite_clear,
            if a.accepted { "accepted" } else { "rejected" }
        );
    }
    if let Some(e) = &r.search_error {
        s += &format!("  {e}\n");
    }
    s
}
