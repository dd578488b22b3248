//! INI experiment configs: strict parsing with line diagnostics, defaulted
//! resolution into engine types, and a canonical hash of the effective
//! settings that keys every report row.
//!
//! The format is `[section]` headers and `key = value` pairs; `#` and `;`
//! start comments. Unknown sections and keys are hard errors: silently
//! skipping a typo like `headrom = 0` would verify a configuration the
//! user never asked for.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use wick_core::{
    build_basis, FunctionOnR, HermiteBasis, Kernel, OverflowMode, QuadratureRule, QuadratureSpec,
    RangePolicy, SmoothingProfile, TimeGrid, TruncationPolicy,
};

use crate::error::{config_err, CliError};

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "truncation",
        &["k", "n_max", "headroom", "drop_tol", "overflow"],
    ),
    ("basis", &["nodes", "range"]),
    ("grid", &["t_end", "n_steps", "rule"]),
    ("mollifier", &["center", "sigma", "shrink"]),
    (
        "kernel",
        &[
            "family",
            "value",
            "value_at_diagonal",
            "slope",
            "coeffs",
            "hurst",
            "shape",
            "decay",
        ],
    ),
    ("run", &["seed", "suites", "out"]),
];

/// Raw key-value pairs, each with the line it was defined on.
#[derive(Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<(String, String), (String, usize)>,
}

pub fn parse_ini(text: &str) -> Result<RawConfig, CliError> {
    let mut entries = BTreeMap::new();
    let mut section: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw_line.split(['#', ';']).next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        if let Some(rest) = stripped.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| config_err(line, "unterminated section header".into()))?
                .trim()
                .to_ascii_lowercase();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                let known: Vec<&str> = SECTIONS.iter().map(|(s, _)| *s).collect();
                return Err(config_err(
                    line,
                    format!("unknown section [{name}]; sections: {}", known.join(" ")),
                ));
            }
            section = Some(name);
            continue;
        }
        let Some((lhs, rhs)) = stripped.split_once('=') else {
            return Err(config_err(
                line,
                "expected `key = value` or `[section]`".into(),
            ));
        };
        let key = lhs.trim().to_ascii_lowercase();
        let value = rhs.trim().to_string();
        let Some(section_name) = section.clone() else {
            return Err(config_err(
                line,
                format!("key `{key}` appears before any [section]"),
            ));
        };
        let keys = SECTIONS
            .iter()
            .find(|(s, _)| *s == section_name)
            .map(|(_, ks)| *ks)
            .expect("section was validated");
        if !keys.contains(&key.as_str()) {
            return Err(config_err(
                line,
                format!(
                    "unknown key `{key}` in [{section_name}]; keys: {}",
                    keys.join(" ")
                ),
            ));
        }
        if value.is_empty() {
            return Err(config_err(
                line,
                format!("empty value for {section_name}.{key}"),
            ));
        }
        if entries
            .insert((section_name.clone(), key.clone()), (value, line))
            .is_some()
        {
            return Err(config_err(
                line,
                format!("duplicate key `{key}` in [{section_name}]"),
            ));
        }
    }
    Ok(RawConfig { entries })
}

impl RawConfig {
    fn get(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|(v, l)| (v.as_str(), *l))
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.get(section, key).map(|(_, l)| l).unwrap_or(0)
    }

    fn keys_in<'a>(&'a self, section: &'a str) -> impl Iterator<Item = (&'a str, usize)> {
        self.entries
            .iter()
            .filter(move |((s, _), _)| s == section)
            .map(|((_, k), (_, l))| (k.as_str(), *l))
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, CliError> {
        match self.get(section, key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse()
                .map_err(|_| config_err(line, format!("cannot parse {section}.{key} value `{v}`"))),
        }
    }

    fn parse_opt<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| config_err(line, format!("cannot parse {section}.{key} value `{v}`"))),
        }
    }
}

/// Effective configuration after defaults; the engine-facing handles hang
/// off this.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub k: u32,
    pub n_max: u32,
    pub headroom: u32,
    pub drop_tol: f64,
    pub overflow: OverflowMode,
    pub nodes: usize,
    pub range: RangePolicy,
    pub t_end: f64,
    pub n_steps: usize,
    pub rule: QuadratureRule,
    pub center: f64,
    pub sigma: f64,
    /// Widths of the shrinking mollifier family, strictly decreasing.
    pub shrink: Vec<f64>,
    pub kernel: Kernel,
    pub seed: Option<u64>,
    pub suites: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

pub fn resolve(raw: &RawConfig) -> Result<Resolved, CliError> {
    let k: u32 = raw.parse("truncation", "k", 6)?;
    if k == 0 {
        return Err(config_err(
            raw.line_of("truncation", "k"),
            "truncation.k must be at least 1".into(),
        ));
    }
    let n_max: u32 = raw.parse("truncation", "n_max", 4)?;
    if n_max == 0 {
        return Err(config_err(
            raw.line_of("truncation", "n_max"),
            "truncation.n_max must be at least 1".into(),
        ));
    }
    let headroom: u32 = raw.parse("truncation", "headroom", 2)?;
    let drop_tol: f64 = raw.parse("truncation", "drop_tol", 0.0)?;
    if !drop_tol.is_finite() || drop_tol < 0.0 {
        return Err(config_err(
            raw.line_of("truncation", "drop_tol"),
            "truncation.drop_tol must be finite and nonnegative".into(),
        ));
    }
    let overflow = match raw.get("truncation", "overflow") {
        None => OverflowMode::Strict,
        Some(("strict", _)) => OverflowMode::Strict,
        Some(("truncate", _)) => OverflowMode::Truncate,
        Some((v, line)) => {
            return Err(config_err(
                line,
                format!("truncation.overflow is `strict` or `truncate`, got `{v}`"),
            ))
        }
    };

    let nodes: usize = raw.parse("basis", "nodes", (4 * k as usize).max(16))?;
    if nodes == 0 {
        return Err(config_err(
            raw.line_of("basis", "nodes"),
            "basis.nodes must be positive".into(),
        ));
    }
    let range = match raw.get("basis", "range") {
        None => RangePolicy::Natural,
        Some((v, line)) => parse_range(v, line)?,
    };

    let t_end: f64 = raw.parse("grid", "t_end", 0.9)?;
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(config_err(
            raw.line_of("grid", "t_end"),
            "grid.t_end must be finite and positive".into(),
        ));
    }
    let n_steps: usize = raw.parse("grid", "n_steps", 8)?;
    if n_steps == 0 {
        return Err(config_err(
            raw.line_of("grid", "n_steps"),
            "grid.n_steps must be at least 1".into(),
        ));
    }
    let rule = match raw.get("grid", "rule") {
        None => QuadratureRule::LeftEndpoint,
        Some(("left", _)) => QuadratureRule::LeftEndpoint,
        Some(("trapezoid", _)) => QuadratureRule::Trapezoid,
        Some((v, line)) => {
            return Err(config_err(
                line,
                format!("grid.rule is `left` or `trapezoid`, got `{v}`"),
            ))
        }
    };

    let center: f64 = raw.parse("mollifier", "center", 0.0)?;
    if !center.is_finite() {
        return Err(config_err(
            raw.line_of("mollifier", "center"),
            "mollifier.center must be finite".into(),
        ));
    }
    let sigma: f64 = raw.parse("mollifier", "sigma", 1.0)?;
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(config_err(
            raw.line_of("mollifier", "sigma"),
            "mollifier.sigma must be finite and positive".into(),
        ));
    }
    let shrink = match raw.get("mollifier", "shrink") {
        None => (1..=6).map(|k| 0.84f64.powi(k)).collect(),
        Some((v, line)) => parse_shrink(v, line)?,
    };

    let kernel = resolve_kernel(raw)?;

    let seed: Option<u64> = raw.parse_opt("run", "seed")?;
    let suites = raw.get("run", "suites").map(|(v, _)| {
        v.split([' ', ',', '\t'])
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    });
    let out: Option<PathBuf> = raw.get("run", "out").map(|(v, _)| PathBuf::from(v));

    Ok(Resolved {
        k,
        n_max,
        headroom,
        drop_tol,
        overflow,
        nodes,
        range,
        t_end,
        n_steps,
        rule,
        center,
        sigma,
        shrink,
        kernel,
        seed,
        suites,
        out,
    })
}

fn parse_range(v: &str, line: usize) -> Result<RangePolicy, CliError> {
    let parts: Vec<&str> = v.split_whitespace().collect();
    match parts.as_slice() {
        ["natural"] => Ok(RangePolicy::Natural),
        ["stretched", factor] => {
            let lambda: f64 = factor
                .parse()
                .map_err(|_| config_err(line, format!("cannot parse stretch factor `{factor}`")))?;
            if !lambda.is_finite() || lambda <= 0.0 {
                return Err(config_err(
                    line,
                    "stretch factor must be finite and positive".into(),
                ));
            }
            Ok(RangePolicy::Stretched(lambda))
        }
        _ => Err(config_err(
            line,
            format!("basis.range is `natural` or `stretched <factor>`, got `{v}`"),
        )),
    }
}

fn parse_shrink(v: &str, line: usize) -> Result<Vec<f64>, CliError> {
    let widths: Vec<f64> = v
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<Result<_, _>>()
        .map_err(|_| {
            config_err(
                line,
                format!("mollifier.shrink must be a list of widths, got `{v}`"),
            )
        })?;
    if widths.is_empty() {
        return Err(config_err(
            line,
            "mollifier.shrink needs at least one width".into(),
        ));
    }
    for &w in &widths {
        if !w.is_finite() || w <= 0.0 {
            return Err(config_err(
                line,
                format!("shrink width {w} is not positive and finite"),
            ));
        }
    }
    for pair in widths.windows(2) {
        if pair[1] >= pair[0] {
            return Err(config_err(
                line,
                format!(
                    "shrink widths must decrease strictly, got {} then {}",
                    pair[0], pair[1]
                ),
            ));
        }
    }
    Ok(widths)
}

fn resolve_kernel(raw: &RawConfig) -> Result<Kernel, CliError> {
    let (family, fam_line) = match raw.get("kernel", "family") {
        Some((v, l)) => (v.to_ascii_lowercase(), l),
        None => ("linear".to_string(), 0),
    };
    let allowed: &[&str] = match family.as_str() {
        "constant" => &["family", "value"],
        "linear" => &["family", "value_at_diagonal", "slope"],
        "poly" => &["family", "coeffs"],
        "fbm" => &["family", "hurst"],
        "gamma" => &["family", "shape", "decay"],
        other => {
            return Err(config_err(
                fam_line,
                format!(
                    "unknown kernel family `{other}`; families: constant linear poly fbm gamma"
                ),
            ))
        }
    };
    for (key, line) in raw.keys_in("kernel") {
        if !allowed.contains(&key) {
            return Err(config_err(
                line,
                format!("kernel.{key} does not apply to family {family}"),
            ));
        }
    }
    match family.as_str() {
        "constant" => Ok(Kernel::Constant(raw.parse("kernel", "value", 1.0)?)),
        "linear" => Ok(Kernel::Linear {
            value_at_diagonal: raw.parse("kernel", "value_at_diagonal", 0.7)?,
            slope: raw.parse("kernel", "slope", 1.3)?,
        }),
        "poly" => {
            let Some((v, line)) = raw.get("kernel", "coeffs") else {
                return Err(config_err(
                    fam_line,
                    "kernel family poly needs kernel.coeffs".into(),
                ));
            };
            let coeffs: Vec<f64> = v
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| config_err(line, format!("cannot parse kernel.coeffs `{v}`")))?;
            if coeffs.is_empty() {
                return Err(config_err(
                    line,
                    "kernel.coeffs needs at least one coefficient".into(),
                ));
            }
            Ok(Kernel::PolyInGap(coeffs))
        }
        "fbm" => {
            let hurst: f64 = raw.parse("kernel", "hurst", 0.75)?;
            Kernel::fbm(hurst).map_err(|e| {
                config_err(raw.line_of("kernel", "hurst").max(fam_line), e.to_string())
            })
        }
        "gamma" => {
            let shape: f64 = raw.parse("kernel", "shape", 1.5)?;
            let decay: f64 = raw.parse("kernel", "decay", 1.0)?;
            Kernel::gamma_bss(shape, decay).map_err(|e| {
                config_err(raw.line_of("kernel", "shape").max(fam_line), e.to_string())
            })
        }
        _ => unreachable!("family was validated"),
    }
}

impl Resolved {
    pub fn policy(&self) -> TruncationPolicy {
        TruncationPolicy::new(
            self.k,
            self.n_max,
            self.headroom,
            self.drop_tol,
            self.overflow,
        )
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            nodes: self.nodes,
            range: self.range,
        }
    }

    pub fn basis(&self) -> Result<HermiteBasis, CliError> {
        Ok(build_basis(self.k, &self.quadrature())?)
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        Ok(TimeGrid::uniform(self.n_steps, self.t_end, self.rule)?)
    }

    pub fn mollifier(&self) -> FunctionOnR {
        FunctionOnR::bump(self.center, self.sigma)
    }

    /// The mollifier with its shrinking family attached.
    pub fn profile(&self) -> Result<SmoothingProfile, CliError> {
        let family = self
            .shrink
            .iter()
            .map(|&w| FunctionOnR::bump(self.center, w))
            .collect();
        Ok(SmoothingProfile::with_family(self.mollifier(), family)?)
    }
}

/// The effective engine settings plus the seed, one `section.key=value`
/// line each, sorted. Output paths and suite selections are excluded: they
/// change where results go, not what the numbers are.
pub fn canonical(cfg: &Resolved, seed: u64) -> String {
    let mut lines = vec![
        format!("basis.nodes={}", cfg.nodes),
        match cfg.range {
            RangePolicy::Natural => "basis.range=natural".to_string(),
            RangePolicy::Stretched(l) => format!("basis.range=stretched {l:?}"),
        },
        format!("grid.n_steps={}", cfg.n_steps),
        format!(
            "grid.rule={}",
            match cfg.rule {
                QuadratureRule::LeftEndpoint => "left",
                QuadratureRule::Trapezoid => "trapezoid",
            }
        ),
        format!("grid.t_end={:?}", cfg.t_end),
        format!("mollifier.center={:?}", cfg.center),
        format!(
            "mollifier.shrink={}",
            cfg.shrink
                .iter()
                .map(|w| format!("{w:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        ),
        format!("mollifier.sigma={:?}", cfg.sigma),
        format!("run.seed={seed}"),
        format!("truncation.drop_tol={:?}", cfg.drop_tol),
        format!("truncation.headroom={}", cfg.headroom),
        format!("truncation.k={}", cfg.k),
        format!("truncation.n_max={}", cfg.n_max),
        format!(
            "truncation.overflow={}",
            match cfg.overflow {
                OverflowMode::Strict => "strict",
                OverflowMode::Truncate => "truncate",
            }
        ),
    ];
    match &cfg.kernel {
        Kernel::Constant(c) => {
            lines.push("kernel.family=constant".into());
            lines.push(format!("kernel.value={c:?}"));
        }
        Kernel::Linear {
            value_at_diagonal,
            slope,
        } => {
            lines.push("kernel.family=linear".into());
            lines.push(format!("kernel.slope={slope:?}"));
            lines.push(format!("kernel.value_at_diagonal={value_at_diagonal:?}"));
        }
        Kernel::PolyInGap(coeffs) => {
            lines.push("kernel.family=poly".into());
            lines.push(format!(
                "kernel.coeffs={}",
                coeffs
                    .iter()
                    .map(|c| format!("{c:?}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            ));
        }
        Kernel::FbmLiouville { hurst } => {
            lines.push("kernel.family=fbm".into());
            lines.push(format!("kernel.hurst={hurst:?}"));
        }
        Kernel::GammaBss { shape, decay } => {
            lines.push(format!("kernel.decay={decay:?}"));
            lines.push("kernel.family=gamma".into());
            lines.push(format!("kernel.shape={shape:?}"));
        }
    }
    lines.sort();
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

pub fn config_hash(cfg: &Resolved, seed: u64) -> String {
    let digest = Sha256::digest(canonical(cfg, seed).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
