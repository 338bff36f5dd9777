//! INI run configuration.
//!
//! ```ini
//! [potential]
//! family = PT        ; ISW, PT or RM
//! alpha = pi
//! M = 2
//! N = 30
//!
//! [packet]
//! weights = gaussian
//! n_bar = 15
//! sigma = 3
//!
//! [time]
//! times = 0, 1/5, 1/4, 1/3
//! ```
//!
//! Every value may be overridden from the command line with
//! `--set section.key=value`. Reals accept `pi` products such as `2*pi` or
//! `pi/2`; times are fractions of `t_R` and stay exact when written as `p/q`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use ini::Ini;
use qrevival::carpet::{Normalization, DEFAULT_GAMMA};
use qrevival::grid_solver::Dispersion;
use qrevival::revival_metrics::ScanConfig;
use qrevival::time::time_range;
use qrevival::{Error, Family, PacketRecipe, PhaseScheme, PotentialSpec, Result, TimePoint};

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("potential", &["family", "alpha", "M", "r", "L", "N"]),
    ("packet", &["weights", "n_bar", "sigma", "decay", "phases", "seed"]),
    ("grid", &["x_min", "x_max", "points"]),
    ("time", &["times", "start", "stop", "count"]),
    ("output", &["directory", "formats"]),
    ("scan", &["threshold", "label_tolerance"]),
    ("detune", &["r_values", "times"]),
    ("carpet", &["normalization", "gamma", "zoom", "zoom_center", "zoom_half_width", "frames"]),
    ("bench", &["points", "steps_per_revival", "checkpoints", "pass_threshold"]),
    ("order", &["points", "steps_per_revival", "t_final"]),
    ("modes", &["counts", "steps_per_revival", "dispersion"]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Pgm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridBlock {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarpetBlock {
    pub normalization: Normalization,
    pub gamma: f64,
    /// `(center, half_width)` in fractions of `t_R`.
    pub zoom: Option<(TimePoint, TimePoint)>,
    /// Rows of a zoomed carpet.
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchBlock {
    pub points: usize,
    pub steps_per_revival: usize,
    pub checkpoints: Vec<TimePoint>,
    pub pass_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderBlock {
    pub points: usize,
    pub steps_per_revival: usize,
    pub t_final: TimePoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModesBlock {
    pub counts: Vec<usize>,
    pub steps_per_revival: usize,
    pub dispersion: Dispersion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub packet: PacketRecipe,
    pub grid: GridBlock,
    /// Fractions of `t_R`; empty when the config has no `[time]` block.
    pub times: Vec<TimePoint>,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    pub scan: ScanConfig,
    pub detune_r: Vec<f64>,
    pub detune_times: Vec<TimePoint>,
    pub carpet: CarpetBlock,
    pub bench: Option<BenchBlock>,
    pub order: Option<OrderBlock>,
    pub modes: Option<ModesBlock>,
    /// Every `section.key = value` after overrides, for the run manifest.
    pub echo: BTreeMap<String, String>,
}

/// Evaluate `2*pi`, `pi/2`, `-1.5` and the like.
pub fn parse_real(field: &str, text: &str) -> Result<f64> {
    let bad = || Error::config(field, format!("`{text}` is not a number"));
    let s = text.trim();
    if s.is_empty() {
        return Err(bad());
    }
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = s;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let token = rest[..end].trim();
        let factor = match token {
            "pi" => std::f64::consts::PI,
            "-pi" => -std::f64::consts::PI,
            _ => token.parse::<f64>().map_err(|_| bad())?,
        };
        value = if op == '*' { value * factor } else { value / factor };
        if end == rest.len() {
            break;
        }
        op = rest.as_bytes()[end] as char;
        rest = &rest[end + 1..];
    }
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn parse_list<T>(field: &str, text: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::config(field, "list is empty"));
    }
    items.into_iter().map(item).collect()
}

fn parse_time(field: &str, text: &str) -> Result<TimePoint> {
    TimePoint::from_str(text.trim()).map_err(|_| Error::config(field, format!("`{text}` is not a time (use p/q or a decimal)")))
}

struct Source {
    values: BTreeMap<String, String>,
}

impl Source {
    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.values.keys().any(|k| k.starts_with(&prefix))
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::config(key, "missing required value"))
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_real(key, v)).transpose()
    }

    fn uint(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| v.trim().parse::<u64>().map_err(|_| Error::config(key, format!("`{v}` is not a non-negative integer"))))
            .transpose()
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.uint(key)?.map(|v| v as usize).unwrap_or(default))
    }

    fn time(&self, key: &str) -> Result<Option<TimePoint>> {
        self.get(key).map(|v| parse_time(key, v)).transpose()
    }

    fn times(&self, key: &str) -> Result<Option<Vec<TimePoint>>> {
        self.get(key).map(|v| parse_list(key, v, |s| parse_time(key, s))).transpose()
    }
}

impl RunConfig {
    /// Parse INI text, apply `section.key=value` overrides and validate.
    pub fn from_ini(text: &str, overrides: &[String]) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        let mut values = BTreeMap::new();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                let section = section.ok_or_else(|| Error::config(key, "key outside any [section]"))?;
                values.insert(format!("{section}.{key}"), value.trim().to_string());
            }
        }
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| Error::config(o.as_str(), "override must look like section.key=value"))?;
            if !key.contains('.') {
                return Err(Error::config(key, "override key must look like section.key"));
            }
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        for key in values.keys() {
            let (section, name) = key.split_once('.').unwrap_or((key, ""));
            match KNOWN_KEYS.iter().find(|(s, _)| *s == section) {
                None => return Err(Error::config(key.as_str(), "unknown section")),
                Some((_, names)) if !names.contains(&name) => return Err(Error::config(key.as_str(), "unknown key")),
                _ => {}
            }
        }
        Self::build(Source { values })
    }

    pub fn from_file(path: &std::path::Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_ini(&text, overrides)
    }

    fn build(src: Source) -> Result<Self> {
        let potential = potential_block(&src)?;
        let packet = packet_block(&src)?;

        let grid = GridBlock { x_min: src.real("grid.x_min")?, x_max: src.real("grid.x_max")?, points: src.usize_or("grid.points", 2000)? };
        if grid.points < 2 {
            return Err(Error::config("grid.points", "need at least 2 points"));
        }
        if let (Some(a), Some(b)) = (grid.x_min, grid.x_max) {
            if a >= b {
                return Err(Error::config("grid.x_max", "must exceed grid.x_min"));
            }
        }

        let times = time_block(&src)?;

        let output_dir = PathBuf::from(src.get("output.directory").unwrap_or("out"));
        let formats = match src.get("output.formats") {
            None => Vec::new(),
            Some(v) => {
                let mut f = parse_list("output.formats", v, |s| match s.to_ascii_lowercase().as_str() {
                    "csv" => Ok(Format::Csv),
                    "json" => Ok(Format::Json),
                    "pgm" => Ok(Format::Pgm),
                    _ => Err(Error::config("output.formats", format!("unknown format `{s}` (csv, json, pgm)"))),
                })?;
                f.sort();
                f.dedup();
                f
            }
        };

        let mut scan = ScanConfig::default();
        if let Some(t) = src.real("scan.threshold")? {
            scan.threshold = t;
        }
        if let Some(t) = src.real("scan.label_tolerance")? {
            if !(t > 0.0) {
                return Err(Error::config("scan.label_tolerance", "must be positive"));
            }
            scan.label_tolerance = t;
        }

        let detune_r = match src.get("detune.r_values") {
            Some(v) => parse_list("detune.r_values", v, |s| parse_real("detune.r_values", s))?,
            None => Vec::new(),
        };
        if let Some(r) = detune_r.iter().find(|r| !(0.0..=0.5).contains(*r)) {
            return Err(Error::config("detune.r_values", format!("r = {r} outside [0, 0.5]")));
        }
        let detune_times = src.times("detune.times")?.unwrap_or_else(|| vec![TimePoint::QUARTER, TimePoint::HALF]);

        let carpet = carpet_block(&src)?;

        let bench = if src.has_section("bench") {
            let b = BenchBlock {
                points: src.usize_or("bench.points", 4001)?,
                steps_per_revival: src.usize_or("bench.steps_per_revival", 250_000)?,
                checkpoints: src.times("bench.checkpoints")?.unwrap_or_else(|| {
                    vec![TimePoint::QUARTER, TimePoint::HALF, TimePoint::THREE_QUARTERS, TimePoint::FULL]
                }),
                pass_threshold: src.real("bench.pass_threshold")?.unwrap_or(0.999),
            };
            if b.points < 3 {
                return Err(Error::config("bench.points", "need at least 3 points"));
            }
            if b.steps_per_revival == 0 {
                return Err(Error::config("bench.steps_per_revival", "must be at least 1"));
            }
            Some(b)
        } else {
            None
        };

        let order = if src.has_section("order") {
            let o = OrderBlock {
                points: src.usize_or("order.points", 801)?,
                steps_per_revival: src.usize_or("order.steps_per_revival", 40_000)?,
                t_final: src.time("order.t_final")?.unwrap_or(TimePoint::ratio(1, 8)),
            };
            if o.points < 3 {
                return Err(Error::config("order.points", "need at least 3 points"));
            }
            if o.steps_per_revival == 0 {
                return Err(Error::config("order.steps_per_revival", "must be at least 1"));
            }
            Some(o)
        } else {
            None
        };

        let modes = if src.has_section("modes") {
            let counts = parse_list("modes.counts", src.required("modes.counts")?, |s| {
                s.parse::<usize>().map_err(|_| Error::config("modes.counts", format!("`{s}` is not a count")))
            })?;
            let dispersion = match src.get("modes.dispersion").unwrap_or("lattice") {
                "lattice" => Dispersion::Lattice,
                "exact" => Dispersion::Exact,
                other => return Err(Error::config("modes.dispersion", format!("`{other}` is not lattice or exact"))),
            };
            let steps_per_revival = src.usize_or("modes.steps_per_revival", 1)?;
            if steps_per_revival == 0 {
                return Err(Error::config("modes.steps_per_revival", "must be at least 1"));
            }
            Some(ModesBlock { counts, steps_per_revival, dispersion })
        } else {
            None
        };

        Ok(RunConfig {
            potential,
            packet,
            grid,
            times,
            output_dir,
            formats,
            scan,
            detune_r,
            detune_times,
            carpet,
            bench,
            order,
            modes,
            echo: src.values,
        })
    }

    /// Formats to write, falling back to `default` when none were configured.
    pub fn formats_or(&self, default: &[Format]) -> Vec<Format> {
        if self.formats.is_empty() {
            default.to_vec()
        } else {
            self.formats.clone()
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.packet {
            PacketRecipe::Gaussian { phases: PhaseScheme::Random, seed, .. } => Some(seed),
            _ => None,
        }
    }
}

fn potential_block(src: &Source) -> Result<PotentialSpec> {
    let family: Family = src.required("potential.family")?.parse()?;
    let n_modes = src.uint("potential.N")?.ok_or_else(|| Error::config("potential.N", "missing required value"))? as usize;
    let spec = match family {
        Family::InfiniteSquareWell => {
            reject_detuning(src)?;
            PotentialSpec::infinite_square_well(src.real("potential.L")?.unwrap_or(1.0), n_modes)
        }
        Family::PoschlTeller | Family::RosenMorse => {
            let alpha = src.real("potential.alpha")?.ok_or_else(|| Error::config("potential.alpha", "missing required value"))?;
            let m = src.uint("potential.M")?.ok_or_else(|| Error::config("potential.M", "missing required value"))?;
            let m = u32::try_from(m).map_err(|_| Error::config("potential.M", "too large"))?;
            if family == Family::PoschlTeller {
                reject_detuning(src)?;
                PotentialSpec::poschl_teller(alpha, m, n_modes)
            } else {
                PotentialSpec::rosen_morse(alpha, m, src.real("potential.r")?.unwrap_or(0.0), n_modes)
            }
        }
    };
    spec.validate().map_err(|e| match e {
        Error::InvalidParameter { field, reason } => Error::config(format!("potential.{}", potential_key(field)), reason),
        Error::TooManyModes { requested, available } => {
            Error::config("potential.N", format!("{requested} modes requested but only {available} bound states exist"))
        }
        other => other,
    })?;
    Ok(spec)
}

fn reject_detuning(src: &Source) -> Result<()> {
    match src.real("potential.r")? {
        Some(r) if r != 0.0 => Err(Error::config("potential.r", "detuning applies to the RM family only")),
        _ => Ok(()),
    }
}

fn potential_key(field: &str) -> &str {
    match field {
        "m_param" => "M",
        "n_modes" => "N",
        "detune_r" => "r",
        "isw_width" => "L",
        other => other,
    }
}

fn packet_block(src: &Source) -> Result<PacketRecipe> {
    match src.get("packet.weights").unwrap_or("gaussian") {
        "gaussian" => {
            let n_bar = src.real("packet.n_bar")?.ok_or_else(|| Error::config("packet.n_bar", "missing required value"))?;
            let sigma = src.real("packet.sigma")?.ok_or_else(|| Error::config("packet.sigma", "missing required value"))?;
            if !(sigma > 0.0) {
                return Err(Error::config("packet.sigma", "must be positive"));
            }
            let phases = match src.get("packet.phases").unwrap_or("equal") {
                "equal" => PhaseScheme::Equal,
                "random" => PhaseScheme::Random,
                other => return Err(Error::config("packet.phases", format!("`{other}` is not equal or random"))),
            };
            let seed = src.uint("packet.seed")?.unwrap_or(0);
            Ok(PacketRecipe::Gaussian { n_bar, sigma, phases, seed })
        }
        "exponential" => {
            let decay = src.real("packet.decay")?.ok_or_else(|| Error::config("packet.decay", "missing required value"))?;
            if !(decay >= 0.0) {
                return Err(Error::config("packet.decay", "must be non-negative"));
            }
            Ok(PacketRecipe::Exponential { decay })
        }
        other => Err(Error::config("packet.weights", format!("`{other}` is not gaussian or exponential"))),
    }
}

fn time_block(src: &Source) -> Result<Vec<TimePoint>> {
    let listed = src.times("time.times")?;
    let ranged = src.get("time.start").is_some() || src.get("time.stop").is_some() || src.get("time.count").is_some();
    match (listed, ranged) {
        (Some(_), true) => Err(Error::config("time.times", "give either a list or start/stop/count, not both")),
        (Some(ts), false) => Ok(ts),
        (None, true) => {
            let start = src.time("time.start")?.unwrap_or(TimePoint::ZERO);
            let stop = src.time("time.stop")?.ok_or_else(|| Error::config("time.stop", "missing required value"))?;
            let count = src.uint("time.count")?.ok_or_else(|| Error::config("time.count", "missing required value"))? as usize;
            if count == 0 {
                return Err(Error::config("time.count", "time range is empty"));
            }
            if stop.fraction() < start.fraction() {
                return Err(Error::config("time.stop", "must not precede time.start"));
            }
            Ok(time_range(start, stop, count))
        }
        (None, false) => Ok(Vec::new()),
    }
}

fn carpet_block(src: &Source) -> Result<CarpetBlock> {
    let normalization = match src.get("carpet.normalization").unwrap_or("global") {
        "none" => Normalization::None,
        "per_frame" => Normalization::PerFrame,
        "global" => Normalization::Global,
        other => return Err(Error::config("carpet.normalization", format!("`{other}` is not none, per_frame or global"))),
    };
    let gamma = src.real("carpet.gamma")?.unwrap_or(DEFAULT_GAMMA);
    if !(gamma > 0.0) {
        return Err(Error::config("carpet.gamma", "must be positive"));
    }
    let zoom = match src.get("carpet.zoom").unwrap_or("false") {
        "true" | "yes" | "1" => {
            let center = src.time("carpet.zoom_center")?.unwrap_or(TimePoint::QUARTER);
            let half = src.time("carpet.zoom_half_width")?.unwrap_or(TimePoint::ratio(1, 20));
            if !(half.fraction() > 0.0) {
                return Err(Error::config("carpet.zoom_half_width", "must be positive"));
            }
            Some((center, half))
        }
        "false" | "no" | "0" => None,
        other => return Err(Error::config("carpet.zoom", format!("`{other}` is not true or false"))),
    };
    let frames = src.usize_or("carpet.frames", 201)?;
    if frames == 0 {
        return Err(Error::config("carpet.frames", "need at least one frame"));
    }
    Ok(CarpetBlock { normalization, gamma, zoom, frames })
}
