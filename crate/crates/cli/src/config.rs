//! Flat `key = value` configuration files.
//!
//! Keys use dotted section prefixes (`channel.los.exponent = 2.5`). Lines
//! starting with `#` are comments. Omitted keys take the defaults listed in
//! [`KEYS`]; lists are comma separated.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use wpt_relay::channel::{ChannelParams, LinkBudget};
use wpt_relay::mechanism::Mechanism;
use wpt_relay::sim::{DirectDistance, Placement, Point, SimConfig};

use crate::error::CliError;

/// Every recognized key with its default value.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "1"),
    ("trials", "10000"),
    ("mode", "sweep"),
    ("output.path", "results.csv"),
    ("output.mechanisms", "myerson,vickrey,perfect_info,direct"),
    ("budget.max_trials", "200000000"),
    ("sweep.n", "0,1,2,3,4,5,6,7,8,9,10"),
    ("sweep.alpha", "0.1,0.2,0.3,0.4"),
    ("sweep.gamma", "0.2,0.6,1,1.4"),
    ("link.gamma_th_db", "33.18"),
    ("link.noise_dbm", "-75"),
    ("link.p_max_mw", "100"),
    ("channel.los.intercept_db", "0"),
    ("channel.los.exponent", "2.5"),
    ("channel.los.fading_std_db", "8.66"),
    ("channel.nlos.intercept_db", "-25"),
    ("channel.nlos.exponent", "5.76"),
    ("channel.nlos.fading_std_db", "9.06"),
    ("wpt.a_r_cm2", "1"),
    ("geometry.d_source_m", "2.85"),
    ("geometry.direct_distance", "squared_norm"),
    ("geometry.min_link_distance_m", "1"),
    ("placement.kind", "annulus"),
    ("placement.center_x_m", "1.425"),
    ("placement.center_y_m", "0"),
    ("placement.inner_radius_m", "1.7"),
    ("placement.outer_radius_m", "2.7"),
    ("placement.fixed", "2.2:0.6,1:1.6,0.4:-1.5,2:-2"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sweep,
    SelectionFreq,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "sweep" => Some(Mode::Sweep),
            "selection-freq" => Some(Mode::SelectionFreq),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Sweep => "sweep",
            Mode::SelectionFreq => "selection-freq",
        }
    }
}

/// A validated experiment sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Per-cell values of `n_candidates`, `alpha` and `gamma_scale` are
    /// overwritten from the sweep lists.
    pub base: SimConfig,
    pub sweep_n: Vec<usize>,
    pub sweep_alpha: Vec<f64>,
    pub sweep_gamma: Vec<f64>,
    pub output_path: PathBuf,
    pub mode: Mode,
    pub mechanisms: Vec<Mechanism>,
    /// Upper bound on cells times trials.
    pub max_trials: u64,
    /// Candidate positions used in selection-frequency mode.
    pub fixed_positions: Vec<Point>,
    /// Placement used in sweep mode.
    pub placement_kind: PlacementKind,
    /// Link budget and aperture as written in the file, kept so that the
    /// rendered manifest reproduces the same floats.
    pub units: ConfigUnits,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigUnits {
    pub gamma_th_db: f64,
    pub noise_dbm: f64,
    pub p_max_mw: f64,
    pub a_r_cm2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementKind {
    Annulus,
    Disk,
    Fixed,
}

impl PlacementKind {
    fn name(self) -> &'static str {
        match self {
            PlacementKind::Annulus => "annulus",
            PlacementKind::Disk => "disk",
            PlacementKind::Fixed => "fixed",
        }
    }
}

/// One `(n, alpha, gamma)` combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub config: SimConfig,
}

impl SweepSpec {
    /// Candidate counts actually simulated.
    pub fn effective_n(&self) -> Vec<usize> {
        match self.mode {
            Mode::Sweep => self.sweep_n.clone(),
            Mode::SelectionFreq => vec![self.fixed_positions.len()],
        }
    }

    /// Cells in `(n, alpha, gamma)` order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for n in self.effective_n() {
            for &alpha in &self.sweep_alpha {
                for &gamma in &self.sweep_gamma {
                    let placement = match self.mode {
                        Mode::SelectionFreq => Placement::Fixed(self.fixed_positions.clone()),
                        Mode::Sweep => match &self.base.placement {
                            Placement::Fixed(p) => Placement::Fixed(p[..n.min(p.len())].to_vec()),
                            other => other.clone(),
                        },
                    };
                    cells.push(Cell {
                        n,
                        alpha,
                        gamma,
                        config: SimConfig {
                            n_candidates: n,
                            alpha,
                            gamma_scale: gamma,
                            placement,
                            ..self.base.clone()
                        },
                    });
                }
            }
        }
        cells
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |msg: String| Err(CliError::Validation(msg));
        if self.sweep_n.is_empty() || self.sweep_alpha.is_empty() || self.sweep_gamma.is_empty() {
            return invalid("sweep lists must be nonempty".into());
        }
        if self.mechanisms.is_empty() {
            return invalid("output.mechanisms must be nonempty".into());
        }
        for &a in &self.sweep_alpha {
            if !(0.0..=1.0).contains(&a) {
                return invalid(format!("sweep.alpha: alpha ∈ [0,1] violated by {a}"));
            }
            if a == 0.0 {
                return invalid(
                    "sweep.alpha: alpha must be > 0, no candidate breaks even without harvesting"
                        .into(),
                );
            }
        }
        for &g in &self.sweep_gamma {
            if !(g > 0.0 && g.is_finite()) {
                return invalid(format!("sweep.gamma: gamma > 0 violated by {g}"));
            }
        }
        if self.mode == Mode::SelectionFreq && self.fixed_positions.is_empty() {
            return invalid(
                "placement.fixed: selection-freq mode needs at least one position".into(),
            );
        }
        if let Placement::Fixed(p) = &self.base.placement {
            if let Some(&n) = self.sweep_n.iter().find(|&&n| n > p.len()) {
                return invalid(format!(
                    "sweep.n: {n} candidates requested but placement.fixed lists {}",
                    p.len()
                ));
            }
        }
        let cells = self.effective_n().len() * self.sweep_alpha.len() * self.sweep_gamma.len();
        let total = cells as u64 * self.base.n_trials as u64;
        if total > self.max_trials {
            return invalid(format!(
                "budget.max_trials: {cells} cells x {} trials = {total} exceeds {}",
                self.base.n_trials, self.max_trials
            ));
        }
        for cell in self.cells() {
            cell.config
                .validate()
                .map_err(|e| CliError::Validation(e.to_string()))?;
        }
        Ok(())
    }

    /// Renders the resolved configuration in the input format.
    pub fn to_config_text(&self) -> String {
        let b = &self.base;
        let join = |v: Vec<String>| v.join(",");
        let (cx, cy, inner, outer) = match &b.placement {
            Placement::Annulus {
                center,
                inner,
                outer,
            } => (center.x, center.y, *inner, *outer),
            Placement::Fixed(_) => (b.d_source / 2.0, 0.0, 0.0, 1.0),
        };
        let fixed = match &b.placement {
            Placement::Fixed(p) => p.clone(),
            _ => self.fixed_positions.clone(),
        };
        let values: Vec<(&str, String)> = vec![
            ("seed", b.seed.to_string()),
            ("trials", b.n_trials.to_string()),
            ("mode", self.mode.name().into()),
            ("output.path", self.output_path.display().to_string()),
            (
                "output.mechanisms",
                join(
                    self.mechanisms
                        .iter()
                        .map(|m| m.name().to_string())
                        .collect(),
                ),
            ),
            ("budget.max_trials", self.max_trials.to_string()),
            (
                "sweep.n",
                join(self.sweep_n.iter().map(|n| n.to_string()).collect()),
            ),
            (
                "sweep.alpha",
                join(self.sweep_alpha.iter().map(|a| a.to_string()).collect()),
            ),
            (
                "sweep.gamma",
                join(self.sweep_gamma.iter().map(|g| g.to_string()).collect()),
            ),
            ("link.gamma_th_db", self.units.gamma_th_db.to_string()),
            ("link.noise_dbm", self.units.noise_dbm.to_string()),
            ("link.p_max_mw", self.units.p_max_mw.to_string()),
            (
                "channel.los.intercept_db",
                b.los_params.pl_intercept_db.to_string(),
            ),
            ("channel.los.exponent", b.los_params.pl_exponent.to_string()),
            (
                "channel.los.fading_std_db",
                b.los_params.fading_std_db.to_string(),
            ),
            (
                "channel.nlos.intercept_db",
                b.nlos_params.pl_intercept_db.to_string(),
            ),
            (
                "channel.nlos.exponent",
                b.nlos_params.pl_exponent.to_string(),
            ),
            (
                "channel.nlos.fading_std_db",
                b.nlos_params.fading_std_db.to_string(),
            ),
            ("wpt.a_r_cm2", self.units.a_r_cm2.to_string()),
            ("geometry.d_source_m", b.d_source.to_string()),
            ("geometry.direct_distance", b.direct_distance.name().into()),
            (
                "geometry.min_link_distance_m",
                b.min_link_distance.to_string(),
            ),
            ("placement.kind", self.placement_kind.name().into()),
            ("placement.center_x_m", cx.to_string()),
            ("placement.center_y_m", cy.to_string()),
            ("placement.inner_radius_m", inner.to_string()),
            ("placement.outer_radius_m", outer.to_string()),
            (
                "placement.fixed",
                join(fixed.iter().map(|p| format!("{}:{}", p.x, p.y)).collect()),
            ),
        ];
        let mut out = String::from("# resolved wpt-relay configuration\n");
        for (k, v) in values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Raw parsed values, still text.
struct RawConfig {
    values: Vec<(String, String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut values: Vec<(String, String, usize)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Parse {
                    line: line_no,
                    key: line.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(CliError::Parse {
                    line: line_no,
                    key: key.into(),
                    message: "unknown key".into(),
                });
            }
            if values.iter().any(|(k, _, _)| k == key) {
                return Err(CliError::Parse {
                    line: line_no,
                    key: key.into(),
                    message: "duplicate key".into(),
                });
            }
            values.push((key.into(), value.into(), line_no));
        }
        Ok(RawConfig { values })
    }

    /// Value for `key` and the line it came from (0 for defaults).
    fn get(&self, key: &str) -> (&str, usize) {
        if let Some((_, v, line)) = self.values.iter().find(|(k, _, _)| k == key) {
            return (v, *line);
        }
        let default = KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, d)| *d)
            .unwrap_or_else(|| panic!("no default for {key}"));
        (default, 0)
    }

    fn has(&self, key: &str) -> bool {
        self.values.iter().any(|(k, _, _)| k == key)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let (v, line) = self.get(key);
        v.parse().map_err(|_| CliError::Parse {
            line,
            key: key.into(),
            message: format!("cannot parse {v:?}"),
        })
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, CliError> {
        let (v, line) = self.get(key);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|_| CliError::Parse {
                    line,
                    key: key.into(),
                    message: format!("cannot parse list item {s:?}"),
                })
            })
            .collect()
    }

    fn points(&self, key: &str) -> Result<Vec<Point>, CliError> {
        let (v, line) = self.get(key);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                let err = || CliError::Parse {
                    line,
                    key: key.into(),
                    message: format!("expected `x:y`, got {s:?}"),
                };
                let (x, y) = s.split_once(':').ok_or_else(err)?;
                Ok(Point::new(
                    x.trim().parse().map_err(|_| err())?,
                    y.trim().parse().map_err(|_| err())?,
                ))
            })
            .collect()
    }

    fn choice<T>(&self, key: &str, f: impl Fn(&str) -> Option<T>) -> Result<T, CliError> {
        let (v, line) = self.get(key);
        f(v).ok_or_else(|| CliError::Parse {
            line,
            key: key.into(),
            message: format!("unrecognized value {v:?}"),
        })
    }
}

fn mechanism_by_name(s: &str) -> Option<Mechanism> {
    Mechanism::ALL.into_iter().find(|m| m.name() == s)
}

/// Parses configuration text into a validated [`SweepSpec`].
pub fn parse_config(text: &str) -> Result<SweepSpec, CliError> {
    let raw = RawConfig::parse(text)?;
    let channel = |prefix: &str| -> Result<ChannelParams, CliError> {
        ChannelParams::new(
            raw.parsed(&format!("{prefix}.intercept_db"))?,
            raw.parsed(&format!("{prefix}.exponent"))?,
            raw.parsed(&format!("{prefix}.fading_std_db"))?,
        )
        .map_err(|e| CliError::Validation(format!("{prefix}: {e}")))
    };
    let los_params = channel("channel.los")?;
    let nlos_params = channel("channel.nlos")?;
    let units = ConfigUnits {
        gamma_th_db: raw.parsed("link.gamma_th_db")?,
        noise_dbm: raw.parsed("link.noise_dbm")?,
        p_max_mw: raw.parsed("link.p_max_mw")?,
        a_r_cm2: raw.parsed("wpt.a_r_cm2")?,
    };
    let budget = LinkBudget::from_config_units(units.gamma_th_db, units.noise_dbm, units.p_max_mw)
        .map_err(|e| CliError::Validation(format!("link: {e}")))?;

    let d_source: f64 = raw.parsed("geometry.d_source_m")?;
    let center_x = if raw.has("placement.center_x_m") {
        raw.parsed("placement.center_x_m")?
    } else {
        d_source / 2.0
    };
    let center = Point::new(center_x, raw.parsed("placement.center_y_m")?);
    let fixed_positions = raw.points("placement.fixed")?;
    let placement_kind = raw.choice("placement.kind", |s| match s {
        "annulus" => Some(PlacementKind::Annulus),
        "disk" => Some(PlacementKind::Disk),
        "fixed" => Some(PlacementKind::Fixed),
        _ => None,
    })?;
    let placement = match placement_kind {
        PlacementKind::Annulus => Placement::Annulus {
            center,
            inner: raw.parsed("placement.inner_radius_m")?,
            outer: raw.parsed("placement.outer_radius_m")?,
        },
        PlacementKind::Disk => Placement::disk(center, raw.parsed("placement.outer_radius_m")?),
        PlacementKind::Fixed => Placement::Fixed(fixed_positions.clone()),
    };

    let trials: usize = raw.parsed("trials")?;
    let base = SimConfig {
        n_candidates: 0,
        d_source,
        direct_distance: raw.choice("geometry.direct_distance", |s| match s {
            "squared_norm" => Some(DirectDistance::SquaredNorm),
            "euclidean" => Some(DirectDistance::Euclidean),
            _ => None,
        })?,
        min_link_distance: raw.parsed("geometry.min_link_distance_m")?,
        placement,
        los_params,
        nlos_params,
        budget,
        alpha: 0.3,
        a_r: units.a_r_cm2 * 1e-4,
        gamma_scale: 1.0,
        n_trials: trials,
        seed: raw.parsed("seed")?,
    };
    let spec = SweepSpec {
        base,
        sweep_n: raw.list("sweep.n")?,
        sweep_alpha: raw.list("sweep.alpha")?,
        sweep_gamma: raw.list("sweep.gamma")?,
        output_path: PathBuf::from(raw.get("output.path").0),
        mode: raw.choice("mode", Mode::parse)?,
        mechanisms: {
            let (v, line) = raw.get("output.mechanisms");
            v.split(',')
                .map(str::trim)
                .map(|s| {
                    mechanism_by_name(s).ok_or_else(|| CliError::Parse {
                        line,
                        key: "output.mechanisms".into(),
                        message: format!("unknown mechanism {s:?}"),
                    })
                })
                .collect::<Result<_, _>>()?
        },
        max_trials: raw.parsed("budget.max_trials")?,
        fixed_positions,
        placement_kind,
        units,
    };
    spec.validate()?;
    Ok(spec)
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<SweepSpec, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
