//! Flat `key = value` run configuration.
//!
//! Sections are just key prefixes (`grid.`, `quad.`, `weight.`, `sim.`,
//! `initial.`, `output.`). Every key has a default; unknown keys are errors,
//! so typos cannot silently fall back to defaults. A parsed config
//! re-serializes to a canonical frozen form that parses back identically.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::evolution::{InitialData, SimConfig};
use crate::grid::Grid;
use crate::quadrature::QuadratureSpec;
use crate::weights::{Weight, WeightKind};
use crate::{Error, Result};

/// A validated run configuration: the simulation setup plus output routing.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub out_dir: PathBuf,
}

/// Defaults, one per key. `initial.width` defaults to `l/30` at build time
/// when left empty so it tracks the configured domain.
const DEFAULTS: &[(&str, &str)] = &[
    ("grid.n", "128"),
    ("grid.l", "32"),
    ("quad.n_r", "64"),
    ("quad.n_theta", "32"),
    ("quad.r_min_cells", "0.01"),
    ("quad.r_max_frac", "0.5"),
    ("weight.kind", "unit"),
    ("weight.a", "0.375"),
    ("weight.breakpoints", ""),
    ("weight.levels", ""),
    ("sim.epsilon", "0.1"),
    ("sim.dt_initial", "0.1"),
    ("sim.cfl", "0.4"),
    ("sim.t_end", "1"),
    ("sim.record_every", "1"),
    ("sim.checkpoint_every", "0"),
    ("sim.linear_only", "false"),
    ("initial.kind", "gaussian"),
    ("initial.amplitude", "0.01"),
    ("initial.width", ""),
    ("initial.center_x", ""),
    ("initial.center_y", ""),
    ("initial.modes", ""),
    ("initial.path", ""),
    ("output.dir", "out"),
];

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map: BTreeMap<String, String> =
        DEFAULTS.iter().map(|&(k, v)| (k.to_string(), v.to_string())).collect();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::config(format!("line {}: expected key = value", lineno + 1)));
        };
        let key = k.trim();
        if !map.contains_key(key) {
            return Err(Error::config(format!("unknown key '{key}' (line {})", lineno + 1)));
        }
        map.insert(key.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    map[key]
        .parse()
        .map_err(|_| Error::config(format!("key '{key}': cannot parse '{}'", map[key])))
}

fn num_list(map: &BTreeMap<String, String>, key: &str) -> Result<Vec<f64>> {
    let s = map[key].trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::config(format!("key '{key}': cannot parse '{p}'")))
        })
        .collect()
}

fn build_weight(map: &BTreeMap<String, String>) -> Result<Weight> {
    match map["weight.kind"].as_str() {
        "unit" => Ok(Weight::unit()),
        "log_pow" => Weight::log_pow(num(map, "weight.a")?),
        "tail_built" => {
            let breakpoints = num_list(map, "weight.breakpoints")?;
            let levels = num_list(map, "weight.levels")?;
            Weight::new(WeightKind::TailBuilt { breakpoints, levels })
        }
        other => Err(Error::config(format!(
            "key 'weight.kind': '{other}' is not unit | log_pow | tail_built"
        ))),
    }
}

fn build_initial(map: &BTreeMap<String, String>, grid: Grid) -> Result<InitialData> {
    let center = |map: &BTreeMap<String, String>| -> Result<(f64, f64)> {
        let cx = if map["initial.center_x"].is_empty() {
            grid.l / 2.0
        } else {
            num(map, "initial.center_x")?
        };
        let cy = if map["initial.center_y"].is_empty() {
            grid.l / 2.0
        } else {
            num(map, "initial.center_y")?
        };
        Ok((cx, cy))
    };
    let width = if map["initial.width"].is_empty() {
        grid.l / 30.0
    } else {
        num(map, "initial.width")?
    };
    match map["initial.kind"].as_str() {
        "gaussian" => Ok(InitialData::Gaussian {
            amplitude: num(map, "initial.amplitude")?,
            width,
            center: center(map)?,
        }),
        "mode_sum" => {
            // entries "k1:k2:amplitude:phase" separated by ';'
            let mut modes = Vec::new();
            for part in map["initial.modes"].split(';') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let fields: Vec<&str> = part.split(':').map(str::trim).collect();
                if fields.len() != 4 {
                    return Err(Error::config(format!(
                        "key 'initial.modes': entry '{part}' is not k1:k2:amplitude:phase"
                    )));
                }
                let bad =
                    || Error::config(format!("key 'initial.modes': cannot parse '{part}'"));
                modes.push((
                    (
                        fields[0].parse::<i64>().map_err(|_| bad())?,
                        fields[1].parse::<i64>().map_err(|_| bad())?,
                    ),
                    fields[2].parse::<f64>().map_err(|_| bad())?,
                    fields[3].parse::<f64>().map_err(|_| bad())?,
                ));
            }
            Ok(InitialData::ModeSum(modes))
        }
        "from_file" => {
            if map["initial.path"].is_empty() {
                return Err(Error::config("key 'initial.path' required for from_file"));
            }
            Ok(InitialData::FromFile(PathBuf::from(&map["initial.path"])))
        }
        other => Err(Error::config(format!(
            "key 'initial.kind': '{other}' is not gaussian | mode_sum | from_file"
        ))),
    }
}

/// Parse and validate a config text into a frozen [`RunConfig`].
pub fn parse(text: &str) -> Result<RunConfig> {
    let map = parse_pairs(text)?;
    let grid = Grid::new(num(&map, "grid.n")?, num(&map, "grid.l")?)?;
    let quad = QuadratureSpec::with_cells(
        grid,
        num(&map, "quad.n_r")?,
        num(&map, "quad.n_theta")?,
        num(&map, "quad.r_min_cells")?,
        num(&map, "quad.r_max_frac")?,
    )?;
    let weight = build_weight(&map)?;
    let initial = build_initial(&map, grid)?;
    let out_dir = PathBuf::from(&map["output.dir"]);
    let linear_only = match map["sim.linear_only"].as_str() {
        "true" => true,
        "false" => false,
        other => {
            return Err(Error::config(format!(
                "key 'sim.linear_only': '{other}' is not true | false"
            )))
        }
    };
    let sim = SimConfig {
        grid,
        epsilon: num(&map, "sim.epsilon")?,
        weight,
        quad,
        dt_initial: num(&map, "sim.dt_initial")?,
        cfl: num(&map, "sim.cfl")?,
        t_end: num(&map, "sim.t_end")?,
        record_every: num(&map, "sim.record_every")?,
        checkpoint_every: num(&map, "sim.checkpoint_every")?,
        checkpoint_path: Some(out_dir.join("state.ck")),
        initial,
        linear_only,
    };
    sim.validate()?;
    Ok(RunConfig { sim, out_dir })
}

fn fmt_f64(v: f64) -> String {
    // shortest representation that round-trips
    let s = format!("{v}");
    debug_assert_eq!(s.parse::<f64>().unwrap(), v);
    s
}

impl RunConfig {
    /// Canonical text form; `parse(to_text())` reproduces the config.
    pub fn to_text(&self) -> String {
        let s = &self.sim;
        let g = s.grid;
        let mut lines = vec![
            format!("grid.n = {}", g.n),
            format!("grid.l = {}", fmt_f64(g.l)),
            format!("quad.n_r = {}", s.quad.n_r),
            format!("quad.n_theta = {}", s.quad.n_theta),
            format!("quad.r_min_cells = {}", fmt_f64(s.quad.r_min / g.h())),
            format!("quad.r_max_frac = {}", fmt_f64(s.quad.r_max / g.l)),
        ];
        match s.weight.kind() {
            WeightKind::Unit => lines.push("weight.kind = unit".into()),
            WeightKind::LogPow { a } => {
                lines.push("weight.kind = log_pow".into());
                lines.push(format!("weight.a = {}", fmt_f64(*a)));
            }
            WeightKind::TailBuilt { breakpoints, levels } => {
                let csv = |v: &[f64]| {
                    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
                };
                lines.push("weight.kind = tail_built".into());
                lines.push(format!("weight.breakpoints = {}", csv(breakpoints)));
                lines.push(format!("weight.levels = {}", csv(levels)));
            }
        }
        lines.push(format!("sim.epsilon = {}", fmt_f64(s.epsilon)));
        lines.push(format!("sim.dt_initial = {}", fmt_f64(s.dt_initial)));
        lines.push(format!("sim.cfl = {}", fmt_f64(s.cfl)));
        lines.push(format!("sim.t_end = {}", fmt_f64(s.t_end)));
        lines.push(format!("sim.record_every = {}", s.record_every));
        lines.push(format!("sim.checkpoint_every = {}", s.checkpoint_every));
        lines.push(format!("sim.linear_only = {}", s.linear_only));
        match &s.initial {
            InitialData::Gaussian { amplitude, width, center } => {
                lines.push("initial.kind = gaussian".into());
                lines.push(format!("initial.amplitude = {}", fmt_f64(*amplitude)));
                lines.push(format!("initial.width = {}", fmt_f64(*width)));
                lines.push(format!("initial.center_x = {}", fmt_f64(center.0)));
                lines.push(format!("initial.center_y = {}", fmt_f64(center.1)));
            }
            InitialData::MultiBump(list) => {
                // flat keys cover one bump; a sum is built programmatically
                if let Some((a, w, c)) = list.first() {
                    lines.push("initial.kind = gaussian".into());
                    lines.push(format!("initial.amplitude = {}", fmt_f64(*a)));
                    lines.push(format!("initial.width = {}", fmt_f64(*w)));
                    lines.push(format!("initial.center_x = {}", fmt_f64(c.0)));
                    lines.push(format!("initial.center_y = {}", fmt_f64(c.1)));
                }
            }
            InitialData::ModeSum(modes) => {
                lines.push("initial.kind = mode_sum".into());
                let entries: Vec<String> = modes
                    .iter()
                    .map(|((k1, k2), a, ph)| {
                        format!("{k1}:{k2}:{}:{}", fmt_f64(*a), fmt_f64(*ph))
                    })
                    .collect();
                lines.push(format!("initial.modes = {}", entries.join(";")));
            }
            InitialData::FromFile(path) => {
                lines.push("initial.kind = from_file".into());
                lines.push(format!("initial.path = {}", path.display()));
            }
        }
        lines.push(format!("output.dir = {}", self.out_dir.display()));
        lines.push(String::new());
        lines.join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_round_trip() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.sim.grid.n, 128);
        assert_eq!(cfg.sim.quad.n_r, 64);
        assert_eq!(cfg.sim.epsilon, 0.1);
        let text = cfg.to_text();
        let again = parse(&text).unwrap();
        assert_eq!(text, again.to_text());
    }

    #[test]
    fn overrides_comments_and_round_trip() {
        let text = "\
# a comment
grid.n = 32       # inline comment
grid.l = 16
weight.kind = log_pow
weight.a = 0.25
sim.t_end = 2.5
initial.kind = mode_sum
initial.modes = 1:0:0.1:0 ; 2:-1:0.05:1.5
output.dir = /tmp/somewhere
";
        let cfg = parse(text).unwrap();
        assert_eq!(cfg.sim.grid.n, 32);
        assert_eq!(cfg.sim.t_end, 2.5);
        assert!(matches!(cfg.sim.weight.kind(), WeightKind::LogPow { a } if *a == 0.25));
        let InitialData::ModeSum(modes) = &cfg.sim.initial else {
            panic!("wrong initial kind")
        };
        assert_eq!(modes.len(), 2);
        assert_eq!(modes[1], ((2, -1), 0.05, 1.5));
        let again = parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg.to_text(), again.to_text());
    }

    #[test]
    fn errors_name_the_offending_key() {
        let err = parse("grid.m = 4").unwrap_err().to_string();
        assert!(err.contains("grid.m"), "{err}");
        let err = parse("grid.n = four").unwrap_err().to_string();
        assert!(err.contains("grid.n"), "{err}");
        let err = parse("weight.kind = cubic").unwrap_err().to_string();
        assert!(err.contains("weight.kind"), "{err}");
        let err = parse("initial.kind = from_file").unwrap_err().to_string();
        assert!(err.contains("initial.path"), "{err}");
        let err = parse("sim.epsilon = 2").unwrap_err().to_string();
        assert!(err.contains("epsilon"), "{err}");
        assert!(parse("grid.n 4").is_err());
    }
}
