//! Plain-text `key = value` run configuration with validation.

use crate::background::MetricParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub m: f64,
    pub lambda: f64,
    /// Half-width of the evolution domain [-x, x].
    pub x: f64,
    pub points: usize,
    /// Time step; `None` means 0.5 * grid spacing.
    pub dt: Option<f64>,
    /// Cutoff support half-width.
    pub a: f64,
    pub search_re_min: f64,
    pub search_re_max: f64,
    pub search_im_min: f64,
    pub search_im_max: f64,
    pub refine_tol: f64,
    pub output_dir: String,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            m: 1.0,
            lambda: 0.04,
            x: 60.0,
            points: 4096,
            dt: None,
            a: 10.0,
            search_re_min: 0.05,
            search_re_max: 2.0,
            search_im_min: -0.078,
            search_im_max: -0.002,
            refine_tol: 1e-9,
            output_dir: "out".into(),
            format: OutputFormat::Both,
        }
    }
}

impl RunConfig {
    pub fn grid_spacing(&self) -> f64 {
        2.0 * self.x / (self.points - 1) as f64
    }

    pub fn time_step(&self) -> f64 {
        self.dt.unwrap_or(0.5 * self.grid_spacing())
    }

    pub fn validate(&self) -> Result<()> {
        MetricParams::new(self.m, self.lambda)?;
        if self.points < 16 {
            return Err(Error::Config(format!("points = {} too few", self.points)));
        }
        if !(self.x > 0.0 && self.a > 0.0) {
            return Err(Error::Config("x and a must be positive".into()));
        }
        if 2.0 * self.a >= self.x {
            return Err(Error::Config(format!(
                "cutoff must sit inside the domain: need 2a < x, got a = {}, x = {}",
                self.a, self.x
            )));
        }
        let h = self.grid_spacing();
        if self.time_step() > 0.9 * h {
            return Err(Error::Config(format!(
                "CFL violation: dt = {} exceeds 0.9 h = {}",
                self.time_step(),
                0.9 * h
            )));
        }
        if self.search_re_min >= self.search_re_max
            || self.search_im_min >= self.search_im_max
        {
            return Err(Error::Config("empty search region".into()));
        }
        if self.refine_tol <= 0.0 {
            return Err(Error::Config("refine_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Parse `key = value` lines; `#` starts a comment; blank lines ignored.
/// Unknown keys and malformed lines are reported with their line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let n = ln + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {n}: expected key = value")))?;
        let (key, value) = (key.trim(), value.trim());
        let fnum = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("line {n}: bad number '{v}'")))
        };
        match key {
            "m" => cfg.m = fnum(value)?,
            "lambda" => cfg.lambda = fnum(value)?,
            "x" => cfg.x = fnum(value)?,
            "points" => {
                cfg.points = value
                    .parse()
                    .map_err(|_| Error::Config(format!("line {n}: bad integer '{value}'")))?
            }
            "dt" => cfg.dt = Some(fnum(value)?),
            "a" => cfg.a = fnum(value)?,
            "search_re_min" => cfg.search_re_min = fnum(value)?,
            "search_re_max" => cfg.search_re_max = fnum(value)?,
            "search_im_min" => cfg.search_im_min = fnum(value)?,
            "search_im_max" => cfg.search_im_max = fnum(value)?,
            "refine_tol" => cfg.refine_tol = fnum(value)?,
            "output_dir" => cfg.output_dir = value.to_string(),
            "format" => {
                cfg.format = match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    "both" => OutputFormat::Both,
                    other => {
                        return Err(Error::Config(format!(
                            "line {n}: format must be csv|json|both, got '{other}'"
                        )))
                    }
                }
            }
            other => return Err(Error::Config(format!("line {n}: unknown key '{other}'"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Full-precision serialization; `parse_config(serialize_config(c)) == c`.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    s.push_str(&format!("m = {}\n", cfg.m));
    s.push_str(&format!("lambda = {}\n", cfg.lambda));
    s.push_str(&format!("x = {}\n", cfg.x));
    s.push_str(&format!("points = {}\n", cfg.points));
    if let Some(dt) = cfg.dt {
        s.push_str(&format!("dt = {dt}\n"));
    }
    s.push_str(&format!("a = {}\n", cfg.a));
    s.push_str(&format!("search_re_min = {}\n", cfg.search_re_min));
    s.push_str(&format!("search_re_max = {}\n", cfg.search_re_max));
    s.push_str(&format!("search_im_min = {}\n", cfg.search_im_min));
    s.push_str(&format!("search_im_max = {}\n", cfg.search_im_max));
    s.push_str(&format!("refine_tol = {}\n", cfg.refine_tol));
    s.push_str(&format!("output_dir = {}\n", cfg.output_dir));
    s.push_str(&format!("format = {}\n", cfg.format.as_str()));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(
            (cfg.m, cfg.lambda, cfg.x, cfg.points, cfg.a),
            (1.0, 0.04, 60.0, 4096, 10.0)
        );
    }

    #[test]
    fn inadmissible_cosmological_constant_rejected() {
        let err = parse_config("lambda = 0.2").unwrap_err();
        assert!(matches!(err, Error::Inadmissible(_)), "{err}");
    }

    #[test]
    fn unknown_key_reports_line_number() {
        let err = parse_config("m = 1\nbogus = 7\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn cfl_and_cutoff_constraints_enforced() {
        assert!(parse_config("dt = 1.0").is_err());
        assert!(parse_config("a = 40").is_err());
    }

    #[test]
    fn serialize_parse_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.lambda = 0.037;
        cfg.points = 2048;
        cfg.dt = Some(0.013);
        cfg.format = OutputFormat::Csv;
        cfg.output_dir = "artifacts".into();
        let text = serialize_config(&cfg);
        let back = parse_config(&text).unwrap();
        assert_eq!(back, cfg);
        // idempotent: serializing again gives identical bytes
        assert_eq!(serialize_config(&back), text);
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let cfg = parse_config("# comment\n\nm = 2 # inline\nlambda = 0.01\n").unwrap();
        assert_eq!((cfg.m, cfg.lambda), (2.0, 0.01));
    }
}
