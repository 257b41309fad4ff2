use crate::error::{Error, Result};
use crate::geometry::{HamiltonianVariant, TorusShape};
use crate::integrator::IntegratorOptions;
use crate::spectrum::SpectrumOptions;
use std::ops::RangeInclusive;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    Torus,
    Ring,
    Ribbon,
}

impl Solver {
    pub fn label(self) -> &'static str {
        match self {
            Solver::Torus => "torus",
            Solver::Ring => "ring",
            Solver::Ribbon => "ribbon",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s.trim() {
            "torus" => Ok(Solver::Torus),
            "ring" => Ok(Solver::Ring),
            "ribbon" => Ok(Solver::Ribbon),
            other => Err(Error::Config(format!("unknown solver '{other}' (expected torus, ring or ribbon)"))),
        }
    }
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Plotdata,
}

impl OutputFormat {
    pub fn from_label(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "plotdata" => Ok(OutputFormat::Plotdata),
            other => Err(Error::Config(format!("unknown format '{other}' (expected csv or plotdata)"))),
        }
    }
}

/// `on`, `off` or `both`.
pub fn parse_curvature(s: &str) -> Result<Vec<bool>> {
    match s.trim() {
        "on" => Ok(vec![true]),
        "off" => Ok(vec![false]),
        "both" => Ok(vec![true, false]),
        other => Err(Error::Config(format!("unknown curvature setting '{other}' (expected on, off or both)"))),
    }
}

fn parse_list<T>(s: &str, one: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(one).collect()
}

pub fn parse_solvers(s: &str) -> Result<Vec<Solver>> {
    parse_list(s, Solver::from_label)
}

pub fn parse_variants(s: &str) -> Result<Vec<HamiltonianVariant>> {
    parse_list(s, |v| {
        HamiltonianVariant::from_label(v.trim())
            .ok_or_else(|| Error::Config(format!("unknown variant '{}' (expected printed or rederived)", v.trim())))
    })
}

/// Everything needed to run one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_steps: usize,
    pub nu_max: u32,
    pub fixed_nu: Option<i32>,
    /// Curvature settings for torus rows; `true` first when both are requested.
    pub curvature: Vec<bool>,
    pub variants: Vec<HamiltonianVariant>,
    pub solvers: Vec<Solver>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// Relative integration tolerance.
    pub tol: f64,
    pub root_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            alpha: 0.5,
            beta: 0.1,
            gamma_min: 0.0,
            gamma_max: 2.104,
            gamma_steps: 41,
            nu_max: 10,
            fixed_nu: None,
            curvature: vec![true],
            variants: vec![HamiltonianVariant::AsPrinted],
            solvers: vec![Solver::Torus],
            output: None,
            format: OutputFormat::Csv,
            tol: 1e-10,
            root_tol: 1e-9,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma_steps == 0 {
            return Err(Error::Config("gamma-steps must be at least 1".into()));
        }
        if !(self.gamma_min.is_finite() && self.gamma_max.is_finite()) {
            return Err(Error::Config("gamma bounds must be finite".into()));
        }
        if self.gamma_steps > 1 && self.gamma_max < self.gamma_min {
            return Err(Error::Config(format!("gamma-max {} is below gamma-min {}", self.gamma_max, self.gamma_min)));
        }
        if self.solvers.is_empty() {
            return Err(Error::Config("no solver selected".into()));
        }
        if self.solvers.contains(&Solver::Torus) {
            TorusShape::new(self.alpha, self.beta)?;
            if self.curvature.is_empty() || self.variants.is_empty() {
                return Err(Error::Config("torus rows need a curvature setting and a variant".into()));
            }
        }
        if self.solvers.contains(&Solver::Ring) && !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidShape(format!("ring needs 0 < alpha < 1, got {}", self.alpha)));
        }
        if self.solvers.contains(&Solver::Ribbon) && !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidShape(format!(
                "ribbon needs alpha > 0 and beta > 0, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        if let Some(nu) = self.fixed_nu {
            if nu.unsigned_abs() > 1_000_000 {
                return Err(Error::Config(format!("fixed nu {nu} is out of range")));
            }
        }
        if self.nu_max > 1_000_000 {
            return Err(Error::Config(format!("nu-max {} is out of range", self.nu_max)));
        }
        self.spectrum_options()?;
        Ok(())
    }

    /// The `gamma` grid; the last point is exactly `gamma_max`.
    pub fn gamma_grid(&self) -> Vec<f64> {
        let n = self.gamma_steps;
        if n == 1 {
            return vec![self.gamma_min];
        }
        let span = self.gamma_max - self.gamma_min;
        (0..n)
            .map(|i| if i + 1 == n { self.gamma_max } else { self.gamma_min + span * i as f64 / (n - 1) as f64 })
            .collect()
    }

    pub fn nu_range(&self) -> RangeInclusive<i32> {
        match self.fixed_nu {
            Some(nu) => nu..=nu,
            None => -(self.nu_max as i32)..=self.nu_max as i32,
        }
    }

    pub fn spectrum_options(&self) -> Result<SpectrumOptions> {
        if !(self.root_tol > 0.0 && self.root_tol.is_finite()) {
            return Err(Error::Config(format!("root-tol must be positive, got {}", self.root_tol)));
        }
        Ok(SpectrumOptions {
            integrator: IntegratorOptions::with_tol(self.tol)?,
            root_tol: self.root_tol,
            ..SpectrumOptions::default()
        })
    }
}

/// Optional settings from a config file or the command line, layered onto a
/// [`SweepConfig`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub gamma_steps: Option<usize>,
    pub nu_max: Option<u32>,
    pub fixed_nu: Option<i32>,
    pub curvature: Option<Vec<bool>>,
    pub variants: Option<Vec<HamiltonianVariant>>,
    pub solvers: Option<Vec<Solver>>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub tol: Option<f64>,
    pub root_tol: Option<f64>,
}

impl ConfigOverrides {
    pub fn apply(&self, cfg: &mut SweepConfig) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        take!(
            alpha,
            beta,
            gamma_min,
            gamma_max,
            gamma_steps,
            nu_max,
            curvature,
            variants,
            solvers,
            format,
            tol,
            root_tol
        );
        if self.fixed_nu.is_some() {
            cfg.fixed_nu = self.fixed_nu;
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
    }

    /// Parses `key = value` lines. Blank lines and lines starting with `#`
    /// are skipped; keys use the command-line spelling, with `_` accepted for
    /// `-`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = ConfigOverrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            let at = |e: Error| Error::Config(format!("line {}: {e}", lineno + 1));
            let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Config(format!("'{v}' is not a number")));
            let int = |v: &str| v.parse::<i64>().map_err(|_| Error::Config(format!("'{v}' is not an integer")));
            let nonneg = |v: &str| {
                int(v).and_then(|n| {
                    u32::try_from(n).map_err(|_| Error::Config(format!("'{v}' must be a nonnegative integer")))
                })
            };
            match key.as_str() {
                "alpha" => o.alpha = Some(num(value).map_err(at)?),
                "beta" => o.beta = Some(num(value).map_err(at)?),
                "gamma-min" => o.gamma_min = Some(num(value).map_err(at)?),
                "gamma-max" => o.gamma_max = Some(num(value).map_err(at)?),
                "gamma-steps" => o.gamma_steps = Some(nonneg(value).map_err(at)? as usize),
                "nu-max" => o.nu_max = Some(nonneg(value).map_err(at)?),
                "fixed-nu" => {
                    let n = int(value).map_err(at)?;
                    o.fixed_nu =
                        Some(i32::try_from(n).map_err(|_| at(Error::Config(format!("'{value}' is out of range"))))?);
                }
                "curvature" => o.curvature = Some(parse_curvature(value).map_err(at)?),
                "variant" => o.variants = Some(parse_variants(value).map_err(at)?),
                "solver" => o.solvers = Some(parse_solvers(value).map_err(at)?),
                "out" => o.output = Some(PathBuf::from(value)),
                "format" => o.format = Some(OutputFormat::from_label(value).map_err(at)?),
                "tol" => o.tol = Some(num(value).map_err(at)?),
                "root-tol" => o.root_tol = Some(num(value).map_err(at)?),
                other => return Err(Error::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        Ok(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = SweepConfig::default().gamma_grid();
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[40], 2.104);
        assert!((g[20] - 1.052).abs() < 1e-15);
    }

    #[test]
    fn single_point_grid() {
        let cfg = SweepConfig { gamma_min: 0.3, gamma_max: 9.0, gamma_steps: 1, ..SweepConfig::default() };
        assert_eq!(cfg.gamma_grid(), vec![0.3]);
    }

    #[test]
    fn nu_ranges() {
        let mut cfg = SweepConfig { nu_max: 3, ..SweepConfig::default() };
        assert_eq!(cfg.nu_range(), -3..=3);
        cfg.fixed_nu = Some(-2);
        assert_eq!(cfg.nu_range(), -2..=-2);
    }

    #[test]
    fn parse_file() {
        let text = "# flux sweep\nalpha = 0.1\nbeta=0.5\n\ngamma_steps = 3\ncurvature = both\nsolver = torus,ribbon\nvariant = rederived\nfixed-nu = -1\n";
        let o = ConfigOverrides::parse(text).unwrap();
        let mut cfg = SweepConfig::default();
        o.apply(&mut cfg);
        assert_eq!(cfg.alpha, 0.1);
        assert_eq!(cfg.beta, 0.5);
        assert_eq!(cfg.gamma_steps, 3);
        assert_eq!(cfg.curvature, vec![true, false]);
        assert_eq!(cfg.solvers, vec![Solver::Torus, Solver::Ribbon]);
        assert_eq!(cfg.variants, vec![HamiltonianVariant::Rederived]);
        assert_eq!(cfg.fixed_nu, Some(-1));
    }

    #[test]
    fn later_layer_wins() {
        let mut cfg = SweepConfig::default();
        ConfigOverrides::parse("alpha = 0.2\nbeta = 0.3").unwrap().apply(&mut cfg);
        ConfigOverrides { alpha: Some(0.4), ..Default::default() }.apply(&mut cfg);
        assert_eq!((cfg.alpha, cfg.beta), (0.4, 0.3));
    }

    #[test]
    fn parse_errors_name_the_line() {
        for bad in ["alpha 0.5", "alpha = x", "colour = red", "gamma-steps = -1", "curvature = maybe"] {
            let e = ConfigOverrides::parse(&format!("# ok\n{bad}")).unwrap_err().to_string();
            assert!(e.contains("line 2"), "{bad}: {e}");
        }
    }

    #[test]
    fn validation() {
        assert!(SweepConfig::default().validate().is_ok());
        assert!(SweepConfig { gamma_steps: 0, ..SweepConfig::default() }.validate().is_err());
        assert!(SweepConfig { alpha: 1.5, ..SweepConfig::default() }.validate().is_err());
        assert!(SweepConfig { gamma_min: 2.0, gamma_max: 1.0, ..SweepConfig::default() }.validate().is_err());
        assert!(SweepConfig { tol: 1e-3, ..SweepConfig::default() }.validate().is_err());
        assert!(SweepConfig { solvers: vec![], ..SweepConfig::default() }.validate().is_err());
        // ribbon alone does not need a valid torus
        let ribbon = SweepConfig { alpha: 2.0, solvers: vec![Solver::Ribbon], ..SweepConfig::default() };
        assert!(ribbon.validate().is_ok());
    }
}
