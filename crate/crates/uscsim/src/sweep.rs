use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use uscsim_core::config::SimConfig;
use uscsim_core::spectra::linspace;
use uscsim_core::units::{mhz_to_rad, rad_to_mhz};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    GRed,
    GBlue,
    OmegaEff,
    ProbeOffset,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::GRed => "g_red",
            SweepVariable::GBlue => "g_blue",
            SweepVariable::OmegaEff => "omega_eff",
            SweepVariable::ProbeOffset => "probe_offset",
        }
    }

    /// Parameter-file key, if the variable is a model parameter.
    pub fn key(self) -> Option<&'static str> {
        match self {
            SweepVariable::GRed => Some("g_red_mhz"),
            SweepVariable::GBlue => Some("g_blue_mhz"),
            SweepVariable::OmegaEff => Some("omega_eff_mhz"),
            SweepVariable::ProbeOffset => None,
        }
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "g_red" => Ok(SweepVariable::GRed),
            "g_blue" => Ok(SweepVariable::GBlue),
            "omega_eff" => Ok(SweepVariable::OmegaEff),
            "probe_offset" => Ok(SweepVariable::ProbeOffset),
            _ => Err(format!("unknown sweep variable `{s}` (expected g_red, g_blue, omega_eff or probe_offset)")),
        }
    }
}

/// Command-line form of a sweep, `VAR=START:STOP:N` with frequencies in MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub variable: SweepVariable,
    pub start_mhz: f64,
    pub stop_mhz: f64,
    pub points: usize,
}

impl FromStr for SweepRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (var, range) = s.split_once('=').ok_or("expected VAR=START:STOP:N")?;
        let variable = var.trim().parse()?;
        let (start_mhz, stop_mhz, points) = parse_triple(range)?;
        if points < 2 {
            return Err(format!("a sweep needs at least 2 points, got {points}"));
        }
        if start_mhz >= stop_mhz {
            return Err(format!("sweep start must be below stop, got {start_mhz}..{stop_mhz}"));
        }
        Ok(SweepRange { variable, start_mhz, stop_mhz, points })
    }
}

impl fmt::Display for SweepRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}:{}:{}", self.variable.name(), self.start_mhz, self.stop_mhz, self.points)
    }
}

/// A validated sweep: one variable varied linearly, everything else fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    /// rad/s
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub fixed: SimConfig,
}

impl SweepSpec {
    pub fn new(range: SweepRange, fixed: SimConfig) -> Self {
        SweepSpec {
            variable: range.variable,
            start: mhz_to_rad(range.start_mhz),
            stop: mhz_to_rad(range.stop_mhz),
            points: range.points,
            fixed,
        }
    }

    /// Sweep values in rad/s.
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.points)
    }

    /// One configuration per sweep value, or `None` for a probe-offset sweep.
    pub fn cells(&self) -> Option<Vec<SimConfig>> {
        let key = self.variable.key()?;
        let cells = self
            .values()
            .into_iter()
            .map(|w| {
                let mut c = self.fixed;
                c.set(key, rad_to_mhz(w)).expect("sweep values are finite");
                c
            })
            .collect();
        Some(cells)
    }
}

/// A squeeze-map axis `START:STOP:N` in MHz. A single point needs START = STOP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub start_mhz: f64,
    pub stop_mhz: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn values_mhz(&self) -> Vec<f64> {
        if self.points == 1 {
            vec![self.start_mhz]
        } else {
            linspace(self.start_mhz, self.stop_mhz, self.points)
        }
    }
}

impl FromStr for GridAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (start_mhz, stop_mhz, points) = parse_triple(s)?;
        match points {
            0 => Err("an axis needs at least 1 point".into()),
            1 if start_mhz != stop_mhz => Err(format!("a 1-point axis needs START = STOP, got {start_mhz}:{stop_mhz}")),
            n if n > 1 && start_mhz >= stop_mhz => Err(format!("axis start must be below stop, got {start_mhz}..{stop_mhz}")),
            _ if start_mhz < 0.0 => Err(format!("couplings are non-negative, got {start_mhz}")),
            _ => Ok(GridAxis { start_mhz, stop_mhz, points }),
        }
    }
}

fn parse_triple(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("expected START:STOP:N, got `{s}`"));
    };
    let num = |t: &str| -> Result<f64, String> {
        t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("`{t}` is not a finite number"))
    };
    let n: usize = n.parse().map_err(|_| format!("`{n}` is not a point count"))?;
    Ok((num(a)?, num(b)?, n))
}

/// Run `f` over `items` on a bounded pool; results come back in input order.
pub fn run_cells<T, R, F>(jobs: Option<usize>, items: &[T], f: F) -> anyhow::Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sweeps() {
        let s: SweepRange = "g_red=0:12.6:50".parse().unwrap();
        assert_eq!(s, SweepRange { variable: SweepVariable::GRed, start_mhz: 0.0, stop_mhz: 12.6, points: 50 });
        assert_eq!(s.to_string().parse::<SweepRange>().unwrap(), s);
        let p: SweepRange = "probe_offset=-60:60:5".parse().unwrap();
        assert_eq!(p.start_mhz, -60.0);
    }

    #[test]
    fn rejects_degenerate_sweeps() {
        for bad in ["g_red=1:1:10", "g_red=2:1:10", "g_red=0:1:1", "g_pink=0:1:3", "g_red=0:1", "g_red=0:x:3", "g_red=0:inf:3"] {
            assert!(bad.parse::<SweepRange>().is_err(), "{bad}");
        }
    }

    #[test]
    fn sweep_cells_vary_one_key() {
        let spec = SweepSpec::new("g_blue=0:10:3".parse().unwrap(), SimConfig::default());
        let cells = spec.cells().unwrap();
        assert_eq!(cells.len(), 3);
        assert!((cells[1].g_blue_mhz - 5.0).abs() < 1e-12);
        assert_eq!(cells[2].g_red_mhz, 0.0);
        let probe = SweepSpec::new("probe_offset=-1:1:3".parse().unwrap(), SimConfig::default());
        assert!(probe.cells().is_none());
    }

    #[test]
    fn axes() {
        assert_eq!("0:0:1".parse::<GridAxis>().unwrap().values_mhz(), vec![0.0]);
        assert_eq!("0:2:3".parse::<GridAxis>().unwrap().values_mhz(), vec![0.0, 1.0, 2.0]);
        for bad in ["0:1:1", "1:0:3", "0:1:0", "-1:1:3"] {
            assert!(bad.parse::<GridAxis>().is_err(), "{bad}");
        }
    }

    #[test]
    fn cells_keep_order() {
        let items: Vec<u64> = (0..1000).collect();
        let out = run_cells(Some(4), &items, |x| x * x).unwrap();
        assert!(out.iter().enumerate().all(|(i, &y)| y == (i * i) as u64));
    }
}
