//! Parsing of the compact option values (`fourier:19`, `tikhonov:disc:1.5`, ...)
//! and of the impedance source.

use std::path::Path;

use anyhow::{bail, Context, Result};
use inclusion_core::bie::{Basis, ModeSet};
use inclusion_core::io::read_gamma_csv;
use inclusion_core::regularization::{AlphaChoice, NoiseLevel, RegStrategy};

use crate::expr::Expr;

/// `fourier:N` (modes `-N..=N`), `onesided:K` (modes `0..K`) or `collocation:n`.
pub fn parse_basis(s: &str) -> Result<Basis> {
    let (kind, n) = s.split_once(':').with_context(|| format!("basis {s:?} needs the form kind:size"))?;
    let n: usize = n.parse().with_context(|| format!("bad basis size in {s:?}"))?;
    if n == 0 {
        bail!("basis size must be positive");
    }
    Ok(match kind {
        "fourier" => Basis::Fourier(ModeSet::Symmetric(n)),
        "onesided" => Basis::Fourier(ModeSet::OneSided(n)),
        "collocation" => Basis::Collocation(n),
        _ => bail!("unknown basis {kind:?} (expected fourier, onesided or collocation)"),
    })
}

/// Regularization as given on the command line; the discrepancy level is
/// supplied by the command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegSpec {
    Alpha(f64),
    Discrepancy { safety: f64 },
    Cutoff(f64),
}

impl RegSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |v: &str| v.parse::<f64>().with_context(|| format!("bad number {v:?} in {s:?}"));
        let spec = match parts.as_slice() {
            ["tikhonov"] => Self::Discrepancy { safety: 1.0 },
            ["tikhonov", "disc"] => Self::Discrepancy { safety: 1.0 },
            ["tikhonov", "disc", c] => Self::Discrepancy { safety: num(c)? },
            ["tikhonov", a] => Self::Alpha(num(a)?),
            ["cutoff", t] => Self::Cutoff(num(t)?),
            _ => bail!("regularization {s:?} must be tikhonov, tikhonov:ALPHA, tikhonov:disc:C or cutoff:TAU"),
        };
        match spec {
            Self::Alpha(a) if !(a > 0.0) => bail!("Tikhonov parameter must be positive"),
            Self::Discrepancy { safety } if !(safety >= 1.0) => bail!("discrepancy safety factor must be at least 1"),
            Self::Cutoff(t) if !(t > 0.0 && t < 1.0) => bail!("cut-off must lie in (0, 1)"),
            _ => Ok(spec),
        }
    }

    /// Strategy for a relative noise level `delta`.
    pub fn relative(self, delta: f64) -> RegStrategy<f64> {
        match self {
            Self::Alpha(a) => RegStrategy::Tikhonov(AlphaChoice::Explicit(a)),
            Self::Discrepancy { safety } => {
                RegStrategy::Tikhonov(AlphaChoice::Discrepancy { level: NoiseLevel::Relative(delta), safety })
            }
            Self::Cutoff(t) => RegStrategy::Cutoff(t),
        }
    }
}

/// Impedance values as a function of the curve parameter.
#[derive(Debug, Clone)]
pub enum GammaSource {
    Expr { text: String, expr: Expr },
    /// Periodic linear interpolation of tabulated `(θ, γ)`.
    Table { thetas: Vec<f64>, values: Vec<f64> },
}

impl GammaSource {
    /// An existing file is read as an impedance CSV if it ends in `.csv` and as
    /// an expression otherwise; anything else is parsed as an expression.
    pub fn load(arg: &str) -> Result<Self> {
        let path = Path::new(arg);
        if path.is_file() {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
            if path.extension().is_some_and(|e| e == "csv") {
                return Self::from_csv(&text);
            }
            return Self::from_expr(text.trim());
        }
        Self::from_expr(arg)
    }

    pub fn from_expr(text: &str) -> Result<Self> {
        let expr = Expr::parse(text).with_context(|| format!("parsing impedance expression {text:?}"))?;
        Ok(Self::Expr { text: text.to_string(), expr })
    }

    fn from_csv(text: &str) -> Result<Self> {
        let (rows, _) = read_gamma_csv(text)?;
        let (thetas, values): (Vec<f64>, Vec<f64>) = rows.iter().filter_map(|r| r.average.map(|g| (r.theta, g))).unzip();
        if thetas.is_empty() {
            bail!("impedance table has no values");
        }
        if thetas.windows(2).any(|w| w[1] <= w[0]) {
            bail!("impedance table angles must increase");
        }
        Ok(Self::Table { thetas, values })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            Self::Expr { expr, .. } => expr.eval(theta),
            Self::Table { thetas, values } => {
                let two_pi = std::f64::consts::TAU;
                let n = thetas.len();
                if n == 1 {
                    return values[0];
                }
                let t = thetas[0] + (theta - thetas[0]).rem_euclid(two_pi);
                let k = thetas.partition_point(|&s| s <= t);
                let (i, j) = if k == 0 || k == n { (n - 1, 0) } else { (k - 1, k) };
                let (ti, mut tj) = (thetas[i], thetas[j]);
                let mut tt = t;
                if j <= i {
                    tj += two_pi;
                    if tt < ti {
                        tt += two_pi;
                    }
                }
                let s = (tt - ti) / (tj - ti);
                values[i] + s * (values[j] - values[i])
            }
        }
    }

    /// Text stored with the simulated data.
    pub fn describe(&self) -> Option<String> {
        match self {
            Self::Expr { text, .. } => Some(text.clone()),
            Self::Table { .. } => None,
        }
    }
}
