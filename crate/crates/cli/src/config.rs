//! Parameters shared by flags and the optional TOML file. Every field is
//! optional so that a flag can override the file and the file can override
//! the built-in default.

use std::path::{Path, PathBuf};

use bicons_core::ambient::ClosedForm;
use clap::Args;
use serde::Deserialize;

/// `a.or(b)` field by field.
macro_rules! merge_fields {
    ($ty:ident { $($f:ident),* $(,)? }) => {
        impl $ty {
            pub fn or(self, other: Self) -> Self {
                Self { $($f: self.$f.or(other.$f)),* }
            }
        }
    };
}

#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct SurfaceParams {
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Mean curvature `|H|`.
    #[arg(long, alias = "H0", allow_hyphen_values = true)]
    pub h0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub f0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub f0p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y0p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b1: Option<f64>,
    /// Checked against the product constraint when given.
    #[arg(long, allow_hyphen_values = true)]
    pub b2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b3: Option<f64>,
    /// Builds the product member with this `b4` instead of `b4 = 0`.
    #[arg(long, allow_hyphen_values = true)]
    pub force_b4: Option<f64>,
    /// Coordinate expression in `u`, `v` (repeat once per coordinate).
    #[arg(long = "component", allow_hyphen_values = true)]
    pub components: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u_range: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v_range: Option<Vec<f64>>,
    /// Warping function of a user map (config file only).
    #[arg(skip)]
    pub warp: Option<ClosedForm>,
}

merge_fields!(SurfaceParams {
    a,
    h0,
    c3,
    f0,
    f0p,
    y0,
    y0p,
    b1,
    b2,
    b3,
    force_b4,
    components,
    u_range,
    v_range,
    warp
});

#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    /// Nodes per direction.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub nu: Option<usize>,
    #[arg(long)]
    pub nv: Option<usize>,
    #[arg(long)]
    pub stencil_step: Option<f64>,
}

merge_fields!(GridParams {
    grid,
    nu,
    nv,
    stencil_step
});

#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ToleranceParams {
    #[arg(long = "tol-algebraic")]
    pub algebraic: Option<f64>,
    #[arg(long = "tol-stencil")]
    pub stencil: Option<f64>,
    #[arg(long = "tol-null-band")]
    pub null_band: Option<f64>,
    #[arg(long = "tol-rank")]
    pub rank: Option<f64>,
}

merge_fields!(ToleranceParams {
    algebraic,
    stencil,
    null_band,
    rank
});

#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    #[arg(long, allow_hyphen_values = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub max_step: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
}

merge_fields!(SolverParams {
    t_min,
    t_max,
    max_step,
    rtol,
    atol
});

#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputParams {
    /// Main output file (JSON report or CSV table); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-node residual table of a verification.
    #[arg(long)]
    pub residuals_csv: Option<PathBuf>,
    /// Sampled surface points of a verification.
    #[arg(long)]
    pub surface_csv: Option<PathBuf>,
    /// Sample count of a solve table.
    #[arg(long)]
    pub samples: Option<usize>,
}

merge_fields!(OutputParams {
    out,
    residuals_csv,
    surface_csv,
    samples
});

#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ScanParams {
    /// `lo,hi,n`
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// `lo,hi,n`
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub tau: Option<Vec<f64>>,
    /// Fiber curvature of the slice check.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
}

merge_fields!(ScanParams { theta, tau, c });

/// Contents of `--config FILE`.
#[derive(Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    #[serde(default)]
    pub surface: SurfaceParams,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub tolerances: ToleranceParams,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub output: OutputParams,
    #[serde(default)]
    pub scan: ScanParams,
}

impl FileConfig {
    pub fn load(path: &Path) -> bicons_core::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bicons_core::Error::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| bicons_core::Error::Usage(format!("{}: {}", path.display(), e.message())))
    }
}
