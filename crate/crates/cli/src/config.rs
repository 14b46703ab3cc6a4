use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::schema;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "weaklab", version, about = "Weighted weak-type experiments on dyadic meshes")]
pub struct Cli {
    /// Key-value TOML file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file. Relative paths are resolved against WEAKLAB_OUTPUT_DIR when set.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic of one or more scalar weights.
    #[command(after_help = schema::help("characteristic"))]
    Characteristic(CharacteristicArgs),
    /// Weak-type quotients of the multiplier form over seeded step functions.
    #[command(after_help = schema::help("weaktype"))]
    Weaktype(WeaktypeArgs),
    /// Lower-bound experiment for the logarithmic A1 weights.
    #[command(after_help = schema::help("lowerbound"))]
    Lowerbound(LowerboundArgs),
    /// Invariant suite for CZ decompositions and sparse families.
    #[command(name = "sparse-check", after_help = schema::help("sparse-check"))]
    SparseCheck(SparseCheckArgs),
    /// Invariant suite for matrix weights.
    #[command(name = "matrix-check", after_help = schema::help("matrix-check"))]
    MatrixCheck(MatrixCheckArgs),
    /// Exponents of the weak-type argument.
    #[command(after_help = schema::help("constants"))]
    Constants(ConstantsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Characteristic(_) => "characteristic",
            Command::Weaktype(_) => "weaktype",
            Command::Lowerbound(_) => "lowerbound",
            Command::SparseCheck(_) => "sparse-check",
            Command::MatrixCheck(_) => "matrix-check",
            Command::Constants(_) => "constants",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Ap,
    A1,
    Ainfty,
    Rh,
    Apq,
    SharpRh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Identity,
    Maximal,
    Hilbert,
    Sparse,
    FractionalMaximal,
    FractionalIntegral,
    FractionalSparse,
}

impl OperatorKind {
    pub fn is_fractional(&self) -> bool {
        matches!(self, Self::FractionalMaximal | Self::FractionalIntegral | Self::FractionalSparse)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct MeshArgs {
    /// Half-width of the domain (a power of two).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Refinement level; the mesh has 2^(level+1) cells.
    #[arg(long)]
    pub level: Option<u32>,
}

#[derive(Debug, Args)]
pub struct CharacteristicArgs {
    /// Weight descriptor such as `power:a=-0.5` or `powerlog:a=-0.9,b=1,c=1`. Repeatable.
    #[arg(long)]
    pub weight: Vec<String>,
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Reverse Hölder exponent for `--kind rh`.
    #[arg(long)]
    pub s: Option<f64>,
    /// Add the anchored intervals [0, t] to the search.
    #[arg(long)]
    pub anchored: bool,
    #[command(flatten)]
    pub mesh: MeshArgs,
}

#[derive(Debug, Args)]
pub struct WeaktypeArgs {
    #[arg(long)]
    pub weight: Vec<String>,
    #[arg(long, value_enum)]
    pub operator: Option<OperatorKind>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[command(flatten)]
    pub mesh: MeshArgs,
}

#[derive(Debug, Args)]
pub struct LowerboundArgs {
    /// Comma-separated values in (0, 1/2).
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,
    /// Cells per octave of the graded mesh.
    #[arg(long)]
    pub per_octave: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SparseCheckArgs {
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[command(flatten)]
    pub mesh: MeshArgs,
}

#[derive(Debug, Args)]
pub struct MatrixCheckArgs {
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Sampled directions for the scalar restrictions.
    #[arg(long)]
    pub dirs: Option<usize>,
    #[command(flatten)]
    pub mesh: MeshArgs,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated reverse Hölder exponents.
    #[arg(long, value_delimiter = ',')]
    pub nu: Vec<f64>,
    /// Weights whose searched exponent is used. Repeatable.
    #[arg(long)]
    pub weight: Vec<String>,
    #[command(flatten)]
    pub mesh: MeshArgs,
}

/// Values a config file may set. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub weight: Option<Vec<String>>,
    pub kind: Option<Kind>,
    pub operator: Option<OperatorKind>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    pub s: Option<f64>,
    pub delta: Option<Vec<f64>>,
    pub nu: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub level: Option<u32>,
    pub trials: Option<usize>,
    pub dirs: Option<usize>,
    pub per_octave: Option<usize>,
    pub anchored: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Flag value, else file value, else default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn pick_list<T: Clone>(flag: &[T], file: &Option<Vec<T>>, default: &[T]) -> Vec<T> {
    if !flag.is_empty() {
        flag.to_vec()
    } else if let Some(v) = file {
        v.clone()
    } else {
        default.to_vec()
    }
}

/// Parses `family:key=value,...` with families `power`, `powerlog`, `constant`.
pub fn parse_weight(desc: &str) -> Result<weaklab_core::ScalarWeight, CliError> {
    use weaklab_core::ScalarWeight;
    let bad = |m: String| CliError::Usage(format!("weight `{desc}`: {m}"));
    let (family, rest) = desc.split_once(':').unwrap_or((desc, ""));
    let (mut a, mut b, mut c) = (0.0, 0.0, 1.0);
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("expected key=value, got `{kv}`")))?;
        let v: f64 = v.trim().parse().map_err(|_| bad(format!("`{v}` is not a number")))?;
        match k.trim() {
            "a" => a = v,
            "b" => b = v,
            "c" => c = v,
            other => return Err(bad(format!("unknown key `{other}`"))),
        }
    }
    let w = match family {
        "power" if b == 0.0 => ScalarWeight::power_log(a, 0.0, c),
        "powerlog" => ScalarWeight::power_log(a, b, c),
        "constant" if a == 0.0 && b == 0.0 => ScalarWeight::constant(c),
        "power" | "constant" => return Err(bad("unexpected parameter for this family".into())),
        other => return Err(bad(format!("unknown family `{other}`"))),
    };
    w.map_err(CliError::from)
}

/// Checks `1/p - 1/q = α` when all three are given and derives the missing one.
pub fn exponent_triple(p: f64, q: Option<f64>, alpha: Option<f64>) -> Result<(f64, f64, f64), CliError> {
    let bad = |m: String| CliError::Usage(format!("invalid exponent relation: {m}"));
    if !(p >= 1.0) || !p.is_finite() {
        return Err(bad(format!("need p >= 1, got {p}")));
    }
    match (q, alpha) {
        (None, None) => Ok((p, p, 0.0)),
        (Some(q), None) => {
            let alpha = 1.0 / p - 1.0 / q;
            if !(alpha >= 0.0 && alpha < 1.0) {
                return Err(bad(format!("q={q} gives α={alpha} outside [0, 1)")));
            }
            Ok((p, q, alpha))
        }
        (None, Some(alpha)) => {
            let inv = 1.0 / p - alpha;
            if !(alpha >= 0.0) || !(inv > 0.0) {
                return Err(bad(format!("need 0 <= α < 1/p, got α={alpha}, p={p}")));
            }
            Ok((p, 1.0 / inv, alpha))
        }
        (Some(q), Some(alpha)) => {
            if ((1.0 / p - 1.0 / q) - alpha).abs() > 1e-12 {
                return Err(bad(format!("1/p - 1/q = {} but α = {alpha}", 1.0 / p - 1.0 / q)));
            }
            Ok((p, q, alpha))
        }
    }
}

pub fn check_delta(delta: f64) -> Result<f64, CliError> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(CliError::Usage(format!("invalid exponent relation: need 0 < δ < 1/2, got {delta}")));
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_descriptors() {
        assert!(parse_weight("power:a=-0.5").is_ok());
        assert!(parse_weight("powerlog:a=-0.9,b=1,c=1").is_ok());
        assert!(parse_weight("constant:c=2").is_ok());
        assert!(matches!(parse_weight("power:a=-1.5"), Err(CliError::Usage(_))));
        assert!(matches!(parse_weight("gauss:a=1"), Err(CliError::Usage(_))));
        assert!(matches!(parse_weight("power:z=1"), Err(CliError::Usage(_))));
    }

    #[test]
    fn exponent_relations() {
        assert_eq!(exponent_triple(2.0, None, Some(0.25)).unwrap(), (2.0, 4.0, 0.25));
        assert_eq!(exponent_triple(2.0, Some(4.0), None).unwrap(), (2.0, 4.0, 0.25));
        assert!(exponent_triple(2.0, Some(4.0), Some(0.3)).is_err());
        assert!(exponent_triple(0.5, None, None).is_err());
        assert!(exponent_triple(2.0, None, Some(0.5)).is_err());
        assert!(check_delta(0.5).is_err() && check_delta(0.1).is_ok());
    }

    #[test]
    fn flags_override_file() {
        assert_eq!(pick(Some(3), Some(2), 1), 3);
        assert_eq!(pick(None, Some(2), 1), 2);
        assert_eq!(pick_list(&[], &Some(vec![1.0]), &[2.0]), vec![1.0]);
        let cfg: FileConfig = toml::from_str("seed = 7\ndelta = [0.1, 0.2]\nper-octave = 32").unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.per_octave, Some(32));
        assert!(toml::from_str::<FileConfig>("sede = 7").is_err());
    }
}
