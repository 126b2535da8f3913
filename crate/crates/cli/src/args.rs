//! Instance inputs and variant flags shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weakrank::ingest::{load_matrix_csv, parse_profile, profile_matrix};
use weakrank::instances::{eight_items, four_items_non_unimodal, random_profile_matrix, ten_items};
use weakrank::variant::Proportion;
use weakrank::{FairVariant, FairnessSpec, PairOrderMatrix, Rational, VariantSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    EightItems,
    TenItems,
    FourItemsNonUnimodal,
}

const DEFAULT_VOTERS: usize = 15;

#[derive(Debug, Clone, Args)]
#[group(skip)]
#[command(group(ArgGroup::new("input").required(true).args(["matrix", "profile", "random", "builtin"])))]
pub struct InputArgs {
    /// Pair order matrix as CSV.
    #[arg(long, value_name = "CSV")]
    pub matrix: Option<PathBuf>,
    /// PrefLib strict-order profile (.soc, .soi).
    #[arg(long, value_name = "FILE")]
    pub profile: Option<PathBuf>,
    /// Synthetic profile instance with N items, drawn from --seed.
    #[arg(long, value_name = "N")]
    pub random: Option<usize>,
    /// Built-in example matrix.
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Voters of the synthetic profile [default: 15].
    #[arg(long, value_name = "M")]
    pub voters: Option<usize>,
}

/// A loaded instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub matrix: PairOrderMatrix,
    /// Voters, for profile-derived instances.
    pub voters: Option<u64>,
    /// Parser warnings.
    pub warnings: Vec<String>,
}

impl InputArgs {
    pub fn load(&self, seed: u64) -> Result<Instance> {
        if self.voters.is_some() && self.random.is_none() {
            bail!("--voters applies to --random only");
        }
        if let Some(path) = &self.matrix {
            return load_matrix_file(path);
        }
        if let Some(path) = &self.profile {
            return load_profile_file(path);
        }
        if let Some(n) = self.random {
            let voters = self.voters.unwrap_or(DEFAULT_VOTERS);
            if n == 0 || voters == 0 {
                bail!("--random needs at least one item and one voter");
            }
            let matrix = random_profile_matrix(&mut ChaCha8Rng::seed_from_u64(seed), n, voters);
            let name = format!("random-n{n}-m{voters}-seed{seed}");
            return Ok(Instance { name, matrix, voters: Some(voters as u64), warnings: vec![] });
        }
        let b = self.builtin.ok_or_else(|| anyhow!("no input given"))?;
        let (name, matrix) = match b {
            Builtin::EightItems => ("eight-items", eight_items()),
            Builtin::TenItems => ("ten-items", ten_items()),
            Builtin::FourItemsNonUnimodal => ("four-items-non-unimodal", four_items_non_unimodal()),
        };
        Ok(Instance { name: name.into(), matrix, voters: None, warnings: vec![] })
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn load_matrix_file(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let matrix = load_matrix_csv(&text).with_context(|| path.display().to_string())?;
    Ok(Instance { name: stem(path), matrix, voters: None, warnings: vec![] })
}

pub fn load_profile_file(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let profile = parse_profile(&text).with_context(|| path.display().to_string())?;
    Ok(Instance {
        name: stem(path),
        matrix: profile_matrix(&profile),
        voters: Some(profile.voters()),
        warnings: profile.warnings.clone(),
    })
}

/// Loads a matrix CSV (`.csv`) or a PrefLib profile (anything else).
pub fn load_path(path: &Path) -> Result<Instance> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => load_matrix_file(path),
        _ => load_profile_file(path),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum VariantKind {
    #[default]
    Obop,
    FixedP,
    EqualSizes,
    Prescribed,
    Tcu,
    Fair,
}

/// Group and proportion flags.
#[derive(Debug, Clone, Default, Args)]
pub struct FairnessArgs {
    /// Groups of 1-based items separated by `|` (`1,3,4,8|2,5,6,7`),
    /// `mod:K` (item r in group r mod K, residue 0 first) or
    /// `top:F` (items r <= F·n, then the rest).
    #[arg(long, value_name = "GROUPS")]
    pub groups: Option<String>,
    /// Lower proportions per group separated by `|`; a comma list gives one value per prefix.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Upper proportions, same layout as --lambda.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// λ = μ = |G|/n for every group.
    #[arg(long)]
    pub proportional: bool,
}

impl FairnessArgs {
    fn given(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.groups.is_some() {
            out.push("--groups");
        }
        if self.lambda.is_some() {
            out.push("--lambda");
        }
        if self.mu.is_some() {
            out.push("--mu");
        }
        if self.proportional {
            out.push("--proportional");
        }
        out
    }

    pub fn spec(&self, n: usize) -> Result<FairnessSpec> {
        let text = self.groups.as_deref().ok_or_else(|| anyhow!("--groups is required"))?;
        let groups = parse_groups(text, n)?;
        if self.proportional {
            if self.lambda.is_some() || self.mu.is_some() {
                bail!("--proportional cannot be combined with --lambda or --mu");
            }
            return Ok(FairnessSpec::proportional(groups));
        }
        let mut spec = FairnessSpec::unconstrained(groups);
        if let Some(l) = &self.lambda {
            spec.lambda = parse_proportions(l).context("--lambda")?;
        }
        if let Some(m) = &self.mu {
            spec.mu = parse_proportions(m).context("--mu")?;
        }
        Ok(spec)
    }
}

/// Parses the `--groups` notation into 0-based groups.
pub fn parse_groups(text: &str, n: usize) -> Result<Vec<Vec<usize>>> {
    let text = text.trim();
    if let Some(k) = text.strip_prefix("mod:") {
        let k: usize = k.trim().parse().with_context(|| format!("bad modulus `{k}`"))?;
        if k == 0 {
            bail!("modulus must be positive");
        }
        return Ok((0..k).map(|g| (1..=n).filter(|r| r % k == g).map(|r| r - 1).collect()).collect());
    }
    if let Some(f) = text.strip_prefix("top:") {
        let f: Rational = f.trim().parse().with_context(|| format!("bad fraction `{f}`"))?;
        let cut = (f * &Rational::from_integer(n as i64)).floor();
        let cut: usize = usize::try_from(cut).map_err(|_| anyhow!("fraction out of range"))?.min(n);
        return Ok(vec![(0..cut).collect(), (cut..n).collect()]);
    }
    text.split('|')
        .map(|g| {
            g.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| match t.parse::<usize>() {
                    Ok(0) | Err(_) => Err(anyhow!("`{t}` is not a 1-based item id")),
                    Ok(r) => Ok(r - 1),
                })
                .collect()
        })
        .collect()
}

fn parse_proportions(text: &str) -> Result<Vec<Proportion>> {
    text.split('|')
        .map(|g| {
            let values: Vec<Rational> = g
                .split(',')
                .map(|t| t.trim().parse::<Rational>().with_context(|| format!("bad proportion `{}`", t.trim())))
                .collect::<Result<_>>()?;
            Ok(match values.len() {
                1 => Proportion::Uniform(values.into_iter().next().expect("one value")),
                _ => Proportion::PerPrefix(values),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, Args)]
pub struct VariantArgs {
    /// Problem variant [default: obop].
    #[arg(long, value_enum)]
    pub variant: Option<VariantKind>,
    /// Number of buckets.
    #[arg(long = "p", value_name = "P")]
    pub p: Option<usize>,
    /// Bucket size for equal-sizes.
    #[arg(long = "q", value_name = "Q")]
    pub q: Option<usize>,
    /// Bucket sizes, best bucket first.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub sizes: Option<Vec<usize>>,
    /// Head size of the tail-collapsed variant.
    #[arg(long = "k", value_name = "K")]
    pub k: Option<usize>,
    #[command(flatten)]
    pub fairness: FairnessArgs,
    /// Upper bound on the number of buckets (fair).
    #[arg(long, value_name = "NU")]
    pub max_buckets: Option<usize>,
    /// Exact bucket sizes for the fair variant.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub capacities: Option<Vec<usize>>,
    /// Variant as JSON (1-based items); excludes every other variant flag.
    #[arg(long, value_name = "FILE")]
    pub variant_file: Option<PathBuf>,
}

impl VariantArgs {
    fn given(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.p.is_some() {
            out.push("--p");
        }
        if self.q.is_some() {
            out.push("--q");
        }
        if self.sizes.is_some() {
            out.push("--sizes");
        }
        if self.k.is_some() {
            out.push("--k");
        }
        if self.max_buckets.is_some() {
            out.push("--max-buckets");
        }
        if self.capacities.is_some() {
            out.push("--capacities");
        }
        out.extend(self.fairness.given());
        out
    }

    pub fn kind(&self) -> VariantKind {
        self.variant.unwrap_or_default()
    }

    /// Builds and validates the variant for `n` items. Flags the variant does
    /// not use are rejected.
    pub fn spec(&self, n: usize) -> Result<VariantSpec> {
        let given = self.given();
        if let Some(path) = &self.variant_file {
            if self.variant.is_some() || !given.is_empty() {
                bail!("--variant-file cannot be combined with other variant flags");
            }
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let spec: VariantSpec = serde_json::from_str(&text).with_context(|| path.display().to_string())?;
            spec.validate(n)?;
            return Ok(spec);
        }
        let kind = self.kind();
        let allowed: &[&str] = match kind {
            VariantKind::Obop => &[],
            VariantKind::FixedP => &["--p"],
            VariantKind::EqualSizes => &["--p", "--q"],
            VariantKind::Prescribed => &["--sizes"],
            VariantKind::Tcu => &["--k"],
            VariantKind::Fair => {
                &["--p", "--max-buckets", "--capacities", "--groups", "--lambda", "--mu", "--proportional"]
            }
        };
        if let Some(bad) = given.iter().find(|f| !allowed.contains(f)) {
            bail!("{bad} does not apply to --variant {}", kind.to_possible_value().expect("named").get_name());
        }
        let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| anyhow!("{flag} is required"));
        let spec = match kind {
            VariantKind::Obop => VariantSpec::Obop,
            VariantKind::FixedP => VariantSpec::FixedBuckets { p: need(self.p, "--p")? },
            VariantKind::EqualSizes => VariantSpec::EqualSizes { p: need(self.p, "--p")?, q: need(self.q, "--q")? },
            VariantKind::Prescribed => VariantSpec::PrescribedSizes {
                sizes: self.sizes.clone().ok_or_else(|| anyhow!("--sizes is required"))?,
            },
            VariantKind::Tcu => VariantSpec::Tcu { k: need(self.k, "--k")?, tail_bounds: vec![] },
            VariantKind::Fair => VariantSpec::Fair(FairVariant {
                fairness: self.fairness.spec(n)?,
                max_buckets: self.max_buckets,
                fixed_p: self.p,
                capacities: self.capacities.clone(),
            }),
        };
        spec.validate(n)?;
        Ok(spec)
    }

    /// Builds the variant from manifest parameters: `-` or `key=value` pairs
    /// separated by `;`, with the flag names as keys (`p=4;q=2`, `sizes=1,3,4`,
    /// `groups=mod:3;proportional`).
    pub fn from_params(kind: VariantKind, params: &str) -> Result<VariantArgs> {
        let mut a = VariantArgs { variant: Some(kind), ..VariantArgs::default() };
        if params.trim() == "-" {
            return Ok(a);
        }
        let list = |v: &str| -> Result<Vec<usize>> {
            v.split(',').map(|t| t.trim().parse().with_context(|| format!("bad number `{t}`"))).collect()
        };
        for entry in params.split(';').map(str::trim).filter(|e| !e.is_empty()) {
            let (key, value) = entry.split_once('=').unwrap_or((entry, ""));
            let num = || value.trim().parse::<usize>().with_context(|| format!("bad value for `{key}`"));
            match key.trim() {
                "p" => a.p = Some(num()?),
                "q" => a.q = Some(num()?),
                "k" => a.k = Some(num()?),
                "max-buckets" => a.max_buckets = Some(num()?),
                "sizes" => a.sizes = Some(list(value)?),
                "capacities" => a.capacities = Some(list(value)?),
                "groups" => a.fairness.groups = Some(value.into()),
                "lambda" => a.fairness.lambda = Some(value.into()),
                "mu" => a.fairness.mu = Some(value.into()),
                "proportional" => a.fairness.proportional = true,
                other => bail!("unknown parameter `{other}`"),
            }
        }
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_notations() {
        assert_eq!(parse_groups("1,3|2", 3).unwrap(), vec![vec![0, 2], vec![1]]);
        assert_eq!(parse_groups("mod:3", 7).unwrap(), vec![vec![2, 5], vec![0, 3, 6], vec![1, 4]]);
        assert_eq!(parse_groups("top:4/5", 10).unwrap(), vec![(0..8).collect::<Vec<_>>(), vec![8, 9]]);
        assert!(parse_groups("0,1", 3).is_err());
    }

    #[test]
    fn proportions_uniform_and_per_prefix() {
        let p = parse_proportions("1/2|1/3,1/4").unwrap();
        assert_eq!(p[0], Proportion::Uniform(Rational::new(1, 2)));
        assert_eq!(p[1], Proportion::PerPrefix(vec![Rational::new(1, 3), Rational::new(1, 4)]));
    }

    #[test]
    fn inapplicable_flags_are_rejected() {
        let a = VariantArgs { variant: Some(VariantKind::Tcu), k: Some(3), p: Some(2), ..VariantArgs::default() };
        let e = a.spec(8).unwrap_err().to_string();
        assert!(e.contains("--p does not apply"), "{e}");
        let a = VariantArgs { variant: Some(VariantKind::FixedP), ..VariantArgs::default() };
        assert!(a.spec(8).unwrap_err().to_string().contains("--p is required"));
    }

    #[test]
    fn manifest_params() {
        let a = VariantArgs::from_params(VariantKind::EqualSizes, "p=4;q=2").unwrap();
        assert_eq!(a.spec(8).unwrap(), VariantSpec::EqualSizes { p: 4, q: 2 });
        let a = VariantArgs::from_params(VariantKind::Fair, "groups=1,3,4,8|2,5,6,7;proportional").unwrap();
        let want = FairVariant::new(FairnessSpec::proportional(vec![vec![0, 2, 3, 7], vec![1, 4, 5, 6]]));
        assert_eq!(a.spec(8).unwrap(), VariantSpec::Fair(want));
        assert!(VariantArgs::from_params(VariantKind::Obop, "x=1").is_err());
    }
}
