use std::collections::BTreeMap;

use stein_clt::arrays::{load_row_spec, ArrayFamily, LoadedSpec};

use crate::args::{parse_n_grid, FamilyArg, RunArgs};
use crate::CliError;

/// Where rows come from. A single-row spec is wrapped as an explicit family
/// holding that one row.
pub struct Source {
    pub family: ArrayFamily,
    /// n of the row for single-row specs.
    pub fixed_n: Option<usize>,
}

impl Source {
    pub fn from_args(args: &RunArgs) -> Result<Self, CliError> {
        if let Some(path) = &args.spec {
            let text = std::fs::read_to_string(path)?;
            return Ok(match load_row_spec(&text)? {
                LoadedSpec::Row(row) => {
                    let n = row.n();
                    Source {
                        family: ArrayFamily::Explicit {
                            dim: row.dim(),
                            rows: BTreeMap::from([(n, row)]),
                        },
                        fixed_n: Some(n),
                    }
                }
                LoadedSpec::Family(family) => Source { family, fixed_n: None },
            });
        }
        let kind = args
            .family
            .ok_or_else(|| CliError::Usage("one of --spec or --family is required".into()))?;
        let eta = || -> Result<ArrayFamily, CliError> {
            let alpha = args
                .alpha
                .ok_or_else(|| CliError::Usage("--alpha is required for eta families".into()))?;
            Ok(ArrayFamily::EtaAlpha {
                alpha,
                allow_large_alpha: args.allow_large_alpha,
            })
        };
        let family = match kind {
            FamilyArg::Rademacher | FamilyArg::Eta if args.dim != 1 => {
                return Err(CliError::Usage(format!(
                    "--dim {} needs a product family (product-rademacher or product-eta)",
                    args.dim
                )))
            }
            FamilyArg::Rademacher => ArrayFamily::rademacher(),
            FamilyArg::Eta => eta()?,
            FamilyArg::ProductRademacher => ArrayFamily::product(vec![ArrayFamily::rademacher(); args.dim]),
            FamilyArg::ProductEta => ArrayFamily::product(vec![eta()?; args.dim]),
        };
        if args.dim == 0 {
            return Err(CliError::Usage("--dim must be at least 1".into()));
        }
        Ok(Source { family, fixed_n: None })
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn n_grid(&self, args: &RunArgs) -> Result<Vec<usize>, CliError> {
        match (args.n.as_deref().or(args.n_list.as_deref()), self.fixed_n) {
            (Some(text), _) => parse_n_grid(text),
            (None, Some(n)) => Ok(vec![n]),
            (None, None) => Err(CliError::Usage("--n is required for family sources".into())),
        }
    }
}
