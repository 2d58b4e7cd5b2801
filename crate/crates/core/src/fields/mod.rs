//! Explicit test functions, addressable by name.

pub mod basic;
pub mod cutoff;
pub mod recurrence;
pub mod transience;
pub mod truncation;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::generator::SharedField;
use crate::model::ModelParams;

pub use basic::{FieldH, FieldHTilde, FieldM};
pub use recurrence::{FieldPsi1, FieldPsi2, FieldTheta1, FieldTheta2, FieldV, RecurrenceParams};
pub use transience::{solve_transience_constants, FieldV1, FieldV2, TransienceParams};
pub use truncation::{FieldFN, Truncation};

/// Names accepted by [`field_by_name`]; `F_N:<N>` takes an integer N ≥ 1.
pub const FIELD_NAMES: &[&str] = &["H", "H_tilde", "psi1", "psi2", "V", "M", "V1", "V2", "F_N:<N>"];

/// Everything a named field may depend on.
#[derive(Debug, Clone, Copy)]
pub struct FieldContext {
    pub params: ModelParams,
    pub recurrence: Option<RecurrenceParams>,
    pub transience: Option<TransienceParams>,
}

impl FieldContext {
    pub fn new(params: ModelParams) -> Self {
        FieldContext {
            params,
            recurrence: None,
            transience: None,
        }
    }

    fn recurrence(&self, name: &str) -> Result<RecurrenceParams> {
        self.recurrence.ok_or_else(|| {
            Error::InvalidArgument(format!("field {name} needs recurrence parameters"))
        })
    }

    fn transience(&self) -> Result<TransienceParams> {
        match self.transience {
            Some(tp) => Ok(tp),
            None => solve_transience_constants(&self.params),
        }
    }
}

pub fn field_by_name(name: &str, ctx: &FieldContext) -> Result<SharedField> {
    let p = &ctx.params;
    let f: SharedField = match name {
        "H" => Arc::new(FieldH::new(p)),
        "H_tilde" => {
            let kappa0 = ctx.recurrence.map_or(p.sigma() * p.sigma(), |r| r.kappa0);
            Arc::new(FieldHTilde::new(p, kappa0))
        }
        "M" => Arc::new(FieldM::new(p)),
        "psi1" => Arc::new(FieldPsi1 {
            kappa1: ctx.recurrence(name)?.kappa1,
        }),
        "psi2" => {
            let rp = ctx.recurrence(name)?;
            Arc::new(FieldPsi2::new(p, rp.kappa2, rp.r1)?)
        }
        "V" => Arc::new(FieldV::new(p, ctx.recurrence(name)?)?),
        "V1" => Arc::new(FieldV1::new(p, ctx.transience()?)),
        "V2" => {
            let tp = ctx.transience()?;
            Arc::new(FieldV2::new(p, tp.k, tp.kappa0))
        }
        other => {
            let n = other
                .strip_prefix("F_N:")
                .ok_or_else(|| unknown(other))?
                .parse::<u32>()
                .map_err(|_| unknown(other))?;
            Arc::new(FieldFN::new(p, n)?)
        }
    };
    Ok(f)
}

fn unknown(name: &str) -> Error {
    Error::InvalidArgument(format!(
        "unknown field {name:?}; expected one of {}",
        FIELD_NAMES.join(", ")
    ))
}
