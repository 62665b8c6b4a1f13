use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} = {value} (requires {requirement})")]
    Domain {
        what: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("order error: r = {order} (requires r >= {min})")]
    Order { order: i64, min: i64 },

    #[error("overflow: gamma_k({x}, {k}) exceeds the representable range (ln value {ln_value:.6}); use ln_gamma_k")]
    Overflow { x: f64, k: f64, ln_value: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e} after {subdivisions} subdivisions")]
    Convergence {
        estimate: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("finite-difference stencil leaves (0, inf): x = {x}, h = {h}, order = {order}")]
    Stencil { x: f64, h: f64, order: u32 },

    #[error("grid point x = {x} lies outside the domain of claim {claim}: {domain}")]
    GridDomain {
        claim: String,
        x: f64,
        domain: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            requirement: "a finite value > 0",
        })
    }
}
