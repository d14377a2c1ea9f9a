//! Special functions: complex log-gamma, `pFq` series, Gauss–Kronrod
//! quadrature and the Meijer G-function.

pub mod gamma;
pub mod hypergeometric;
pub mod meijer;
pub mod mellin;
pub mod quadrature;

pub use gamma::{gamma_complex, ln_gamma, ln_gamma_complex, recip_gamma_complex};
pub use hypergeometric::{hypergeometric_pfq, pfq_series, SeriesSum};
pub use meijer::{
    meijer_g, meijer_g_complex, meijer_g_with, ComplexValue, EvalMethod, Evaluation, MeijerGSpec, MeijerOptions,
};
pub use mellin::mellin_barnes_check;
pub use quadrature::{integrate_interval, integrate_semiinfinite, try_integrate_interval, try_integrate_semiinfinite};
