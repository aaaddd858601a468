//! Central tolerance configuration. Every tolerance-gated comparison in the
//! crate goes through one of these fields; nothing hardcodes its own epsilon.

/// Tolerances and sampling defaults shared by all modules.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Absolute tolerance for LP optimality/feasibility decisions.
    pub lp: f64,
    /// Tolerance for operator-norm / power-iteration convergence.
    pub norm: f64,
    /// Exactness gate for structural input checks (unit evaluations, skewness).
    pub exact: f64,
    /// Sample count for sphere/ball sampling validations.
    pub samples: usize,
    /// Residual tolerance for sampled bridge validations.
    pub residual: f64,
    /// Grid resolution per axis for torus quadrature and length suprema.
    pub grid: usize,
    /// Window radius cap for operator-norm brackets.
    pub window_max: usize,
    /// Sphere sample count for Lie Lip-norm directions (d >= 2).
    pub sphere_samples: usize,
    /// RNG seed for all sampled procedures.
    pub seed: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lp: 1e-9,
            norm: 1e-9,
            exact: 1e-12,
            samples: 512,
            residual: 1e-7,
            grid: 256,
            window_max: 12,
            sphere_samples: 256,
            seed: 0,
        }
    }
}

impl Tolerances {
    /// Defaults with a different seed.
    pub fn with_seed(seed: u64) -> Self {
        Tolerances { seed, ..Self::default() }
    }
}
