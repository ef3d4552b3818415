/// Numerical tolerances shared by every check in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative Parseval residual for DFTs on adequately sized grids.
    pub parseval: f64,
    /// Residual for exact identities evaluated through quadrature.
    pub identity: f64,
    /// Relative error of periodogram mass and correlation quadratures.
    pub quadrature: f64,
    /// Convolution theorem residual, relative to ‖a‖₁‖b‖₁.
    pub convolution: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            parseval: 1e-10,
            identity: 1e-8,
            quadrature: 1e-9,
            convolution: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn is_valid(&self) -> bool {
        [self.parseval, self.identity, self.quadrature, self.convolution]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0)
    }
}
