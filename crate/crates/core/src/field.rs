use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Real samples of a radial function on a shared grid.
///
/// `origin_exponent` is the exponent `sigma` of the `r^{-sigma}` behaviour
/// used to extend the field below `r_min`; `0` means constant extension.
#[derive(Debug, Clone)]
pub struct RealRadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    origin_exponent: f64,
}

/// Complex samples of a radial function on a shared grid.
#[derive(Debug, Clone)]
pub struct ComplexRadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

fn check_len(grid: &RadialGrid, len: usize) -> Result<()> {
    if grid.len() != len {
        return Err(Error::Parameter(format!("field has {len} values but the grid has {} nodes", grid.len())));
    }
    Ok(())
}

impl RealRadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("field values must be finite".into()));
        }
        Ok(RealRadialField { grid, values, origin_exponent: 0.0 })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.r().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        RealRadialField { grid, values: vec![0.0; n], origin_exponent: 0.0 }
    }

    pub fn with_origin_exponent(mut self, sigma: f64) -> Self {
        self.origin_exponent = sigma;
        self
    }

    pub fn origin_exponent(&self) -> f64 {
        self.origin_exponent
    }
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same grid and extension, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        RealRadialField { grid: self.grid.clone(), values, origin_exponent: self.origin_exponent }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.with_values(self.values.iter().map(|v| v * factor).collect())
    }

    pub fn integrate(&self, power: i32) -> f64 {
        self.grid.integrate(&self.values, power)
    }

    pub fn differentiate(&self) -> Result<Self> {
        Ok(self.with_values(self.grid.differentiate(&self.values)?))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Evaluates the field at any `r > 0` using cubic interpolation inside the
    /// grid, zero beyond `r_max` and `v(r_min) (r / r_min)^{-sigma}` below `r_min`.
    pub fn eval(&self, r: f64) -> f64 {
        let g = &self.grid;
        if r > g.r_max() {
            0.0
        } else if r < g.r_min() {
            self.values[0] * (r / g.r_min()).powf(-self.origin_exponent)
        } else {
            g.interpolate(&self.values, r)
        }
    }

    /// The mass-preserving dilation `v^lambda(r) = lambda^{d/2} v(lambda r)`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("scaling factor must be > 0 (got {lambda})")));
        }
        if lambda == 1.0 {
            return Ok(self.clone());
        }
        let amp = lambda.powf(self.grid.d() as f64 / 2.0);
        let values = self.grid.r().iter().map(|&r| amp * self.eval(lambda * r)).collect();
        Ok(self.with_values(values))
    }

    pub fn to_complex(&self) -> ComplexRadialField {
        ComplexRadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

/// Free-function form of [`RealRadialField::scale`].
pub fn scale_field(v: &RealRadialField, lambda: f64) -> Result<RealRadialField> {
    v.scale(lambda)
}

impl ComplexRadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Parameter("field values must be finite".into()));
        }
        Ok(ComplexRadialField { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        ComplexRadialField { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}
