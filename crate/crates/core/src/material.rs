//! Physical constants of the fluid and the solid, and the incident wave.

use num_complex::Complex64;

use crate::error::{BemError, Result};

/// Fluid and solid parameters at one angular frequency, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSystem {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub rho_f: f64,
    pub c: f64,
    pub omega: f64,
    /// Acoustic wavenumber `omega / c`.
    pub k: f64,
    /// Shear wavenumber `omega sqrt(rho / mu)`.
    pub k_s: f64,
    /// Compressional wavenumber `omega sqrt(rho / (lambda + 2 mu))`.
    pub k_p: f64,
    /// Coupling constant `rho_f omega^2`.
    pub eta: f64,
}

/// Frequency-independent parameters; `at(omega)` derives a [`MaterialSystem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialTemplate {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub rho_f: f64,
    pub c: f64,
}

impl MaterialTemplate {
    /// Lamé constants from shear and compressional wave speeds.
    pub fn from_wave_speeds(c_s: f64, c_p: f64, rho: f64, rho_f: f64, c: f64) -> Result<Self> {
        positive("c_s", c_s)?;
        positive("c_p", c_p)?;
        positive("rho", rho)?;
        let mu = rho * c_s * c_s;
        let lambda = rho * c_p * c_p - 2.0 * mu;
        Ok(Self { lambda, mu, rho, rho_f, c })
    }

    pub fn at(&self, omega: f64) -> Result<MaterialSystem> {
        derive_wavenumbers(self.lambda, self.mu, self.rho, self.rho_f, self.c, omega)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(BemError::param(name, format!("must be positive and finite, got {v}")))
    }
}

/// Validates the constants and fills in `k`, `k_s`, `k_p` and `eta`.
pub fn derive_wavenumbers(
    lambda: f64,
    mu: f64,
    rho: f64,
    rho_f: f64,
    c: f64,
    omega: f64,
) -> Result<MaterialSystem> {
    positive("mu", mu)?;
    if !(lambda + mu > 0.0) || !lambda.is_finite() {
        return Err(BemError::param("lambda", format!("lambda + mu must be positive, got lambda = {lambda}")));
    }
    positive("rho", rho)?;
    positive("rho_f", rho_f)?;
    positive("c", c)?;
    positive("omega", omega)?;
    Ok(MaterialSystem {
        lambda,
        mu,
        rho,
        rho_f,
        c,
        omega,
        k: omega / c,
        k_s: omega * (rho / mu).sqrt(),
        k_p: omega * (rho / (lambda + 2.0 * mu)).sqrt(),
        eta: rho_f * omega * omega,
    })
}

impl MaterialSystem {
    pub fn template(&self) -> MaterialTemplate {
        MaterialTemplate { lambda: self.lambda, mu: self.mu, rho: self.rho, rho_f: self.rho_f, c: self.c }
    }

    /// `rho omega^2`, equal to `mu k_s^2`.
    pub fn rho_omega2(&self) -> f64 {
        self.rho * self.omega * self.omega
    }

    pub fn c_s(&self) -> f64 {
        (self.mu / self.rho).sqrt()
    }

    pub fn c_p(&self) -> f64 {
        ((self.lambda + 2.0 * self.mu) / self.rho).sqrt()
    }
}

/// Incident plane wave `exp(i k x.d)` of unit amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub direction: [f64; 2],
    pub wavenumber: f64,
    pub amplitude: Complex64,
}

impl PlaneWave {
    /// Normalises `direction`; fails on a zero vector.
    pub fn new(direction: [f64; 2], wavenumber: f64) -> Result<Self> {
        let len = direction[0].hypot(direction[1]);
        if !(len > 0.0) || !len.is_finite() {
            return Err(BemError::param("direction", "must be a non-zero vector"));
        }
        positive("wavenumber", wavenumber)?;
        Ok(Self {
            direction: [direction[0] / len, direction[1] / len],
            wavenumber,
            amplitude: Complex64::new(1.0, 0.0),
        })
    }

    pub fn with_amplitude(mut self, amplitude: Complex64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn value(&self, x: [f64; 2]) -> Complex64 {
        let phase = self.wavenumber * (x[0] * self.direction[0] + x[1] * self.direction[1]);
        self.amplitude * Complex64::from_polar(1.0, phase)
    }

    pub fn gradient(&self, x: [f64; 2]) -> [Complex64; 2] {
        let ikp = Complex64::new(0.0, self.wavenumber) * self.value(x);
        [ikp * self.direction[0], ikp * self.direction[1]]
    }
}

/// Incident pressure, its normal derivative and its gradient at `x`.
pub fn incident_trace(wave: &PlaneWave, x: [f64; 2], n: [f64; 2]) -> (Complex64, Complex64, [Complex64; 2]) {
    let p = wave.value(x);
    let g = wave.gradient(x);
    (p, g[0] * n[0] + g[1] * n[1], g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_disc_wavenumbers() {
        let m = derive_wavenumbers(1.0, 2.0, 1.0, 0.5, 1.0, 7.0).unwrap();
        assert!((m.k - 7.0).abs() < 1e-15);
        assert!((m.k_s - 7.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((m.k_p - 7.0 / 5f64.sqrt()).abs() < 1e-14);
        assert!(m.k_p < m.k_s);
        assert!((m.rho_omega2() - m.mu * m.k_s * m.k_s).abs() < 1e-12);
    }

    #[test]
    fn equal_rho_mu_gives_ks_omega() {
        let m = derive_wavenumbers(3.0, 2.5, 2.5, 1.0, 1.0, 4.2).unwrap();
        assert!((m.k_s - 4.2).abs() < 1e-14);
    }

    #[test]
    fn wave_speed_parameterisation() {
        let t = MaterialTemplate::from_wave_speeds(3122.0, 6198.0, 2700.0, 1000.0, 1500.0).unwrap();
        assert!((t.mu - 2700.0 * 3122.0f64.powi(2)).abs() < 1e-3);
        let m = t.at(50.0 * PI * 1e3).unwrap();
        assert!((m.k_s - m.omega / 3122.0).abs() < 1e-10);
        assert!((m.c_p() - 6198.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_constants_are_named() {
        match derive_wavenumbers(1.0, 0.0, 1.0, 1.0, 1.0, 1.0) {
            Err(BemError::Parameter { name, .. }) => assert_eq!(name, "mu"),
            other => panic!("{other:?}"),
        }
        match derive_wavenumbers(-3.0, 2.0, 1.0, 1.0, 1.0, 1.0) {
            Err(BemError::Parameter { name, .. }) => assert_eq!(name, "lambda"),
            other => panic!("{other:?}"),
        }
        assert!(derive_wavenumbers(1.0, 2.0, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn incident_trace_examples() {
        let w = PlaneWave::new([1.0, 0.0], 1.0).unwrap();
        let (p, dpdn, _) = incident_trace(&w, [PI, 0.0], [1.0, 0.0]);
        assert!((p - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((dpdn - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let (p, dpdn, _) = incident_trace(&w, [0.0, 3.0], [0.0, 1.0]);
        assert!((p - 1.0).norm() < 1e-15);
        assert_eq!(dpdn, Complex64::new(0.0, 0.0));
    }
}
