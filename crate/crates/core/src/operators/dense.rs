use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use super::OperatorFamily;
use crate::error::{Error, Result};
use crate::smallmat::{CMat, LuFactor};

const CACHE_LIMIT: usize = 4096;

/// Dense `νM - A` with one LU factorization cached per distinct frequency.
#[derive(Debug)]
pub struct DenseOperator {
    mass: Option<CMat>,
    a: CMat,
    theta1: f64,
    real: bool,
    cache: RwLock<HashMap<(u64, u64), Arc<LuFactor>>>,
}

impl DenseOperator {
    /// `mass = None` means `M = Id`.
    pub fn new(mass: Option<CMat>, a: CMat, theta1: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Config("operator matrix must be square".into()));
        }
        if let Some(m) = &mass {
            if m.rows() != a.rows() || m.cols() != a.cols() {
                return Err(Error::Config("mass and operator matrices differ in shape".into()));
            }
        }
        let is_real = |m: &CMat| m.as_slice().iter().all(|z| z.im == 0.0);
        let real = is_real(&a) && mass.as_ref().map_or(true, is_real);
        Ok(DenseOperator {
            mass,
            a,
            theta1,
            real,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn matrix(&self) -> &CMat {
        &self.a
    }

    fn factor(&self, nu: Complex64) -> Result<Arc<LuFactor>> {
        let key = (nu.re.to_bits(), nu.im.to_bits());
        if let Some(f) = self.cache.read().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(f));
        }
        let n = self.a.rows();
        let shifted = match &self.mass {
            Some(m) => m.scale(nu).sub(&self.a),
            None => CMat::identity(n).scale(nu).sub(&self.a),
        };
        let lu = Arc::new(shifted.lu().map_err(|e| Error::Solver {
            nu,
            reason: e.to_string(),
        })?);
        let mut cache = self.cache.write().expect("cache poisoned");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, Arc::clone(&lu));
        Ok(lu)
    }
}

impl OperatorFamily for DenseOperator {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn theta1_hint(&self) -> f64 {
        self.theta1
    }

    fn has_mass(&self) -> bool {
        self.mass.is_some()
    }

    fn is_real(&self) -> bool {
        self.real
    }

    fn solve(&self, nu: Complex64, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.dim() {
            return Err(Error::Config(format!(
                "right-hand side has length {}, expected {}",
                y.len(),
                self.dim()
            )));
        }
        Ok(self.factor(nu)?.solve(y))
    }

    fn apply_mass(&self, x: &[Complex64]) -> Vec<Complex64> {
        match &self.mass {
            Some(m) => m.matvec(x),
            None => x.to_vec(),
        }
    }

    fn apply_operator(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.a.matvec(x)
    }
}
