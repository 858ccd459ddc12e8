use std::collections::BTreeMap;
use std::sync::Arc;

use super::{solve_bivector, MoyalError};
use crate::orbit::{kirillov_matrix, unit_kirillov_matrix, ChartConvention, Lambda, SymplecticMatrix};

/// A way of choosing the bivector `W` that feeds the star product.
pub trait BivectorSource: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn bivector(&self, lambda: &Lambda, conv: &ChartConvention) -> Result<SymplecticMatrix, MoyalError>;
}

/// The Kirillov pattern with unit entries, independent of `λ`.
pub struct UnitBivector;

impl BivectorSource for UnitBivector {
    fn name(&self) -> &'static str {
        "unit"
    }
    fn description(&self) -> &'static str {
        "Kirillov pattern with unit entries: (s1,t2) = -1, (s2,t1) = +1"
    }
    fn bivector(&self, _: &Lambda, _: &ChartConvention) -> Result<SymplecticMatrix, MoyalError> {
        Ok(unit_kirillov_matrix())
    }
}

/// The matrix of the Kirillov 2-form `λ(dt2∧ds1 + ds2∧dt1)`, used as a bivector.
pub struct FormBivector;

impl BivectorSource for FormBivector {
    fn name(&self) -> &'static str {
        "form"
    }
    fn description(&self) -> &'static str {
        "matrix of the Kirillov 2-form, lambda times the unit pattern"
    }
    fn bivector(&self, lambda: &Lambda, _: &ChartConvention) -> Result<SymplecticMatrix, MoyalError> {
        Ok(kirillov_matrix(lambda).form)
    }
}

/// Least-squares solution of the origin covariance system for the convention.
pub struct SolvedBivector;

impl BivectorSource for SolvedBivector {
    fn name(&self) -> &'static str {
        "solved"
    }
    fn description(&self) -> &'static str {
        "solved so that P1 of energies matches the bracket energy at the chart origin"
    }
    fn bivector(&self, lambda: &Lambda, conv: &ChartConvention) -> Result<SymplecticMatrix, MoyalError> {
        Ok(solve_bivector(lambda, conv)?.matrix)
    }
}

/// Bivector sources by name.
#[derive(Clone)]
pub struct BivectorRegistry {
    sources: BTreeMap<&'static str, Arc<dyn BivectorSource>>,
}

impl BivectorRegistry {
    pub fn empty() -> Self {
        Self { sources: BTreeMap::new() }
    }

    pub fn register(&mut self, source: Arc<dyn BivectorSource>) {
        self.sources.insert(source.name(), source);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn BivectorSource>, MoyalError> {
        self.sources
            .get(name)
            .cloned()
            .ok_or_else(|| MoyalError::UnknownBivector(name.to_string(), self.names().join(", ")))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.sources.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn BivectorSource>> {
        self.sources.values()
    }
}

impl Default for BivectorRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(UnitBivector));
        r.register(Arc::new(FormBivector));
        r.register(Arc::new(SolvedBivector));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        let reg = BivectorRegistry::default();
        assert_eq!(reg.names(), vec!["form", "solved", "unit"]);
        assert!(matches!(reg.get("nope"), Err(MoyalError::UnknownBivector(..))));
        let l = Lambda::from_ratio(2, 1).unwrap();
        let conv = ChartConvention::default();
        let form = reg.get("form").unwrap().bivector(&l, &conv).unwrap();
        let unit = reg.get("unit").unwrap().bivector(&l, &conv).unwrap();
        assert_eq!(form, unit.scale(l.value()));
    }
}
