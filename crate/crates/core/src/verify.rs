//! Acceptance-criteria runner (populated alongside the acceptance tests).

pub struct CriterionReport {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}
