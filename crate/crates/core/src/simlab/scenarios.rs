//! The simulation study's cluster-center surfaces: bivariate normal
//! mixtures f1-f2 (two-cluster setting) and f3-f5 (three-cluster setting),
//! parameterized by the sharpness constant `c`.

use super::SimError;

/// One weighted bivariate normal component.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl MixtureComponent {
    fn new(weight: f64, mean: [f64; 2], cov: [[f64; 2]; 2]) -> Self {
        Self { weight, mean, cov }
    }
}

/// Mixture density `sum_k w_k * phi((x, y); mu_k, Sigma_k)`.
pub fn mixture_density(
    components: &[MixtureComponent],
    x: f64,
    y: f64,
) -> Result<f64, SimError> {
    let mut total = 0.0;
    for comp in components {
        let det = comp.cov[0][0] * comp.cov[1][1] - comp.cov[0][1] * comp.cov[1][0];
        if det <= 0.0 || !det.is_finite() {
            return Err(SimError::SingularCovariance { det });
        }
        let dx = x - comp.mean[0];
        let dy = y - comp.mean[1];
        // Inverse of a 2x2 symmetric matrix, folded into the quadratic form.
        let quad = (comp.cov[1][1] * dx * dx - 2.0 * comp.cov[0][1] * dx * dy
            + comp.cov[0][0] * dy * dy)
            / det;
        total += comp.weight * (-0.5 * quad).exp() / (2.0 * std::f64::consts::PI * det.sqrt());
    }
    Ok(total)
}

/// The published parameterization of cluster center `cluster` (1-based) in
/// simulation setting `scenario`. The constant `c` scales the indicated
/// covariances; f1 and f3 do not depend on it.
pub fn scenario_center(
    scenario: u8,
    cluster: usize,
    c: f64,
) -> Result<Vec<MixtureComponent>, SimError> {
    if !(c > 0.0) {
        return Err(SimError::InvalidConfig(format!("c must be positive, got {c}")));
    }
    let eye = [[1.0, 0.0], [0.0, 1.0]];
    let c_eye = [[c, 0.0], [0.0, c]];
    match (scenario, cluster) {
        (1, 1) => Ok(vec![
            MixtureComponent::new(0.3, [0.0, -3.0], [[1.0, 0.0], [0.0, 5.0]]),
            MixtureComponent::new(0.7, [0.0, 3.0], eye),
        ]),
        (1, 2) => Ok(vec![
            MixtureComponent::new(0.3, [0.0, -3.0], c_eye),
            MixtureComponent::new(0.7, [0.0, 3.0], c_eye),
        ]),
        (2, 1) => Ok(vec![
            MixtureComponent::new(0.3, [0.0, -3.0], eye),
            MixtureComponent::new(0.7, [0.0, 1.0], eye),
        ]),
        (2, 2) => Ok(vec![
            MixtureComponent::new(0.3, [0.0, 1.0], [[c, 0.0], [0.0, 2.0 * c]]),
            MixtureComponent::new(0.7, [0.0, -3.0], c_eye),
        ]),
        (2, 3) => Ok(vec![
            MixtureComponent::new(0.3, [0.0, -2.0], c_eye),
            MixtureComponent::new(0.7, [1.0, 0.0], c_eye),
        ]),
        _ => Err(SimError::UnknownScenario { scenario, cluster }),
    }
}
