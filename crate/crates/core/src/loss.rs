//! Base loss families `F(x, y; θ)` with analytic gradients and certified
//! strong-convexity / smoothness constants.
//!
//! Every family here is a function of the margin `t = ⟨x, θ⟩` plus an
//! isotropic ℓ₂ penalty, so its Hessian has the form `h(t)·xxᵀ + cλ·I`.
//! Certification bounds `h` over the data and turns that into `(m, M)`.

use serde::{Deserialize, Serialize};

use crate::data::{DataSet, LabeledSample};
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{self, dot, norm_sq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossFamily {
    /// `(y − ⟨x,θ⟩)² + λ‖θ‖²`
    RidgeSquared,
    /// `log(1 + exp(−y⟨x,θ⟩)) + λ‖θ‖²`
    RegLogistic,
    /// `max(0, 1 − y⟨x,θ⟩)² + (λ/2)‖θ‖²`
    SquaredHingeSvm,
    /// `(y − g(⟨x,θ⟩))² + λ‖θ‖²`
    RegGlm,
    /// `max(0, 1 − y⟨x,θ⟩) + (λ/2)‖θ‖²`. Not smooth, never certifiable;
    /// the gradient is a subgradient.
    Hinge,
}

impl LossFamily {
    pub const CERTIFIABLE: [LossFamily; 4] = [
        LossFamily::RidgeSquared,
        LossFamily::RegLogistic,
        LossFamily::SquaredHingeSvm,
        LossFamily::RegGlm,
    ];

    pub fn is_classification(self) -> bool {
        matches!(
            self,
            LossFamily::RegLogistic | LossFamily::SquaredHingeSvm | LossFamily::Hinge
        )
    }
}

/// GLM link function `g`. Only links with bounded first and second
/// derivatives are representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Link {
    #[default]
    Identity,
    /// `g(t) = scale · tanh(slope · t)`
    ScaledTanh { scale: f64, slope: f64 },
    /// `g(t) = 1 / (1 + e^{−t})`
    LogisticCdf,
}

// sup_t |d²/dt² tanh(t)| = 4 / (3√3), attained at tanh(t) = 1/√3.
const TANH_SECOND_SUP: f64 = 0.769_800_358_919_501;
// sup_t |σ''(t)| = 1 / (6√3).
const SIGMOID_SECOND_SUP: f64 = 0.096_225_044_864_937_63;

impl Link {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Link::ScaledTanh { scale, slope } => {
                if !(scale.is_finite() && slope.is_finite() && scale > 0.0 && slope > 0.0) {
                    return Err(Error::Uncertifiable(format!(
                        "scaled-tanh link needs finite positive scale and slope, got ({scale}, {slope})"
                    )));
                }
                Ok(())
            }
            Link::Identity | Link::LogisticCdf => Ok(()),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Link::Identity => t,
            Link::ScaledTanh { scale, slope } => scale * (slope * t).tanh(),
            Link::LogisticCdf => sigmoid(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Link::Identity => 1.0,
            Link::ScaledTanh { scale, slope } => {
                let th = (slope * t).tanh();
                scale * slope * (1.0 - th * th)
            }
            Link::LogisticCdf => {
                let s = sigmoid(t);
                s * (1.0 - s)
            }
        }
    }

    /// `sup |g|`, `None` when unbounded.
    fn sup_value(&self) -> Option<f64> {
        match *self {
            Link::Identity => None,
            Link::ScaledTanh { scale, .. } => Some(scale),
            Link::LogisticCdf => Some(1.0),
        }
    }

    fn sup_derivative(&self) -> f64 {
        match *self {
            Link::Identity => 1.0,
            Link::ScaledTanh { scale, slope } => scale * slope,
            Link::LogisticCdf => 0.25,
        }
    }

    fn sup_second_derivative(&self) -> f64 {
        match *self {
            Link::Identity => 0.0,
            Link::ScaledTanh { scale, slope } => scale * slope * slope * TANH_SECOND_SUP,
            Link::LogisticCdf => SIGMOID_SECOND_SUP,
        }
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Strong convexity `m` and smoothness `M` of `F(x, y; ·)`, valid for every
/// sample of the dataset they were certified against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Curvature {
    pub strong_convexity: f64,
    pub smoothness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    family: LossFamily,
    lambda: f64,
    link: Link,
    domain_radius: f64,
    curvature: Option<Curvature>,
}

impl LossModel {
    pub fn new(family: LossFamily, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        Ok(Self {
            family,
            lambda,
            link: Link::Identity,
            domain_radius: f64::INFINITY,
            curvature: None,
        })
    }

    pub fn with_link(mut self, link: Link) -> Result<Self> {
        link.validate()?;
        self.link = link;
        self.curvature = None;
        Ok(self)
    }

    pub fn with_domain_radius(mut self, radius: f64) -> Result<Self> {
        if radius.is_nan() || radius <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "domain radius must be positive, got {radius}"
            )));
        }
        self.domain_radius = radius;
        self.curvature = None;
        Ok(self)
    }

    pub fn family(&self) -> LossFamily {
        self.family
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn link(&self) -> Link {
        self.link
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn curvature(&self) -> Result<Curvature> {
        self.curvature.ok_or(Error::Uncertified)
    }

    pub fn is_certified(&self) -> bool {
        self.curvature.is_some()
    }

    /// Checks the shape and label constraints for one evaluation.
    pub fn check(&self, sample: &LabeledSample, theta: &[f64]) -> Result<()> {
        ensure_dim(sample.dim(), theta.len())?;
        if !sample.is_finite() {
            return Err(Error::NonFinite("sample"));
        }
        if !linalg::all_finite(theta) {
            return Err(Error::NonFinite("theta"));
        }
        self.check_label(sample.y)
    }

    fn check_label(&self, y: f64) -> Result<()> {
        if self.family.is_classification() && y != 1.0 && y != -1.0 {
            return Err(Error::InvalidLabel(y));
        }
        Ok(())
    }

    /// Validates every sample of `data` against this model and parameters
    /// of dimension `dim`.
    pub fn check_dataset(&self, data: &DataSet, dim: usize) -> Result<()> {
        for s in data {
            ensure_dim(dim, s.dim())?;
            self.check_label(s.y)?;
        }
        Ok(())
    }

    pub fn value(&self, sample: &LabeledSample, theta: &[f64]) -> Result<f64> {
        self.check(sample, theta)?;
        Ok(self.value_unchecked(sample, theta))
    }

    pub fn gradient(&self, sample: &LabeledSample, theta: &[f64]) -> Result<Vec<f64>> {
        self.check(sample, theta)?;
        Ok(self.gradient_unchecked(sample, theta))
    }

    /// `F(x, y; θ)` without validating the inputs.
    pub fn value_unchecked(&self, sample: &LabeledSample, theta: &[f64]) -> f64 {
        let t = dot(&sample.x, theta);
        let y = sample.y;
        let pen = norm_sq(theta);
        match self.family {
            LossFamily::RidgeSquared => {
                let r = y - t;
                r * r + self.lambda * pen
            }
            LossFamily::RegLogistic => softplus(-y * t) + self.lambda * pen,
            LossFamily::SquaredHingeSvm => {
                let h = (1.0 - y * t).max(0.0);
                h * h + 0.5 * self.lambda * pen
            }
            LossFamily::RegGlm => {
                let r = y - self.link.value(t);
                r * r + self.lambda * pen
            }
            LossFamily::Hinge => (1.0 - y * t).max(0.0) + 0.5 * self.lambda * pen,
        }
    }

    /// `∇_θ F(x, y; θ)` without validating the inputs.
    pub fn gradient_unchecked(&self, sample: &LabeledSample, theta: &[f64]) -> Vec<f64> {
        let t = dot(&sample.x, theta);
        let y = sample.y;
        // Gradient is `coef·x + pen_coef·θ`.
        let (coef, pen_coef) = match self.family {
            LossFamily::RidgeSquared => (-2.0 * (y - t), 2.0 * self.lambda),
            LossFamily::RegLogistic => (-y * sigmoid(-y * t), 2.0 * self.lambda),
            LossFamily::SquaredHingeSvm => (-2.0 * (1.0 - y * t).max(0.0) * y, self.lambda),
            LossFamily::RegGlm => (
                -2.0 * (y - self.link.value(t)) * self.link.derivative(t),
                2.0 * self.lambda,
            ),
            LossFamily::Hinge => {
                let c = if y * t < 1.0 { -y } else { 0.0 };
                (c, self.lambda)
            }
        };
        sample
            .x
            .iter()
            .zip(theta)
            .map(|(xi, ti)| coef * xi + pen_coef * ti)
            .collect()
    }

    /// Computes `(m, M)` valid on every sample of `dataset` and stores them
    /// in the model.
    pub fn certify_constants(&mut self, dataset: &DataSet) -> Result<Curvature> {
        if dataset.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        for (index, s) in dataset.iter().enumerate() {
            let norm = linalg::norm(&s.x);
            if norm > self.domain_radius {
                return Err(Error::OutOfDomain {
                    index,
                    norm,
                    radius: self.domain_radius,
                });
            }
            self.check_label(s.y)?;
        }
        let r2 = dataset.max_norm_sq();
        let lambda = self.lambda;
        let need_lambda = |what: &str| -> Result<()> {
            if lambda > 0.0 {
                Ok(())
            } else {
                Err(Error::NotStronglyConvex(format!(
                    "{what} with lambda = 0 has m = 0; set lambda > 0"
                )))
            }
        };
        let curvature = match self.family {
            LossFamily::RidgeSquared => {
                need_lambda("ridge squared loss")?;
                Curvature {
                    strong_convexity: 2.0 * lambda,
                    smoothness: 2.0 * r2 + 2.0 * lambda,
                }
            }
            LossFamily::RegLogistic => {
                need_lambda("logistic loss")?;
                Curvature {
                    strong_convexity: 2.0 * lambda,
                    smoothness: r2 / 4.0 + 2.0 * lambda,
                }
            }
            LossFamily::SquaredHingeSvm => {
                need_lambda("squared hinge loss")?;
                Curvature {
                    strong_convexity: lambda,
                    smoothness: 2.0 * r2 + lambda,
                }
            }
            LossFamily::RegGlm => {
                need_lambda("GLM loss")?;
                self.glm_curvature(r2, dataset.max_abs_label())?
            }
            LossFamily::Hinge => {
                return Err(Error::Uncertifiable(
                    "plain hinge loss is not smooth; use squared-hinge-svm".into(),
                ))
            }
        };
        self.curvature = Some(curvature);
        Ok(curvature)
    }

    // d²/dt² (y − g(t))² = 2g'² − 2(y − g)g''. The second term is bounded by
    // 2(|y| + sup|g|)·sup|g''| and can be negative, eating into 2λ.
    fn glm_curvature(&self, r2: f64, max_abs_y: f64) -> Result<Curvature> {
        self.link.validate()?;
        let g1 = self.link.sup_derivative();
        let g2 = self.link.sup_second_derivative();
        let cross = if g2 > 0.0 {
            let g0 = self.link.sup_value().ok_or_else(|| {
                Error::Uncertifiable("link has curvature but is unbounded".into())
            })?;
            2.0 * (max_abs_y + g0) * g2
        } else {
            0.0
        };
        let m = 2.0 * self.lambda - cross * r2;
        if m <= 0.0 {
            return Err(Error::NotStronglyConvex(format!(
                "link curvature {:.3e} over max |x|^2 = {r2:.3e} exceeds 2*lambda = {:.3e}",
                cross,
                2.0 * self.lambda
            )));
        }
        Ok(Curvature {
            strong_convexity: m,
            smoothness: 2.0 * self.lambda + (2.0 * g1 * g1 + cross) * r2,
        })
    }
}
