//! Discrimination, threshold selection, survival, agreement and correlation.

pub mod agreement;
pub mod correlation;
pub mod roc;
pub mod survival;
pub mod threshold;

pub use agreement::{cohen_kappa_weighted, icc_2_1, lights_kappa, IccResult, KappaWeights, LightsKappa, RaterMatrix};
pub use correlation::{linear_regression, pearson, Regression};
pub use roc::{bootstrap_auc_ci, roc_auc, BootstrapCi, RocCurve, RocPoint};
pub use survival::{
    cox_univariate, kaplan_meier, CoxFit, Divergence, Endpoint, EventDef, KmStep, Status, SurvivalRecord,
};
pub use threshold::{classify, confusion_metrics, threshold_at_sensitivity, ConfusionMetrics, ThresholdResult};
