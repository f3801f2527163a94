//! Built-in tuning spaces and their published starting configurations.
//!
//! One space per learner family. Kernel shape parameters are conditional on
//! the kernel choice: `sigma` exists for the radial kernels, `degree` for
//! the polynomial kernel, and `scale`/`offset` for the polynomial and
//! hyperbolic-tangent kernels.

use super::{DesignSpace, HpPoint, ParamSpec, ParamValue};
use crate::learners::LearnerKind;

const KERNELS: [&str; 4] = ["rbfdot", "polydot", "tanhdot", "laplacedot"];

fn kernel_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::categorical("kernel", &KERNELS),
        ParamSpec::continuous("sigma", 0.0, 10.0).when("kernel", &["rbfdot", "laplacedot"]),
        ParamSpec::integer("degree", 1, 10).when("kernel", &["polydot"]),
        ParamSpec::continuous("scale", 0.0, 10.0).when("kernel", &["polydot", "tanhdot"]),
        ParamSpec::continuous("offset", -10.0, 10.0).when("kernel", &["polydot", "tanhdot"]),
    ]
}

/// The tuning space for a learner family.
pub fn space_for(kind: LearnerKind) -> DesignSpace {
    let params = match kind {
        LearnerKind::Gpr => kernel_params(),
        LearnerKind::Svr => {
            let mut params = vec![
                ParamSpec::continuous("c", 0.0, 10.0),
                ParamSpec::continuous("epsilon", 0.0, 1.0),
            ];
            params.extend(kernel_params());
            params
        }
        LearnerKind::Rfr => vec![
            ParamSpec::integer("trees", 1, 1000),
            ParamSpec::integer("nf", 1, 100),
            ParamSpec::integer("min_ts", 1, 50),
            ParamSpec::integer("max_tn", 1, 1000),
        ],
        LearnerKind::Ann => vec![
            ParamSpec::integer("hidden", 1, 100),
            ParamSpec::categorical("activation", &["tanhdot", "relu", "sigmoid", "softrelu"]),
            ParamSpec::categorical("optimizer", &["sgd", "rmsprop", "adam", "adagrad"]),
            ParamSpec::integer("batch_size", 50, 200),
            ParamSpec::continuous("learning_rate", 0.01, 1.0),
            ParamSpec::continuous("momentum", 0.5, 0.99).when("optimizer", &["sgd"]),
        ],
    };
    DesignSpace::new(params).expect("built-in space must validate")
}

/// The published untuned starting configuration for a learner family, used
/// as the before arm in tuned-versus-untuned comparisons.
///
/// Two of these intentionally sit outside the tuning space: the forest's
/// node cap starts unlimited (encoded as the range maximum, which never
/// binds at desk scale), and the network's momentum starts at 0.0 while the
/// tuning range begins at 0.5. Evaluation accepts any learner-valid
/// configuration, so these points are scored as-is.
pub fn baseline_initial(kind: LearnerKind) -> HpPoint {
    match kind {
        LearnerKind::Gpr => HpPoint::from_pairs(&[
            ("kernel", ParamValue::Cat("rbfdot".into())),
            ("sigma", ParamValue::Real(0.5)),
        ]),
        LearnerKind::Svr => HpPoint::from_pairs(&[
            ("c", ParamValue::Real(1.0)),
            ("epsilon", ParamValue::Real(0.1)),
            ("kernel", ParamValue::Cat("rbfdot".into())),
            ("sigma", ParamValue::Real(0.5)),
        ]),
        LearnerKind::Rfr => HpPoint::from_pairs(&[
            ("trees", ParamValue::Int(500)),
            ("nf", ParamValue::Int(3)),
            ("min_ts", ParamValue::Int(5)),
            ("max_tn", ParamValue::Int(1000)),
        ]),
        LearnerKind::Ann => HpPoint::from_pairs(&[
            ("hidden", ParamValue::Int(10)),
            ("activation", ParamValue::Cat("tanhdot".into())),
            ("optimizer", ParamValue::Cat("sgd".into())),
            ("batch_size", ParamValue::Int(120)),
            ("learning_rate", ParamValue::Real(0.1)),
            ("momentum", ParamValue::Real(0.0)),
        ]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_spaces_have_expected_shapes() {
        let gpr = space_for(LearnerKind::Gpr);
        assert_eq!(gpr.len(), 5);
        assert!(gpr.has_categorical());

        let svr = space_for(LearnerKind::Svr);
        assert_eq!(svr.len(), 7);
        assert!(svr.get("c").is_some());
        assert!(svr.get("epsilon").is_some());

        let rfr = space_for(LearnerKind::Rfr);
        assert_eq!(rfr.len(), 4);
        assert!(!rfr.has_categorical());

        let ann = space_for(LearnerKind::Ann);
        assert_eq!(ann.len(), 6);
        let momentum = ann.get("momentum").unwrap();
        assert!(momentum.condition.is_some());
    }

    #[test]
    fn kernel_conditions_follow_kernel_kind() {
        let gpr = space_for(LearnerKind::Gpr);
        let rbf = HpPoint::from_pairs(&[
            ("kernel", ParamValue::Cat("rbfdot".into())),
            ("sigma", ParamValue::Real(0.5)),
        ]);
        gpr.validate_point(&rbf).unwrap();

        let poly = HpPoint::from_pairs(&[
            ("kernel", ParamValue::Cat("polydot".into())),
            ("degree", ParamValue::Int(3)),
            ("scale", ParamValue::Real(7.22)),
            ("offset", ParamValue::Real(-2.24)),
        ]);
        gpr.validate_point(&poly).unwrap();

        let laplace = HpPoint::from_pairs(&[
            ("kernel", ParamValue::Cat("laplacedot".into())),
            ("sigma", ParamValue::Real(0.37)),
        ]);
        gpr.validate_point(&laplace).unwrap();
    }

    #[test]
    fn initial_points_within_their_spaces_validate() {
        for kind in [LearnerKind::Gpr, LearnerKind::Svr, LearnerKind::Rfr] {
            let space = space_for(kind);
            space
                .validate_point(&baseline_initial(kind))
                .unwrap_or_else(|e| panic!("{kind:?}: {e}"));
        }
        // The network's starting momentum of 0.0 predates the tuning range
        // [0.5, 0.99], so that single point must not validate against it.
        let ann = space_for(LearnerKind::Ann);
        assert!(ann.validate_point(&baseline_initial(LearnerKind::Ann)).is_err());
    }
}
