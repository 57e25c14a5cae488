//! Bundled benchmark models.

use crate::model::{parse_model, ReactionNetwork};
use crate::oracle::StateBox;

/// A bundled model with its default experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub model: &'static str,
    pub param: &'static str,
    pub epsilon: f64,
    pub horizon: f64,
    pub paths: usize,
    pub observable: &'static str,
    /// Truncation box for the uniformization oracle, `0 ..= hi` per species.
    pub exact_box: &'static [i64],
}

impl Preset {
    pub fn network(&self) -> ReactionNetwork {
        parse_model(self.model).unwrap_or_else(|e| panic!("preset `{}` does not parse: {e}", self.name))
    }

    pub fn theta(&self) -> f64 {
        self.network().params.get(self.param).expect("preset parameter is declared")
    }

    pub fn exact_box(&self) -> StateBox {
        StateBox::from_upper(self.exact_box.to_vec())
    }
}

const GENE: &str = "\
# Constitutive gene expression: transcription, translation, degradation.
network gene
species: M P
params: theta = 0.25
reaction: -> M ; rate = 2
reaction: M -> M + P ; rate = 10*M
reaction: M -> ; rate = theta*M
reaction: P -> ; rate = P
";

const MMQ: &str = "\
# M/M/infinity queue, arrival rate perturbed.
network mmq
species: M
params: theta = 2
reaction: -> M ; rate = theta
reaction: M -> ; rate = 0.1*M
";

const MMQ_DEATH: &str = "\
# M/M/infinity queue, service rate perturbed.
network mmq_death
species: M
params: theta = 0.1
reaction: -> M ; rate = 2
reaction: M -> ; rate = theta*M
";

const TOGGLE: &str = "\
# Genetic toggle switch with Hill-type repression.
network toggle
species: X1 X2
params: alpha1 = 50 alpha2 = 16 beta = 2.5 gamma = 1
reaction: -> X1 ; rate = alpha1/(1 + X2^beta)
reaction: X1 -> ; rate = X1
reaction: -> X2 ; rate = alpha2/(1 + X1^gamma)
reaction: X2 -> ; rate = X2
";

const PURE_DEATH: &str = "\
# A single molecule decaying at rate theta.
network puredeath
species: X
params: theta = 1
init: X = 1
reaction: X -> ; rate = mass_action(theta)
";

pub const PRESETS: [Preset; 5] = [
    Preset {
        name: "gene",
        description: "mRNA/protein production; d/dtheta E P(30) at theta = 1/4",
        model: GENE,
        param: "theta",
        epsilon: 0.05,
        horizon: 30.0,
        paths: 10_000,
        observable: "P",
        exact_box: &[40, 400],
    },
    Preset {
        name: "mmq",
        description: "M/M/inf queue, arrival rate theta = 2, service rate 0.1",
        model: MMQ,
        param: "theta",
        epsilon: 0.01,
        horizon: 100.0,
        paths: 1_000,
        observable: "M",
        exact_box: &[80],
    },
    Preset {
        name: "mmq-death",
        description: "M/M/inf queue, arrival rate 2, service rate theta = 0.1",
        model: MMQ_DEATH,
        param: "theta",
        epsilon: 0.01,
        horizon: 100.0,
        paths: 1_000,
        observable: "M",
        exact_box: &[80],
    },
    Preset {
        name: "toggle",
        description: "toggle switch; sensitivity of X1 to alpha1",
        model: TOGGLE,
        param: "alpha1",
        epsilon: 0.1,
        horizon: 20.0,
        paths: 10_000,
        observable: "X1",
        exact_box: &[120, 60],
    },
    Preset {
        name: "puredeath",
        description: "single molecule decaying at rate theta = 1; E X(1) = e^-theta",
        model: PURE_DEATH,
        param: "theta",
        epsilon: 0.1,
        horizon: 1.0,
        paths: 100_000,
        observable: "X",
        exact_box: &[1],
    },
];

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name.eq_ignore_ascii_case(name))
}
