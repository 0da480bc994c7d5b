use std::fmt;

/// Named rule applied while deriving a modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    ShiftInvariance,
    ShiftOnly,
    ConstantMap,
    ProjectionSpecial,
    Reflector,
    Relaxation,
    OguraYamada,
    Convexity,
    NonBijective,
    MatrixModulus,
    OrthogonalMatrix,
    LinearCollapse,
    DouglasRachfordSubspaces,
    TwoSubspaceModulus,
    ResolventCocoercive,
    ProxLipschitz,
    MoreauEnvelope,
    YosidaResolvent,
    ReflectedResolvent,
    ProxNonsmooth,
    ScalarModulus,
    LimitingOperator,
    FirmDefault,
    NonexpansiveDefault,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::ShiftInvariance => "shift_invariance",
            Rule::ShiftOnly => "shift_only",
            Rule::ConstantMap => "constant_map",
            Rule::ProjectionSpecial => "projection_special",
            Rule::Reflector => "reflector",
            Rule::Relaxation => "relaxation",
            Rule::OguraYamada => "ogura_yamada",
            Rule::Convexity => "convexity",
            Rule::NonBijective => "non_bijective",
            Rule::MatrixModulus => "matrix_modulus",
            Rule::OrthogonalMatrix => "orthogonal_matrix",
            Rule::LinearCollapse => "linear_collapse",
            Rule::DouglasRachfordSubspaces => "douglas_rachford_subspaces",
            Rule::TwoSubspaceModulus => "two_subspace_modulus",
            Rule::ResolventCocoercive => "resolvent_cocoercive",
            Rule::ProxLipschitz => "prox_lipschitz",
            Rule::MoreauEnvelope => "moreau_envelope",
            Rule::YosidaResolvent => "yosida_resolvent",
            Rule::ReflectedResolvent => "reflected_resolvent",
            Rule::ProxNonsmooth => "prox_nonsmooth",
            Rule::ScalarModulus => "scalar_modulus",
            Rule::LimitingOperator => "limiting_operator",
            Rule::FirmDefault => "firm_default",
            Rule::NonexpansiveDefault => "nonexpansive_default",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub rule: Rule,
    pub detail: String,
}

/// Certified interval `[lower, upper]` for the modulus, with the rules that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusBound {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub trace: Vec<TraceStep>,
}

impl ModulusBound {
    pub fn exact(k: f64, rule: Rule, detail: impl Into<String>) -> Self {
        let k = k.clamp(0.0, 1.0);
        Self {
            lower: k,
            upper: k,
            exact: true,
            trace: vec![TraceStep {
                rule,
                detail: detail.into(),
            }],
        }
    }

    pub fn interval(lower: f64, upper: f64, trace: Vec<TraceStep>) -> Self {
        let upper = upper.clamp(0.0, 1.0);
        let lower = lower.clamp(0.0, upper);
        Self {
            lower,
            upper,
            exact: false,
            trace,
        }
    }

    /// `[0, 1]` with no derivation.
    pub fn unknown() -> Self {
        Self::interval(0.0, 1.0, Vec::new())
    }

    /// Exact value when certified, else `None`.
    pub fn value(&self) -> Option<f64> {
        self.exact.then_some(self.upper)
    }

    pub fn rules(&self) -> Vec<&'static str> {
        self.trace.iter().map(|s| s.rule.as_str()).collect()
    }

    pub(crate) fn push(mut self, rule: Rule, detail: impl Into<String>) -> Self {
        self.trace.push(TraceStep {
            rule,
            detail: detail.into(),
        });
        self
    }

    /// Prepends a step, keeping the rest of the derivation.
    pub(crate) fn after(mut self, rule: Rule, detail: impl Into<String>) -> Self {
        self.trace.insert(
            0,
            TraceStep {
                rule,
                detail: detail.into(),
            },
        );
        self
    }

    /// Multiplies both ends by `factor ≥ 0`, capping at 1.
    pub(crate) fn scaled(mut self, factor: f64, rule: Rule, detail: impl Into<String>) -> Self {
        self.lower = (self.lower * factor).min(1.0);
        self.upper = (self.upper * factor).min(1.0);
        self.push(rule, detail)
    }
}

/// Ogura–Yamada composition bound `(a + b − 2ab)/(1 − ab)`, equal to 1 when `ab = 1`.
pub fn ogura_yamada(a: f64, b: f64) -> f64 {
    let ab = a * b;
    if ab >= 1.0 {
        return 1.0;
    }
    ((a + b - 2.0 * ab) / (1.0 - ab)).clamp(0.0, 1.0)
}
