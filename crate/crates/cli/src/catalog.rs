use crate::config::Experiment;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogEntry {
    pub experiment: Experiment,
    pub description: &'static str,
    /// The statement of the theory the experiment probes.
    pub anchor: &'static str,
    pub csv: &'static str,
    pub header: &'static [&'static str],
}

impl CatalogEntry {
    /// `<file>(<columns>)`.
    pub fn schema(&self) -> String {
        format!("{}({})", self.csv, self.header.join(","))
    }
}

pub const IDENTITY_HEADER: &[&str] = &["N", "seed", "check", "violation", "scale", "passed"];
pub const GLOBAL_HEADER: &[&str] = &["N", "seed", "E", "eta", "Re_s", "Im_s", "Re_m", "Im_m", "abs_err"];
pub const LOCAL_HEADER: &[&str] = &["N", "seed", "E", "eta", "Lambda", "LambdaStar", "Theta", "Psi", "inv_N_eta", "failed"];
pub const RIGIDITY_HEADER: &[&str] = &["N", "seed", "i", "lambda", "gamma", "dev", "normalized"];
pub const DELOC_HEADER: &[&str] = &["N", "seed", "i", "supstat"];
pub const COUNTING_HEADER: &[&str] = &["N", "seed", "source", "interval", "a", "b", "mu", "rho", "scaled_dev"];
pub const EDGE_HEADER: &[&str] = &["N", "seed", "l1", "lN", "scaled1", "scaledN"];
pub const FLUCT_HEADER: &[&str] = &["N", "seed", "eta", "avg_Q", "max_Q", "LambdaStar"];
pub const LARGE_DEV_HEADER: &[&str] = &["kind", "N", "seed", "value", "psi"];
pub const TWOPOINT_HEADER: &[&str] = &["r_bin", "estimate", "prediction", "count"];
pub const GFC_HEADER: &[&str] = &["N", "gamma_unused", "ensemble", "Re_t1", "Im_t1", "Re_t2", "Im_t2", "seed"];
pub const HS_HEADER: &[&str] = &["N", "seed", "method", "function", "max_error", "skew", "evaluations"];
pub const REPULSION_HEADER: &[&str] = &["N", "seed", "source", "spacing"];

pub const CATALOG: [CatalogEntry; 13] = [
    CatalogEntry {
        experiment: Experiment::IdentitySuite,
        description: "exact Ward, resolvent, Schur and 1/G_ii identities plus a contour-integral check of exp(H)",
        anchor: "identity-suite — Ward identity, resolvent expansions and Schur complement formula",
        csv: "identity-suite.csv",
        header: IDENTITY_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::GlobalLaw,
        description: "empirical Stieltjes transform against m(z) and the spectral distribution against the semicircle",
        anchor: "global-law — global semicircle law",
        csv: "global-law.csv",
        header: GLOBAL_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::LocalLaw,
        description: "Λ, Λ*, Θ against Ψ and 1/(Nη) over a grid of the spectral domain",
        anchor: "local-law — local semicircle law for Wigner matrices",
        csv: "local-law.csv",
        header: LOCAL_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::Rigidity,
        description: "eigenvalue deviations from the typical locations γ_i",
        anchor: "rigidity — rigidity of eigenvalues",
        csv: "rigidity.csv",
        header: RIGIDITY_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::Delocalization,
        description: "sup-norm statistic N·max_k |u_i(k)|² of every eigenvector",
        anchor: "delocalization — complete delocalization of eigenvectors",
        csv: "deloc.csv",
        header: DELOC_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::Counting,
        description: "eigenvalue counts in random intervals against the semicircle measure, with an i.i.d. control",
        anchor: "counting — eigenvalue counting function",
        csv: "counting.csv",
        header: COUNTING_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::EdgeScaling,
        description: "extreme eigenvalues, the norm bound and the Tracy–Widom limit of the top eigenvalue",
        anchor: "edge-scaling — norm bound and edge universality",
        csv: "edge.csv",
        header: EDGE_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::FluctAvg,
        description: "average against maximum of the fluctuation terms Q_i(1/G_ii) across N",
        anchor: "fluct-avg — fluctuation averaging",
        csv: "fluct-avg.csv",
        header: FLUCT_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::LargeDev,
        description: "linear, off-diagonal quadratic and bilinear sums of independent entries against Ψ",
        anchor: "large-dev — large deviation bounds",
        csv: "large-dev.csv",
        header: LARGE_DEV_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::SineKernel,
        description: "unfolded bulk pair correlation against 1 − (sin πr/πr)²",
        anchor: "sine-kernel — sine-kernel determinantal limit of bulk statistics",
        csv: "twopoint.csv",
        header: TWOPOINT_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::Gfc,
        description: "Green function comparison of trace statistics between four-moment-matched ensembles",
        anchor: "gfc — Green function comparison",
        csv: "gfc.csv",
        header: GFC_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::HsCheck,
        description: "Helffer–Sjöstrand and contour functional calculus against the spectral reference",
        anchor: "hs-check — Helffer–Sjöstrand functional calculus",
        csv: "hs-check.csv",
        header: HS_HEADER,
    },
    CatalogEntry {
        experiment: Experiment::RepulsionContrast,
        description: "unfolded nearest-neighbour spacings of GUE against i.i.d. semicircle points",
        anchor: "repulsion-contrast — eigenvalue repulsion versus independent points",
        csv: "repulsion-contrast.csv",
        header: REPULSION_HEADER,
    },
];

pub fn list_experiments() -> &'static [CatalogEntry] {
    &CATALOG
}

pub fn entry(experiment: Experiment) -> &'static CatalogEntry {
    CATALOG.iter().find(|e| e.experiment == experiment).expect("every experiment is catalogued")
}
