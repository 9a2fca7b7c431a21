//! One function per task; each fills a [`Report`] and records failed checks.

use fraclab_core::field::{CosineField, FundamentalField, PolyField, ProfileField, ScalarField};
use fraclab_core::harmonics::{annulus_frac_lap_poly, harmonic_basis, harmonic_dim, zj_coefficients, Polynomial};
use fraclab_core::identities::{
    check_identity_ps, check_identity_qs, check_identity_rs, cs_ratio_numeric, make_test_function, BumpKind, BumpSpec, IdentityBudget,
    IdentityReport,
};
use fraclab_core::kernels::{
    fundamental_ps, green_ball_with, green_halfspace_with, poisson_ball, poisson_ball_mass, poisson_halfspace, poisson_halfspace_mass,
    GreenNorm, KernelValue, NormMode,
};
use fraclab_core::limits::{boundary_layer_study, green_limit_study, poisson_limit_study, CompactBox, Layer};
use fraclab_core::pvlap::{annulus_frac_lap, pv_frac_lap, separable_frac_lap, symmetrized_frac_lap, QuadratureSpec};
use fraclab_core::wos::{wos_estimate, ExteriorData, WalkConfig};
use fraclab_core::{CsMode, QuadOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{RunConfig, Task};
use crate::error::CliError;
use crate::report::{num, vec_cell, Report};

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Runs the configured task; check failures are recorded in the report.
pub fn run_and_report(cfg: &RunConfig) -> Result<Report, CliError> {
    let run = || match cfg.task {
        Task::Constants => constants(cfg),
        Task::Eval => eval(cfg),
        Task::Kernel => kernel(cfg),
        Task::VerifyPoly => verify_poly(cfg),
        Task::VerifyIdentity => verify_identity(cfg),
        Task::Converge => converge(cfg),
        Task::Wos => wos(cfg),
    };
    match cfg.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| CliError::Precondition { path: "jobs".into(), msg: e.to_string() })?
            .install(run),
        None => run(),
    }
}

fn point(cfg: &RunConfig, key: &str, default: impl FnOnce(usize) -> Vec<f64>) -> Result<Vec<f64>, CliError> {
    let n = cfg.order.dim();
    let x = cfg.param_list(key)?.unwrap_or_else(|| default(n));
    if x.len() != n {
        return Err(cfg.precondition(key, format!("expected {n} coordinates, found {}", x.len())));
    }
    Ok(x)
}

fn axis_point(n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    x
}

fn constants(cfg: &RunConfig) -> Result<Report, CliError> {
    let c = cfg.order.constants();
    let mut r = Report::new(Task::Constants, 1, cfg.inputs(), &["name", "value"]);
    let mut pairs = vec![
        ("c_ns", c.c_ns),
        ("kappa_ns", c.kappa_ns),
        ("K_s_paper", c.k_s_paper),
        ("K_s_exact", c.k_s_exact),
        ("C_s_derived", c.c_s_derived),
        ("C_s_paper", c.c_s_paper),
        ("C_s_exact", c.c_s_exact),
        ("green_norm_paper", c.green_norm_paper()),
        ("green_norm_exact", c.green_norm_bgr),
        ("C1", c.layer_c1),
        ("C2", c.layer_c2),
    ];
    if cfg.order.dim() >= 2 {
        pairs.push(("C2_over_C1", cs_ratio_numeric(cfg.order.dim(), cfg.order.s())?));
    }
    for (k, v) in &pairs {
        r.output(k, v);
        r.row(vec![k.to_string(), v.to_string()]);
    }
    r.diag("paper_k_over_kappa", c.k_s_paper / c.kappa_ns);
    Ok(r)
}

enum EvalField {
    Plain(Box<dyn ScalarField>, Option<f64>),
    Separable(ProfileField, PolyField, bool),
}

fn parse_field(cfg: &RunConfig, x: &[f64]) -> Result<EvalField, CliError> {
    let n = cfg.order.dim();
    let s = cfg.order.s();
    let spec = cfg.param_str("field").unwrap_or("cos:1");
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let bad = |msg: String| cfg.precondition("field", msg);
    Ok(match kind {
        "cos" => {
            let mut xi: Vec<f64> = arg
                .split([',', ';'])
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad(format!("bad frequency '{t}'"))))
                .collect::<Result<_, _>>()?;
            if xi.len() == 1 && n > 1 {
                xi.resize(n, 0.0);
            }
            if xi.len() != n {
                return Err(bad(format!("frequency needs {n} components")));
            }
            let k = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
            let u = CosineField::new(xi);
            let reference = k.powf(2.0 * s) * u.eval(x);
            EvalField::Plain(Box::new(u), Some(reference))
        }
        "poly" => {
            let p = Polynomial::parse(n, arg)?;
            EvalField::Plain(Box::new(p.to_field()), None)
        }
        "rs" => EvalField::Plain(Box::new(ProfileField::rs(&cfg.order)), Some(0.0)),
        "qs" => EvalField::Plain(Box::new(ProfileField::qs(&cfg.order)), Some(0.0)),
        "ps" => EvalField::Plain(Box::new(FundamentalField::new(&cfg.order)), Some(0.0)),
        "sep-rs" | "sep-qs" => {
            if n < 2 {
                return Err(bad("separable fields need N >= 2".into()));
            }
            let h = Polynomial::parse(n - 1, arg)?;
            let harmonic = h.laplacian().is_zero();
            let profile = if kind == "sep-rs" { ProfileField::rs(&cfg.order) } else { ProfileField::qs(&cfg.order) };
            EvalField::Separable(profile, h.to_field(), harmonic)
        }
        _ => return Err(bad(format!("unknown field '{kind}' (cos, poly, rs, qs, ps, sep-rs, sep-qs)"))),
    })
}

fn eval(cfg: &RunConfig) -> Result<Report, CliError> {
    let o = &cfg.order;
    let x = point(cfg, "x", axis_point)?;
    let mode = cfg.param_str("mode").unwrap_or("pv").to_string();
    let tol: f64 = cfg.param("tol", "positive real")?.unwrap_or(1e-3);
    if !(tol > 0.0) {
        return Err(cfg.precondition("tol", "must be positive"));
    }
    let spec = QuadratureSpec::default();
    let field = parse_field(cfg, &x)?;
    let mut r =
        Report::new(Task::Eval, 1, cfg.inputs(), &["N", "s", "field", "x", "mode", "value", "error_estimate", "reference", "diverging"]);
    let (value, err, diverging, budget, reference, local) = match (&field, mode.as_str()) {
        (EvalField::Separable(p, h, harmonic), _) => {
            let res = separable_frac_lap(o, p, h, &x, &spec)?;
            let local = x[0].powf(p.exponent) * h.eval(&x[1..]);
            (res.value, res.error_estimate, res.diverging, res.budget, harmonic.then_some(0.0), local)
        }
        (EvalField::Plain(u, reference), "pv" | "symmetrized") => {
            let res = if mode == "pv" { pv_frac_lap(o, u.as_ref(), &x, &spec)? } else { symmetrized_frac_lap(o, u.as_ref(), &x, &spec)? };
            (res.value, res.error_estimate, res.diverging, res.budget, *reference, u.eval(&x))
        }
        (EvalField::Plain(u, _), "annulus") => {
            let eps: f64 = cfg.param("eps", "positive real")?.unwrap_or(1e-3);
            let big_r: f64 = cfg.param("R", "positive real")?.unwrap_or(1.0 / eps);
            if !(eps > 0.0 && big_r > eps) {
                return Err(cfg.precondition("eps", "need 0 < eps < R"));
            }
            let v = annulus_frac_lap(o, u.as_ref(), &x, eps, big_r, &spec)?;
            (v, f64::NAN, false, 0, None, u.eval(&x))
        }
        (_, m) => return Err(cfg.precondition("mode", format!("unknown mode '{m}' (pv, symmetrized, annulus)"))),
    };
    let field_label = cfg.param_str("field").unwrap_or("cos:1").to_string();
    r.output("value", value);
    r.output("reference", reference);
    r.diag("error_estimate", err);
    r.diag("diverging", diverging);
    r.diag("evaluations", budget);
    r.row(vec![
        o.dim().to_string(),
        o.s().to_string(),
        field_label,
        vec_cell(&x),
        mode,
        num(value),
        num(err),
        reference.map(num).unwrap_or_default(),
        diverging.to_string(),
    ]);
    if diverging {
        r.fail("principal value diverging");
    }
    if let Some(re) = reference {
        let scale = if re != 0.0 { re.abs() } else { local.abs().max(f64::MIN_POSITIVE) };
        let gap = (value - re).abs() / scale;
        r.diag("scaled_gap", gap);
        if !(gap <= tol) {
            r.fail(format!("scaled gap {gap:e} above tolerance {tol:e}"));
        }
    }
    Ok(r)
}

fn norm_mode(cfg: &RunConfig, default: NormMode) -> Result<NormMode, CliError> {
    match cfg.param_str("norm_mode") {
        None => Ok(default),
        Some("paper") => Ok(NormMode::PaperK),
        Some("probabilistic") => Ok(NormMode::ProbabilisticKappa),
        Some(v) => Err(cfg.precondition("norm_mode", format!("'{v}' is not paper or probabilistic"))),
    }
}

fn kernel(cfg: &RunConfig) -> Result<Report, CliError> {
    let o = &cfg.order;
    let n = o.dim();
    let kind = cfg.param_str("kind").unwrap_or("poisson-half").to_string();
    let x = point(cfg, "x", |n| {
        let mut x = vec![0.0; n];
        x[0] = 0.5;
        x
    })?;
    let big_r: f64 = cfg.param("R", "positive real")?.unwrap_or(1.0);
    if !(big_r > 0.0) {
        return Err(cfg.precondition("R", "must be positive"));
    }
    let mode = norm_mode(cfg, NormMode::PaperK)?;
    let green = match cfg.param_str("green_norm") {
        None | Some("paper") => GreenNorm::Paper,
        Some("exact") => GreenNorm::Exact,
        Some(v) => return Err(cfg.precondition("green_norm", format!("'{v}' is not paper or exact"))),
    };
    let y_default = |n: usize| {
        let mut y = vec![0.0; n];
        y[0] = -1.5;
        y
    };
    let needs_y = kind != "fundamental";
    let y = if needs_y { point(cfg, "y", y_default)? } else { Vec::new() };
    let value: KernelValue = match kind.as_str() {
        "green-ball" => green_ball_with(o, &x, &y, big_r, green)?,
        "green-half" => green_halfspace_with(o, &x, &y, green)?,
        "poisson-ball" => poisson_ball(o, &x, &y, big_r, mode)?,
        "poisson-half" => KernelValue::Finite(poisson_halfspace(o, &x, &y, mode)?),
        "fundamental" => fundamental_ps(o, &x)?,
        k => {
            return Err(
                cfg.precondition("kind", format!("unknown kernel '{k}' (green-ball, green-half, poisson-ball, poisson-half, fundamental)"))
            )
        }
    };
    let opts = QuadOptions::new(1e-12, 1e-10);
    let mass = match kind.as_str() {
        "poisson-ball" if n <= 3 => Some(poisson_ball_mass(o, &x, big_r, mode, &opts)?),
        "poisson-half" if n <= 3 => Some(poisson_halfspace_mass(o, &x, mode, &opts)?),
        _ => None,
    };
    let mut r = Report::new(Task::Kernel, 1, cfg.inputs(), &["N", "s", "kind", "x", "y", "R", "value", "singular", "mass"]);
    r.output("value", value.finite());
    r.output("singular", value.is_singular());
    r.output("mass", mass);
    r.diag("norm_mode", mode);
    r.row(vec![
        n.to_string(),
        o.s().to_string(),
        kind,
        vec_cell(&x),
        vec_cell(&y),
        big_r.to_string(),
        value.finite().map(num).unwrap_or_default(),
        value.is_singular().to_string(),
        mass.map(num).unwrap_or_default(),
    ]);
    if value.is_singular() {
        r.fail("kernel evaluated on its singular set");
    }
    Ok(r)
}

fn verify_poly(cfg: &RunConfig) -> Result<Report, CliError> {
    let o = &cfg.order;
    let n = o.dim();
    let m: u32 = cfg.param("m", "nonnegative integer")?.unwrap_or(2);
    let eps = cfg.param_list("eps")?.unwrap_or_else(|| vec![0.5, 0.1, 1e-3]);
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(cfg.precondition("eps", "radii must be positive"));
    }
    let x = point(cfg, "x", |n| [0.7, -0.4, 0.25, 1.1, -0.6, 0.35].iter().cycle().take(n).cloned().collect())?;
    let random: usize = cfg.param("random", "nonnegative integer")?.unwrap_or(20);
    let basis = harmonic_basis(n, m)?;
    let dim = harmonic_dim(n, m)?;
    let mut r = Report::new(Task::VerifyPoly, 1, cfg.inputs(), &["N", "m", "index", "polynomial", "residual"]);
    let mut worst: f64 = 0.0;
    for (i, p) in basis.iter().enumerate() {
        let mut res: f64 = 0.0;
        for &e in &eps {
            res = res.max(annulus_frac_lap_poly(o, p, &x, e)?.abs());
        }
        worst = worst.max(res);
        r.row(vec![n.to_string(), m.to_string(), i.to_string(), p.to_string(), res.to_string()]);
    }
    if basis.len() as u64 != dim {
        r.fail(format!("basis has {} elements, expected {dim}", basis.len()));
    }
    if worst != 0.0 {
        r.fail(format!("nonzero residual {worst:e} on a harmonic basis element"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(DEFAULT_SEED));
    let mut detected = 0;
    let mut drawn = 0;
    while drawn < random && m >= 2 {
        let p = Polynomial::random_homogeneous(n, m, 5, &mut rng);
        if p.laplacian().is_zero() {
            continue;
        }
        drawn += 1;
        if !zj_coefficients(&p, &x)?.all_zero() {
            detected += 1;
        }
    }
    if detected != drawn {
        r.fail(format!("{detected} of {drawn} non-harmonic polynomials had a nonzero Z_j"));
    }
    r.output("dimension", dim);
    r.output("basis_len", basis.len());
    r.output("max_residual", worst);
    r.diag("nonharmonic_drawn", drawn);
    r.diag("nonharmonic_detected", detected);
    Ok(r)
}

fn verify_identity(cfg: &RunConfig) -> Result<Report, CliError> {
    let o = &cfg.order;
    let n = o.dim();
    if n > 2 {
        return Err(CliError::Precondition { path: "N".into(), msg: "identity checks support N = 1 and N = 2".into() });
    }
    let which = cfg.param_str("which").unwrap_or("all").to_string();
    let cs_mode = match cfg.param_str("cs_mode") {
        None | Some("derived") => CsMode::Derived,
        Some("paper") => CsMode::Paper,
        Some("exact") => CsMode::Exact,
        Some(v) => return Err(cfg.precondition("cs_mode", format!("'{v}' is not derived, paper or exact"))),
    };
    let ks_exact = match cfg.param_str("ks_mode") {
        None | Some("paper") => false,
        Some("exact") => true,
        Some(v) => return Err(cfg.precondition("ks_mode", format!("'{v}' is not paper or exact"))),
    };
    let kind = match cfg.param_str("bump") {
        None | Some("exponential") => BumpKind::Exponential,
        Some("polynomial") => BumpKind::Polynomial,
        Some(v) => return Err(cfg.precondition("bump", format!("'{v}' is not exponential or polynomial"))),
    };
    let radius: f64 = cfg.param("radius", "positive real")?.unwrap_or(1.0);
    let tol: Option<f64> = cfg.param("tol", "positive real")?;
    let phi = make_test_function(o, BumpSpec::at_origin(n, radius, kind))?;
    let budget = IdentityBudget::default();
    let mut reports: Vec<(IdentityReport, f64)> = Vec::new();
    if matches!(which.as_str(), "all" | "ps") {
        let mut rep = check_identity_ps(o, &phi, &budget)?;
        if ks_exact {
            let v = rep.variants.remove(0);
            rep.variants.push(fraclab_core::identities::IdentityVariant {
                label: "paper K_s".into(),
                lhs: rep.lhs,
                rhs: rep.rhs,
                rel_gap: rep.rel_gap,
            });
            rep.lhs = v.lhs;
            rep.rel_gap = v.rel_gap;
            rep.abs_gap = (v.lhs - v.rhs).abs();
            rep.constant_mode = v.label;
        }
        reports.push((rep, tol.unwrap_or(0.05)));
    }
    if matches!(which.as_str(), "all" | "qs") {
        reports.push((check_identity_qs(o, &phi, cs_mode, &budget)?, tol.unwrap_or(0.05)));
    }
    if matches!(which.as_str(), "all" | "rs") {
        reports.push((check_identity_rs(o, &phi, &budget)?, tol.unwrap_or(0.01)));
    }
    if reports.is_empty() {
        return Err(cfg.precondition("which", format!("'{which}' is not ps, qs, rs or all")));
    }
    let mut r = Report::new(
        Task::VerifyIdentity,
        1,
        cfg.inputs(),
        &["identity", "N", "s", "constant_mode", "lhs", "rhs", "abs_gap", "rel_gap", "selected"],
    );
    for (rep, tol) in &reports {
        r.row(vec![
            rep.identity.clone(),
            n.to_string(),
            o.s().to_string(),
            rep.constant_mode.clone(),
            num(rep.lhs),
            num(rep.rhs),
            num(rep.abs_gap),
            num(rep.rel_gap),
            "true".into(),
        ]);
        for v in &rep.variants {
            r.row(vec![
                rep.identity.clone(),
                n.to_string(),
                o.s().to_string(),
                v.label.clone(),
                num(v.lhs),
                num(v.rhs),
                num((v.lhs - v.rhs).abs()),
                num(v.rel_gap),
                "false".into(),
            ]);
        }
        if !(rep.rel_gap <= *tol) {
            r.fail(format!("{} identity gap {:.3e} above {tol}", rep.identity, rep.rel_gap));
        }
    }
    r.output("reports", reports.iter().map(|p| &p.0).collect::<Vec<_>>());
    r.diag("x_s_surrogate", "uniform bound on a finite eps grid, not a proof of membership");
    Ok(r)
}

fn converge(cfg: &RunConfig) -> Result<Report, CliError> {
    let o = &cfg.order;
    let n = o.dim();
    let study = cfg.param_str("study").unwrap_or("green").to_string();
    let grid = cfg.param_list("grid")?.unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3, 1e-4]);
    let compact = match cfg.param_list("box")? {
        None => CompactBox::slab(n, 0.5, 2.0, 1.0)?,
        Some(v) if v.len() == 2 * n => {
            let lo = v.iter().step_by(2).cloned().collect();
            let hi = v.iter().skip(1).step_by(2).cloned().collect();
            CompactBox::new(lo, hi).map_err(|e| cfg.precondition("box", e.to_string()))?
        }
        Some(v) => return Err(cfg.precondition("box", format!("expected {} numbers lo1,hi1,..., found {}", 2 * n, v.len()))),
    };
    let st = match study.as_str() {
        "green" => green_limit_study(o, &grid, &compact)?,
        "poisson" => poisson_limit_study(o, &grid, &compact)?,
        "mu" => boundary_layer_study(o, Layer::Mu, &grid, &compact)?,
        "nu" => boundary_layer_study(o, Layer::Nu, &grid, &compact)?,
        s => return Err(cfg.precondition("study", format!("unknown study '{s}' (green, poisson, mu, nu)"))),
    };
    let mut r = Report::new(Task::Converge, 1, cfg.inputs(), &["study", "N", "s", "eps", "sup_error", "l1s_error", "fitted_rate"]);
    for (k, e) in st.eps_grid.iter().enumerate() {
        r.row(vec![
            st.study.name().into(),
            n.to_string(),
            o.s().to_string(),
            e.to_string(),
            num(st.sup_errors[k]),
            num(st.l1s_errors[k]),
            st.fitted_rate.slope.to_string(),
        ]);
    }
    if st.l1s_errors.windows(2).any(|w| !(w[1] < w[0])) {
        r.fail("weighted L1 errors are not decreasing");
    }
    if let (Some(k), Some(k_ref)) = (st.leading_constant, st.reference_constant) {
        let rel = (k - k_ref).abs() / k_ref.abs();
        r.diag("leading_constant_rel_gap", rel);
        if !(rel <= 1e-6) {
            r.fail(format!("leading constant {k} differs from {k_ref}"));
        }
    }
    if let Some(rate) = cfg.param::<f64>("expect_rate", "real")? {
        let tol: f64 = cfg.param("rate_tol", "positive real")?.unwrap_or(0.1);
        if !((st.fitted_rate.slope - rate).abs() <= tol) {
            r.fail(format!("fitted rate {:.4} not within {tol} of {rate}", st.fitted_rate.slope));
        }
    }
    r.diag("fitted_rate_half_width", st.fitted_rate.half_width);
    r.diag("l1s_rate", st.l1s_rate);
    r.diag("notes", &st.notes);
    r.output("study", &st);
    Ok(r)
}

fn parse_data(cfg: &RunConfig) -> Result<ExteriorData, CliError> {
    let n = cfg.order.dim();
    let spec = cfg.param_str("data").unwrap_or("one");
    let bad = |m: String| cfg.precondition("data", m);
    let nums = |t: &str| -> Result<Vec<f64>, CliError> {
        t.split(',')
            .filter(|v| !v.trim().is_empty())
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad(format!("bad number '{v}'"))))
            .collect()
    };
    if spec == "one" {
        return Ok(ExteriorData::Constant(1.0));
    }
    if let Some(c) = spec.strip_prefix("const:") {
        return Ok(ExteriorData::Constant(c.trim().parse().map_err(|_| bad(format!("bad constant '{c}'")))?));
    }
    if let Some(b) = spec.strip_prefix("box:") {
        let (lo, hi) = b.split_once(';').ok_or_else(|| bad("box data is box:lo1,..;hi1,..".into()))?;
        let (lo, hi) = (nums(lo)?, nums(hi)?);
        if lo.len() != n || hi.len() != n {
            return Err(bad(format!("box corners need {n} coordinates")));
        }
        return Ok(ExteriorData::BoxIndicator { lo, hi });
    }
    Err(bad(format!("unknown exterior data '{spec}' (one, const:c, box:lo;hi)")))
}

fn wos(cfg: &RunConfig) -> Result<Report, CliError> {
    let o = &cfg.order;
    let x = point(cfg, "x", axis_point)?;
    let walks: u64 = cfg.param("walks", "positive integer")?.unwrap_or(100_000);
    let max_steps: u32 = cfg.param("max_steps", "positive integer")?.unwrap_or(10_000);
    let mode = norm_mode(cfg, NormMode::ProbabilisticKappa)?;
    let data = parse_data(cfg)?;
    let config = WalkConfig { n_walks: walks, max_steps, seed: cfg.seed.unwrap_or(DEFAULT_SEED), norm_check: true };
    let mut st = wos_estimate(o, &x, &data, &config)?;
    let scale = mode.prefactor(o) / NormMode::ProbabilisticKappa.prefactor(o);
    st.reference = st.reference.map(|v| v * scale);
    let mut r = Report::new(
        Task::Wos,
        1,
        cfg.inputs(),
        &["N", "s", "x", "walks", "seed", "estimate", "std_error", "mean_steps", "capped_fraction", "reference"],
    );
    r.row(vec![
        o.dim().to_string(),
        o.s().to_string(),
        vec_cell(&x),
        walks.to_string(),
        config.seed.to_string(),
        num(st.estimate),
        num(st.std_error),
        st.mean_steps.to_string(),
        st.capped_fraction.to_string(),
        st.reference.map(num).unwrap_or_default(),
    ]);
    if let Some(z) = st.z_score() {
        r.diag("z_score", z);
        if !(z <= 3.0) {
            r.fail(format!("estimate {} is {z:.2} standard errors from the quadrature value", st.estimate));
        }
    }
    if st.bias_warning {
        r.fail(format!("{:.2}% of walks hit max_steps", 100.0 * st.capped_fraction));
    }
    r.diag("bias_warning", st.bias_warning);
    r.diag("norm_mode", mode);
    r.output("stats", st);
    Ok(r)
}
