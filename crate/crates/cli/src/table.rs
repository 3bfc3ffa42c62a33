use charconv_core::estimate::WindowFit;
use charconv_core::{FitResult, ScoredMoveSpace};

/// Four fractional digits; exact binary ties round half to even, which is
/// what `format!` does. Negative zero prints as zero.
pub fn decimal(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".to_owned()
    } else {
        s
    }
}

pub fn scored_space(space: &ScoredMoveSpace) -> String {
    let width = space
        .entries()
        .iter()
        .map(|e| e.candidate.label.chars().count())
        .max()
        .unwrap_or(0)
        .max("label".len());
    let mut out = format!(
        "{:<width$}  {:>8}  {:>8}  {:>8}  {:>8}  {:>11}\n",
        "label", "s_self", "s_other", "d*p", "rho", "probability"
    );
    for e in space.entries() {
        out.push_str(&format!(
            "{:<width$}  {:>8}  {:>8}  {:>8}  {:>8}  {:>11}\n",
            e.candidate.label,
            decimal(e.factors.s_self),
            decimal(e.factors.s_other),
            decimal(e.factors.conf_mass),
            decimal(e.rho),
            decimal(e.probability),
        ));
    }
    out
}

pub fn fit_result(fit: &FitResult) -> String {
    let w = fit.weights;
    format!(
        "alpha           {}\nbeta            {}\ngamma           {}\nlog_likelihood  {}\nidentifiable    {}\nconverged       {}\niterations      {}\n",
        decimal(w.alpha()),
        decimal(w.beta()),
        decimal(w.gamma()),
        decimal(fit.log_likelihood),
        fit.identifiable,
        fit.converged,
        fit.iterations,
    )
}

pub fn windows(fits: &[WindowFit]) -> String {
    let mut out = String::from("window         alpha    beta     gamma    shift    change\n");
    for f in fits {
        let w = f.weights;
        out.push_str(&format!(
            "{:>5}..{:<5}  {}  {}  {}  {:>7}  {}\n",
            f.start,
            f.end,
            decimal(w.alpha()),
            decimal(w.beta()),
            decimal(w.gamma()),
            f.shift.map(decimal).unwrap_or_else(|| "-".into()),
            if f.change_point { "yes" } else { "no" },
        ));
    }
    out
}
