//! Operation-count model of the frequency-domain VBW filter.
//!
//! Rates are per output sample. One block costs a real forward FFT, a real
//! inverse FFT, the variable stage (`2·L_V` real multiplications, since the
//! transition samples are real and conjugate symmetric) and the fixed
//! phase stage. FFT counts are split-radix figures for real input; the
//! numbers here are formulas, not measurements of whatever provider the
//! engine happens to use.

use serde::{Deserialize, Serialize};

use crate::spectrum::{transition_bins, BinSpec, TransitionProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingMode {
    General,
    SpecialCase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub filter_len: usize,
    pub fft_len: usize,
    pub block_len: usize,
    pub r_mf: f64,
    pub r_mv: f64,
    pub r_a: f64,
    /// Stored coefficients.
    pub memory: usize,
    pub mode: CountingMode,
    /// Band centre with the most expensive phase stage, highest on ties
    /// (special case only).
    pub worst_case_b: Option<usize>,
    /// Set when a special-case request fell back to general counting.
    pub notice: Option<String>,
}

/// Split-radix real FFT counts `(multiplications, additions)` of one
/// length-`n` transform.
pub fn real_fft_counts(n: usize) -> (f64, f64) {
    let nf = n as f64;
    let lg = nf.log2();
    (0.5 * nf * lg - 1.5 * nf + 2.0, 1.5 * nf * lg - 2.5 * nf + 4.0)
}

/// General phase stage: one complex product per bin, 3 mult + 3 add.
pub fn phase_stage_general(n: usize) -> (f64, f64) {
    (1.5 * n as f64, 1.5 * n as f64)
}

pub fn general_rates(bins: &BinSpec) -> ComplexityReport {
    let (fm, fa) = real_fft_counts(bins.fft_len);
    let (hm, ha) = phase_stage_general(bins.fft_len);
    let m = bins.block_len as f64;
    ComplexityReport {
        filter_len: bins.filter_len,
        fft_len: bins.fft_len,
        block_len: bins.block_len,
        r_mf: (2.0 * fm + hm) / m,
        r_mv: 2.0 * bins.profile_len() as f64 / m,
        r_a: (2.0 * fa + ha) / m,
        memory: bins.profile_len(),
        mode: CountingMode::General,
        worst_case_b: None,
        notice: None,
    }
}

/// `c` with `(L-1)/N = 1/(2c)`, `1 ≤ c ≤ N/4`, if it exists.
pub fn special_case_factor(bins: &BinSpec) -> Option<usize> {
    let num = bins.fft_len;
    let den = 2 * (bins.filter_len - 1);
    if den == 0 || !num.is_multiple_of(den) {
        return None;
    }
    let c = num / den;
    (1..=bins.fft_len / 4).contains(&c).then_some(c)
}

/// `(mult, add)` for the phase factor of bin `k` when `(L-1)/N = 1/(2c)`:
/// the factor is `e^{-jπk/(2c)}`.
pub fn exponent_cost(k: usize, c: usize) -> (usize, usize) {
    if k.is_multiple_of(c) {
        (0, 0)
    } else if c >= 2 && k % c == c / 2 {
        (2, 2)
    } else {
        (3, 3)
    }
}

/// Special-case counting: exponent work over `k = 0..=N/2`, skipping bins
/// whose real sample is zero, worst case over the band centres of `bins`.
/// A `profile` lets exactly-zero transition samples count as zero bins.
pub fn special_case_rates(bins: &BinSpec, profile: Option<&TransitionProfile<f64>>) -> ComplexityReport {
    let Some(c) = special_case_factor(bins) else {
        let mut r = general_rates(bins);
        r.notice = Some(format!(
            "(L-1)/N = {}/{} is not of the form 1/(2c); general counting used",
            bins.filter_len - 1,
            bins.fft_len
        ));
        return r;
    };
    let (fm, fa) = real_fft_counts(bins.fft_len);
    let mut worst: Option<(usize, usize, usize)> = None;
    for b in bins.band_centres() {
        let (k1, k2) = transition_bins(bins, b).expect("centre inside the design range");
        let (mut mults, mut adds) = (0, 0);
        for k in 0..=bins.fft_len / 2 {
            let nonzero = k < k1
                || (k <= k2 && profile.is_none_or(|p| p.values()[k - k1] != 0.0));
            if nonzero {
                let (m, a) = exponent_cost(k, c);
                mults += m;
                adds += a;
            }
        }
        if worst.is_none_or(|(wm, wa, _)| (mults, adds) >= (wm, wa)) {
            worst = Some((mults, adds, b));
        }
    }
    let (hm, ha, wb) = worst.expect("non-empty band range");
    let m = bins.block_len as f64;
    ComplexityReport {
        filter_len: bins.filter_len,
        fft_len: bins.fft_len,
        block_len: bins.block_len,
        r_mf: (2.0 * fm + hm as f64) / m,
        r_mv: 2.0 * bins.profile_len() as f64 / m,
        r_a: (2.0 * fa + ha as f64) / m,
        memory: bins.profile_len(),
        mode: CountingMode::SpecialCase,
        worst_case_b: Some(wb),
        notice: None,
    }
}

/// Cost of retuning: nothing is computed, only `L_V` samples are stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignComplexity {
    pub r_md: f64,
    pub r_ad: f64,
    pub memory: usize,
}

pub fn design_complexity(bins: &BinSpec) -> DesignComplexity {
    DesignComplexity {
        r_md: 0.0,
        r_ad: 0.0,
        memory: bins.profile_len(),
    }
}

/// Published figures of other implementations, for display only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiteratureRow {
    pub label: &'static str,
    pub source: &'static str,
    pub filter_len: usize,
    pub fft_len: Option<usize>,
    pub block_len: Option<usize>,
    pub r_mf: f64,
    pub r_mv: f64,
    pub r_a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiteratureDesignRow {
    pub label: &'static str,
    pub source: &'static str,
    pub r_md: f64,
    pub r_ad: f64,
    pub memory: usize,
}

pub const TD_TD: LiteratureRow = LiteratureRow {
    label: "TD/TD",
    source: "Lowenborg & Johansson (2006), printed values, not computed",
    filter_len: 29,
    fft_len: None,
    block_len: None,
    r_mf: 75.0,
    r_mv: 4.0,
    r_a: 145.0,
};

pub const TD_FD: LiteratureRow = LiteratureRow {
    label: "TD/FD",
    source: "Moryakova et al. (2023), printed values, not computed",
    filter_len: 29,
    fft_len: Some(128),
    block_len: Some(100),
    r_mf: 5.2,
    r_mv: 1.9,
    r_a: 23.8,
};

pub const LITERATURE: [LiteratureRow; 2] = [TD_TD, TD_FD];

pub const LITERATURE_DESIGN: [LiteratureDesignRow; 3] = [
    LiteratureDesignRow {
        label: "TD/TD",
        source: "Lowenborg & Johansson (2006), printed values, not computed",
        r_md: 0.0,
        r_ad: 1.0,
        memory: 1,
    },
    LiteratureDesignRow {
        label: "TD/FD(a)",
        source: "Moryakova et al. (2023), printed values, not computed",
        r_md: 5.2,
        r_ad: 5.1,
        memory: 640,
    },
    LiteratureDesignRow {
        label: "TD/FD(b)",
        source: "Moryakova et al. (2023), printed values, not computed",
        r_md: 7.7,
        r_ad: 15.4,
        memory: 75,
    },
];

/// Percentage saving of `ours` relative to `theirs`; negative when ours is
/// more expensive.
pub fn saving(ours: f64, theirs: f64) -> f64 {
    (1.0 - ours / theirs) * 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Savings {
    pub against: String,
    pub r_mf: f64,
    pub r_mv: f64,
    pub r_a: f64,
}

pub fn savings_against(ours: &ComplexityReport, label: &str, r_mf: f64, r_mv: f64, r_a: f64) -> Savings {
    Savings {
        against: label.to_string(),
        r_mf: saving(ours.r_mf, r_mf),
        r_mv: saving(ours.r_mv, r_mv),
        r_a: saving(ours.r_a, r_a),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub designs: Vec<(ComplexityReport, DesignComplexity)>,
    pub literature: Vec<LiteratureRow>,
    pub literature_design: Vec<LiteratureDesignRow>,
    pub savings: Vec<Savings>,
    pub markdown: String,
}

fn opt(x: Option<usize>) -> String {
    x.map_or("-".into(), |v| v.to_string())
}

/// Builds the comparison document. Savings are listed for the first
/// design against every literature row and against every other design.
pub fn emit_report(reports: &[(ComplexityReport, DesignComplexity)], with_literature: bool) -> ReportDocument {
    let literature: Vec<LiteratureRow> = if with_literature { LITERATURE.to_vec() } else { Vec::new() };
    let literature_design: Vec<LiteratureDesignRow> =
        if with_literature { LITERATURE_DESIGN.to_vec() } else { Vec::new() };
    let mut savings = Vec::new();
    if let Some((first, _)) = reports.first() {
        for row in &literature {
            savings.push(savings_against(first, row.label, row.r_mf, row.r_mv, row.r_a));
        }
        for (i, (other, _)) in reports.iter().enumerate().skip(1) {
            let label = format!("design #{} (L={}, N={})", i + 1, other.filter_len, other.fft_len);
            savings.push(savings_against(first, &label, other.r_mf, other.r_mv, other.r_a));
        }
    }

    let mut md = String::new();
    md.push_str("| Design/Impl. | L | N | M | R_mf | R_mv | R_a | mode |\n");
    md.push_str("|---|---:|---:|---:|---:|---:|---:|---|\n");
    for row in &literature {
        md.push_str(&format!(
            "| {} | {} | {} | {} | {:.1} | {:.1} | {:.1} | not computed |\n",
            row.label,
            row.filter_len,
            opt(row.fft_len),
            opt(row.block_len),
            row.r_mf,
            row.r_mv,
            row.r_a
        ));
    }
    for (i, (r, _)) in reports.iter().enumerate() {
        let mode = match (r.mode, r.worst_case_b) {
            (CountingMode::SpecialCase, Some(b)) => format!("special case, worst b_N = {b}"),
            (CountingMode::SpecialCase, None) => "special case".into(),
            (CountingMode::General, _) if r.notice.is_some() => "general (fallback)".into(),
            (CountingMode::General, _) => "general".into(),
        };
        md.push_str(&format!(
            "| FD/FD #{} | {} | {} | {} | {:.3} | {:.4} | {:.3} | {} |\n",
            i + 1,
            r.filter_len,
            r.fft_len,
            r.block_len,
            r.r_mf,
            r.r_mv,
            r.r_a,
            mode
        ));
    }
    for s in &savings {
        md.push_str(&format!(
            "| saving vs {} | | | | {:.1}% | {:.1}% | {:.1}% | |\n",
            s.against, s.r_mf, s.r_mv, s.r_a
        ));
    }
    md.push('\n');
    md.push_str("| Design/Impl. | R_md | R_ad | Mem. |\n");
    md.push_str("|---|---:|---:|---:|\n");
    for row in &literature_design {
        md.push_str(&format!(
            "| {} | {:.1} | {:.1} | {} |\n",
            row.label, row.r_md, row.r_ad, row.memory
        ));
    }
    for (i, (_, d)) in reports.iter().enumerate() {
        md.push_str(&format!("| FD/FD #{} | {} | {} | {} |\n", i + 1, d.r_md, d.r_ad, d.memory));
    }
    for (r, _) in reports {
        if let Some(n) = &r.notice {
            md.push_str(&format!("\nnote: {n}\n"));
        }
    }

    ReportDocument {
        designs: reports.to_vec(),
        literature,
        literature_design,
        savings,
        markdown: md,
    }
}
