use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use brm_kdf::entropy::{
    average_entropy_loss, chain_rule_certificate, cond_min_entropy_avg, conditioning_value_entropy, min_entropy,
    multivariate_hint, parse_fixture, pointwise_concentration, ChainRuleCertificate, InequalityCheck,
    MultivariateCertificate,
};
use clap::Subcommand;
use serde::Serialize;

use crate::report::{Output, ReportPath, Verdict};

#[derive(Subcommand)]
pub enum EntropyCmd {
    /// Min-entropy figures, elementary inequalities and optional chain-rule
    /// certificates for one fixture.
    Analyze {
        file: PathBuf,
        /// Bits per coordinate; inferred from the largest value if omitted.
        #[arg(long)]
        block_bits: Option<u8>,
        /// Conditioning coordinates, comma separated; defaults to all but
        /// the last.
        #[arg(long, value_delimiter = ',')]
        given: Option<Vec<usize>>,
        /// Build a K-bucket hint and certify the chain rule.
        #[arg(long, value_name = "K")]
        hint: Option<usize>,
        #[arg(long, value_name = "E", default_value_t = 0.25, requires = "hint")]
        epsilon: f64,
        /// Certify the many-block chain rule with parameter D.
        #[arg(long, value_name = "D")]
        multivariate: Option<f64>,
        /// Tail parameter of the pointwise concentration check.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[command(flatten)]
        report: ReportPath,
    },
}

#[derive(Serialize)]
struct Facts {
    average_entropy_loss: Checked,
    pointwise_concentration: Checked,
    conditioning_value_entropy: Checked,
}

#[derive(Serialize)]
struct Checked {
    lhs: f64,
    rhs: f64,
    holds: bool,
}

impl From<InequalityCheck> for Checked {
    fn from(c: InequalityCheck) -> Self {
        Checked {
            lhs: c.lhs,
            rhs: c.rhs,
            holds: c.holds(),
        }
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    fixture: PathBuf,
    arity: usize,
    block_bits: u8,
    outcomes: usize,
    given: Vec<usize>,
    min_entropy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cond_min_entropy_avg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    facts: Option<Facts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain_rule: Option<ChainRuleCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    multivariate: Option<MultivariateCertificate>,
    verdict: Verdict,
}

pub fn run(cmd: EntropyCmd, out: &Output) -> anyhow::Result<Verdict> {
    let EntropyCmd::Analyze {
        file,
        block_bits,
        given,
        hint,
        epsilon,
        multivariate,
        delta,
        report: path,
    } = cmd;
    let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
    let dist = parse_fixture(&text, block_bits)?;
    let arity = dist.arity();
    let given = given.unwrap_or_else(|| (0..arity.saturating_sub(1)).collect());

    let joint = min_entropy(&dist)?;
    let (avg, facts) = if given.is_empty() {
        (None, None)
    } else {
        let facts = Facts {
            average_entropy_loss: average_entropy_loss(&dist, &given)?.into(),
            pointwise_concentration: pointwise_concentration(&dist, &given, delta)?.into(),
            conditioning_value_entropy: conditioning_value_entropy(&dist, &given)?.into(),
        };
        (Some(cond_min_entropy_avg(&dist, &given)?), Some(facts))
    };
    let chain_rule = hint
        .map(|k| chain_rule_certificate(&dist, &given, k, epsilon))
        .transpose()?;
    let multivariate = multivariate.map(|d| multivariate_hint(&dist, d)).transpose()?;

    let facts_ok = facts.as_ref().is_none_or(|f| {
        f.average_entropy_loss.holds && f.pointwise_concentration.holds && f.conditioning_value_entropy.holds
    });
    let ok = facts_ok
        && chain_rule.as_ref().is_none_or(ChainRuleCertificate::holds)
        && multivariate.as_ref().is_none_or(MultivariateCertificate::holds);

    out.note(format!("H∞ = {joint:.6} bits over {} outcomes", dist.len()));
    if let Some(c) = &chain_rule {
        out.note(format!(
            "chain rule (K = {}, ε = {epsilon}): {} violation(s)",
            hint.unwrap(),
            c.violations.len()
        ));
    }
    if let Some(m) = &multivariate {
        out.note(format!(
            "multivariate (D = {}): failing mass {:.3e}",
            m.d_param, m.bad_prob
        ));
    }
    let verdict = Verdict::from_bool(ok);
    let report = AnalyzeReport {
        fixture: file,
        arity,
        block_bits: dist.block_bits(),
        outcomes: dist.len(),
        given,
        min_entropy: joint,
        cond_min_entropy_avg: avg,
        facts,
        chain_rule,
        multivariate,
        verdict,
    };
    out.emit(&path, "entropy analyze", &report, verdict)
}
