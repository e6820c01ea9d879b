//! The two bundled binomial models, analysed and checked value by value.

use insider_na::models::{example_one, example_two, InsiderExample};
use insider_na::rational::format_rational;
use insider_na::{int, rat, Rational};

use crate::analysis::{run_analyze, AnalyzeOptions};
use crate::error::CliError;
use crate::model::ParsedModel;
use crate::report::{AnalysisReport, ExampleParameters, ExampleReport, MarketVerdicts, SideReport};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExampleParams {
    pub u: Option<Rational>,
    pub d: Option<Rational>,
    pub lambda: Option<Rational>,
    pub s0: Option<Rational>,
}

pub fn example_model(ex: &InsiderExample) -> ParsedModel {
    ParsedModel {
        space: ex.model.space.clone(),
        filtration: ex.model.public.clone(),
        processes: vec![("S".to_string(), ex.price.clone())],
        random_times: vec![("tau".to_string(), ex.model.tau.clone())],
    }
}

pub fn build_example(id: u8, params: &ExampleParams) -> Result<InsiderExample, CliError> {
    let u = params.u.clone().unwrap_or_else(|| int(2));
    let d = params.d.clone().unwrap_or_else(|| rat(1, 2));
    let s0 = params.s0.clone().unwrap_or_else(|| int(1));
    match id {
        1 if params.lambda.is_some() => Err(CliError::Usage("--lambda only applies to example 2".into())),
        1 => example_one(u, d, s0).map_err(|e| CliError::Usage(e.to_string())),
        2 => {
            let lambda = params.lambda.clone().unwrap_or_else(|| rat(1, 2));
            example_two(u, d, lambda, s0).map_err(|e| CliError::Usage(e.to_string()))
        }
        other => Err(CliError::Usage(format!("unknown example {other}; expected 1 or 2"))),
    }
}

pub fn run_examples(id: u8, params: &ExampleParams) -> Result<ExampleReport, CliError> {
    let ex = build_example(id, params)?;
    let analysis = run_analyze(&example_model(&ex), &AnalyzeOptions::default())?;
    let mut check = Checker::default();
    expected_common(&ex, &analysis, &mut check);
    if id == 1 {
        expected_one(&ex, &analysis, &mut check);
    } else {
        expected_two(&analysis, &mut check);
    }
    if !check.mismatches.is_empty() {
        return Err(CliError::Invariant(format!(
            "example {id} differs from its displayed values:\n{}",
            check.mismatches.join("\n")
        )));
    }
    Ok(ExampleReport {
        id,
        parameters: ExampleParameters {
            u: format_rational(&ex.u),
            d: format_rational(&ex.d),
            lambda: ex.lambda.as_ref().map(format_rational),
            s0: format_rational(&ex.s0),
            p: format_rational(&ex.p),
        },
        verified_values: check.compared,
        analysis,
    })
}

#[derive(Default)]
struct Checker {
    compared: usize,
    mismatches: Vec<String>,
}

fn strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

fn texts(values: &[&str]) -> Vec<String> {
    values.iter().map(|s| s.to_string()).collect()
}

impl Checker {
    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, what: &str, expected: T, found: &T) {
        self.compared += 1;
        if &expected != found {
            self.mismatches
                .push(format!("  {what}: expected {expected:?}, found {found:?}"));
        }
    }

    fn rows(&mut self, what: &str, expected: &[Vec<Rational>], found: &[Vec<String>]) {
        for (n, row) in expected.iter().enumerate() {
            let got = found.get(n).cloned().unwrap_or_default();
            self.eq(&format!("{what}[{n}]"), strings(row), &got);
        }
    }

    fn side<'a>(&mut self, what: &str, side: &'a Option<SideReport>) -> Option<&'a SideReport> {
        self.compared += 1;
        if side.is_none() {
            self.mismatches.push(format!("  {what}: section missing"));
        }
        side.as_ref()
    }

    fn strategy(&mut self, what: &str, v: &MarketVerdicts, insider: bool, holdings: [Rational; 4], gains: [Rational; 4]) {
        let s = if insider {
            &v.insider
        } else if let Some(public) = &v.public {
            public
        } else {
            self.compared += 1;
            self.mismatches.push(format!("  {what}: no public verdict"));
            return;
        };
        self.eq(&format!("{what} holds"), false, &s.holds);
        let zero = vec![int(0); 4];
        self.eq(
            &format!("{what} strategy"),
            Some(vec![strings(&zero), strings(&holdings)]),
            &s.strategy,
        );
        self.eq(&format!("{what} gains"), Some(strings(&gains)), &s.gains);
    }
}

/// Tables shared by both models, with `a = p` or `a = λ`.
fn expected_common(ex: &InsiderExample, r: &AnalysisReport, c: &mut Checker) {
    let one = int(1);
    let zero = int(0);
    let a = ex.lambda.clone().unwrap_or_else(|| ex.p.clone());
    let ones = vec![one.clone(); 4];
    c.rows(
        "Z",
        &[ones.clone(), vec![one.clone(), one.clone(), &one - &a, &one - &a], vec![zero.clone(); 4]],
        &r.azema.z,
    );
    c.rows(
        "Z~",
        &[ones.clone(), ones.clone(), vec![one.clone(), one.clone(), zero.clone(), one.clone()]],
        &r.azema.z_tilde,
    );
    c.rows(
        "A",
        &[
            vec![zero.clone(); 4],
            vec![zero.clone(), zero.clone(), a.clone(), a.clone()],
            vec![one.clone(), one.clone(), a.clone(), &one + &a],
        ],
        &r.azema.a,
    );
    c.rows(
        "m",
        &[ones.clone(), ones.clone(), vec![one.clone(), one.clone(), a.clone(), &one + &a]],
        &r.azema.m,
    );
    let h = &r.hitting_times;
    c.eq("R1", texts(&["2", "2", "2", "2"]), &h.r1);
    c.eq("R2", texts(&["+inf"; 4]), &h.r2);
    c.eq("R3", texts(&["+inf", "+inf", "2", "+inf"]), &h.r3);
    c.eq("sigma1", texts(&["2", "2", "1", "1"]), &h.sigma1);
    c.eq("sigma2", texts(&["+inf", "+inf", "2", "2"]), &h.sigma2);
    c.eq("sigma3", texts(&["+inf", "+inf", "2", "+inf"]), &h.sigma3);
    c.eq("honest", true, &r.honesty.honest);
    c.eq("strictly honest", true, &r.honesty.strictly_honest);
    let g1: Vec<Vec<String>> = vec![texts(&["ω1", "ω2"]), texts(&["ω3"]), texts(&["ω4"])];
    c.eq("insider filtration at 1", Some(&g1), &r.model.insider_filtration.get(1));

    let (u, d, s0) = (&ex.u, &ex.d, &ex.s0);
    let expected_g = vec![
        vec![s0.clone(); 4],
        vec![u * s0, u * s0, d * s0, d * s0],
        vec![u * u * s0, u * d * s0, d * s0, d * s0],
    ];
    let found = r.insider_martingale.clone().unwrap_or_default();
    c.rows("insider martingale", &expected_g, &found);
    c.eq("public traders, full market", Some(true), &r.full_market.public.as_ref().map(|v| v.holds));
}

fn expected_one(ex: &InsiderExample, r: &AnalysisReport, c: &mut Checker) {
    let (u, d, s0) = (&ex.u, &ex.d, &ex.s0);
    let zero = int(0);
    let up_gain = d * (u - int(1)) * s0;
    let down_gain = d * (int(1) - d) * s0;
    c.eq(
        "public EMM density",
        Some(vec!["1".to_string(); 4]),
        &r.full_market.public.as_ref().and_then(|v| v.emm.clone()),
    );
    c.strategy(
        "insiders, full market",
        &r.full_market,
        true,
        [zero.clone(), zero.clone(), int(1), int(-1)],
        [zero.clone(), zero.clone(), up_gain, down_gain.clone()],
    );
    if let Some(before) = c.side("before τ", &r.before) {
        let v = before.verdicts.clone();
        c.strategy(
            "public traders, stopped market",
            &v,
            false,
            [zero.clone(), zero.clone(), int(-1), int(-1)],
            [zero.clone(), zero.clone(), zero.clone(), down_gain.clone()],
        );
        c.strategy(
            "insiders, stopped market",
            &v,
            true,
            [zero.clone(), zero.clone(), zero.clone(), int(-1)],
            [zero.clone(), zero.clone(), zero.clone(), down_gain.clone()],
        );
        c.eq("exposed before τ", vec![vec![], texts(&["ω3"])], &before.exposed);
        c.eq("before-τ conditions", [false; 4], &flags(before));
    }
    if let Some(after) = c.side("after τ", &r.after) {
        c.eq("exposed after τ", vec![vec![], texts(&["ω4"])], &after.exposed);
        c.eq("after-τ conditions", [false; 4], &flags(after));
    }
}

fn expected_two(r: &AnalysisReport, c: &mut Checker) {
    c.eq("insiders, full market", true, &r.full_market.insider.holds);
    if let Some(before) = c.side("before τ", &r.before) {
        c.eq("insiders, stopped market", true, &before.verdicts.insider.holds);
        c.eq("exposed before τ", vec![Vec::<String>::new(); 2], &before.exposed);
        c.eq("indicator orthogonality before τ", vec![true, true], &before.orthogonality.per_time);
    }
    if let Some(after) = c.side("after τ", &r.after) {
        c.eq("insiders, market after τ", true, &after.verdicts.insider.holds);
        c.eq("exposed after τ", vec![Vec::<String>::new(); 2], &after.exposed);
    }
}

fn flags(side: &SideReport) -> [bool; 4] {
    let c = &side.conditions;
    [c.level_sets, c.hitting_times_aligned, c.predictable, c.density_trivial]
}
